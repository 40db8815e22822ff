"""Pure-Python record encoder/decoder (fallback for the compiled kernel).

Record layout (little-endian), after the trace header:
    tag u8; ASB: cycles u64, method_id u32
            SSB/PSB: cycles u64, method_id u32, stream_id u64
            SE: cycles u64
"""

from __future__ import annotations

import struct

from .errors import MalformedTrace

_ASB = struct.Struct("<BQI")
_NAMED = struct.Struct("<BQIQ")
_SE = struct.Struct("<BQ")


def encode_records(events) -> bytes:
    parts = []
    for tag, cycles, stream_id, method_id in events:
        if tag == 0:
            parts.append(_ASB.pack(0, cycles, method_id))
        elif tag == 3:
            parts.append(_SE.pack(3, cycles))
        elif tag in (1, 2):
            parts.append(_NAMED.pack(tag, cycles, method_id, stream_id))
        else:
            raise ValueError(f"unknown event tag {tag}")
    return b"".join(parts)


def decode_records(data: bytes, offset: int, path: str | None = None) -> list:
    """Decode records from data[offset:] to the end of the buffer.

    Returns (tag, cycles, stream_id, method_id) tuples in SpanEvent field
    order (stream_id is -1 for ASB/SE, method_id 0 for SE).
    """
    events = []
    pos = offset
    end = len(data)
    while pos < end:
        tag = data[pos]
        if tag == 0:
            if pos + 13 > end:
                raise MalformedTrace("Truncated", "truncated ASB record",
                                     path, pos)
            _, cycles, method_id = _ASB.unpack_from(data, pos)
            events.append((0, cycles, -1, method_id))
            pos += 13
        elif tag == 3:
            if pos + 9 > end:
                raise MalformedTrace("Truncated", "truncated SE record",
                                     path, pos)
            _, cycles = _SE.unpack_from(data, pos)
            events.append((3, cycles, -1, 0))
            pos += 9
        elif tag in (1, 2):
            if pos + 21 > end:
                raise MalformedTrace("Truncated", "truncated named record",
                                     path, pos)
            _, cycles, method_id, stream_id = _NAMED.unpack_from(data, pos)
            events.append((tag, cycles, stream_id, method_id))
            pos += 21
        else:
            raise MalformedTrace("UnknownTag", f"unknown record tag {tag}",
                                 path, pos)
    return events
