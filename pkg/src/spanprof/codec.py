"""Trace-file framing and record codec selection.

Trace file (binary, little-endian):
    magic "SPTR", version u16 = 1,
    cycle-source descriptor: kind u8, nominal_frequency_hz u64 (0 = absent),
        platform_label u16 length + UTF-8 bytes,
    thread_id u64, thread_name u16 length + UTF-8 bytes,
    then records (see _record_codec_py).

The record codec is the hot kernel: a compiled Cython implementation is
preferred, with a pure-Python fallback selected at import time (or forced
with SPANPROF_PURE=1).
"""

from __future__ import annotations

import os
import struct

from .cycles import CycleSourceDescriptor
from .errors import IoFailure, MalformedTrace

if os.environ.get("SPANPROF_PURE") == "1":
    from . import _record_codec_py as _kernel
    KERNEL = "python"
else:
    try:
        from . import _record_codec as _kernel  # type: ignore[attr-defined]
        KERNEL = "cython"
    except ImportError:
        from . import _record_codec_py as _kernel
        KERNEL = "python"

encode_records = _kernel.encode_records
decode_records = _kernel.decode_records

MAGIC = b"SPTR"
FORMAT_VERSION = 1


def encode_header(descriptor: CycleSourceDescriptor, thread_id: int,
                  thread_name: str) -> bytes:
    label = descriptor.platform_label.encode("utf-8")
    name = thread_name.encode("utf-8")
    freq = descriptor.nominal_frequency_hz or 0
    return b"".join([
        MAGIC,
        struct.pack("<H", FORMAT_VERSION),
        struct.pack("<BQ", descriptor.kind_code, freq),
        struct.pack("<H", len(label)), label,
        struct.pack("<Q", thread_id),
        struct.pack("<H", len(name)), name,
    ])


def decode_header(data: bytes, path: str | None = None):
    """Returns (descriptor, thread_id, thread_name, records_offset)."""
    def need(pos, count, what):
        if pos + count > len(data):
            raise MalformedTrace("Truncated", f"truncated {what}", path, pos)

    need(0, 4, "magic")
    if data[:4] != MAGIC:
        raise MalformedTrace("BadMagic", "bad trace magic", path, 0)
    need(4, 2, "version")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != FORMAT_VERSION:
        raise MalformedTrace("BadVersion",
                             f"unsupported trace format version {version}",
                             path, 4)
    pos = 6
    need(pos, 9, "cycle-source descriptor")
    kind_code, freq = struct.unpack_from("<BQ", data, pos)
    pos += 9
    need(pos, 2, "platform label length")
    (label_len,) = struct.unpack_from("<H", data, pos)
    pos += 2
    need(pos, label_len, "platform label")
    label = data[pos:pos + label_len].decode("utf-8")
    pos += label_len
    need(pos, 8, "thread id")
    (thread_id,) = struct.unpack_from("<Q", data, pos)
    pos += 8
    need(pos, 2, "thread name length")
    (name_len,) = struct.unpack_from("<H", data, pos)
    pos += 2
    need(pos, name_len, "thread name")
    thread_name = data[pos:pos + name_len].decode("utf-8")
    pos += name_len
    descriptor = CycleSourceDescriptor(
        kind=CycleSourceDescriptor.kind_from_code(kind_code),
        nominal_frequency_hz=freq or None,
        platform_label=label,
    )
    return descriptor, thread_id, thread_name, pos


def append_trace_segment(path: str, descriptor: CycleSourceDescriptor,
                         thread_id: int, thread_name: str, events,
                         write_header: bool) -> None:
    mode = "wb" if write_header else "ab"
    with open(path, mode) as fh:
        if write_header:
            fh.write(encode_header(descriptor, thread_id, thread_name))
        fh.write(encode_records(events))


def read_trace(path: str):
    """Returns (descriptor, thread_id, thread_name, events)."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read trace {path}: {exc}") from exc
    descriptor, thread_id, thread_name, offset = decode_header(data, path)
    events = decode_records(data, offset, path)
    return descriptor, thread_id, thread_name, events


def read_location_file(path: str) -> dict[int, str]:
    """Location mapping file: `method_id<TAB>qualified_name`, one per line."""
    mapping: dict[int, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                method_id, name = line.split("\t", 1)
                mapping[int(method_id)] = name
    except OSError as exc:
        raise IoFailure(f"cannot read location file {path}: {exc}") from exc
    return mapping
