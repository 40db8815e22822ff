# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled record encoder/decoder (hot kernel).

Same contract as _record_codec_py; see that module for the record layout.
"""

from libc.stdint cimport uint8_t, uint32_t, uint64_t
from libc.string cimport memcpy

from cpython.bytes cimport PyBytes_FromStringAndSize

from .errors import MalformedTrace


cdef inline uint64_t _read_u64(const uint8_t *p):
    cdef uint64_t v
    memcpy(&v, p, 8)
    return v


cdef inline uint32_t _read_u32(const uint8_t *p):
    cdef uint32_t v
    memcpy(&v, p, 4)
    return v


def encode_records(events):
    cdef Py_ssize_t n = len(events)
    # Worst case 21 bytes per record.
    out = bytearray(n * 21)
    cdef uint8_t[::1] buf = out
    cdef Py_ssize_t pos = 0
    cdef long long tag, stream_id
    cdef uint64_t cycles, sid
    cdef uint32_t method_id
    for event in events:
        tag = event[0]
        cycles = event[1]
        if tag == 0:
            method_id = event[3]
            buf[pos] = 0
            memcpy(&buf[pos + 1], &cycles, 8)
            memcpy(&buf[pos + 9], &method_id, 4)
            pos += 13
        elif tag == 3:
            buf[pos] = 3
            memcpy(&buf[pos + 1], &cycles, 8)
            pos += 9
        elif tag == 1 or tag == 2:
            sid = event[2]
            method_id = event[3]
            buf[pos] = <uint8_t> tag
            memcpy(&buf[pos + 1], &cycles, 8)
            memcpy(&buf[pos + 9], &method_id, 4)
            memcpy(&buf[pos + 13], &sid, 8)
            pos += 21
        else:
            raise ValueError(f"unknown event tag {tag}")
    return bytes(out[:pos])


def decode_records(data, Py_ssize_t offset, path=None):
    cdef const uint8_t[::1] buf = data
    cdef Py_ssize_t pos = offset
    cdef Py_ssize_t end = buf.shape[0]
    cdef uint8_t tag
    cdef uint64_t cycles, stream_id
    cdef uint32_t method_id
    events = []
    while pos < end:
        tag = buf[pos]
        if tag == 0:
            if pos + 13 > end:
                raise MalformedTrace("Truncated", "truncated ASB record",
                                     path, pos)
            cycles = _read_u64(&buf[pos + 1])
            method_id = _read_u32(&buf[pos + 9])
            events.append((0, cycles, -1, method_id))
            pos += 13
        elif tag == 3:
            if pos + 9 > end:
                raise MalformedTrace("Truncated", "truncated SE record",
                                     path, pos)
            cycles = _read_u64(&buf[pos + 1])
            events.append((3, cycles, -1, 0))
            pos += 9
        elif tag == 1 or tag == 2:
            if pos + 21 > end:
                raise MalformedTrace("Truncated", "truncated named record",
                                     path, pos)
            cycles = _read_u64(&buf[pos + 1])
            method_id = _read_u32(&buf[pos + 9])
            stream_id = _read_u64(&buf[pos + 13])
            events.append((<long> tag, cycles, stream_id, method_id))
            pos += 21
        else:
            raise MalformedTrace("UnknownTag", f"unknown record tag {tag}",
                                 path, pos)
    return events
