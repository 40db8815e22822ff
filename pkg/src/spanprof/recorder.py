"""The tracer: per-thread event buffers, location registry, trace dumping.

Buffers are single-writer (owner thread only). The buffer registry and the
location registry are the only shared structures, both lock-guarded; location
registration is expected at instrumentation-setup time, not on the hot path.
flush_all requires caller-enforced quiescence.
"""

from __future__ import annotations

import os
import threading
from typing import NamedTuple, Optional

from . import codec
from .cycles import CycleSource
from .errors import IoFailure

# Event type tags (also the on-disk record tags).
ASB = 0  # anonymous span begin
SSB = 1  # support span begin
PSB = 2  # primordial span begin
SE = 3   # span end

EVENT_NAMES = {ASB: "ASB", SSB: "SSB", PSB: "PSB", SE: "SE"}

DEFAULT_BUFFER_CAPACITY = 1 << 20


class SpanEvent(NamedTuple):
    event_type: int
    cycles: int
    stream_id: int  # -1 for ASB and SE
    method_id: int  # unused for SE


class LocationRegistry:
    """Maps dense method ids to fully qualified caller names."""

    def __init__(self):
        self._lock = threading.Lock()
        self._ids: dict[str, int] = {}
        self._names: list[str] = []

    def register(self, qualified_name: str) -> int:
        if not qualified_name:
            raise ValueError("location name must be non-empty")
        with self._lock:
            method_id = self._ids.get(qualified_name)
            if method_id is None:
                method_id = len(self._names)
                self._ids[qualified_name] = method_id
                self._names.append(qualified_name)
            return method_id

    def name_of(self, method_id: int) -> str:
        return self._names[method_id]

    def __len__(self) -> int:
        return len(self._names)

    def entries(self) -> list[tuple[int, str]]:
        with self._lock:
            return list(enumerate(self._names))

    def dump(self, path: str) -> None:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                for method_id, name in self.entries():
                    fh.write(f"{method_id}\t{name}\n")
        except OSError as exc:
            raise IoFailure(f"cannot write location file {path}: {exc}") from exc


class _ThreadBuffer:
    __slots__ = ("thread_id", "thread_name", "events", "capacity",
                 "dump_path", "dumped_any")

    def __init__(self, thread_id: int, thread_name: str, capacity: int,
                 dump_path: str):
        self.thread_id = thread_id
        self.thread_name = thread_name
        self.events: list[SpanEvent] = []
        self.capacity = capacity
        self.dump_path = dump_path
        self.dumped_any = False


class Recorder:
    """Collects span events into per-thread buffers and dumps traces.

    Overflowing buffers are dumped synchronously and drained; overflow dumps
    append to the same per-thread file so each thread ends up with one
    logically contiguous trace.
    """

    def __init__(self, cycle_source: CycleSource, output_dir: str,
                 buffer_capacity: int = DEFAULT_BUFFER_CAPACITY):
        self.cycle_source = cycle_source
        self.output_dir = output_dir
        self.buffer_capacity = buffer_capacity
        self.locations = LocationRegistry()
        self._local = threading.local()
        self._registry_lock = threading.Lock()
        self._buffers: list[_ThreadBuffer] = []
        self._next_thread_id = 0
        os.makedirs(output_dir, exist_ok=True)

    # -- locations ---------------------------------------------------------

    def register_location(self, qualified_name: str) -> int:
        return self.locations.register(qualified_name)

    # -- recording ---------------------------------------------------------

    def _buffer(self) -> _ThreadBuffer:
        buf = getattr(self._local, "buffer", None)
        if buf is None:
            with self._registry_lock:
                thread_id = self._next_thread_id
                self._next_thread_id += 1
                name = threading.current_thread().name
                path = os.path.join(self.output_dir, f"thread-{thread_id}.trace")
                buf = _ThreadBuffer(thread_id, name, self.buffer_capacity, path)
                self._buffers.append(buf)
            self._local.buffer = buf
        return buf

    def record_event(self, event: SpanEvent) -> None:
        buf = self._buffer()
        buf.events.append(event)
        if len(buf.events) >= buf.capacity:
            self._dump_buffer(buf)

    def record(self, event_type: int, cycles: int, stream_id: int = -1,
               method_id: int = 0) -> None:
        self.record_event(SpanEvent(event_type, cycles, stream_id, method_id))

    def read_cycles(self) -> int:
        return self.cycle_source.read_cycles()

    # -- dumping -----------------------------------------------------------

    def _dump_buffer(self, buf: _ThreadBuffer) -> None:
        if not buf.events:
            return
        try:
            codec.append_trace_segment(
                buf.dump_path, self.cycle_source.descriptor,
                buf.thread_id, buf.thread_name, buf.events,
                write_header=not buf.dumped_any,
            )
        except OSError as exc:
            # Events stay in memory; the caller may retry or abort the run.
            raise IoFailure(f"cannot dump trace {buf.dump_path}: {exc}") from exc
        buf.dumped_any = True
        buf.events.clear()

    def flush_all(self) -> list[str]:
        """Dump every buffer and the location mapping; returns trace paths.

        Requires quiescence: no thread may be recording concurrently.
        """
        paths = []
        with self._registry_lock:
            buffers = list(self._buffers)
        for buf in buffers:
            self._dump_buffer(buf)
            if buf.dumped_any:
                paths.append(buf.dump_path)
        self.locations.dump(self.location_file_path())
        return paths

    def location_file_path(self) -> str:
        return os.path.join(self.output_dir, "locations.tsv")

    # -- test/analysis helpers ----------------------------------------------

    def thread_buffers(self) -> list[_ThreadBuffer]:
        with self._registry_lock:
            return list(self._buffers)

    def drain_current_thread(self) -> list[SpanEvent]:
        """Take and clear this thread's in-memory events (calibration use)."""
        buf = self._buffer()
        events = buf.events
        buf.events = []
        return events
