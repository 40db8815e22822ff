"""Instrumentation wrappers around pipeline and task execution.

Sequential pipelines get a single anonymous span; each task of a parallel
pipeline gets a named span. The first task of a parallel pipeline generates
the stream id (primordial span); later tasks retrieve it (support spans).
Guards emit exactly one begin and one end event, even on exceptional exit.
"""

from __future__ import annotations

import itertools
import threading

from .recorder import ASB, PSB, SE, SSB, Recorder

_stream_id_counter = itertools.count(0)
_stream_id_lock = threading.Lock()


def _next_stream_id() -> int:
    with _stream_id_lock:
        return next(_stream_id_counter)


class PipelineHandle:
    """Shared per-pipeline state; the head slot is set at most once."""

    __slots__ = ("is_parallel", "_head_slot", "_slot_lock")

    def __init__(self, is_parallel: bool = True):
        self.is_parallel = is_parallel
        self._head_slot: int | None = None
        self._slot_lock = threading.Lock()

    def claim_or_get(self) -> tuple[int, bool]:
        """Returns (stream_id, claimed). claimed is True for the first caller.

        Compare-and-set: by fork/join construction the primordial task runs
        first, but the slot enforces at-most-once regardless.
        """
        if self._head_slot is not None:
            return self._head_slot, False
        with self._slot_lock:
            if self._head_slot is None:
                self._head_slot = _next_stream_id()
                return self._head_slot, True
            return self._head_slot, False

    def get(self) -> int | None:
        return self._head_slot

    def preset(self, stream_id: int) -> None:
        """Pre-seed the slot (calibration of support-span cost)."""
        with self._slot_lock:
            if self._head_slot is not None:
                raise ValueError("head slot already set")
            self._head_slot = stream_id


class SpanGuard:
    """Scope guard pairing one begin event with one SE event."""

    __slots__ = ("_recorder", "method_id", "kind", "_closed")

    def __init__(self, recorder: Recorder, method_id: int, kind: str):
        self._recorder = recorder
        self.method_id = method_id
        self.kind = kind
        self._closed = False

    def release(self) -> None:
        if self._closed:
            return
        self._closed = True
        self._recorder.record(SE, self._recorder.read_cycles())

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.release()
        return False


def enter_sequential_execution(recorder: Recorder, method_id: int) -> SpanGuard:
    recorder.record(ASB, recorder.read_cycles(), -1, method_id)
    return SpanGuard(recorder, method_id, "anonymous")


def enter_task_execution(recorder: Recorder, handle: PipelineHandle,
                         method_id: int) -> SpanGuard:
    stream_id, claimed = handle.claim_or_get()
    tag = PSB if claimed else SSB
    recorder.record(tag, recorder.read_cycles(), stream_id, method_id)
    return SpanGuard(recorder, method_id,
                     "primordial" if claimed else "support")


def resolve_location(recorder: Recorder, call_site_descriptor: str) -> int:
    """Stable method id for a call site (qualified function/method name)."""
    return recorder.register_location(call_site_descriptor)


def profile_sequential(recorder: Recorder, location: str, body):
    """Run body() inside an anonymous span; returns body's result."""
    method_id = resolve_location(recorder, location)
    with enter_sequential_execution(recorder, method_id):
        return body()


def profile_parallel_task(recorder: Recorder, handle: PipelineHandle,
                          location: str, body):
    """Run one task body of a parallel pipeline inside a named span."""
    method_id = resolve_location(recorder, location)
    with enter_task_execution(recorder, handle, method_id):
        return body()


def profiled_pipeline(recorder: Recorder, location: str):
    """Adapter: wrap an iterator/pipeline terminal operation.

    Usage: result = profiled_pipeline(rec, "mod.fn")(lambda: sum(it))
    """
    def runner(terminal_op):
        return profile_sequential(recorder, location, terminal_op)
    return runner


def profiled_task_submit(recorder: Recorder, executor, handle: PipelineHandle,
                         location: str, task, *args):
    """Adapter: submit a fork/join-style task body with span instrumentation."""
    return executor.submit(
        profile_parallel_task, recorder, handle, location,
        lambda: task(*args),
    )
