"""Per-thread cycle counter abstraction.

Two production backends: a per-thread virtualized counter built on the thread
CPU-time clock (cycle-equivalent ticks at a nominal frequency, excluding
intervals where the thread was not scheduled) and a monotonic wall-clock tick
fallback. A scripted source exists for deterministic tests and golden runs.

Readings are only ever compared within a single thread; no cross-thread
ordering is assumed anywhere in the codebase.
"""

from __future__ import annotations

import platform
import threading
import time
from dataclasses import dataclass
from typing import Optional

from .errors import UnsupportedPlatform

KIND_HARDWARE = "HardwareReferenceCycles"
KIND_MONOTONIC = "MonotonicClockTicks"
KIND_SCRIPTED = "ScriptedTicks"

_KIND_CODES = {KIND_HARDWARE: 0, KIND_MONOTONIC: 1, KIND_SCRIPTED: 2}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}


@dataclass(frozen=True)
class CycleSourceDescriptor:
    """Identifies which counter produced a trace or cost model.

    The kind travels inside every trace and cost-model file so profiles from
    different sources are never mixed silently.
    """

    kind: str
    nominal_frequency_hz: Optional[int] = None
    platform_label: str = ""

    @property
    def kind_code(self) -> int:
        return _KIND_CODES[self.kind]

    @staticmethod
    def kind_from_code(code: int) -> str:
        return _KIND_NAMES[code]

    @property
    def tick_based(self) -> bool:
        """True when readings are wall ticks rather than CPU-only cycles."""
        return self.kind != KIND_HARDWARE

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "nominal_frequency_hz": self.nominal_frequency_hz,
            "platform_label": self.platform_label,
        }

    @staticmethod
    def from_json(obj: dict) -> "CycleSourceDescriptor":
        return CycleSourceDescriptor(
            kind=obj["kind"],
            nominal_frequency_hz=obj.get("nominal_frequency_hz"),
            platform_label=obj.get("platform_label", ""),
        )


class CycleSource:
    """Base class: strictly monotonic per-thread readings.

    Subclasses provide _raw_read(); this class enforces strict per-thread
    monotonicity (clock resolution can otherwise yield equal readings) and
    thread registration. Registration is idempotent and is the only
    synchronized operation.
    """

    descriptor: CycleSourceDescriptor

    def __init__(self, serialized_reads: bool = False):
        self.serialized_reads = serialized_reads
        self._local = threading.local()
        self._register_lock = threading.Lock()

    def _raw_read(self) -> int:
        raise NotImplementedError

    def register_thread(self) -> None:
        if getattr(self._local, "registered", False):
            return
        with self._register_lock:
            self._local.registered = True
            self._local.last = -1

    def read_cycles(self) -> int:
        last = getattr(self._local, "last", None)
        if last is None:
            self.register_thread()
            last = -1
        if self.serialized_reads:
            # Read twice and keep the second value: the first read absorbs
            # pipeline/cache effects so the kept value is taken from a warmer,
            # more stable state (calibration mode only).
            self._raw_read()
        value = self._raw_read()
        if value <= last:
            value = last + 1
        self._local.last = value
        return value


class ThreadCycleSource(CycleSource):
    """Per-thread virtualized counter from the thread CPU-time clock.

    Ticks are nanoseconds of on-CPU time scaled to a nominal frequency, which
    makes them cycle-equivalents that exclude intervals where the thread was
    not scheduled.
    """

    def __init__(self, nominal_frequency_hz: int = 1_000_000_000,
                 serialized_reads: bool = False):
        super().__init__(serialized_reads)
        if not hasattr(time, "thread_time_ns"):
            raise UnsupportedPlatform(
                "thread CPU-time clock is unavailable on this platform"
            )
        self._scale = nominal_frequency_hz / 1e9
        self.descriptor = CycleSourceDescriptor(
            kind=KIND_HARDWARE,
            nominal_frequency_hz=nominal_frequency_hz,
            platform_label=platform.platform(),
        )

    def _raw_read(self) -> int:
        if self._scale == 1.0:
            return time.thread_time_ns()
        return int(time.thread_time_ns() * self._scale)


class MonotonicCycleSource(CycleSource):
    """Monotonic wall-clock tick fallback.

    Counts scheduled wall ticks, not CPU-only cycles; all reports produced
    from this source are labeled tick-based.
    """

    def __init__(self, serialized_reads: bool = False):
        super().__init__(serialized_reads)
        self.descriptor = CycleSourceDescriptor(
            kind=KIND_MONOTONIC,
            nominal_frequency_hz=1_000_000_000,
            platform_label=platform.platform(),
        )

    def _raw_read(self) -> int:
        return time.monotonic_ns()


class ScriptedCycleSource(CycleSource):
    """Deterministic source for tests and golden runs.

    Each thread gets an independent counter advancing by a fixed step per
    read, optionally primed with an explicit per-thread script of values.
    Also counts reads per thread so tests can assert read budgets.
    """

    def __init__(self, step: int = 100, start: int = 1000):
        super().__init__(serialized_reads=False)
        self.step = step
        self.start = start
        self.descriptor = CycleSourceDescriptor(
            kind=KIND_SCRIPTED,
            nominal_frequency_hz=None,
            platform_label="scripted",
        )
        self._lock = threading.Lock()
        self._read_counts: dict[int, int] = {}
        self._scripts: dict[int, list[int]] = {}

    def script_thread(self, values: list[int]) -> None:
        """Pre-load explicit readings for the calling thread."""
        self._local.script = list(values)

    def _raw_read(self) -> int:
        ident = threading.get_ident()
        with self._lock:
            self._read_counts[ident] = self._read_counts.get(ident, 0) + 1
        script = getattr(self._local, "script", None)
        if script:
            return script.pop(0)
        current = getattr(self._local, "counter", None)
        if current is None:
            current = self.start
        else:
            current = current + self.step
        self._local.counter = current
        return current

    @property
    def total_reads(self) -> int:
        with self._lock:
            return sum(self._read_counts.values())

    def reads_for_thread(self, ident: int) -> int:
        with self._lock:
            return self._read_counts.get(ident, 0)


def make_cycle_source(kind: str = "auto", serialized_reads: bool = False,
                      nominal_frequency_hz: int = 1_000_000_000,
                      fake_step: int = 100) -> CycleSource:
    """Construct a source by name: auto, thread-cycles, monotonic, fake."""
    if kind in ("auto", "thread-cycles"):
        try:
            return ThreadCycleSource(nominal_frequency_hz, serialized_reads)
        except UnsupportedPlatform:
            if kind == "thread-cycles":
                raise
            return MonotonicCycleSource(serialized_reads)
    if kind == "monotonic":
        return MonotonicCycleSource(serialized_reads)
    if kind == "fake":
        return ScriptedCycleSource(step=fake_step)
    raise ValueError(f"unknown cycle source kind: {kind}")
