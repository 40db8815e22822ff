"""Synthetic workloads and the experiment runner.

Workloads reproduce the shapes the profiler is meant to diagnose (flat
sequential runs, deep recursive nesting, flat-map style bursts of tiny
pipelines, skewed parallel pipelines) with a tunable amount of busy work per
span. The runner follows the warm-up / steady-state protocol: unmeasured
warm-up iterations, then measured runs, with profiled runs dumping traces and
plain runs taking exactly two baseline cycle readings per participating
thread.
"""

from __future__ import annotations

import collections
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .analysis import evaluate_accuracy, sample_cv
from .costmodel import CostModel
from .cycles import CycleSource
from .errors import ZeroBaseline
from .probe import PipelineHandle, profile_parallel_task, profile_sequential
from .reconstruction import load_application_profile, total_compensated_cycles
from .recorder import Recorder


@dataclass
class WorkloadSpec:
    name: str
    mode: str = "sequential"          # sequential | parallel | mixed
    span_count: int = 100
    nesting_profile: str = "flat"     # flat | deep_recursive | flatmap_style
    depth: int = 1
    work_per_span: int = 100          # busy-loop iterations inside each span
    imbalance: Optional[float] = None  # skew in [0,1]; parallel only
    workers: int = 4
    target_cps: Optional[float] = None  # order-of-magnitude hint, informational

    def __post_init__(self):
        if self.span_count < 1:
            raise ValueError("span_count must be >= 1")
        if self.imbalance is not None and not 0.0 <= self.imbalance <= 1.0:
            raise ValueError("imbalance must be in [0,1]")


@dataclass
class RunResult:
    spec: WorkloadSpec
    profiled: bool
    timings: list[float] = field(default_factory=list)   # seconds per iteration
    trace_dirs: list[str] = field(default_factory=list)  # profiled runs
    baseline_totals: list[float] = field(default_factory=list)  # plain runs


def _busy(iterations: int) -> int:
    x = 1
    for _ in range(iterations):
        x = (x * 1103515245 + 12345) & 0xFFFFFFFF
    return x


def calibrate_work(cycle_source: CycleSource, target_cps: float,
                   probe_iterations: int = 50_000) -> int:
    """Busy-loop iterations per span that land near target_cps cycles."""
    begin = cycle_source.read_cycles()
    _busy(probe_iterations)
    end = cycle_source.read_cycles()
    per_iteration = max((end - begin) / probe_iterations, 1e-9)
    return max(int(target_cps / per_iteration), 1)


# -- sequential span shapes --------------------------------------------------

def _run_sequential_shape(spec: WorkloadSpec, span):
    """Drive a span executor: span(location, body) runs body inside a span."""
    loc = f"bench.{spec.name}.pipeline"
    work = spec.work_per_span
    if spec.nesting_profile == "flat":
        for _ in range(spec.span_count):
            span(loc, lambda: _busy(work))
    elif spec.nesting_profile == "deep_recursive":
        depth = max(spec.depth, 1)

        def chain(level: int):
            _busy(work)
            if level > 1:
                span(loc, lambda: chain(level - 1))

        chains = max(spec.span_count // depth, 1)
        for _ in range(chains):
            span(loc, lambda: chain(depth))
    elif spec.nesting_profile == "flatmap_style":
        inner = max(spec.span_count - 1, 0)
        inner_loc = f"bench.{spec.name}.inner"

        def outer_body():
            for _ in range(inner):
                span(inner_loc, lambda: _busy(work))

        span(loc, outer_body)
    else:
        raise ValueError(f"unknown nesting profile: {spec.nesting_profile}")


def _task_weights(spec: WorkloadSpec) -> list[float]:
    n = spec.span_count
    skew = spec.imbalance if spec.imbalance is not None else 0.0
    return [(1.0 - skew) / n + (skew if i == 0 else 0.0) for i in range(n)]


# -- task pool ----------------------------------------------------------------

def run_tasks(tasks: list[Callable[[], None]], workers: int,
              before: Optional[Callable[[], None]] = None,
              after: Optional[Callable[[], None]] = None) -> None:
    """Run tasks on a pool of worker threads pulling from a shared queue.

    before/after run once per worker thread, around its task processing;
    that is where baseline runs take their two cycle readings.
    """
    queue = collections.deque(tasks)
    lock = threading.Lock()

    def worker():
        if before is not None:
            before()
        while True:
            with lock:
                if not queue:
                    break
                task = queue.popleft()
            task()
        if after is not None:
            after()

    threads = [threading.Thread(target=worker, name=f"bench-worker-{i}")
               for i in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()


class BaselineCollector:
    """Two-point per-thread cycle measurement for uninstrumented runs."""

    def __init__(self, cycle_source: CycleSource):
        self.cycle_source = cycle_source
        self._local = threading.local()
        self._lock = threading.Lock()
        self.total = 0

    def begin(self) -> None:
        self._local.begin = self.cycle_source.read_cycles()

    def end(self) -> None:
        delta = self.cycle_source.read_cycles() - self._local.begin
        with self._lock:
            self.total += delta


# -- single iterations --------------------------------------------------------

def _iteration_profiled(spec: WorkloadSpec, recorder: Recorder) -> None:
    if spec.mode in ("sequential", "mixed"):
        _run_sequential_shape(
            spec, lambda loc, body: profile_sequential(recorder, loc, body))
    if spec.mode in ("parallel", "mixed"):
        handle = PipelineHandle()
        loc = f"bench.{spec.name}.parallel"
        total_work = spec.span_count * spec.work_per_span
        tasks = [
            (lambda w=weight: profile_parallel_task(
                recorder, handle, loc, lambda: _busy(int(total_work * w))))
            for weight in _task_weights(spec)
        ]
        run_tasks(tasks, spec.workers)


def _iteration_plain(spec: WorkloadSpec,
                     collector: Optional[BaselineCollector]) -> None:
    if spec.mode in ("sequential", "mixed"):
        if collector is not None:
            collector.begin()
        _run_sequential_shape(spec, lambda loc, body: body())
        if collector is not None:
            collector.end()
    if spec.mode in ("parallel", "mixed"):
        total_work = spec.span_count * spec.work_per_span
        tasks = [(lambda w=weight: _busy(int(total_work * w)))
                 for weight in _task_weights(spec)]
        run_tasks(tasks, spec.workers,
                  before=collector.begin if collector else None,
                  after=collector.end if collector else None)


# -- experiment runner ----------------------------------------------------------

def run_workload(spec: WorkloadSpec, profiled: bool, warmup: int,
                 iterations: int, cycle_source: CycleSource,
                 output_dir: str,
                 buffer_capacity: int = 1 << 20) -> RunResult:
    """Warm up unmeasured, then measure steady-state iterations.

    Profiled runs dump one trace directory per iteration; plain runs record
    the two-point baseline total per iteration.
    """
    result = RunResult(spec, profiled)
    for _ in range(warmup):
        _iteration_plain(spec, None)
    for index in range(iterations):
        if profiled:
            run_dir = os.path.join(output_dir, f"run-{index:03d}")
            recorder = Recorder(cycle_source, run_dir, buffer_capacity)
            start = time.perf_counter()
            _iteration_profiled(spec, recorder)
            result.timings.append(time.perf_counter() - start)
            recorder.flush_all()
            result.trace_dirs.append(run_dir)
        else:
            collector = BaselineCollector(cycle_source)
            start = time.perf_counter()
            _iteration_plain(spec, collector)
            result.timings.append(time.perf_counter() - start)
            result.baseline_totals.append(collector.total)
    return result


def profiled_total(trace_dir: str, model: CostModel) -> tuple[float, int]:
    """Total compensated cycles and complete-span count of one dumped run."""
    paths = [os.path.join(trace_dir, p) for p in os.listdir(trace_dir)
             if p.endswith(".trace")]
    profile = load_application_profile(paths)
    if profile.source is not None:
        model.check_source(profile.source)
    return total_compensated_cycles(profile, model), len(profile.all_spans)


def run_accuracy_experiment(spec: WorkloadSpec, runs: int,
                            cycle_source: CycleSource, model: CostModel,
                            output_dir: str, warmup: int = 5):
    """Average compensated totals of profiled runs against two-point
    baselines of plain runs; returns an EvaluationRecord."""
    profiled = run_workload(spec, True, warmup, runs, cycle_source,
                            os.path.join(output_dir, "profiled"))
    plain = run_workload(spec, False, 0, runs, cycle_source,
                         os.path.join(output_dir, "plain"))
    totals = []
    span_counts = []
    for trace_dir in profiled.trace_dirs:
        total, spans = profiled_total(trace_dir, model)
        totals.append(total)
        span_counts.append(spans)
    avg_compensated = sum(totals) / len(totals)
    avg_baseline = sum(plain.baseline_totals) / len(plain.baseline_totals)
    if avg_baseline == 0:
        raise ZeroBaseline(f"workload {spec.name} has a zero baseline")
    record = evaluate_accuracy(avg_compensated, avg_baseline)
    total_spans = sum(span_counts) / len(span_counts)
    record.cps = avg_compensated / total_spans if total_spans else 0.0
    record.overhead_factor = (
        (sum(profiled.timings) / len(profiled.timings))
        / (sum(plain.timings) / len(plain.timings)))
    record.extras = {
        "runs": runs,
        "compensated_cv": sample_cv(totals),
        "baseline_cv": sample_cv(plain.baseline_totals),
        "avg_spans_per_run": total_spans,
    }
    return record
