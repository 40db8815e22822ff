"""Reports over a reconstructed profile: hot locations, nesting/cycles
heatmaps, load balance, and accuracy/overhead evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .costmodel import CostModel
from .errors import (DegenerateVariance, NoParallelWork, ZeroBaseline,
                     ZeroDenominator)
from .reconstruction import ApplicationProfile, compensated_cycles

# Decade bucket edges for the heatmap x-axis: [0,10), [10,100), ... [1e11, inf).
HEATMAP_DECADES = [0.0] + [10.0 ** k for k in range(1, 12)] + [math.inf]
NESTING_GROUP_WIDTH = 10


@dataclass
class LocationAggregate:
    method_id: int
    qualified_name: str
    span_count: int
    total_compensated_cycles: float
    share_of_total_spans: float = 0.0
    share_of_total_cycles: float = 0.0


@dataclass
class HeatmapMatrix:
    cycle_buckets: list[tuple[float, float]]
    nesting_groups: list[tuple[int, int]]
    cell_counts: list[list[int]]
    cell_cycles: list[list[float]]

    def total_count(self) -> int:
        return sum(sum(row) for row in self.cell_counts)

    def total_cycles(self) -> float:
        return sum(sum(row) for row in self.cell_cycles)


@dataclass
class LoadBalanceReport:
    per_worker_cycles: dict[int, float]
    cv: float
    task_count: int


@dataclass
class EvaluationRecord:
    baseline_cycles: float = math.nan
    compensated_cycles: float = math.nan
    accuracy: float = math.nan
    cps: float = math.nan
    overhead_factor: float = math.nan
    extras: dict = field(default_factory=dict)


def hot_locations(profile: ApplicationProfile, model: CostModel, k: int,
                  location_names: Optional[dict[int, str]] = None
                  ) -> list[LocationAggregate]:
    """Top-k locations by total compensated cycles.

    Ties break by span count descending, then method id ascending.
    """
    aggregates: dict[int, LocationAggregate] = {}
    names = location_names or {}
    for span in profile.all_spans:
        agg = aggregates.get(span.method_id)
        if agg is None:
            agg = LocationAggregate(span.method_id,
                                    names.get(span.method_id, ""), 0, 0.0)
            aggregates[span.method_id] = agg
        agg.span_count += 1
        agg.total_compensated_cycles += compensated_cycles(span, model)
    total_spans = sum(a.span_count for a in aggregates.values())
    total_cycles = sum(a.total_compensated_cycles for a in aggregates.values())
    for agg in aggregates.values():
        agg.share_of_total_spans = agg.span_count / total_spans if total_spans else 0.0
        agg.share_of_total_cycles = (
            agg.total_compensated_cycles / total_cycles if total_cycles else 0.0)
    ranked = sorted(
        aggregates.values(),
        key=lambda a: (-a.total_compensated_cycles, -a.span_count, a.method_id))
    return ranked[:k]


def _decade_index(cycles: float) -> int:
    for i in range(len(HEATMAP_DECADES) - 1):
        if HEATMAP_DECADES[i] <= cycles < HEATMAP_DECADES[i + 1]:
            return i
    return len(HEATMAP_DECADES) - 2


def build_heatmap(profile: ApplicationProfile, model: CostModel) -> HeatmapMatrix:
    """Span counts and total compensated cycles per (cycle decade, nesting
    group of 10) cell, over complete spans only."""
    max_level = max((s.nesting_level for s in profile.all_spans), default=0)
    n_groups = max_level // NESTING_GROUP_WIDTH + 1
    n_buckets = len(HEATMAP_DECADES) - 1
    counts = [[0] * n_buckets for _ in range(n_groups)]
    cycles = [[0.0] * n_buckets for _ in range(n_groups)]
    for span in profile.all_spans:
        comp = compensated_cycles(span, model)
        col = _decade_index(comp)
        row = span.nesting_level // NESTING_GROUP_WIDTH
        counts[row][col] += 1
        cycles[row][col] += comp
    buckets = [(HEATMAP_DECADES[i], HEATMAP_DECADES[i + 1])
               for i in range(n_buckets)]
    groups = [(g * NESTING_GROUP_WIDTH, (g + 1) * NESTING_GROUP_WIDTH - 1)
              for g in range(n_groups)]
    return HeatmapMatrix(buckets, groups, counts, cycles)


def sample_cv(values) -> float:
    """Coefficient of variation with the sample (n-1) standard deviation.

    Zero for a single value or an all-equal vector.
    """
    arr = np.asarray(values, dtype=np.float64)
    if len(arr) < 2:
        return 0.0
    mean = float(np.mean(arr))
    if mean == 0.0:
        return 0.0
    return float(np.std(arr, ddof=1) / mean)


def load_balance(profile: ApplicationProfile, model: CostModel,
                 pool_size: Optional[int] = None) -> LoadBalanceReport:
    """Distribution of named-span compensated cycles per worker.

    Workers appear if they executed at least one task of any parallel
    stream; pool_size pads additional zero-cycle workers known to exist but
    absent from the traces.
    """
    per_worker: dict[int, float] = {}
    task_count = 0
    for spans in profile.merged_named_spans.values():
        for span in spans:
            per_worker[span.thread_id] = (
                per_worker.get(span.thread_id, 0.0)
                + compensated_cycles(span, model))
            task_count += 1
    if not per_worker:
        raise NoParallelWork("profile contains no named spans")
    values = list(per_worker.values())
    if pool_size is not None and pool_size > len(values):
        values.extend([0.0] * (pool_size - len(values)))
    return LoadBalanceReport(per_worker, sample_cv(values), task_count)


def evaluate_accuracy(profile_total: float,
                      baseline_total: float) -> EvaluationRecord:
    """accuracy = 1 - |compensated - baseline| / baseline.

    The baseline comes from an uninstrumented run with exactly two cycle
    reads per participating thread, per-thread deltas summed.
    """
    if baseline_total == 0:
        raise ZeroBaseline("baseline total is zero")
    accuracy = 1.0 - abs(profile_total - baseline_total) / baseline_total
    return EvaluationRecord(baseline_cycles=baseline_total,
                            compensated_cycles=profile_total,
                            accuracy=accuracy)


def evaluate_overhead(time_profiled: float, time_plain: float) -> float:
    """Slowdown factor: profiled time over plain time."""
    if time_plain == 0:
        raise ZeroDenominator("plain execution time is zero")
    return time_profiled / time_plain


def correlation(xs, ys) -> float:
    """Pearson correlation coefficient."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if len(xs) != len(ys) or len(xs) < 3:
        raise ValueError("need two equal-length series of at least 3 points")
    if np.std(xs) == 0.0 or np.std(ys) == 0.0:
        raise DegenerateVariance("zero variance in correlation input")
    return float(np.corrcoef(xs, ys)[0, 1])
