"""Estimation of the four instrumentation cost constants.

A span generator produces pairs of spans, one nested in the other, with no
work inside the nested span. The nested span's measured cycles estimate the
inner cost; the bracket around it, minus the inner cost, estimates the
kind-dependent outer cost:

    outer_cost = (nested_begin - outer_begin) + (outer_end - nested_end) - IC

Each cost is the mean over the surviving samples after Tukey IQR fencing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .costmodel import CostEstimate, CostModel
from .cycles import CycleSource
from .errors import DegenerateSamples
from .probe import PipelineHandle, _next_stream_id, enter_sequential_execution, \
    enter_task_execution
from .recorder import Recorder

KINDS = ("anon", "prim", "supp")


class CalibrationSample(NamedTuple):
    outer_begin: int
    nested_begin: int
    nested_end: int
    outer_end: int
    kind: str


@dataclass
class CalibrationConfig:
    pairs_per_cost: int = 10_000_000
    iqr_factor: float = 1.5
    serialized_reads: bool = True
    # Accepted models need >= 1000 pairs; smaller runs carry a warning.
    min_accepted_pairs: int = 1000


def generate_span_pairs(recorder: Recorder, kind: str,
                        config: CalibrationConfig) -> list[CalibrationSample]:
    """Generate nested span pairs of one kind through the real instrumentation.

    anon: the outer span executes only the nested anonymous span's begin/end
    instrumentation. prim: the nested begin additionally generates a fresh
    stream id. supp: the nested begin retrieves a pre-seeded stream id.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown calibration kind: {kind}")
    method_id = recorder.register_location(f"spanprof.calibration.{kind}")
    samples = []
    n = config.pairs_per_cost
    for _ in range(n):
        outer = enter_sequential_execution(recorder, method_id)
        if kind == "anon":
            nested = enter_sequential_execution(recorder, method_id)
        elif kind == "prim":
            nested = enter_task_execution(recorder, PipelineHandle(), method_id)
        else:
            handle = PipelineHandle()
            handle.preset(_next_stream_id())
            nested = enter_task_execution(recorder, handle, method_id)
        nested.release()
        outer.release()
        events = recorder.drain_current_thread()
        # [outer begin, nested begin, nested SE, outer SE]
        samples.append(CalibrationSample(
            events[0][1], events[1][1], events[2][1], events[3][1], kind))
    return samples


def _iqr_keep(values: np.ndarray, factor: float) -> np.ndarray:
    q1, q3 = np.percentile(values, [25, 75])
    iqr = q3 - q1
    lo, hi = q1 - factor * iqr, q3 + factor * iqr
    return values[(values >= lo) & (values <= hi)]


def _fenced_mean(values: np.ndarray, factor: float, what: str):
    kept = _iqr_keep(values, factor)
    if len(kept) < 0.5 * len(values):
        raise DegenerateSamples(
            f"{what}: only {len(kept)}/{len(values)} samples survived "
            "outlier removal")
    mean = float(np.mean(kept))
    cv = float(np.std(kept, ddof=1) / mean) if len(kept) > 1 and mean else 0.0
    return mean, cv, len(kept)


def estimate_inner_cost(samples: list[CalibrationSample],
                        config: CalibrationConfig | None = None):
    """IC = mean nested-span measured cycles after outlier removal.

    Returns (ic, CostEstimate). Samples of any kind qualify: the nested span
    is always empty.
    """
    config = config or CalibrationConfig()
    deltas = np.array([s.nested_end - s.nested_begin for s in samples],
                      dtype=np.float64)
    mean, cv, kept = _fenced_mean(deltas, config.iqr_factor, "inner cost")
    return mean, CostEstimate(mean, cv, kept, len(samples))


def estimate_outer_cost(samples: list[CalibrationSample], ic: float,
                        config: CalibrationConfig | None = None):
    """Kind-specific outer cost via the bracket-minus-IC formula.

    Returns (cost, CostEstimate, warnings). A negative mean is clamped to 0
    with a warning, not an error.
    """
    config = config or CalibrationConfig()
    kind = samples[0].kind
    raw = np.array(
        [(s.nested_begin - s.outer_begin) + (s.outer_end - s.nested_end) - ic
         for s in samples], dtype=np.float64)
    mean, cv, kept = _fenced_mean(raw, config.iqr_factor, f"outer cost ({kind})")
    warnings = []
    if mean < 0:
        warnings.append(
            f"oc_{kind}: negative mean {mean:.2f} clamped to 0")
        mean = 0.0
    return mean, CostEstimate(mean, cv, kept, len(samples)), warnings


def run_calibration(cycle_source: CycleSource, output_dir: str,
                    config: CalibrationConfig | None = None,
                    kinds: tuple[str, ...] = KINDS) -> CostModel:
    """One calibration session: pooled IC, then the per-kind outer costs."""
    config = config or CalibrationConfig()
    recorder = Recorder(cycle_source, output_dir,
                        buffer_capacity=1 << 30)  # drained per pair, never dumps
    by_kind = {k: generate_span_pairs(recorder, k, config) for k in kinds}
    pooled = [s for k in kinds for s in by_kind[k]]
    ic, ic_est = estimate_inner_cost(pooled, config)

    warnings = []
    if config.pairs_per_cost < config.min_accepted_pairs:
        warnings.append(
            f"pairs_per_cost={config.pairs_per_cost} is below the accepted "
            f"minimum of {config.min_accepted_pairs}")

    costs = {}
    estimates = {"ic": ic_est}
    for kind in KINDS:
        if kind in by_kind:
            cost, est, w = estimate_outer_cost(by_kind[kind], ic, config)
            warnings.extend(w)
        else:
            cost, est = 0.0, CostEstimate(0.0, 0.0, 0, 0)
            warnings.append(f"oc_{kind}: not calibrated (kind skipped)")
        costs[kind] = cost
        estimates[f"oc_{kind}"] = est

    # Expected direction on hardware-cycle runs; a violation is a warning,
    # not a failure.
    if costs["prim"] < costs["supp"] or costs["supp"] < costs["anon"]:
        warnings.append(
            "outer-cost ordering oc_prim >= oc_supp >= oc_anon does not hold "
            f"(anon={costs['anon']:.2f}, prim={costs['prim']:.2f}, "
            f"supp={costs['supp']:.2f})")

    return CostModel(
        ic=ic, oc_anon=costs["anon"], oc_prim=costs["prim"],
        oc_supp=costs["supp"], source=cycle_source.descriptor,
        pairs_per_cost=config.pairs_per_cost,
        serialized_reads=config.serialized_reads,
        estimates=estimates, warnings=warnings,
    )


def write_cost_model(model: CostModel, path: str) -> None:
    model.write(path)
