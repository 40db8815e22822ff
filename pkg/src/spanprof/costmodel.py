"""Calibrated instrumentation-cost constants and their on-disk form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .cycles import CycleSourceDescriptor
from .errors import IoFailure, MixedSourceError

MODEL_FORMAT_VERSION = 1


@dataclass
class CostEstimate:
    mean_cycles: float
    cv: float
    samples_kept: int
    samples_total: int


@dataclass
class CostModel:
    """Four instrumentation cost constants for one platform.

    ic: cost included inside every span's own measurement.
    oc_anon/oc_prim/oc_supp: cost of a nested span of each kind that leaks
    into the outer span's measurement.
    """

    ic: float
    oc_anon: float
    oc_prim: float
    oc_supp: float
    source: CycleSourceDescriptor
    pairs_per_cost: int = 0
    serialized_reads: bool = False
    estimates: dict[str, CostEstimate] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        for name in ("ic", "oc_anon", "oc_prim", "oc_supp"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @staticmethod
    def zero(source: Optional[CycleSourceDescriptor] = None) -> "CostModel":
        """All-zero model: compensation reduces to exclusive cycles."""
        src = source or CycleSourceDescriptor(kind="ScriptedTicks",
                                              platform_label="zero-model")
        return CostModel(0.0, 0.0, 0.0, 0.0, src)

    def check_source(self, trace_descriptor: CycleSourceDescriptor) -> None:
        if self.source.kind != trace_descriptor.kind:
            raise MixedSourceError(
                f"cost model built with {self.source.kind} cannot compensate "
                f"traces recorded with {trace_descriptor.kind}"
            )

    def to_json(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "source": self.source.to_json(),
            "pairs_per_cost": self.pairs_per_cost,
            "serialized_reads": self.serialized_reads,
            "costs": {
                name: {
                    "mean_cycles": est.mean_cycles,
                    "cv": est.cv,
                    "samples_kept": est.samples_kept,
                    "samples_total": est.samples_total,
                }
                for name, est in self.estimates.items()
            } or {
                "ic": {"mean_cycles": self.ic, "cv": 0.0,
                       "samples_kept": 0, "samples_total": 0},
                "oc_anon": {"mean_cycles": self.oc_anon, "cv": 0.0,
                            "samples_kept": 0, "samples_total": 0},
                "oc_prim": {"mean_cycles": self.oc_prim, "cv": 0.0,
                            "samples_kept": 0, "samples_total": 0},
                "oc_supp": {"mean_cycles": self.oc_supp, "cv": 0.0,
                            "samples_kept": 0, "samples_total": 0},
            },
            "warnings": self.warnings,
        }

    @staticmethod
    def from_json(obj: dict) -> "CostModel":
        costs = obj["costs"]
        estimates = {
            name: CostEstimate(
                mean_cycles=c["mean_cycles"], cv=c["cv"],
                samples_kept=c["samples_kept"], samples_total=c["samples_total"],
            )
            for name, c in costs.items()
        }
        return CostModel(
            ic=costs["ic"]["mean_cycles"],
            oc_anon=costs["oc_anon"]["mean_cycles"],
            oc_prim=costs["oc_prim"]["mean_cycles"],
            oc_supp=costs["oc_supp"]["mean_cycles"],
            source=CycleSourceDescriptor.from_json(obj["source"]),
            pairs_per_cost=obj.get("pairs_per_cost", 0),
            serialized_reads=obj.get("serialized_reads", False),
            estimates=estimates,
            warnings=list(obj.get("warnings", [])),
        )

    def write(self, path: str) -> None:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(self.to_json(), fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            raise IoFailure(f"cannot write cost model {path}: {exc}") from exc

    @staticmethod
    def read(path: str) -> "CostModel":
        try:
            with open(path, encoding="utf-8") as fh:
                return CostModel.from_json(json.load(fh))
        except OSError as exc:
            raise IoFailure(f"cannot read cost model {path}: {exc}") from exc
