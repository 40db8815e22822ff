"""Report serialization: profile JSON, heatmap CSV, and SVG rendering."""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from typing import Optional

from .analysis import (HeatmapMatrix, LoadBalanceReport, build_heatmap,
                       hot_locations, load_balance, sample_cv)
from .costmodel import CostModel
from .errors import IoFailure, NoParallelWork
from .reconstruction import (ApplicationProfile, compensated_cycles,
                             total_compensated_cycles)

REPORT_FORMAT_VERSION = 1


def _span_record(span, model: CostModel,
                 location_names: dict[int, str]) -> dict:
    return {
        "thread_id": span.thread_id,
        "stream_id": span.stream_id,
        "method_id": span.method_id,
        "location": location_names.get(span.method_id, ""),
        "cycles_begin": span.cycles_begin,
        "cycles_end": span.cycles_end,
        "measured_cycles": span.measured_cycles(),
        "compensated_cycles": round(compensated_cycles(span, model), 6),
        "nesting_level": span.nesting_level,
        "is_primordial": span.is_primordial,
        "under_compensated": span.under_compensated,
    }


def build_report(profile: ApplicationProfile, model: CostModel,
                 location_names: dict[int, str],
                 pool_size: Optional[int] = None) -> dict:
    """Full analysis report as a JSON-serializable dict."""
    total = total_compensated_cycles(profile, model)
    locations = hot_locations(profile, model, k=len(location_names) or 1,
                              location_names=location_names)
    try:
        balance = load_balance(profile, model, pool_size)
        balance_obj = {
            "per_worker_cycles": {str(k): v
                                  for k, v in balance.per_worker_cycles.items()},
            "cv": balance.cv,
            "task_count": balance.task_count,
            "pool_size": pool_size,
        }
    except NoParallelWork:
        balance_obj = None
    heatmap = build_heatmap(profile, model)
    span_count = len(profile.all_spans)
    tick_based = profile.source.tick_based if profile.source else True
    return {
        "format_version": REPORT_FORMAT_VERSION,
        "source": profile.source.to_json() if profile.source else None,
        "tick_based": tick_based,
        "cost_model": model.to_json(),
        "totals": {
            "complete_spans": span_count,
            "incomplete_spans": len(profile.incomplete_spans),
            "total_compensated_cycles": round(total, 6),
            "cycles_per_span": round(total / span_count, 6) if span_count else 0.0,
            "under_compensated_spans": sum(
                1 for s in profile.all_spans if s.under_compensated),
        },
        "spans": [_span_record(s, model, location_names)
                  for s in profile.all_spans],
        "locations": [asdict(a) for a in locations],
        "load_balance": balance_obj,
        "heatmap": {
            "cycle_bucket_edges": [
                "inf" if math.isinf(e) else e
                for e in [b[0] for b in heatmap.cycle_buckets]
                + [heatmap.cycle_buckets[-1][1]]],
            "nesting_groups": heatmap.nesting_groups,
            "cell_counts": heatmap.cell_counts,
            "cell_cycles": heatmap.cell_cycles,
        },
    }


def write_report(report: dict, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write report {path}: {exc}") from exc


def read_report(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read report {path}: {exc}") from exc


def _bucket_labels(edges) -> list[str]:
    labels = []
    for lo, hi in zip(edges, edges[1:]):
        hi_txt = "inf" if hi == "inf" else f"{float(hi):g}"
        labels.append(f"[{float(lo):g}:{hi_txt})")
    return labels


def write_heatmap_csv(report: dict, path: str) -> None:
    """Header row of bucket edges; one row per nesting group; cells are
    "count:cycles"."""
    heatmap = report["heatmap"]
    labels = _bucket_labels(heatmap["cycle_bucket_edges"])
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("nesting_levels," + ",".join(labels) + "\n")
            for group, counts, cycles in zip(heatmap["nesting_groups"],
                                             heatmap["cell_counts"],
                                             heatmap["cell_cycles"]):
                cells = [f"{c}:{cy:g}" for c, cy in zip(counts, cycles)]
                fh.write(f"{group[0]}-{group[1]}," + ",".join(cells) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write heatmap {path}: {exc}") from exc


def write_heatmap_svg(report: dict, path: str, cell: int = 56) -> None:
    """Grid rendering where cell darkness encodes total compensated cycles."""
    heatmap = report["heatmap"]
    labels = _bucket_labels(heatmap["cycle_bucket_edges"])
    counts = heatmap["cell_counts"]
    cycles = heatmap["cell_cycles"]
    groups = heatmap["nesting_groups"]
    max_cycles = max((c for row in cycles for c in row), default=0.0)
    left, top = 90, 70
    width = left + cell * len(labels) + 10
    height = top + cell * len(groups) + 10
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" font-family="monospace" font-size="10">'
    ]
    for col, label in enumerate(labels):
        x = left + col * cell + cell // 2
        parts.append(
            f'<text x="{x}" y="{top - 8}" text-anchor="end" '
            f'transform="rotate(-35 {x} {top - 8})">{label}</text>')
    for row, group in enumerate(groups):
        y = top + row * cell
        parts.append(
            f'<text x="{left - 6}" y="{y + cell // 2 + 4}" '
            f'text-anchor="end">{group[0]}-{group[1]}</text>')
        for col in range(len(labels)):
            share = cycles[row][col] / max_cycles if max_cycles else 0.0
            # Light gray to near black as the cell's cycle share grows.
            level = int(240 - 220 * share)
            parts.append(
                f'<rect x="{left + col * cell}" y="{y}" width="{cell}" '
                f'height="{cell}" fill="rgb({level},{level},{level})" '
                f'stroke="white"/>')
            if counts[row][col]:
                text_fill = "white" if share > 0.5 else "black"
                parts.append(
                    f'<text x="{left + col * cell + cell // 2}" '
                    f'y="{y + cell // 2 + 4}" text-anchor="middle" '
                    f'fill="{text_fill}">{counts[row][col]}</text>')
    parts.append("</svg>")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(parts) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write heatmap svg {path}: {exc}") from exc


def recompute_cv(report: dict, pool_size: Optional[int]) -> Optional[float]:
    """CV from the report's per-worker map, padded to pool_size workers."""
    balance = report.get("load_balance")
    if balance is None:
        return None
    values = list(balance["per_worker_cycles"].values())
    if pool_size is not None and pool_size > len(values):
        values.extend([0.0] * (pool_size - len(values)))
    return sample_cv(values)
