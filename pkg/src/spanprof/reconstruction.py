"""Offline conversion of per-thread traces into per-stream profiles.

Per-thread stack processing pairs begin/end events into spans, accumulates
nested cycles and nested-span counters on the parent, buckets named spans by
stream id, merges buckets across threads, resolves the primordial span of
every stream so support spans inherit outer-span information from it, and
assigns nesting levels. Compensation subtracts nested measured cycles and the
calibrated instrumentation costs from each span.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import codec
from .costmodel import CostModel
from .cycles import CycleSourceDescriptor
from .errors import CyclicNesting, DuplicatePrimordial, MalformedTrace
from .recorder import ASB, PSB, SE, SSB


class Span:
    __slots__ = (
        "cycles_begin", "cycles_end", "stream_id", "method_id", "thread_id",
        "is_primordial", "nested_cycles", "nested_anonymous_spans",
        "nested_primordial_spans", "nested_support_spans", "parent",
        "primordial", "nesting_level", "under_compensated",
    )

    def __init__(self, cycles_begin: int, stream_id: int, method_id: int,
                 thread_id: int, is_primordial: bool):
        self.cycles_begin = cycles_begin
        self.cycles_end = -1
        self.stream_id = stream_id
        self.method_id = method_id
        self.thread_id = thread_id
        self.is_primordial = is_primordial
        self.nested_cycles = 0
        self.nested_anonymous_spans = 0
        self.nested_primordial_spans = 0
        self.nested_support_spans = 0
        self.parent: Optional[Span] = None
        self.primordial: Optional[Span] = None
        self.nesting_level = -1
        self.under_compensated = False

    @property
    def is_anonymous(self) -> bool:
        return self.stream_id == -1

    @property
    def complete(self) -> bool:
        return self.cycles_end >= 0

    def measured_cycles(self) -> int:
        return self.cycles_end - self.cycles_begin

    def __repr__(self):
        return (f"Span(begin={self.cycles_begin}, end={self.cycles_end}, "
                f"stream={self.stream_id}, method={self.method_id}, "
                f"thread={self.thread_id}, level={self.nesting_level})")


@dataclass
class ThreadProfile:
    thread_id: int
    thread_name: str
    spans: list[Span] = field(default_factory=list)  # completion order
    named_spans: dict[int, list[Span]] = field(default_factory=dict)
    incomplete_spans: list[Span] = field(default_factory=list)


def reconstruct_thread(events: Iterable[tuple], thread_id: int,
                       thread_name: str,
                       trace_path: str | None = None) -> ThreadProfile:
    """Stack-based span reconstruction of one thread trace.

    Events are (tag, cycles, stream_id, method_id) tuples with strictly
    increasing cycles. Begin events still open at trace end become
    incomplete spans (excluded from all cycle aggregates).
    """
    profile = ThreadProfile(thread_id, thread_name)
    stack: list[Span] = []
    last_cycles = -1
    for index, (tag, cycles, stream_id, method_id) in enumerate(events):
        if cycles <= last_cycles:
            raise MalformedTrace(
                "NonMonotonicCycles",
                f"event {index}: cycles {cycles} not above {last_cycles}",
                trace_path)
        last_cycles = cycles
        if tag == ASB:
            stack.append(Span(cycles, -1, method_id, thread_id, False))
        elif tag == SSB:
            stack.append(Span(cycles, stream_id, method_id, thread_id, False))
        elif tag == PSB:
            stack.append(Span(cycles, stream_id, method_id, thread_id, True))
        elif tag == SE:
            if not stack:
                raise MalformedTrace(
                    "UnbalancedEnd",
                    f"event {index}: span end with no open span", trace_path)
            span = stack.pop()
            span.cycles_end = cycles
            if stack:
                parent = stack[-1]
                span.parent = parent
                parent.nested_cycles += span.measured_cycles()
                if span.is_anonymous:
                    parent.nested_anonymous_spans += 1
                elif span.is_primordial:
                    parent.nested_primordial_spans += 1
                else:
                    parent.nested_support_spans += 1
            if not span.is_anonymous:
                profile.named_spans.setdefault(span.stream_id, []).append(span)
            profile.spans.append(span)
        else:
            raise MalformedTrace("UnknownTag",
                                 f"event {index}: unknown tag {tag}",
                                 trace_path)
    profile.incomplete_spans = stack
    return profile


def merge_named_spans(
        thread_profiles: Iterable[ThreadProfile]) -> dict[int, list[Span]]:
    """Union of per-thread named-span buckets, keyed by stream id.

    Raises DuplicatePrimordial if any bucket holds != 1 primordial span.
    """
    merged: dict[int, list[Span]] = {}
    for tp in thread_profiles:
        for stream_id, spans in tp.named_spans.items():
            merged.setdefault(stream_id, []).extend(spans)
    for stream_id, spans in merged.items():
        count = sum(1 for s in spans if s.is_primordial)
        if count != 1:
            raise DuplicatePrimordial(stream_id, count)
    return merged


def update_primordial(merged: dict[int, list[Span]]) -> None:
    """Point every support span at its stream's unique primordial span."""
    for spans in merged.values():
        primordial = next(s for s in spans if s.is_primordial)
        for span in spans:
            if not span.is_primordial:
                span.primordial = primordial


def outer_span(span: Span) -> Optional[Span]:
    """The enclosing span: the primordial's parent for support spans,
    the same-thread parent otherwise."""
    if span.primordial is not None:
        return span.primordial.parent
    return span.parent


def compute_nesting_levels(spans: Iterable[Span]) -> None:
    """Level 0 for spans with no outer span, else outer's level + 1."""
    for span in spans:
        if span.nesting_level >= 0:
            continue
        chain = []
        seen = set()
        current = span
        while current is not None and current.nesting_level < 0:
            if id(current) in seen:
                raise CyclicNesting("outer-span chain revisits a span")
            seen.add(id(current))
            chain.append(current)
            current = outer_span(current)
        base = current.nesting_level if current is not None else -1
        for node in reversed(chain):
            base += 1
            node.nesting_level = base


class ApplicationProfile:
    """Whole-run profile merged from all thread profiles.

    Construction order is fixed (threads sorted by id) so reconstruction of
    the same trace set is deterministic regardless of file processing order.
    """

    def __init__(self, thread_profiles: list[ThreadProfile],
                 source: Optional[CycleSourceDescriptor] = None):
        self.thread_profiles = sorted(thread_profiles,
                                      key=lambda tp: tp.thread_id)
        self.source = source
        self.all_spans: list[Span] = []
        self.incomplete_spans: list[Span] = []
        for tp in self.thread_profiles:
            self.all_spans.extend(tp.spans)
            self.incomplete_spans.extend(tp.incomplete_spans)
        self.merged_named_spans = merge_named_spans(self.thread_profiles)
        update_primordial(self.merged_named_spans)
        compute_nesting_levels(self.all_spans)


def compensated_cycles(span: Span, model: CostModel) -> float:
    """Exclusive cycles minus estimated instrumentation costs.

    nested_cycles is the sum of children's measured (pre-compensation)
    cycles, so each child's inner cost is already excluded from the parent.
    Negative raw values clamp to 0 and flag the span as under-compensated.
    """
    raw = (
        (span.measured_cycles() - span.nested_cycles)
        - span.nested_anonymous_spans * model.oc_anon
        - span.nested_primordial_spans * model.oc_prim
        - span.nested_support_spans * model.oc_supp
        - model.ic
    )
    if raw < 0:
        span.under_compensated = True
        return 0.0
    return raw


def total_compensated_cycles(profile: ApplicationProfile,
                             model: CostModel) -> float:
    """Sum over all complete spans; incomplete spans are excluded."""
    return sum(compensated_cycles(span, model) for span in profile.all_spans)


def load_application_profile(trace_paths: Iterable[str]) -> ApplicationProfile:
    """Read dumped traces and build the merged profile.

    All traces must share one cycle-source kind; the descriptor is kept on
    the profile so analysis can refuse a mismatched cost model.
    """
    thread_profiles = []
    source: Optional[CycleSourceDescriptor] = None
    for path in sorted(trace_paths):
        descriptor, thread_id, thread_name, events = codec.read_trace(path)
        if source is None:
            source = descriptor
        elif source.kind != descriptor.kind:
            raise MalformedTrace(
                "BadMagic",
                f"trace mixes cycle sources: {source.kind} vs {descriptor.kind}",
                path)
        thread_profiles.append(
            reconstruct_thread(events, thread_id, thread_name, path))
    return ApplicationProfile(thread_profiles, source)
