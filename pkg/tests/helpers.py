"""Shared test utilities: random well-formed traces and the independent
interval-containment oracle for span reconstruction."""

from __future__ import annotations

import random

import numpy as np

from spanprof.recorder import ASB, PSB, SE, SSB


def random_trace(rng: random.Random, max_events: int = 200,
                 max_depth: int = 20, named_fraction: float = 0.25,
                 close_all: bool = True) -> list[tuple]:
    """Well-formed single-thread trace: balanced, LIFO, strictly increasing
    cycles, exactly one PSB per stream id, SSB ids reference earlier PSBs."""
    events = []
    cycles = rng.randint(1, 100)
    depth = 0
    stream_ids: list[int] = []
    next_stream = 0
    budget = rng.randint(2, max_events)
    while len(events) < budget:
        can_begin = depth < max_depth
        begin = can_begin and (depth == 0 or rng.random() < 0.5)
        if begin:
            if rng.random() < named_fraction:
                if stream_ids and rng.random() < 0.5:
                    events.append((SSB, cycles, rng.choice(stream_ids),
                                   rng.randint(0, 5)))
                else:
                    events.append((PSB, cycles, next_stream,
                                   rng.randint(0, 5)))
                    stream_ids.append(next_stream)
                    next_stream += 1
            else:
                events.append((ASB, cycles, -1, rng.randint(0, 5)))
            depth += 1
        else:
            events.append((SE, cycles, -1, 0))
            depth -= 1
        cycles += rng.randint(1, 1000)
    if close_all:
        while depth > 0:
            events.append((SE, cycles, -1, 0))
            depth -= 1
            cycles += rng.randint(1, 1000)
    return events


def oracle_spans(events: list[tuple]) -> list[dict]:
    """Brute-force reconstruction by balance counting and interval
    containment; independent of the stack implementation.

    Returns per-span dicts in completion (end-event) order.
    """
    deltas = np.array([1 if e[0] != SE else -1 for e in events])
    depth = np.cumsum(deltas)
    # Positions where the running depth equals each value, for end matching.
    spans = []
    for i, event in enumerate(events):
        if event[0] == SE:
            continue
        d = depth[i]
        # The matching end is the first later event that brings depth to d-1.
        after = np.nonzero(depth[i + 1:] == d - 1)[0]
        assert len(after), "trace not balanced"
        j = i + 1 + int(after[0])
        assert events[j][0] == SE
        spans.append({
            "begin_index": i,
            "end_index": j,
            "begin": event[1],
            "end": events[j][1],
            "kind": event[0],
            "stream_id": event[2],
            "method_id": event[3],
        })
    # Parent = the span with the latest begin whose interval strictly
    # contains this one.
    begins = np.array([s["begin_index"] for s in spans])
    ends = np.array([s["end_index"] for s in spans])
    for idx, span in enumerate(spans):
        contains = (begins < begins[idx]) & (ends > ends[idx])
        candidates = np.nonzero(contains)[0]
        span["parent"] = (
            int(candidates[np.argmax(begins[candidates])])
            if len(candidates) else None)
    for span in spans:
        span["measured"] = span["end"] - span["begin"]
        span["nested_cycles"] = 0
        span["n_anon"] = 0
        span["n_prim"] = 0
        span["n_supp"] = 0
    for span in spans:
        p = span["parent"]
        if p is None:
            continue
        parent = spans[p]
        parent["nested_cycles"] += span["measured"]
        if span["kind"] == ASB:
            parent["n_anon"] += 1
        elif span["kind"] == PSB:
            parent["n_prim"] += 1
        else:
            parent["n_supp"] += 1
    order = sorted(range(len(spans)), key=lambda k: spans[k]["end_index"])
    remap = {old: new for new, old in enumerate(order)}
    ordered = [spans[k] for k in order]
    for span in ordered:
        if span["parent"] is not None:
            span["parent"] = remap[span["parent"]]
    return ordered


def assert_matches_oracle(profile_spans, oracle):
    """Span-for-span comparison in completion order."""
    assert len(profile_spans) == len(oracle)
    index_of = {id(s): i for i, s in enumerate(profile_spans)}
    for span, expect in zip(profile_spans, oracle):
        assert span.cycles_begin == expect["begin"]
        assert span.cycles_end == expect["end"]
        assert span.measured_cycles() == expect["measured"]
        assert span.nested_cycles == expect["nested_cycles"]
        assert span.nested_anonymous_spans == expect["n_anon"]
        assert span.nested_primordial_spans == expect["n_prim"]
        assert span.nested_support_spans == expect["n_supp"]
        assert span.method_id == expect["method_id"]
        assert span.stream_id == expect["stream_id"]
        if expect["parent"] is None:
            assert span.parent is None
        else:
            assert span.parent is not None
            assert index_of[id(span.parent)] == expect["parent"]
