import random
import threading

import pytest

from spanprof import codec
from spanprof.cycles import ScriptedCycleSource
from spanprof.recorder import ASB, SE, Recorder, SpanEvent


def test_register_location_idempotent(recorder):
    first = recorder.register_location("orders.analytics.DailyRollup.compute")
    second = recorder.register_location("orders.analytics.DailyRollup.compute")
    assert first == second == 0


def test_register_location_injective(recorder):
    a = recorder.register_location("pkg.a")
    b = recorder.register_location("pkg.b")
    assert a != b


def test_ten_thousand_locations_are_dense(recorder):
    rng = random.Random(0)
    names = {f"mod{rng.randrange(10**9)}.fn{i}" for i in range(10_000)}
    ids = {recorder.register_location(name) for name in names}
    assert ids == set(range(len(names)))


def test_empty_location_rejected(recorder):
    with pytest.raises(ValueError):
        recorder.register_location("")


def test_record_appends(recorder):
    recorder.record(ASB, 100, -1, 0)
    assert len(recorder.thread_buffers()[0].events) == 1


def test_overflow_dumps_segment(tmp_path, scripted_source):
    recorder = Recorder(scripted_source, str(tmp_path), buffer_capacity=2)
    recorder.register_location("loc")
    recorder.record(ASB, 10, -1, 0)
    recorder.record(SE, 20)
    buf = recorder.thread_buffers()[0]
    assert buf.dumped_any and len(buf.events) == 0
    recorder.record(ASB, 30, -1, 0)
    assert len(buf.events) == 1


def test_overflow_segments_concatenate(tmp_path, scripted_source):
    recorder = Recorder(scripted_source, str(tmp_path), buffer_capacity=3)
    events = [SpanEvent(ASB, c, -1, 0) if i % 2 == 0 else SpanEvent(SE, c, -1, 0)
              for i, c in enumerate(range(10, 210, 10))]
    for event in events:
        recorder.record_event(event)
    paths = recorder.flush_all()
    assert len(paths) == 1
    _, _, _, loaded = codec.read_trace(paths[0])
    assert loaded == [tuple(e) for e in events]
    cycles = [e[1] for e in loaded]
    assert cycles == sorted(cycles) and len(set(cycles)) == len(cycles)


def test_flush_without_events_writes_registry(tmp_path, scripted_source):
    recorder = Recorder(scripted_source, str(tmp_path))
    recorder.register_location("only.location")
    assert recorder.flush_all() == []
    assert codec.read_location_file(recorder.location_file_path()) == {
        0: "only.location"}


def test_one_trace_per_thread(tmp_path, scripted_source):
    recorder = Recorder(scripted_source, str(tmp_path))

    def work():
        cycles = recorder.read_cycles()
        recorder.record(ASB, cycles, -1, 0)
        recorder.record(SE, recorder.read_cycles())

    threads = [threading.Thread(target=work) for _ in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(recorder.flush_all()) == 3


def test_million_appends_across_threads(tmp_path, scripted_source):
    per_thread = 125_000
    n_threads = 8
    recorder = Recorder(scripted_source, str(tmp_path),
                        buffer_capacity=1 << 15)

    def work():
        record = recorder.record
        read = recorder.read_cycles
        for _ in range(per_thread // 2):
            record(ASB, read(), -1, 0)
            record(SE, read())

    threads = [threading.Thread(target=work) for _ in range(n_threads)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    paths = recorder.flush_all()
    assert len(paths) == n_threads
    total = sum(len(codec.read_trace(p)[3]) for p in paths)
    assert total == per_thread * n_threads


def test_trace_roundtrip_preserves_fields(tmp_path, scripted_source):
    recorder = Recorder(scripted_source, str(tmp_path))
    recorder.record(ASB, 5, -1, 42)
    recorder.record(SE, 9)
    paths = recorder.flush_all()
    _, thread_id, thread_name, events = codec.read_trace(paths[0])
    assert events == [(ASB, 5, -1, 42), (SE, 9, -1, 0)]
    assert thread_id == 0
    assert thread_name == threading.current_thread().name
