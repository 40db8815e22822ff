import json
import math

import numpy as np
import pytest

from spanprof.calibration import (CalibrationConfig, CalibrationSample,
                                  _fenced_mean, _iqr_keep,
                                  estimate_inner_cost, estimate_outer_cost,
                                  generate_span_pairs, run_calibration,
                                  write_cost_model)
from spanprof.costmodel import CostModel
from spanprof.cycles import (CycleSourceDescriptor, ScriptedCycleSource,
                             make_cycle_source)
from spanprof.errors import DegenerateSamples, MixedSourceError
from spanprof.recorder import Recorder

CFG = CalibrationConfig(pairs_per_cost=200)


def sample(outer_begin, nested_begin, nested_end, outer_end, kind="anon"):
    return CalibrationSample(outer_begin, nested_begin, nested_end, outer_end,
                             kind)


def test_outer_cost_formula():
    # Bracket of 120 + 80 around the nested span, with IC = 150, costs 50.
    s = sample(1000, 1120, 1500, 1580)
    cost, est, warnings = estimate_outer_cost([s] * 10, ic=150.0)
    assert cost == pytest.approx(50.0)
    assert est.cv == 0.0
    assert warnings == []


def test_outer_cost_cancels_to_zero():
    s = sample(0, 10, 20, 30)  # bracket 20 == IC
    cost, _, warnings = estimate_outer_cost([s] * 10, ic=20.0)
    assert cost == 0.0
    assert warnings == []


def test_outer_cost_negative_mean_clamped_with_warning():
    s = sample(0, 10, 20, 30)  # bracket 20, IC 50 -> -30
    cost, est, warnings = estimate_outer_cost([s] * 10, ic=50.0)
    assert cost == 0.0
    assert len(warnings) == 1 and "clamped" in warnings[0]


def test_inner_cost_iqr_discards_outlier():
    # Nine tight samples at 100 plus one wild delta; the fenced mean is 100.
    samples = [sample(0, 10, 110, 200)] * 9 + [sample(0, 10, 1_000_010, 200)]
    ic, est = estimate_inner_cost(samples)
    assert ic == pytest.approx(100.0)
    assert est.samples_kept == 9
    assert est.samples_total == 10


def test_iqr_keep_factor():
    values = np.array([10.0, 11.0, 12.0, 13.0, 1000.0])
    kept = _iqr_keep(values, 1.5)
    assert 1000.0 not in kept and len(kept) == 4


def test_degenerate_samples_raises():
    # Garbage deltas (overflowed reads) defeat the fences entirely.
    values = np.array([0.0, math.inf, math.inf, math.inf])
    with np.errstate(invalid="ignore"), pytest.raises(DegenerateSamples):
        _fenced_mean(values, 1.5, "inner cost")


def test_generate_span_pairs_shapes(tmp_path):
    source = ScriptedCycleSource(step=100)
    recorder = Recorder(source, str(tmp_path))
    for kind in ("anon", "prim", "supp"):
        samples = generate_span_pairs(recorder, kind, CFG)
        assert len(samples) == CFG.pairs_per_cost
        for s in samples:
            assert s.outer_begin < s.nested_begin < s.nested_end < s.outer_end
            assert s.kind == kind


def test_generate_span_pairs_rejects_unknown_kind(tmp_path):
    recorder = Recorder(ScriptedCycleSource(step=100), str(tmp_path))
    with pytest.raises(ValueError):
        generate_span_pairs(recorder, "bogus", CFG)


def test_scripted_calibration_is_exact(tmp_path):
    # With a fixed step of 100 per read, every cost comes out exactly 100.
    model = run_calibration(ScriptedCycleSource(step=100), str(tmp_path), CFG)
    assert model.ic == pytest.approx(100.0)
    assert model.oc_anon == pytest.approx(100.0)
    assert model.oc_prim == pytest.approx(100.0)
    assert model.oc_supp == pytest.approx(100.0)
    for est in model.estimates.values():
        assert est.cv == 0.0


def test_calibration_warns_below_min_pairs(tmp_path):
    model = run_calibration(ScriptedCycleSource(step=7), str(tmp_path), CFG)
    assert any("below the accepted minimum" in w for w in model.warnings)


def test_calibration_single_kind_warns_for_others(tmp_path):
    model = run_calibration(ScriptedCycleSource(step=9), str(tmp_path), CFG,
                            kinds=("anon",))
    assert model.oc_prim == 0.0 and model.oc_supp == 0.0
    assert any("oc_prim: not calibrated" in w for w in model.warnings)


def test_cost_model_roundtrip(tmp_path):
    model = run_calibration(ScriptedCycleSource(step=100), str(tmp_path), CFG)
    path = tmp_path / "costs.json"
    write_cost_model(model, str(path))
    loaded = CostModel.read(str(path))
    assert loaded.ic == model.ic
    assert loaded.oc_anon == model.oc_anon
    assert loaded.oc_prim == model.oc_prim
    assert loaded.oc_supp == model.oc_supp
    assert loaded.source.kind == "ScriptedTicks"
    assert loaded.pairs_per_cost == CFG.pairs_per_cost
    obj = json.loads(path.read_text())
    assert obj["format_version"] == 1
    assert set(obj["costs"]) == {"ic", "oc_anon", "oc_prim", "oc_supp"}


def test_cost_model_rejects_negative_constants():
    with pytest.raises(ValueError):
        CostModel(ic=-1.0, oc_anon=0, oc_prim=0, oc_supp=0,
                  source=CycleSourceDescriptor("ScriptedTicks"))


def test_mixed_source_rejected():
    model = CostModel.zero(CycleSourceDescriptor("ScriptedTicks"))
    other = make_cycle_source("monotonic").descriptor
    with pytest.raises(MixedSourceError):
        model.check_source(other)
    model.check_source(CycleSourceDescriptor("ScriptedTicks"))  # same: ok


def test_hardware_calibration_smoke(tmp_path):
    # A tiny real-clock calibration: constants must be finite and >= 0.
    model = run_calibration(make_cycle_source("thread-cycles"), str(tmp_path),
                            CalibrationConfig(pairs_per_cost=500))
    for value in (model.ic, model.oc_anon, model.oc_prim, model.oc_supp):
        assert math.isfinite(value) and value >= 0
