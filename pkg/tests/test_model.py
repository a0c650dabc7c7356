"""Stage/chain/plan construction rules and operating-point resolution."""

from __future__ import annotations

import json
import math
import random

import pytest

from rxchain.errors import (
    ChainDefinitionError,
    FrequencyRangeError,
    OperatingPointError,
    StageDefinitionError,
)
from rxchain.model import (
    Chain,
    FrequencyPlan,
    GainTable,
    OperatingPoint,
    StageKind,
    StageSpec,
    build_chain,
    derive_ip3,
    load_chain,
    load_reference_chain,
    reference_chain_path,
    resolve_stage,
    validate_document,
)


def _amp(label="a1", gain=18.0, nf=1.0, oip3=28.0, **kw):
    return StageSpec(label=label, kind=StageKind.AMPLIFIER, gain_db=gain, nf_db=nf, oip3_dbm=oip3, **kw)


class TestStageSpec:
    def test_amplifier_basics(self):
        s = _amp()
        assert s.kind is StageKind.AMPLIFIER
        assert s.gain_db == 18.0

    def test_passive_defaults_nf_to_loss(self):
        s = StageSpec(label="f1", kind=StageKind.FILTER, gain_db=-2.0)
        assert s.nf_db == 2.0

    def test_passive_positive_gain_rejected(self):
        for kind in (StageKind.FILTER, StageKind.ATTENUATOR, StageKind.CABLE, StageKind.THERMOPAD):
            with pytest.raises(StageDefinitionError):
                StageSpec(label="x", kind=kind, gain_db=+1.0)

    def test_both_intercepts_rejected(self):
        with pytest.raises(StageDefinitionError):
            StageSpec(label="a", kind=StageKind.AMPLIFIER, gain_db=10.0, nf_db=2.0,
                      oip3_dbm=30.0, iip3_dbm=20.0)

    def test_negative_tolerance_rejected(self):
        with pytest.raises(StageDefinitionError):
            _amp(gain_tol_db=-0.5)

    def test_setting_only_on_adjustable(self):
        with pytest.raises(StageDefinitionError):
            StageSpec(label="p", kind=StageKind.ATTENUATOR, gain_db=-3.0, setting_db=1.0)

    def test_adjustable_setting_range_and_step(self):
        StageSpec(label="adj", kind=StageKind.ADJUSTABLE_ATTENUATOR, gain_db=0.0, setting_db=31.5)
        with pytest.raises(StageDefinitionError):
            StageSpec(label="adj", kind=StageKind.ADJUSTABLE_ATTENUATOR, gain_db=0.0, setting_db=32.0)
        with pytest.raises(StageDefinitionError):
            StageSpec(label="adj", kind=StageKind.ADJUSTABLE_ATTENUATOR, gain_db=0.0, setting_db=0.3)

    def test_error_message_collects_all_violations(self):
        with pytest.raises(StageDefinitionError) as err:
            StageSpec(label="bad", kind=StageKind.FILTER, gain_db=+2.0, gain_tol_db=-1.0)
        msg = str(err.value)
        assert "gain" in msg and "tol" in msg


class TestFrequencyPlan:
    def test_if1_derived_as_sum(self):
        plan = FrequencyPlan(rf_band_hz=(3.1e9, 3.5e9), lo1_mode="high-side",
                             lo2_hz=540e6, if2_hz=60e6, passband_hz=5e6)
        assert plan.if1_hz == 600e6

    def test_explicit_if1_must_be_consistent(self):
        FrequencyPlan(rf_band_hz=(3.1e9, 3.5e9), lo1_mode="high-side",
                      lo2_hz=540e6, if2_hz=60e6, if1_hz=480e6, passband_hz=5e6)
        with pytest.raises(ChainDefinitionError):
            FrequencyPlan(rf_band_hz=(3.1e9, 3.5e9), lo1_mode="high-side",
                          lo2_hz=540e6, if2_hz=60e6, if1_hz=500e6, passband_hz=5e6)

    def test_positive_frequencies_required(self):
        with pytest.raises(ChainDefinitionError):
            FrequencyPlan(rf_band_hz=(0.0, 3.5e9), lo1_mode="high-side",
                          lo2_hz=540e6, if2_hz=60e6, passband_hz=5e6)
        with pytest.raises(ChainDefinitionError):
            FrequencyPlan(rf_band_hz=(3.1e9, 3.5e9), lo1_mode="high-side",
                          lo2_hz=540e6, if2_hz=60e6, passband_hz=0.0)

    def test_contains(self):
        plan = FrequencyPlan(rf_band_hz=(3.1e9, 3.5e9), lo1_mode="high-side",
                             lo2_hz=540e6, if2_hz=60e6, passband_hz=5e6)
        assert plan.contains_rf(3.3e9)
        assert not plan.contains_rf(3.6e9)


class TestOperatingPoint:
    def test_defaults(self):
        p = OperatingPoint(rf_hz=3.3e9)
        assert p.temp_degc == 25.0
        assert p.p_in_dbm == -32.0
        assert p.interferer is None

    def test_rf_positive(self):
        with pytest.raises(OperatingPointError):
            OperatingPoint(rf_hz=-1.0)

    def test_temperature_validity_range(self):
        OperatingPoint(rf_hz=1e9, temp_degc=-55.0)
        OperatingPoint(rf_hz=1e9, temp_degc=125.0)
        with pytest.raises(OperatingPointError):
            OperatingPoint(rf_hz=1e9, temp_degc=130.0)
        # range itself is configurable
        OperatingPoint(rf_hz=1e9, temp_degc=130.0, temp_range_degc=(-60.0, 150.0))

    def test_interferer_tuple(self):
        p = OperatingPoint(rf_hz=1e9, interferer=(1e6, -82.0))
        assert p.interferer == (1e6, -82.0)
        with pytest.raises(OperatingPointError):
            OperatingPoint(rf_hz=1e9, interferer=(0.0, -82.0))


class TestDeriveIp3:
    def test_oip3_to_iip3(self):
        assert derive_ip3(18.0, oip3_dbm=28.0) == (10.0, 28.0)

    def test_zero_gain(self):
        assert derive_ip3(0.0, iip3_dbm=5.0) == (5.0, 5.0)

    def test_lossy(self):
        assert derive_ip3(-6.0, iip3_dbm=20.0) == (20.0, 14.0)

    def test_exactly_one_required(self):
        with pytest.raises(StageDefinitionError):
            derive_ip3(10.0)
        with pytest.raises(StageDefinitionError):
            derive_ip3(10.0, oip3_dbm=30.0, iip3_dbm=20.0)

    def test_involution(self):
        rng = random.Random(11)
        for _ in range(200):
            g = rng.uniform(-10.0, 30.0)
            o = rng.uniform(-10.0, 50.0)
            i1, o1 = derive_ip3(g, oip3_dbm=o)
            i2, o2 = derive_ip3(g, iip3_dbm=i1)
            assert o2 == pytest.approx(o, abs=1e-12)
            assert i2 == i1


class TestResolveStage:
    def test_tempco_at_85(self):
        s = _amp(gain=18.0, nf=1.0, oip3=28.0)
        s = StageSpec(label="a", kind=StageKind.AMPLIFIER, gain_db=18.0, nf_db=1.0,
                      oip3_dbm=28.0, gain_tempco_db_per_degc=-0.01)
        r = resolve_stage(s, OperatingPoint(rf_hz=1e9, temp_degc=85.0))
        assert r.gain_db == pytest.approx(18.0 - 0.01 * 60.0, abs=1e-12)

    def test_intercept_derivation(self):
        r = resolve_stage(_amp(gain=20.0, oip3=30.0), OperatingPoint(rf_hz=1e9))
        assert r.iip3_dbm == pytest.approx(10.0, abs=1e-12)
        assert r.oip3_dbm == pytest.approx(30.0, abs=1e-12)

    def test_linear_fields_match_db_fields(self):
        rng = random.Random(5)
        for _ in range(300):
            g = rng.uniform(-15.0, 30.0)
            nf = rng.uniform(0.1, 12.0)
            o = rng.uniform(0.0, 45.0)
            s = StageSpec(label="a", kind=StageKind.AMPLIFIER, gain_db=g, nf_db=nf, oip3_dbm=o)
            r = resolve_stage(s, OperatingPoint(rf_hz=1e9))
            assert r.gain_lin == pytest.approx(10.0 ** (g / 10.0), rel=1e-12)
            assert 10.0 * math.log10(r.noise_factor_lin) == pytest.approx(nf, abs=1e-12)
            assert 10.0 * math.log10(r.iip3_mw) == pytest.approx(r.iip3_dbm, abs=1e-12)

    def test_passive_nf_equals_loss_at_reference_temp(self):
        s = StageSpec(label="pad", kind=StageKind.ATTENUATOR, gain_db=-6.0)
        r = resolve_stage(s, OperatingPoint(rf_hz=1e9, temp_degc=25.0))
        assert r.nf_db == 6.0
        assert not r.is_nonlinear

    def test_temperature_resolution_is_affine(self):
        s = StageSpec(label="a", kind=StageKind.AMPLIFIER, gain_db=12.0, nf_db=2.0,
                      oip3_dbm=30.0, gain_tempco_db_per_degc=-0.013)
        r1 = resolve_stage(s, OperatingPoint(rf_hz=1e9, temp_degc=-40.0))
        r2 = resolve_stage(s, OperatingPoint(rf_hz=1e9, temp_degc=85.0))
        assert r1.gain_db - r2.gain_db == pytest.approx(-0.013 * (-40.0 - 85.0), abs=1e-12)

    def test_adjustable_attenuator_setting_applies(self):
        s = StageSpec(label="adj", kind=StageKind.ADJUSTABLE_ATTENUATOR, gain_db=0.0, setting_db=4.5)
        r = resolve_stage(s, OperatingPoint(rf_hz=1e9))
        assert r.gain_db == -4.5
        assert r.nf_db == 4.5

    def test_gain_table_interpolation_and_range(self):
        table = GainTable(freqs_hz=(3.0e9, 3.2e9), gains_db=(18.0, 20.0))
        s = StageSpec(label="lna", kind=StageKind.AMPLIFIER, gain_db=18.0, nf_db=0.9,
                      oip3_dbm=32.0, gain_table=table)
        r = resolve_stage(s, OperatingPoint(rf_hz=3.1e9))
        assert r.gain_db == pytest.approx(19.0, abs=1e-12)
        with pytest.raises(FrequencyRangeError):
            resolve_stage(s, OperatingPoint(rf_hz=2.9e9))


def _doc(stages=None, name="t"):
    return {
        "name": name,
        "plan": {"rf_band_hz": [3.1e9, 3.5e9], "lo1_mode": "high-side",
                 "lo2_hz": 540e6, "if2_hz": 60e6, "passband_hz": 5e6},
        "stages": stages if stages is not None else [
            {"label": "a1", "kind": "amplifier", "gain_db": 18.0, "nf_db": 1.0, "oip3_dbm": 28.0},
        ],
    }


class TestBuildChain:
    def test_minimal_document(self):
        chain = build_chain(_doc())
        assert isinstance(chain, Chain)
        assert len(chain.stages) == 1

    def test_identity_chain(self):
        doc = _doc(stages=[])
        doc["identity"] = True
        chain = build_chain(doc)
        assert chain.stages == ()

    def test_empty_without_identity_flag_rejected(self):
        with pytest.raises(ChainDefinitionError):
            build_chain(_doc(stages=[]))

    def test_both_intercepts_rejected(self):
        doc = _doc(stages=[{"label": "a1", "kind": "amplifier", "gain_db": 18.0,
                            "nf_db": 1.0, "oip3_dbm": 28.0, "iip3_dbm": 10.0}])
        with pytest.raises(ChainDefinitionError):
            build_chain(doc)

    def test_positive_gain_filter_rejected_and_named(self):
        doc = _doc(stages=[{"label": "badfilter", "kind": "filter", "gain_db": 2.0}])
        problems = validate_document(doc)
        assert any("badfilter" in p for p in problems)

    def test_single_mixer_rejected(self):
        doc = _doc(stages=[
            {"label": "a1", "kind": "amplifier", "gain_db": 18.0, "nf_db": 1.0, "oip3_dbm": 28.0},
            {"label": "mx", "kind": "mixer", "gain_db": -7.0, "nf_db": 7.0, "iip3_dbm": 30.0},
        ])
        problems = validate_document(doc)
        assert any("mixer" in p for p in problems)

    def test_duplicate_labels_rejected(self):
        doc = _doc(stages=[
            {"label": "a", "kind": "amplifier", "gain_db": 10.0, "nf_db": 1.0, "oip3_dbm": 28.0},
            {"label": "a", "kind": "amplifier", "gain_db": 10.0, "nf_db": 1.0, "oip3_dbm": 28.0},
        ])
        problems = validate_document(doc)
        assert any("label" in p for p in problems)

    def test_unknown_field_rejected(self):
        doc = _doc()
        doc["stages"][0]["gian_db"] = 3.0
        problems = validate_document(doc)
        assert any("gian_db" in p for p in problems)

    def test_all_violations_reported_not_just_first(self):
        doc = _doc(stages=[
            {"label": "f", "kind": "filter", "gain_db": 2.0},
            {"label": "f", "kind": "filter", "gain_db": 3.0},
        ])
        problems = validate_document(doc)
        assert len(problems) >= 3  # two positive-gain passives + duplicate label


class TestReferenceChain:
    def test_loads_with_14_stages(self):
        chain = load_reference_chain()
        assert len(chain.stages) == 14
        assert chain.plan.if1_hz == 600e6

    def test_amplifier_gains_and_nominal_total(self):
        chain = load_reference_chain()
        amp_gains = [s.gain_db for s in chain.stages if s.kind is StageKind.AMPLIFIER]
        assert amp_gains == [18.0, 18.0, 24.0, 20.0, 20.0]
        assert sum(s.gain_db for s in chain.stages) == pytest.approx(42.0, abs=1e-12)

    def test_two_mixers(self):
        chain = load_reference_chain()
        assert sum(1 for s in chain.stages if s.kind is StageKind.MIXER) == 2

    def test_file_round_trips_through_validate(self):
        path = reference_chain_path()
        doc = json.loads(path.read_text())
        assert validate_document(doc, base_dir=path.parent) == []

    def test_attenuator_setting_override(self):
        chain = load_reference_chain()
        loud = chain.with_attenuator_setting(2.0)
        idx = loud.attenuator_index
        assert loud.stages[idx].setting_db == 2.0
        # original untouched
        assert chain.stages[idx].setting_db == 0.0

    def test_load_chain_from_path(self):
        chain = load_chain(reference_chain_path())
        assert chain.name == "sband-receiver"
