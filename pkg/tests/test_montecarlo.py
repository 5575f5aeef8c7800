"""Sampled detector-loss chains: tables, determinism, statistics."""

import json

import numpy as np
import pytest

from ecpsim.engine import ConfigError, run_ecp1, run_ecp2
from ecpsim.measurement import DetectorModel
from ecpsim.montecarlo import (
    ChainTables,
    estimate_series_total,
    run_monte_carlo,
    sample_chain,
    tables_from_report,
)
from ecpsim.params import EntanglementParams, PolarizationParams


def _ideal_report(rounds=3):
    return run_ecp2(EntanglementParams.from_alpha_sq(0.6), rounds=rounds)


def test_tables_capture_the_exact_chain():
    tables = tables_from_report(_ideal_report())
    assert tables.w_success[0] == pytest.approx(0.48, abs=1e-12)
    assert tables.w_recycle[0] == pytest.approx(0.52, abs=1e-12)
    assert tables.detected_photons == 1
    assert tables.analytic_total(1.0) == pytest.approx(
        sum(tables.w_success), abs=1e-15
    )
    assert tables.analytic_total(0.8) == pytest.approx(
        0.8 * sum(tables.w_success), abs=1e-15
    )


def test_tables_reject_a_lossy_report():
    lossy = run_ecp2(
        EntanglementParams.from_alpha_sq(0.6),
        rounds=2,
        model=DetectorModel(eta_p=0.8),
    )
    with pytest.raises(ConfigError):
        tables_from_report(lossy)


def test_branch_accounting_is_not_a_trial_distribution():
    report = run_ecp2(
        EntanglementParams.from_alpha_sq(0.6),
        PolarizationParams.from_gamma_sq(0.5),
        rounds=2,
        accounting="branch",
    )
    with pytest.raises(ConfigError, match="trial distribution"):
        tables_from_report(report)


def test_joint_accounting_on_two_arms_is_sampleable():
    report = run_ecp2(
        EntanglementParams.from_alpha_sq(0.6),
        PolarizationParams.from_gamma_sq(0.5),
        rounds=2,
        accounting="joint",
    )
    tables = tables_from_report(report)
    assert tables.detected_photons == 2
    assert tables.analytic_total(0.8) == pytest.approx(
        0.64 * sum(tables.w_success), abs=1e-15
    )


def test_same_seed_same_counts():
    tables = tables_from_report(_ideal_report())
    a = sample_chain(tables, 0.8, 50_000, np.random.default_rng(7))
    b = sample_chain(tables, 0.8, 50_000, np.random.default_rng(7))
    assert a == b
    c = sample_chain(tables, 0.8, 50_000, np.random.default_rng(8))
    assert a != c


def test_estimates_track_the_analytic_total():
    for k in (1, 3, 5):
        est, err, exact = estimate_series_total(
            0.6, rounds=k, eta_p=0.8, trials=100_000, seed=11
        )
        assert abs(est - exact) <= 5.0 * err


def test_report_shape_and_determinism():
    ent = EntanglementParams.from_alpha_sq(0.6)
    r1 = run_monte_carlo("ecp2", ent, rounds=2, eta_p=0.8, trials=20_000, seed=3)
    r2 = run_monte_carlo("ecp2", ent, rounds=2, eta_p=0.8, trials=20_000, seed=3)
    assert r1.to_json() == r2.to_json()
    payload = json.loads(r1.to_json())
    assert payload["engine"]["kind"] == "monte_carlo"
    assert payload["trials"] == 20_000
    assert payload["seed"] == 3
    assert payload["stderr"] >= 0.0
    for entry in payload["rounds"]:
        assert entry["heralded_fidelity"] is None
    r3 = run_monte_carlo("ecp2", ent, rounds=2, eta_p=0.8, trials=20_000, seed=4)
    assert r3.to_json() != r1.to_json()


def test_single_round_protocol_sampling():
    ent = EntanglementParams.from_alpha_sq(0.6)
    exact = run_ecp1(ent, model=DetectorModel(eta_p=0.8))
    mc = run_monte_carlo("ecp1", ent, eta_p=0.8, trials=100_000, seed=5)
    assert abs(mc.p_total - exact.p_total) <= 5.0 * mc.stderr


def test_trial_count_must_be_positive():
    ent = EntanglementParams.from_alpha_sq(0.6)
    with pytest.raises(ConfigError):
        run_monte_carlo("ecp2", ent, rounds=2, eta_p=0.8, trials=0, seed=1)
    with pytest.raises(ConfigError):
        run_monte_carlo("nope", ent, rounds=2, eta_p=0.8, trials=10, seed=1)


def test_validate_rejects_inconsistent_tables():
    bad = ChainTables(w_success=(0.7,), w_recycle=(0.5,), detected_photons=2)
    with pytest.raises(ConfigError):
        bad.validate()
