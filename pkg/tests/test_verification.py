import json

import numpy as np
import pytest

from cdgmhd.physics import IdealGas, admissible, internal_energy_density
from cdgmhd.verification import (
    BATTERIES,
    CounterexampleFamily,
    fuzz_lemmas,
    run_counterexample,
    sample_admissible,
)


@pytest.fixture(scope="module")
def eos():
    return IdealGas(5.0 / 3.0)


# ---------------------------------------------------------------- batteries


def test_sampler_produces_admissible_states(eos):
    rng = np.random.default_rng(7)
    U = sample_admissible(rng, 500, eos)
    assert admissible(U).all()


def test_fuzz_report_is_deterministic():
    a = fuzz_lemmas(seed=3, n_samples=400)
    b = fuzz_lemmas(seed=3, n_samples=400)
    assert a.to_json() == b.to_json()


def test_fuzz_default_batteries_pass():
    report = fuzz_lemmas(seed=11, n_samples=4000)
    assert len(report.batteries) == len(BATTERIES)
    for battery in report.batteries:
        assert battery.passed, battery.name
    assert report.passed
    doc = json.loads(report.to_json())
    assert doc["passed"] is True
    assert {b["name"] for b in doc["batteries"]} == set(BATTERIES)


def test_fuzz_battery_subset_and_unknown():
    report = fuzz_lemmas(seed=1, n_samples=200, batteries=["convexity"])
    assert [b.name for b in report.batteries] == ["convexity"]
    with pytest.raises(ValueError, match="unknown battery"):
        fuzz_lemmas(batteries=["entropy"])


def test_source_bound_equality_at_zero_xi(eos):
    # xi = 0 collapses both sides of the source inequality to exact zeros
    from cdgmhd import physics

    rng = np.random.default_rng(5)
    U = sample_admissible(rng, 50, eos)
    v_aux = rng.uniform(-3, 3, size=(50, 3))
    B_aux = rng.uniform(-3, 3, size=(50, 3))
    xi = np.zeros(50)
    S = physics.godunov_powell_source(U)
    n_star = np.empty((50, 8))
    n_star[:, physics.RHO] = 0.5 * np.sum(v_aux * v_aux, axis=-1)
    n_star[:, physics.MX:physics.MZ + 1] = -v_aux
    n_star[:, physics.BX:physics.BZ + 1] = -B_aux
    n_star[:, physics.EN] = 1.0
    lhs = -xi * np.sum(S * n_star, axis=-1)
    rhs = xi * np.sum(v_aux * B_aux, axis=-1) - np.abs(xi) / np.sqrt(
        U[:, physics.RHO]
    ) * physics.linear_form(U, v_aux, B_aux)
    assert np.all(lhs == 0.0)
    assert np.all(rhs == 0.0)
    assert np.all(lhs >= rhs)


# ----------------------------------------------------- breakdown family


def test_family_validation():
    CounterexampleFamily(1e-4)
    with pytest.raises(ValueError, match="pressure"):
        CounterexampleFamily(0.0)
    with pytest.raises(ValueError, match="pressure"):
        CounterexampleFamily(0.7)  # beyond 1/gamma
    with pytest.raises(ValueError, match="epsilon"):
        CounterexampleFamily(1e-4, epsilon=1.0)
    with pytest.raises(ValueError, match="epsilon"):
        CounterexampleFamily(1e-4, epsilon=0.6, cfl_number=4.0)
    with pytest.raises(ValueError, match="theta"):
        CounterexampleFamily(1e-4, theta=1.5)
    with pytest.raises(ValueError, match="cfl_number"):
        CounterexampleFamily(1e-4, cfl_number=-1.0)


def test_family_states_admissible_across_range():
    for p in (1e-8, 1e-4, 0.5):
        for e in (0.01, 0.5, 0.99):
            fam = CounterexampleFamily(p, epsilon=e)
            assert admissible(np.stack(fam.states())).all()


def test_energy_limit_hand_values():
    # worked by hand from the closed form
    fam = CounterexampleFamily(1e-5, epsilon=0.5, cfl_number=8.0, theta=1.0)
    assert fam.energy_limit() == pytest.approx(-0.7890625, rel=1e-14)
    fam2 = CounterexampleFamily(1e-5, epsilon=0.3, cfl_number=4.0, theta=0.7)
    assert fam2.energy_limit() == pytest.approx(-0.12323653125, rel=1e-12)


def test_energy_limit_matches_vanishing_pressure_update():
    fam = CounterexampleFamily(1e-13, epsilon=0.5)
    e = internal_energy_density(fam.updated_center())
    assert e == pytest.approx(fam.energy_limit(), abs=1e-10)
    fam2 = CounterexampleFamily(1e-13, epsilon=0.3, cfl_number=4.0, theta=0.7)
    e2 = internal_energy_density(fam2.updated_center())
    assert e2 == pytest.approx(fam2.energy_limit(), abs=1e-10)


def test_breakdown_report_at_reference_parameters():
    fam = CounterexampleFamily(1e-5, epsilon=0.5, gamma=5.0 / 3.0, cfl_number=8.0)
    report = run_counterexample(fam, dx=0.1)
    assert report.inputs_admissible
    assert report.speeds_bounded
    assert report.data_speeds[0] <= report.chosen_speeds[0]
    assert report.data_speeds[1] <= report.chosen_speeds[1]
    assert report.step_relation_residual < 1e-12
    assert not report.update_admissible
    assert report.update_internal_energy < 0.0
    # the numerically assembled update equals the closed form
    assert report.closed_form_gap < 1e-12
    # the overlap divergence both detectors see is epsilon / dx
    assert report.div_center == pytest.approx(report.div_expected, rel=1e-12)
    assert report.tilde_div_center == pytest.approx(report.div_expected, rel=1e-12)
    assert report.limit_energy == pytest.approx(-0.7890625, rel=1e-14)
    # pressure sweep decreases toward the limit and ends negative
    es = report.sweep_energies
    assert all(b < a for a, b in zip(es, es[1:]))
    assert es[-1] < 0.0
    assert es[-1] == pytest.approx(report.limit_energy, abs=1e-4)
    # the source-carrying variant survives the same data
    assert report.df_update_admissible
    assert report.df_min_density > 0.0
    assert report.df_min_pressure > 0.0
    assert report.breakdown_demonstrated
    doc = json.loads(report.to_json())
    assert doc["breakdown_demonstrated"] is True


def test_breakdown_absent_at_large_pressure():
    fam = CounterexampleFamily(0.59, epsilon=0.5)
    report = run_counterexample(fam, dx=0.1)
    assert report.update_admissible
    assert not report.breakdown_demonstrated


def test_run_counterexample_options():
    fam = CounterexampleFamily(1e-4)
    with pytest.raises(ValueError, match="cells"):
        run_counterexample(fam, cells=5)
    report = run_counterexample(fam, theta=0.5, cells=8)
    assert report.theta == 0.5
    assert not report.update_admissible
