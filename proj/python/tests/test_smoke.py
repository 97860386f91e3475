import os
import pathlib

import numpy as np
import pytest

import homctl

DATA = pathlib.Path(os.environ.get("HOMCTL_DATA", pathlib.Path(__file__).resolve().parents[2] / "data"))


def test_reference_controller_verifies():
    report = homctl.verify(homctl.oscillator_reference_controller(), homctl.harmonic_oscillator())
    assert report.passed
    margin = report.checks["x_positive_definite"][0]
    assert margin == pytest.approx((6.5 - np.sqrt(36.25)) / 2, rel=1e-12)
    assert "all checks passed" in str(report)


def test_synthesis_matches_hand_tuned_gains():
    c = homctl.synthesize(homctl.harmonic_oscillator(), T=1.0)
    np.testing.assert_allclose(c.K0, [[1.0, 0.0]], atol=1e-12)
    np.testing.assert_allclose(c.Gd, np.diag([2.0, 1.0]), atol=1e-12)
    back = homctl.Controller.from_json(c.to_json())
    np.testing.assert_array_equal(back.K, c.K)


def test_uncontrollable_plant_raises():
    plant = homctl.Plant(np.eye(2), np.zeros((2, 1)))
    assert not plant.is_controllable()
    with pytest.raises(homctl.HomctlError, match="infeasible"):
        homctl.synthesize(plant)


def test_nominal_settling_and_zero_state():
    c = homctl.oscillator_reference_controller()
    plant = homctl.harmonic_oscillator()
    for a in (0.2, 0.7, 1e5):
        tr = homctl.simulate(homctl.Scenario(plant, c, np.array([a, 0.0])))
        assert 0.98 <= tr["settling_time"] <= 1.02
        assert tr["x"].shape == (len(tr["t"]), 2)
        assert tr["y"] is None
    tr = homctl.simulate(homctl.Scenario(plant, c, np.zeros(2)))
    assert not tr["x"].any() and not tr["u"].any()


def test_delay_and_dense_modes():
    c = homctl.oscillator_reference_controller()
    tr = homctl.simulate(homctl.Scenario(homctl.harmonic_oscillator(0.5), c, np.array([0.2, 0.0]), t_end=3.0))
    assert 1.48 <= tr["settling_time"] <= 1.52
    np.testing.assert_allclose(tr["x"][50:], tr["y"][:-50], atol=1e-8)
    dense = homctl.simulate_dense(homctl.Scenario(homctl.harmonic_oscillator(), c, np.array([0.7, 0.0])))
    assert np.max(np.abs(dense["s"] - (1.0 - dense["t"]))) <= 1e-3


def test_control_and_bound():
    c = homctl.oscillator_reference_controller()
    u = homctl.control(c, np.array([0.2, 0.0]), np.array([0.2, 0.0]), kind="prescribed_time")
    assert u[0] == pytest.approx(-0.9, rel=1e-12)
    assert homctl.disturbance_bound(c, 1.0, 2.0) == pytest.approx((9 - np.sqrt(33)) / 12, rel=1e-12)
    x = np.array([0.3, -0.1])
    on_sphere = x / np.sqrt(x @ c.P @ x)
    assert homctl.hom_norm(c.Gd, c.P, on_sphere) == pytest.approx(1.0, rel=1e-12)
    d = np.diag([np.exp(2 * 0.4), np.exp(0.4)])
    assert homctl.hom_norm(c.Gd, c.P, d @ x) == pytest.approx(np.exp(0.4) * homctl.hom_norm(c.Gd, c.P, x), rel=1e-9)
    with pytest.raises(homctl.HomctlError, match="config"):
        homctl.control(c, np.zeros(2), np.zeros(2), kind="bang_bang")


def test_noise_is_seeded():
    c = homctl.oscillator_reference_controller()
    plant = homctl.harmonic_oscillator()
    runs = [homctl.simulate(homctl.Scenario(plant, c, np.array([0.2, 0.0]), t_end=3.0, noise=0.01, seed=s))
            for s in (5, 5, 6)]
    np.testing.assert_array_equal(runs[0]["x"], runs[1]["x"])
    assert not np.array_equal(runs[0]["x"], runs[2]["x"])
    assert runs[0]["settling_time"] is None


def test_scenario_file_and_suite(tmp_path):
    sc = homctl.load_scenario(DATA / "scenarios" / "fig7.ini")
    assert sc.plant.delay == 0.5 and sc.kind == "prescribed_time_robust"
    assert 1.48 <= homctl.simulate(sc)["settling_time"] <= 1.52
    rows = homctl.run_suite("paper", tmp_path, workers=2)
    assert [r["scenario"] for r in rows] == [f"fig{i}" for i in range(1, 9)]
    assert all(r["passed"] for r in rows)
    assert (tmp_path / "report.json").exists()
