import math

import numpy as np
import pytest

import fonbw

IDENTIFIED = {
    "poly": [0.1811, -1.4037e-4, -7.7154e-8],
    "k_h": -3.2719e4,
    "rho": 6.4808e-7,
    "sigma": 1.3039e5,
    "n": 2.0006,
    "lambda1": 0.9557,
    "lambda2": 0.6220,
}
DEMO_CBW = {"alpha": 0.1, "k": 1.0, "D": 1.0, "A": 0.7, "beta": 0.6, "gamma": 0.5, "n": 1.0}


def test_version():
    assert fonbw.__version__ == "0.1.0"


def test_signals_are_numpy_views():
    u = fonbw.gen_sine_offset(5.0, 2.0, 1.0, 1e-3)
    assert len(u) == 1001
    assert isinstance(u.values, np.ndarray)
    assert u.values[0] == 0.0
    assert u.values.max() == pytest.approx(10.0)
    assert u.times[-1] == pytest.approx(1.0)
    assert u[500] == u.values[500]
    with pytest.raises(fonbw.InvalidArgument):
        fonbw.gen_sine_offset(-1.0, 1.0, 1.0)


def test_gl_weights_and_half_derivative():
    w = fonbw.gl_weights(0.5, 3)
    np.testing.assert_allclose(w, [1.0, -0.5, -0.125, -0.0625])
    t = fonbw.TimeSeries(0.0, 1e-3, list(np.arange(1001) * 1e-3))
    d = fonbw.gl_derivative(t, 0.5)
    exact = 1.0 / math.gamma(1.5)
    assert abs(d[1000] - exact) / exact < 0.01


def test_simulate_and_metrics():
    u = fonbw.gen_sine_offset(60.0, 1.0, 2.0, 1e-3)
    H = fonbw.simulate("fonbw", IDENTIFIED, u)
    assert len(H) == len(u)
    assert np.all(np.isfinite(H.values))
    m = fonbw.loop_metrics(u, H)
    assert set(m) >= {"area", "max_width", "center_offset"}
    assert abs(m["area"]) > 0.0


def test_normalization_matches_classical():
    u = fonbw.gen_sweep(2.0, 1e-3)
    nbw = fonbw.normalize_cbw(DEMO_CBW)
    a = fonbw.simulate("cbw", DEMO_CBW, u).values
    b = fonbw.simulate("nbw", nbw, u).values
    assert np.max(np.abs(a - b)) <= 1e-8 * np.ptp(a)
    scaled = fonbw.scale_cbw(DEMO_CBW, 2.0)
    assert scaled["D"] == 2.0


def test_identify_is_deterministic():
    u = fonbw.gen_sine_offset(5.0, 1.0, 2.0, 1e-3)
    truth = fonbw.normalize_cbw(DEMO_CBW)
    H = fonbw.simulate("nbw", truth, u)
    names = fonbw.theta_names("nbw")
    bounds = [sorted((0.5 * truth[k], 2.0 * truth[k])) for k in names]
    bounds[names.index("n")][0] = 1.0
    r1 = fonbw.identify("nbw", u, H, bounds, population_size=12, max_generations=5, seed=7)
    r2 = fonbw.identify("nbw", u, H, bounds, population_size=12, max_generations=5, seed=7, threads=2)
    assert r1 == r2
    assert r1["evaluations"] == 12 * 6
    assert r1["best_objective"] <= r1["objective_trace"][0]


def test_cascade_tracks_reference():
    plant = dict(IDENTIFIED, lambda2=0.8)
    H_d = fonbw.gen_sine_offset(5.0, 5.0, 0.4, 2e-4)
    r = fonbw.evaluate_cascade("fonbw", plant, "fonbw", plant, H_d)
    assert r["rms_tracking_error"] <= 0.01 * 10.0
    u = fonbw.compensate("fonbw", plant, H_d)
    np.testing.assert_array_equal(u.values, r["u_cmd"].values)


def test_errors_map_to_python_exceptions():
    u = fonbw.gen_sweep(1.0, 1e-3)
    with pytest.raises(fonbw.ConfigError):
        fonbw.simulate("fonbw", {"poly": [1.0]}, u)
    with pytest.raises(ValueError):
        fonbw.simulate("fonbw", dict(IDENTIFIED, lambda2=1.5), u)
    with pytest.raises(fonbw.DivergenceError):
        fonbw.evaluate_cascade("fonbw", IDENTIFIED, "fonbw", IDENTIFIED, fonbw.gen_sine_offset(5.0, 5.0, 1.0, 2e-4))
