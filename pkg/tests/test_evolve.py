import numpy as np
import pytest

from cauchylab.evolve import (DecayFitter, ExteriorEvolver, InitialData, ModeSpec, d1, evolve, fd_weights,
                              fit_decay, lift_linfty_bound, local_power_index, rn_tortoise,
                              rn_tortoise_inverse)


def test_fd_weights_known_stencils():
    x = np.arange(-2.0, 3.0)
    assert np.allclose(fd_weights(0.0, x, 1), np.array([1, -8, 0, 8, -1]) / 12)
    assert np.allclose(fd_weights(0.0, x, 2), np.array([-1, 16, -30, 16, -1]) / 12)


def test_d1_fourth_order():
    errs = []
    for n in (101, 201):
        x = np.linspace(0, 2 * np.pi, n)
        errs.append(np.max(np.abs(d1(np.sin(x), x[1] - x[0]) - np.cos(x))))
    assert 3.5 < np.log2(errs[0] / errs[1]) < 5.5


def test_tortoise_roundtrip():
    r = np.array([0.41, 0.8, 1.2, 1.59])
    x = rn_tortoise(r, 0.4, 1.6)
    assert np.allclose(rn_tortoise_inverse(x, 0.4, 1.6), r, rtol=1e-12)
    # dx/dr = 1/mu with mu = (r - r1)(r - r2)/r^2
    h = 1e-6
    mu = (r - 0.4) * (r - 1.6) / r**2
    dx = (rn_tortoise(r + h, 0.4, 1.6) - rn_tortoise(r - h, 0.4, 1.6)) / (2 * h)
    assert np.allclose(dx, 1 / mu, rtol=1e-6)


def test_fit_pure_power_law():
    t = np.linspace(50, 400, 800)
    assert abs(fit_decay(t, 2.5 * t**-3.0, (100, 300)).exponent - 3.0) < 1e-6


def test_fit_log_periodic():
    t = np.linspace(50, 3000, 6000)
    u = t**-2.0 * (1 + 0.3 * np.sin(5 * np.log(t)))
    assert abs(fit_decay(t, u, (100, 3000)).exponent - 2.0) < 0.05


def test_fit_oscillating_ringdown_then_tail():
    t = np.linspace(1, 400, 4000)
    u = np.exp(-0.1 * t) * np.cos(0.5 * t) + 1e-2 * t**-3.0
    assert abs(fit_decay(t, u, (150, 400)).exponent - 3.0) < 0.1


def test_estimator_api():
    t = np.linspace(10, 100, 200)
    est = DecayFitter(window=(10, 100)).fit(t, t**-4.0)
    assert abs(est.exponent_ - 4.0) < 1e-8
    assert est.score(t, t**-4.0) > 1 - 1e-10
    assert np.allclose(est.predict(t), t**-4.0, rtol=1e-6)
    assert est.get_params()["window"] == (10, 100)
    with pytest.raises(ValueError):
        DecayFitter(window=(0, 10)).fit(t, t**-4.0)


def test_local_power_index():
    t = np.geomspace(1, 100, 200)
    assert np.allclose(local_power_index(t, t**-3.0), 3.0)


def test_lift_oracle():
    # v = 1/t on [1, T]: bound(t) = 1/T + t^{-1/2} (1/t - 1/T)^{1/2}
    t = np.linspace(1.0, 200.0, 20001)
    b = lift_linfty_bound(t, 1 / t, -1 / t**2, fit_window=(10, 50))
    exact = 1 / t[-1] + np.sqrt((1 / t - 1 / t[-1]) / t)
    # trapezoid error is O(dt^2 max|g''|) ~ 1e-5 relative at t = 1
    assert np.allclose(b.bound, exact, rtol=3e-5, atol=1e-12)
    assert np.all(b.bound >= 1 / t - 1e-12)
    assert abs(b.exponent - fit_decay(t, exact, (10, 50)).exponent) < 1e-3


def test_evolution_is_linear(st):
    d1_ = InitialData.default(st)
    d2_ = InitialData.default(st, amplitude=2.0 - 1.0j)
    a = evolve(st, d1_, 3.0, n=241, probes=(3.0,))
    b = evolve(st, d2_, 3.0, n=241, probes=(3.0,))
    assert np.allclose(b.probes[3.0], (2.0 - 1.0j) * a.probes[3.0], rtol=1e-10, atol=1e-14)


def test_evolution_is_deterministic(st):
    a = evolve(st, InitialData.default(st), 2.0, n=241, probes=(3.0,))
    b = evolve(st, InitialData.default(st), 2.0, n=241, probes=(3.0,))
    assert np.array_equal(a.probes[3.0], b.probes[3.0])


@pytest.mark.parametrize("kw", [dict(n=50), dict(cfl=1.5), dict(cfl=0.0), dict(ko=-1.0)])
def test_bad_solver_params(st, kw):
    with pytest.raises(ValueError):
        ExteriorEvolver(st, **kw)


def test_bad_data_and_mode():
    with pytest.raises(ValueError):
        InitialData(center=3.0, width=0.0)
    with pytest.raises(ValueError):
        InitialData(center=3.0, kind="outgoing")
    with pytest.raises(ValueError):
        ModeSpec(-1)
