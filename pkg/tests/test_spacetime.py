import numpy as np
import pytest

from cauchylab.spacetime import (BlackHoleParams, ExtensionParams, Spacetime, eval_dmu, eval_mu,
                                 find_horizons, smoothstep)


def _poly_roots(M, Q, lam):
    # r^2 mu = -lam/3 r^4 + r^2 - 2 M r + Q^2
    z = np.roots([-lam / 3, 0.0, 1.0, -2 * M, Q * Q])
    return np.sort(z[(np.abs(z.imag) < 1e-12) & (z.real > 0)].real)


def test_vacuum_rn_closed_form():
    hs = find_horizons(BlackHoleParams(1.0, 0.8, cosmological_constant=0.0))
    assert np.allclose(hs.radii, (0.4, 1.6), atol=1e-12)
    assert abs(hs.kappas[0] - 3.75) < 1e-10
    assert abs(hs.kappas[1] - 0.234375) < 1e-10


@pytest.mark.parametrize("q, lam", [(0.8, 0.02), (0.5, 0.02), (0.8, 0.001)])
def test_rnds_roots_against_polynomial(q, lam):
    p = BlackHoleParams(1.0, q, cosmological_constant=lam)
    ref = _poly_roots(1.0, q, lam)
    hs = find_horizons(p)
    assert np.allclose(hs.radii, ref, rtol=1e-10)
    k = np.abs(eval_dmu(p, np.array(ref))) / 2
    assert np.allclose(hs.kappas, k, rtol=1e-8)


def test_extended_structure(st):
    r = np.array(st.radii)
    assert len(r) == 4 and np.all(np.diff(r) > 0)
    assert np.allclose(st.metric.mu(r), 0.0, atol=1e-12)
    assert tuple(st.horizons.signs) == (-1, 1, -1, 1)
    # glued metric equals the Lam = 0 function near the black hole
    assert np.allclose(r[1:3], (0.4, 1.6), atol=1e-10)
    assert abs(r[3] - _poly_roots(1.0, 0.8, 0.02)[-1]) < 1e-8
    assert np.allclose(st.kappas, np.abs(st.metric.dmu(r)) / 2, rtol=1e-8)


def test_time_function_regular_and_causal(st):
    e = st.ext
    rr = np.linspace(e.r0 - 0.9 * e.delta, st.radii[3] + 0.5, 3001)
    assert np.all(np.isfinite(st.maps.h(rr)))
    assert np.allclose(st.maps.det2(rr), -1.0, atol=1e-9)
    assert st.maps.check_causal()


def test_tau_is_exp_minus_tstar(st):
    assert np.allclose(st.maps.tau([0.0, 1.0, 5.0]), np.exp(-np.array([0.0, 1.0, 5.0])))


def test_smoothstep_endpoints():
    x = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    assert np.allclose(smoothstep(x), [0, 0, 0.5, 1, 1])


@pytest.mark.parametrize("kw", [dict(charge=1.2), dict(mass=-1.0), dict(cosmological_constant=-0.1),
                                dict(family="Schwarzschild"), dict(family="Kerr", angular_momentum=0.5)])
def test_bad_parameters(kw):
    with pytest.raises(ValueError):
        BlackHoleParams(**kw)


def test_bad_extension():
    p = BlackHoleParams()
    e = ExtensionParams.default(p)
    with pytest.raises(ValueError):
        Spacetime(p, ExtensionParams(e.r0, e.rQm, e.rQp, e.delta, rm=1.0))


def test_mu_needs_positive_radius():
    with pytest.raises(ValueError):
        eval_mu(BlackHoleParams(), np.array([-1.0]))
