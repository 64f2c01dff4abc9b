import numpy as np
import pytest
from scipy import integrate

from cauchylab.logsobolev import (EmbeddingDivergence, HorizonSampler, NormSpec, check_interpolation_inequalities,
                                  embedding_constant, japanese, log_sobolev_norm, taper, time_weight,
                                  windowed_l2, x_tilde)


def _direct_constant(eps):
    # I = int_R <xi>^{-1} <log<xi>>^{-1-2eps} dxi, C = (I / 2pi)^{1/2}; independent of the sinh substitution
    f = lambda x: 1 / (japanese(x) * japanese(np.log(japanese(x))) ** (1 + 2 * eps))
    parts = [integrate.quad(f, a, b, limit=500, epsrel=1e-11)[0] for a, b in ((0, 1), (1, 1e3), (1e3, 1e8))]
    # xi = e^z: xi/<xi> = (1 + e^{-2z})^{-1/2}, log<xi> = z + log1p(e^{-2z})/2
    g = lambda z: (1 + np.exp(-2 * z)) ** -0.5 * japanese(z + 0.5 * np.log1p(np.exp(-2 * z))) ** (-1 - 2 * eps)
    tail = integrate.quad(g, np.log(1e8), np.inf, limit=500, epsrel=1e-11)[0]
    return np.sqrt(2 * (sum(parts) + tail) / (2 * np.pi))


@pytest.mark.parametrize("eps", [0.25, 0.5, 1.0])
def test_embedding_constant_oracle(eps):
    assert abs(embedding_constant(eps) / _direct_constant(eps) - 1) < 1e-7


def test_embedding_diverges_at_zero():
    with pytest.raises(EmbeddingDivergence):
        embedding_constant(0.0)
    # grows without bound as eps -> 0
    assert embedding_constant(0.05) > embedding_constant(0.2) > embedding_constant(1.0)


def test_embedding_bounds_sup():
    rng = np.random.default_rng(3)
    r = np.linspace(-1, 1, 4096)
    eps = 0.25
    C = embedding_constant(eps)
    spec = NormSpec(0.5, 0.5 + eps)
    for _ in range(10):
        c = rng.normal(size=(3, 3))
        u = sum(a * np.exp(-((r - b * 0.3) / (0.05 + abs(w) * 0.1)) ** 2) for a, b, w in c)
        assert np.max(np.abs(taper(r) * u)) <= C * log_sobolev_norm(r, u, spec)


def test_parseval_l2():
    r = np.linspace(0, 1, 1024)
    u = np.sin(7 * r) + r**2
    assert abs(log_sobolev_norm(r, u, NormSpec()) - windowed_l2(r, u, (0, 1))) < 1e-12


def test_monotone_in_regularity():
    r = np.linspace(0, 1, 1024)
    u = np.abs(r - 0.5) ** 0.7
    vals = [log_sobolev_norm(r, u, NormSpec(s, l)) for s, l in ((0, 0), (0.5, 0), (0.5, 1), (1, 0))]
    assert np.all(np.diff(vals) > 0)


def test_monotone_in_weight():
    # smaller space (larger r) gives a larger norm once t_* > 0
    r = np.linspace(0, 1, 256)
    u = np.cos(3 * r)
    v = [log_sobolev_norm(r, u, NormSpec(0.5, 0, rw), t_star=2.0) for rw in (-1, 0, 0.5, 1)]
    assert np.all(np.diff(v) > 0)
    assert np.allclose(time_weight(2.0, 1.0, 0.0), np.exp(2.0))


def test_x_tilde_and_taper():
    x = np.array([0.0, 0.1, 0.25, 0.5, 3.0])
    assert np.allclose(x_tilde(x), [0, 0.1, 0.25, 0.5, 0.5])
    xx = np.linspace(0.2, 0.55, 1001)
    assert np.all(np.diff(x_tilde(xx)) >= 0)
    assert np.allclose(taper([0.0, 0.5, 1.0]), [1, 1, 0])


def test_norm_errors():
    r = np.linspace(0, 1, 100)
    with pytest.raises(ValueError):
        log_sobolev_norm(r, r, NormSpec(window=(0.5, 2.0)))
    with pytest.raises(ValueError):
        log_sobolev_norm(r, r, NormSpec(window=(0.0, 0.1)))
    with pytest.raises(ValueError):
        log_sobolev_norm(r, r, NormSpec(r=1.0))
    with pytest.raises(ValueError):
        NormSpec(window=(1.0, 0.0))
    with pytest.raises(ValueError):
        HorizonSampler(n=10).fit(None)


@pytest.mark.parametrize("ell, v, w", [(1.0, 1.0, 1.0), (2.0, 0.5, 2.0), (0.5, 2.0, 0.5)])
def test_interpolation_lemma(ell, v, w):
    g = np.geomspace(np.log(2), 1e6, 150)
    rep = check_interpolation_inequalities(ell, v, w, g, g)
    assert rep.ok
    # alpha = 0: the sup of (x/(v x + w r))^l is approached as r/x -> 0
    assert rep.empirical[0.0] <= v ** (-ell) * (1 + 1e-12)


def test_interpolation_bad_args():
    g = np.geomspace(1, 10, 5)
    with pytest.raises(ValueError):
        check_interpolation_inequalities(-1.0, 1, 1, g, g)
    with pytest.raises(ValueError):
        check_interpolation_inequalities(1.0, 1, 1, g * 0.1, g)
