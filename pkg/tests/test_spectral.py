import numpy as np
import pytest

from cauchylab.spectral import (assemble_family, chebyshev, clenshaw_curtis, perturb_resonance, pole_rank,
                                potential_bump, quadratic_eigs, resonance_scan, spectral_tail_mass,
                                zero_mode_structure)


@pytest.fixture(scope="module")
def fam(st):
    return assemble_family(st, 0, "exterior", 64)


def test_chebyshev_differentiates_polynomials():
    r, D = chebyshev(16, 1.0, 3.0)
    assert np.all(np.diff(r) > 0)
    assert np.allclose(D @ r**5, 5 * r**4, rtol=1e-10)


def test_clenshaw_curtis():
    for N in (10, 11):
        r, _ = chebyshev(N, 0.0, 2.0)
        assert abs(clenshaw_curtis(N, 0.0, 2.0) @ r**4 - 32 / 5) < 1e-12


def test_tail_mass():
    r, _ = chebyshev(40)
    assert spectral_tail_mass(np.exp(r)) < 1e-20
    assert spectral_tail_mass((-1.0) ** np.arange(41)) > 0.9


def test_zero_mode_is_constant(fam):
    rd, info = zero_mode_structure(fam)
    assert abs(rd.sigma) < 1e-8
    assert info["constancy"] < 1e-8
    assert abs(info["certificate"]) > 1e-6
    assert pole_rank(fam, 0.0, 0.05) == 1


def test_time_functions_give_same_spectrum(st):
    # conjugate families: every mode that is converged in N agrees across the two
    # time functions to within its own discretization change
    checked = 0
    for ell in (0, 1):
        w64 = quadratic_eigs(assemble_family(st, ell, "exterior", 64))[0]
        w128 = quadratic_eigs(assemble_family(st, ell, "exterior", 128))[0]
        w0 = quadratic_eigs(assemble_family(st, ell, "exterior", 128, time_function="t0"))[0]
        for s in w128[(np.abs(w128.real) < 1) & (w128.imag > -0.2)]:
            change = np.min(np.abs(w64 - s))
            if change < 1e-2:
                assert np.min(np.abs(w0 - s)) <= max(change, 1e-10)
                checked += 1
    assert checked >= 3


def test_resonances_damped_and_converged(st, fam):
    gam = 0.5 * min(st.kappas)
    sc = resonance_scan(fam, gamma=gam)
    sc2 = resonance_scan(assemble_family(st, 0, "exterior", 96), gamma=gam)
    assert sc.clipped
    w = np.array([x.sigma for x in sc.resonances])
    assert np.all(w[np.abs(w) > 1e-6].imag < 0)
    w2 = np.array([x.sigma for x in sc2.resonances])
    assert max(np.min(np.abs(w2 - s)) for s in w) < 1e-6


def test_perturbation_slope(st):
    fam = assemble_family(st, 0, "artificial", 48)
    R = potential_bump(fam.r, st.ext.rQm, st.ext.rQp)
    pr = perturb_resonance(fam, 0.0, R, [1e-3 * np.exp(1j * np.pi / 4)])
    assert pr.relative_gap < 1e-3
    assert abs(pr.sigma[-1].imag) > 1e-8
    assert not pr.collision


def test_quadratic_eigs_satisfy_pencil(fam):
    w, V = quadratic_eigs(fam)
    k = np.argmin(np.abs(w - (0.1 - 0.05j)))
    assert np.linalg.norm(fam(w[k]) @ V[:, k]) < 1e-6 * np.linalg.norm(fam(w[k]))


def test_bad_arguments(st, fam):
    with pytest.raises(ValueError):
        assemble_family(st, -1)
    with pytest.raises(ValueError):
        assemble_family(st, 0, band="interior")
    with pytest.raises(ValueError):
        resonance_scan(fam, (1, -1, 0, 1))
    with pytest.raises(ValueError):
        resonance_scan(fam, gamma=0.01, rectangle=(-1, 1, -0.5, -0.2))
    with pytest.raises(ValueError):
        pole_rank(fam, 0.0, 0.05, nodes=8)
    with pytest.raises(ValueError):
        chebyshev(1)
