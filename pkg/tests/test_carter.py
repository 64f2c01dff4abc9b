import numpy as np
import pytest
import sympy as sp

from cauchylab.carter import (PH, TH, CarterError, CarterOperator, KerrChart, TestFunction, apply_box,
                              apply_box_fd, apply_carter, apply_carter_fd, commutator_residual,
                              mode_regularity_witness, random_test_function, sample_points)

PT = np.array([[0.3, 1.1, 0.9, 0.4], [-1.0, 3.0, 2.0, 5.0]])


def _cos2(ell, m):
    # <cos^2 theta> in the normalized Y_lm
    return (2 * ell * ell + 2 * ell - 1 - 2 * m * m) / ((2 * ell - 1) * (2 * ell + 3))


def test_laplacian_eigenfunctions():
    op = CarterOperator(1.0, 0.0)
    assert np.allclose(apply_carter(op, TestFunction([(1, 0, 0, 1, 0, 0)]), PT), 2 * np.cos(PT[:, 2]))
    f = TestFunction([(1, 0, 0, 0, 2, 2)])  # sin^2 e^{2 i phi}, l = 2
    assert np.allclose(apply_carter(op, f, PT), 6 * f(*PT.T))
    assert np.allclose(apply_carter(op, TestFunction([(1, 0, 0, 0, 0, 0)]), PT), 0)


def test_box_annihilates_constants_and_matches_fd():
    ch = KerrChart(1.0, 0.1)
    assert np.allclose(apply_box(ch, TestFunction([(2.0, 0, 0, 0, 0, 0)]), PT), 0)
    f = random_test_function(7)
    ex = apply_box(ch, f, PT)
    fd = np.array([apply_box_fd(ch, f, p) for p in PT])
    assert np.allclose(fd, ex, rtol=1e-7)
    op = CarterOperator(1.0, 0.1)
    fd = np.array([apply_carter_fd(op, f, p) for p in PT])
    assert np.allclose(fd, apply_carter(op, f, PT), rtol=1e-7)


def test_carter_commutes_with_box():
    rep = commutator_residual(1.0, 0.1, seeds=range(4), n_points=20, fd_check=1)
    assert rep.max_residual < 1e-10
    assert rep.fd_max_disagreement < 1e-6
    assert rep.points == 80


@pytest.mark.parametrize("other", ["dt", "dphi"])
def test_killing_fields_commute(other):
    assert commutator_residual(1.0, 0.2, seeds=range(3), n_points=10, fd_check=0, other=other).max_residual < 1e-12


def test_laplacian_commutes_only_without_rotation():
    kw = dict(seeds=range(3), n_points=10, fd_check=0, other="laplacian")
    assert commutator_residual(1.0, 0.0, **kw).max_residual < 1e-10
    assert commutator_residual(1.0, 0.1, **kw).max_residual > 1e-4


def test_radial_derivative_does_not_commute():
    ch = KerrChart(1.0, 0.1)
    f = random_test_function(1).expr
    R = sp.Symbol("r", real=True)
    a = sp.lambdify(sp.symbols("t r theta phi", real=True), ch.box(sp.diff(f, R)) - sp.diff(ch.box(f), R))
    assert np.max(np.abs(a(*PT.T))) > 1e-3


def test_chart_regular_across_horizons():
    ch = KerrChart(1.0, 0.3)
    r1, r2 = ch.radii
    assert np.isclose(r1 * r2, 0.09) and np.isclose(r1 + r2, 2.0)
    for r in (r1, r2, 0.5 * (r1 + r2)):
        for i in range(4):
            for j in range(4):
                assert np.isfinite(ch.coefficient(i, j, r, 1.0))


def test_point_guards():
    ch = KerrChart(1.0, 0.1)
    f = random_test_function(0)
    with pytest.raises(CarterError):
        apply_carter(CarterOperator(), f, [[0, 2.0, 1e-5, 0]])
    with pytest.raises(CarterError):
        apply_box(ch, f, [[0, ch.radii[1] + 1e-5, 1.0, 0]])
    P = sample_points(ch, 30, 0)
    assert np.all(np.sin(P[:, 2]) > 1e-2)
    with pytest.raises(ValueError):
        TestFunction([(1, -1, 0, 0, 0, 0)])
    with pytest.raises(ValueError):
        random_test_function(0).derivative((2, 2, 1, 0))
    with pytest.raises(ValueError):
        commutator_residual(other="dr")


def test_seeded_witnesses_are_reproducible():
    assert random_test_function(5).expr == random_test_function(5).expr
    assert random_test_function(5).expr != random_test_function(6).expr


def test_witness_at_zero_rotation():
    for m in (0, 1, 2):
        w = mode_regularity_witness(1.0, 0.0, m, ell_max=12)
        assert w.real
        assert np.allclose(w.eigenvalues, [l * (l + 1) for l in range(abs(m), 13)], atol=1e-8)


@pytest.mark.parametrize("m", [0, 1, -1, 2])
def test_witness_first_order_in_rotation(m):
    a, sigma = 0.1, 1.0
    w = mode_regularity_witness(1.0, a, m, sigma=sigma, ell_max=6)
    ells = np.arange(abs(m), 7)
    first = ells * (ells + 1) + 2 * a * m * sigma + (a * sigma) ** 2 * (1 - np.array([_cos2(l, m) for l in ells]))
    # second-order remainder is O(a^4 sigma^4)
    assert np.allclose(w.eigenvalues, first, atol=1e-5)


def test_witness_weyl_law():
    w = mode_regularity_witness(1.0, 0.1, 0, ell_max=20, N=120)
    for lam, n in w.weyl_counts.items():
        # m = 0 eigenvalues ~ l(l+1): count ~ sqrt(lam)
        assert abs(n - np.sqrt(lam)) <= 1.5


def test_witness_bad_args():
    with pytest.raises(ValueError):
        mode_regularity_witness(1.0, 0.5)
    with pytest.raises(ValueError):
        mode_regularity_witness(1.0, 0.1, m=5, ell_max=3)
    with pytest.raises(ValueError):
        mode_regularity_witness(1.0, 0.1, cosmological_constant=0.1)
    with pytest.raises(ValueError):
        CarterOperator(mass=-1.0)
