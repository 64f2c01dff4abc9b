import numpy as np
import pytest

from cauchylab.bflow import (FlowState, flow_integrate, hamiltonian, null_state, radial_set_linearize,
                             rho_hat, threshold_regularity)
from cauchylab.spacetime import BlackHoleParams, Spacetime


@pytest.mark.parametrize("q", [0.8, 0.5])
def test_beta_tilde_times_kappa(q):
    st = Spacetime(BlackHoleParams(charge=q))
    for j in range(4):
        rep = radial_set_linearize(st, j, n_samples=10)
        assert abs(rep.beta_tilde * st.kappas[j] - 1) < 1e-7
        assert rep.beta0 > 0 and rep.beta_q > 0
        assert np.ptp(rep.beta_tilde_samples) < 1e-8
        assert abs(threshold_regularity(rep, 2.0) - (0.5 + 2 / st.kappas[j])) < 1e-6


def test_source_sink_pattern(st):
    got = [radial_set_linearize(st, j, n_samples=5).classification for j in range(4)]
    assert [g["boundary"] for g in got] == ["sink", "sink", "source", "source"]
    assert [g["transversal"] for g in got] == ["unstable", "unstable", "stable", "stable"]


def test_hamiltonian_homogeneous(st):
    r = np.linspace(0.3, 10.0, 50)
    z = np.array([0.7, -1.3, 0.4])
    for lam in (5.0, 40.0):
        assert np.allclose(hamiltonian(st, 0.1, r, *(lam * z)), lam**2 * hamiltonian(st, 0.1, r, *z), rtol=1e-12)


def test_hamiltonian_conserved_along_flow(st):
    s = null_state(st, 0.5, 3.0, 6.0, 2.0)
    drift = [np.max(np.abs(flow_integrate(st, s, 2.0, tol=tol, future=True).p)) for tol in (1e-10, 1e-12)]
    # p is conserved up to integrator error, which shrinks with the tolerance
    assert drift[0] < 1e-7 and drift[1] < 1e-9 and drift[1] < 0.1 * drift[0]
    assert flow_integrate(st, s, 2.0, future=True).states[-1, 0] >= 0


def test_rho_hat():
    q = np.array([0.25, 0.1, 0.01])
    assert np.allclose(rho_hat(q), q)
    assert rho_hat(np.array([0.0]))[0] == 0.0
    assert np.all(rho_hat(np.array([1.0, 2.0, 10.0])) < 0.5)


def test_bad_states(st):
    with pytest.raises(ValueError):
        FlowState(-0.1, 2.0, 0.1, [1, 0, 0])
    with pytest.raises(ValueError):
        hamiltonian(st, -1.0, 2.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        flow_integrate(st, FlowState.from_covector(0.5, 3.0, 1.0, 1.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        radial_set_linearize(st, 7)
