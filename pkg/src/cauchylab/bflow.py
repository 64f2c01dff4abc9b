"""Null-bicharacteristic flow on the compactified b-cotangent bundle (spherical reduction).

Base coordinates are tau = exp(-t_*) and r. A b-covector is
zeta = sigma_b dtau/tau + xi dr + eta (angular part, |eta| conserved), so
dt_* carries -sigma_b. The symbol is the dual metric with spacelike covectors
positive,

    p = mu xi^2 + 2 h sigma_b xi - gtt sigma_b^2 + eta^2 / r^2,

and the Hamilton field reads tau' = tau dp/dsigma_b, r' = dp/dxi,
xi' = -dp/dr, sigma_b' = eta' = 0 (stationarity, spherical symmetry).

States are stored as (tau, r, q, w) with q = 1/|zeta| and w = zeta/|zeta| on
the unit sphere, so fiber infinity q = 0 is part of the chart. The rescaled
field is rho_hat * H_p with rho_hat = 1/|zeta| for |zeta| >= 4 and a smooth
extension below keeping rho_hat < 1/2.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .logsobolev import _smooth_step_inf

__all__ = [
    "FlowError",
    "FlowState",
    "Trajectory",
    "RadialSetReport",
    "hamiltonian",
    "null_state",
    "rho_hat",
    "rescaled_field",
    "projective_field",
    "time_orientation",
    "flow_integrate",
    "radial_set_linearize",
    "threshold_regularity",
]


class FlowError(RuntimeError):
    pass


@dataclass
class FlowState:
    """Point of the compactified b-phase space.

    Args:
        tau: boundary defining function exp(-t_*), >= 0.
        r: radius.
        q: inverse fiber length 1/|zeta|; 0 at fiber infinity.
        w: unit fiber direction (sigma_b, xi, eta).
    """

    tau: float
    r: float
    q: float
    w: np.ndarray

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be non-negative")
        if self.q < 0:
            raise ValueError("q must be non-negative")
        w = np.asarray(self.w, dtype=float)
        n = np.linalg.norm(w)
        if w.shape != (3,) or n == 0:
            raise ValueError("w must be a nonzero 3-vector")
        self.w = w / n

    @classmethod
    def from_covector(cls, tau, r, sigma_b, xi, eta=0.0):
        z = np.array([sigma_b, xi, abs(eta)], dtype=float)
        n = np.linalg.norm(z)
        if n == 0:
            raise ValueError("zero covector")
        return cls(float(tau), float(r), 1.0 / n, z / n)

    @property
    def covector(self):
        """(sigma_b, xi, eta); infinite at fiber infinity."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.w / self.q if self.q > 0 else self.w * np.inf

    def as_array(self):
        return np.r_[self.tau, self.r, self.q, self.w]


def _symbol_parts(spacetime, r, w):
    """p(r; w) and its derivatives in (sigma_b, xi, r) for a fiber vector w."""
    maps, met = spacetime.maps, spacetime.metric
    r = np.atleast_1d(np.asarray(r, dtype=float))
    mu, dmu = met.mu(r), met.dmu(r)
    h, dh = maps.h(r), maps.dh(r)
    g, dg = maps.gtt(r), maps.dgtt(r)
    s, x, e = w
    p = mu * x * x + 2 * h * s * x - g * s * s + e * e / r**2
    ps = 2 * h * x - 2 * g * s
    px = 2 * mu * x + 2 * h * s
    pr = dmu * x * x + 2 * dh * s * x - dg * s * s - 2 * e * e / r**3
    return p, ps, px, pr


def hamiltonian(spacetime, tau, r, sigma_b, xi, eta=0.0):
    """Principal symbol p (homogeneous of degree 2, spacelike covectors positive).

    Args:
        spacetime: Spacetime bundle.
        tau: exp(-t_*); p does not depend on it, but it must be >= 0.
        r: radius.
        sigma_b, xi, eta: b-covector components.
    """
    if np.any(np.asarray(tau) < 0):
        raise ValueError("tau must be non-negative")
    p, _, _, _ = _symbol_parts(spacetime, r, (np.asarray(sigma_b, dtype=float),
                                              np.asarray(xi, dtype=float),
                                              np.asarray(eta, dtype=float)))
    return p if np.ndim(r) else float(p[0])


def null_state(spacetime, tau, r, xi, eta=0.0, branch=1):
    """FlowState with p = 0, solving for sigma_b given (xi, eta).

    Args:
        branch: +1 or -1 picks one of the two roots of the quadratic in sigma_b;
            when h xi != 0, +1 is the root that vanishes with mu xi^2 + eta^2/r^2.
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    rr = np.array([r], dtype=float)
    mu, h, g = spacetime.metric.mu(rr)[0], spacetime.maps.h(rr)[0], spacetime.maps.gtt(rr)[0]
    # -g s^2 + 2 b s + c0 = 0
    c0, b = mu * xi * xi + eta * eta / r**2, h * xi
    disc = b * b + g * c0
    if disc < 0:
        raise ValueError("no real null covector with these components")
    sb = np.sign(b) if b != 0 else 1.0
    big = b + sb * np.sqrt(disc)
    if branch == 1:
        s = -c0 / big if big != 0 else 0.0
    else:
        s = big / g
    return FlowState.from_covector(tau, r, s, xi, eta)


def rho_hat(q):
    """Fiber weight: q = 1/|zeta| when |zeta| >= 4, smooth and < 1/2 below."""
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore"):
        s = np.where(q > 0, 1.0 / np.where(q > 0, q, 1.0), np.inf)
    j2 = np.where(np.isfinite(s), s * s + 16.0 * (1.0 - _smooth_step_inf(s / 4.0)), np.inf)
    return np.where(np.isfinite(j2), 1.0 / np.sqrt(j2), 0.0)


def rescaled_field(spacetime, y):
    """rho_hat H_p in the (tau, r, q, w) chart; y is a 6-vector."""
    tau, r, q = y[0], y[1], y[2]
    w = y[3:6]
    _, ps, px, pr = _symbol_parts(spacetime, r, w)
    ps, px, pr = ps[0], px[0], pr[0]
    # H_p on (sigma_b, xi, eta) is (0, -pr, 0) at unit fiber length
    a = np.array([0.0, -pr, 0.0])
    wa = float(w @ a)
    # rho_hat |zeta| = 1 for |zeta| >= 4
    f = float(rho_hat(q) / q) if q > 0 else 1.0
    return f * np.r_[tau * ps, px, -q * wa, a - w * wa]


@dataclass
class Trajectory:
    s: np.ndarray
    states: np.ndarray
    p: np.ndarray
    status: str

    def table(self):
        """Rows s, tau, r, sigma_b, xi, p (fiber components at unit length when q = 0)."""
        q = self.states[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(q > 0, 1.0 / np.where(q > 0, q, 1.0), 1.0)
        return np.column_stack([self.s, self.states[:, 0], self.states[:, 1],
                                self.states[:, 3] * scale, self.states[:, 4] * scale, self.p])


def time_orientation(spacetime, r):
    """+1 if t_* increases toward the future near r, -1 if it decreases.

    Inside the black hole (r1 < r < r2) the future direction is -grad r, and
    dt_*(-grad r) = -h. Each band where dt_* is timelike touches that region,
    so the sign there fixes the band's orientation.
    """
    r0, r1, r2, r3 = spacetime.radii
    eps = 1e-3 * (r2 - r1)
    probe = r1 + eps if r < 0.5 * (r1 + r2) else r2 - eps
    return int(np.sign(-spacetime.maps.h(np.array([probe]))[0]))


def flow_integrate(spacetime, state, T, tol=1e-10, future=None, null_tol=1e-8, n_out=201):
    """Integrate the rescaled Hamilton field with RK45.

    Args:
        spacetime: Spacetime bundle.
        state: FlowState, null (|p| < null_tol at unit fiber length).
        T: parameter length; negative integrates backwards.
        tol: relative and absolute integrator tolerance.
        future: if True (False), flip the field so that it is future (past)
            directed in the band of the starting radius; None uses the field as is.
        null_tol: tolerance for the null condition.
        n_out: output samples.
    """
    y0 = state.as_array()
    p0 = _symbol_parts(spacetime, state.r, state.w)[0][0]
    if abs(p0) > null_tol:
        raise ValueError(f"state is not null: p = {p0:.3e}")
    sign = 1.0
    if future is not None:
        _, ps, _, _ = _symbol_parts(spacetime, state.r, state.w)
        # t_*' = -dp/dsigma_b along H_p
        tdot = -ps[0]
        if tdot == 0:
            raise ValueError("field is tangent to the time slices here; orientation undefined")
        sign = np.sign(tdot) * time_orientation(spacetime, state.r) * (1 if future else -1)
    fun = lambda s, y: sign * rescaled_field(spacetime, y)
    ev = np.linspace(0.0, T, n_out)
    sol = solve_ivp(fun, (0.0, T), y0, method="RK45", rtol=tol, atol=tol, t_eval=ev)
    if not sol.success:
        raise FlowError(f"integration failed near s={sol.t[-1]:.6g}, r={sol.y[1, -1]:.6g}: {sol.message}")
    Y = sol.y.T
    # renormalise the stored direction before measuring p
    W = Y[:, 3:6] / np.linalg.norm(Y[:, 3:6], axis=1)[:, None]
    p = np.array([_symbol_parts(spacetime, y[1], w)[0][0] for y, w in zip(Y, W)])
    if np.any(Y[:, 0] < -10 * tol):
        raise FlowError("tau became negative")
    return Trajectory(sol.t, Y, p, "ok")


@dataclass
class RadialSetReport:
    """Linearization of the rescaled flow at a radial set L_j.

    Attributes:
        j: horizon index.
        r: horizon radius.
        xi_sign: sign of xi on the component with beta_0 > 0.
        jacobian: 5x5 Jacobian in the chart (tau, r, 1/|xi|, sigma_b/|xi|, eta/|xi|).
        eigenvalues: eigenvalues of the Jacobian.
        beta0, beta_tilde, beta_q: the radial-point constants.
        beta_tilde_samples: beta_tilde at points of L_j (sampled angles).
        q_radius: neighborhood radius where H rho_0 >= beta_q rho_0 was verified.
        orientation: +1 if the rescaled field is future directed at L_j.
        classification: dict with the boundary and transversal behavior.
    """

    j: int
    r: float
    xi_sign: int
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    beta0: float
    beta_tilde: float
    beta_q: float
    beta_tilde_samples: np.ndarray
    q_radius: float
    orientation: int
    classification: dict = field(default_factory=dict)


def _radial_point(spacetime, j):
    rj = spacetime.radii[j]
    e = int(np.sign(spacetime.metric.dmu(np.array([rj]))[0]))
    return rj, e


def projective_field(spacetime, y, e):
    """Rescaled field in the chart (tau, r, 1/|xi|, sigma_b/|xi|, eta/|xi|) with sign(xi) = e.

    Near fiber infinity rho_hat = 1/|zeta| = k/|xi| with k = (1 + s^2 + eta^2)^(-1/2).
    """
    tau, r, rho, s, eta = y
    _, ps, px, pr = _symbol_parts(spacetime, r, (s, float(e), eta))
    k = 1.0 / np.sqrt(1 + s * s + eta * eta)
    g = e * pr[0]
    return k * np.array([tau * ps[0], px[0], rho * g, s * g, eta * g])


def _jacobian(fun, y0, step):
    """Central differences with one Richardson step."""
    n = len(y0)
    J = np.zeros((n, n))
    for k in range(n):
        cols = []
        for hh in (step, 2 * step):
            dp, dm = y0.copy(), y0.copy()
            dp[k] += hh
            dm[k] -= hh
            cols.append((fun(dp) - fun(dm)) / (2 * hh))
        J[:, k] = (4 * cols[0] - cols[1]) / 3
    return J


def _beta_q(spacetime, j, e, radii=(0.05, 0.02, 0.01, 0.005, 0.002), n=41):
    """min of H rho_0 / rho_0 over a sampled punctured neighborhood of L_j in dSigma.

    rho_0 = (r - r_j)^2 + s^2 + eta^2 on fiber infinity over tau = 0, where s
    solves p = 0 for given (r, eta).
    """
    rj = spacetime.radii[j]
    maps, met = spacetime.maps, spacetime.metric
    for rad in radii:
        vals = []
        for d in np.linspace(-rad, rad, n):
            r = np.array([rj + d])
            mu, h, g = met.mu(r)[0], maps.h(r)[0], maps.gtt(r)[0]
            for eta in np.linspace(0.0, rad, n // 2 + 1):
                if d == 0 and eta == 0:
                    continue
                # -g s^2 + 2 h e s + c0 = 0, root near s = 0 in cancellation-free form
                c0 = mu + eta * eta / r[0] ** 2
                disc = (h * e) ** 2 + g * c0
                if disc < 0:
                    continue
                s = -c0 / (h * e + np.sign(h * e) * np.sqrt(disc))
                f = projective_field(spacetime, np.r_[0.0, r[0], 0.0, s, eta], e)
                rho0 = d * d + s * s + eta * eta
                vals.append((2 * d * f[1] + 2 * s * f[3] + 2 * eta * f[4]) / rho0)
        vals = np.array(vals)
        if len(vals) and np.all(vals > 0):
            return float(vals.min()), rad
    raise FlowError(f"no neighborhood of L_{j} with H rho_0 >= beta_q rho_0, beta_q > 0")


def _beta_tilde_full(spacetime, rj, e, theta, phi):
    """beta_tilde at the point (theta, phi) of L_j from the unreduced symbol.

    p4 = mu xi^2 + 2h sigma xi - gtt sigma^2 + (eta_th^2 + eta_ph^2 / sin^2 th) / r^2.
    At L_j the angular covector vanishes; H tau / tau = dp4/dsigma and
    H rho_hat / rho_hat = e dp4/dr at unit |xi|.
    """
    maps, met = spacetime.maps, spacetime.metric
    r = np.array([rj])
    eth, eph = 0.0, 0.0
    ang = (eth**2 + eph**2 / np.sin(theta) ** 2) / rj**2
    dps = 2 * maps.h(r)[0] * e
    dpr = met.dmu(r)[0] - 2 * ang / rj
    return -dps / (e * dpr)


def radial_set_linearize(spacetime, j, step=1e-6, n_samples=50, seed=0):
    """Linearize the rescaled flow at L_j and extract beta_0, beta_tilde, beta_q.

    Args:
        spacetime: Spacetime bundle.
        j: horizon index 0..3.
        step: finite-difference step for the Jacobian.
        n_samples: points of L_j (angles on the sphere) for the constancy check.
        seed: seed for the sampled angles.
    """
    if j not in range(len(spacetime.radii)):
        raise ValueError("j must index a horizon")
    rj, e = _radial_point(spacetime, j)
    y0 = np.array([0.0, rj, 0.0, 0.0, 0.0])
    fun = lambda y: projective_field(spacetime, y, e)
    if np.max(np.abs(fun(y0))) > 1e-10:
        raise FlowError(f"L_{j} is not a fixed point of the rescaled flow")
    J = _jacobian(fun, y0, step)
    ev = np.linalg.eigvals(J)
    if np.min(np.abs(ev)) < 1e-8:
        raise FlowError(f"non-hyperbolic linearization at L_{j}")
    beta0 = J[2, 2]
    beta_t = -J[0, 0] / beta0
    rng = np.random.default_rng(seed)
    th = np.arccos(rng.uniform(-0.98, 0.98, n_samples))
    ph = rng.uniform(0, 2 * np.pi, n_samples)
    samples = np.array([_beta_tilde_full(spacetime, rj, e, a, b) for a, b in zip(th, ph)])
    bq, rad = _beta_q(spacetime, j, e)
    # t_*' = -dp/dsigma_b = -2 h xi at L_j
    tdot = -2 * spacetime.maps.h(np.array([rj]))[0] * e
    orient = int(np.sign(tdot) * time_orientation(spacetime, rj))
    cls = {
        "boundary": "source" if orient * beta0 > 0 else "sink",
        "transversal": "stable" if orient * J[0, 0] < 0 else "unstable",
        "saddle": bool(J[0, 0] * beta0 < 0),
        "hypotheses": bool(beta0 > 0 and beta_t > 0 and J[0, 0] < 0),
    }
    return RadialSetReport(j, float(rj), e, J, ev, float(beta0), float(beta_t), bq, samples, rad,
                           orient, cls)


def threshold_regularity(report, weight):
    """Borderline regularity (m - 1)/2 + beta_tilde * weight with m = 2."""
    return 0.5 + report.beta_tilde * weight
