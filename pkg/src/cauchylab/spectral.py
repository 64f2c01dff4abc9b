"""Stationary operator family P(sigma) = P0 + sigma P1 + sigma^2 P2 per spherical mode.

Substituting d/dt_* -> -i sigma in the mode operator

    L u = g^tt u_tt + 2h u_tr - mu u_rr + (h' + 2h/r) u_t - (mu' + 2mu/r) u_r + l(l+1)/r^2 u

gives P2 = -g^tt, P1 = -i(2h D + h' + 2h/r), P0 = -mu D^2 - (mu' + 2mu/r) D + l(l+1)/r^2.

Each band is discretized by Chebyshev collocation on an interval whose ends
are horizons. There both characteristics leave the band, so no boundary rows
are imposed: smoothness at the horizon is the outgoing condition.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sl
from scipy.fft import dct

__all__ = [
    "SpectralError",
    "chebyshev",
    "clenshaw_curtis",
    "OperatorFamily",
    "ResonanceData",
    "ScanResult",
    "assemble_family",
    "quadratic_eigs",
    "spectral_tail_mass",
    "resonance_scan",
    "zero_mode_structure",
    "pole_rank",
    "PerturbationResult",
    "perturb_resonance",
    "potential_bump",
]


class SpectralError(RuntimeError):
    pass


def chebyshev(N, a=-1.0, b=1.0):
    """Chebyshev-Lobatto nodes on [a, b] (ascending) and the first-derivative matrix."""
    if N < 2:
        raise ValueError("N must be at least 2")
    if not b > a:
        raise ValueError("need b > a")
    k = np.arange(N + 1)
    x = np.cos(np.pi * k / N)
    c = np.r_[2.0, np.ones(N - 1), 2.0] * (-1.0) ** k
    dX = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    # x runs from +1 down to -1; flip so r ascends
    r = a + (b - a) * (1 - x) / 2
    return r, -2.0 / (b - a) * D


def clenshaw_curtis(N, a=-1.0, b=1.0):
    """Clenshaw-Curtis weights for the Chebyshev-Lobatto nodes of `chebyshev`."""
    theta = np.pi * np.arange(N + 1) / N
    w = np.zeros(N + 1)
    v = np.ones(N - 1)
    ii = np.arange(1, N)
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N * N - 1)
        for k in range(1, N // 2):
            v -= 2 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
        v -= np.cos(N * theta[ii]) / (N * N - 1)
    else:
        w[0] = w[N] = 1.0 / (N * N)
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
    w[ii] = 2 * v / N
    return w * (b - a) / 2


def spectral_tail_mass(values, frac=1.0 / 3.0):
    """Fraction of Chebyshev coefficient energy in the top `frac` of the modes.

    Resolved eigenfunctions have geometrically decaying coefficients and a
    tail mass near rounding; grid-scale artifacts put most of their energy there.
    """
    v = np.asarray(values)
    coef = dct(v, type=1) / (len(v) - 1)
    e = np.abs(coef) ** 2
    k0 = int(np.ceil((1 - frac) * (len(v) - 1)))
    tot = e.sum()
    return float(e[k0:].sum() / tot) if tot > 0 else 0.0


@dataclass
class OperatorFamily:
    """Discretized P(sigma) = P0 + sigma P1 + sigma^2 P2.

    Args:
        ell: spherical mode.
        r: collocation nodes.
        P0, P1, P2: dense (n, n) complex matrices.
        D: first-derivative matrix on r.
        weights: quadrature weights on r.
        band: (lo, hi) horizon radii bounding the band.
        boundary: boundary treatment tag.
        time_function: "t_star" or "t0".
    """

    ell: int
    r: np.ndarray
    P0: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    D: np.ndarray
    weights: np.ndarray
    band: tuple
    boundary: str = "horizon-terminated, no boundary rows"
    time_function: str = "t_star"

    @property
    def n(self):
        return len(self.r)

    def __call__(self, sigma):
        return self.P0 + sigma * self.P1 + sigma * sigma * self.P2

    def derivative(self, sigma):
        return self.P1 + 2 * sigma * self.P2


def _hF_coeffs(maps, r):
    """h_F, h_F' and (1 - h_F^2)/mu for the t_0 time function."""
    mu = maps.metric.mu(r)
    hF = maps.hF(r)
    dhF = sum(s * b.deriv(r) for s, b in zip(maps.signs, maps.bumps))
    num = 1 - hF * hF
    gtt = np.zeros_like(r)
    ok = np.abs(num) > 1e-14
    gtt[ok] = num[ok] / mu[ok]
    return hF, dhF, gtt


_BANDS = {"exterior": (2, 3), "artificial": (0, 1)}


def assemble_family(spacetime, ell, band="exterior", N=96, time_function="t_star"):
    """Operator family of mode ell on a horizon-terminated band.

    Args:
        spacetime: Spacetime bundle.
        ell: spherical harmonic degree (>= 0).
        band: "exterior" (r2, r3) or "artificial" (r0, r1). Between r1 and r2
            both characteristics enter the band, so it carries no outgoing problem.
        N: polynomial degree; the grid has N + 1 nodes.
        time_function: "t_star" (the regular time function) or "t0" (the
            comparison time t - F). The two families are conjugate by exp(i sigma Ftilde).
    """
    if ell < 0 or int(ell) != ell:
        raise ValueError("ell must be a non-negative integer")
    if band not in _BANDS:
        raise ValueError(f"band must be one of {sorted(_BANDS)}")
    if time_function not in ("t_star", "t0"):
        raise ValueError("time_function must be 't_star' or 't0'")
    i, j = _BANDS[band]
    a, b = spacetime.radii[i], spacetime.radii[j]
    r, D = chebyshev(N, a, b)
    maps, met = spacetime.maps, spacetime.metric
    mu, dmu = met.mu(r), met.dmu(r)
    # exact zeros at the band ends
    mu[0] = mu[-1] = 0.0
    if time_function == "t_star":
        h, dh, gtt = maps.h(r), maps.dh(r), maps.gtt(r)
    else:
        h, dh, gtt = _hF_coeffs(maps, r)
    D2 = D @ D
    P2 = -np.diag(gtt).astype(complex)
    P1 = -1j * (2 * h[:, None] * D + np.diag(dh + 2 * h / r))
    P0 = (-mu[:, None] * D2 - (dmu + 2 * mu / r)[:, None] * D
          + np.diag(ell * (ell + 1) / r**2)).astype(complex)
    return OperatorFamily(int(ell), r, P0, P1, P2, D, clenshaw_curtis(N, a, b), (a, b),
                          time_function=time_function)


def quadratic_eigs(family):
    """All finite eigenpairs of P(sigma) v = 0 via the doubled pencil.

    [0 I; -P0 -P1] z = sigma [I 0; 0 P2] z with z = (v, sigma v). A singular P2
    (t0 family on bump plateaus) only adds infinite eigenvalues.
    """
    n = family.n
    I, Z = np.eye(n), np.zeros((n, n))
    A = np.block([[Z, I], [-family.P0, -family.P1]])
    B = np.block([[I, Z], [Z, family.P2]])
    try:
        w, V = sl.eig(A, B, check_finite=True)
    except (sl.LinAlgError, ValueError) as exc:
        raise SpectralError(f"eigen-solver failure: {exc}") from exc
    fin = np.isfinite(w) & (np.abs(w) < 1e8)
    V = V[:n, fin]
    V = V / np.linalg.norm(V, axis=0)
    return w[fin], V


@dataclass
class ResonanceData:
    """A resonance with its states.

    Attributes:
        sigma: location.
        rank: contour-integral rank (0 if not computed).
        order: pole order k0 (1 for simple poles).
        states: resonant states, columns, unit discrete L^2.
        duals: dual states (left null vectors), columns, unit discrete L^2.
        collar_mass: Chebyshev tail mass of the state.
    """

    sigma: complex
    rank: int = 0
    order: int = 1
    states: np.ndarray = None
    duals: np.ndarray = None
    collar_mass: float = 0.0

    def as_dict(self):
        return {"sigma_re": float(self.sigma.real), "sigma_im": float(self.sigma.imag),
                "rank": int(self.rank), "collar_mass": float(self.collar_mass)}


@dataclass
class ScanResult:
    """Resonances inside the (clipped) rectangle plus the deflated ones."""

    rectangle: tuple
    resonances: list
    deflated: list = field(default_factory=list)
    clipped: bool = False


def _in_rect(w, rect):
    re0, re1, im0, im1 = rect
    return (w.real >= re0) & (w.real <= re1) & (w.imag >= im0) & (w.imag <= im1)


def resonance_scan(family, rectangle=(-1.0, 1.0, -0.3, 0.1), gamma=None, deflate=0.9):
    """Resonances of the family inside a rectangle of the sigma plane.

    Args:
        family: OperatorFamily.
        rectangle: (re_min, re_max, im_min, im_max).
        gamma: strip depth; the rectangle is cut to Im sigma > -gamma. Below
            that line the discrete spectrum is polluted by the band ends.
        deflate: eigenvectors with Chebyshev tail mass above this fraction are
            tagged as grid artifacts and returned in `deflated`.
    """
    re0, re1, im0, im1 = map(float, rectangle)
    if not (re1 > re0 and im1 > im0):
        raise ValueError("rectangle must have positive width and height")
    if not 0 < deflate <= 1:
        raise ValueError("deflate must lie in (0, 1]")
    clipped = False
    if gamma is not None:
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        if im1 <= -gamma:
            raise ValueError("rectangle lies entirely below the strip Im sigma > -gamma")
        if im0 < -gamma:
            im0, clipped = -gamma, True
    rect = (re0, re1, im0, im1)
    w, V = quadratic_eigs(family)
    m = _in_rect(w, rect)
    order = np.argsort(-w[m].imag, kind="stable")
    keep, drop = [], []
    for k in np.flatnonzero(m)[order]:
        cm = spectral_tail_mass(V[:, k])
        rd = ResonanceData(complex(w[k]), states=V[:, k:k + 1], collar_mass=cm)
        (drop if cm > deflate else keep).append(rd)
    return ScanResult(rect, keep, drop, clipped)


def _null_pair(M):
    """Right and left (transpose) null vectors of a nearly singular matrix."""
    U, s, Vh = np.linalg.svd(M)
    phi = Vh[-1].conj()
    psi = U[:, -1].conj()
    return phi, psi, s


def zero_mode_structure(family, tol=1e-6):
    """Kernel of P(0) and its dual state.

    Returns:
        (ResonanceData, report dict). The report has the relative deviation of
        the state from its mean away from the band ends, the simpleness
        certificate psi^T dP(0) phi, and the smallest two singular values.
    """
    P = family(0.0)
    w, _ = quadratic_eigs(family)
    near = w[np.abs(w) < tol]
    if len(near) != 1:
        raise SpectralError(f"zero resonance not simple: {len(near)} eigenvalues with |sigma| < {tol}")
    phi, psi, s = _null_pair(P)
    phi = phi / phi[np.argmax(np.abs(phi))]
    phi /= np.linalg.norm(phi)
    psi = psi / psi[np.argmax(np.abs(psi))]
    psi /= np.linalg.norm(psi)
    lo, hi = family.band
    d = 0.05 * (hi - lo)
    inner = (family.r > lo + d) & (family.r < hi - d)
    pin = phi[inner]
    dev = float(np.max(np.abs(pin - pin.mean())) / np.abs(pin.mean()))
    cert = complex(psi @ family.derivative(0.0) @ phi)
    rd = ResonanceData(complex(near[0]), rank=0, order=1, states=phi[:, None],
                       duals=psi[:, None], collar_mass=spectral_tail_mass(phi))
    return rd, {"constancy": dev, "certificate": cert, "singular_values": s[-2:].tolist(),
                "dual_function": psi / family.weights}


def pole_rank(family, center, radius, nodes=64, reject=0.05):
    """Rank (2 pi i)^{-1} tr of the contour integral of P^{-1} dP/dsigma.

    Args:
        family: OperatorFamily.
        center, radius: circular contour.
        nodes: trapezoid nodes (>= 64).
        reject: allowed distance of the result from an integer.
    """
    if nodes < 64:
        raise ValueError("nodes must be at least 64")
    if radius <= 0:
        raise ValueError("radius must be positive")
    w, _ = quadratic_eigs(family)
    dist = np.abs(np.abs(w - center) - radius)
    if np.any(dist < 0.1 * radius):
        raise SpectralError("an eigenvalue lies within 10% of the contour")
    th = 2 * np.pi * np.arange(nodes) / nodes
    z = center + radius * np.exp(1j * th)
    acc = 0.0 + 0.0j
    for zk, tk in zip(z, th):
        M = family(zk)
        if np.linalg.cond(M) > 1e14:
            raise SpectralError("ill-conditioned solve on the contour")
        acc += np.trace(np.linalg.solve(M, family.derivative(zk))) * 1j * radius * np.exp(1j * tk)
    val = acc * (2 * np.pi / nodes) / (2j * np.pi)
    k = int(round(val.real))
    if abs(val - k) > reject:
        raise SpectralError(f"non-integer rank {val:.6g}")
    return k


def potential_bump(r, lo, hi):
    """Smooth bump exp(-1/(1-y^2)) supported in (lo, hi), peak 1."""
    y = (2 * np.asarray(r, dtype=float) - lo - hi) / (hi - lo)
    out = np.zeros_like(y)
    m = np.abs(y) < 1
    out[m] = np.exp(1 - 1 / (1 - y[m] ** 2))
    return out


@dataclass
class PerturbationResult:
    """Resonance trajectory under P(sigma) + eps R."""

    sigma0: complex
    eps: np.ndarray
    sigma: np.ndarray
    slope_formula: complex
    slope_fd: complex
    relative_gap: float
    quad_residual: float
    pairing: complex
    collision: bool


def _track(family, R, eps, sigma0):
    fam = OperatorFamily(family.ell, family.r, family.P0 + eps * R, family.P1, family.P2,
                         family.D, family.weights, family.band, family.boundary,
                         family.time_function)
    w, _ = quadratic_eigs(fam)
    d = np.abs(w - sigma0)
    i = np.argsort(d)
    return complex(w[i[0]]), float(d[i[1]]) if len(d) > 1 else np.inf


def perturb_resonance(family, sigma0, R, eps_list=(), h=1e-4):
    """First-order motion of a simple resonance under P(sigma) + eps diag(R).

    The slope from the bilinear formula -psi^T R phi / psi^T P'(sigma0) phi is
    compared with the Richardson difference over eps = +-h, +-2h.

    Args:
        family: OperatorFamily.
        sigma0: an eigenvalue of the family (refined internally).
        R: perturbing potential sampled on family.r.
        eps_list: extra eps values (complex allowed) for the trajectory.
        h: finite-difference step.
    """
    R = np.diag(np.asarray(R, dtype=complex))
    if R.shape[0] != family.n:
        raise ValueError("R must be sampled on the family grid")
    s0, gap0 = _track(family, 0 * R, 0.0, sigma0)
    phi, psi, _ = _null_pair(family(s0))
    num = psi @ R @ phi
    den = psi @ family.derivative(s0) @ phi
    if abs(num) < 1e-14 * np.linalg.norm(R):
        raise ValueError("perturbation pairs to zero with the resonant state")
    formula = -num / den
    sp = {e: _track(family, R, e, s0) for e in (h, -h, 2 * h, -2 * h)}
    fd = (8 * (sp[h][0] - sp[-h][0]) - (sp[2 * h][0] - sp[-2 * h][0])) / (12 * h)
    eps = np.array([0.0] + list(eps_list), dtype=complex)
    traj, collision = [], False
    for e in eps:
        s, gap = _track(family, R, e, s0)
        # the tracked eigenvalue should stay well separated from its neighbours
        collision |= gap < 4 * abs(s - s0) and gap < 0.5 * gap0
        traj.append(s)
    x = np.array([0.0, h, -h, 2 * h, -2 * h])
    y = np.array([s0, sp[h][0], sp[-h][0], sp[2 * h][0], sp[-2 * h][0]])
    cf = np.polyfit(x, y, 2)
    quad = float(np.max(np.abs(np.polyval(cf, x) - y)) / max(abs(fd) * h, 1e-300))
    return PerturbationResult(s0, eps, np.array(traj), complex(formula), complex(fd),
                              float(abs(formula - fd) / abs(fd)), quad, complex(den), bool(collision))
