"""Modified Carter operator on Kerr and its commutation with rho^2 Box_g.

Conventions: D = -i d, so

    C = -(1/sin th) d_th (kappa sin th d_th) - (1+gamma)^2/(kappa sin^2 th) d_ph^2
        - 2a (1+gamma)^2/kappa d_t d_ph - (1+gamma)^2 a^2 sin^2 th / kappa d_t^2,

with kappa = 1 + gamma cos^2 th and gamma = Lambda a^2 / 3. At a = 0 this is the
non-negative Laplacian -Delta_{S^2}.

Kerr (Lambda = 0) is written in the chart (t_*, r, th, ph_*) with
t_* = t - G(r), ph_* = ph - P(r), G' = (r^2+a^2) S/mu + H, P' = a S/mu,
where mu = r^2 - 2Mr + a^2 = (r - r1)(r - r2) and S is the linear function with
S(r_j) = s_j (s_1 = +1, s_2 = -1). Then (1 - S^2)/mu = -4/(r2 - r1)^2 and every
coefficient of rho^2 Box_g is polynomial in r: the chart is regular across both
horizons. H is a fixed smooth extra shift.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import sympy as sp

from .evolve import fd_weights

__all__ = [
    "CarterError",
    "CarterOperator",
    "KerrChart",
    "TestFunction",
    "random_test_function",
    "apply_carter",
    "apply_box",
    "apply_carter_fd",
    "apply_box_fd",
    "commutator_residual",
    "CommutatorReport",
    "mode_regularity_witness",
    "ModeReport",
]

T, R, TH, PH = sp.symbols("t r theta phi", real=True)
_VARS = (T, R, TH, PH)


class CarterError(ValueError):
    pass


@dataclass(frozen=True)
class CarterOperator:
    """Coefficients of the modified Carter operator.

    Args:
        mass: M > 0.
        a: rotation parameter.
        cosmological_constant: Lambda >= 0 (enters through gamma and kappa only).
    """

    mass: float = 1.0
    a: float = 0.1
    cosmological_constant: float = 0.0

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.cosmological_constant < 0:
            raise ValueError("cosmological_constant must be non-negative")

    @property
    def gamma(self):
        return self.cosmological_constant * self.a**2 / 3.0

    def kappa(self, theta):
        return 1.0 + self.gamma * np.cos(theta) ** 2

    def rho2(self, r, theta):
        return r**2 + self.a**2 * np.cos(theta) ** 2

    def symbolic(self, u):
        """C u for a sympy expression u in (t, r, theta, phi)."""
        g = sp.nsimplify(self.gamma, rational=False) if self.gamma else 0
        a = sp.Float(self.a)
        kap = 1 + g * sp.cos(TH) ** 2
        c = (1 + g) ** 2
        return (-sp.diff(kap * sp.sin(TH) * sp.diff(u, TH), TH) / sp.sin(TH)
                - c / (kap * sp.sin(TH) ** 2) * sp.diff(u, PH, 2)
                - 2 * a * c / kap * sp.diff(u, T, PH)
                - c * a**2 * sp.sin(TH) ** 2 / kap * sp.diff(u, T, 2))


@dataclass(frozen=True)
class KerrChart:
    """Horizon-regular chart for Kerr with Lambda = 0.

    Args:
        mass: M > 0.
        a: |a| < M.
        shift: coefficient c of the extra shift H(r) = -c S(r).
    """

    mass: float = 1.0
    a: float = 0.1
    shift: float = 0.5

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if not abs(self.a) < self.mass:
            raise ValueError("need |a| < M (subextremal Kerr)")

    @property
    def radii(self):
        d = np.sqrt(self.mass**2 - self.a**2)
        return self.mass - d, self.mass + d

    @cached_property
    def inverse_metric(self):
        """rho^2 g^{-1} as a symmetric sympy matrix in (t, r, theta, phi)."""
        M, a = sp.Float(self.mass), sp.Float(self.a)
        r1, r2 = (sp.Float(x) for x in self.radii)
        mu = R**2 - 2 * M * R + a**2
        S = 1 - 2 * (R - r1) / (r2 - r1)
        k = -4 / (r2 - r1) ** 2          # (1 - S^2)/mu
        H = -sp.Float(self.shift) * S
        w = R**2 + a**2
        s2 = sp.sin(TH) ** 2
        G = sp.zeros(4, 4)
        G[0, 0] = w**2 * k - 2 * w * S * H - mu * H**2 - a**2 * s2
        G[0, 3] = G[3, 0] = a * w * k - a * S * H - a
        G[3, 3] = a**2 * k - 1 / s2
        G[0, 1] = G[1, 0] = w * S + mu * H
        G[1, 3] = G[3, 1] = a * S
        G[1, 1] = -mu
        G[2, 2] = -1
        return G

    def box(self, u):
        """rho^2 Box_g u = (1/sin th) d_i (sin th G^{ij} d_j u)."""
        G = self.inverse_metric
        out = 0
        for i in range(4):
            flux = sum(sp.sin(TH) * G[i, j] * sp.diff(u, _VARS[j]) for j in range(4) if G[i, j] != 0)
            out += sp.diff(flux, _VARS[i])
        return out / sp.sin(TH)

    @cached_property
    def _numeric(self):
        G = self.inverse_metric
        fns = {}
        for i in range(4):
            for j in range(i, 4):
                if G[i, j] != 0:
                    fns[(i, j)] = sp.lambdify((R, TH), G[i, j], "numpy")
        return fns

    def coefficient(self, i, j, r, th):
        fn = self._numeric.get((min(i, j), max(i, j)))
        return 0.0 * r if fn is None else fn(r, th) + 0.0 * r


class TestFunction:
    """Finite sum of c t^p r^q cos^u(th) sin^v(th) exp(i m ph) with exact derivatives.

    Args:
        terms: iterable of (c, p, q, u, v, m) with complex c and integer exponents.
    """

    __test__ = False  # not a pytest class

    def __init__(self, terms):
        self.terms = [tuple(t) for t in terms]
        if not self.terms:
            raise ValueError("need at least one term")
        for c, p, q, u, v, m in self.terms:
            if min(p, q, u, v) < 0:
                raise ValueError("exponents must be non-negative")
        self.expr = self._build()
        self._cache = {}

    def _build(self):
        e = 0
        for c, p, q, u, v, m in self.terms:
            cc = sp.Float(complex(c).real) + sp.I * sp.Float(complex(c).imag)
            e += cc * T**p * R**q * sp.cos(TH) ** u * sp.sin(TH) ** v * sp.exp(sp.I * m * PH)
        return e

    def derivative(self, alpha):
        """Callable for the derivative with multi-index alpha = (nt, nr, nth, nph), total order <= 4."""
        alpha = tuple(int(x) for x in alpha)
        if sum(alpha) > 4:
            raise ValueError("derivatives up to total order 4 only")
        if alpha not in self._cache:
            e = self.expr
            for v, n in zip(_VARS, alpha):
                if n:
                    e = sp.diff(e, v, n)
            self._cache[alpha] = sp.lambdify(_VARS, e, "numpy")
        return self._cache[alpha]

    def __call__(self, t, r, th, ph):
        return self.derivative((0, 0, 0, 0))(t, r, th, ph)


def random_test_function(seed, n_terms=3):
    """Seeded witness with 1..n_terms terms, exponents up to 3 and |m| <= 2."""
    rng = np.random.default_rng(seed)
    terms = []
    for _ in range(n_terms):
        c = complex(rng.normal(), rng.normal())
        p, q, u, v = (int(x) for x in rng.integers(0, 4, size=4))
        m = int(rng.integers(-2, 3))
        terms.append((c, p, q, u, v, m))
    return TestFunction(terms)


def _check_point(point, chart=None, margin=1e-3):
    t, r, th, ph = point
    if np.sin(th) <= margin:
        raise CarterError(f"point too close to the rotation axis: sin(theta) = {np.sin(th):.3g}")
    if chart is not None and min(abs(r - x) for x in chart.radii) < margin:
        raise CarterError(f"point within {margin} of a horizon (r = {r})")


def _eval(expr, points):
    fn = sp.lambdify(_VARS, expr, "numpy")
    P = np.atleast_2d(np.asarray(points, dtype=float))
    return np.asarray(fn(P[:, 0], P[:, 1], P[:, 2], P[:, 3]), dtype=complex) * np.ones(len(P))


def apply_carter(op, f, points):
    """Exact C f at the given points (rows t, r, theta, phi)."""
    P = np.atleast_2d(points)
    for p in P:
        _check_point(p)
    return _eval(op.symbolic(f.expr), P)


def apply_box(chart, f, points):
    """Exact rho^2 Box_g f at the given points."""
    P = np.atleast_2d(points)
    for p in P:
        _check_point(p, chart)
    return _eval(chart.box(f.expr), P)


# -- order-8 finite differences ------------------------------------------------

_OFF = np.arange(-4, 5)
_W1 = fd_weights(0.0, _OFF.astype(float), 1)
_W2 = fd_weights(0.0, _OFF.astype(float), 2)


def _fd_derivs(fun, x, h):
    """First, second and mixed derivatives of fun at the 4-point x (order 8)."""
    x = np.asarray(x, dtype=float)
    d1, d2 = np.zeros(4, dtype=complex), np.zeros((4, 4), dtype=complex)
    E = np.eye(4)
    for i in range(4):
        pts = x[None, :] + h * _OFF[:, None] * E[i][None, :]
        v = fun(pts)
        d1[i] = _W1 @ v / h
        d2[i, i] = _W2 @ v / h**2
    for i in range(4):
        for j in range(i + 1, 4):
            pts = (x[None, None, :] + h * _OFF[:, None, None] * E[i] + h * _OFF[None, :, None] * E[j])
            v = fun(pts.reshape(-1, 4)).reshape(9, 9)
            d2[i, j] = d2[j, i] = _W1 @ v @ _W1 / h**2
    return d1, d2


def _as_vectorized(f):
    if isinstance(f, TestFunction):
        g = f.derivative((0, 0, 0, 0))
    else:
        g = f
    return lambda P: np.asarray(g(P[:, 0], P[:, 1], P[:, 2], P[:, 3]), dtype=complex) * np.ones(len(P))


def apply_carter_fd(op, f, point, h=1e-3):
    """C f at one point from order-8 central differences of f and of kappa sin(theta)."""
    _check_point(point)
    t, r, th, ph = point
    d1, d2 = _fd_derivs(_as_vectorized(f), point, h)
    c = (1 + op.gamma) ** 2
    k = op.kappa(th)
    ks = lambda y: op.kappa(y) * np.sin(y)
    dks = _W1 @ ks(th + h * _OFF) / h
    return (-(k * d2[2, 2] + dks / np.sin(th) * d1[2]) - c / (k * np.sin(th) ** 2) * d2[3, 3]
            - 2 * op.a * c / k * d2[0, 3] - c * op.a**2 * np.sin(th) ** 2 / k * d2[0, 0])


def apply_box_fd(chart, f, point, h=1e-3):
    """rho^2 Box_g f at one point: G^{ij} f_ij + b^j f_j with b^j from differenced coefficients."""
    _check_point(point, chart)
    t, r, th, ph = point
    d1, d2 = _fd_derivs(_as_vectorized(f), point, h)
    out = 0.0 + 0.0j
    for i in range(4):
        for j in range(4):
            out += chart.coefficient(i, j, r, th) * d2[i, j]
    # b^j = (1/sin) d_r(sin G^{rj}) + (1/sin) d_th(sin G^{th j})
    for j in range(4):
        gr = lambda y: chart.coefficient(1, j, y, th)
        gt = lambda y: np.sin(y) * chart.coefficient(2, j, r, y)
        b = _W1 @ gr(r + h * _OFF) / h + _W1 @ gt(th + h * _OFF) / (h * np.sin(th))
        out += b * d1[j]
    return out


@dataclass
class CommutatorReport:
    max_residual: float
    points: int
    seeds: list
    fd_max_disagreement: float

    def as_dict(self):
        return {"max_residual": self.max_residual, "points": self.points, "seeds": list(self.seeds),
                "fd_max_disagreement": self.fd_max_disagreement}


def _rel(x, y):
    scale = np.maximum(np.maximum(np.abs(x), np.abs(y)), 1e-300)
    return np.abs(x - y) / scale


def sample_points(chart, n, seed, margin=1e-3):
    """Seeded points with sin(theta) and |r - r_j| above margin, r in (r1/2, 2 r2)."""
    rng = np.random.default_rng(seed)
    r1, r2 = chart.radii
    out = []
    while len(out) < n:
        p = np.array([rng.uniform(-2, 2), rng.uniform(0.5 * r1 + 0.05, 2 * r2),
                      rng.uniform(0.05, np.pi - 0.05), rng.uniform(0, 2 * np.pi)])
        if np.sin(p[2]) > 10 * margin and min(abs(p[1] - x) for x in chart.radii) > 10 * margin:
            out.append(p)
    return np.array(out)


def commutator_residual(mass=1.0, a=0.1, seeds=range(20), n_points=50, fd_check=3, h=1e-3,
                        other="carter"):
    """Max relative residual of [rho^2 Box_g, C] f over seeded witnesses and points.

    Both orderings are formed with exact derivatives. For the first `fd_check`
    witnesses each single-operator application inside the orderings is also
    recomputed with order-8 differences (step h) and the largest relative
    disagreement is reported.

    Args:
        other: "carter", "dt" (D_{t_*}), "dphi" (D_{phi_*}) or "laplacian"
            (-Delta_{S^2}, i.e. C at a = 0).
    """
    chart = KerrChart(mass, a)
    op = CarterOperator(mass, a)
    lap = CarterOperator(mass, 0.0)
    if other == "carter":
        B, B_fd = op.symbolic, lambda g, p: apply_carter_fd(op, g, p, h)
    elif other == "laplacian":
        B, B_fd = lap.symbolic, lambda g, p: apply_carter_fd(lap, g, p, h)
    elif other == "dt":
        B, B_fd = (lambda u: -sp.I * sp.diff(u, T)), None
    elif other == "dphi":
        B, B_fd = (lambda u: -sp.I * sp.diff(u, PH)), None
    else:
        raise ValueError("other must be 'carter', 'laplacian', 'dt' or 'dphi'")
    seeds = list(seeds)
    worst, fdw, npts = 0.0, 0.0, 0
    for k, sd in enumerate(seeds):
        f = random_test_function(sd)
        P = sample_points(chart, n_points, 1000 + sd)
        Bf, Af = B(f.expr), chart.box(f.expr)
        ABf, BAf = chart.box(Bf), B(Af)
        x, y = _eval(ABf, P), _eval(BAf, P)
        worst = max(worst, float(np.max(_rel(x, y))))
        npts += len(P)
        if k < fd_check and B_fd is not None:
            gB = sp.lambdify(_VARS, Bf, "numpy")
            gA = sp.lambdify(_VARS, Af, "numpy")
            for p, xe, ye in list(zip(P, x, y))[:10]:
                fdw = max(fdw, float(_rel(apply_box_fd(chart, gB, p, h), xe)))
                fdw = max(fdw, float(_rel(B_fd(gA, p), ye)))
    return CommutatorReport(worst, npts, seeds, fdw)


# -- angular ellipticity witness -------------------------------------------------

@dataclass
class ModeReport:
    m: int
    eigenvalues: np.ndarray
    real: bool
    lower_bound: float
    gaps: np.ndarray
    weyl_counts: dict


def _cheb(N):
    x = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.r_[2.0, np.ones(N - 1), 2.0] * (-1.0) ** np.arange(N + 1)
    dX = x[:, None] - x[None, :]
    D = np.outer(c, 1 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def mode_regularity_witness(mass=1.0, a=0.1, m=0, sigma=1.0, ell_max=20, N=80,
                            cosmological_constant=0.0):
    """Spectrum of the angular part of C at frequency sigma and azimuthal number m.

    With x = cos(theta) and u = (1 - x^2)^{|m|/2} v the operator becomes
    -(1 - x^2) v'' + 2(|m| + 1) x v' + |m|(|m| + 1) v plus the multiplication
    terms 2 a m sigma + a^2 sigma^2 (1 - x^2) (Lambda = 0; kappa != 1 is handled
    in the same substitution through the full coefficients). Collocation on
    Chebyshev points; polynomial eigenvectors are the regular ones.

    Args:
        sigma: frequency replacing D_{t_*}.
        ell_max: number of eigenvalues reported is ell_max - |m| + 1.
        N: polynomial degree.
    """
    if abs(a) > 0.3 * mass:
        raise ValueError("witness is meant for |a| <= 0.3 M")
    if ell_max < abs(m):
        raise ValueError("ell_max must be >= |m|")
    if cosmological_constant != 0.0:
        raise ValueError("the witness is implemented for Lambda = 0")
    am = abs(m)
    x, D = _cheb(N)
    D2 = D @ D
    A = (-(1 - x * x)[:, None] * D2 + 2 * (am + 1) * x[:, None] * D
         + np.diag(am * (am + 1) + 2 * a * m * sigma + (a * sigma) ** 2 * (1 - x * x)))
    w = np.linalg.eigvals(A)
    real = bool(np.max(np.abs(w.imag)) < 1e-8 * max(1.0, np.max(np.abs(w.real))))
    w = np.sort(w.real)
    k = ell_max - am + 1
    ev = w[:k]
    cuts = [10.0, 40.0, 160.0, 640.0]
    counts = {c: int(np.sum(w[: N // 2] < c)) for c in cuts}
    return ModeReport(m, ev, real, float(w[0]), np.diff(ev), counts)
