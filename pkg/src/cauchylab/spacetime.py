"""Metric catalog for charged and rotating black holes with an extended domain.

Radial functions, horizon finding, surface gravities, the modified radial
function with an artificial horizon below the inner horizon, de Sitter gluing
beyond the trapped set, and the time function t_* used by the solvers.

Conventions: signature (+,-,-,-). For the spherically symmetric family

    g = mu dt^2 - mu^{-1} dr^2 - r^2 dOmega^2,
    mu(r) = 1 - 2M/r + Q^2/r^2 - Lam r^2/3.

The time function is t_* = t - G(r) with h(r) = mu G'(r); the inverse metric
in (t_*, r) is then g^{tt} = (1 - h^2)/mu, g^{tr} = h, g^{rr} = -mu.
"""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq


class ExtremalityError(ValueError):
    """A horizon root is degenerate (double root) within tolerance."""


class ConstructionError(ValueError):
    """An extension or coordinate construction failed its a posteriori checks."""


def smoothstep(x):
    """Quintic smoothstep, 0 for x <= 0 and 1 for x >= 1 (C^2)."""
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x * x)


def dsmoothstep(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    return np.where(inside, 30.0 * x**2 * (1.0 - x) ** 2, 0.0)


def d2smoothstep(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    return np.where(inside, 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x), 0.0)


@dataclass(frozen=True)
class BlackHoleParams:
    """Physical parameters.

    Args:
        mass: M > 0.
        charge: Q, RN family only.
        angular_momentum: a, Kerr family only.
        cosmological_constant: Lam >= 0.
        family: "RN" or "Kerr".
    """

    mass: float = 1.0
    charge: float = 0.8
    angular_momentum: float = 0.0
    cosmological_constant: float = 0.02
    family: str = "RN"

    def __post_init__(self):
        if self.family not in ("RN", "Kerr"):
            raise ValueError(f"unknown family {self.family!r}")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if self.cosmological_constant < 0:
            raise ValueError("cosmological constant must be nonnegative")
        if self.family == "RN":
            if abs(self.charge) >= self.mass:
                raise ValueError("RN parameters must be subextremal, |Q| < M")
            if self.angular_momentum != 0:
                raise ValueError("RN family has a = 0")
        else:
            if abs(self.angular_momentum) >= self.mass:
                raise ValueError("Kerr parameters must be subextremal, |a| < M")
            if self.charge != 0:
                raise ValueError("Kerr family is uncharged")

    @property
    def vacuum(self):
        return replace(self, cosmological_constant=0.0)


@dataclass(frozen=True)
class HorizonStructure:
    radii: tuple
    kappas: tuple
    signs: tuple
    labels: tuple = ()

    def __getitem__(self, label):
        return self.radii[self.labels.index(label)]

    def kappa(self, label):
        return self.kappas[self.labels.index(label)]

    def as_dict(self):
        return {"radii": list(self.radii), "kappas": list(self.kappas),
                "signs": list(self.signs), "labels": list(self.labels)}


def eval_mu(params, r):
    """mu (RN family) or tilde-mu (Kerr family) at radius r."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radius must be positive")
    M, Lam = params.mass, params.cosmological_constant
    if params.family == "RN":
        Q = params.charge
        return 1.0 - 2.0 * M / r + Q * Q / (r * r) - Lam * r * r / 3.0
    a = params.angular_momentum
    return (r * r + a * a) * (1.0 - Lam * r * r / 3.0) - 2.0 * M * r


def eval_dmu(params, r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radius must be positive")
    M, Lam = params.mass, params.cosmological_constant
    if params.family == "RN":
        Q = params.charge
        return 2.0 * M / r**2 - 2.0 * Q * Q / r**3 - 2.0 * Lam * r / 3.0
    a = params.angular_momentum
    return 2.0 * r * (1.0 - Lam * r * r / 3.0) - (r * r + a * a) * 2.0 * Lam * r / 3.0 - 2.0 * M


def eval_d2mu(params, r):
    r = np.asarray(r, dtype=float)
    M, Lam = params.mass, params.cosmological_constant
    if params.family == "RN":
        Q = params.charge
        return -4.0 * M / r**3 + 6.0 * Q * Q / r**4 - 2.0 * Lam / 3.0
    a = params.angular_momentum
    return 2.0 - 4.0 * Lam * r * r - 2.0 * Lam * a * a / 3.0


def _scan_roots(f, lo, hi, step, scale):
    """Sign-change scan plus bracketed refinement to 1e-14."""
    n = int(np.ceil((hi - lo) / step)) + 1
    rr = np.linspace(lo, hi, n)
    v = f(rr)
    roots = [float(x) for x in rr[v == 0]]
    for i in np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]:
        roots.append(brentq(f, rr[i], rr[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps))
    roots.sort()
    # a double root shows up as a touch-down of |f| without a sign change
    av = np.abs(v)
    touch = (av[1:-1] <= av[:-2]) & (av[1:-1] <= av[2:]) & (av[1:-1] < 1e-8 * scale)
    for i in np.nonzero(touch)[0]:
        rt = rr[i + 1]
        if all(abs(rt - x) > 2 * step for x in roots):
            raise ExtremalityError(f"degenerate root near r={rt:.6g}")
    return roots


def _scan_range(params):
    M, Lam = params.mass, params.cosmological_constant
    hi = 10.0 * np.sqrt(3.0 / Lam) if Lam > 0 else 10.0 * M + 10.0
    return 1e-3 * M, hi


def surface_gravity(params, r_j, tol=1e-10):
    """kappa_j = |mu'(r_j)|/2, or |tilde-mu'|/(2(r^2+a^2)) for Kerr."""
    d = float(eval_dmu(params, r_j))
    if params.family == "Kerr":
        d /= r_j**2 + params.angular_momentum**2
    if abs(d) < tol:
        raise ExtremalityError(f"|mu'| below tolerance at r={r_j:.6g}")
    return abs(d) / 2.0


def find_horizons(params, ext=None, expect=None):
    """All positive simple roots of mu (or of the extended mu_* when ext is given).

    Args:
        params: BlackHoleParams.
        ext: optional ExtensionParams; roots are then those of the glued,
            modified radial function, scanned from r0 - 2 delta.
        expect: required number of roots, if any.

    Returns:
        HorizonStructure with radii sorted ascending.
    """
    M = params.mass
    if ext is None:
        f, df = (lambda r: eval_mu(params, r)), (lambda r: eval_dmu(params, r))
        lo, hi = _scan_range(params)
        scale = max(1.0, M * M) if params.family == "Kerr" else 1.0
    else:
        metric = build_extended_metric(params, ext)
        f, df = metric.mu, metric.dmu
        lo, hi = ext.r0 - 2 * ext.delta, _scan_range(params)[1]
        scale = 1.0
    roots = _scan_roots(f, lo, hi, 1e-3 * M, scale)
    if expect is not None and len(roots) != expect:
        raise ValueError(f"expected {expect} roots, found {len(roots)}")
    kappas, signs = [], []
    for rj in roots:
        if abs(f(rj)) > 1e-12 * scale:
            raise ConstructionError(f"root residual too large at r={rj}")
        d = float(df(rj))
        if params.family == "Kerr":
            d /= rj**2 + params.angular_momentum**2
        if abs(d) < 1e-10:
            raise ExtremalityError(f"|mu'| below tolerance at r={rj:.6g}")
        kappas.append(abs(d) / 2.0)
        signs.append(-int(np.sign(d)))
    labels = _label(len(roots), ext is not None, params)
    return HorizonStructure(tuple(roots), tuple(kappas), tuple(signs), labels)


def _label(n, extended, params):
    names = []
    if extended:
        names.append("r0")
    if params.family == "RN" and params.charge != 0 or params.family == "Kerr" and params.angular_momentum != 0:
        names += ["r1", "r2"]
    else:
        names += ["r2"]
    if params.cosmological_constant > 0:
        names.append("r3")
    if len(names) != n:
        return tuple(f"r{i}" for i in range(n))
    return tuple(names)


@dataclass(frozen=True)
class ExtensionParams:
    """Artificial-horizon and gluing parameters.

    Ordering: r0 - delta < rQm < r0 < rQp < r1, and rm > r2.
    """

    r0: float
    rQm: float
    rQp: float
    delta: float
    rm: float
    kappa0: float = 1.0

    @classmethod
    def default(cls, params, r0frac=0.55, dfrac=0.05, kappa0=1.0, rm=None):
        vac = find_horizons(params.vacuum)
        if len(vac.radii) != 2:
            raise ValueError("extension needs an inner and an outer horizon")
        r1, r2 = vac.radii
        delta = dfrac * r1
        r0 = r0frac * r1
        if rm is None:
            r3 = _largest_root(params)
            rm = r2 + 0.5 * (r3 - r2) - 0.5
        return cls(r0=r0, rQm=r0 - 0.5 * delta, rQp=r0 + 0.5 * (r1 - r0),
                   delta=delta, rm=rm, kappa0=kappa0)

    def validate(self, r1, r2):
        if not (self.r0 - self.delta < self.rQm < self.r0 < self.rQp < r1):
            raise ValueError("extension radii violate r0-delta < rQm < r0 < rQp < r1")
        if not self.rm > r2:
            raise ValueError("gluing radius must exceed r2")
        if self.kappa0 <= 0 or self.delta <= 0:
            raise ValueError("kappa0 and delta must be positive")


def _largest_root(params):
    if params.cosmological_constant <= 0:
        raise ValueError("gluing requires Lam > 0")
    lo, hi = _scan_range(params)
    roots = _scan_roots(lambda r: eval_mu(params, r), lo, hi, 1e-3 * params.mass, 1.0)
    return roots[-1]


class ExtendedMetric:
    """Modified radial function mu_* glued to de Sitter at large r.

    Below r_{Q,+} the function is a quintic Hermite bridge from
    (0, 2 kappa0, 0) at r0 to (mu, mu', mu'') at r_{Q,+}, continued linearly
    below r0. Beyond rm the vacuum function blends into the Lam > 0 one over
    [rm, rm + 1] with the quintic smoothstep.

    Args:
        params: RN BlackHoleParams with Lam > 0 (Lam = 0 disables gluing).
        ext: ExtensionParams.
    """

    def __init__(self, params, ext):
        if params.family != "RN":
            raise ValueError("the extended metric is implemented for the RN family only")
        self.params, self.ext = params, ext
        vac = find_horizons(params.vacuum)
        ext.validate(*vac.radii)
        self.vac = params.vacuum
        self.glued = params.cosmological_constant > 0
        a, b = ext.r0, ext.rQp
        H = b - a
        y1 = np.array([float(self._base(b)), float(self._dbase(b)) * H, float(self._d2base(b)) * H * H])
        c0, c1, c2 = 0.0, 2.0 * ext.kappa0 * H, 0.0
        A = np.array([[1, 1, 1], [3, 4, 5], [6, 12, 20]], dtype=float)
        rhs = np.array([y1[0] - c0 - c1 - c2, y1[1] - c1 - 2 * c2, y1[2] - 2 * c2])
        self._coef = np.concatenate([[c0, c1, c2], np.linalg.solve(A, rhs)])
        self._check()

    # glued base function (no artificial horizon)
    def _chi(self, r):
        return 1.0 - smoothstep(r - self.ext.rm)

    def _base(self, r):
        m0 = eval_mu(self.vac, r)
        if not self.glued:
            return m0
        x = self._chi(r)
        return x * m0 + (1 - x) * eval_mu(self.params, r)

    def _dbase(self, r):
        d0 = eval_dmu(self.vac, r)
        if not self.glued:
            return d0
        x, dx = self._chi(r), -dsmoothstep(r - self.ext.rm)
        m0, mL = eval_mu(self.vac, r), eval_mu(self.params, r)
        return x * d0 + (1 - x) * eval_dmu(self.params, r) + dx * (m0 - mL)

    def _d2base(self, r):
        d0 = eval_d2mu(self.vac, r)
        if not self.glued:
            return d0
        y = r - self.ext.rm
        x, dx, ddx = self._chi(r), -dsmoothstep(y), -d2smoothstep(y)
        m0, mL = eval_mu(self.vac, r), eval_mu(self.params, r)
        dm0, dmL = eval_dmu(self.vac, r), eval_dmu(self.params, r)
        return x * d0 + (1 - x) * eval_d2mu(self.params, r) + 2 * dx * (dm0 - dmL) + ddx * (m0 - mL)

    def _bridge(self, r, der):
        a, H = self.ext.r0, self.ext.rQp - self.ext.r0
        t = (r - a) / H
        c = self._coef
        if der == 0:
            return np.polynomial.polynomial.polyval(t, c)
        dc = np.polynomial.polynomial.polyder(c, der)
        return np.polynomial.polynomial.polyval(t, dc) / H**der

    def mu(self, r):
        r = np.asarray(r, dtype=float)
        e = self.ext
        lin = 2 * e.kappa0 * (r - e.r0)
        rs = np.where(r > 0, r, 1.0)
        out = np.where(r < e.r0, lin, np.where(r < e.rQp, self._bridge(r, 0), self._base(rs)))
        return out

    def dmu(self, r):
        r = np.asarray(r, dtype=float)
        e = self.ext
        rs = np.where(r > 0, r, 1.0)
        return np.where(r < e.r0, 2 * e.kappa0,
                        np.where(r < e.rQp, self._bridge(r, 1), self._dbase(rs)))

    def _check(self):
        e = self.ext
        rr = np.arange(e.r0 - 2 * e.delta, e.rQp, 1e-4)
        v = self.mu(rr)
        changes = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
        if len(changes) != 1 or abs(rr[changes[0]] - e.r0) > 2e-4:
            raise ConstructionError("mu_* must have exactly one simple root in (r0-2delta, rQp)")
        if np.any(v[rr < e.r0] >= 0) or np.any(v[rr > e.r0 + 1e-12] <= 0):
            raise ConstructionError("mu_* has the wrong sign pattern around r0")


def build_extended_metric(params, ext):
    """Construct the extended metric; see ExtendedMetric."""
    return ExtendedMetric(params, ext)


@dataclass
class _Bump:
    """Plateau bump: rises on [a0, a1], falls on [b0, b1]; infinite ends allowed."""

    a0: float
    a1: float
    b0: float
    b1: float

    def __call__(self, r):
        up = smoothstep((r - self.a0) / (self.a1 - self.a0)) if np.isfinite(self.a0) else 1.0
        dn = 1.0 - smoothstep((r - self.b0) / (self.b1 - self.b0)) if np.isfinite(self.b1) else 1.0
        return up * dn * np.ones_like(r)

    def deriv(self, r):
        one = np.ones_like(r)
        if np.isfinite(self.a0):
            w = self.a1 - self.a0
            up, dup = smoothstep((r - self.a0) / w), dsmoothstep((r - self.a0) / w) / w
        else:
            up, dup = one, 0 * one
        if np.isfinite(self.b1):
            w = self.b1 - self.b0
            dn, ddn = 1 - smoothstep((r - self.b0) / w), -dsmoothstep((r - self.b0) / w) / w
        else:
            dn, ddn = one, 0 * one
        return dup * dn + up * ddn


class CoordinateMaps:
    """Horizon-penetrating time functions on the extended RN domain.

    h = sum_j s_j (1 - c_j mu) chi_j with plateau bumps chi_j around each
    horizon and c_j = min(1, 1/max mu on supp chi_j). The comparison function
    F has F' = h_F/mu with h_F = sum_j s_j chi_j, so that t_0 = t - F and
    t_* = t_0 - Ftilde with Ftilde' = (h - h_F)/mu = -sum_j s_j c_j chi_j.
    """

    def __init__(self, metric, horizons):
        self.metric = metric
        e = metric.ext
        if len(horizons.radii) != 4:
            raise ValueError("coordinate maps need horizons r0 < r1 < r2 < r3")
        r0, r1, r2, r3 = horizons.radii
        self.horizons = horizons
        self.radii = np.array(horizons.radii)
        self.signs = np.array(horizons.signs, dtype=float)
        d, q = e.delta, (r1 - r0) / 4.0
        w3 = min(3.0, 0.25 * (r3 - r2))
        self.bumps = [
            _Bump(-np.inf, -np.inf, r0 + q, r0 + 2 * q),
            _Bump(r1 - 2 * q, r1 - q, r1 + 3 * d, r1 + 0.4 * (r2 - r1)),
            _Bump(r1 + 0.45 * (r2 - r1), r1 + 0.6 * (r2 - r1), r2 + 0.5, r2 + 1.0),
            _Bump(r3 - w3, r3 - 2 * w3 / 3, np.inf, np.inf),
        ]
        if not (r2 + 1.0 < r3 - w3):
            raise ConstructionError("cosmological horizon too close to the event horizon")
        self.c = []
        for j, b in enumerate(self.bumps):
            lo = b.a0 if np.isfinite(b.a0) else r0 - 2 * d
            hi = b.b1 if np.isfinite(b.b1) else r3 + 2.0
            rr = np.linspace(lo, hi, 20001)
            m = metric.mu(rr)[b(rr) > 0]
            self.c.append(min(1.0, 1.0 / max(m.max(), 1e-12)))
        self.c = np.array(self.c)
        self._build_F()
        self.check_causal()

    def h(self, r):
        r = np.asarray(r, dtype=float)
        mu = self.metric.mu(r)
        out = np.zeros_like(r)
        for s, c, b in zip(self.signs, self.c, self.bumps):
            out = out + s * (1 - c * mu) * b(r)
        return out

    def dh(self, r):
        r = np.asarray(r, dtype=float)
        mu, dmu = self.metric.mu(r), self.metric.dmu(r)
        out = np.zeros_like(r)
        for s, c, b in zip(self.signs, self.c, self.bumps):
            out = out + s * (-c * dmu * b(r) + (1 - c * mu) * b.deriv(r))
        return out

    def hF(self, r):
        r = np.asarray(r, dtype=float)
        return sum(s * b(r) for s, b in zip(self.signs, self.bumps))

    def dFtilde(self, r):
        r = np.asarray(r, dtype=float)
        return -sum(s * c * b(r) for s, c, b in zip(self.signs, self.c, self.bumps))

    def dF(self, r):
        return self.hF(r) / self.metric.mu(r)

    def gtt(self, r):
        """g^{-1}(dt_*, dt_*) = (1 - h^2)/mu, evaluated without the 0/0 at horizons."""
        r = np.asarray(r, dtype=float)
        mu = self.metric.mu(r)
        # on bump plateaus h = s(1 - c mu), so (1 - h^2)/mu = c(2 - c mu)
        out = np.empty_like(r)
        near = np.zeros(r.shape, dtype=bool)
        for c, b, rj in zip(self.c, self.bumps, self.radii):
            m = (np.abs(r - rj) < 1e-3) & (np.abs(b(r) - 1) < 1e-15)
            out[m] = c * (2 - c * mu[m])
            near |= m
        h = self.h(r[~near])
        out[~near] = (1 - h * h) / mu[~near]
        return out

    def dgtt(self, r):
        """Radial derivative of gtt, with the plateau value -c^2 mu' at horizons."""
        r = np.asarray(r, dtype=float)
        mu, dmu = self.metric.mu(r), self.metric.dmu(r)
        out = np.empty_like(r)
        near = np.zeros(r.shape, dtype=bool)
        for c, b, rj in zip(self.c, self.bumps, self.radii):
            m = (np.abs(r - rj) < 1e-3) & (np.abs(b(r) - 1) < 1e-15)
            out[m] = -c * c * dmu[m]
            near |= m
        rr = r[~near]
        h, dh = self.h(rr), self.dh(rr)
        m0, m1 = mu[~near], dmu[~near]
        out[~near] = (-2 * h * dh * m0 - (1 - h * h) * m1) / m0**2
        return out

    def _build_F(self):
        """F = sum_j A_j chi_j log|r - r_j| + S(r), S smooth, normalized S(r2+1.5) = 0."""
        m = self.metric
        r0, r1, r2, r3 = self.radii
        self.A = self.signs / m.dmu(self.radii)
        lo, hi = r0 - 3 * m.ext.delta, r3 + 3.0
        rr = np.linspace(lo, hi, 400001)
        dS = np.zeros_like(rr)
        mu = m.mu(rr)
        for s, A, b, rj in zip(self.signs, self.A, self.bumps, self.radii):
            y = rr - rj
            safe = np.abs(y) > 1e-5
            term = np.zeros_like(rr)
            term[safe] = s * b(rr[safe]) / mu[safe] - A * b(rr[safe]) / y[safe]
            # removable point: s/mu - A/y -> -s mu''/(2 mu'^2) is tiny; interpolate
            term[~safe] = np.interp(rr[~safe], rr[safe], term[safe])
            dS += term - A * b.deriv(rr) * np.log(np.where(safe, np.abs(y), 1e-5))
        S = cumulative_simpson(dS, x=rr, initial=0.0)
        S -= np.interp(r2 + 1.5, rr, S)
        self._S = CubicSpline(rr, S)
        Ft = cumulative_simpson(self.dFtilde(rr), x=rr, initial=0.0)
        Ft -= np.interp(r2 + 1.5, rr, Ft)
        self._Ft = CubicSpline(rr, Ft)
        self._range = (lo, hi)

    def F(self, r):
        r = np.asarray(r, dtype=float)
        out = self._S(r)
        for A, b, rj in zip(self.A, self.bumps, self.radii):
            out = out + A * b(r) * np.log(np.abs(r - rj))
        return out

    def Ftilde(self, r):
        return self._Ft(np.asarray(r, dtype=float))

    def tau(self, t_star):
        """Boundary defining function tau = exp(-t_*)."""
        return np.exp(-np.asarray(t_star, dtype=float))

    def inverse_metric(self, r, ell_term=False):
        """(g^{tt}, g^{tr}, g^{rr}) of the (t_*, r) block."""
        r = np.asarray(r, dtype=float)
        return self.gtt(r), self.h(r), -self.metric.mu(r)

    def det2(self, r):
        """Determinant of the (t_*, r) block of g (equals -1 identically)."""
        gtt, gtr, grr = self.inverse_metric(r)
        return 1.0 / (gtt * grr - gtr * gtr)

    def det4(self, r, theta=np.pi / 2):
        """det g in (t_*, r, theta, phi)."""
        r = np.asarray(r, dtype=float)
        return self.det2(r) * r**4 * np.sin(theta) ** 2

    def check_causal(self, n=4001):
        """Timelike dt_* on both bands; dr timelike in the trapped interior."""
        e = self.metric.ext
        r0, r1, r2, r3 = self.radii
        d = e.delta
        for lo, hi in ((r0 - 2 * d, r1 + 2 * d), (r2 - 2 * d, r3 + 2 * d)):
            rr = np.linspace(lo, hi, n)
            g = self.gtt(rr)
            bad = np.nonzero(~(g > 0))[0]
            if len(bad):
                raise ConstructionError(f"dt_* not timelike at r={rr[bad[0]]:.6g}")
        rr = np.linspace(r1, r2, n)[1:-1]
        if np.any(-self.metric.mu(rr) <= 0):
            raise ConstructionError("-dr not timelike between r1 and r2")
        # -dr future directed relative to dt_* at the event-horizon side
        if not -self.h(np.array([r2 - 2 * d]))[0] > 0:
            raise ConstructionError("-dr not future directed near r2")
        return True


def build_coordinate_maps(params, horizons=None, ext=None):
    """Time functions t_0, t_* for the extended RN metric.

    Args:
        params: BlackHoleParams (RN, Lam > 0).
        horizons: extended HorizonStructure; computed if omitted.
        ext: ExtensionParams; defaults if omitted.
    """
    ext = ext if ext is not None else ExtensionParams.default(params)
    metric = build_extended_metric(params, ext)
    if horizons is None:
        horizons = find_horizons(params, ext)
    return CoordinateMaps(metric, horizons)


@dataclass
class Spacetime:
    """Bundle of parameters, extension, metric, horizons and time function."""

    params: BlackHoleParams = field(default_factory=BlackHoleParams)
    ext: ExtensionParams = None

    def __post_init__(self):
        if self.ext is None:
            self.ext = ExtensionParams.default(self.params)
        self.metric = build_extended_metric(self.params, self.ext)
        self.horizons = find_horizons(self.params, self.ext, expect=4)
        self.maps = CoordinateMaps(self.metric, self.horizons)

    @property
    def radii(self):
        return self.horizons.radii

    @property
    def kappas(self):
        return self.horizons.kappas
