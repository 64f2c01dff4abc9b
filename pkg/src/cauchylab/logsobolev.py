"""Logarithmic Sobolev norms and related diagnostics.

The norm of H^{s + l log} uses the Fourier weight <xi>^s <log<xi>>^l with
<z> = (1 + z^2)^{1/2}. Discretely, a windowed, tapered field on a uniform grid
with spacing dr and N nodes has

    ||u||^2 = sum_k <xi_k>^{2s} <log<xi_k>>^{2l} |u_hat_k|^2 dxi / (2 pi),
    u_hat_k = dr sum_n u_n exp(-i xi_k r_n),  dxi = 2 pi / (N dr),

so that (s, l) = (0, 0) reproduces the discrete L^2 norm exactly.

Weighted b-norms use x = tau = exp(-t_*). A field u lies in the weighted space
with weight (r, j) when u = x^r log^{-j}(1/x~) u_0 and u_0 lies in the
unweighted space. Here x~ is a smoothed min(x, 1/2).
"""
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .evolve import DecayFitter, rn_tortoise


class EmbeddingDivergence(ValueError):
    """The L^1 integral behind the L^inf embedding diverges."""


def japanese(z):
    return np.sqrt(1.0 + np.abs(z) ** 2)


def _smooth_step_inf(z):
    """C-infinity step, 0 for z <= 0 and 1 for z >= 1."""
    z = np.asarray(z, dtype=float)
    f = lambda y: np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)
    a, b = f(z), f(1.0 - z)
    return a / (a + b)


def taper(y):
    """C-infinity window on [-1, 1]: 1 on |y| <= 1/2, 0 at |y| = 1."""
    y = np.abs(np.asarray(y, dtype=float))
    return _smooth_step_inf(2.0 - 2.0 * y)


def x_tilde(x):
    """Smoothed min(x, 1/2): x on [0, 1/4], 1/2 on [1/2, inf), quintic bridge between."""
    x = np.asarray(x, dtype=float)
    t = np.clip((x - 0.25) / 0.25, 0.0, 1.0)
    p = t + 4 * t**3 - 7 * t**4 + 3 * t**5
    return np.where(x <= 0.25, x, np.where(x >= 0.5, 0.5, 0.25 + 0.25 * p))


@dataclass(frozen=True)
class NormSpec:
    """Specification of a windowed H_b^{s + l log, r + j log} norm.

    Args:
        s: regularity.
        ell: log-regularity.
        r: weight in x = exp(-t_*).
        j: log-weight.
        window: (r_lo, r_hi); None means the whole supplied grid.
    """

    s: float = 0.0
    ell: float = 0.0
    r: float = 0.0
    j: float = 0.0
    window: tuple = None

    def __post_init__(self):
        if self.window is not None and not self.window[1] > self.window[0]:
            raise ValueError("window must satisfy r_hi > r_lo")

    @property
    def label(self):
        return f"H^{{{self.s:g}+{self.ell:g}log,{self.r:g}+{self.j:g}log}}"


def time_weight(t_star, r, j):
    """x^{-r} log^{j}(1/x~) at x = exp(-t_*), the factor turning a weighted norm into a plain one."""
    x = np.exp(-np.asarray(t_star, dtype=float))
    return x ** (-r) * np.log(1.0 / x_tilde(x)) ** j


def log_sobolev_norm(grid, values, spec, t_star=None, min_nodes=64):
    """Windowed, tapered H^{s + l log} norm, times the b-weight when r or j is nonzero.

    Args:
        grid: uniform radial nodes.
        values: field values on grid.
        spec: NormSpec.
        t_star: time of the snapshot (needed when spec.r or spec.j is nonzero).
        min_nodes: minimal number of nodes inside the window.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values)
    lo, hi = spec.window if spec.window is not None else (grid[0], grid[-1])
    if lo < grid[0] - 1e-12 or hi > grid[-1] + 1e-12:
        raise ValueError("window must lie inside the field grid")
    m = (grid >= lo - 1e-12) & (grid <= hi + 1e-12)
    n = int(m.sum())
    if n < min_nodes:
        raise ValueError(f"window holds {n} nodes, need at least {min_nodes}")
    r, u = grid[m], values[m]
    dr = r[1] - r[0]
    y = (r - 0.5 * (lo + hi)) / (0.5 * (hi - lo))
    w = taper(y) * u
    uh = dr * np.fft.fft(w)
    xi = 2 * np.pi * np.fft.fftfreq(n, d=dr)
    jx = japanese(xi)
    weight = jx ** (2 * spec.s) * japanese(np.log(jx)) ** (2 * spec.ell)
    dxi = 2 * np.pi / (n * dr)
    val = np.sqrt(np.sum(weight * np.abs(uh) ** 2) * dxi / (2 * np.pi))
    if spec.r != 0 or spec.j != 0:
        if t_star is None:
            raise ValueError("weighted norms need the snapshot time")
        val *= float(time_weight(t_star, spec.r, spec.j))
    return float(val)


def windowed_l2(grid, values, window):
    """Direct tapered L^2 sum (the Parseval reference)."""
    grid = np.asarray(grid, dtype=float)
    lo, hi = window
    m = (grid >= lo - 1e-12) & (grid <= hi + 1e-12)
    r, u = grid[m], np.asarray(values)[m]
    y = (r - 0.5 * (lo + hi)) / (0.5 * (hi - lo))
    return float(np.sqrt(np.sum(np.abs(taper(y) * u) ** 2) * (r[1] - r[0])))


def embedding_constant(eps, epsrel=1e-12):
    """Constant C with sup|u| <= C ||u||_{H^{1/2 + (1/2 + eps) log}} on the line.

    Normalization: with ||u||^2 = (2 pi)^{-1} int w^2 |u_hat|^2 dxi and
    w = <xi>^{1/2} <log<xi>>^{1/2 + eps}, Cauchy-Schwarz on the inversion
    formula gives C = (I / (2 pi))^{1/2}, I = int_R <xi>^{-1} <log<xi>>^{-1-2 eps} dxi.
    The substitution xi = sinh z turns I into 2 int_0^inf <log cosh z>^{-1-2 eps} dz.
    """
    if not eps > 0:
        raise EmbeddingDivergence("the embedding needs eps > 0; the integral diverges logarithmically")

    def lcosh(z):
        return z + np.log1p(np.exp(-2 * z)) - np.log(2.0)

    f = lambda z: japanese(lcosh(z)) ** (-1.0 - 2 * eps)
    head, _ = integrate.quad(f, 0.0, 50.0, epsabs=0, epsrel=epsrel, limit=500)
    tail, _ = integrate.quad(f, 50.0, np.inf, epsabs=0, epsrel=epsrel, limit=500)
    return float(np.sqrt(2 * (head + tail) / (2 * np.pi)))


# -- log-weight interpolation inequalities ---------------------------------

@dataclass
class InterpolationReport:
    ell: float
    v: float
    w: float
    alphas: tuple
    empirical: dict
    amgm_bound: dict
    amgm_pointwise_ok: bool
    decomposition_residual: float
    b1_sup: float
    b2_sup: float
    b_bounds: tuple

    @property
    def ok(self):
        return (self.amgm_pointwise_ok
                and all(self.empirical[a] <= self.amgm_bound[a] * (1 + 1e-12) for a in self.alphas)
                and self.decomposition_residual < 1e-10
                and self.b1_sup <= self.b_bounds[0] * (1 + 1e-12)
                and self.b2_sup <= self.b_bounds[1] * (1 + 1e-12))


def _cutoff(z):
    """Smooth cutoff, 0 on (-inf, 1/2], 1 on [3/2, inf)."""
    return _smooth_step_inf(np.asarray(z, dtype=float) - 0.5)


def check_interpolation_inequalities(ell, v, w, xt, rt, alphas=(0.0, 0.25, 0.5, 0.75, 1.0)):
    """Grid check of the log-weight interpolation inequalities.

    Part 1: (xt^{1-a} rt^a / (v xt + w rt))^l <= (((1-a) xt + a rt)/(v xt + w rt))^l
    <= max((1-a)/v, a/w)^l. Part 2: (v xt + w rt)^l = rt^l b1 + xt^l b2 with
    b1 = phi(rt/xt)(w + v xt/rt)^l and b2 = (1 - phi(rt/xt))(v + w rt/xt)^l bounded.

    Args:
        ell, v, w: positive reals.
        xt, rt: 1-d grids of values >= log 2 (log x^{-1}, log rho^{-1}).
    """
    if min(ell, v, w) <= 0:
        raise ValueError("ell, v, w must be positive")
    xt, rt = np.asarray(xt, dtype=float), np.asarray(rt, dtype=float)
    if xt.min() < np.log(2) - 1e-12 or rt.min() < np.log(2) - 1e-12:
        raise ValueError("grid values must be >= log 2")
    X, R = np.meshgrid(xt, rt, indexing="ij")
    den = v * X + w * R
    emp, bound, pw = {}, {}, True
    for a in alphas:
        ratio = (X ** (1 - a) * R**a / den) ** ell
        amgm = (((1 - a) * X + a * R) / den) ** ell
        pw &= bool(np.all(ratio <= amgm * (1 + 1e-13)))
        emp[a] = float(ratio.max())
        bound[a] = float(max((1 - a) / v, a / w) ** ell)
    phi = _cutoff(R / X)
    b1 = phi * (w + v * X / R) ** ell
    b2 = (1 - phi) * (v + w * R / X) ** ell
    lhs = den**ell
    resid = float(np.max(np.abs(lhs - (R**ell * b1 + X**ell * b2)) / lhs))
    return InterpolationReport(ell, v, w, tuple(alphas), emp, bound, pw, resid,
                               float(b1.max()), float(b2.max()),
                               ((w + 2 * v) ** ell, (v + 1.5 * w) ** ell))


# -- horizon diagnostics -------------------------------------------------------

@dataclass
class NormRecord:
    t_star: float
    value: float
    spec: NormSpec
    nodes: int = 0


class HorizonSampler(BaseEstimator, TransformerMixin):
    """Resample interior snapshots onto uniform windows around r1.

    fit(inner) stores the interior solution. transform(times) returns an array
    of shape (len(times), n) of u on the window grid, reflected evenly across r1.

    Args:
        half_width: window half-width d about r1.
        n: nodes in the window.
    """

    def __init__(self, half_width=0.02, n=1024):
        self.half_width = half_width
        self.n = n

    def fit(self, inner, y=None):
        if self.n < 64:
            raise ValueError("the window needs at least 64 nodes")
        self.inner_ = inner
        return self

    @property
    def grid_(self):
        r1 = self.inner_.r1
        return np.linspace(r1 - self.half_width, r1 + self.half_width, self.n)

    def transform(self, times):
        check_is_fitted(self, "inner_")
        inner = self.inner_
        r1 = inner.r1
        y = np.abs(self.grid_ - r1)
        if inner.r.max() < r1 + self.half_width:
            raise ValueError("interior stations do not cover the window")
        # stations run towards r1 with increasing x; clamp below the last station
        xq = rn_tortoise(r1 + np.maximum(y, inner.r.min() - r1), r1, inner.r2)
        xq = np.minimum(xq, inner.x[-1])
        dT = inner.T[1] - inner.T[0]
        out = []
        for t in np.atleast_1d(times):
            if t > inner.T_valid.min() + 1e-9:
                raise ValueError(f"t={t} outside the valid interior region")
            j = int(round((t - inner.T[0]) / dT))
            out.append(CubicSpline(inner.x, inner.u[:, j])(xq))
        return np.array(out)


def horizon_regularity_sweep(inner, specs, times, half_width=0.02, n=1024, fit_window=None):
    """Norm time series near r1 and a DecayFit for each spec.

    Args:
        inner: InteriorSolution.
        specs: NormSpec list (their windows are replaced by r1 +- half_width).
        times: snapshot times (valid for the interior solution).
        half_width: window half-width d.
        n: window nodes.
        fit_window: window passed to DecayFitter.

    Returns:
        (records, fits): records[spec_index] is a list of NormRecord; fits
        holds one DecayFit per spec (None when fit_window is None).
    """
    times = np.asarray(times, dtype=float)
    if times.min() < 0 or times.max() > inner.T_valid.min() + 1e-9:
        raise ValueError("snapshot times outside the valid interior region")
    samp = HorizonSampler(half_width, n).fit(inner)
    U = samp.transform(times)
    grid = samp.grid_
    win = (grid[0], grid[-1])
    records, fits = [], []
    for sp in specs:
        sp2 = NormSpec(sp.s, sp.ell, sp.r, sp.j, win)
        vals = [log_sobolev_norm(grid, U[i], sp2, t_star=times[i]) for i in range(len(times))]
        records.append([NormRecord(float(t), v, sp2, n) for t, v in zip(times, vals)])
        fits.append(DecayFitter(window=fit_window).fit(times, vals).result() if fit_window else None)
    return records, fits
