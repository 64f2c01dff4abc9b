"""Per-harmonic 1+1 evolution of the scalar wave equation on the extended metric.

Two solvers share the mode operator

    L u = g^{tt} u_tt + 2h u_tr + (h' + 2h/r) u_t - mu u_rr - (mu' + 2mu/r) u_r
          + l(l+1) u / r^2,

which is the d'Alembertian of a field u(t_*, r) Y_lm in (t_*, r) coordinates.

* ExteriorEvolver: method of lines on a band from just inside the event
  horizon to just beyond the cosmological horizon. Both ends are pure outflow.
  It uses 4th-order centered differences, one-sided differences at the ends,
  RK4 and Kreiss-Oliger dissipation.
* InteriorMarcher: the trapped region r1 < r < r2, where r is a time
  function. The solver marches psi = r u in the tortoise coordinate x from
  data recorded by the exterior run just inside r2, towards the inner horizon.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.signal import find_peaks
from scipy.optimize import brentq
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .spacetime import Spacetime


class EvolutionError(RuntimeError):
    """Non-finite values or an outflow/hyperbolicity violation."""


@dataclass(frozen=True)
class ModeSpec:
    ell: int = 0
    m: int = 0

    def __post_init__(self):
        if int(self.ell) != self.ell or self.ell < 0:
            raise ValueError("ell must be a nonnegative integer")


@dataclass
class WaveCoefficients:
    """Coefficients of L on a radial grid (see module docstring)."""

    r: np.ndarray
    ctt: np.ndarray
    ctr: np.ndarray
    crr: np.ndarray
    ct: np.ndarray
    cr: np.ndarray
    cang: np.ndarray
    ell: int

    @property
    def potential(self):
        return self.ell * (self.ell + 1) * self.cang

    def speeds(self):
        """Characteristic speeds dr/dt_* = -mu/(1+h), mu/(1-h) (roots of the principal symbol)."""
        a, b, c = self.ctt, self.ctr, self.crr
        disc = np.sqrt(b * b - 4 * a * c)
        # a lam^2 - b lam + c = 0 for lam = dr/dt of characteristics
        return np.stack([(b - disc) / (2 * a), (b + disc) / (2 * a)])

    def apply(self, u, ut, utt, D1, D2=None):
        """Apply L to a field given its time derivatives and a radial derivative matrix."""
        ur = D1 @ u
        urr = D2 @ u if D2 is not None else D1 @ ur
        utr = D1 @ ut
        return (self.ctt * utt + self.ctr * utr + self.crr * urr + self.ct * ut
                + self.cr * ur + self.potential * u)


def assemble_wave_operator(spacetime, mode, r, check_outflow=True):
    """Coefficient table of the mode operator sampled on r.

    Args:
        spacetime: Spacetime bundle.
        mode: ModeSpec.
        r: radial nodes (ascending).
        check_outflow: require both characteristic speeds to point out of the
            domain at the two ends.
    """
    r = np.asarray(r, dtype=float)
    maps, met = spacetime.maps, spacetime.metric
    mu, dmu = met.mu(r), met.dmu(r)
    h, dh = maps.h(r), maps.dh(r)
    gtt = maps.gtt(r)
    if np.any(~(gtt > 0)):
        i = int(np.nonzero(~(gtt > 0))[0][0])
        raise EvolutionError(f"dt_* not timelike at node {i} (r={r[i]:.6g})")
    co = WaveCoefficients(r=r, ctt=gtt, ctr=2 * h, crr=-mu, ct=dh + 2 * h / r,
                          cr=-(dmu + 2 * mu / r), cang=1.0 / r**2, ell=mode.ell)
    if check_outflow:
        sp = co.speeds()
        if not np.all(sp[:, 0] < 0):
            raise EvolutionError(f"inflow at node 0 (r={r[0]:.6g}), speeds {sp[:, 0]}")
        if not np.all(sp[:, -1] > 0):
            raise EvolutionError(f"inflow at node {len(r) - 1} (r={r[-1]:.6g}), speeds {sp[:, -1]}")
    return co


# -- stencils ---------------------------------------------------------------

def fd_weights(z, x, m):
    """Fornberg weights for the m-th derivative at z from nodes x."""
    n = len(x)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


_EDGE = np.array([fd_weights(float(i), np.arange(6.0), 1) for i in range(2)])


def d1(u, dx):
    """4th-order first derivative; one-sided 6-point stencils at the two edge pairs."""
    out = np.empty_like(u)
    out[2:-2] = (u[:-4] - 8 * u[1:-3] + 8 * u[3:-1] - u[4:]) / (12 * dx)
    out[:2] = _EDGE @ u[:6] / dx
    out[-2:] = -(_EDGE[::-1, ::-1] @ u[-6:]) / dx
    return out


def ko6(u, dx, eps):
    """Kreiss-Oliger dissipation eps/(64 dx) delta^6 at interior nodes."""
    out = np.zeros_like(u)
    out[3:-3] = (u[:-6] - 6 * u[1:-5] + 15 * u[2:-4] - 20 * u[3:-3] + 15 * u[4:-2]
                 - 6 * u[5:-1] + u[6:]) * (eps / (64 * dx))
    return out


def rk4_step(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


# -- data -----------------------------------------------------------------

@dataclass
class Field:
    t: float
    r: np.ndarray
    u: np.ndarray
    ut: np.ndarray

    def __post_init__(self):
        if len(self.r) < 201:
            raise ValueError("a Field needs at least 201 nodes")


@dataclass(frozen=True)
class InitialData:
    """Gaussian pulse A exp(-((r-rc)/w)^2).

    Args:
        center: rc, inside the exterior.
        width: w > 0.
        amplitude: A (may be complex).
        kind: "time-symmetric" (u_t = 0) or "ingoing".
    """

    center: float
    width: float = 0.5
    amplitude: complex = 1.0
    kind: str = "time-symmetric"

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")
        if self.kind not in ("time-symmetric", "ingoing"):
            raise ValueError(f"unknown data kind {self.kind!r}")

    @classmethod
    def default(cls, spacetime, **kw):
        return cls(center=spacetime.radii[2] + 2.0, **kw)

    @classmethod
    def generic_family(cls, spacetime, seed, size=3, kind="ingoing"):
        """Seeded family with randomized center and width."""
        rng = np.random.default_rng(seed)
        r2 = spacetime.radii[2]
        hi = min(spacetime.ext.rm, r2 + 4.0)
        out = []
        for _ in range(size):
            out.append(cls(center=float(rng.uniform(r2 + 1.5, hi)),
                           width=float(rng.uniform(0.35, 0.7)), kind=kind))
        return out


# -- exterior method of lines ------------------------------------------------

@dataclass
class EvolutionResult:
    t: np.ndarray
    probes: dict
    snapshots: list = field(default_factory=list)
    inner_t: np.ndarray = None
    inner_u: np.ndarray = None
    inner_ur: np.ndarray = None
    inner_r: float = None
    final: Field = None


class ExteriorEvolver:
    """Method-of-lines solver on [r2 - lo_off, r3 + hi_off].

    Args:
        spacetime: Spacetime bundle.
        mode: ModeSpec.
        n: number of uniform radial nodes.
        cfl: time step as a fraction of dr / max characteristic speed.
        ko: Kreiss-Oliger coefficient.
        lo_off, hi_off: collar widths inside r2 and beyond r3.
    """

    def __init__(self, spacetime, mode=ModeSpec(), n=1601, cfl=0.5, ko=0.05,
                 lo_off=0.4, hi_off=1.0, sample_dt=0.5):
        if n < 201:
            raise ValueError("n must be at least 201")
        if not 0 < cfl <= 1.0:
            raise ValueError("CFL factor must lie in (0, 1]")
        if ko < 0:
            raise ValueError("ko must be nonnegative")
        self.st, self.mode, self.n, self.cfl, self.ko = spacetime, mode, n, cfl, ko
        r2, r3 = spacetime.radii[2], spacetime.radii[3]
        self.r = np.linspace(r2 - lo_off, r3 + hi_off, n)
        self.dr = self.r[1] - self.r[0]
        self.coef = assemble_wave_operator(spacetime, mode, self.r)
        r = self.r
        self._a = r * r * (-self.coef.crr)
        self._ig = 1.0 / self.coef.ctt
        vmax = np.abs(self.coef.speeds()).max()
        k = int(np.ceil(sample_dt / (cfl * self.dr / vmax)))
        self.dt = sample_dt / k
        self.steps_per_sample = k
        self.sample_dt = sample_dt

    def check_cfl(self, dt):
        vmax = np.abs(self.coef.speeds()).max()
        if dt * vmax / self.dr > 1.0 + 1e-12:
            raise ValueError(f"CFL violated: dt={dt:.4g} exceeds dr/vmax={self.dr / vmax:.4g}")

    def initial_field(self, data):
        r = self.r
        u = data.amplitude * np.exp(-(((r - data.center) / data.width) ** 2))
        if data.kind == "time-symmetric":
            ut = np.zeros_like(u)
        else:
            # u = f(v): u_{t_*} = mu u_r / (1 + h) in (t_*, r)
            h = self.coef.ctr / 2
            ut = -self.coef.crr * d1(u, self.dr) / (1 + h)
        return Field(0.0, r.copy(), u, ut)

    def rhs(self, y):
        n = self.n
        u, P = y[:n], y[n:]
        c, dr, eps = self.coef, self.dr, self.ko
        ur = d1(u, dr)
        Pt = (d1(self._a * ur, dr) / (c.r * c.r) - c.ctr * d1(P, dr) - c.ct * P
              - c.potential * u) * self._ig
        return np.concatenate([P + ko6(u, dr, eps), Pt + ko6(P, dr, eps)])

    def evolve(self, data, T, probes=(), snapshot_times=(), inner_r=None):
        """Evolve to t_* = T.

        Args:
            data: InitialData or Field.
            T: final time (> 0).
            probes: radii recorded every sample_dt (nearest node).
            snapshot_times: times at which full Fields are stored.
            inner_r: if given, record u and u_r at this radius every step
                (boundary data for InteriorMarcher).
        """
        if not T > 0:
            raise ValueError("T must be positive")
        self.check_cfl(self.dt)
        f0 = data if isinstance(data, Field) else self.initial_field(data)
        n, dt = self.n, self.dt
        y = np.concatenate([f0.u, f0.ut])
        idx = {float(p): int(np.argmin(np.abs(self.r - p))) for p in probes}
        nsamp = int(round(T / self.sample_dt))
        nsteps = nsamp * self.steps_per_sample
        ts = f0.t + self.sample_dt * np.arange(nsamp + 1)
        rec = {p: np.empty(nsamp + 1, dtype=y.dtype) for p in idx}
        for p, i in idx.items():
            rec[p][0] = y[i]
        snaps, want = [], sorted(snapshot_times)
        if inner_r is not None:
            ia = int(np.argmin(np.abs(self.r - inner_r)))
            if not 3 <= ia <= n - 4:
                raise ValueError("inner_r must lie at least 3 nodes inside the grid")
            iu = np.empty(nsteps + 1, dtype=y.dtype)
            iur = np.empty(nsteps + 1, dtype=y.dtype)
            iu[0], iur[0] = y[ia], d1(y[:n], self.dr)[ia]
        for k in range(1, nsteps + 1):
            y = rk4_step(self.rhs, y, dt)
            t = f0.t + k * dt
            if inner_r is not None:
                iu[k] = y[ia]
                iur[k] = d1(y[:n], self.dr)[ia]
            if k % self.steps_per_sample == 0:
                s = k // self.steps_per_sample
                if not np.all(np.isfinite(y)):
                    raise EvolutionError(f"non-finite values at step {k} (t={t:.4g})")
                for p, i in idx.items():
                    rec[p][s] = y[i]
                while want and want[0] <= t + 1e-9:
                    want.pop(0)
                    snaps.append(Field(t, self.r.copy(), y[:n].copy(), y[n:].copy()))
        res = EvolutionResult(t=ts, probes={p: rec[p] for p in idx}, snapshots=snaps,
                              final=Field(f0.t + nsteps * dt, self.r.copy(), y[:n].copy(), y[n:].copy()))
        if inner_r is not None:
            res.inner_t = f0.t + dt * np.arange(nsteps + 1)
            res.inner_u, res.inner_ur, res.inner_r = iu, iur, float(self.r[ia])
        return res


def evolve(spacetime, data, T, mode=ModeSpec(), n=1601, **kw):
    """Convenience wrapper: build an ExteriorEvolver and run it."""
    probes = kw.pop("probes", ())
    snaps = kw.pop("snapshot_times", ())
    inner_r = kw.pop("inner_r", None)
    ev = ExteriorEvolver(spacetime, mode, n=n, **kw)
    return ev.evolve(data, T, probes=probes, snapshot_times=snaps, inner_r=inner_r)


def energy_norm(f, weights=None):
    """Discrete energy-type norm sqrt(sum(|u_t|^2 + |u_r|^2 + |u|^2) dr)."""
    dr = f.r[1] - f.r[0]
    ur = d1(f.u, dr)
    return float(np.sqrt(np.sum(np.abs(f.ut) ** 2 + np.abs(ur) ** 2 + np.abs(f.u) ** 2) * dr))


def self_convergence(spacetime, data, T=10.0, n=401, mode=ModeSpec(), **kw):
    """Convergence order from three resolutions n, 2n-1, 4n-3 (nested grids).

    Returns:
        (order, diffs) where diffs are the energy norms of the coarse-node
        differences between successive resolutions.
    """
    fs = []
    for k in range(3):
        nk = (n - 1) * 2**k + 1
        ev = ExteriorEvolver(spacetime, mode, n=nk, **kw)
        fs.append(ev.evolve(data, T).final)
    diffs = []
    for a, b in ((fs[0], fs[1]), (fs[1], fs[2])):
        s = (len(b.r) - 1) // (len(a.r) - 1)
        d = Field(a.t, a.r, a.u - b.u[::s], a.ut - b.ut[::s])
        diffs.append(energy_norm(d))
    return float(np.log2(diffs[0] / diffs[1])), diffs


# -- interior marching -------------------------------------------------------

def rn_tortoise(r, r1, r2):
    """x(r) for mu = (r - r1)(r - r2)/r^2, so that dx/dr = 1/mu."""
    r = np.asarray(r, dtype=float)
    return (r + r2 * r2 / (r2 - r1) * np.log(np.abs(r - r2))
            - r1 * r1 / (r2 - r1) * np.log(np.abs(r - r1)))


def rn_tortoise_inverse(x, r1, r2):
    """Invert rn_tortoise on (r1, r2), solving in s = log(r - r1)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    w = r2 - r1

    def xs(s):
        y = np.exp(s)
        return r1 + y + r2 * r2 / w * np.log(w - y) - r1 * r1 / w * s

    top = np.log(w)
    for i, xi in enumerate(x):
        lo, b = -700.0, top - 1.0
        while xs(b) - xi > 0:
            b = 0.5 * (b + top)
        out[i] = r1 + np.exp(brentq(lambda s: xs(s) - xi, lo, b, xtol=1e-15, rtol=1e-15))
    return out


@dataclass
class InteriorSolution:
    """psi = r u on stations x_k (rows) and times T (columns)."""

    x: np.ndarray
    r: np.ndarray
    T: np.ndarray
    psi: np.ndarray
    psiT: np.ndarray
    T_valid: np.ndarray
    r1: float
    r2: float

    @property
    def u(self):
        return self.psi / self.r[:, None]

    def snapshot(self, t):
        """u(r) at time t on stations (ordered by increasing r); requires t valid at every station."""
        j = int(round((t - self.T[0]) / (self.T[1] - self.T[0])))
        if t > self.T_valid.min() + 1e-9:
            raise ValueError(f"t={t} outside the valid region (<= {self.T_valid.min():.4g})")
        return self.r[::-1], self.u[::-1, j]

    def sup_near(self, width, times=None):
        """sup over r in (r1, r1 + width) of |u|, for each valid time index."""
        rows = self.r < self.r1 + width
        ok = self.T <= self.T_valid[rows].min() + 1e-9
        return self.T[ok], np.abs(self.u[rows][:, ok]).max(axis=0)

    def sup_dt_near(self, width):
        """sup over r in (r1, r1 + width) of |D_t u|, on the same times as sup_near."""
        rows = self.r < self.r1 + width
        ok = self.T <= self.T_valid[rows].min() + 1e-9
        return self.T[ok], np.abs(self.psiT[rows][:, ok] / self.r[rows][:, None]).max(axis=0)

    def probe(self, rp):
        """u(t) at the station closest to rp, restricted to valid times."""
        i = int(np.argmin(np.abs(self.r - rp)))
        ok = self.T <= self.T_valid[i] + 1e-9
        return self.T[ok], self.u[i, ok], self.psiT[i, ok] / self.r[i]


class InteriorMarcher:
    """March psi = r u in x from just inside r2 to r1 + y_end.

    In (t_*, x) the mode equation reads

        psi_xx = 2h psi_tx + h_x psi_t + (1 - h^2) psi_tt + V psi,
        V = mu (l(l+1)/r^2 + mu'/r),  h_x = mu h'.

    Characteristic slopes dt/dx are -(1 + h) and 1 - h. Data enter at the
    start station from the exterior run. Values for t < 0 vanish.

    Args:
        spacetime: Spacetime bundle (vacuum RN between r1 and r2).
        mode: ModeSpec.
        y_end: final distance r - r1.
        cfl: x-step as a fraction of dt / max |slope|.
        ko: Kreiss-Oliger coefficient in t.
        store_every: keep every k-th station.
    """

    def __init__(self, spacetime, mode=ModeSpec(), y_end=1e-9, cfl=0.4, ko=0.05, store_every=1):
        self.st, self.mode = spacetime, mode
        self.r1, self.r2 = spacetime.radii[1], spacetime.radii[2]
        if not 0 < y_end < 0.5 * (self.r2 - self.r1):
            raise ValueError("y_end out of range")
        self.y_end, self.cfl, self.ko, self.store_every = y_end, cfl, ko, store_every

    def _coefs(self, x):
        r = rn_tortoise_inverse(x, self.r1, self.r2)
        met, maps = self.st.metric, self.st.maps
        mu, dmu = met.mu(r), met.dmu(r)
        h, dh = maps.h(r), maps.dh(r)
        ell = self.mode.ell
        V = mu * (ell * (ell + 1) / r**2 + dmu / r)
        return r, h, mu * dh, V

    def march(self, T, u_a, ur_a, r_a):
        """Args:
            T: uniform time grid starting at 0.
            u_a, ur_a: u and u_r at r_a on that grid.
            r_a: start radius, r1 < r_a < r2.
        """
        if not self.r1 < r_a < self.r2:
            raise ValueError("start radius must lie between r1 and r2")
        T = np.asarray(T, dtype=float)
        dT = T[1] - T[0]
        r1, r2 = self.r1, self.r2
        mu_a = float(self.st.metric.mu(np.array([r_a]))[0])
        psi = r_a * np.asarray(u_a)
        phi = mu_a * (np.asarray(u_a) + r_a * np.asarray(ur_a))
        x0 = float(rn_tortoise(r_a, r1, r2))
        x1 = float(rn_tortoise(r1 + self.y_end, r1, r2))
        xs = np.linspace(x0, x1, 2001)
        _, hs, _, _ = self._coefs(xs)
        smax = np.maximum(np.abs(1 + hs), np.abs(1 - hs)).max()
        nx = int(np.ceil((x1 - x0) / (self.cfl * dT / smax)))
        dx = (x1 - x0) / nx
        xg = x0 + dx * np.arange(2 * nx + 1) / 2
        rg, hg, hxg, Vg = self._coefs(xg)
        nT, eps = len(T), self.ko
        pad = 3

        def dT1(f):
            g = np.concatenate([np.zeros(pad, dtype=f.dtype), f])
            return d1(g, dT)[pad:]

        def dTko(f):
            g = np.concatenate([np.zeros(pad, dtype=f.dtype), f])
            return ko6(g, dT, eps)[pad:]

        def rhs_at(k):
            h, hx, V = hg[k], hxg[k], Vg[k]

            def f(y):
                p, q = y[:nT], y[nT:]
                pt = dT1(p)
                qx = 2 * h * dT1(q) + hx * pt + (1 - h * h) * dT1(pt) + V * p
                return np.concatenate([q + dTko(p), qx + dTko(q)])
            return f

        y = np.concatenate([psi, phi])
        keep = [0]
        out_psi = [psi.copy()]
        for s in range(nx):
            k = 2 * s
            f0, fh, f1 = rhs_at(k), rhs_at(k + 1), rhs_at(k + 2)
            k1 = f0(y)
            k2 = fh(y + 0.5 * dx * k1)
            k3 = fh(y + 0.5 * dx * k2)
            k4 = f1(y + dx * k3)
            y = y + dx / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(y)):
                raise EvolutionError(f"non-finite interior values at x-step {s + 1}")
            if (s + 1) % self.store_every == 0 or s + 1 == nx:
                keep.append(k + 2)
                out_psi.append(y[:nT].copy())
        keep = np.array(keep)
        # valid region: information from beyond the last time enters at slope -(1 + h)
        slope = np.maximum(0.0, 1.0 + hg)
        lost = np.concatenate([[0.0], np.cumsum(0.5 * (slope[1:] + slope[:-1]) * (dx / 2))])
        margin = 8 * dT
        Tv = T[-1] - lost[keep] - margin
        P = np.array(out_psi)
        PT = np.array([dT1(p) for p in P])
        return InteriorSolution(x=xg[keep], r=rg[keep], T=T, psi=P, psiT=PT, T_valid=Tv, r1=r1, r2=r2)


def run_hybrid(spacetime, data, T, mode=ModeSpec(), n=1601, probes=(), r_start=None,
               interior=True, ko=0.05, y_end=1e-9, interior_stride=1, store_every=1, interior_dt=None):
    """Exterior evolution followed by interior marching from r_start.

    The marcher's cost grows like T / dt^2 in the interior time step, so on
    fine exterior grids pass interior_dt (e.g. 0.02) to subsample the trace.
    """
    r2 = spacetime.radii[2]
    ev = ExteriorEvolver(spacetime, mode, n=n, ko=ko)
    if r_start is None:
        i = max(3, int(np.searchsorted(ev.r, r2 - 0.15)) - 1)
        r_start = float(ev.r[i])
        if not r_start < r2:
            raise ValueError("grid too coarse to place an interior start station")
    res = ev.evolve(data, T, probes=probes, inner_r=r_start if interior else None)
    inner = None
    if interior:
        s = interior_stride
        if interior_dt is not None:
            s = max(s, int(interior_dt / (res.inner_t[1] - res.inner_t[0]) + 1e-9))
        im = InteriorMarcher(spacetime, mode, y_end=y_end, ko=ko, store_every=store_every)
        inner = im.march(res.inner_t[::s] - res.inner_t[0], res.inner_u[::s], res.inner_ur[::s],
                         res.inner_r)
    return res, inner


# -- decay fits ---------------------------------------------------------------

def local_power_index(t, u):
    """p(t) = -d log|u| / d log t."""
    t, a = np.asarray(t, dtype=float), np.abs(np.asarray(u))
    return -np.gradient(np.log(np.maximum(a, 1e-300)), np.log(t))


@dataclass
class DecayFit:
    window: tuple
    exponent: float
    ci: float
    residual: float
    p_t: np.ndarray
    p_curve: np.ndarray
    envelope: bool
    decade: bool
    global_exponent: float = float("nan")

    @property
    def claimable(self):
        return self.decade


class DecayFitter(RegressorMixin, BaseEstimator):
    """Power-law tail |u| ~ C t^{-p} from sliding least-squares slopes in log-log.

    The slope is fitted over sub-windows of equal log-width sliding across the
    window; the slopes give the p(t) curve and the last sub-window gives the
    tail estimate. Sign changes mark a transient (ringdown) and are handled per
    sub-window; bumps of |u| without sign changes are treated as a persistent
    modulation and fitted through their peaks over the whole window. The
    whole-window slope is kept as ``global_exponent_``.

    Args:
        window: (t_lo, t_hi); None uses the whole series.
        envelope: "auto" fits through the local maxima of log|u| about the trend
            when the window shows sign changes or repeated bumps; True/False force it.
        osc_tol: prominence (in log|u|) of a bump about the trend that
            counts as oscillation.
        tail_frac: log-width of the sliding sub-window as a fraction of the
            log-width of the window. 1 disables sliding.
    """

    def __init__(self, window=None, envelope="auto", osc_tol=0.1, tail_frac=0.2):
        self.window = window
        self.envelope = envelope
        self.osc_tol = osc_tol
        self.tail_frac = tail_frac

    @staticmethod
    def _slope(lt, la):
        if len(lt) >= 3:
            fit = stats.linregress(lt, la)
            resid = float(np.sqrt(np.mean((la - fit.intercept - fit.slope * lt) ** 2)))
            return fit.slope, fit.stderr, fit.intercept, resid
        slope = (la[1] - la[0]) / (lt[1] - lt[0])
        return slope, np.inf, la[0] - slope * lt[0], 0.0

    def _points(self, lt, la, re):
        """Indices used for the fit, oscillation flag, envelope flag."""
        sign_change = bool(np.any(np.sign(re[:-1]) * np.sign(re[1:]) < 0))
        # oscillation: repeated bumps of log|u| about the straight-line trend
        trend = np.polyfit(lt, la, 1)
        peaks, _ = find_peaks(la - np.polyval(trend, lt), prominence=self.osc_tol)
        oscillating = sign_change or len(peaks) >= 2
        use_env = oscillating if self.envelope == "auto" else bool(self.envelope)
        idx = np.arange(len(lt))
        if use_env:
            peaks, _ = find_peaks(la - np.polyval(trend, lt))
            if len(peaks) >= 2:
                idx = peaks
        return idx, oscillating, use_env

    def fit(self, t, u):
        if not 0 < self.tail_frac <= 1:
            raise ValueError("tail_frac must lie in (0, 1]")
        t = np.asarray(t, dtype=float).ravel()
        u = np.asarray(u).ravel()
        if len(t) != len(u):
            raise ValueError("t and u must have equal length")
        lo, hi = self.window if self.window is not None else (t[t > 0].min(), t.max())
        if lo <= 0 or hi <= lo or lo < t.min() - 1e-9 or hi > t.max() + 1e-9:
            raise ValueError("window must lie inside the recorded positive times")
        m = (t >= lo - 1e-9) & (t <= hi + 1e-9)
        tw, uw = t[m], u[m]
        if len(tw) < 3:
            raise ValueError("window holds fewer than 3 samples")
        lt, la = np.log(tw), np.log(np.maximum(np.abs(uw), 1e-300))
        re = np.real(uw)
        gidx, oscillating, use_env = self._points(lt, la, re)
        gslope, gse, gicpt, gres = self._slope(lt[gidx], la[gidx])
        # sliding sub-windows of fixed log-width; each decides its own envelope
        L = self.tail_frac * (lt[-1] - lt[0])
        pt, pc, last, last_env = [], [], None, use_env
        ends = np.flatnonzero(lt >= lt[0] + 0.999 * L)
        for k in ends:
            sub = np.flatnonzero((lt >= lt[k] - L - 1e-12) & (lt <= lt[k]))
            if len(sub) < 3:
                continue
            sidx, _, senv = self._points(lt[sub], la[sub], re[sub])
            if len(sidx) < 3:
                continue
            last = self._slope(lt[sub][sidx], la[sub][sidx])
            last_env = senv
            pt.append(tw[k])
            pc.append(-last[0])
        sign_change = bool(np.any(np.sign(re[:-1]) * np.sign(re[1:]) < 0))
        if last is None or (not last_env and use_env and not sign_change):
            # no fit window, or log-periodic bumps slower than the sub-window:
            # the whole-window envelope is the better tail estimate
            last, last_env = (gslope, gse, gicpt, gres), use_env
        slope, se, icpt, resid = last
        self.exponent_ = float(-slope)
        self.ci_ = float(1.96 * se)
        self.intercept_ = float(icpt)
        self.residual_ = resid
        self.global_exponent_ = float(-gslope)
        self.global_ci_ = float(1.96 * gse)
        self.p_t_, self.p_curve_ = np.array(pt), np.array(pc)
        self.local_p_ = local_power_index(tw, uw)
        self.envelope_ = bool(last_env)
        self.oscillating_ = bool(oscillating)
        self.decade_ = bool(hi / lo >= 10.0 - 1e-9)
        self.window_ = (float(lo), float(hi))
        return self

    def predict(self, t):
        check_is_fitted(self, "exponent_")
        t = np.asarray(t, dtype=float)
        return np.exp(self.intercept_) * t ** (-self.exponent_)

    def score(self, t, u, sample_weight=None):
        """R^2 in log-log coordinates."""
        check_is_fitted(self, "exponent_")
        la = np.log(np.maximum(np.abs(np.asarray(u)), 1e-300))
        pr = np.log(self.predict(t))
        return float(1 - np.sum((la - pr) ** 2) / np.sum((la - la.mean()) ** 2))

    def result(self):
        check_is_fitted(self, "exponent_")
        return DecayFit(self.window_, self.exponent_, self.ci_, self.residual_, self.p_t_,
                        self.p_curve_, self.envelope_, self.decade_, self.global_exponent_)


def fit_decay(t, u, window=None, envelope="auto", tail_frac=0.2):
    """Fit |u| ~ t^{-p} over window; returns DecayFit with the tail estimate."""
    return DecayFitter(window=window, envelope=envelope, tail_frac=tail_frac).fit(t, u).result()


# -- L-infinity lift -----------------------------------------------------------

@dataclass
class LinftyBound:
    t: np.ndarray
    bound: np.ndarray
    exponent: float


def lift_linfty_bound(t, u, du, fit_window=None):
    """Sup bound from the time derivative.

    For t on the recorded grid with final time T,

        |v(t)| <= |v(T)| + t^{-1/2} (int_t^T s^2 |v'(s)|^2 ds)^{1/2},

    the finite-window form of ||v||_{L^inf(t,inf)} <= t^{-1/2} ||s D_s v||_{L^2(t,inf)}.
    The integral is evaluated by the trapezoidal rule from the top down.

    Args:
        t: increasing positive times.
        u, du: v and its time derivative on t.
        fit_window: window for the exponent of the bound.
    """
    t = np.asarray(t, dtype=float)
    u, du = np.asarray(u), np.asarray(du)
    if u.shape != t.shape or du.shape != t.shape:
        raise ValueError("u, du and t must share one grid")
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t must be positive and increasing")
    g = t * t * np.abs(du) ** 2
    seg = 0.5 * (g[1:] + g[:-1]) * np.diff(t)
    tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    bound = np.abs(u[-1]) + np.sqrt(tail / t)
    exp = np.nan
    if fit_window is not None:
        exp = DecayFitter(window=fit_window, envelope=False).fit(t, bound).exponent_
    return LinftyBound(t, bound, exp)
