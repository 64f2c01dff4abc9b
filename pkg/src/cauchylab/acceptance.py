"""Acceptance suite: twelve quantitative checks with measured vs expected values.

Each check returns a Criterion row. `tolerance_scale` multiplies every
tolerance (0.1 tightens them tenfold); a failed check is reported, never
raised. A time budget stops the suite between checks and flags the report as
partial.
"""

import hashlib
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import RectBivariateSpline

from . import bflow, carter, logsobolev, spectral
from .config import LabConfig
from .evolve import (InitialData, ModeSpec, fit_decay, lift_linfty_bound, run_hybrid,
                     self_convergence)
from .logsobolev import NormSpec, horizon_regularity_sweep
from .spacetime import BlackHoleParams, ExtensionParams, Spacetime, eval_dmu, find_horizons

__all__ = ["Criterion", "AcceptanceReport", "acceptance_suite", "CRITERIA"]


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool
    measured: dict
    expected: str
    tolerance: float
    seconds: float = 0.0
    note: str = ""
    status: str = ""

    def __post_init__(self):
        if not self.status:
            self.status = "pass" if self.passed else "FAIL"

    def line(self):
        m = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{self.status}] {self.number:2d} {self.title}: {m} (expected {self.expected})"

    def as_dict(self):
        return {"number": self.number, "title": self.title, "status": self.status,
                "passed": bool(self.passed), "measured": _jsonable(self.measured),
                "expected": self.expected, "tolerance": self.tolerance,
                "seconds": round(self.seconds, 1), "note": self.note}


@dataclass
class AcceptanceReport:
    rows: list = field(default_factory=list)
    partial: bool = False

    @property
    def passed(self):
        return all(r.passed for r in self.rows) and not self.partial

    def table(self):
        return "\n".join(r.line() for r in self.rows)

    def as_dict(self):
        return {"partial": self.partial, "criteria": [r.as_dict() for r in self.rows]}


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


class _Context:
    """Shared runs, computed on first use."""

    def __init__(self, cfg):
        self.cfg = cfg
        self._cache = {}

    def get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def default_spacetime(self):
        c = self.cfg
        p = BlackHoleParams(c["blackhole.mass"], c["blackhole.charge"],
                            cosmological_constant=c["blackhole.cosmological_constant"])
        ext = ExtensionParams.default(p, c["extension.r0frac"], c["extension.dfrac"],
                                      c["extension.kappa0"], c["extension.rm"])
        return self.get("st", lambda: Spacetime(p, ext))

    def price_spacetime(self, **ext_kw):
        c = self.cfg
        p = BlackHoleParams(c["blackhole.mass"], c["blackhole.charge"],
                            cosmological_constant=c["price.cosmological_constant"])
        key = ("price_st", tuple(sorted(ext_kw.items())))
        return self.get(key, lambda: Spacetime(p, ExtensionParams.default(p, rm=c["price.rm"], **ext_kw)))

    def price_data(self, st):
        c = self.cfg
        return InitialData(center=st.radii[2] + c["evolve.data_offset"], width=c["evolve.data_width"],
                           kind=c["evolve.data_kind"])

    def price_run(self, ell=0, interior=True):
        def go():
            st = self.price_spacetime()
            return run_hybrid(st, self.price_data(st), self.cfg["price.T"], mode=ModeSpec(ell),
                              probes=tuple(self.cfg["evolve.probes"]), n=self.cfg["evolve.n"],
                              interior=interior, ko=self.cfg["evolve.ko"])
        return self.get(("price", ell, interior), go)

    def alpha(self):
        res, _ = self.price_run(0)
        p0 = self.cfg["evolve.probes"][0]
        return fit_decay(res.t, res.probes[p0], self.cfg["price.fit_window"]).exponent


def c01_horizons(ctx, tol):
    t0 = time.perf_counter()
    p = BlackHoleParams(1.0, 0.8, cosmological_constant=0.0)
    hs = find_horizons(p)
    r1, r2 = hs.radii
    d = np.sqrt(1 - 0.64)
    k = lambda r: abs(2 / r**2 - 2 * 0.64 / r**3) / 2
    dt = time.perf_counter() - t0
    errs = [abs(r1 - (1 - d)), abs(r2 - (1 + d)), abs(hs.kappas[0] - 3.75), abs(hs.kappas[1] - k(1 + d)),
            abs(hs.kappas[1] - abs(float(eval_dmu(p, np.array([1.6]))[0])) / 2)]
    ok = max(errs) < 1e-10 * tol and dt < 1.0
    return Criterion(1, "horizon algebra", ok,
                     {"r1": r1, "r2": r2, "kappa1": hs.kappas[0], "kappa2": hs.kappas[1],
                      "max_err": max(errs), "runtime_s": dt},
                     "r=(0.4, 1.6), kappa1=3.75 to 1e-10, < 1 s", 1e-10 * tol)


def c02_price(ctx, tol):
    w = ctx.cfg["price.fit_window"]
    p0 = ctx.cfg["evolve.probes"][0]
    a0 = ctx.alpha()
    res1, _ = ctx.price_run(1, interior=False)
    a1 = fit_decay(res1.t, res1.probes[p0], w).exponent
    ok = abs(a0 - 3) <= 0.15 * tol and abs(a1 - 5) <= 0.3 * tol
    return Criterion(2, "Price tail", ok, {"alpha_l0": a0, "alpha_l1": a1},
                     "3 +- 0.15 (l=0), 5 +- 0.3 (l=1)", tol)


def c03_sup_bound(ctx, tol):
    _, inner = ctx.price_run(0)
    T, s = inner.sup_near(0.02)
    m = T > 0
    lo = ctx.cfg["price.fit_window"][0]
    e = fit_decay(T[m], s[m], (lo, T[m][-1])).exponent
    return Criterion(3, "Cauchy-horizon sup bound", e >= 2 - 0.2 * tol, {"sup_exponent": e},
                     ">= 1.8 (upper-bound consistency)", 0.2 * tol)


def _norm_series(inner, specs, times, n, hw, fit_window=None):
    return horizon_regularity_sweep(inner, specs, times, half_width=hw, n=n, fit_window=fit_window)


def c04_regularity(ctx, tol):
    c = ctx.cfg
    a = ctx.alpha()
    t0, t1, dt = c["norms.times"]
    times = np.arange(t0, t1 + 0.5 * dt, dt)
    hw = c["norms.half_width"]
    _, inner = ctx.price_run(0)
    lo = c["price.fit_window"][0]
    recs, fits = _norm_series(inner, [NormSpec(0.5, 0.6)], times, c["norms.n"], hw, (lo, t1))
    e_log = fits[0].exponent
    ok_log = e_log >= a - 1.5 - 0.2 * tol and np.all(np.isfinite([r.value for r in recs[0]]))
    # H^1 along each seeded generic run
    st = ctx.price_spacetime()
    growth = []
    for sd in (s + c["run.seed"] for s in c["norms.generic_seeds"]):
        d = InitialData.generic_family(st, sd, size=1)[0]
        _, inn = run_hybrid(st, d, c["price.T"], n=c["evolve.n"], ko=c["evolve.ko"])
        r1, _ = _norm_series(inn, [NormSpec(1.0, 0.0)], times, c["norms.n"], hw)
        v = np.array([x.value for x in r1[0]])
        growth.append(float(v.max() / v[0]))
    ok_h1 = min(growth) >= 10
    # threshold bracketing under window refinement at a late time
    tl = np.array([c["norms.late_time"]])
    specs = [NormSpec(0.4, 0.0), NormSpec(0.6, 0.0), NormSpec(1.0, 0.0)]
    vals = np.array([[r[0].value for r in _norm_series(inner, specs, tl, n, hw)[0]]
                     for n in c["norms.refine_n"]])
    inc = np.abs(np.diff(vals, axis=0))
    ratio = inc[1] / inc[0]
    # contracting increments (ratio < 1) converge; non-contracting ones diverge
    ok_br = ratio[0] < 1 and ratio[1] >= 1
    return Criterion(4, "regularity dichotomy", bool(ok_log and ok_h1 and ok_br),
                     {"log_norm_exponent": e_log, "log_threshold": a - 1.7,
                      "H1_growth": growth, "inc_ratio_H0.4": ratio[0], "inc_ratio_H0.6": ratio[1],
                      "inc_ratio_H1": ratio[2]},
                     "log exponent >= alpha-1.7; H1 growth >= 10 (all seeds); "
                     "H0.4 increments contract (ratio < 1), H0.6 do not (ratio >= 1)", tol,
                     note="H1 growth in time is not observed: the windowed H1 norm decays at fixed "
                          "resolution; the loss of H1 shows as resolution divergence (inc_ratio_H1)")


def c05_lift(ctx, tol):
    a = ctx.alpha()
    _, inner = ctx.price_run(0)
    hw = ctx.cfg["norms.half_width"]
    t, su = inner.sup_near(hw)
    _, sdu = inner.sup_dt_near(hw)
    m = t >= 1
    lo = ctx.cfg["price.fit_window"][0]
    # stop at mid-record: the finite-window bound is truncated at the final time
    b = lift_linfty_bound(t[m], su[m], sdu[m], fit_window=(lo, lo + 0.5 * (t[m][-1] - lo)))
    ok = b.exponent >= a - 1 - 0.2 * tol
    return Criterion(5, "sharpened decay via D_t", ok,
                     {"bound_exponent": b.exponent, "alpha": a, "half_width": hw},
                     ">= alpha - 1.2", 0.2 * tol)


def c06_resonances(ctx, tol):
    c = ctx.cfg
    st = ctx.default_spacetime()
    gam = 0.5 * min(st.kappas)
    N, ell = c["resonances.N"], c["resonances.ell"]
    fam = spectral.assemble_family(st, ell, "exterior", N)
    fam2 = spectral.assemble_family(st, ell, "exterior", 2 * N)
    rect = c["resonances.rectangle"]
    sc = spectral.resonance_scan(fam, rect, gamma=gam, deflate=c["resonances.deflate"])
    sc2 = spectral.resonance_scan(fam2, rect, gamma=gam, deflate=c["resonances.deflate"])
    sig = np.array([r.sigma for r in sc.resonances])
    sig2 = np.array([r.sigma for r in sc2.resonances])
    zero = np.abs(sig) < 1e-6
    others_ok = bool(np.all(sig[~zero].imag < 0))
    move = max((float(np.min(np.abs(sig2 - s))) for s in sig), default=0.0) if len(sig2) else np.inf
    rank = spectral.pole_rank(fam, 0.0, c["resonances.rank_radius"])
    _, info = spectral.zero_mode_structure(fam)
    ok = (int(zero.sum()) == 1 and rank == 1 and info["constancy"] < 1e-6 * tol and others_ok
          and move < 1e-3 * tol and len(sig) == len(sig2))
    return Criterion(6, "resonance structure", ok,
                     {"n_zero": int(zero.sum()), "pole_rank": rank, "constancy": info["constancy"],
                      "n_resonances": len(sig), "n_resonances_2N": len(sig2), "max_shift_2N": move,
                      "others_damped": others_ok, "strip_gamma": gam},
                     "one zero mode, rank 1, constant to 1e-6, others Im<0, shift < 1e-3", tol)


def c07_perturbation(ctx, tol):
    c = ctx.cfg
    st = ctx.default_spacetime()
    fam = spectral.assemble_family(st, c["resonances.ell"], "artificial", c["resonances.perturb_N"])
    e = st.ext
    R = spectral.potential_bump(fam.r, e.rQm, e.rQp)
    eps = c["resonances.perturb_eps"] * np.exp(1j * np.pi / 4)
    pr = spectral.perturb_resonance(fam, 0.0, R, [eps])
    im = float(abs(pr.sigma[-1].imag))
    ok = pr.relative_gap < 0.01 * tol and im > 1e-12 and not pr.collision
    return Criterion(7, "resonance perturbation", ok,
                     {"slope_formula": pr.slope_formula, "slope_fd": pr.slope_fd,
                      "relative_gap": pr.relative_gap, "im_sigma_eps": im},
                     "formula vs FD within 1%, Im sigma(eps) != 0", 0.01 * tol)


_PATTERN = {0: ("sink", "unstable"), 1: ("sink", "unstable"), 2: ("source", "stable"), 3: ("source", "stable")}


def c08_radial_sets(ctx, tol):
    c = ctx.cfg
    prods, ok = [], True
    b0, bq, spread = [], [], 0.0
    for q in c["flow.charges"]:
        p = BlackHoleParams(c["blackhole.mass"], q, cosmological_constant=c["blackhole.cosmological_constant"])
        st = Spacetime(p, ExtensionParams.default(p, c["extension.r0frac"], c["extension.dfrac"],
                                                  c["extension.kappa0"], c["extension.rm"]))
        for j in c["flow.horizons"]:
            rep = bflow.radial_set_linearize(st, j, step=c["flow.step"], n_samples=c["flow.samples"])
            cl = rep.classification
            ok &= rep.beta0 > 0 and rep.beta_tilde > 0 and rep.beta_q > 0
            ok &= (cl["boundary"], cl["transversal"]) == _PATTERN[j] and cl["saddle"] and cl["hypotheses"]
            s = np.asarray(rep.beta_tilde_samples)
            spread = max(spread, float(np.ptp(s) / abs(rep.beta_tilde)))
            prods.append(rep.beta_tilde * st.kappas[j])
            b0.append(rep.beta0)
            bq.append(rep.beta_q)
    dev = float(np.ptp(prods))
    ok = bool(ok and spread < 1e-6 * tol and dev < 1e-6 * tol)
    return Criterion(8, "radial-set geometry", ok,
                     {"beta_tilde_kappa": prods, "product_spread": dev, "along_L_spread": spread,
                      "min_beta0": min(b0), "min_beta_q": min(bq)},
                     "beta0, beta~, beta_q > 0; beta~ kappa equal to 1e-6; "
                     "L0, L1 unstable sinks, L2, L3 stable sources", 1e-6 * tol)


def c09_carter(ctx, tol):
    c = ctx.cfg
    rep = carter.commutator_residual(c["carter.mass"], c["carter.a"], seeds=range(c["carter.witnesses"]),
                                     n_points=c["carter.points"], h=c["carter.fd_step"])
    ok = rep.max_residual < 1e-8 * tol and rep.fd_max_disagreement < 1e-6 * tol
    return Criterion(9, "Carter commutation", ok,
                     {"max_residual": rep.max_residual, "points": rep.points,
                      "fd_disagreement": rep.fd_max_disagreement},
                     "residual < 1e-8, exact vs FD < 1e-6", 1e-8 * tol)


def c10_lemma(ctx, tol):
    c = ctx.cfg
    g = np.geomspace(np.log(2), c["lemma.grid_max"], c["lemma.grid_n"])
    ok, worst = True, 0.0
    for ell in c["lemma.ells"]:
        for v, w in c["lemma.vw"]:
            rep = logsobolev.check_interpolation_inequalities(ell, v, w, g, g)
            ok &= rep.ok and all(np.isfinite(list(rep.empirical.values())))
            worst = max(worst, max(rep.empirical[a] / rep.amgm_bound[a] for a in rep.alphas))
    return Criterion(10, "interpolation inequalities", bool(ok),
                     {"max_empirical_over_bound": worst}, "C_l finite and <= AM-GM bound", 0.0)


def _total_shift(st, r):
    return st.maps.F(r) + st.maps.Ftilde(r)


def _interior_gap(A, B):
    """Max |u_B(t, r) - u_A(t + G(r), r)| on B's stations, G the time-function offset."""
    (sa, ia), (sb, ib) = A, B
    re = RectBivariateSpline(ia.x, ia.T, ia.u.real)
    im = RectBivariateSpline(ia.x, ia.T, ia.u.imag) if np.iscomplexobj(ia.u) else None
    out = {}
    for rp in (0.41, 0.45, 0.6, 0.8, 1.0, 1.3):
        k = int(np.argmin(np.abs(ib.r - rp)))
        if ib.x[k] > ia.x[-1] or ib.x[k] < ia.x[0]:
            continue
        G = float(_total_shift(sb, ib.r[k]) - _total_shift(sa, ib.r[k]))
        tv = min(ib.T_valid[k], ia.T_valid.min()) - abs(G)
        m = (ib.T <= tv) & (ib.T + G >= 0)
        v = re(ib.x[k], ib.T[m] + G, grid=False)
        if im is not None:
            v = v + 1j * im(ib.x[k], ib.T[m] + G, grid=False)
        out[round(float(ib.r[k]), 4)] = float(np.max(np.abs(v - ib.u[k, m])))
    return out


def c11_locality(ctx, tol):
    c = ctx.cfg
    T = c["locality.T"]
    p0 = c["evolve.probes"][0]

    def run(n=c["evolve.n"], **kw):
        st = ctx.price_spacetime(**kw)
        res, inn = run_hybrid(st, ctx.price_data(st), T, probes=(p0,), n=n, ko=c["evolve.ko"])
        return st, res, inn

    base = run()
    fine = run(n=2 * c["evolve.n"] - 1)
    ref_int = _interior_gap((base[0], base[2]), (fine[0], fine[2]))
    ref_ext = float(np.max(np.abs(base[1].probes[p0] - fine[1].probes[p0][: len(base[1].t)])))
    worst, gaps = 0.0, []
    for r0f, df, k0 in c["locality.alt_extensions"]:
        alt = run(r0frac=r0f, dfrac=df, kappa0=k0)
        ext = float(np.max(np.abs(alt[1].probes[p0] - base[1].probes[p0])))
        gi = _interior_gap((base[0], base[2]), (alt[0], alt[2]))
        ratios = [gi[r] / ref_int[r] for r in gi if r in ref_int] + [ext / ref_ext]
        worst = max(worst, max(ratios))
        gaps.append({"exterior": ext, **{str(r): v for r, v in gi.items()}})
    return Criterion(11, "locality", worst <= 1.0 * tol,
                     {"max_gap_over_refinement": worst, "exterior_gap": [g["exterior"] for g in gaps]},
                     "extension changes below the n -> 2n refinement difference at every probe", tol)


def _digest_dir(d):
    h = {}
    for f in sorted(Path(d).glob("*")):
        if f.name != "manifest.json":
            h[f.name] = hashlib.sha256(f.read_bytes()).hexdigest()
    return h


def c12_convergence(ctx, tol):
    from .cli import run_tasks

    c = ctx.cfg
    st = ctx.default_spacetime()
    data = InitialData.default(st, width=c["evolve.data_width"], kind=c["evolve.convergence_kind"])
    order, diffs = self_convergence(st, data, T=c["evolve.convergence_T"], n=c["evolve.convergence_n"],
                                    ko=c["evolve.ko"])
    small = c.replace(evolve__T=5.0, evolve__n=401, evolve__interior=False, carter__witnesses=2,
                      carter__points=5, resonances__N=40)
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        run_tasks(small, ["horizons", "evolve", "resonances", "carter"], a)
        run_tasks(small, ["horizons", "evolve", "resonances", "carter"], b)
        same = _digest_dir(a) == _digest_dir(b) and bool(_digest_dir(a))
    ok = order >= 3.5 and same
    return Criterion(12, "self-convergence and determinism", bool(ok),
                     {"order": order, "diffs": diffs, "byte_identical": same},
                     "order >= 3.5, byte-identical reruns", 0.0)


CRITERIA = [c01_horizons, c02_price, c03_sup_bound, c04_regularity, c05_lift, c06_resonances,
            c07_perturbation, c08_radial_sets, c09_carter, c10_lemma, c11_locality, c12_convergence]


def acceptance_suite(cfg=None, only=None, budget=None, log=None):
    """Run the acceptance checks.

    Args:
        cfg: LabConfig (defaults when None).
        only: iterable of criterion numbers to run (all when None).
        budget: wall-clock minutes; checks not started in time are reported as skipped.
        log: optional callable receiving each row as it completes.
    """
    cfg = cfg or LabConfig()
    tol = cfg["accept.tolerance_scale"]
    if not tol > 0:
        raise ValueError("tolerance_scale must be positive")
    budget = cfg["run.budget"] if budget is None else budget
    ctx = _Context(cfg)
    report = AcceptanceReport()
    start = time.perf_counter()
    for k, fn in enumerate(CRITERIA, start=1):
        if only is not None and k not in set(only):
            continue
        if budget and time.perf_counter() - start > 60 * budget:
            report.partial = True
            row = Criterion(k, fn.__name__[4:], False, {}, "", 0.0, status="skipped (budget)")
        else:
            t0 = time.perf_counter()
            try:
                row = fn(ctx, tol)
            except Exception as exc:  # reported, not raised
                row = Criterion(k, fn.__name__[4:], False, {"error": repr(exc)}, "", 0.0, status="error")
            row.seconds = time.perf_counter() - t0
        report.rows.append(row)
        if log:
            log(row)
    return report
