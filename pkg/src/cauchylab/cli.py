"""Command line entry point: `lab <task> --config <path> [--out dir] [--seed n] [--budget min]`."""

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import DEFAULTS, LabConfig, load_config

TASKS = ("horizons", "evolve", "norms", "resonances", "flow", "carter", "accept")


def _num(x):
    return format(float(x), ".17g")


def write_csv(path, header, columns):
    """RFC-4180 CSV, '.' decimal separator, 17 significant digits."""
    cols = []
    names = []
    for name, c in zip(header, columns):
        c = np.asarray(c)
        if np.iscomplexobj(c):
            cols += [c.real, c.imag]
            names += [f"{name}_re", f"{name}_im"]
        else:
            cols.append(c)
            names.append(name)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_num(v) for v in row])


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1, default=_default)
        fh.write("\n")


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, (complex, np.complexfloating)):
        return [float(o.real), float(o.imag)]
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


class _Runner:
    """Executes tasks against one config; shares the spacetime and the evolution run."""

    def __init__(self, cfg, out):
        self.cfg, self.out = cfg, Path(out)
        self._st = None
        self._run = None

    def spacetime(self):
        from .spacetime import BlackHoleParams, ExtensionParams, Spacetime

        if self._st is None:
            c = self.cfg
            p = BlackHoleParams(c["blackhole.mass"], c["blackhole.charge"],
                                cosmological_constant=c["blackhole.cosmological_constant"])
            ext = ExtensionParams.default(p, c["extension.r0frac"], c["extension.dfrac"],
                                          c["extension.kappa0"], c["extension.rm"])
            self._st = Spacetime(p, ext)
        return self._st

    def evolution(self):
        from .evolve import ExteriorEvolver, InitialData, InteriorMarcher, ModeSpec

        if self._run is None:
            c, st = self.cfg, self.spacetime()
            data = InitialData(center=st.radii[2] + c["evolve.data_offset"], width=c["evolve.data_width"],
                               kind=c["evolve.data_kind"])
            mode = ModeSpec(c["evolve.ell"])
            ev = ExteriorEvolver(st, mode, n=c["evolve.n"], cfl=c["evolve.cfl"], ko=c["evolve.ko"])
            inner_r = None
            if c["evolve.interior"]:
                i = max(3, int(np.searchsorted(ev.r, st.radii[2] - 0.15)) - 1)
                inner_r = float(ev.r[i])
            res = ev.evolve(data, c["evolve.T"], probes=tuple(c["evolve.probes"]), inner_r=inner_r)
            inner = None
            if inner_r is not None:
                # subsample the trace: the marcher cost grows like T / dt^2
                k = max(1, int(c["evolve.interior_dt"] / (res.inner_t[1] - res.inner_t[0]) + 1e-9))
                im = InteriorMarcher(st, mode, ko=c["evolve.ko"])
                inner = im.march(res.inner_t[::k] - res.inner_t[0], res.inner_u[::k], res.inner_ur[::k],
                                 res.inner_r)
            self._run = (res, inner)
        return self._run

    def horizons(self):
        from .spacetime import find_horizons

        st = self.spacetime()
        vac = find_horizons(st.params.vacuum)
        obj = {"radii": list(st.radii), "kappas": list(st.kappas), "signs": list(st.maps.signs),
               "vacuum_radii": list(vac.radii), "vacuum_kappas": list(vac.kappas),
               "extension": {k: getattr(st.ext, k) for k in ("r0", "rQm", "rQp", "delta", "rm", "kappa0")}}
        write_json(self.out / "horizons.json", obj)
        return ["horizons.json"]

    def evolve(self):
        res, inner = self.evolution()
        names = [f"u(r={p:g})" for p in res.probes]
        write_csv(self.out / "evolve_probes.csv", ["t"] + names, [res.t] + list(res.probes.values()))
        files = ["evolve_probes.csv"]
        if inner is not None:
            T, s = inner.sup_near(self.cfg["norms.half_width"])
            write_csv(self.out / "evolve_sup_near_r1.csv", ["t", "sup_abs_u"], [T, s])
            files.append("evolve_sup_near_r1.csv")
        return files

    def norms(self):
        from .logsobolev import NormSpec, horizon_regularity_sweep

        c = self.cfg
        _, inner = self.evolution()
        if inner is None:
            raise ValueError("norms need evolve.interior = True")
        t0, t1, dt = c["norms.times"]
        tmax = float(inner.T_valid.min())
        times = np.arange(t0, min(t1, tmax) + 1e-9, dt)
        if len(times) == 0:
            raise ValueError(f"no norm times below the valid interior time {tmax:.4g}")
        specs = [NormSpec(s, l) for s, l in c["norms.specs"]]
        recs, _ = horizon_regularity_sweep(inner, specs, times, half_width=c["norms.half_width"], n=c["norms.n"])
        write_csv(self.out / "norms.csv", ["t"] + [sp.label for sp in specs],
                  [times] + [[r.value for r in rc] for rc in recs])
        return ["norms.csv"]

    def resonances(self):
        from .spectral import assemble_family, pole_rank, resonance_scan, zero_mode_structure

        c, st = self.cfg, self.spacetime()
        fam = assemble_family(st, c["resonances.ell"], c["resonances.band"], c["resonances.N"])
        gam = 0.5 * min(st.kappas)
        sc = resonance_scan(fam, c["resonances.rectangle"], gamma=gam, deflate=c["resonances.deflate"])
        _, info = zero_mode_structure(fam)
        obj = {"rectangle": list(sc.rectangle), "clipped": sc.clipped, "strip_gamma": gam,
               "resonances": [r.as_dict() for r in sc.resonances],
               "deflated": [r.as_dict() for r in sc.deflated],
               "zero_mode": {"constancy": info["constancy"], "certificate": info["certificate"],
                             "pole_rank": pole_rank(fam, 0.0, c["resonances.rank_radius"])}}
        write_json(self.out / "resonances.json", obj)
        return ["resonances.json"]

    def flow(self):
        from .bflow import radial_set_linearize

        c, st = self.cfg, self.spacetime()
        out = []
        for j in c["flow.horizons"]:
            rep = radial_set_linearize(st, j, step=c["flow.step"], n_samples=c["flow.samples"],
                                       seed=c["run.seed"])
            out.append({"j": j, "r": rep.r, "beta0": rep.beta0, "beta_tilde": rep.beta_tilde,
                        "beta_tilde_kappa": rep.beta_tilde * st.kappas[j], "beta_q": rep.beta_q,
                        "eigenvalues": [[float(np.real(e)), float(np.imag(e))] for e in rep.eigenvalues],
                        "classification": rep.classification})
        write_json(self.out / "flow.json", {"radial_sets": out})
        return ["flow.json"]

    def carter(self):
        from .carter import commutator_residual, mode_regularity_witness

        c = self.cfg
        s = c["run.seed"]
        rep = commutator_residual(c["carter.mass"], c["carter.a"], seeds=range(s, s + c["carter.witnesses"]),
                                  n_points=c["carter.points"], h=c["carter.fd_step"])
        obj = rep.as_dict()
        modes = []
        for m in (0, 1, 2):
            w = mode_regularity_witness(c["carter.mass"], c["carter.a"], m, ell_max=c["carter.ell_max"])
            modes.append({"m": m, "eigenvalues": w.eigenvalues, "real": w.real, "lower_bound": w.lower_bound})
        obj["angular_modes"] = modes
        write_json(self.out / "carter.json", obj)
        return ["carter.json"]

    def accept(self):
        from .acceptance import acceptance_suite

        rep = acceptance_suite(self.cfg, log=lambda row: print(row.line(), flush=True))
        write_json(self.out / "acceptance.json", rep.as_dict())
        self.accept_passed = rep.passed
        return ["acceptance.json"]


def run_tasks(cfg, tasks, out):
    """Run tasks in order and write outputs plus manifest.json into out.

    Returns:
        The manifest dict. Task errors are recorded with their context, not raised.
    """
    bad = [t for t in tasks if t not in TASKS]
    if bad:
        raise ValueError(f"unknown task(s) {bad}; choose from {TASKS}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    runner = _Runner(cfg, out)
    status, files = {}, {}
    t_all = time.perf_counter()
    for t in tasks:
        t0 = time.perf_counter()
        try:
            for f in getattr(runner, t)():
                files[f] = hashlib.sha256((out / f).read_bytes()).hexdigest()
            ok = getattr(runner, "accept_passed", True) if t == "accept" else True
            status[t] = {"status": "ok" if ok else "criteria failed"}
        except Exception as exc:
            status[t] = {"status": "error", "error": f"{t}: {type(exc).__name__}: {exc}"}
        status[t]["seconds"] = round(time.perf_counter() - t0, 3)
    manifest = {"config_hash": cfg.digest(), "config": cfg.values, "config_source": cfg.source,
                "defaults_used": sorted(k for k in DEFAULTS if cfg.values[k] == DEFAULTS[k]),
                "code_version": __version__, "tasks": status, "outputs": files,
                "wall_clock_s": round(time.perf_counter() - t_all, 3)}
    write_json(out / "manifest.json", manifest)
    return manifest


def main(argv=None):
    ap = argparse.ArgumentParser(prog="lab", description="Cauchy-horizon numerical lab")
    ap.add_argument("task", nargs="+", choices=TASKS)
    ap.add_argument("--config", help="config file (key = value with [sections])")
    ap.add_argument("--out", help="output directory (default: run.out)")
    ap.add_argument("--seed", type=int, help="overrides run.seed")
    ap.add_argument("--budget", type=float, help="wall-clock minutes for accept (overrides run.budget)")
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else LabConfig()
        if args.seed is not None:
            cfg = cfg.replace(run__seed=args.seed)
        if args.budget is not None:
            cfg = cfg.replace(run__budget=args.budget)
    except (OSError, ValueError) as exc:
        print(f"lab: {exc}", file=sys.stderr)
        return 2
    out = args.out or cfg["run.out"]
    m = run_tasks(cfg, args.task, out)
    for t, s in m["tasks"].items():
        print(f"{t}: {s['status']}" + (f" ({s['error']})" if "error" in s else ""))
    return 0 if all(s["status"] == "ok" for s in m["tasks"].values()) else 1


if __name__ == "__main__":
    sys.exit(main())
