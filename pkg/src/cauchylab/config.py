"""Lab configuration: flat `section.key = value` text.

Grammar (one statement per line):

    # comment                     ; also a comment
    [section]                     keys below are read as section.key
    key = value
    section.key = value           allowed before any [section] header

Values are Python literals (int, float, tuple, list, True/False, None, quoted
strings); anything else is taken as a bare string. Every key must be one of
DEFAULTS and is coerced to the type of its default. Parsing uses configparser.
"""

import ast
import configparser
import hashlib
import json
from dataclasses import dataclass, field

# Lambda of the Price-tail runs: 3(1 - 2/Rc)/Rc^2 with Rc = 200 (r3 close to Rc)
_PRICE_LAMBDA = 3 * (1 - 2 / 200) / 200**2

DEFAULTS = {
    "blackhole.mass": 1.0,
    "blackhole.charge": 0.8,
    "blackhole.cosmological_constant": 0.02,
    "extension.r0frac": 0.55,
    "extension.dfrac": 0.05,
    "extension.kappa0": 1.0,
    "extension.rm": None,
    "evolve.ell": 0,
    "evolve.n": 1601,
    "evolve.cfl": 0.5,
    "evolve.ko": 0.05,
    "evolve.T": 60.0,
    "evolve.probes": (3.0,),
    "evolve.data_offset": 2.0,
    "evolve.data_width": 0.5,
    "evolve.data_kind": "ingoing",
    "evolve.interior": True,
    "evolve.interior_dt": 0.02,
    "evolve.convergence_n": 401,
    "evolve.convergence_T": 10.0,
    "evolve.convergence_kind": "time-symmetric",
    "price.cosmological_constant": _PRICE_LAMBDA,
    "price.rm": 180.0,
    "price.T": 315.0,
    "price.fit_window": (100.0, 300.0),
    "norms.specs": ((0.0, 0.0), (0.5, 0.6), (0.4, 0.0), (0.6, 0.0), (1.0, 0.0)),
    "norms.half_width": 0.02,
    "norms.n": 1024,
    "norms.refine_n": (1024, 4096, 16384),
    "norms.times": (50.0, 300.0, 10.0),
    "norms.late_time": 100.0,
    "norms.generic_seeds": (0, 1, 2),
    "resonances.ell": 0,
    "resonances.N": 96,
    "resonances.band": "exterior",
    "resonances.rectangle": (-1.0, 1.0, -0.3, 0.1),
    "resonances.deflate": 0.9,
    "resonances.rank_radius": 0.05,
    "resonances.perturb_N": 60,
    "resonances.perturb_eps": 1e-3,
    "flow.horizons": (0, 1, 2, 3),
    "flow.step": 1e-6,
    "flow.samples": 50,
    "flow.charges": (0.8, 0.5),
    "carter.mass": 1.0,
    "carter.a": 0.1,
    "carter.witnesses": 20,
    "carter.points": 50,
    "carter.fd_step": 1e-3,
    "carter.ell_max": 20,
    "lemma.ells": (1.0, 2.0),
    "lemma.vw": ((1.0, 1.0), (0.5, 2.0), (2.0, 0.5)),
    "lemma.grid_max": 1e6,
    "lemma.grid_n": 200,
    "locality.alt_extensions": ((0.45, 0.05, 0.7), (0.65, 0.08, 1.4)),
    "locality.T": 60.0,
    "run.seed": 0,
    "run.budget": 0.0,
    "run.out": "lab_out",
    "accept.tolerance_scale": 1.0,
}


class ConfigError(ValueError):
    pass


def _literal(text):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _tuplify(v):
    if isinstance(v, (list, tuple)):
        return tuple(_tuplify(x) for x in v)
    return v


def _coerce(key, value):
    default = DEFAULTS[key]
    if default is None or value is None:
        if value is not None and not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number or None, got {value!r}")
        return None if value is None else float(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected True/False, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        return str(value)
    if isinstance(default, tuple):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            value = (value,)
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{key}: expected a sequence, got {value!r}")
        return _tuplify(value)
    return value


@dataclass
class LabConfig:
    """Resolved configuration; `values` holds every key of DEFAULTS."""

    values: dict = field(default_factory=lambda: dict(DEFAULTS))
    source: str = "<defaults>"

    def __getitem__(self, key):
        return self.values[key]

    def section(self, name):
        p = name + "."
        return {k[len(p):]: v for k, v in self.values.items() if k.startswith(p)}

    def replace(self, **updates):
        """Copy with dotted keys given as section__key=value."""
        vals = dict(self.values)
        for k, v in updates.items():
            key = k.replace("__", ".")
            if key not in DEFAULTS:
                raise ConfigError(f"unknown key {key!r}")
            vals[key] = _coerce(key, v)
        return LabConfig(vals, self.source)

    def canonical(self):
        return json.dumps(self.values, sort_keys=True, separators=(",", ":"))

    def digest(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def validate(self):
        v = self.values
        if v["evolve.n"] < 201:
            raise ConfigError("evolve.n must be at least 201")
        if not 0 < v["evolve.cfl"] <= 1:
            raise ConfigError("evolve.cfl must lie in (0, 1]")
        if len(v["resonances.rectangle"]) != 4:
            raise ConfigError("resonances.rectangle needs (re_min, re_max, im_min, im_max)")
        if v["resonances.band"] not in ("exterior", "artificial"):
            raise ConfigError("resonances.band must be 'exterior' or 'artificial'")
        if any(j not in (0, 1, 2, 3) for j in v["flow.horizons"]):
            raise ConfigError("flow.horizons entries must be in 0..3")
        if len(v["norms.times"]) != 3:
            raise ConfigError("norms.times is (start, stop, step)")
        if not v["evolve.interior_dt"] > 0:
            raise ConfigError("evolve.interior_dt must be positive")
        if v["run.budget"] < 0:
            raise ConfigError("run.budget must be non-negative (0 means unlimited)")
        return self


def parse_config(text, source="<string>"):
    """Parse config text into a validated LabConfig."""
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                   inline_comment_prefixes=("#",), delimiters=("=",))
    cp.optionxform = str
    try:
        cp.read_string("[__top__]\n" + text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    vals = dict(DEFAULTS)
    for sec in cp.sections():
        for k, raw in cp.items(sec):
            key = k if sec == "__top__" else f"{sec}.{k}"
            if key not in DEFAULTS:
                raise ConfigError(f"{source}: unknown key {key!r}")
            vals[key] = _coerce(key, _literal(raw.strip()))
    return LabConfig(vals, source).validate()


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))


def dump_config(cfg):
    """Config text that parses back to cfg (grouped by section)."""
    lines, cur = [], None
    for key in sorted(cfg.values):
        sec, name = key.split(".", 1)
        if sec != cur:
            lines.append(f"\n[{sec}]" if lines else f"[{sec}]")
            cur = sec
        lines.append(f"{name} = {cfg.values[key]!r}")
    return "\n".join(lines) + "\n"
