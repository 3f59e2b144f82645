"""Run configuration: defaults, JSON loading, dotted overrides and validation."""
import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

DEFAULTS = {
    "m": 3,
    "motions": [{"phi": [math.pi / 4, math.pi / 4, math.pi / 2], "lambda": 0.0}],
    "lawlor": {"angles": None, "A": None, "params": None, "a_min": 4.0, "tol": 1e-11, "y_max": 60.0, "n": 2001},
    "gluing": {"tau": 0.9, "eps": 0.5, "R_hat": 0.6, "t": 0.05,
               "ts": [0.02, 0.03, 0.045, 0.067, 0.1], "sigma_ts": [0.02, 0.04, 0.08], "quad_ts": [0.02, 0.04, 0.08]},
    "weights": {"k": 1, "p": 2.0, "beta": -0.5, "gamma": -0.5},
    "mesh": {"n_polar": 12, "panels_per_unit": 6.0, "order": 4, "refine": 1,
             "n_theta": 24, "per_unit": 12.0},
    "truncation": {"R_prime": None, "R_out": 3.0},
    "solver": {"max_iter": 5, "tol": 1e-2, "linear": "exact", "relinearize": False, "chart_factor": 0.1,
               "trials": 20},
    "export": {"projection": [0, 1, 2], "n_polar": 8, "panels_per_unit": 3.0},
    "output_dir": None,
    "seed": 0,
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in out:
            raise ConfigError(f"unknown config key '{k}'", key=k)
        if isinstance(out[k], dict) and isinstance(v, dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def apply_override(cfg, assignment):
    """Apply ``key.path=value`` where value is parsed as JSON when possible."""
    if "=" not in assignment:
        raise ConfigError(f"override '{assignment}' is not of the form key=value")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    parts = key.split(".")
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            raise ConfigError(f"unknown config key '{key}'", key=key)
        node = node[p]
    if parts[-1] not in node:
        raise ConfigError(f"unknown config key '{key}'", key=key)
    node[parts[-1]] = value
    return cfg


def _check(cond, message, **payload):
    if not cond:
        raise ConfigError(message, **payload)


def _positive_list(values, name):
    _check(isinstance(values, list) and len(values) > 0, f"{name} must be a nonempty list")
    _check(all(isinstance(v, (int, float)) and 0 < v < 1 for v in values), f"{name} entries must lie in (0, 1)")


def validate(cfg):
    """Raise ConfigError naming the first violated constraint."""
    m = cfg["m"]
    _check(isinstance(m, int) and m >= 3, "m must be an integer >= 3", m=m)
    _check(isinstance(cfg["motions"], list) and cfg["motions"], "motions must be a nonempty list")
    for i, mo in enumerate(cfg["motions"]):
        _check(isinstance(mo, dict) and "phi" in mo, f"motions[{i}] needs a 'phi' list")
        phi = mo["phi"]
        _check(len(phi) == m, f"motions[{i}].phi must have m = {m} entries")
        _check(all(0 < p < math.pi for p in phi), f"motions[{i}].phi entries must lie in (0, pi)")
        _check(abs(sum(phi) - math.pi) < 1e-9, f"motions[{i}].phi must sum to pi", sum=sum(phi))
        _check(isinstance(mo.get("lambda", 0.0), (int, float)), f"motions[{i}].lambda must be a number")
    lw = cfg["lawlor"]
    if lw["params"] is not None:
        _check(len(lw["params"]) == m and all(a > 0 for a in lw["params"]),
               f"lawlor.params must be {m} positive numbers")
    if lw["angles"] is not None:
        ang = lw["angles"]
        _check(len(ang) == m and all(0 < p < math.pi for p in ang), f"lawlor.angles must be {m} values in (0, pi)")
        _check(abs(sum(ang) - math.pi) < 1e-9, "lawlor.angles must sum to pi")
    if lw["A"] is not None:
        _check(lw["A"] > 0, "lawlor.A must be positive")
    _check(lw["a_min"] > 0 and lw["tol"] > 0 and lw["y_max"] > 1 and lw["n"] >= 64,
           "lawlor a_min, tol, y_max and n must be positive (y_max > 1, n >= 64)")
    gl = cfg["gluing"]
    _check(0 < gl["tau"] < 1, "gluing.tau must lie in (0, 1)", tau=gl["tau"])
    _check(gl["eps"] > 0 and gl["R_hat"] > 0, "gluing.eps and gluing.R_hat must be positive")
    _check(0 < gl["t"] < 1, "gluing.t must lie in (0, 1)")
    for name in ("ts", "sigma_ts", "quad_ts"):
        _positive_list(gl[name], f"gluing.{name}")
    _check(max(gl["ts"]) / min(gl["ts"]) >= 5, "gluing.ts must span at least a factor of 5")
    for t in [gl["t"]] + gl["ts"] + gl["sigma_ts"] + gl["quad_ts"]:
        _check(gl["R_hat"] * t < t ** gl["tau"] and 2 * t ** gl["tau"] < gl["eps"],
               "region radii out of order: need t R_hat < t^tau and 2 t^tau < eps", t=t)
    w = cfg["weights"]
    _check(w["p"] == 2, "weights.p must be 2 (solver restriction)")
    _check(w["k"] in (0, 1), "weights.k must be 0 or 1 for the residual scan")
    _check(-1 < w["beta"] < 0, "weights.beta must lie in (-1, 0)")
    _check(2 - m < w["gamma"] < 0, f"weights.gamma must lie in ({2 - m}, 0)")
    ms = cfg["mesh"]
    for key in ("n_polar", "order", "refine", "n_theta"):
        _check(isinstance(ms[key], int) and ms[key] >= 1, f"mesh.{key} must be a positive integer")
    _check(ms["panels_per_unit"] > 0 and ms["per_unit"] > 0, "mesh densities must be positive")
    tr = cfg["truncation"]
    _check(tr["R_out"] > 0, "truncation.R_out must be positive")
    _check(tr["R_prime"] is None or tr["R_prime"] == tr["R_out"], "truncation.R_prime must equal R_out")
    sv = cfg["solver"]
    _check(sv["linear"] in ("exact", "fv"), "solver.linear must be 'exact' or 'fv'")
    _check(isinstance(sv["max_iter"], int) and sv["max_iter"] >= 0, "solver.max_iter must be a nonnegative integer")
    _check(0 < sv["tol"] < 1 and 0 < sv["chart_factor"], "solver.tol must lie in (0, 1), chart_factor > 0")
    _check(isinstance(sv["trials"], int) and sv["trials"] >= 2, "solver.trials must be an integer >= 2")
    proj = cfg["export"]["projection"]
    _check(len(proj) == 3 and all(isinstance(i, int) and 0 <= i < 2 * m for i in proj),
           f"export.projection must be 3 real-coordinate indices in [0, {2 * m})")
    _check(isinstance(cfg["seed"], int), "seed must be an integer")
    return cfg


@dataclass(frozen=True)
class RunConfig:
    data: dict

    @classmethod
    def load(cls, path=None, overrides=()):
        cfg = copy.deepcopy(DEFAULTS)
        if path is not None:
            try:
                user = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config: {exc}", path=str(path)) from exc
            _check(isinstance(user, dict), "config file must hold a JSON object")
            cfg = _merge(cfg, user)
        for o in overrides:
            apply_override(cfg, o)
        return cls(validate(cfg))

    def __getitem__(self, key):
        return self.data[key]
