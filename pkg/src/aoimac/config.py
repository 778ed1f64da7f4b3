"""Experiment configuration: JSON parsing, validation and dB conversion.

A config file is one JSON object::

    {
      "scenario": "strong-pra",
      "policy": "PRA",                     # PRA | PRA-opt | DPP-AoI | DPP-PAoI
      "matrix": "strong",                  # preset, explicit probabilities or link budgets
      "lambda": 0.3, "delta": 0.6,
      "q1": 1.0, "q2": 1.0,                # PRA only
      "V": 200, "alpha_max": 1, "xi": 0.001,
      "sweep": {"variable": "lambda", "grid": [0.1, 0.2]},
      "seeds": [1, 2, 3],
      "horizon": 1000000, "burn_in": 0
    }

``matrix`` may be ``"strong"``/``"weak"``, an object with ``p11, p112, p22,
p212``, an object with linear ``beta1, beta2, theta1, theta2``, or the same
in dB with a ``_db`` suffix (``theta_db`` sets both thresholds).
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

from .channel import STRONG_MPR, WEAK_MPR, LinkBudget, SuccessMatrix, build_matrix, mpr_class
from .dpp import DEFAULT_ALPHA_MAX, DEFAULT_V
from .analysis import DEFAULT_XI
from .errors import InvalidConfigError, InvalidParameterError

__all__ = [
    "POLICIES",
    "SEED_ENV",
    "DEFAULT_HORIZON",
    "ExperimentSpec",
    "ConfigParseError",
    "db_to_linear",
    "default_seed",
    "parse_matrix",
    "spec_from_dict",
    "load_spec",
]

POLICIES = ("PRA", "PRA-opt", "DPP-AoI", "DPP-PAoI")
SWEEP_VARIABLES = ("lambda", "delta", "V")
SEED_ENV = "AOIMAC_SEED"
DEFAULT_HORIZON = 1_000_000

_KEYS = {
    "scenario", "policy", "matrix", "lambda", "delta", "q1", "q2", "V", "alpha_max",
    "xi", "sweep", "seeds", "horizon", "burn_in",
}


class ConfigParseError(ValueError):
    """The config text is not valid JSON."""


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (float(x_db) / 10.0)


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 1
    try:
        seed = int(raw)
    except ValueError:
        raise InvalidConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None
    if not 0 <= seed < 2**64:
        raise InvalidConfigError(f"{SEED_ENV} must be an unsigned 64-bit integer")
    return seed


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: str
    policy: str
    matrix: SuccessMatrix
    mpr: str
    lam: float | None
    delta: float | None
    q1: float | None = None
    q2: float | None = None
    v: float = DEFAULT_V
    alpha_max: float = DEFAULT_ALPHA_MAX
    xi: float = DEFAULT_XI
    sweep_variable: str | None = None
    grid: tuple = ()
    seeds: tuple = (1,)
    horizon: int = DEFAULT_HORIZON
    burn_in: int = 0

    def points(self) -> list[dict]:
        """One ``{"lam", "delta", "v"}`` dict per grid value (a single point without a sweep)."""
        base = {"lam": self.lam, "delta": self.delta, "v": self.v}
        if self.sweep_variable is None:
            return [base]
        key = {"lambda": "lam", "delta": "delta", "V": "v"}[self.sweep_variable]
        return [{**base, key: value} for value in self.grid]

    def with_overrides(self, **kw) -> "ExperimentSpec":
        """Copy with every non-None keyword replaced, then validated."""
        return validate(replace(self, **{k: v for k, v in kw.items() if v is not None}))


def _num(d: dict, key: str, lo: float | None = None, hi: float | None = None, required: bool = True):
    if key not in d:
        if required:
            raise InvalidConfigError(f"missing required key '{key}'")
        return None
    value = d[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidConfigError(f"key '{key}' must be a number, got {value!r}")
    value = float(value)
    if (lo is not None and value < lo) or (hi is not None and value > hi):
        raise InvalidConfigError(f"key '{key}'={value} outside [{lo}, {hi}]")
    return value


def parse_matrix(raw) -> tuple[SuccessMatrix, str]:
    """Return the success matrix and its MPR label for a ``matrix`` entry."""
    if isinstance(raw, str):
        presets = {"strong": STRONG_MPR, "weak": WEAK_MPR}
        if raw.lower() not in presets:
            raise InvalidConfigError(f"unknown matrix preset {raw!r} (expected 'strong' or 'weak')")
        return presets[raw.lower()], raw.lower()
    if not isinstance(raw, dict):
        raise InvalidConfigError("key 'matrix' must be a preset name or an object")
    try:
        if {"p11", "p112", "p22", "p212"} <= raw.keys():
            matrix = SuccessMatrix(*(_num(raw, k) for k in ("p11", "p112", "p22", "p212")))
        elif "beta1_db" in raw:
            theta1 = raw.get("theta1_db", raw.get("theta_db"))
            theta2 = raw.get("theta2_db", raw.get("theta_db"))
            if theta1 is None or theta2 is None:
                raise InvalidConfigError("matrix in dB needs 'theta_db' or both 'theta1_db' and 'theta2_db'")
            link1 = LinkBudget(db_to_linear(_num(raw, "beta1_db")), db_to_linear(theta1))
            link2 = LinkBudget(db_to_linear(_num(raw, "beta2_db")), db_to_linear(theta2))
            matrix = build_matrix(link1, link2)
        elif "beta1" in raw:
            link1 = LinkBudget(_num(raw, "beta1"), _num(raw, "theta1"))
            link2 = LinkBudget(_num(raw, "beta2"), _num(raw, "theta2"))
            matrix = build_matrix(link1, link2)
        else:
            raise InvalidConfigError("matrix object needs p11/p112/p22/p212, beta1/beta2/theta1/theta2 or their _db forms")
    except InvalidParameterError as exc:
        raise InvalidConfigError(f"matrix: {exc}") from None
    return matrix, mpr_class(matrix)


def validate(spec: ExperimentSpec) -> ExperimentSpec:
    if spec.policy not in POLICIES:
        raise InvalidConfigError(f"policy must be one of {POLICIES}, got {spec.policy!r}")
    if spec.sweep_variable is not None:
        if spec.sweep_variable not in SWEEP_VARIABLES:
            raise InvalidConfigError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        if len(spec.grid) == 0:
            raise InvalidConfigError("sweep grid is empty")
    swept = spec.sweep_variable
    if swept != "lambda" and spec.lam is None:
        raise InvalidConfigError("missing required key 'lambda'")
    if swept != "delta" and spec.delta is None:
        raise InvalidConfigError("missing required key 'delta'")
    for p in spec.points():
        for key, name in (("lam", "lambda"), ("delta", "delta")):
            if not 0.0 <= p[key] <= 1.0:
                raise InvalidConfigError(f"{name}={p[key]} outside [0, 1]")
        if not p["v"] > 0:
            raise InvalidConfigError(f"V must be positive, got {p['v']}")
    if spec.policy == "PRA":
        for name in ("q1", "q2"):
            value = getattr(spec, name)
            if value is None:
                raise InvalidConfigError(f"missing required key '{name}' for policy PRA")
            if not 0.0 <= value <= 1.0:
                raise InvalidConfigError(f"{name}={value} outside [0, 1]")
    if not spec.alpha_max > 0:
        raise InvalidConfigError("alpha_max must be positive")
    if not spec.xi > 0:
        raise InvalidConfigError("xi must be positive")
    if len(spec.seeds) == 0:
        raise InvalidConfigError("seeds list is empty")
    for s in spec.seeds:
        if isinstance(s, bool) or not isinstance(s, int) or not 0 <= s < 2**64:
            raise InvalidConfigError(f"seed {s!r} is not an unsigned 64-bit integer")
    if not (isinstance(spec.horizon, int) and spec.horizon > 0):
        raise InvalidConfigError("horizon must be a positive integer")
    if not (isinstance(spec.burn_in, int) and 0 <= spec.burn_in < spec.horizon):
        raise InvalidConfigError("burn_in must satisfy 0 <= burn_in < horizon")
    return spec


def _default(value, fallback):
    return fallback if value is None else value


def _as_int(value, key):
    if isinstance(value, bool):
        raise InvalidConfigError(f"key '{key}' must be an integer")
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if not isinstance(value, int):
        raise InvalidConfigError(f"key '{key}' must be an integer, got {value!r}")
    return value


def spec_from_dict(d: dict, check: bool = True) -> ExperimentSpec:
    """Build a spec; ``check=False`` defers :func:`validate` so overrides can be applied first."""
    if not isinstance(d, dict):
        raise InvalidConfigError("config must be a JSON object")
    unknown = sorted(set(d) - _KEYS)
    if unknown:
        raise InvalidConfigError(f"unknown config key(s): {', '.join(unknown)}")
    if "policy" not in d:
        raise InvalidConfigError("missing required key 'policy'")
    if "matrix" not in d:
        raise InvalidConfigError("missing required key 'matrix'")
    matrix, mpr = parse_matrix(d["matrix"])

    sweep_variable, grid = None, ()
    if "sweep" in d:
        sweep = d["sweep"]
        if not isinstance(sweep, dict) or "variable" not in sweep or "grid" not in sweep:
            raise InvalidConfigError("key 'sweep' must be an object with 'variable' and 'grid'")
        sweep_variable = sweep["variable"]
        if not isinstance(sweep["grid"], list):
            raise InvalidConfigError("sweep 'grid' must be a list")
        grid = tuple(_num({"grid": g}, "grid") for g in sweep["grid"])

    seeds = d.get("seeds", [default_seed()])
    if not isinstance(seeds, list):
        raise InvalidConfigError("key 'seeds' must be a list of integers")

    spec = ExperimentSpec(
        scenario=str(d.get("scenario", "custom")),
        policy=d["policy"],
        matrix=matrix,
        mpr=mpr,
        lam=_num(d, "lambda", 0, 1, required=False),
        delta=_num(d, "delta", 0, 1, required=False),
        q1=_num(d, "q1", 0, 1, required=False),
        q2=_num(d, "q2", 0, 1, required=False),
        v=_default(_num(d, "V", required=False), DEFAULT_V),
        alpha_max=_default(_num(d, "alpha_max", required=False), DEFAULT_ALPHA_MAX),
        xi=_default(_num(d, "xi", required=False), DEFAULT_XI),
        sweep_variable=sweep_variable,
        grid=grid,
        seeds=tuple(_as_int(s, "seeds") for s in seeds),
        horizon=_as_int(d.get("horizon", DEFAULT_HORIZON), "horizon"),
        burn_in=_as_int(d.get("burn_in", 0), "burn_in"),
    )
    return validate(spec) if check else spec


def load_spec(path, check: bool = True) -> ExperimentSpec:
    """Read and validate a JSON config file.

    Raises :class:`ConfigParseError` (with line/column) for malformed JSON
    and :class:`InvalidConfigError` for content errors.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return spec_from_dict(raw, check)
