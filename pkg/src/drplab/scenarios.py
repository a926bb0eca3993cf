"""Scenario configs: schema validation, builtin registry and object construction."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from importlib import resources
from typing import Any

import jsonschema
import numpy as np

from .engine import BoundarySpec
from .picard import PicardProblem
from .signals import Signal, TimeGrid, VectorSequence, e_lambda_sequence
from .systems import cubic_family, d_only, van_der_pol, vdp_ilc_problem


class ConfigError(ValueError):
    pass


BUILTINS: dict[str, dict[str, Any]] = {
    "linear-stable": {
        "kind": "simulate",
        "grid": {"T": 1.0, "N": 200},
        "passes": 20,
        "parameters": {"d": 0.5},
        "boundary": {"y0": {"kind": "constant", "value": [1.0]}, "x0": {"kind": "zero"}},
    },
    "linear-unstable": {
        "kind": "simulate",
        "grid": {"T": 1.0, "N": 200},
        "passes": 20,
        "parameters": {"d": 1.2},
        "boundary": {"y0": {"kind": "constant", "value": [1.0]}, "x0": {"kind": "zero"}},
    },
    "lti-cubic": {
        "kind": "simulate",
        "grid": {"T": 1.0, "N": 200},
        "passes": 40,
        "parameters": {"A": [[-1.0]], "B": [[0.2]], "C": [[0.2]], "D": [[0.5]], "cubic": 0.5},
        "boundary": {
            "y0": {"kind": "constant", "value": [0.005]},
            "x0": {"kind": "e_lambda", "lambda": 0.5, "norm_bound": 0.005, "limit": [0.0]},
        },
    },
    "vanderpol-ilc": {
        "kind": "ilc",
        "grid": {"T": 2.0, "N": 2000},
        "passes": 10,
        "seed": 1,
        "boundary": {
            "x0": {"kind": "e_lambda", "lambda_range": [0.2, 0.95], "norm_bound": 0.09,
                   "limit": [0.1, 0.0]},
        },
    },
    "picard-exp": {
        "kind": "picard",
        "grid": {"T": 1.0, "N": 5000},
        "passes": 10,
        "parameters": {"x_star0": [1.0]},
        "boundary": {"x0": {"kind": "constant", "value": [1.0]}},
    },
    "picard-vdp": {
        "kind": "picard",
        "grid": {"T": 0.5, "N": 500},
        "passes": 25,
        "parameters": {"x_star0": [1.0, 0.0]},
        "boundary": {"x0": {"kind": "constant", "value": [1.0, 0.0]}},
    },
}


def load_schema() -> dict:
    return json.loads(resources.files("drplab").joinpath("scenario.schema.json").read_text())


def _line_of(text: str, path) -> int | None:
    """Best-effort line number of the last key in a JSON path."""
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return None
    needle = json.dumps(keys[-1])
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def parse_config(text: str, source: str = "<config>") -> dict:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = []
        for err in errors:
            path = list(err.absolute_path)
            if err.validator == "additionalProperties":
                extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
                path = path + extra[:1]
            line = _line_of(text, path)
            where = f"{source}:{line}" if line else source
            loc = "/".join(str(p) for p in path) or "<root>"
            msgs.append(f"{where}: {loc}: {err.message}")
        raise ConfigError("\n".join(msgs))
    if raw["scenario"] not in BUILTINS:
        raise ConfigError(f"{source}: unknown scenario {raw['scenario']!r}; "
                          f"builtins are {', '.join(sorted(BUILTINS))}")
    return raw


def resolve(raw: dict, seed: int | None = None, passes: int | None = None,
            intervals: int | None = None) -> dict:
    """Merge a validated config onto its builtin defaults and apply CLI overrides.

    Sections merge one level deep, so a boundary entry (y0 or x0) replaces the
    default entry as a whole.
    """
    cfg = copy.deepcopy(BUILTINS[raw["scenario"]])
    for key, val in copy.deepcopy(raw).items():
        if isinstance(val, dict):
            cfg[key] = {**cfg.get(key, {}), **val}
        else:
            cfg[key] = val
    if seed is not None:
        cfg["seed"] = seed
    if passes is not None:
        cfg["passes"] = passes
    if intervals is not None:
        cfg["grid"]["N"] = intervals
    cfg.setdefault("seed", 0)
    cfg.setdefault("solver", {})
    cfg["solver"].setdefault("blowup_radius", 1e6)
    cfg.setdefault("output", {})
    return cfg


@dataclass
class Built:
    config: dict
    grid: TimeGrid
    system: Any = None
    boundary: BoundarySpec | None = None
    ilc: Any = None
    picard: PicardProblem | None = None
    x0_seq: VectorSequence | None = None

    @property
    def kind(self) -> str:
        return self.config["kind"]

    @property
    def name(self) -> str:
        return self.config["scenario"]


def _vector(spec: dict, dim: int, key: str = "value") -> np.ndarray:
    v = np.asarray(spec.get(key, [0.0] * dim), dtype=float)
    if v.shape != (dim,):
        raise ConfigError(f"boundary {key} must have length {dim}, got {v.size}")
    return v


def _x0_sequence(spec: dict, length: int, dim: int, rng: np.random.Generator) -> VectorSequence:
    kind = spec["kind"]
    if kind == "zero":
        return VectorSequence.zeros(length, dim)
    if kind == "constant":
        return VectorSequence.constant(length, _vector(spec, dim))
    if "lambda" in spec:
        lam = float(spec["lambda"])
    elif "lambda_range" in spec:
        lo, hi = spec["lambda_range"]
        lam = float(rng.uniform(lo, hi))
    else:
        raise ConfigError("e_lambda boundary needs 'lambda' or 'lambda_range'")
    if "norm_bound" not in spec:
        raise ConfigError("e_lambda boundary needs 'norm_bound'")
    return e_lambda_sequence(length, lam, float(spec["norm_bound"]), _vector(spec, dim, "limit"), rng)


def _y0(spec: dict | None, grid: TimeGrid, dim: int) -> Signal:
    if spec is None or spec["kind"] == "zero":
        return Signal.zeros(grid, dim)
    return Signal.constant(grid, _vector(spec, dim))


def build(cfg: dict) -> Built:
    grid = TimeGrid(float(cfg["grid"]["T"]), int(cfg["grid"]["N"]))
    rng = np.random.default_rng(cfg["seed"])
    K = int(cfg["passes"])
    params = cfg.get("parameters", {})
    bnd = cfg.get("boundary", {})
    out = Built(cfg, grid)
    try:
        if cfg["kind"] == "simulate":
            if "d" in params and "A" not in params:
                sys = d_only(grid, params["d"])
            else:
                sys = cubic_family(grid, params["A"], params["B"], params["C"], params["D"],
                                   c_state=params.get("cubic", 0.0), c_out=params.get("cubic", 0.0))
            out.system = sys
            out.boundary = BoundarySpec(_y0(bnd.get("y0"), grid, sys.m),
                                        _x0_sequence(bnd.get("x0", {"kind": "zero"}), K, sys.n, rng))
        elif cfg["kind"] == "ilc":
            out.ilc = vdp_ilc_problem(grid)
            out.system = out.ilc.plant
            out.x0_seq = _x0_sequence(bnd["x0"], K + 1, 2, rng)
        else:
            x_star0 = np.asarray(params["x_star0"], dtype=float)
            if x_star0.size == 1:
                field = lambda x, t: x
            else:
                vdp = van_der_pol(grid)
                field = lambda x, t: vdp.f(x, np.zeros(1), t)
            out.picard = PicardProblem(field, x_star0, grid)
            out.x0_seq = _x0_sequence(bnd.get("x0", {"kind": "constant", "value": list(x_star0)}),
                                      K, x_star0.size, rng)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"scenario {cfg['scenario']!r}: {exc}") from exc
    return out
