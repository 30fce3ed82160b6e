"""Problem configuration documents (JSON)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .model_sets import ModelSet
from .poly import Polynomial

__all__ = ["ConfigError", "Grid", "ProblemConfig", "load_config", "parse_config", "DEFAULT_TOLERANCES"]

DEFAULT_TOLERANCES = {
    "validation": 1e-8,
    "identity": 1e-8,
    "green": 1e-9,
    "center_sum": 1e-10,
    "moment": 1e-5,
    "period": 1e-6,
    "period_sum": 1e-8,
    "boundary": 1e-8,
}

KNOWN_OUTPUTS = ("report", "map", "phase", "domain", "image", "verify")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int

    def axes(self):
        return np.linspace(self.xmin, self.xmax, self.nx), np.linspace(self.ymin, self.ymax, self.ny)


@dataclass(frozen=True)
class ProblemConfig:
    polynomial: Polynomial
    omega: ModelSet
    grid: Grid
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    outputs: tuple = ()
    center_override: tuple | None = None
    name: str = ""


def _number(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{what} must be a number")
    if not math.isfinite(x):
        raise ConfigError(f"{what} must be finite")
    return float(x)


def _pair(p, what):
    if isinstance(p, (int, float)) and not isinstance(p, bool):
        return complex(_number(p, what))
    if not isinstance(p, (list, tuple)) or len(p) != 2:
        raise ConfigError(f"{what} must be a [re, im] pair")
    return complex(_number(p[0], what), _number(p[1], what))


def parse_config(doc):
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("polynomial", "omega", "grid"):
        if key not in doc:
            raise ConfigError(f"missing field {key!r}")

    coeffs = doc["polynomial"]
    if not isinstance(coeffs, list) or not coeffs:
        raise ConfigError("polynomial must be a non-empty list of [re, im] coefficients")
    c = [_pair(p, f"polynomial[{i}]") for i, p in enumerate(coeffs)]
    P = Polynomial(c)
    if P.degree < 1:
        raise ConfigError("polynomial degree must be >= 1 (leading coefficient nonzero)")

    om = doc["omega"]
    if not isinstance(om, dict) or om.get("kind") not in ("disk", "segment", "ellipse"):
        raise ConfigError('omega.kind must be one of "disk", "segment", "ellipse"')
    if om["kind"] == "ellipse":
        R = _number(om["R"], "omega.R") if "R" in om else None
        if R is None or not R > 1.0:
            raise ConfigError("omega.R must satisfy R > 1 for kind ellipse")
        omega = ModelSet.ellipse(R)
    else:
        omega = ModelSet(om["kind"])

    g = doc["grid"]
    if not isinstance(g, dict):
        raise ConfigError("grid must be an object")
    try:
        box = [_number(g[k], f"grid.{k}") for k in ("xmin", "xmax", "ymin", "ymax")]
    except KeyError as exc:
        raise ConfigError(f"missing field grid.{exc.args[0]}") from None
    for k in ("nx", "ny"):
        v = g.get(k)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"grid.{k} must be an integer")
        if v < 2:
            raise ConfigError(f"grid.{k} must be >= 2")
    if not box[0] < box[1]:
        raise ConfigError("grid requires xmin < xmax")
    if not box[2] < box[3]:
        raise ConfigError("grid requires ymin < ymax")
    grid = Grid(*box, g["nx"], g["ny"])

    tol = dict(DEFAULT_TOLERANCES)
    for k, v in (doc.get("tolerances") or {}).items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance {k!r}")
        v = _number(v, f"tolerances.{k}")
        if not v > 0:
            raise ConfigError(f"tolerances.{k} must be positive")
        tol[k] = v

    outputs = doc.get("outputs", [])
    if not isinstance(outputs, list) or any(o not in KNOWN_OUTPUTS for o in outputs):
        raise ConfigError(f"outputs must be a list drawn from {list(KNOWN_OUTPUTS)}")

    override = None
    ov = doc.get("overrides") or {}
    if "centers" in ov:
        override = tuple(_pair(p, f"overrides.centers[{i}]") for i, p in enumerate(ov["centers"]))

    return ProblemConfig(P, omega, grid, tol, tuple(outputs), override, str(doc.get("name", "")))


def load_config(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(doc)
