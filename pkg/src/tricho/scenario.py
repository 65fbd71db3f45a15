"""Scenario files: a JSON key-value tree describing one verification run.

The full schema is documented in the README. Parsing validates every
invariant up front and raises ScenarioError naming the offending key, so
the runner only ever sees well-formed scenarios.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ScenarioError
from .rates import GrowthRate

CHECK_NAMES = (
    "orthogonality", "cocycle", "invariance", "compatibility",
    "trichotomy", "trichotomy_full", "uniform", "dichotomy",
    "norms", "norm_trichotomy", "norm_trichotomy_unprojected",
    "rate_instantiation",
)
RATE_KEYS = ("h", "k", "mu", "nu")


@dataclass
class Scenario:
    dimension: int
    operator: dict
    projectors: dict
    rates: dict[str, GrowthRate]
    grid_max: float
    grid_step: float
    horizon: float
    tol_structural: float
    tol_theorem: float
    seed: int
    samples: int
    checks: list[str]
    bounds: dict = field(default_factory=dict)
    rate_instantiation: dict | None = None
    echo: dict = field(default_factory=dict)  # normalized source tree


def _require(tree: dict, key: str, kind, where: str = "scenario"):
    if key not in tree:
        raise ScenarioError(f"{where}.{key} is missing")
    value = tree[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ScenarioError(f"{where}.{key} has wrong type "
                            f"({type(value).__name__})")
    return value


def _parse_rate(spec, key: str) -> GrowthRate:
    if not isinstance(spec, dict):
        raise ScenarioError(f"rates.{key} must be an object")
    kind = spec.get("kind")
    try:
        if kind in ("exponential", "polynomial"):
            return GrowthRate(kind, float(_require(spec, "exponent", (int, float),
                                                   f"rates.{key}")))
        if kind == "tabulated":
            table = _require(spec, "table", list, f"rates.{key}")
            return GrowthRate.tabulated(table)
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"rates.{key}: {exc}") from exc
    raise ScenarioError(f"rates.{key}.kind must be exponential, polynomial "
                        f"or tabulated, got {kind!r}")


def _parse_bound(spec, where: str):
    kind = spec.get("kind")
    if kind == "constant":
        value = float(_require(spec, "value", (int, float), where))
        return lambda a: value
    if kind == "affine":
        coeff = float(_require(spec, "coeff", (int, float), where))
        offset = float(_require(spec, "offset", (int, float), where))
        if coeff < 0:
            raise ScenarioError(f"{where}.coeff must be nonnegative "
                                "(bounds are nondecreasing)")
        return lambda a: coeff * a + offset
    raise ScenarioError(f"{where}.kind must be constant or affine, got {kind!r}")


def parse_scenario(path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file {path} does not exist")
    try:
        tree = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return scenario_from_tree(tree)


def scenario_from_tree(tree: dict) -> Scenario:
    if not isinstance(tree, dict):
        raise ScenarioError("scenario root must be an object")
    n = _require(tree, "dimension", int)
    if n <= 0:
        raise ScenarioError("dimension must be positive")

    grid = _require(tree, "grid", dict)
    t_max = float(_require(grid, "t_max", (int, float), "grid"))
    step = float(_require(grid, "step", (int, float), "grid"))
    if t_max <= 0:
        raise ScenarioError("grid.t_max must be positive")
    if step <= 0:
        raise ScenarioError("grid.step must be positive")
    if step > t_max:
        raise ScenarioError("grid.step must not exceed grid.t_max")

    horizon = float(tree.get("horizon", 5.0))
    if horizon <= 0:
        raise ScenarioError("horizon must be positive")

    rates_tree = _require(tree, "rates", dict)
    rates = {key: _parse_rate(_require(rates_tree, key, dict, "rates"), key)
             for key in RATE_KEYS}
    if "u" in rates_tree:
        rates["u"] = _parse_rate(rates_tree["u"], "u")
    for key, rate in rates.items():
        span = rate.span
        needed = t_max + 2.0 * horizon
        if span is not None and span[1] < needed - 1e-9:
            raise ScenarioError(
                f"rates.{key}: tabulated span must reach t_max + 2*horizon "
                f"= {needed:g} (got {span[1]:g})")

    operator = _require(tree, "operator", dict)
    op_type = operator.get("type")
    if op_type == "rate_model":
        if "u" not in rates:
            raise ScenarioError("operator.type rate_model needs rates.u")
    elif op_type == "ode":
        op_step = float(_require(operator, "step", (int, float), "operator"))
        if op_step <= 0:
            raise ScenarioError("operator.step must be positive")
        if "matrix" in operator:
            m = np.array(operator["matrix"], dtype=float)
            if m.shape != (n, n):
                raise ScenarioError(f"operator.matrix must be {n}x{n}")
        elif "builtin" in operator:
            name = operator["builtin"].get("name")
            if name not in ("rotation", "periodic_diag"):
                raise ScenarioError("operator.builtin.name must be rotation "
                                    f"or periodic_diag, got {name!r}")
        else:
            raise ScenarioError("operator needs either matrix or builtin")
    else:
        raise ScenarioError(f"operator.type must be rate_model or ode, got {op_type!r}")

    projectors = _require(tree, "projectors", dict)
    proj_type = projectors.get("type")
    if proj_type == "coordinate_split":
        sizes = _require(projectors, "sizes", list, "projectors")
        if len(sizes) != 3 or any(not isinstance(v, int) or v < 0 for v in sizes):
            raise ScenarioError("projectors.sizes must be three nonnegative integers")
        if sum(sizes) != n:
            raise ScenarioError(
                f"projectors.sizes must sum to dimension {n}, got {sum(sizes)}")
    elif proj_type == "explicit":
        mats = _require(projectors, "matrices", list, "projectors")
        if len(mats) != 3:
            raise ScenarioError("projectors.matrices must list three matrices")
        for i, m in enumerate(mats):
            arr = np.array(m, dtype=float)
            if arr.shape != (n, n):
                raise ScenarioError(f"projectors.matrices[{i}] must be {n}x{n}")
    else:
        raise ScenarioError("projectors.type must be coordinate_split or "
                            f"explicit, got {proj_type!r}")

    tols = tree.get("tolerances", {})
    tol_structural = float(tols.get("structural", 1e-10))
    tol_theorem = float(tols.get("theorem", 1e-9))
    if tol_structural <= 0 or tol_theorem <= 0:
        raise ScenarioError("tolerances must be positive")

    seed = tree.get("seed", 0)
    if not isinstance(seed, int):
        raise ScenarioError("seed must be an integer")
    samples = tree.get("samples", 32)
    if not isinstance(samples, int) or samples < 0:
        raise ScenarioError("samples must be a nonnegative integer")

    checks = tree.get("checks", [])
    if not isinstance(checks, list):
        raise ScenarioError("checks must be a list")
    for name in checks:
        if name not in CHECK_NAMES:
            raise ScenarioError(f"checks: unknown check {name!r} "
                                f"(known: {', '.join(CHECK_NAMES)})")

    bounds_tree = tree.get("bounds", {})
    bounds = {}
    if "trichotomy" in bounds_tree:
        bounds["trichotomy"] = _parse_bound(bounds_tree["trichotomy"],
                                            "bounds.trichotomy")
    if "uniform" in bounds_tree:
        value = bounds_tree["uniform"]
        if not isinstance(value, (int, float)) or value < 1:
            raise ScenarioError("bounds.uniform must be a number >= 1")
        bounds["uniform"] = float(value)

    inst = tree.get("rate_instantiation")
    if inst is not None:
        kind = inst.get("kind")
        if kind not in ("exponential", "polynomial"):
            raise ScenarioError("rate_instantiation.kind must be exponential "
                                "or polynomial")
        exps = _require(inst, "exponents", list, "rate_instantiation")
        if len(exps) != 4 or any(not isinstance(v, (int, float)) or v <= 0
                                 for v in exps):
            raise ScenarioError("rate_instantiation.exponents must be four "
                                "positive numbers")

    if not all(math.isfinite(v) for v in (t_max, step, horizon,
                                          tol_structural, tol_theorem)):
        raise ScenarioError("scenario numbers must be finite")

    return Scenario(dimension=n, operator=dict(operator),
                    projectors=dict(projectors), rates=rates,
                    grid_max=t_max, grid_step=step, horizon=horizon,
                    tol_structural=tol_structural, tol_theorem=tol_theorem,
                    seed=seed, samples=samples, checks=list(checks),
                    bounds=bounds, rate_instantiation=inst,
                    echo=_normalize(tree))


def _normalize(value):
    """Deterministic echo of the scenario tree (keys sorted, floats kept)."""
    if isinstance(value, dict):
        return {k: _normalize(value[k]) for k in sorted(value)}
    if isinstance(value, list):
        return [_normalize(v) for v in value]
    return value
