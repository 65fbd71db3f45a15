"""Evolution operators on the half-plane t >= s >= 0.

Two constructions are provided: a closed-form model operator whose action on
each member of an orthogonal projector family is a prescribed quotient of
growth rates, and operators generated by integrating the matrix equation
X' = A(t) X with a fixed-step fourth-order Runge-Kutta scheme. Generated
operators cache the propagators between consecutive anchor times, so
composition identities hold by construction up to integration error.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, PreconditionError
from .rates import GrowthRate
from .projectors import ProjectorFamily
from .reports import CheckReport
from .util import opnorm

_PROBE_TIMES = (0.0, 0.9, 2.3, 5.7)
_PROBE_TOL = 1e-9


@dataclass(frozen=True)
class EvolutionOperator:
    dimension: int
    provenance: str  # "closed_form" | "ode_generated" | "composed"
    _evaluator: Callable[[float, float], np.ndarray]

    def evaluate(self, t: float, s: float) -> np.ndarray:
        """Matrix of U(t, s); only t >= s >= 0 is in the domain."""
        if s < 0 or t < s:
            raise DomainError(f"({t}, {s}) outside the domain t >= s >= 0")
        return self._evaluator(t, s)


def identity_operator(dimension: int) -> EvolutionOperator:
    eye = np.eye(dimension)
    return EvolutionOperator(dimension, "closed_form", lambda t, s: eye)


def rate_model(u: GrowthRate, h: GrowthRate, k: GrowthRate,
               mu: GrowthRate, nu: GrowthRate,
               family: ProjectorFamily) -> EvolutionOperator:
    """Closed-form operator acting by rate quotients on each projector range.

    U(t, s) = u(s)/u(t) * ( h(s)/h(t) P1(s) + k(t)/k(s) P2(s)
                            + mu(t)/mu(s) * nu(s)/nu(t) P3(s) )

    The family must behave like a constant orthogonal family: members must
    sum to the identity and satisfy P_i(t) P_j(s) = delta_ij P_i(s) (checked
    on a fixed probe set). That structure makes the operator commute with
    every member, so identity and composition hold exactly by telescoping of
    the quotients.
    """
    _require_model_family(family)

    def evaluator(t, s):
        p1, p2, p3 = family.members(s)
        outer = u.ratio(s, t)
        return outer * (h.ratio(s, t) * p1
                        + k.ratio(t, s) * p2
                        + mu.ratio(t, s) * nu.ratio(s, t) * p3)

    return EvolutionOperator(family.dimension, "closed_form", evaluator)


def _require_model_family(family: ProjectorFamily) -> None:
    eye = np.eye(family.dimension)
    for t in _PROBE_TIMES:
        ps = family.members(t)
        if opnorm(ps[0] + ps[1] + ps[2] - eye) > _PROBE_TOL:
            raise PreconditionError("family members must sum to the identity")
        for s in _PROBE_TIMES:
            if s > t:
                continue
            qs = family.members(s)
            for i in range(3):
                for j in range(3):
                    want = qs[i] if i == j else 0.0
                    if opnorm(ps[i] @ qs[j] - want) > _PROBE_TOL:
                        raise PreconditionError(
                            "family is not orthogonal-and-constant enough for "
                            "the rate model (member products deviate at "
                            f"t={t}, s={s})")


@dataclass(frozen=True)
class GeneratorSpec:
    """Coefficient A(t) of x' = A(t) x plus a fixed integration step."""

    dimension: int
    coefficient: Callable[[float], np.ndarray]
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.dimension <= 0:
            raise ValueError("dimension must be positive")

    @classmethod
    def constant(cls, matrix, step: float) -> "GeneratorSpec":
        a = np.array(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("coefficient must be a square matrix")
        return cls(a.shape[0], lambda t: a, step)


def _rk4(coefficient, s: float, t: float, step: float, n: int) -> np.ndarray:
    x = np.eye(n)
    span = t - s
    if span <= 0:
        return x
    steps = max(1, math.ceil(span / step - 1e-12))
    h = span / steps
    for i in range(steps):
        tau = s + i * h
        k1 = coefficient(tau) @ x
        k2 = coefficient(tau + 0.5 * h) @ (x + 0.5 * h * k1)
        k3 = coefficient(tau + 0.5 * h) @ (x + 0.5 * h * k2)
        k4 = coefficient(tau + h) @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def from_generator(spec: GeneratorSpec, anchors=None) -> EvolutionOperator:
    """Integrate the generator into an evolution operator.

    When anchor times are given, the propagator over each consecutive anchor
    interval is precomputed once; queries compose cached factors with short
    boundary integrations. Anchor-aligned queries therefore satisfy the
    composition identity up to floating-point reassociation only.
    """
    n = spec.dimension
    anchor_list = sorted(float(a) for a in anchors) if anchors else []
    if anchor_list and anchor_list[0] < 0:
        raise ValueError("anchors must be nonnegative")
    for tau in anchor_list or (0.0, 0.5, 1.0):
        a = np.asarray(spec.coefficient(tau), dtype=float)
        if a.shape != (n, n):
            raise ValueError(f"coefficient at t={tau} has shape {a.shape}, "
                             f"expected {(n, n)}")
        if not np.all(np.isfinite(a)):
            raise ValueError(f"coefficient is unbounded at t={tau}")
    props = [_rk4(spec.coefficient, a, b, spec.step, n)
             for a, b in zip(anchor_list, anchor_list[1:])]

    def evaluator(t, s):
        if t == s:
            return np.eye(n)
        lo = bisect.bisect_left(anchor_list, s)
        hi = bisect.bisect_right(anchor_list, t) - 1
        if lo > hi:
            return _rk4(spec.coefficient, s, t, spec.step, n)
        m = _rk4(spec.coefficient, s, anchor_list[lo], spec.step, n)
        for i in range(lo, hi):
            m = props[i] @ m
        if t > anchor_list[hi]:
            m = _rk4(spec.coefficient, anchor_list[hi], t, spec.step, n) @ m
        return m

    return EvolutionOperator(n, "ode_generated", evaluator)


def conjugate(operator: EvolutionOperator, basis_change: np.ndarray) -> EvolutionOperator:
    """Operator in a new orthonormal basis: Q U(t, s) Q^T."""
    q = np.array(basis_change, dtype=float)

    def evaluator(t, s):
        return q @ operator.evaluate(t, s) @ q.T

    return EvolutionOperator(operator.dimension, "composed", evaluator)


def check_identity(operator: EvolutionOperator, times, tol: float) -> CheckReport:
    """Residual of U(t, t) = I over sampled times."""
    eye = np.eye(operator.dimension)
    worst = max((opnorm(operator.evaluate(t, t) - eye) for t in times), default=0.0)
    return CheckReport("identity", tol, {"identity": worst}, worst <= tol)


def check_cocycle(operator: EvolutionOperator, triples, tol: float) -> CheckReport:
    """Residual of U(t, t0) = U(t, s) U(s, t0) over (t, s, t0) triples.

    Residuals are measured relative to the size of U(t, t0), floored at 1:
    growing operators reach norms ~e^{a t} where even a one-ulp relative
    error dwarfs any absolute tolerance, so the scale-aware residual is the
    meaningful one.
    """
    worst = 0.0
    for t, s, t0 in triples:
        if not t >= s >= t0 >= 0:
            raise ValueError(f"triple ({t}, {s}, {t0}) not ordered t >= s >= t0 >= 0")
        direct = operator.evaluate(t, t0)
        residual = opnorm(direct - operator.evaluate(t, s) @ operator.evaluate(s, t0))
        worst = max(worst, residual / max(1.0, opnorm(direct)))
    return CheckReport("cocycle", tol, {"cocycle": worst}, worst <= tol)
