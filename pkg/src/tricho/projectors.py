"""Families of three time-dependent projectors and their restricted inverses.

A family P1, P2, P3 splits the state space at every time into stable,
unstable and central directions. The family is *orthogonal* when the three
members sum to the identity and annihilate each other pairwise, *invariant*
for an evolution operator U when each member commutes with U along
trajectories, and *compatible* when additionally U(t, s) restricts to an
isomorphism between the ranges of P2 (and P3) at times s and t. For a
compatible family the restricted inverse maps V_j(t, s) exist; this module
computes them as matrices W(t, s) = V_j(t, s) P_j(t) and verifies their
defining identities.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import DomainError, NotStronglyInvariantError, StructuralError
from .reports import CheckReport
from .util import opnorm, range_basis

RANK_TOL = 1e-10  # scale-invariant: smallest singular value vs largest


class ProjectorFamily:
    """Three maps t -> n x n matrix, constant or callback-defined."""

    def __init__(self, dimension: int, members):
        if dimension <= 0:
            raise StructuralError("dimension must be positive")
        if len(members) != 3:
            raise StructuralError("a family has exactly three members")
        self.dimension = int(dimension)
        self._members = tuple(members)

    @classmethod
    def constant(cls, p1, p2, p3) -> "ProjectorFamily":
        mats = [np.array(p, dtype=float) for p in (p1, p2, p3)]
        n = mats[0].shape[0]
        for m in mats:
            if m.shape != (n, n):
                raise StructuralError("members must be square matrices of equal size")
        return cls(n, [lambda t, m=m: m for m in mats])

    @classmethod
    def coordinate_split(cls, n1: int, n2: int, n3: int) -> "ProjectorFamily":
        """Constant orthogonal projectors onto consecutive coordinate blocks."""
        if min(n1, n2, n3) < 0 or n1 + n2 + n3 <= 0:
            raise StructuralError("block sizes must be nonnegative with positive sum")
        n = n1 + n2 + n3
        mats = []
        start = 0
        for size in (n1, n2, n3):
            m = np.zeros((n, n))
            m[start:start + size, start:start + size] = np.eye(size)
            mats.append(m)
            start += size
        return cls.constant(*mats)

    @classmethod
    def from_callables(cls, dimension: int, f1, f2, f3) -> "ProjectorFamily":
        return cls(dimension, [f1, f2, f3])

    def member(self, index: int, t: float) -> np.ndarray:
        """Matrix of P_index(t), index in {1, 2, 3}."""
        if index not in (1, 2, 3):
            raise ValueError("member index must be 1, 2 or 3")
        m = np.asarray(self._members[index - 1](t), dtype=float)
        if m.shape != (self.dimension, self.dimension):
            raise StructuralError(
                f"member {index} at t={t} has shape {m.shape}, "
                f"expected {(self.dimension, self.dimension)}")
        return m

    def members(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.member(1, t), self.member(2, t), self.member(3, t)


def check_orthogonal(family: ProjectorFamily, grid, tol: float) -> CheckReport:
    """Idempotency, sum-to-identity and pairwise-annihilation residuals."""
    grid = list(grid)
    if not grid:
        raise ValueError("grid must be nonempty")
    eye = np.eye(family.dimension)
    worst = {"idempotency": 0.0, "sum_identity": 0.0, "pairwise_product": 0.0}
    for t in grid:
        ps = family.members(t)
        worst["idempotency"] = max(
            worst["idempotency"], max(opnorm(p @ p - p) for p in ps))
        worst["sum_identity"] = max(
            worst["sum_identity"], opnorm(ps[0] + ps[1] + ps[2] - eye))
        cross = max(opnorm(ps[i] @ ps[j])
                    for i in range(3) for j in range(3) if i != j)
        worst["pairwise_product"] = max(worst["pairwise_product"], cross)
    return CheckReport("orthogonality", tol, worst,
                       passed=all(v <= tol for v in worst.values()))


def check_invariance(family: ProjectorFamily, operator, pairs, tol: float) -> CheckReport:
    """Worst commutation residual |U(t,s)P_i(s) - P_i(t)U(t,s)| over pairs."""
    worst = 0.0
    for t, s in pairs:
        if t < s or s < 0:
            raise DomainError(f"pair ({t}, {s}) outside t >= s >= 0")
        u = operator.evaluate(t, s)
        for i in (1, 2, 3):
            worst = max(worst, opnorm(u @ family.member(i, s)
                                      - family.member(i, t) @ u))
    return CheckReport("invariance", tol, {"commutation": worst}, worst <= tol)


def compute_restricted_inverse(operator, family: ProjectorFamily, index: int,
                               t: float, s: float,
                               rank_tol: float = RANK_TOL) -> np.ndarray:
    """Matrix of V_j(t, s) P_j(t) for j = index in {2, 3}.

    The restriction of U(t, s) to Range P_j(s) is expressed in orthonormal
    bases of the two ranges and inverted; rank deficiency of that square
    system means the restriction is not an isomorphism and raises
    NotStronglyInvariantError instead of returning a garbage inverse.
    Rank-0 members (the dichotomy case) yield the zero matrix.
    """
    if index not in (2, 3):
        raise ValueError("restricted inverses exist for members 2 and 3")
    if t < s or s < 0:
        raise DomainError(f"pair ({t}, {s}) outside t >= s >= 0")
    n = family.dimension
    basis_s = range_basis(family.member(index, s))
    p_t = family.member(index, t)
    basis_t = range_basis(p_t)
    if basis_s.shape[1] == 0 and basis_t.shape[1] == 0:
        return np.zeros((n, n))
    if basis_s.shape[1] != basis_t.shape[1]:
        raise NotStronglyInvariantError(
            f"rank of member {index} changes from {basis_s.shape[1]} at s={s} "
            f"to {basis_t.shape[1]} at t={t}")
    mapped = operator.evaluate(t, s) @ basis_s
    restricted = basis_t.T @ mapped  # least-squares coefficients, basis_t orthonormal
    sigma = np.linalg.svd(restricted, compute_uv=False)
    if sigma[0] == 0.0 or sigma[-1] <= rank_tol * sigma[0]:
        raise NotStronglyInvariantError(
            f"restriction of U({t}, {s}) to range of member {index} is "
            f"rank-deficient (singular values {sigma[-1]:.3e} vs {sigma[0]:.3e})")
    return basis_s @ np.linalg.solve(restricted, basis_t.T @ p_t)


class InverseFamily:
    """Cached evaluator for W(t, s) = V_j(t, s) P_j(t) on t >= s >= 0."""

    def __init__(self, index: int, dimension: int,
                 evaluator: Callable[[float, float], np.ndarray]):
        self.index = index
        self.dimension = dimension
        self._evaluator = evaluator
        self._cache: dict[tuple[float, float], np.ndarray] = {}

    def evaluate(self, t: float, s: float) -> np.ndarray:
        key = (t, s)
        got = self._cache.get(key)
        if got is None:
            got = self._evaluator(t, s)
            self._cache[key] = got
        return got


def build_inverse_family(operator, family: ProjectorFamily, index: int,
                         rank_tol: float = RANK_TOL) -> InverseFamily:
    def evaluator(t, s):
        return compute_restricted_inverse(operator, family, index, t, s, rank_tol)
    return InverseFamily(index, family.dimension, evaluator)


def build_inverses(operator, family: ProjectorFamily,
                   rank_tol: float = RANK_TOL) -> dict[int, InverseFamily]:
    """Inverse families for members 2 and 3, sharing the operator."""
    return {j: build_inverse_family(operator, family, j, rank_tol) for j in (2, 3)}


def check_compatible(family: ProjectorFamily, operator, grid, tol: float,
                     inverses: dict[int, InverseFamily] | None = None) -> CheckReport:
    """Invariance of P1 plus two-sided inverse identities for P2 and P3.

    For every grid pair the computed W(t, s) must satisfy
    U(t,s) W = P_j(t) and W U(t,s) P_j(s) = P_j(s) within tol. Zero members
    pass vacuously. A rank-deficient restriction fails the report rather
    than raising.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("grid must be nonempty")
    if inverses is None:
        inverses = build_inverses(operator, family)
    pairs = [(grid[i], grid[j]) for i in range(len(grid)) for j in range(i + 1)]

    worst_inv = 0.0
    for t, s in pairs:
        u = operator.evaluate(t, s)
        worst_inv = max(worst_inv, opnorm(u @ family.member(1, s)
                                          - family.member(1, t) @ u))
    residuals = {"invariance_p1": worst_inv, "right_inverse": 0.0, "left_inverse": 0.0}
    notes = []
    passed = worst_inv <= tol
    for j in (2, 3):
        for t, s in pairs:
            try:
                w = inverses[j].evaluate(t, s)
            except NotStronglyInvariantError as exc:
                notes.append(str(exc))
                passed = False
                continue
            u = operator.evaluate(t, s)
            p_t, p_s = family.member(j, t), family.member(j, s)
            residuals["right_inverse"] = max(residuals["right_inverse"],
                                             opnorm(u @ w - p_t))
            residuals["left_inverse"] = max(residuals["left_inverse"],
                                            opnorm(w @ u @ p_s - p_s))
    passed = passed and all(v <= tol for v in residuals.values())
    return CheckReport("compatibility", tol, residuals, passed, notes)


def check_inverse_properties(operator, family: ProjectorFamily, index: int,
                             triples, tol: float,
                             inverses: dict[int, InverseFamily] | None = None) -> CheckReport:
    """Full identity suite for a restricted inverse family over (t, s, t0) triples.

    Residual keys: right_inverse (U W = P at t), left_inverse (W U P = P at s),
    cocycle (W(t,t0) = W(s,t0) W(t,s)), range (W lands in Range P(s)),
    equal_time (W(t,t) = P(t)).
    """
    inv = (inverses or build_inverses(operator, family))[index]
    worst = {"right_inverse": 0.0, "left_inverse": 0.0, "cocycle": 0.0,
             "range": 0.0, "equal_time": 0.0}
    times = sorted({x for triple in triples for x in triple})
    for t in times:
        worst["equal_time"] = max(worst["equal_time"],
                                  opnorm(inv.evaluate(t, t) - family.member(index, t)))
    for t, s, t0 in triples:
        if not t >= s >= t0 >= 0:
            raise ValueError(f"triple ({t}, {s}, {t0}) not ordered t >= s >= t0 >= 0")
        w_ts = inv.evaluate(t, s)
        u = operator.evaluate(t, s)
        p_t, p_s = family.member(index, t), family.member(index, s)
        worst["right_inverse"] = max(worst["right_inverse"], opnorm(u @ w_ts - p_t))
        worst["left_inverse"] = max(worst["left_inverse"], opnorm(w_ts @ u @ p_s - p_s))
        worst["range"] = max(worst["range"], opnorm(w_ts - p_s @ w_ts))
        worst["cocycle"] = max(worst["cocycle"],
                               opnorm(inv.evaluate(t, t0)
                                      - inv.evaluate(s, t0) @ w_ts))
    return CheckReport(f"inverse_properties_{index}", tol, worst,
                       passed=all(v <= tol for v in worst.values()))
