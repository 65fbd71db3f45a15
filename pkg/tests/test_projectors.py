import math

import numpy as np
import pytest

from tricho import (EvolutionOperator, GeneratorSpec, GrowthRate,
                    NotStronglyInvariantError, ProjectorFamily, StructuralError,
                    build_inverses, check_compatible, check_inverse_properties,
                    check_invariance, check_orthogonal,
                    compute_restricted_inverse, from_generator,
                    identity_operator, rate_model)
from tricho.util import make_grid, opnorm

E_MINUS_2 = 0.1353352832366127  # frozen reciprocal of e^2

GRID = [0.0, 1.0, 2.5, 4.0]


def diag3(a, b, c):
    return np.diag([float(a), float(b), float(c)])


def test_coordinate_split_is_exactly_orthogonal(split_family):
    report = check_orthogonal(split_family, GRID, 1e-12)
    assert report.passed
    assert report.worst == 0.0


def test_sum_violation_detected():
    family = ProjectorFamily.constant(diag3(1, 0, 0), diag3(1, 0, 0),
                                      diag3(0, 1, 1))
    report = check_orthogonal(family, [0.0], 1e-10)
    assert not report.passed
    assert report.residuals["sum_identity"] == pytest.approx(1.0)


def test_non_idempotent_member_detected():
    family = ProjectorFamily.constant(2 * diag3(1, 0, 0), diag3(0, 1, 0),
                                      diag3(0, 0, 1))
    report = check_orthogonal(family, [0.0], 1e-10)
    assert not report.passed
    # (2E)^2 - 2E = 2E, spectral norm 2
    assert report.residuals["idempotency"] == pytest.approx(2.0)


def test_dimension_mismatch_is_structural():
    family = ProjectorFamily.from_callables(3, lambda t: np.eye(2),
                                            lambda t: np.zeros((3, 3)),
                                            lambda t: np.zeros((3, 3)))
    with pytest.raises(StructuralError):
        check_orthogonal(family, [0.0], 1e-10)


def test_invariance_of_model_operator_is_exact(nonuniform_operator, split_family):
    pairs = [(t, s) for t in GRID for s in GRID if t >= s]
    report = check_invariance(split_family, nonuniform_operator, pairs, 1e-12)
    assert report.passed
    assert report.worst == 0.0


def test_identity_operator_commutes(split_family):
    report = check_invariance(split_family, identity_operator(3),
                              [(2.0, 1.0)], 1e-14)
    assert report.passed


def test_rotation_breaks_invariance_of_axis_projector():
    def rot(t, s):
        a = t - s
        return np.array([[math.cos(a), math.sin(a)],
                         [-math.sin(a), math.cos(a)]])

    operator = EvolutionOperator(2, "closed_form", rot)
    family = ProjectorFamily.constant(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]),
                                      np.zeros((2, 2)))
    report = check_invariance(family, operator, [(math.pi / 2, 0.0)], 1e-10)
    assert not report.passed
    # U P1 - P1 U at a quarter turn is the antidiagonal of ones
    assert report.residuals["commutation"] == pytest.approx(1.0)


def test_restricted_inverse_scalar_block(uniform_operator, split_family):
    w = compute_restricted_inverse(uniform_operator, split_family, 2, 1.0, 0.0)
    np.testing.assert_allclose(w, E_MINUS_2 * np.diag([0.0, 1.0, 0.0]),
                               rtol=1e-14, atol=1e-16)


def test_restricted_inverse_equal_times_is_projector(uniform_operator, split_family):
    for j in (2, 3):
        w = compute_restricted_inverse(uniform_operator, split_family, j, 3.0, 3.0)
        np.testing.assert_allclose(w, split_family.member(j, 3.0), atol=1e-14)


def collapse_operator():
    return EvolutionOperator(
        3, "closed_form",
        lambda t, s: np.eye(3) if t == s else np.diag([1.0, 0.0, 1.0]))


def test_rank_collapse_raises():
    family = ProjectorFamily.coordinate_split(1, 1, 1)
    with pytest.raises(NotStronglyInvariantError):
        compute_restricted_inverse(collapse_operator(), family, 2, 1.0, 0.0)


def test_compatible_on_model_operator(uniform_operator, split_family):
    report = check_compatible(split_family, uniform_operator, GRID, 1e-10)
    assert report.passed
    assert report.worst <= 1e-14


def test_compatible_fails_on_collapse(split_family):
    report = check_compatible(split_family, collapse_operator(), GRID, 1e-10)
    assert not report.passed
    assert report.notes  # the rank failure is recorded, not raised


def test_zero_third_member_is_vacuously_compatible(exp_rates):
    family = ProjectorFamily.constant(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]),
                                      np.zeros((2, 2)))
    u = GrowthRate.constant(20.0)
    operator = rate_model(u, exp_rates["h"], exp_rates["k"], exp_rates["mu"],
                          exp_rates["nu"], family)
    report = check_compatible(family, operator, GRID, 1e-10)
    assert report.passed


def sample_triples(grid, count, seed):
    rng = np.random.default_rng(seed)
    triples = []
    while len(triples) < count:
        picks = sorted(rng.choice(len(grid), size=3), reverse=True)
        triples.append(tuple(grid[i] for i in picks))
    return triples


@pytest.mark.parametrize("j", [2, 3])
def test_inverse_identities_model_operator(nonuniform_operator, split_family, j):
    triples = sample_triples(make_grid(5.0, 0.5), 50, seed=3)
    report = check_inverse_properties(nonuniform_operator, split_family, j,
                                      triples, 1e-10)
    assert report.passed, report.residuals


@pytest.mark.parametrize("j", [2, 3])
def test_inverse_identities_ode_operator(split_family, j):
    grid = make_grid(5.0, 0.5)
    gen = GeneratorSpec.constant(np.diag([-1.0, 2.0, 0.25]), 1e-3)
    operator = from_generator(gen, anchors=grid)
    report = check_inverse_properties(operator, split_family, j,
                                      sample_triples(grid, 50, seed=4), 1e-10)
    assert report.passed, report.residuals


def test_inverse_range_containment_oblique():
    # oblique (non-orthogonal) projectors still admit restricted inverses
    p1 = np.array([[1.0, 1.0], [0.0, 0.0]])
    p2 = np.eye(2) - p1
    family = ProjectorFamily.constant(np.zeros((2, 2)), p2, np.zeros((2, 2)))
    operator = EvolutionOperator(
        2, "closed_form",
        lambda t, s: np.eye(2) * math.exp(t - s))
    w = compute_restricted_inverse(operator, family, 2, 2.0, 1.0)
    assert opnorm(w - p2 @ w) <= 1e-12
    assert opnorm(operator.evaluate(2.0, 1.0) @ w - p2) <= 1e-12


def test_inverses_cache_is_shared(uniform_operator, split_family):
    inv = build_inverses(uniform_operator, split_family)
    first = inv[2].evaluate(2.0, 1.0)
    assert inv[2].evaluate(2.0, 1.0) is first
