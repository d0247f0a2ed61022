import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from models import Status
from services.errors import InvalidModelError, PresentationError
from services.ncalg import (
    AlgebraPresentation,
    AlgElement,
    RewriteRule,
    check_presentation,
    ensure_confluent,
    enumerate_monomials,
    format_element,
    mirror_algebra,
    mirror_element,
    mul,
    mul_word,
    nf,
    random_element,
    translate,
)
from tests.helpers import load, seeds

X, Y = (0,), (1,)


def qplane():
    return AlgebraPresentation(["x", "y"], [RewriteRule((1, 0), AlgElement.monomial((0, 1), 2))])


def test_qplane_reorders_with_factor():
    P = qplane()
    assert mul(AlgElement.monomial(Y), AlgElement.monomial(X), P) == AlgElement.monomial((0, 1), 2)
    # (y x)(y x) = 4 x (y x) y = 8 x^2 y^2
    assert mul_word((1, 0, 1, 0), P) == AlgElement.monomial((0, 0, 1, 1), 8)


def test_element_arithmetic_and_scalars():
    a = AlgElement({X: 1, Y: Fraction(-1, 2)})
    assert a - a == 0
    assert (a * 2).coefficient(Y) == -1
    assert AlgElement.one() == 1
    assert AlgElement().degree() == -1
    assert AlgElement.monomial((0, 1, 1), 3).degree() == 3


def test_format_element_canonical():
    names = ("x", "y")
    assert format_element(AlgElement.monomial((0, 0, 1), 2), names) == "2 x^2 y"
    assert format_element(AlgElement({X: 1, Y: Fraction(-1, 2)}), names) == "x - 1/2 y"
    assert format_element(AlgElement.monomial(X, -1), names) == "-x"
    assert format_element(AlgElement({(): 3, X: 1}), names) == "3 + x"
    assert format_element(AlgElement(), names) == "0"


@settings(max_examples=200)
@given(seeds)
def test_nf_is_idempotent(seed):
    P = qplane()
    f = AlgElement({(1, 0, 1): 1, (1, 1, 0, 0): Fraction(1, 2)}) + random_element(P, 5, seed)
    once = nf(f, P)
    assert nf(once, P) == once


@settings(max_examples=200)
@given(seeds, seeds, seeds)
def test_mul_is_associative(s1, s2, s3):
    P = qplane()
    f, g, h = (random_element(P, 3, s) for s in (s1, s2, s3))
    assert mul(mul(f, g, P), h, P) == mul(f, mul(g, h, P), P)


def test_nonconfluent_overlap_reports_discrepancy(nonconfluent3):
    report = check_presentation(nonconfluent3.algebra)
    assert report.verdict == Status.FAIL
    [failure] = report.failures()
    assert failure.key == "overlap z y x"
    assert failure.detail == "discrepancy 1"

    with pytest.raises(InvalidModelError) as exc:
        ensure_confluent(nonconfluent3.algebra)
    assert exc.value.report.failures()[0].detail == "discrepancy 1"


def test_fixture_presentations_pass(poly2, qplane2):
    for m in (poly2, qplane2):
        report = check_presentation(m.algebra)
        assert report.passed
        assert [r.detail for r in report.records if r.key == "overlaps"] == ["none"]


def test_ascending_lhs_is_rejected():
    with pytest.raises(PresentationError, match="lhs must be in descending generator order"):
        AlgebraPresentation(["x", "y"], [RewriteRule((0, 1), AlgElement.monomial((1, 0)))])


def test_non_decreasing_rhs_is_rejected():
    with pytest.raises(PresentationError, match="termination violation"):
        AlgebraPresentation(["x", "y"], [RewriteRule((1, 0), AlgElement.monomial((1, 1)))])


def test_missing_rule_is_rejected():
    with pytest.raises(PresentationError, match="missing rule for z x"):
        AlgebraPresentation(
            ["x", "y", "z"],
            [RewriteRule((1, 0), AlgElement.monomial((0, 1))), RewriteRule((2, 1), AlgElement.monomial((1, 2)))],
        )


def test_enumerate_monomials_counts_normal_words():
    P = qplane()
    assert len(enumerate_monomials(P, 3)) == 10
    assert enumerate_monomials(P, 1) == [(), (0,), (1,)]


def test_mirror_reverses_generator_order():
    B = mirror_algebra(qplane())
    assert B.generator_names == ("y", "x")
    [rule] = B.rules
    assert B.format_word(rule.lhs) == "x y"
    assert format_element(rule.rhs, B.generator_names) == "2 y x"
    assert mirror_algebra(qplane()) == B


@given(seeds, seeds)
def test_mirror_element_is_an_antihomomorphism(s1, s2):
    P = qplane()
    B = mirror_algebra(P)
    f, g = random_element(P, 2, s1), random_element(P, 2, s2)
    assert mirror_element(mul(f, g, P), P) == mul(mirror_element(g, P), mirror_element(f, P), B)
    assert mirror_element(mirror_element(f, P), B) == f


def test_translate_renames_by_generator():
    P = AlgebraPresentation(["x", "y"], [RewriteRule((1, 0), AlgElement.monomial((0, 1)))])
    B = mirror_algebra(P)
    f = AlgElement({(0, 0, 1): 2, (): 1})
    assert translate(translate(f, P, B), B, P) == f
    # commutative: translation agrees with the mirror
    assert translate(f, P, B) == mirror_element(f, P)


def q_commuting(seed: int, n: int = 3) -> AlgebraPresentation:
    """g_j g_i = q g_i g_j + c with random q and c; every such presentation mirrors."""
    rng = random.Random(seed)
    rules = []
    for j in range(n):
        for i in range(j):
            rhs = AlgElement({(i, j): rng.choice([1, 2, -1, Fraction(1, 2)]), (): rng.choice([0, 1, -3])})
            rules.append(RewriteRule((j, i), rhs))
    return AlgebraPresentation(["a", "b", "c"][:n], rules)


def test_random_element_is_deterministic_per_seed():
    P = qplane()
    assert random_element(P, 3, 42) == random_element(P, 3, 42)
    assert all(random_element(P, 0, s).degree() <= 0 for s in range(30))
    assert any(random_element(P, 3, s).degree() == 3 for s in range(100))


@given(seeds)
def test_random_element_is_in_normal_form(seed):
    P = qplane()
    f = random_element(P, 4, seed)
    assert nf(f, P) == f
    assert f.degree() <= 4


@given(seeds, seeds, seeds)
def test_mul_unit_and_bilinearity(s1, s2, s3):
    P = qplane()
    f, g, h = (random_element(P, 4, s) for s in (s1, s2, s3))
    one = AlgElement.one()
    assert mul(one, f, P) == f
    assert mul(f, one, P) == f
    assert mul(f, g + h, P) == mul(f, g, P) + mul(f, h, P)
    assert mul(f + g, h, P) == mul(f, h, P) + mul(g, h, P)
    assert mul(f.scale(Fraction(-3, 2)), g, P) == mul(f, g, P).scale(Fraction(-3, 2))


def test_long_words_reduce_without_deep_recursion():
    P = qplane()
    word = (1,) * 40 + (0,) * 40
    # every one of the 1600 swaps contributes a factor 2
    assert mul_word(word, P) == AlgElement.monomial((0,) * 40 + (1,) * 40, 2 ** 1600)


@settings(max_examples=20)
@given(seeds)
def test_mirror_is_an_involution_on_presentations(seed):
    P = q_commuting(seed)
    B = mirror_algebra(P)
    assert B.generator_names == ("c", "b", "a")
    assert mirror_algebra(B) == P


@given(seeds)
def test_mirror_of_commutative_plane_is_a_relabeling(seed):
    A = load("poly2.nc").algebra
    B = mirror_algebra(A)
    f = random_element(A, 3, seed)
    assert translate(mirror_element(f, A), B, A) == f
