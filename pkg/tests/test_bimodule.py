import pytest
from hypothesis import given, settings

from models import Status
from services.bimodule import (
    BimElement,
    BimodulePresentation,
    Side,
    check_bimodule,
    format_bim_element,
    identity_matrix,
    left_mul,
    mat_mul,
    mirror,
    mirror_bim_element,
    mirror_bimodule,
    phi_matrix,
    random_bim_element,
    right_mul,
)
from services.errors import InvalidModelError, PresentationError
from services.ncalg import AlgElement, mirror_algebra, mul, nf, random_element
from services.specfile import parse, parse_expr, parse_module_expr
from tests.helpers import load, load_text, qplane_text, seeds

X, Y = (0,), (1,)


def test_right_mul_is_componentwise(qplane2):
    M = qplane2.bimodule
    e_dx = BimElement.basis(0)
    assert right_mul(e_dx, AlgElement.monomial(X), M) == BimElement({0: AlgElement.monomial(X)})
    # (dx.y).x = dx.(y x) = dx.(2 x y)
    assert right_mul(BimElement.basis(0, AlgElement.monomial(Y)), AlgElement.monomial(X), M) == BimElement(
        {0: AlgElement.monomial((0, 1), 2)}
    )


def test_left_mul_uses_structure_matrices(qplane2):
    M = qplane2.bimodule
    x = AlgElement.monomial(X)
    assert left_mul(x, BimElement.basis(1), M) == parse_module_expr("dx.( 3 y ) + dy.( 1/2 x )", M)
    assert format_bim_element(left_mul(x, BimElement.basis(0), M), M) == "dx.( 4 x )"
    # x.(x.dx) = 16 x^2 on dx
    assert left_mul(mul(x, x, M.algebra), BimElement.basis(0), M) == parse_module_expr("dx.( 16 x^2 )", M)


@settings(max_examples=200)
@given(seeds, seeds, seeds)
def test_bimodule_laws(s1, s2, s3):
    M = parse(qplane_text("3", "2", "-1", "1/2", "5")).bimodule
    A = M.algebra
    v = random_bim_element(M, 3, s1)
    f, g = random_element(A, 3, s2), random_element(A, 3, s3)
    assert left_mul(f, right_mul(v, g, M), M) == right_mul(left_mul(f, v, M), g, M)
    assert left_mul(mul(f, g, A), v, M) == left_mul(f, left_mul(g, v, M), M)
    assert right_mul(v, mul(f, g, A), M) == right_mul(right_mul(v, f, M), g, M)
    assert left_mul(AlgElement.one(), v, M) == v


def test_fixtures_pass_bimodule_check(poly2, qplane2):
    assert check_bimodule(poly2.bimodule).passed
    assert check_bimodule(qplane2.bimodule).passed


def test_inconsistent_structure_matrix_fails(qplane2):
    M = qplane2.bimodule
    structure = [list(map(list, m)) for m in M.structure]
    structure[1][0][0] = AlgElement.monomial(Y, 5)
    report = check_bimodule(BimodulePresentation(M.algebra, M.basis_names, structure))
    assert report.verdict == Status.FAIL
    assert report.failures()[0].key == "rule y x"


def test_bimodule_over_nonconfluent_algebra_is_rejected(nonconfluent3):
    one = AlgElement.one()
    with pytest.raises(InvalidModelError):
        BimodulePresentation(nonconfluent3.algebra, ["e"], [[[one]]] * 3)


def test_rank_mismatch_is_rejected(qplane2):
    A = qplane2.algebra
    with pytest.raises(PresentationError, match="rank mismatch"):
        BimodulePresentation(A, ["dx", "dy"], [[[AlgElement.one()]], [[AlgElement.one()]]])


def test_mirror_bimodule_is_consistent_and_involutive(qplane2):
    M = qplane2.bimodule
    N = mirror_bimodule(M)
    assert N.algebra == mirror_algebra(M.algebra)
    assert N.side == Side.MIRROR
    assert check_bimodule(N).passed
    assert mirror(N) == M
    assert mirror(M.algebra) == N.algebra


@given(seeds, seeds)
def test_mirror_element_turns_right_action_into_left(s1, s2):
    M = parse(qplane_text("2", "4", "1/2", "8", "4")).bimodule
    B = mirror_algebra(M.algebra)
    v = random_bim_element(M, 2, s1)
    f = random_element(M.algebra, 2, s2)
    f_op = mirror_bim_element(BimElement({0: f}), M).component(0)
    expected = BimElement({i: mul(f_op, a, B) for i, a in mirror_bim_element(v, M).components.items()})
    assert mirror_bim_element(right_mul(v, f, M), M) == expected


QPLANE2 = load("qplane2.nc").bimodule


def test_structure_matrices_of_qplane2():
    M = QPLANE2
    A = M.algebra
    e = lambda text: parse_expr(text, A)
    assert phi_matrix(AlgElement.one(), M) == identity_matrix(2)
    # rows are indexed by the output basis element
    assert phi_matrix(e("x"), M) == ((e("4 x"), e("3 y")), (AlgElement(), e("1/2 x")))
    assert phi_matrix(e("y"), M) == ((e("8 y"), AlgElement()), (AlgElement(), e("4 y")))


@given(seeds, seeds)
def test_phi_is_multiplicative(s1, s2):
    M = QPLANE2
    A = M.algebra
    f, g = random_element(A, 2, s1), random_element(A, 2, s2)
    assert phi_matrix(mul(f, g, A), M) == mat_mul(phi_matrix(f, M), phi_matrix(g, M), A)


@given(seeds)
def test_left_mul_ignores_how_f_is_written(seed):
    M = QPLANE2
    v = random_bim_element(M, 2, seed)
    literal = AlgElement({(1, 0, 1): 1, (1, 1, 0): -2, (1,): 3})
    assert left_mul(literal, v, M) == left_mul(nf(literal, M.algebra), v, M)


def test_perturbed_structure_entry_fails_check():
    text = load_text("qplane2.nc").replace("left: x dy = dy.( 1/2 x ) + dx.( 3 y )", "left: x dy = dy.( 1/2 x ) + dx.( 3 x )")
    M = parse(text).bimodule
    report = check_bimodule(M)
    assert report.verdict == Status.FAIL
    assert [r.key for r in report.failures()] == ["rule y x"]
