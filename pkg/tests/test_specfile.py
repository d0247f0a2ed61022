from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from models import Report, Status
from services.bimodule import BimElement
from services.calculus import Differential
from services.errors import ParseError, PresentationError
from services.ncalg import AlgElement, format_element, random_element
from services.specfile import (
    ModelFile,
    emit,
    mirror_model,
    parse,
    parse_dual_expr,
    parse_expr,
    parse_module_expr,
)
from tests.helpers import load_text, qplane_text, seeds

scalars = st.sampled_from(["1", "2", "-1", "1/2", "-3/4", "5"])


def test_poly2_fixture_shape(poly2):
    assert poly2.algebra.generator_names == ("x", "y")
    assert len(poly2.algebra.rules) == 1
    assert poly2.bimodule.rank == 2
    assert poly2.differential is not None
    assert poly2.action is None


def test_rule_line():
    m = parse("generators: x y\nrule: y x = 2 x y\n")
    [rule] = m.algebra.rules
    assert rule.lhs == (1, 0)
    assert rule.rhs == AlgElement.monomial((0, 1), 2)


def test_ascending_rule_is_a_parse_error():
    with pytest.raises(ParseError, match="lhs must be in descending generator order") as exc:
        parse("generators: x y\nrule: x y = y x\n")
    assert exc.value.line == 2


def test_unknown_generator_reports_position():
    with pytest.raises(ParseError) as exc:
        parse("generators: x y\nrule: y x = 2 x z\n")
    assert exc.value.line == 2
    assert exc.value.column == 17
    assert "unknown generator 'z'" in str(exc.value)


def test_duplicate_rule_is_rejected():
    with pytest.raises(ParseError, match="duplicate rule"):
        parse("generators: x y\nrule: y x = x y\nrule: y x = 2 x y\n")


def test_incomplete_left_section_is_rejected():
    text = "generators: x y\nrule: y x = x y\nbasis: dx\nleft: x dx = dx.( x )\n"
    with pytest.raises(ParseError, match="missing y dx"):
        parse(text)


def test_unknown_basis_and_bad_keyword():
    with pytest.raises(ParseError, match="unknown basis element 'dz'"):
        parse(load_text("poly2.nc").replace("d: y = dy.( 1 )", "d: y = dz.( 1 )"))
    with pytest.raises(ParseError) as exc:
        parse("generators: x\nrules: nothing\n")
    assert exc.value.line == 2


def test_missing_rule_is_a_presentation_error():
    with pytest.raises(PresentationError, match="missing rule"):
        parse("generators: x y\n")


def test_comments_and_blank_lines_are_ignored():
    m = parse("# header\n\ngenerators: x   # one generator\n")
    assert m.algebra.generator_names == ("x",)
    assert m.algebra.rules == ()


def test_expression_entry_points(qplane2):
    A, M = qplane2.algebra, qplane2.bimodule
    assert parse_expr("y x", A) == AlgElement.monomial((0, 1), 2)
    assert parse_expr("-1/2 x^2 + 3 - x", A) == AlgElement({(0, 0): Fraction(-1, 2), (): 3, (0,): -1})
    assert parse_module_expr("dy.( x ) - dx.( y )", M) == BimElement(
        {1: AlgElement.monomial((0,)), 0: AlgElement.monomial((1,), -1)}
    )
    assert parse_module_expr("0", M) == BimElement()
    assert parse_dual_expr("( 2 ).dx + ( x ).dy", M).component(1) == AlgElement.monomial((0,))
    with pytest.raises(ParseError):
        parse_expr("x +", A)
    with pytest.raises(ParseError):
        parse_expr("x^0", A)


def test_emit_canonical_values(qplane2):
    A, M = qplane2.algebra, qplane2.bimodule
    assert emit(AlgElement.monomial((0, 0, 1), 2), A) == "2 x^2 y"
    assert emit(BimElement({0: AlgElement.monomial((0,), 5)}), M) == "dx.( 5 x )"
    assert emit(AlgElement(), A) == "0"
    assert emit(parse_dual_expr("( 3 y ).dy", M), M) == "( 3 y ).dy"


def test_emit_report():
    report = Report(title="t").add("a", Status.PASS).add("b", Status.FAIL, "why")
    assert emit(report, machine=True).splitlines() == ["a\tPASS\t", "b\tFAIL\twhy", "verdict\tFAIL\tt"]
    assert emit(report).splitlines()[-1] == "verdict: FAIL"


def test_emit_is_canonical_for_fixtures():
    for name in ("poly2.nc", "qplane2.nc", "qplane2_pair.nc", "nonconfluent3.nc"):
        m = parse(load_text(name))
        text = emit(m)
        assert parse(text) == m
        assert emit(parse(text)) == text


def test_qplane2_canonical_left_line(qplane2):
    assert "left: x dy = dx.( 3 y ) + dy.( 1/2 x )" in emit(qplane2).splitlines()


@given(q=scalars, a=scalars, b=scalars, c=scalars, e=scalars, s=seeds, with_rho=st.booleans())
def test_parse_inverts_emit_on_generated_files(q, a, b, c, e, s, with_rho):
    base = parse(qplane_text(q, a, b, c, e))
    A = base.algebra
    values = tuple(
        BimElement({i: random_element(A, 2, s + 2 * g + i) for i in range(2)}) for g in range(2)
    )
    action = tuple(tuple(random_element(A, 2, s + 7 + 2 * i + g) for g in range(2)) for i in range(2)) if with_rho else None
    m = ModelFile(algebra=A, bimodule=base.bimodule, differential=Differential(values), action=action)
    assert parse(emit(m)) == m


def test_mirror_model_keeps_algebra_and_bimodule(qplane2):
    mirrored = mirror_model(qplane2)
    assert mirrored.differential is None
    text = emit(mirrored)
    assert text.splitlines()[:2] == ["generators: y x", "rule: x y = 2 y x"]
    assert mirror_model(parse(text)) == ModelFile(algebra=qplane2.algebra, bimodule=qplane2.bimodule)


def test_model_file_section_requirements(nonconfluent3, poly2):
    with pytest.raises(PresentationError, match="'d:'"):
        nonconfluent3.calculus()
    with pytest.raises(PresentationError, match="'rho:'"):
        poly2.cartan_pair()
    assert format_element(parse_expr("y x", poly2.algebra), poly2.algebra.generator_names) == "x y"


@pytest.mark.parametrize("name", ["poly2.nc", "qplane2.nc"])
def test_parse_inverts_emit_on_mirrors(name):
    mirrored = mirror_model(parse(load_text(name)))
    assert parse(emit(mirrored)) == mirrored


def test_syntax_error_points_into_the_rule_body():
    with pytest.raises(ParseError) as exc:
        parse("generators: x y\nrule: y x = 2 x +\n")
    assert exc.value.line == 2
    assert exc.value.column > 12
