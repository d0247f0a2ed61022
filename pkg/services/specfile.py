"""
Line-oriented presentation files (*.nc).

    # comment
    generators: x y
    rule: y x = 2 x y
    basis: dx dy
    left: x dy = dy.( 1/2 x ) + dx.( 3 y )
    d: x = dx.( 1 )
    rho: dx x = 1

`left:` and `rho:` must cover every (generator, basis) pair once the section
is used; `d:` must cover every generator.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pyparsing as pp

from models import Report
from services.bimodule import (
    BimElement,
    BimodulePresentation,
    format_bim_element,
    mirror_bimodule,
)
from services.calculus import CalculusModel, Differential
from services.cartan import RightCartanPair
from services.duality import DualElement, format_dual_element
from services.errors import ParseError, PresentationError
from services.ncalg import (
    AlgebraPresentation,
    AlgElement,
    RewriteRule,
    format_element,
    mirror_algebra,
    nf,
)

logger = logging.getLogger("SPECFILE")

KEYWORDS = ("generators", "rule", "basis", "left", "d", "rho")


@dataclass(frozen=True)
class _At:
    text: str
    loc: int


def _located(expr: pp.ParserElement, label: str) -> pp.ParserElement:
    return expr.set_name(label).set_parse_action(lambda s, loc, t: _At(t[0], loc))


# Grammar: <expr> is a signed sum of [coeff] word terms, words are x^k factors.
NUMBER = _located(pp.Regex(r"\d+(?:/\d+)?"), "number")
NAME = _located(pp.Regex(r"[A-Za-z_][A-Za-z0-9_']*"), "name")
NAMES = pp.OneOrMore(NAME)

FACTOR = pp.Group(NAME("gen") + pp.Optional(pp.Suppress("^") + NUMBER("exp")))
TERM = NUMBER("coeff") + pp.Group(pp.ZeroOrMore(FACTOR))("word") | pp.Group(pp.OneOrMore(FACTOR))("word")


def _signed_sum(term: pp.ParserElement) -> pp.ParserElement:
    first = pp.Group(pp.Optional("-", default="+") + term)
    return first + pp.ZeroOrMore(pp.Group(pp.one_of("+ -") + term))


EXPR = _signed_sum(TERM)
MODULE_EXPR = _signed_sum(
    NAME("basis") + pp.Suppress(".") + pp.Suppress("(") + pp.Group(EXPR)("value") + pp.Suppress(")")
)
DUAL_EXPR = _signed_sum(
    pp.Suppress("(") + pp.Group(EXPR)("value") + pp.Suppress(")") + pp.Suppress(".") + NAME("basis")
)


@dataclass(frozen=True)
class _Source:
    """Part of one input line; offset is the number of characters before it on that line."""

    text: str
    line: int
    offset: int = 0

    def error(self, message: str, loc: int) -> ParseError:
        return ParseError(message, self.line, self.offset + loc + 1)

    def parse(self, grammar: pp.ParserElement) -> pp.ParseResults:
        try:
            return grammar.parse_string(self.text, parse_all=True)
        except pp.ParseBaseException as e:
            raise ParseError(e.msg, self.line, self.offset + e.col) from None

    @property
    def start(self) -> int:
        return len(self.text) - len(self.text.lstrip())

    def is_zero_literal(self) -> bool:
        return self.text.strip() == "0"


@dataclass
class ModelFile:
    algebra: AlgebraPresentation
    bimodule: Optional[BimodulePresentation] = None
    differential: Optional[Differential] = None
    # action[i][j] = E_i^rho(g_j)
    action: Optional[Tuple[Tuple[AlgElement, ...], ...]] = None
    # first source line of each section, for diagnostics
    spans: Dict[str, int] = field(default_factory=dict, compare=False, repr=False)

    def calculus(self) -> CalculusModel:
        if self.bimodule is None or self.differential is None:
            raise PresentationError("this command needs 'basis:', 'left:' and 'd:' sections")
        return CalculusModel(self.algebra, self.bimodule, self.differential)

    def cartan_pair(self) -> RightCartanPair:
        if self.bimodule is None or self.action is None:
            raise PresentationError("this command needs 'basis:', 'left:' and 'rho:' sections")
        return RightCartanPair(self.bimodule, self.action)

    def require_bimodule(self) -> BimodulePresentation:
        if self.bimodule is None:
            raise PresentationError("this command needs 'basis:' and 'left:' sections")
        return self.bimodule


def _lookup(src: _Source, tok: _At, pool: Sequence[str], what: str) -> int:
    if tok.text not in pool:
        raise src.error(f"unknown {what} '{tok.text}'", tok.loc)
    return list(pool).index(tok.text)


def _rational(src: _Source, tok: _At) -> Fraction:
    try:
        return Fraction(tok.text)
    except ZeroDivisionError:
        raise src.error(f"zero denominator in '{tok.text}'", tok.loc) from None


def _word(src: _Source, factors: pp.ParseResults, names: Sequence[str]) -> Tuple[int, ...]:
    word: List[int] = []
    for factor in factors:
        g = _lookup(src, factor["gen"], names, "generator")
        power = 1
        if "exp" in factor:
            exp = factor["exp"]
            if "/" in exp.text or int(exp.text) < 1:
                raise src.error(f"exponent must be a positive integer, got '{exp.text}'", exp.loc)
            power = int(exp.text)
        word.extend([g] * power)
    return tuple(word)


def _sign(term: pp.ParseResults) -> int:
    return -1 if term[0] == "-" else 1


def _terms(src: _Source, parsed: pp.ParseResults, names: Sequence[str]) -> AlgElement:
    """Literal sum of terms, not reduced."""
    total = AlgElement()
    for term in parsed:
        coeff = _rational(src, term["coeff"]) if "coeff" in term else Fraction(1)
        word = _word(src, term.get("word", []), names)
        total = total + AlgElement.monomial(word, _sign(term) * coeff)
    return total


def _expr(src: _Source, P: AlgebraPresentation) -> AlgElement:
    return nf(_terms(src, src.parse(EXPR), P.generator_names), P)


def _module_expr(src: _Source, P: AlgebraPresentation, basis: Sequence[str]) -> BimElement:
    if src.is_zero_literal():
        return BimElement()
    parts = []
    for term in src.parse(MODULE_EXPR):
        i = _lookup(src, term["basis"], basis, "basis element")
        a = nf(_terms(src, term["value"], P.generator_names), P)
        parts.append((i, a.scale(_sign(term))))
    return BimElement(parts)


def _dual_expr(src: _Source, P: AlgebraPresentation, basis: Sequence[str]) -> DualElement:
    if src.is_zero_literal():
        return DualElement()
    parts = []
    for term in src.parse(DUAL_EXPR):
        i = _lookup(src, term["basis"], basis, "basis element")
        a = nf(_terms(src, term["value"], P.generator_names), P)
        parts.append((i, a.scale(_sign(term))))
    return DualElement(parts)


def parse_expr(text: str, P: AlgebraPresentation, line: int = 1) -> AlgElement:
    return _expr(_Source(text, line), P)


def parse_module_expr(text: str, M: BimodulePresentation, line: int = 1) -> BimElement:
    return _module_expr(_Source(text, line), M.algebra, M.basis_names)


def parse_dual_expr(text: str, M: BimodulePresentation, line: int = 1) -> DualElement:
    return _dual_expr(_Source(text, line), M.algebra, M.basis_names)


def _names(src: _Source, what: str) -> Tuple[str, ...]:
    names: List[str] = []
    for tok in src.parse(NAMES):
        if tok.text in KEYWORDS:
            raise src.error(f"'{tok.text}' is reserved and cannot be a {what} name", tok.loc)
        if tok.text in names:
            raise src.error(f"duplicate {what} name '{tok.text}'", tok.loc)
        names.append(tok.text)
    return tuple(names)


def _lhs(src: _Source, *slots: Tuple[Sequence[str], str]) -> Tuple[int, ...]:
    """Left-hand side made of exactly one name per slot, each looked up in its pool."""
    tokens = list(src.parse(NAMES))
    if len(tokens) < len(slots):
        raise src.error(f"expected a {slots[len(tokens)][1]} name", len(src.text.rstrip()))
    if len(tokens) > len(slots):
        raise src.error("unexpected trailing input", tokens[len(slots)].loc)
    return tuple(_lookup(src, tok, pool, what) for tok, (pool, what) in zip(tokens, slots))


def parse(text: str) -> ModelFile:
    generators: Optional[Tuple[str, ...]] = None
    basis: Optional[Tuple[str, ...]] = None
    rules: Dict[Tuple[int, int], _Source] = {}
    left: Dict[Tuple[int, int], _Source] = {}
    diffs: Dict[int, _Source] = {}
    rho: Dict[Tuple[int, int], _Source] = {}
    spans: Dict[str, int] = {}

    # 1. Headers and left-hand sides; bodies wait until every name is known.
    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        if not content.strip():
            continue
        key, sep, body = content.partition(":")
        key = key.strip()
        if not sep or key not in KEYWORDS:
            raise ParseError(f"expected one of {', '.join(k + ':' for k in KEYWORDS)}", lineno, 1)
        offset = content.index(":") + 1
        spans.setdefault(key, lineno)

        if key == "generators":
            if generators is not None:
                raise ParseError("generators declared twice", lineno, 1)
            generators = _names(_Source(body, lineno, offset), "generator")
            continue
        if key == "basis":
            if basis is not None:
                raise ParseError("basis declared twice", lineno, 1)
            basis = _names(_Source(body, lineno, offset), "basis")
            continue
        if generators is None:
            raise ParseError(f"'{key}:' before 'generators:'", lineno, 1)

        lhs_text, eq, rhs_text = body.partition("=")
        if not eq:
            raise ParseError("expected '='", lineno, offset + len(body) + 1)
        lhs = _Source(lhs_text, lineno, offset)
        rhs = _Source(rhs_text, lineno, offset + len(lhs_text) + 1)
        at = lhs.start

        if key == "rule":
            j, i = _lhs(lhs, (generators, "generator"), (generators, "generator"))
            if j <= i:
                raise lhs.error(f"lhs must be in descending generator order: {generators[j]} {generators[i]}", at)
            if (j, i) in rules:
                raise lhs.error(f"duplicate rule for {generators[j]} {generators[i]}", at)
            rules[(j, i)] = rhs
            continue

        if basis is None:
            raise ParseError(f"'{key}:' before 'basis:'", lineno, 1)
        if key == "d":
            (g,) = _lhs(lhs, (generators, "generator"))
            if g in diffs:
                raise lhs.error(f"duplicate d: for {generators[g]}", at)
            diffs[g] = rhs
        elif key == "left":
            g, b = _lhs(lhs, (generators, "generator"), (basis, "basis element"))
            if (g, b) in left:
                raise lhs.error(f"duplicate left: for {generators[g]} {basis[b]}", at)
            left[(g, b)] = rhs
        else:
            b, g = _lhs(lhs, (basis, "basis element"), (generators, "generator"))
            if (b, g) in rho:
                raise lhs.error(f"duplicate rho: for {basis[b]} {generators[g]}", at)
            rho[(b, g)] = rhs

    if generators is None:
        raise ParseError("missing 'generators:' line", 1, 1)

    # 2. Rule bodies stay literal; the presentation checks their shape.
    rule_list = [RewriteRule(lhs, _terms(src, src.parse(EXPR), generators)) for lhs, src in rules.items()]
    algebra = AlgebraPresentation(generators, rule_list)

    model = ModelFile(algebra=algebra, spans=spans)
    if basis is None:
        if left or diffs or rho:
            raise ParseError("'left:', 'd:' and 'rho:' need a 'basis:' line", spans.get("left", 1), 1)
        logger.info(f"Parsed algebra {list(generators)}")
        return model

    # 3. Bimodule, then the optional d: and rho: sections over it.
    n, rank = len(generators), len(basis)
    _require_complete(left, [(g, b) for g in range(n) for b in range(rank)], "left",
                      lambda k: f"{generators[k[0]]} {basis[k[1]]}", spans)
    structure = [[[AlgElement() for _ in range(rank)] for _ in range(rank)] for _ in range(n)]
    for (g, b), src in left.items():
        for j, a in _module_expr(src, algebra, basis).components.items():
            structure[g][j][b] = a
    model.bimodule = BimodulePresentation(algebra, basis, structure)

    if diffs:
        _require_complete(diffs, list(range(n)), "d", lambda g: generators[g], spans)
        model.differential = Differential(tuple(_module_expr(diffs[g], algebra, basis) for g in range(n)))

    if rho:
        _require_complete(rho, [(b, g) for b in range(rank) for g in range(n)], "rho",
                          lambda k: f"{basis[k[0]]} {generators[k[1]]}", spans)
        model.action = tuple(
            tuple(_expr(rho[(b, g)], algebra) for g in range(n)) for b in range(rank)
        )

    logger.info(f"Parsed model: generators {list(generators)}, basis {list(basis)}")
    return model



def _require_complete(found: dict, expected: list, section: str, label, spans: Dict[str, int]) -> None:
    missing = [k for k in expected if k not in found]
    if missing:
        raise ParseError(
            f"incomplete '{section}:' section, missing {', '.join(label(k) for k in missing)}",
            spans.get(section, 1),
            1,
        )


def emit_model(m: ModelFile) -> str:
    A = m.algebra
    names = A.generator_names
    lines = [f"generators: {' '.join(names)}"]
    for rule in A.rules:
        lines.append(f"rule: {A.format_word(rule.lhs)} = {format_element(rule.rhs, names)}")
    M = m.bimodule
    if M is not None:
        lines.append(f"basis: {' '.join(M.basis_names)}")
        for g in range(A.ngens):
            for b in range(M.rank):
                column = BimElement({j: M.structure[g][j][b] for j in range(M.rank)})
                lines.append(f"left: {names[g]} {M.basis_names[b]} = {format_bim_element(column, M)}")
        if m.differential is not None:
            for g, value in enumerate(m.differential.values):
                lines.append(f"d: {names[g]} = {format_bim_element(value, M)}")
        if m.action is not None:
            for b in range(M.rank):
                for g in range(A.ngens):
                    lines.append(f"rho: {M.basis_names[b]} {names[g]} = {format_element(m.action[b][g], names)}")
    return "\n".join(lines) + "\n"


Emittable = Union[ModelFile, AlgElement, BimElement, Report]


def emit(value: Emittable, context: Union[AlgebraPresentation, BimodulePresentation, None] = None, machine: bool = False) -> str:
    """Canonical text of a model file, element or report."""
    if isinstance(value, ModelFile):
        return emit_model(value)
    if isinstance(value, Report):
        return "\n".join(value.machine_lines() if machine else value.human_lines())
    if isinstance(value, AlgElement):
        if isinstance(context, BimodulePresentation):
            context = context.algebra
        if context is None:
            raise TypeError("emitting an algebra element needs its presentation")
        return format_element(value, context.generator_names)
    if isinstance(value, DualElement):
        if not isinstance(context, BimodulePresentation):
            raise TypeError("emitting a dual element needs its bimodule presentation")
        return format_dual_element(value, context)
    if isinstance(value, BimElement):
        if not isinstance(context, BimodulePresentation):
            raise TypeError("emitting a bimodule element needs its bimodule presentation")
        return format_bim_element(value, context)
    raise TypeError(f"cannot emit {type(value).__name__}")


def mirror_model(m: ModelFile) -> ModelFile:
    """Opposite presentation of the algebra and bimodule; d and rho do not carry over."""
    if m.differential is not None or m.action is not None:
        logger.warning("mirror keeps only the algebra and bimodule; dropping d: and rho: sections")
    bimodule = mirror_bimodule(m.bimodule) if m.bimodule is not None else None
    return ModelFile(algebra=mirror_algebra(m.algebra), bimodule=bimodule)
