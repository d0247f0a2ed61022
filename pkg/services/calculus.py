"""
First-order differential calculi (M, d) on a presented algebra.

d is given on generators and extended by the Leibniz rule
d(fg) = d(f).g + f.d(g) along literal words. Whether that extension is well
defined on the quotient algebra is a finite check, one per rewrite rule.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from models import Report, Status
from services.bimodule import (
    BimElement,
    BimodulePresentation,
    check_bimodule,
    format_bim_element,
    left_mul,
    right_mul,
)
from services.errors import InvalidModelError, PresentationError
from services.linalg import solve_combination
from services.ncalg import (
    AlgebraPresentation,
    AlgElement,
    Word,
    enumerate_monomials,
    format_scalar,
    format_word,
    nf,
)

logger = logging.getLogger("CALCULUS")


@dataclass(frozen=True)
class Differential:
    """d(g) for every generator g, in generator order."""

    values: Tuple[BimElement, ...]


@dataclass(frozen=True)
class CalculusModel:
    algebra: AlgebraPresentation
    bimodule: BimodulePresentation
    differential: Differential
    _cache: Dict[Word, BimElement] = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.bimodule.algebra != self.algebra:
            raise PresentationError("bimodule is presented over a different algebra")
        if len(self.differential.values) != self.algebra.ngens:
            raise PresentationError(
                f"differential needs {self.algebra.ngens} generator values, got {len(self.differential.values)}"
            )
        for value in self.differential.values:
            if any(not 0 <= i < self.bimodule.rank for i in value.components):
                raise PresentationError("differential value refers to a basis index out of range")
        # frozen: store the normalized values through object.__setattr__
        normalized = tuple(
            BimElement({i: nf(a, self.algebra) for i, a in v.components.items()})
            for v in self.differential.values
        )
        object.__setattr__(self, "differential", Differential(normalized))


def diff_word(word: Word, C: CalculusModel) -> BimElement:
    # d(g w) = d(g).w + g.d(w), suffixes right to left
    M = C.bimodule
    result = BimElement()
    for start in range(len(word) - 1, -1, -1):
        suffix = word[start:]
        cached = C._cache.get(suffix)
        if cached is None:
            head, tail = suffix[0], suffix[1:]
            cached = right_mul(C.differential.values[head], AlgElement.monomial(tail), M) + left_mul(
                AlgElement.monomial((head,)), result, M
            )
            C._cache[suffix] = cached
        result = cached
    return result


def diff(f: AlgElement, C: CalculusModel) -> BimElement:
    out = BimElement()
    for w, c in f.terms.items():
        out = out + diff_word(w, C).scale(c)
    return out


def diff_generators(C: CalculusModel) -> Dict[str, BimElement]:
    return dict(zip(C.algebra.generator_names, C.differential.values))


def check_calculus(C: CalculusModel) -> Report:
    A = C.algebra
    report = Report(title="calculus")
    unit = diff(AlgElement.one(), C)
    report.add("d(1)", Status.PASS if not unit else Status.FAIL, "" if not unit else format_bim_element(unit, C.bimodule))

    for rule in A.rules:
        discrepancy = diff(rule.rhs, C) - diff_word(rule.lhs, C)
        key = f"rule {A.format_word(rule.lhs)}"
        if discrepancy:
            report.add(key, Status.FAIL, f"discrepancy {format_bim_element(discrepancy, C.bimodule)}")
        else:
            report.add(key, Status.PASS)

    logger.info(f"Calculus check: {report.verdict.value}")
    return report


def ensure_valid(C: CalculusModel) -> None:
    report = Report.merge("calculus model", [check_bimodule(C.bimodule), check_calculus(C)])
    if not report.passed:
        raise InvalidModelError("calculus model is inconsistent", report)


@dataclass
class SpanReport:
    """Outcome of the bounded M = A.dA test; witnesses list (w, generator, a, coefficient)."""

    bound: int
    verdict: Status
    witnesses: Dict[int, List[Tuple[Word, int, Word, Fraction]]]
    unreached: List[int]

    def to_report(self, C: CalculusModel) -> Report:
        M = C.bimodule
        names = C.algebra.generator_names
        report = Report(title=f"spans (bound {self.bound})")
        for i in range(M.rank):
            if i in self.witnesses:
                parts = []
                for w, j, a, coeff in self.witnesses[i]:
                    left = f"{format_word(w, names)} " if w else ""
                    right = f".( {format_word(a, names)} )" if a else ""
                    parts.append(f"{format_scalar(coeff)} {left}d({names[j]}){right}")
                report.add(M.basis_names[i], Status.PASS, " + ".join(parts))
            else:
                report.add(M.basis_names[i], Status.INCONCLUSIVE, "not reached within bound")
        return report


def spans_check(C: CalculusModel, d_bound: int) -> SpanReport:
    """
    Semi-decision for M = A.dA: is every basis element a combination of
    w.d(g).a with deg w, deg a <= d_bound? Never answers "no".
    """
    M = C.bimodule
    monos = enumerate_monomials(C.algebra, d_bound)
    labels: List[Tuple[Word, int, Word]] = []
    columns = []
    for w in monos:
        for j in range(C.algebra.ngens):
            wd = left_mul(AlgElement.monomial(w), C.differential.values[j], M)
            for a in monos:
                vec = right_mul(wd, AlgElement.monomial(a), M)
                if vec:
                    labels.append((w, j, a))
                    columns.append(
                        {(i, u): c for i, comp in vec.components.items() for u, c in comp.terms.items()}
                    )

    witnesses: Dict[int, List[Tuple[Word, int, Word, Fraction]]] = {}
    unreached: List[int] = []
    for i in range(M.rank):
        solution = solve_combination(columns, {(i, ()): Fraction(1)})
        if solution is None:
            unreached.append(i)
            continue
        witnesses[i] = [(*labels[k], c) for k, c in enumerate(solution) if c]

    verdict = Status.INCONCLUSIVE if unreached else Status.PASS
    logger.info(f"spans_check bound {d_bound}: {verdict.value}")
    return SpanReport(bound=d_bound, verdict=verdict, witnesses=witnesses, unreached=unreached)
