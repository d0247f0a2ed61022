"""
Exact rational arithmetic over finitely presented noncommutative algebras.

An algebra is given by generators x_0 < x_1 < ... and one quadratic rule
``x_j x_i -> rhs`` for every pair j > i. Every monomial of ``rhs`` is smaller
than ``x_j x_i`` in the degree-lexicographic order, so leftmost rewriting
terminates; confluence is checked on the overlaps ``x_k x_j x_i``.
"""

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, groupby
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from models import Report, Status
from services.errors import InvalidModelError, PresentationError

logger = logging.getLogger("NCALG")

Word = Tuple[int, ...]
ScalarLike = Union[int, Fraction]

# Coefficients used when drawing random elements for property checks
COEFFICIENT_POOL = (
    Fraction(0), Fraction(1), Fraction(-1),
    Fraction(1, 2), Fraction(-1, 2), Fraction(2), Fraction(-2),
)


def monomial_key(word: Word) -> Tuple[int, Word]:
    """Degree-lexicographic key; earlier-listed generators are smaller."""
    return len(word), word


class AlgElement:
    """Finite rational linear combination of words. Immutable; zero is the empty map."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[Union[Mapping[Word, ScalarLike], Iterable[Tuple[Word, ScalarLike]]]] = None):
        clean: Dict[Word, Fraction] = {}
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for word, coeff in items:
                coeff = Fraction(coeff)
                if not coeff:
                    continue
                word = tuple(word)
                total = clean.get(word, 0) + coeff
                if total:
                    clean[word] = total
                else:
                    del clean[word]
        self._terms = clean
        self._hash = None

    @classmethod
    def zero(cls) -> "AlgElement":
        return cls()

    @classmethod
    def one(cls) -> "AlgElement":
        return cls({(): 1})

    @classmethod
    def scalar(cls, c: ScalarLike) -> "AlgElement":
        return cls({(): c})

    @classmethod
    def monomial(cls, word: Sequence[int], c: ScalarLike = 1) -> "AlgElement":
        return cls({tuple(word): c})

    @property
    def terms(self) -> Mapping[Word, Fraction]:
        return MappingProxyType(self._terms)

    def sorted_terms(self) -> List[Tuple[Word, Fraction]]:
        return sorted(self._terms.items(), key=lambda t: monomial_key(t[0]))

    def coefficient(self, word: Word) -> Fraction:
        return self._terms.get(tuple(word), Fraction(0))

    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=-1)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: "AlgElement") -> "AlgElement":
        if not isinstance(other, AlgElement):
            return NotImplemented
        return AlgElement(list(self._terms.items()) + list(other._terms.items()))

    def __sub__(self, other: "AlgElement") -> "AlgElement":
        if not isinstance(other, AlgElement):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "AlgElement":
        return AlgElement({w: -c for w, c in self._terms.items()})

    def scale(self, c: ScalarLike) -> "AlgElement":
        c = Fraction(c)
        if not c:
            return AlgElement()
        return AlgElement({w: c * v for w, v in self._terms.items()})

    def __mul__(self, c):
        # Scalars only: algebra products need a presentation, see mul().
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, AlgElement):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == AlgElement.scalar(other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{w}: {c}" for w, c in self.sorted_terms())
        return f"AlgElement({{{inner}}})"


@dataclass(frozen=True)
class RewriteRule:
    lhs: Word
    rhs: AlgElement


class AlgebraPresentation:
    """Generators plus one rewrite rule per descending generator pair."""

    def __init__(self, generator_names: Sequence[str], rules: Iterable[RewriteRule]):
        names = tuple(generator_names)
        if not names:
            raise PresentationError("at least one generator is required")
        if len(set(names)) != len(names):
            raise PresentationError(f"duplicate generator names in {list(names)}")
        self.generator_names = names

        table: Dict[Word, RewriteRule] = {}
        for rule in rules:
            lhs = tuple(rule.lhs)
            if lhs in table:
                raise PresentationError(f"duplicate rule for {self.format_word(lhs)}")
            table[lhs] = RewriteRule(lhs, rule.rhs)
        self._rules = table
        _validate_rules(self)

        self._nf_cache: Dict[Word, Dict[Word, Fraction]] = {}
        self._mirror: Optional["AlgebraPresentation"] = None
        self._confluent = False

    @property
    def ngens(self) -> int:
        return len(self.generator_names)

    @property
    def rules(self) -> Tuple[RewriteRule, ...]:
        return tuple(self._rules[lhs] for lhs in sorted(self._rules, key=monomial_key))

    def rule(self, j: int, i: int) -> RewriteRule:
        return self._rules[(j, i)]

    def index_of(self, name: str) -> int:
        try:
            return self.generator_names.index(name)
        except ValueError:
            raise PresentationError(f"unknown generator '{name}'") from None

    def gen(self, i: int) -> AlgElement:
        return AlgElement.monomial((i,))

    def format_word(self, word: Word) -> str:
        return format_word(word, self.generator_names)

    def reduce_word(self, word: Word) -> Mapping[Word, Fraction]:
        """Normal form of a single word, rewriting the leftmost descent first."""
        cached = self._nf_cache.get(word)
        if cached is not None:
            return cached
        for g in word:
            if not 0 <= g < self.ngens:
                raise PresentationError(f"generator index {g} out of range")

        # Largest pending word first: rewrites only produce smaller words.
        pending: Dict[Word, Fraction] = {word: Fraction(1)}
        result: Dict[Word, Fraction] = {}
        while pending:
            w = max(pending, key=monomial_key)
            c = pending.pop(w)
            known = self._nf_cache.get(w)
            if known is not None:
                _accumulate(result, known, c)
                continue
            p = _first_descent(w)
            if p is None:
                _accumulate(result, {w: Fraction(1)}, c)
                continue
            rewritten = {w[:p] + v + w[p + 2:]: cv for v, cv in self._rules[(w[p], w[p + 1])].rhs.terms.items()}
            _accumulate(pending, rewritten, c)
        self._nf_cache[word] = result
        return result

    def rewrite_at(self, word: Word, p: int) -> AlgElement:
        """One rewriting step at position p (the pair word[p], word[p+1] must descend)."""
        rhs = self._rules[(word[p], word[p + 1])].rhs
        return AlgElement((word[:p] + w + word[p + 2:], c) for w, c in rhs.terms.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraPresentation):
            return NotImplemented
        return self.generator_names == other.generator_names and self._rules == other._rules

    def __hash__(self) -> int:
        return hash((self.generator_names, self.rules))

    def __repr__(self) -> str:
        return f"<AlgebraPresentation(generators={list(self.generator_names)}, rules={len(self._rules)})>"


def _first_descent(word: Word) -> Optional[int]:
    for p in range(len(word) - 1):
        if word[p] > word[p + 1]:
            return p
    return None


def _accumulate(into: Dict[Word, Fraction], terms: Mapping[Word, Fraction], scale: Fraction) -> None:
    for w, c in terms.items():
        total = into.get(w, 0) + scale * c
        if total:
            into[w] = total
        else:
            into.pop(w, None)


def _validate_rules(P: AlgebraPresentation) -> None:
    n = P.ngens
    for lhs, rule in P._rules.items():
        if len(lhs) != 2 or not all(0 <= g < n for g in lhs):
            raise PresentationError(f"rule lhs {lhs} must be two generator indices")
        j, i = lhs
        if j <= i:
            raise PresentationError(
                f"lhs must be in descending generator order: {P.format_word(lhs)}"
            )
        for w in rule.rhs.terms:
            if any(not 0 <= g < n for g in w):
                raise PresentationError(f"generator index out of range in rule {P.format_word(lhs)}")
            if len(w) > 2:
                raise PresentationError(f"rhs monomial {P.format_word(w)} of {P.format_word(lhs)} is longer than 2")
            if monomial_key(w) >= monomial_key(lhs):
                raise PresentationError(
                    f"termination violation: rhs monomial {P.format_word(w) or '1'} "
                    f"is not smaller than {P.format_word(lhs)}"
                )
    for i, j in combinations(range(n), 2):
        if (j, i) not in P._rules:
            raise PresentationError(f"missing rule for {P.format_word((j, i))}")


def nf(e: AlgElement, P: AlgebraPresentation) -> AlgElement:
    out: Dict[Word, Fraction] = {}
    for w, c in e.terms.items():
        for w2, c2 in P.reduce_word(w).items():
            out[w2] = out.get(w2, 0) + c * c2
    return AlgElement(out)


def mul(a: AlgElement, b: AlgElement, P: AlgebraPresentation) -> AlgElement:
    out: Dict[Word, Fraction] = {}
    for w1, c1 in a.terms.items():
        for w2, c2 in b.terms.items():
            for w, c in P.reduce_word(w1 + w2).items():
                out[w] = out.get(w, 0) + c1 * c2 * c
    return AlgElement(out)


def mul_word(word: Word, P: AlgebraPresentation) -> AlgElement:
    return AlgElement(P.reduce_word(tuple(word)))


def check_presentation(P: AlgebraPresentation) -> Report:
    """Termination by rule shape and local confluence on every overlap x_k x_j x_i."""
    _validate_rules(P)
    report = Report(title="confluence")
    report.add("termination", Status.PASS, f"{len(P.rules)} rules decrease in deglex order")

    overlaps = list(combinations(reversed(range(P.ngens)), 3))
    if not overlaps:
        report.add("overlaps", Status.PASS, "none")
    for k, j, i in overlaps:
        word = (k, j, i)
        left_first = nf(P.rewrite_at(word, 0), P)
        right_first = nf(P.rewrite_at(word, 1), P)
        discrepancy = right_first - left_first
        key = f"overlap {P.format_word(word)}"
        if discrepancy:
            report.add(key, Status.FAIL, f"discrepancy {format_element(discrepancy, P.generator_names)}")
        else:
            report.add(key, Status.PASS)

    logger.info(f"Presentation {list(P.generator_names)}: {report.verdict.value}")
    return report


def ensure_confluent(P: AlgebraPresentation) -> None:
    if P._confluent:
        return
    report = check_presentation(P)
    if not report.passed:
        raise InvalidModelError("algebra presentation is not confluent", report)
    P._confluent = True


def enumerate_monomials(P: AlgebraPresentation, d: int) -> List[Word]:
    words: List[Word] = []
    for k in range(d + 1):
        words.extend(combinations_with_replacement(range(P.ngens), k))
    return words


def derive_seeds(seed: int, count: int) -> List[int]:
    rng = random.Random(seed)
    return [rng.randrange(2 ** 32) for _ in range(count)]


def random_element(P: AlgebraPresentation, d: int, seed: int) -> AlgElement:
    rng = random.Random(seed)
    monos = enumerate_monomials(P, d)
    picked = rng.sample(monos, rng.randint(1, min(4, len(monos))))
    return AlgElement((w, rng.choice(COEFFICIENT_POOL)) for w in picked)


def mirror_algebra(P: AlgebraPresentation) -> AlgebraPresentation:
    """
    Opposite algebra with the generator order reversed, so that every rule keeps
    the descending shape. A mirrored rhs monomial that is no longer smaller than
    its lhs is reported as a PresentationError.
    """
    if P._mirror is not None:
        return P._mirror
    n = P.ngens
    rules = []
    for (j, i), rule in P._rules.items():
        rhs = AlgElement((_reverse_word(w, n), c) for w, c in rule.rhs.terms.items())
        rules.append(RewriteRule((n - 1 - i, n - 1 - j), rhs))
    try:
        mirrored = AlgebraPresentation(tuple(reversed(P.generator_names)), rules)
    except PresentationError as e:
        raise PresentationError(f"mirrored presentation is not admissible: {e}") from e
    P._mirror = mirrored
    return mirrored


def _reverse_word(word: Word, n: int) -> Word:
    return tuple(n - 1 - g for g in reversed(word))


def mirror_element(e: AlgElement, P: AlgebraPresentation) -> AlgElement:
    """Image of e (an element of P) in the opposite algebra mirror_algebra(P)."""
    target = mirror_algebra(P)
    return nf(AlgElement((_reverse_word(w, P.ngens), c) for w, c in e.terms.items()), target)


def translate(e: AlgElement, source: AlgebraPresentation, target: AlgebraPresentation) -> AlgElement:
    index = [target.index_of(name) for name in source.generator_names]
    return nf(AlgElement((tuple(index[g] for g in w), c) for w, c in e.terms.items()), target)


def format_scalar(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_word(word: Word, names: Sequence[str]) -> str:
    parts = []
    for g, run in groupby(word):
        k = len(list(run))
        parts.append(names[g] if k == 1 else f"{names[g]}^{k}")
    return " ".join(parts)


def format_element(e: AlgElement, names: Sequence[str]) -> str:
    if not e:
        return "0"
    out = []
    for idx, (w, c) in enumerate(e.sorted_terms()):
        mag = abs(c)
        if not w:
            body = format_scalar(mag)
        elif mag == 1:
            body = format_word(w, names)
        else:
            body = f"{format_scalar(mag)} {format_word(w, names)}"
        if idx == 0:
            out.append(f"-{body}" if c < 0 else body)
        else:
            out.append(f" - {body}" if c < 0 else f" + {body}")
    return "".join(out)
