"""
Bimodules that are free of finite rank as right modules.

Elements are stored as right combinations sum_i e_i.a_i. The left action is
given on generators by matrices Phi(g) with g.e_i = sum_j e_j.Phi_ji(g) and
extended multiplicatively, Phi(fg) = Phi(f) Phi(g).
"""

import logging
from enum import Enum
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

from models import Report, Status
from services.errors import PresentationError
from services.ncalg import (
    AlgebraPresentation,
    AlgElement,
    ScalarLike,
    Word,
    derive_seeds,
    ensure_confluent,
    format_element,
    mirror_algebra,
    mirror_element,
    mul,
    nf,
    random_element,
)

logger = logging.getLogger("BIMODULE")

Matrix = Tuple[Tuple[AlgElement, ...], ...]


class Side(str, Enum):
    RIGHT = "right"
    MIRROR = "mirror"


class BimElement:
    """sum_i e_i.a_i as a map basis index -> right coefficient. Absent key means zero."""

    __slots__ = ("_components", "_hash")

    def __init__(self, components: Optional[Union[Mapping[int, AlgElement], Iterable[Tuple[int, AlgElement]]]] = None):
        clean: Dict[int, AlgElement] = {}
        if components:
            items = components.items() if isinstance(components, Mapping) else components
            for i, a in items:
                total = clean.get(i, AlgElement()) + a
                if total:
                    clean[i] = total
                else:
                    clean.pop(i, None)
        self._components = clean
        self._hash = None

    @classmethod
    def zero(cls) -> "BimElement":
        return cls()

    @classmethod
    def basis(cls, i: int, coeff: Optional[AlgElement] = None) -> "BimElement":
        return cls({i: coeff if coeff is not None else AlgElement.one()})

    @property
    def components(self) -> Mapping[int, AlgElement]:
        return MappingProxyType(self._components)

    def component(self, i: int) -> AlgElement:
        return self._components.get(i, AlgElement())

    def __bool__(self) -> bool:
        return bool(self._components)

    def __add__(self, other: "BimElement") -> "BimElement":
        if not isinstance(other, type(self)):
            return NotImplemented
        return type(self)(list(self._components.items()) + list(other._components.items()))

    def __sub__(self, other: "BimElement") -> "BimElement":
        if not isinstance(other, type(self)):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "BimElement":
        return type(self)({i: -a for i, a in self._components.items()})

    def scale(self, c: ScalarLike) -> "BimElement":
        return type(self)({i: a.scale(c) for i, a in self._components.items()})

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self._components == other._components

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((type(self).__name__, frozenset(self._components.items())))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{i}: {a!r}" for i, a in sorted(self._components.items()))
        return f"{type(self).__name__}({{{inner}}})"


class BimodulePresentation:
    def __init__(
        self,
        algebra: AlgebraPresentation,
        basis_names: Sequence[str],
        structure: Sequence[Sequence[Sequence[AlgElement]]],
        side: Side = Side.RIGHT,
    ):
        # A non-confluent algebra has no normal-form basis to build on.
        ensure_confluent(algebra)
        self.algebra = algebra

        names = tuple(basis_names)
        if not names:
            raise PresentationError("bimodule rank must be at least 1")
        if len(set(names)) != len(names):
            raise PresentationError(f"duplicate basis names in {list(names)}")
        clash = set(names) & set(algebra.generator_names)
        if clash:
            raise PresentationError(f"basis names clash with generators: {sorted(clash)}")
        self.basis_names = names

        if len(structure) != algebra.ngens:
            raise PresentationError(
                f"expected {algebra.ngens} structure matrices, got {len(structure)}"
            )
        rank = len(names)
        matrices = []
        for g, matrix in enumerate(structure):
            if len(matrix) != rank or any(len(row) != rank for row in matrix):
                raise PresentationError(
                    f"rank mismatch: matrix of {algebra.generator_names[g]} is not {rank}x{rank}"
                )
            matrices.append(tuple(tuple(nf(entry, algebra) for entry in row) for row in matrix))
        self.structure: Tuple[Matrix, ...] = tuple(matrices)
        self.side = Side(side)

        self._phi_cache: Dict[Word, Matrix] = {}
        self._mirror: Optional["BimodulePresentation"] = None

    @property
    def rank(self) -> int:
        return len(self.basis_names)

    def basis_index(self, name: str) -> int:
        try:
            return self.basis_names.index(name)
        except ValueError:
            raise PresentationError(f"unknown basis element '{name}'") from None

    def phi_word(self, word: Word) -> Matrix:
        # Suffixes are built right to left: Phi(g w) = Phi(g) Phi(w).
        result = identity_matrix(self.rank)
        for start in range(len(word) - 1, -1, -1):
            suffix = word[start:]
            cached = self._phi_cache.get(suffix)
            if cached is None:
                cached = mat_mul(self.structure[word[start]], result, self.algebra)
                self._phi_cache[suffix] = cached
            result = cached
        return result

    # side is a label, not part of the presentation
    def __eq__(self, other) -> bool:
        if not isinstance(other, BimodulePresentation):
            return NotImplemented
        return (
            self.algebra == other.algebra
            and self.basis_names == other.basis_names
            and self.structure == other.structure
        )

    def __hash__(self) -> int:
        return hash((self.algebra, self.basis_names, self.structure))

    def __repr__(self) -> str:
        return f"<BimodulePresentation(basis={list(self.basis_names)}, side={self.side.value})>"


def identity_matrix(rank: int) -> Matrix:
    return tuple(
        tuple(AlgElement.one() if r == c else AlgElement() for c in range(rank)) for r in range(rank)
    )


def mat_mul(A: Matrix, B: Matrix, P: AlgebraPresentation) -> Matrix:
    n, m, k = len(A), len(B), len(B[0]) if B else 0
    return tuple(
        tuple(sum((mul(A[r][j], B[j][c], P) for j in range(m)), AlgElement()) for c in range(k))
        for r in range(n)
    )


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_scale(A: Matrix, c: ScalarLike) -> Matrix:
    return tuple(tuple(a.scale(c) for a in row) for row in A)


def phi_matrix(f: AlgElement, M: BimodulePresentation) -> Matrix:
    result = tuple(tuple(AlgElement() for _ in range(M.rank)) for _ in range(M.rank))
    for w, c in f.terms.items():
        result = mat_add(result, mat_scale(M.phi_word(w), c))
    return result


def right_mul(x: BimElement, f: AlgElement, M: BimodulePresentation) -> BimElement:
    return BimElement({i: mul(a, f, M.algebra) for i, a in x.components.items()})


def left_mul(f: AlgElement, x: BimElement, M: BimodulePresentation) -> BimElement:
    """f.(sum_i e_i.a_i) = sum_j e_j.(sum_i Phi_ji(f) a_i)."""
    phi = phi_matrix(f, M)
    out = []
    for j in range(M.rank):
        for i, a in x.components.items():
            out.append((j, mul(phi[j][i], a, M.algebra)))
    return BimElement(out)


def check_bimodule(M: BimodulePresentation) -> Report:
    """Phi must respect every rewrite rule: Phi(x_j) Phi(x_i) = Phi(rhs)."""
    A = M.algebra
    report = Report(title="bimodule")
    unit = phi_matrix(AlgElement.one(), M)
    report.add("unit", Status.PASS if unit == identity_matrix(M.rank) else Status.FAIL)

    for rule in A.rules:
        lhs = M.phi_word(rule.lhs)
        rhs = phi_matrix(rule.rhs, M)
        bad = []
        for r in range(M.rank):
            for c in range(M.rank):
                diff = rhs[r][c] - lhs[r][c]
                if diff:
                    bad.append(
                        f"({M.basis_names[r]},{M.basis_names[c]}): {format_element(diff, A.generator_names)}"
                    )
        key = f"rule {A.format_word(rule.lhs)}"
        if bad:
            report.add(key, Status.FAIL, "; ".join(bad))
        else:
            report.add(key, Status.PASS)

    logger.info(f"Bimodule {list(M.basis_names)}: {report.verdict.value}")
    return report


def mirror_bimodule(M: BimodulePresentation) -> BimodulePresentation:
    """
    Bimodule over the opposite algebra with Phi'(g)_ab = mirror(Phi(g)_ba).
    Read over the original algebra it is the left-free bimodule with
    e_a.g = sum_b Phi_ab(g).e_b, the shape of the right dual.
    """
    if M._mirror is not None:
        return M._mirror
    A = M.algebra
    B = mirror_algebra(A)
    n, rank = A.ngens, M.rank
    structure = []
    for g_new in range(n):
        phi = M.structure[n - 1 - g_new]
        structure.append(
            [[mirror_element(phi[b][a], A) for b in range(rank)] for a in range(rank)]
        )
    side = Side.MIRROR if M.side == Side.RIGHT else Side.RIGHT
    mirrored = BimodulePresentation(B, M.basis_names, structure, side)
    M._mirror = mirrored
    return mirrored


def mirror(P: Union[AlgebraPresentation, BimodulePresentation]):
    if isinstance(P, BimodulePresentation):
        return mirror_bimodule(P)
    if isinstance(P, AlgebraPresentation):
        return mirror_algebra(P)
    raise TypeError(f"cannot mirror {type(P).__name__}")


def mirror_bim_element(x: BimElement, M: BimodulePresentation) -> BimElement:
    return BimElement({i: mirror_element(a, M.algebra) for i, a in x.components.items()})


def random_bim_element(M: BimodulePresentation, d: int, seed: int) -> BimElement:
    seeds = derive_seeds(seed, M.rank + 1)
    # Leave some components empty so sparse elements are exercised too.
    keep = [s % 3 != 0 for s in seeds[1:]]
    return BimElement(
        (i, random_element(M.algebra, d, seeds[i + 1])) for i in range(M.rank) if keep[i] or i == seeds[0] % M.rank
    )


def format_bim_element(x: BimElement, M: BimodulePresentation) -> str:
    if not x:
        return "0"
    names = M.algebra.generator_names
    return " + ".join(
        f"{M.basis_names[i]}.( {format_element(a, names)} )" for i, a in sorted(x.components.items())
    )
