"""
Duals of right-free bimodules of finite rank.

The right dual M* is left-free on the dual basis e^i with <e^i, e_j> = delta_ij,
so its elements are stored as left combinations sum_i f_i.e^i. Its right
multiplication is the transpose of left multiplication on M:
<X.f, x> = <X, f.x>, i.e. e^i.f = sum_k Phi_ik(f).e^k.

Left duals are only built for mirrored presentations (see LeftDual).
"""

import logging
from typing import Sequence

from services.bimodule import (
    BimElement,
    BimodulePresentation,
    Matrix,
    left_mul,
    mirror_bim_element,
    mirror_bimodule,
    phi_matrix,
    random_bim_element,
    right_mul,
)
from services.errors import PresentationError
from services.ncalg import (
    AlgebraPresentation,
    AlgElement,
    format_element,
    mirror_algebra,
    mirror_element,
    mul,
)

logger = logging.getLogger("DUALITY")


class DualElement(BimElement):
    """sum_i f_i.e^i, stored as basis index -> left coefficient f_i."""

    __slots__ = ()


class DualDualElement(BimElement):
    """Element of the left dual of M*, stored by its values on the dual basis."""

    __slots__ = ()


def _check_range(v: BimElement, M: BimodulePresentation) -> None:
    if any(not 0 <= i < M.rank for i in v.components):
        raise PresentationError("presentation mismatch: basis index outside the presentation")
    n = M.algebra.ngens
    for a in v.components.values():
        if any(not 0 <= g < n for w in a.terms for g in w):
            raise PresentationError("presentation mismatch: coefficient uses a generator outside the algebra")


def pair(X: DualElement, x: BimElement, M: BimodulePresentation) -> AlgElement:
    """<sum f_i.e^i, sum e_j.a_j> = sum_i f_i a_i."""
    _check_range(X, M)
    _check_range(x, M)
    A = M.algebra
    total = AlgElement()
    for i, f in X.components.items():
        a = x.components.get(i)
        if a is not None:
            total = total + mul(f, a, A)
    return total


def dual_basis(i: int) -> DualElement:
    return DualElement({i: AlgElement.one()})


def apply_right_map(alpha: Matrix, x: BimElement, P: AlgebraPresentation) -> BimElement:
    """Right-module map between free right modules: alpha(e_j) = sum_i e_i.alpha_ij."""
    return BimElement(
        (i, mul(alpha[i][j], a, P)) for i in range(len(alpha)) for j, a in x.components.items()
    )


def transpose_apply(alpha: Matrix, X: DualElement, P: AlgebraPresentation) -> DualElement:
    """alpha^T on duals, fixed by <alpha^T(X), x> = <X, alpha(x)>."""
    cols = len(alpha[0]) if alpha else 0
    return DualElement(
        (j, mul(f, alpha[i][j], P)) for i, f in X.components.items() for j in range(cols)
    )


def dual_right_mul(X: DualElement, f: AlgElement, M: BimodulePresentation) -> DualElement:
    # Right multiplication on M* is the transpose of f. on M.
    return transpose_apply(phi_matrix(f, M), X, M.algebra)


def dual_left_mul(f: AlgElement, X: DualElement, M: BimodulePresentation) -> DualElement:
    return DualElement({i: mul(f, h, M.algebra) for i, h in X.components.items()})


def random_dual_element(M: BimodulePresentation, d: int, seed: int) -> DualElement:
    return DualElement(random_bim_element(M, d, seed).components)


def canonical_embed(x: BimElement, M: BimodulePresentation) -> DualDualElement:
    """x -> x~ with <X, x~> = <X, x>; on a free module x~ has the components of x."""
    _check_range(x, M)
    return DualDualElement(x.components)


def pair_dual_dual(X: DualElement, xi: DualDualElement, M: BimodulePresentation) -> AlgElement:
    A = M.algebra
    total = AlgElement()
    for i, f in X.components.items():
        v = xi.components.get(i)
        if v is not None:
            total = total + mul(f, v, A)
    return total


def dual_dual_left_mul(f: AlgElement, xi: DualDualElement, M: BimodulePresentation) -> DualDualElement:
    """(f.xi)(X) = xi(X.f), read off on the dual basis."""
    return DualDualElement(
        (i, pair_dual_dual(dual_right_mul(dual_basis(i), f, M), xi, M)) for i in range(M.rank)
    )


def dual_dual_right_mul(xi: DualDualElement, f: AlgElement, M: BimodulePresentation) -> DualDualElement:
    return DualDualElement(
        (i, mul(pair_dual_dual(dual_basis(i), xi, M), f, M.algebra)) for i in range(M.rank)
    )


def identify(xi: DualDualElement) -> BimElement:
    return BimElement(xi.components)


def format_dual_element(X: DualElement, M: BimodulePresentation) -> str:
    if not X:
        return "0"
    names = M.algebra.generator_names
    return " + ".join(
        f"( {format_element(f, names)} ).{M.basis_names[i]}" for i, f in sorted(X.components.items())
    )


class LeftDual:
    """
    The left-free bimodule L presented by mirror(M), read over M's algebra A,
    together with its left dual *L.

    Elements of L are sum_i a_i.e_i and elements of *L are sum_i e^i.b_i; both
    are stored by their coefficients in A. Every operation is carried out on
    the right-handed side of the mirrored presentation and mapped back:
    e_a.g = sum_b Phi_ab(g).e_b in L.
    """

    def __init__(self, M: BimodulePresentation):
        self.base = M
        self.algebra = M.algebra
        self.mirrored = mirror_bimodule(M)
        self._opposite = mirror_algebra(M.algebra)

    def _to_mirror(self, e: AlgElement) -> AlgElement:
        return mirror_element(e, self.algebra)

    def _from_mirror(self, e: AlgElement) -> AlgElement:
        return mirror_element(e, self._opposite)

    def _module_to_mirror(self, x: BimElement) -> BimElement:
        return mirror_bim_element(x, self.base)

    def _module_from_mirror(self, x: BimElement) -> BimElement:
        return BimElement({i: self._from_mirror(a) for i, a in x.components.items()})

    def _dual_to_mirror(self, X: DualElement) -> DualElement:
        return DualElement({i: self._to_mirror(b) for i, b in X.components.items()})

    def _dual_from_mirror(self, X: DualElement) -> DualElement:
        return DualElement({i: self._from_mirror(b) for i, b in X.components.items()})

    def pair(self, x: BimElement, X: DualElement) -> AlgElement:
        value = pair(self._dual_to_mirror(X), self._module_to_mirror(x), self.mirrored)
        return self._from_mirror(value)

    def module_left_mul(self, f: AlgElement, x: BimElement) -> BimElement:
        N = self.mirrored
        return self._module_from_mirror(right_mul(self._module_to_mirror(x), self._to_mirror(f), N))

    def module_right_mul(self, x: BimElement, f: AlgElement) -> BimElement:
        N = self.mirrored
        return self._module_from_mirror(left_mul(self._to_mirror(f), self._module_to_mirror(x), N))

    def dual_left_mul(self, f: AlgElement, X: DualElement) -> DualElement:
        # transpose of right multiplication on L: <x.f, X> = <x, f.X>
        N = self.mirrored
        return self._dual_from_mirror(dual_right_mul(self._dual_to_mirror(X), self._to_mirror(f), N))

    def dual_right_mul(self, X: DualElement, f: AlgElement) -> DualElement:
        N = self.mirrored
        return self._dual_from_mirror(dual_left_mul(self._to_mirror(f), self._dual_to_mirror(X), N))

    def basis_names(self) -> Sequence[str]:
        return self.base.basis_names
