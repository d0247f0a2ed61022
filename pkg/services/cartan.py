"""
Cartan pairs and their correspondence with first-order calculi.

A right Cartan pair (R, rho) is stored as a bimodule presentation M plus the
finite action matrix E_i^rho(g_j). R is the right dual of M: elements are left
combinations sum_i h_i.E_i and E_i.f = sum_k Phi_ik(f).E_k. The action on all
of R x A is forced by

    (h.X)^rho(g)  = h X^rho(g)
    X^rho(f g)    = X^rho(f) g + (X.f)^rho(g)

so on a word E_i^rho(g w) = rho_i(g) w + sum_k Phi_ik(g) E_k^rho(w).

Left pairs are right pairs over the opposite algebra (see LeftCartanPair).
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple, Union

from config import settings
from models import Report, Status
from services.bimodule import (
    BimElement,
    BimodulePresentation,
    left_mul,
    mirror_bimodule,
    random_bim_element,
    right_mul,
)
from services.calculus import (
    CalculusModel,
    Differential,
    check_calculus,
    diff,
    ensure_valid,
)
from services.duality import (
    DualElement,
    canonical_embed,
    dual_basis,
    dual_left_mul,
    dual_right_mul,
    format_dual_element,
    identify,
    pair as pair_eval,
    random_dual_element,
)
from services.errors import InvalidModelError, PresentationError
from services.linalg import nullspace
from services.ncalg import (
    AlgebraPresentation,
    AlgElement,
    Word,
    derive_seeds,
    enumerate_monomials,
    format_element,
    mirror_algebra,
    mirror_element,
    mul,
    nf,
    random_element,
)
from services.trials import run_trials

logger = logging.getLogger("CARTAN")


@dataclass(frozen=True)
class RightCartanPair:
    bimodule: BimodulePresentation
    # action[i][j] = E_i^rho(g_j)
    action: Tuple[Tuple[AlgElement, ...], ...]
    _cache: Dict[Word, Tuple[AlgElement, ...]] = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        M = self.bimodule
        if len(self.action) != M.rank or any(len(row) != M.algebra.ngens for row in self.action):
            raise PresentationError(
                f"action matrix must be {M.rank}x{M.algebra.ngens} (basis x generators)"
            )
        normalized = tuple(tuple(nf(e, M.algebra) for e in row) for row in self.action)
        object.__setattr__(self, "action", normalized)

    @property
    def algebra(self) -> AlgebraPresentation:
        return self.bimodule.algebra


@dataclass(frozen=True)
class LeftCartanPair:
    """
    Left pair over the opposite of inner.algebra. Its bimodule L is the inner
    pair's R read over the opposite algebra, which is right-free and presented
    by mirror(inner.bimodule).
    """

    inner: RightCartanPair

    @property
    def algebra(self) -> AlgebraPresentation:
        return mirror_algebra(self.inner.algebra)

    @property
    def bimodule(self) -> BimodulePresentation:
        return mirror_bimodule(self.inner.bimodule)


@dataclass
class KernelReport:
    degree: int
    kernel: List[DualElement]

    @property
    def faithful(self) -> bool:
        return not self.kernel

    def to_report(self, pair: RightCartanPair) -> Report:
        report = Report(title=f"faithfulness (degree {self.degree})")
        if self.faithful:
            report.add("kernel", Status.PASS, "FAITHFUL-UP-TO-BOUND")
        else:
            report.add("kernel", Status.FAIL, f"dimension {len(self.kernel)}")
            for n, X in enumerate(self.kernel):
                report.add(f"kernel[{n}]", Status.INFO, format_dual_element(X, pair.bimodule))
        return report


def basis_action(pair: RightCartanPair, word: Word) -> Tuple[AlgElement, ...]:
    M = pair.bimodule
    A = M.algebra
    result = tuple(AlgElement() for _ in range(M.rank))
    for start in range(len(word) - 1, -1, -1):
        suffix = word[start:]
        cached = pair._cache.get(suffix)
        if cached is None:
            head, tail = suffix[0], AlgElement.monomial(suffix[1:])
            phi = M.structure[head]
            cached = tuple(
                mul(pair.action[i][head], tail, A)
                + sum((mul(phi[i][k], result[k], A) for k in range(M.rank)), AlgElement())
                for i in range(M.rank)
            )
            pair._cache[suffix] = cached
        result = cached
    return result


def action_apply(pair: RightCartanPair, X: DualElement, f: AlgElement) -> AlgElement:
    A = pair.algebra
    total = AlgElement()
    for w, c in f.terms.items():
        values = basis_action(pair, w)
        for i, h in X.components.items():
            total = total + mul(h, values[i], A).scale(c)
    return total


def derived_rule_apply(pair: RightCartanPair, i: int, a: AlgElement, f: AlgElement) -> AlgElement:
    """(E_i.a)^rho(f) = E_i^rho(a f) - E_i^rho(a) f."""
    A = pair.algebra
    E = dual_basis(i)
    return action_apply(pair, E, mul(a, f, A)) - mul(action_apply(pair, E, a), f, A)


def _rule_compatibility(pair: RightCartanPair, report: Report) -> None:
    A = pair.algebra
    M = pair.bimodule
    for rule in A.rules:
        lhs = basis_action(pair, rule.lhs)
        for i in range(M.rank):
            rhs = action_apply(pair, dual_basis(i), rule.rhs)
            discrepancy = rhs - lhs[i]
            key = f"rule {A.format_word(rule.lhs)} on {M.basis_names[i]}"
            if discrepancy:
                report.add(key, Status.FAIL, f"discrepancy {format_element(discrepancy, A.generator_names)}")
            else:
                report.add(key, Status.PASS)


def _law_trials(pair: RightCartanPair, d: int) -> Dict[str, Callable[[int], Optional[str]]]:
    A = pair.algebra
    M = pair.bimodule
    names = A.generator_names

    def draw(seed: int):
        s = derive_seeds(seed, 5)
        return (
            random_dual_element(M, d, s[0]),
            random_element(A, d, s[1]),
            random_element(A, d, s[2]),
            random_element(A, d, s[3]),
        )

    def left_linearity(seed: int) -> Optional[str]:
        X, h, g, _ = draw(seed)
        lhs = action_apply(pair, dual_left_mul(h, X, M), g)
        rhs = mul(h, action_apply(pair, X, g), A)
        if lhs != rhs:
            return f"h={format_element(h, names)}, g={format_element(g, names)}: {format_element(lhs - rhs, names)}"
        return None

    def twisted_leibniz(seed: int) -> Optional[str]:
        X, f, g, _ = draw(seed)
        lhs = action_apply(pair, X, mul(f, g, A))
        rhs = mul(action_apply(pair, X, f), g, A) + action_apply(pair, dual_right_mul(X, f, M), g)
        if lhs != rhs:
            return f"f={format_element(f, names)}, g={format_element(g, names)}: {format_element(lhs - rhs, names)}"
        return None

    def bracketing(seed: int) -> Optional[str]:
        X, f, g, h = draw(seed)
        fg, gh = mul(f, g, A), mul(g, h, A)
        first = mul(action_apply(pair, X, f), gh, A) + action_apply(pair, dual_right_mul(X, f, M), gh)
        second = mul(action_apply(pair, X, fg), h, A) + action_apply(pair, dual_right_mul(X, fg, M), h)
        if first != second:
            return f"f={format_element(f, names)}, g={format_element(g, names)}, h={format_element(h, names)}"
        return None

    return {
        "(h.X)(g) = h X(g)": left_linearity,
        "X(fg) = X(f) g + (X.f)(g)": twisted_leibniz,
        "bracketing (f)(gh) = (fg)(h)": bracketing,
    }


def check_right_axioms(
    pair: RightCartanPair,
    trials: Optional[int] = None,
    d: Optional[int] = None,
    seed: Optional[int] = None,
) -> Report:
    trials = settings.trials if trials is None else trials
    d = settings.degree if d is None else d
    seed = settings.seed if seed is None else seed

    report = Report(title="right cartan axioms")
    unit = basis_action(pair, ())
    report.add("X(1) = 0", Status.PASS if not any(unit) else Status.FAIL)
    _rule_compatibility(pair, report)

    for key, trial in _law_trials(pair, d).items():
        failure = run_trials(trial, trials, seed)
        if failure is None:
            report.add(key, Status.PASS, f"{trials} trials, degree {d}, seed {seed}")
        else:
            t, detail = failure
            report.add(key, Status.FAIL, f"trial {t}: {detail}")

    logger.info(f"Right axioms: {report.verdict.value}")
    return report


def ensure_rule_compatible(pair: RightCartanPair) -> None:
    report = Report(title="right cartan axioms")
    _rule_compatibility(pair, report)
    if not report.passed:
        raise InvalidModelError("action matrix is not compatible with the algebra rules", report)


def pair_from_calculus(C: CalculusModel) -> RightCartanPair:
    """Right partial derivatives: E_i^rho(g_j) is the i-th component of d(g_j)."""
    ensure_valid(C)
    M = C.bimodule
    action = tuple(
        tuple(C.differential.values[j].component(i) for j in range(C.algebra.ngens)) for i in range(M.rank)
    )
    return RightCartanPair(M, action)


def calculus_from_pair(pair: RightCartanPair) -> CalculusModel:
    """
    d_rho with <E_i, d_rho f> = E_i^rho(f). The left dual of R = M* is identified
    with M itself, so the calculus lives on the pair's presentation.
    """
    M = pair.bimodule
    values = tuple(
        BimElement({i: pair.action[i][j] for i in range(M.rank)}) for j in range(M.algebra.ngens)
    )
    return CalculusModel(M.algebra, M, Differential(values))


def reconstructed_differential(pair: RightCartanPair, f: AlgElement) -> BimElement:
    return BimElement({i: action_apply(pair, dual_basis(i), f) for i in range(pair.bimodule.rank)})


def check_reconstruction(
    pair: RightCartanPair,
    trials: Optional[int] = None,
    d: Optional[int] = None,
    seed: Optional[int] = None,
) -> Report:
    """
    Leibniz law of d_rho, evaluated against the dual basis and random X:
    <X, d(fg)> = <X, d(f).g> + <X.f, d(g)>.
    """
    trials = settings.trials if trials is None else trials
    d = settings.degree if d is None else d
    seed = settings.seed if seed is None else seed

    M = pair.bimodule
    A = M.algebra
    names = A.generator_names
    C = calculus_from_pair(pair)
    report = Report(title="reconstructed calculus")
    report.records.extend(check_calculus(C).records)

    def leibniz(s: int) -> Optional[str]:
        seeds = derive_seeds(s, 3)
        f, g = random_element(A, d, seeds[0]), random_element(A, d, seeds[1])
        d_f, d_g = reconstructed_differential(pair, f), reconstructed_differential(pair, g)
        d_fg = reconstructed_differential(pair, mul(f, g, A))
        spanning = [dual_basis(i) for i in range(M.rank)] + [random_dual_element(M, d, seeds[2])]
        for X in spanning:
            lhs = pair_eval(X, d_fg, M)
            rhs = pair_eval(X, right_mul(d_f, g, M), M) + pair_eval(dual_right_mul(X, f, M), d_g, M)
            if lhs != rhs:
                return f"f={format_element(f, names)}, g={format_element(g, names)}"
        return None

    def agreement(s: int) -> Optional[str]:
        f = random_element(A, d, s)
        if diff(f, C) != reconstructed_differential(pair, f):
            return f"f={format_element(f, names)}"
        return None

    for key, trial in (("<X, d(fg)> = <X, d(f).g> + <X.f, d(g)>", leibniz), ("Leibniz extension = evaluation", agreement)):
        failure = run_trials(trial, trials, seed)
        report.add(key, Status.PASS if failure is None else Status.FAIL, "" if failure is None else f"trial {failure[0]}: {failure[1]}")
    return report




def roundtrip_calculus(
    C: CalculusModel,
    trials: Optional[int] = None,
    d: Optional[int] = None,
    seed: Optional[int] = None,
) -> Report:
    """d = d_partial on the reflexive identification."""
    trials = settings.trials if trials is None else trials
    d = settings.degree if d is None else d
    seed = settings.seed if seed is None else seed

    A = C.algebra
    names = A.generator_names
    rebuilt = calculus_from_pair(pair_from_calculus(C))
    report = Report(title="roundtrip calculus")
    same = rebuilt.differential == C.differential
    report.add("generator values", Status.PASS if same else Status.FAIL)

    def trial(s: int) -> Optional[str]:
        f = random_element(A, d, s)
        original = identify(canonical_embed(diff(f, C), C.bimodule))
        if diff(f, rebuilt) != original:
            return f"f={format_element(f, names)}"
        return None

    failure = run_trials(trial, trials, seed)
    report.add("d(f) = d_partial(f)", Status.PASS if failure is None else Status.FAIL,
               f"{trials} trials" if failure is None else f"trial {failure[0]}: {failure[1]}")
    return report


def roundtrip_pair(
    pair: RightCartanPair,
    trials: Optional[int] = None,
    d: Optional[int] = None,
    seed: Optional[int] = None,
) -> Report:
    """rho = partial_rho: the pair rebuilt from its calculus acts identically."""
    trials = settings.trials if trials is None else trials
    d = settings.degree if d is None else d
    seed = settings.seed if seed is None else seed

    ensure_rule_compatible(pair)
    A = pair.algebra
    names = A.generator_names
    rebuilt = pair_from_calculus(calculus_from_pair(pair))
    report = Report(title="roundtrip pair")
    report.add("action matrix", Status.PASS if rebuilt.action == pair.action else Status.FAIL)

    def trial(s: int) -> Optional[str]:
        seeds = derive_seeds(s, 2)
        X = random_dual_element(pair.bimodule, d, seeds[0])
        f = random_element(A, d, seeds[1])
        if action_apply(rebuilt, X, f) != action_apply(pair, X, f):
            return f"f={format_element(f, names)}"
        return None

    failure = run_trials(trial, trials, seed)
    report.add("X^rho(f) = X^partial(f)", Status.PASS if failure is None else Status.FAIL,
               f"{trials} trials" if failure is None else f"trial {failure[0]}: {failure[1]}")
    return report


def faithful_bounded(pair: RightCartanPair, d: int) -> KernelReport:
    """
    Kernel of X -> X^rho restricted to X = sum f_i.E_i with deg f_i <= d and
    tested on all normal words of degree <= d + 1.
    """
    M = pair.bimodule
    A = M.algebra
    unknowns = [(i, w) for i in range(M.rank) for w in enumerate_monomials(A, d)]
    tests = enumerate_monomials(A, d + 1)
    columns = []
    for i, w in unknowns:
        column: Dict[Tuple[Word, Word], Fraction] = {}
        for u in tests:
            value = mul(AlgElement.monomial(w), basis_action(pair, u)[i], A)
            for word, c in value.terms.items():
                column[(u, word)] = c
        columns.append(column)

    kernel = []
    for vec in nullspace(columns):
        comps: Dict[int, AlgElement] = {}
        for (i, w), c in zip(unknowns, vec):
            if c:
                comps[i] = comps.get(i, AlgElement()) + AlgElement.monomial(w, c)
        kernel.append(DualElement(comps))

    logger.info(f"faithful_bounded degree {d}: kernel dimension {len(kernel)}")
    return KernelReport(degree=d, kernel=kernel)


def is_generalized_vector_fields(pair: RightCartanPair, d: int) -> bool:
    return faithful_bounded(pair, d).faithful


def mirror(p: Union[RightCartanPair, LeftCartanPair]) -> Union[RightCartanPair, LeftCartanPair]:
    if isinstance(p, RightCartanPair):
        return LeftCartanPair(p)
    if isinstance(p, LeftCartanPair):
        return p.inner
    raise TypeError(f"cannot mirror {type(p).__name__}")


def left_action_apply(pair: LeftCartanPair, X: BimElement, f: AlgElement) -> AlgElement:
    """
    X^lambda(f) for X = sum_i E_i.b_i in L and f in the left pair's algebra,
    computed on the inner right pair.
    """
    A = pair.algebra
    inner_X = DualElement({i: mirror_element(b, A) for i, b in X.components.items()})
    value = action_apply(pair.inner, inner_X, mirror_element(f, A))
    return mirror_element(value, pair.inner.algebra)


def check_left_axioms(
    pair: LeftCartanPair,
    trials: Optional[int] = None,
    d: Optional[int] = None,
    seed: Optional[int] = None,
) -> Report:
    """
    (X.g)^lambda(f) = X^lambda(f) g and X^lambda(fg) = f X^lambda(g) + (g.X)^lambda(f),
    with X in L and the products of L taken in mirror(inner.bimodule).
    """
    trials = settings.trials if trials is None else trials
    d = settings.degree if d is None else d
    seed = settings.seed if seed is None else seed

    L = pair.bimodule
    B = pair.algebra
    names = B.generator_names

    report = Report(title="left cartan axioms")
    unit = [left_action_apply(pair, BimElement.basis(i), AlgElement.one()) for i in range(L.rank)]
    report.add("X(1) = 0", Status.PASS if not any(unit) else Status.FAIL)
    _rule_compatibility(pair.inner, report)

    def draw(s: int):
        seeds = derive_seeds(s, 3)
        return random_bim_element(L, d, seeds[0]), random_element(B, d, seeds[1]), random_element(B, d, seeds[2])

    def right_linearity(s: int) -> Optional[str]:
        X, f, g = draw(s)
        lhs = left_action_apply(pair, right_mul(X, g, L), f)
        rhs = mul(left_action_apply(pair, X, f), g, B)
        if lhs != rhs:
            return f"f={format_element(f, names)}, g={format_element(g, names)}: {format_element(lhs - rhs, names)}"
        return None

    def twisted_leibniz(s: int) -> Optional[str]:
        X, f, g = draw(s)
        lhs = left_action_apply(pair, X, mul(f, g, B))
        rhs = mul(f, left_action_apply(pair, X, g), B) + left_action_apply(pair, left_mul(g, X, L), f)
        if lhs != rhs:
            return f"f={format_element(f, names)}, g={format_element(g, names)}: {format_element(lhs - rhs, names)}"
        return None

    for key, trial in (("(X.g)(f) = X(f) g", right_linearity), ("X(fg) = f X(g) + (g.X)(f)", twisted_leibniz)):
        failure = run_trials(trial, trials, seed)
        if failure is None:
            report.add(key, Status.PASS, f"{trials} trials, degree {d}, seed {seed}")
        else:
            report.add(key, Status.FAIL, f"trial {failure[0]}: {failure[1]}")

    logger.info(f"Left axioms: {report.verdict.value}")
    return report


def left_pair_from_calculus(C: CalculusModel) -> LeftCartanPair:
    """Left partial derivatives f -> <df, X>, read over the opposite algebra."""
    return LeftCartanPair(pair_from_calculus(C))
