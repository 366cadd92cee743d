"""
Suite case generation.

Each suite expands a SuiteConfig into independent cases. A case is a named
zero-argument check returning a CaseOutcome; the runner turns outcomes and
exceptions into SuiteRecords.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import islice, product
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence

from sympy.combinatorics import Permutation

from src.algebra_core import (
    HalfInt,
    RandomTable,
    c_mn_antisymmetry_check,
    c_rt_sides,
    comb_identity_sides,
    enumerate_shuffles2,
    enumerate_shuffles3,
    shuffle_parity,
)
from src.config.schemas import CaseStatus, Mismatch, SuiteConfig, SuiteName, SuiteRecord
from src.config.settings import (
    ANTISYMMETRY_BOUND,
    AXIOM_MAX_WEIGHT,
    CMN_G_BOUND,
    CRT_BOUND,
    EXP_DELTA_MAX_MODE,
    KERNEL_DERIVATIVE_BOUND,
    MODULE_MAX_WEIGHT,
    PARITY_MAX_R,
    SHUFFLE_MAX_R,
    WICK_DISTINCT_MAX_LETTERS,
    WICK_MAX_LETTERS,
    WICK_MAX_MODE,
    ZERO_WORD_MAX_LEN,
)
from src.fock_space import VElement, VWord, WWord, space_labels, v_basis, w_basis
from src.identity_checks import (
    axiom_suite,
    closed_iterate_mismatch,
    closed_product_mismatch,
    d_comm_failure_repro,
    exp_delta_commutator_check,
    mismatch,
    weak_assoc_check,
    wick_mismatch,
)
from src.normal_order import zero_left_recursion, zero_right_recursion
from src.series import Expansion, Window1, c_mn_g_sides, kernel_derivative_check, make_window
from src.vertex_ops import exp_delta, exp_delta_direct

logger = logging.getLogger(__name__)


@dataclass
class CaseOutcome:
    passed: bool
    first_mismatch: Optional[Mismatch] = None
    details: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class SuiteCase:
    suite: SuiteName
    name: str
    check: Callable[[], CaseOutcome]

    def run(self) -> SuiteRecord:
        outcome = self.check()
        return SuiteRecord(
            suite=self.suite,
            case=self.name,
            status=CaseStatus.PASS if outcome.passed else CaseStatus.FAIL,
            first_mismatch=outcome.first_mismatch,
            details=outcome.details,
        )


def _from_mismatch(found: Optional[Mismatch], **details) -> CaseOutcome:
    return CaseOutcome(found is None, found, details)


def _scalar_mismatch(lhs: Fraction, rhs: Fraction) -> Mismatch:
    return Mismatch(exps=[], lhs=str(lhs), rhs=str(rhs))


def _window(config: SuiteConfig) -> Window1:
    return make_window(*config.window)


def _capped(value, cap) -> HalfInt:
    return min(HalfInt.of(value), HalfInt.of(cap))


def _module_vectors(config: SuiteConfig) -> List[WWord]:
    return w_basis(config.M, _capped(config.max_weight, MODULE_MAX_WEIGHT), config.max_zero_modes)


# --- shuffle ---


def _comb_case(r: int, mu: int, nu: int, config: SuiteConfig) -> CaseOutcome:
    for k in range(config.shuffle_tables):
        phi = RandomTable(config.seed + 2 * k)
        psi = RandomTable(config.seed + 2 * k + 1)
        for name, (lhs, rhs) in comb_identity_sides(r, mu, nu, phi, psi).items():
            if lhs != rhs:
                return CaseOutcome(False, _scalar_mismatch(lhs, rhs), {"identity": name, "table": k})
    return CaseOutcome(True, details={"tables": config.shuffle_tables})


def _signature(perm: Sequence[int]) -> int:
    return Permutation([p - 1 for p in perm]).signature()


def _parity_case(r: int) -> CaseOutcome:
    shuffles = [s for mu in range(r + 1) for s in enumerate_shuffles2(r, mu)]
    shuffles += [s for mu in range(r + 1) for nu in range(r - mu + 1) for s in enumerate_shuffles3(r, mu, nu)]
    for s in shuffles:
        expected = _signature(s.permutation)
        if shuffle_parity(s) != expected:
            return CaseOutcome(
                False,
                _scalar_mismatch(shuffle_parity(s), Fraction(expected)),
                {"permutation": list(s.permutation)},
            )
    return CaseOutcome(True, details={"shuffles": len(shuffles)})


def _zero_recursion_case(length: int, M: int) -> CaseOutcome:
    compared = 0
    for zeros in product(space_labels(M), repeat=length):
        left = {word: coeff for word, coeff in zero_left_recursion(zeros)}
        right = {word: coeff for (_, _, word), coeff in zero_right_recursion(zeros).terms()}
        compared += 1
        if left != right:
            return CaseOutcome(
                False,
                Mismatch(
                    exps=[],
                    lhs=str({" ".join(w): str(c) for w, c in left.items()}),
                    rhs=str({" ".join(w): str(c) for w, c in right.items()}),
                ),
                {"zeros": list(zeros)},
            )
    return CaseOutcome(True, details={"words": compared})


def shuffle_cases(config: SuiteConfig) -> Iterator[SuiteCase]:
    for r in range(SHUFFLE_MAX_R + 1):
        for mu in range(r + 1):
            for nu in range(r - mu + 1):
                yield SuiteCase(
                    SuiteName.SHUFFLE,
                    f"comb-identities r={r} mu={mu} nu={nu}",
                    lambda r=r, mu=mu, nu=nu: _comb_case(r, mu, nu, config),
                )
    for r in range(1, PARITY_MAX_R + 1):
        yield SuiteCase(SuiteName.SHUFFLE, f"parity r={r}", lambda r=r: _parity_case(r))
    for length in range(ZERO_WORD_MAX_LEN + 1):
        yield SuiteCase(
            SuiteName.SHUFFLE,
            f"zero-mode recursions length={length}",
            lambda length=length: _zero_recursion_case(length, config.M),
        )


# --- crt ---


def _c_rt_case(r: int) -> CaseOutcome:
    for t in range(CRT_BOUND + 1):
        for k in range(CRT_BOUND + 1):
            lhs, rhs = c_rt_sides(r, t, k)
            if lhs != rhs:
                return CaseOutcome(False, _scalar_mismatch(lhs, rhs), {"t": t, "k": k})
    return CaseOutcome(True)


def _c_mn_g_case(m: int, n: int, window: Window1) -> CaseOutcome:
    left, right = c_mn_g_sides(m, n, (window, window))
    for key in sorted(set(left.coeffs) | set(right.coeffs)):
        lhs, rhs = left.coefficient_at(*key), right.coefficient_at(*key)
        if lhs != rhs:
            return CaseOutcome(False, mismatch(key, lhs, rhs))
    return CaseOutcome(True, details={"terms": len(left.coeffs)})


def crt_cases(config: SuiteConfig) -> Iterator[SuiteCase]:
    window = _window(config)
    for r in range(CRT_BOUND + 1):
        yield SuiteCase(SuiteName.CRT, f"C_rt r={r}", lambda r=r: _c_rt_case(r))
    for m in range(CMN_G_BOUND + 1):
        for n in range(CMN_G_BOUND + 1):
            yield SuiteCase(SuiteName.CRT, f"C_mn-g m={m} n={n}", lambda m=m, n=n: _c_mn_g_case(m, n, window))
    yield SuiteCase(
        SuiteName.CRT,
        f"C_mn antisymmetry <= {ANTISYMMETRY_BOUND}",
        lambda: CaseOutcome(c_mn_antisymmetry_check(ANTISYMMETRY_BOUND)),
    )
    for m in range(KERNEL_DERIVATIVE_BOUND + 1):
        for n in range(KERNEL_DERIVATIVE_BOUND + 1):
            for direction in Expansion:
                yield SuiteCase(
                    SuiteName.CRT,
                    f"f_mn derivative m={m} n={n} {direction.value}",
                    lambda m=m, n=n, d=direction: CaseOutcome(kernel_derivative_check(m, n, (window, window), d)),
                )


# --- wick ---


def _wick_words(config: SuiteConfig) -> List[VWord]:
    return [
        word
        for word in v_basis(config.M, config.max_weight)
        if word.letters and all(m <= WICK_MAX_MODE for _, m in word.letters)
    ]


def _wick_case(a: VWord, b: VWord, w: WWord, window: Window1) -> CaseOutcome:
    found = closed_product_mismatch(a, b, w, window)
    if found is not None:
        return _from_mismatch(found, form="product")
    found = closed_iterate_mismatch(a, b, w, window)
    if found is not None:
        return _from_mismatch(found, form="iterate")
    if len(a) + len(b) <= WICK_DISTINCT_MAX_LETTERS:
        found = wick_mismatch(a, b, w, window)
        if found is not None:
            return _from_mismatch(found, form="distinct")
    return CaseOutcome(True)


def wick_cases(config: SuiteConfig) -> Iterator[SuiteCase]:
    window = _window(config)
    words = _wick_words(config)
    budget = HalfInt.of(config.max_weight)
    vectors = _module_vectors(config)
    for a in words:
        for b in words:
            if len(a) + len(b) > WICK_MAX_LETTERS or a.weight + b.weight > budget:
                continue
            for w in vectors:
                yield SuiteCase(
                    SuiteName.WICK,
                    f"{a} | {b} | {w}",
                    lambda a=a, b=b, w=w: _wick_case(a, b, w, window),
                )


# --- assoc ---


def _assoc_case(v1: VWord, v2: VWord, w: WWord, window: Window1) -> CaseOutcome:
    report = weak_assoc_check(v1, v2, w, window)
    return CaseOutcome(
        report.status == CaseStatus.PASS,
        report.first_mismatch,
        {"P": report.P, "compared": report.compared},
    )


def _exp_delta_oracle_case(v: VWord) -> CaseOutcome:
    expansion, direct = exp_delta(v), exp_delta_direct(v)
    for e in sorted(set(expansion) | set(direct)):
        lhs, rhs = expansion.get(e), direct.get(e)
        if lhs != rhs:
            return CaseOutcome(False, mismatch([e], lhs or VElement(), rhs or VElement()))
    return CaseOutcome(True, details={"exponents": sorted(expansion)})


def assoc_cases(config: SuiteConfig) -> Iterator[SuiteCase]:
    window = _window(config)
    budget = HalfInt.of(config.max_weight)
    words = v_basis(config.M, budget)
    vectors = _module_vectors(config)
    for v1 in words:
        for v2 in words:
            if v1.weight + v2.weight > budget:
                continue
            for w in vectors:
                yield SuiteCase(
                    SuiteName.ASSOC,
                    f"{v1} | {v2} | {w}",
                    lambda v1=v1, v2=v2, w=w: _assoc_case(v1, v2, w, window),
                )
    for v in words:
        yield SuiteCase(SuiteName.ASSOC, f"exp(Delta) oracle {v}", lambda v=v: _exp_delta_oracle_case(v))
    for u in v_basis(config.M, _capped(config.max_weight, MODULE_MAX_WEIGHT)):
        for label in space_labels(config.M):
            for m in range(EXP_DELTA_MAX_MODE + 1):
                yield SuiteCase(
                    SuiteName.ASSOC,
                    f"exp(Delta) commutator {label}^({m}) {u}",
                    lambda label=label, m=m, u=u: _from_mismatch(exp_delta_commutator_check(label, m, u, window)),
                )


# --- axioms ---


def _axiom_case(v_set: List[VWord], w: WWord, window: Window1) -> CaseOutcome:
    report = axiom_suite(v_set, [w], window)
    return CaseOutcome(report.passed, details={"checks": report.checks, "failures": report.failures[:5]})


def axiom_cases(config: SuiteConfig) -> Iterator[SuiteCase]:
    window = _window(config)
    v_set = v_basis(config.M, _capped(config.max_weight, AXIOM_MAX_WEIGHT))
    for w in _module_vectors(config):
        yield SuiteCase(SuiteName.AXIOMS, f"axioms w={w}", lambda w=w: _axiom_case(v_set, w, window))


# --- dcomm ---


def expected_d_comm_terms(a1: str = "e1", a2: str = "eb1") -> Dict[str, str]:
    """Normal-ordered bracket [D_W, :a1(1)a2(0) + a1(0)a2(1):] as derived by hand from the module relations."""
    return {
        f"{a2}(-1){a1}(1)": "-1/2",
        f"{a1}(-1){a2}(1)": "1/2",
        f"{a2}(0){a1}(0)": "1/2",
        f"{a1}(0){a2}(0)": "-1/2",
    }


def _d_comm_case() -> CaseOutcome:
    report = d_comm_failure_repro()
    expected = expected_d_comm_terms()
    found = None
    if report.terms != expected:
        found = Mismatch(exps=[], lhs=str(report.terms), rhs=str(expected))
    passed = report.obstructed and report.scalar == "0" and found is None
    return CaseOutcome(passed, found, report.model_dump())


def dcomm_cases(config: SuiteConfig) -> Iterator[SuiteCase]:
    yield SuiteCase(SuiteName.DCOMM, "[D_W, :e1(1)eb1(0) + e1(0)eb1(1):]", _d_comm_case)


_GENERATORS = {
    SuiteName.WICK: wick_cases,
    SuiteName.ASSOC: assoc_cases,
    SuiteName.SHUFFLE: shuffle_cases,
    SuiteName.CRT: crt_cases,
    SuiteName.AXIOMS: axiom_cases,
    SuiteName.DCOMM: dcomm_cases,
}


def build_cases(name: SuiteName, config: SuiteConfig) -> List[SuiteCase]:
    """Cases of one suite (or all of them), each suite cut at max_cases."""
    cases: List[SuiteCase] = []
    for suite in SuiteName.expand(name):
        generated = list(islice(_GENERATORS[suite](config), config.max_cases))
        logger.info(f"📋 {suite.value}: {len(generated)} cases")
        cases.extend(generated)
    return cases
