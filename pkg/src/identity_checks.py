"""
Exact checks of the module structure: the multi-variable Wick expansion,
the closed-form oracles, weak associativity with the pole-order prefactor,
the exp(Delta) commutator identity, the axiom suite, and the bracket that
rules out a derivation D_W on the module.
"""

import logging
from fractions import Fraction
from itertools import permutations, product
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from src.algebra_core import HalfInt, binom, half_points, inversion_sign
from src.config.schemas import AssocReport, AxiomReport, CaseStatus, DCommReport, Mismatch
from src.fock_space import (
    VACUUM,
    Label,
    LinearCombination,
    VElement,
    VWord,
    WElement,
    WWord,
    apply_v_mode,
    as_w_element,
    pair_labels,
)
from src.normal_order import (
    ModeCombination,
    express_normal_ordered,
    format_mode_word,
    nord_group_coefficient,
    normal_order_word,
)
from src.series import (
    Expansion,
    HalfSeries,
    HalfSeries1,
    HalfSeries2,
    KernelKind,
    KernelSpec,
    Span,
    Window1,
    kernel_coefficient,
    taylor_shift,
)
from src.vertex_ops import (
    actual_coefficient,
    closed_form_iterate,
    closed_form_product,
    composed_iterate_table,
    composed_product_table,
    contraction_choices,
    d_v,
    exp_delta,
    g_kernel,
    iterate_coefficient,
    lowest_exponent,
    wick_sign,
)

logger = logging.getLogger(__name__)

Coefficient = Union[Fraction, WElement, VElement]


def value_json(value: Coefficient):
    if isinstance(value, (WElement, VElement)):
        return value.to_json_terms()
    return str(value)


def mismatch(exps: Sequence, lhs: Coefficient, rhs: Coefficient) -> Mismatch:
    return Mismatch(
        exps=[HalfInt.of(e).doubled for e in exps],
        lhs=value_json(lhs),
        rhs=value_json(rhs),
    )


def _first_difference(points: Iterable[Tuple], lhs: Callable, rhs: Callable) -> Optional[Mismatch]:
    for exps in points:
        left, right = lhs(*exps), rhs(*exps)
        if left != right:
            logger.debug(f"first difference at {tuple(map(str, exps))}")
            return mismatch(exps, left, right)
    return None


def _weight_floor(w: WElement) -> HalfInt:
    return max((word.weight for word in w), default=HalfInt(0))


# --- Wick expansion in distinct variables ---


def _singletons(word: VWord) -> List[List[Tuple[Label, int]]]:
    return [[letter] for letter in word.letters]


def wick_sides(a: VWord, b: VWord, w: Union[WWord, WElement]):
    """
    Coefficient functions of both sides of
    :a1(x1)...ar(xr): :b1(y1)...bs(ys): = :all: + sum_rho sign det[(a, b) G_mn(x, y)] :remaining:
    taking (ex1..exr, ey1..eys) to a WElement.
    """
    w = as_w_element(w)
    r, s = len(a.letters), len(b.letters)

    def lhs(*exps) -> WElement:
        inner = nord_group_coefficient(_singletons(b), exps[r:], w)
        return nord_group_coefficient(_singletons(a), exps[:r], inner)

    def rhs(*exps) -> WElement:
        exs, eys = exps[:r], exps[r:]
        total = WElement()
        for rho, rows, cols in contraction_choices(r, s):
            rem_rows = [i for i in range(1, r + 1) if i not in rows]
            rem_cols = [j for j in range(1, s + 1) if j not in cols]
            groups = [[a.letters[i - 1]] for i in rem_rows] + [[b.letters[j - 1]] for j in rem_cols]
            targets = [exs[i - 1] for i in rem_rows] + [eys[j - 1] for j in rem_cols]
            if rho == 0:
                total = total + nord_group_coefficient(groups, targets, w)
                continue
            det = Fraction(0)
            for perm in permutations(range(rho)):
                term = Fraction(inversion_sign(perm))
                for k, l in enumerate(perm):
                    (la, m), (lb, n) = a.letters[rows[k] - 1], b.letters[cols[l] - 1]
                    term *= pair_labels(la, lb) * kernel_coefficient(g_kernel(m, n), exs[rows[k] - 1], eys[cols[l] - 1])
                    if not term:
                        break
                det += term
            if det:
                image = nord_group_coefficient(groups, targets, w)
                if image:
                    total = total + image * (wick_sign(r, rho, rows, cols) * det)
        return total

    return lhs, rhs


def _wick_points(a: VWord, b: VWord, w: WElement, window: Window1):
    lo, hi = window
    letters = a.letters + b.letters
    axis = list(half_points(lo, hi, integral=False))
    floor = -_weight_floor(w)
    for exps in product(axis, repeat=len(letters)):
        # coefficients of weight below zero vanish
        if sum((e + m for e, (_, m) in zip(exps, letters)), HalfInt(len(letters))) >= floor:
            yield exps


def wick_mismatch(a: VWord, b: VWord, w: Union[WWord, WElement], window: Window1) -> Optional[Mismatch]:
    w = as_w_element(w)
    lhs, rhs = wick_sides(a, b, w)
    return _first_difference(_wick_points(a, b, w, window), lhs, rhs)


def wick_check(a: VWord, b: VWord, w: Union[WWord, WElement], window: Window1) -> bool:
    return wick_mismatch(a, b, w, window) is None


# --- Closed-form oracles ---


def series_mismatch(lhs: HalfSeries, rhs: HalfSeries) -> Optional[Mismatch]:
    """First differing coefficient of two tables, in increasing exponent order."""
    keys = sorted(set(lhs.coeffs) | set(rhs.coeffs), key=lambda exps: tuple(e.doubled for e in exps))
    return _first_difference(keys, lhs.coefficient_at, rhs.coefficient_at)


def closed_product_mismatch(a: VWord, b: VWord, w: Union[WWord, WElement], window: Window1) -> Optional[Mismatch]:
    """Wick closed form of the naive product against direct composition."""
    window2 = (window, window)
    return series_mismatch(closed_form_product(a, b, w, window2), composed_product_table(a, b, w, window2))


def closed_iterate_mismatch(a: VWord, b: VWord, w: Union[WWord, WElement], window: Window1) -> Optional[Mismatch]:
    """Taylor closed form of the naive iterate against Y_V followed by the naive operator."""
    window2 = (window, window)
    return series_mismatch(closed_form_iterate(a, b, w, window2), composed_iterate_table(a, b, w, window2))


# --- Weak associativity ---


def default_pole_order(v1: VWord, w: WWord) -> int:
    """floor(m1 + ... + mr + r/2 + wt w) + 1."""
    bound = HalfInt(sum(2 * m + 1 for _, m in v1.letters)) + w.weight
    return bound.floor() + 1


def weak_assoc_check(v1: VWord, v2: VWord, w: WWord, window: Window1, P: Optional[int] = None) -> AssocReport:
    """
    Compares (x0+x2)^{P+|v1|/2} x2^{|v2|/2} Y(v1, x0+x2) Y(v2, x2) w, expanded in
    nonnegative powers of x2, with (x2+x0)^{P+|v1|/2} x2^{|v2|/2} Y(Y_V(v1, x0) v2, x2) w,
    expanded in nonnegative powers of x0, coefficientwise on the integer points of the window.
    """
    floor_p = default_pole_order(v1, w)
    if P is None:
        P = floor_p
    elif P < floor_p:
        raise ValueError(f"pole order {P} is below the admissible bound {floor_p}")
    lo, hi = window
    alpha = HalfInt(2 * P + len(v1.letters) % 2)
    beta = HalfInt(len(v2.letters) % 2)
    low2 = lowest_exponent(v2, w)
    low0 = -(v1.weight + v2.weight)
    total_weight = v1.weight + v2.weight + w.weight
    inner: Dict[HalfInt, WElement] = {}
    products: Dict[Tuple[HalfInt, HalfInt], WElement] = {}
    iterates: Dict[Tuple[int, HalfInt], WElement] = {}

    def c(e1: HalfInt, e2: HalfInt) -> WElement:
        key = (e1, e2)
        if key not in products:
            if e2 not in inner:
                inner[e2] = actual_coefficient(v2, e2, w)
            products[key] = actual_coefficient(v1, e1, inner[e2])
        return products[key]

    def d(e0: int, e2: HalfInt) -> WElement:
        key = (e0, e2)
        if key not in iterates:
            iterates[key] = iterate_coefficient(v1, v2, w, e0, e2)
        return iterates[key]

    # x1 = x0 + x2 in nonnegative powers of x2: per x2-exponent e2, the x1-series
    # times x1^alpha, Taylor shifted and keyed (x2-power, x0-exponent)
    shifted: Dict[HalfInt, HalfSeries2] = {}

    def shifted_products(e2: HalfInt) -> HalfSeries2:
        if e2 not in shifted:
            k_top = max((hi - beta - e2).floor(), 0)
            n_lo, n_hi = lo.ceil(), hi.floor() + k_top
            series = HalfSeries1(
                Span(HalfInt.of(n_lo), HalfInt.of(n_hi)),
                {n: c(HalfInt.of(n) - alpha, e2) for n in range(n_lo, n_hi + 1)},
                zero=WElement(),
            )
            shifted[e2] = taylor_shift(series, k_top)
        return shifted[e2]

    def lhs(a: int, b: int) -> WElement:
        result = WElement()
        top = (HalfInt.of(b) - beta - low2).floor()
        for i in range(0, top + 1):
            term = shifted_products(HalfInt.of(b - i) - beta).coefficient_at(i, a)
            if term:
                result = result + term
        return result

    def rhs(a: int, b: int) -> WElement:
        result = WElement()
        top = (HalfInt.of(a) - low0).floor()
        for j in range(0, top + 1):
            coeff = binom(alpha.as_fraction(), j)
            if coeff:
                term = d(a - j, HalfInt.of(b + j) - alpha - beta)
                if term:
                    result = result + term * coeff
        return result

    compared = 0
    first = None
    for a in range(lo.ceil(), hi.floor() + 1):
        for b in range(lo.ceil(), hi.floor() + 1):
            if HalfInt.of(a + b) - alpha - beta + total_weight < HalfInt(0):
                continue
            compared += 1
            left, right = lhs(a, b), rhs(a, b)
            if left != right:
                first = mismatch((a, b), left, right)
                break
        if first is not None:
            break

    status = CaseStatus.PASS if first is None else CaseStatus.FAIL
    logger.debug(f"weak associativity {v1} | {v2} | {w}: {status.value} after {compared} points")
    return AssocReport(
        v1=str(v1),
        v2=str(v2),
        w=str(w),
        P=P,
        window=(lo.doubled, hi.doubled),
        status=status,
        compared=compared,
        first_mismatch=first,
    )


# --- exp(Delta) against creation series ---


def _created(label: Label, m: int, ex: int, u: VElement) -> VElement:
    """x^ex coefficient of a^{(m)}(x)^- u = sum_{i>=m} C(i, m) a(-i-1/2) u x^{i-m}."""
    i = ex + m
    result = VElement()
    coeff = binom(Fraction(i), m)
    for word, c in u.items():
        result.add_term(VWord(((label, i),) + word.letters), coeff * c)
    return result


def exp_delta_commutator_sides(label: Label, m: int, u: VWord):
    """
    Left: exp(Delta(y)) a^{(m)}(x)^- u - a^{(m)}(x)^- exp(Delta(y)) u.
    Right: sum_beta a(beta+1/2) (iota_yx g_{m beta}(y+x, y) - (x^{-beta-1})^{(m)}) exp(Delta(y)) u.
    Both as functions (ex, ey) -> VElement.
    """
    u_delta = exp_delta(u)
    top = max((n for _, n in u.letters), default=-1)

    def lhs(ex: HalfInt, ey: HalfInt) -> VElement:
        if not ex.is_integral or ex.doubled < 0 or not ey.is_integral:
            return VElement()
        created = _created(label, m, int(ex), VElement.from_word(u))
        left = exp_delta(created).get(int(ey), VElement())
        shifted = u_delta.get(int(ey))
        right = _created(label, m, int(ex), shifted) if shifted else VElement()
        return left - right

    def rhs(ex: HalfInt, ey: HalfInt) -> VElement:
        result = VElement()
        for shift, element in u_delta.items():
            ey1 = ey - shift
            for beta in range(top + 1):
                k = kernel_coefficient(KernelSpec(KernelKind.G_LOWER, m, beta, Expansion.YX, shifted=True), ex, ey1)
                k -= kernel_coefficient(KernelSpec(KernelKind.POWER, m, beta), ex, ey1)
                if k:
                    result = result + apply_v_mode(label, HalfInt(2 * beta + 1), element) * k
        return result

    return lhs, rhs


def exp_delta_commutator_check(label: Label, m: int, u: VWord, window: Window1) -> Optional[Mismatch]:
    lo, hi = window
    lhs, rhs = exp_delta_commutator_sides(label, m, u)
    points = ((ex, ey) for ex in half_points(lo, hi, integral=True) for ey in half_points(lo, hi, integral=True))
    return _first_difference(points, lhs, rhs)


# --- Axioms ---


def axiom_suite(v_set: Sequence[VWord], w_set: Sequence[WWord], window: Window1) -> AxiomReport:
    """Lower bound, weight homogeneity, identity and D-derivative properties on the window."""
    lo, hi = window
    checks = {"lower_bound": True, "weight_homogeneity": True, "identity": True, "d_derivative": True}
    failures: List[str] = []

    def fail(name: str, detail: str):
        checks[name] = False
        failures.append(f"{name}: {detail}")

    for w in w_set:
        for t in half_points(lo, hi):
            expected = WElement.from_word(w) if t == HalfInt(0) else WElement()
            if actual_coefficient(VACUUM, t, w) != expected:
                fail("identity", f"w={w} t={t}")

    for v in v_set:
        dv = d_v(v)
        for w in w_set:
            floor = lowest_exponent(v, w)
            expected_weight = v.weight + w.weight
            coeffs = {t: actual_coefficient(v, t, w) for t in half_points(lo, hi)}
            for t, value in coeffs.items():
                if t < floor and value:
                    fail("lower_bound", f"v={v} w={w} t={t}")
                if any(word.weight != expected_weight + t for word in value):
                    fail("weight_homogeneity", f"v={v} w={w} t={t}")
                upper = coeffs.get(t + 1)
                if upper is not None:
                    derived = upper * (t + 1).as_fraction()
                    if actual_coefficient(dv, t, w) != derived:
                        fail("d_derivative", f"v={v} w={w} t={t}")
    return AxiomReport(checks=checks, failures=failures)


# --- The bracket that obstructs D_W ---


def _as_raw(products) -> ModeCombination:
    raw = ModeCombination()
    for (negatives, positives, zeros), coeff in products.items():
        raw.add_term(negatives + positives + tuple((z, 0) for z in zeros), coeff)
    return raw


def d_w_bracket(raw: LinearCombination) -> ModeCombination:
    """[D, -] on raw mode words for the derivation [D, a(n)] = (-n + 1/2) a(n - 1)."""
    result = ModeCombination()
    for word, coeff in raw.items():
        for k, (label, n) in enumerate(word):
            factor = Fraction(1, 2) - n
            if factor:
                lowered = word[:k] + ((label, n - 1),) + word[k + 1 :]
                result.add_term(lowered, coeff * factor)
    return result


def d_comm_bracket(a1: Label = "e1", a2: Label = "eb1") -> ModeCombination:
    """[D_W, :a1(1)a2(0): + :a1(0)a2(1):] rewritten through normal-ordered words."""
    operator = normal_order_word([(a1, 1), (a2, 0)]) + normal_order_word([(a1, 0), (a2, 1)])
    return express_normal_ordered(d_w_bracket(_as_raw(operator)))


def d_comm_unsigned_bracket(a1: Label = "e1", a2: Label = "eb1") -> ModeCombination:
    """The bracket with a1(1)a2(0) taken as a2(0)a1(1), dropping the reordering sign."""
    raw = ModeCombination()
    raw.add_term(((a2, 0), (a1, 1)), Fraction(1))
    raw.add_term(((a1, 0), (a2, 1)), Fraction(1))
    return express_normal_ordered(d_w_bracket(raw))


def d_comm_failure_repro(a1: Label = "e1", a2: Label = "eb1") -> DCommReport:
    if not pair_labels(a1, a2):
        raise ValueError(f"{a1} and {a2} must pair nontrivially")
    bracket = d_comm_bracket(a1, a2)
    scalar = bracket.get((), Fraction(0))
    obstruction = bracket.get(((a2, 0), (a1, 0)), Fraction(0))
    terms = {format_mode_word(word): str(coeff) for word, coeff in bracket.terms() if word}
    logger.info(f"[D_W, :{a1}(1){a2}(0) + {a1}(0){a2}(1):] = {terms}")
    return DCommReport(
        terms=terms,
        scalar=str(scalar),
        obstruction=str(obstruction),
        obstructed=bool(obstruction),
        unsigned_terms={
            format_mode_word(word): str(coeff) for word, coeff in d_comm_unsigned_bracket(a1, a2).terms() if word
        },
    )
