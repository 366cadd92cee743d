"""
Vertex operators of the twisted module.

The naive operator sends a1(-m1-1/2)...ar(-mr-1/2)1 to the normal-ordered
product of generating-function derivatives; the actual operator is the
naive one applied to exp(Delta(x))v. The algebra-side Y_V is evaluated from
its closed determinant formula. Product and iterate tables, and the Wick /
Taylor closed forms used as oracles against them, live here too.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from src.algebra_core import ONE, ZERO, HalfInt, binom, c_coeff, half_points, inversion_sign
from src.contraction_cache import ContractionCache
from src.fock_space import (
    Letter,
    VElement,
    VWord,
    WElement,
    WWord,
    apply_v_mode,
    as_v_element,
    as_w_element,
    pair,
    pair_labels,
    parse_label,
)
from src.normal_order import nord_group_coefficient
from src.series import (
    Expansion,
    HalfSeries1,
    HalfSeries2,
    KernelKind,
    KernelSpec,
    Span,
    Window1,
    Window2,
    kernel_coefficient,
    series_from_points,
)

logger = logging.getLogger(__name__)

VLike = Union[VWord, VElement]
WLike = Union[WWord, WElement]

_G = {}  # (m, n) -> KernelSpec for G_mn


def g_kernel(m: int, n: int) -> KernelSpec:
    spec = _G.get((m, n))
    if spec is None:
        spec = _G.setdefault((m, n), KernelSpec(KernelKind.G_UPPER, m, n, Expansion.XY))
    return spec


def _max_weight(x) -> HalfInt:
    return max((word.weight for word in x), default=HalfInt(0))


# --- Total contractions and exp(Delta) ---


def _contract(letters: Tuple[Letter, ...], cache: ContractionCache) -> Fraction:
    if not letters:
        return ONE
    if len(letters) % 2:
        raise ValueError(f"total contraction needs an even number of letters, got {len(letters)}")
    cached = cache.get(letters)
    if cached is not None:
        return cached
    (a, m), rest = letters[0], letters[1:]
    value = ZERO
    for k in range(2, len(letters) + 1):
        b, n = letters[k - 1]
        form = pair_labels(a, b)
        if not form:
            continue
        c = c_coeff(m, n)
        if not c:
            continue
        sign = 1 if k % 2 == 0 else -1
        value += sign * form * c * _contract(rest[: k - 2] + rest[k - 1 :], cache)
    return cache.store(letters, value)


def total_contraction(labels: Sequence[str], ms: Sequence[int], indices: Optional[Sequence[int]] = None) -> Fraction:
    """
    T(i1, ..., i2t): (a_i1, a_ik) C_{m_i1 m_ik} expanded along the first index,
    sign (-1)^k for the k-th entry of the sequence. Indices are 1-based.
    """
    if indices is None:
        indices = range(1, len(labels) + 1)
    indices = tuple(indices)
    if any(a >= b for a, b in zip(indices, indices[1:])):
        raise ValueError(f"indices must be strictly increasing: {indices}")
    letters = tuple((labels[i - 1], ms[i - 1]) for i in indices)
    return _contract(letters, ContractionCache())


def exp_delta(v: VLike) -> Dict[int, VElement]:
    """
    exp(Delta(x)) v as {x-exponent: element}: erase 2t letters at positions
    i1 < ... < i2t with sign (-1)^(i1+...+i2t), weight T and x^{-sum m - t}.
    """
    result: Dict[int, VElement] = {}
    cache = ContractionCache()
    for word, coeff in as_v_element(v).items():
        letters = word.letters
        r = len(letters)
        for t in range(0, r // 2 + 1):
            for chosen in combinations(range(1, r + 1), 2 * t):
                value = _contract(tuple(letters[i - 1] for i in chosen), cache)
                if not value:
                    continue
                sign = -1 if sum(chosen) % 2 else 1
                exponent = -sum(letters[i - 1][1] for i in chosen) - t
                removed = set(chosen)
                reduced = VWord(tuple(l for i, l in enumerate(letters, start=1) if i not in removed))
                result.setdefault(exponent, VElement()).add_term(reduced, sign * coeff * value)
    return {e: x for e, x in result.items() if x}


def apply_delta(v: VLike) -> Dict[int, VElement]:
    """Delta(x) v = sum_i sum_{m,n} C_mn e_i(m+1/2) eb_i(n+1/2) v x^{-m-n-1}, acting through V modes."""
    v = as_v_element(v)
    result: Dict[int, VElement] = {}
    labels = {label for word in v for label, _ in word.letters}
    indices = sorted({parse_label(label)[1] for label in labels})
    top = max((m for word in v for _, m in word.letters), default=-1)
    for i in indices:
        for n in range(top + 1):
            inner = apply_v_mode(f"eb{i}", HalfInt(2 * n + 1), v)
            if not inner:
                continue
            for m in range(top + 1):
                c = c_coeff(m, n)
                if not c:
                    continue
                outer = apply_v_mode(f"e{i}", HalfInt(2 * m + 1), inner)
                if outer:
                    exponent = -m - n - 1
                    result[exponent] = result.get(exponent, VElement()) + outer * c
    return {e: x for e, x in result.items() if x}


def exp_delta_direct(v: VLike) -> Dict[int, VElement]:
    """sum_k Delta^k / k! applied directly; Delta lowers length by two so the sum is finite."""
    v = as_v_element(v)
    total: Dict[int, VElement] = {0: v.copy()} if v else {}
    current = dict(total)
    k = 1
    while current:
        step: Dict[int, VElement] = {}
        for shift, element in current.items():
            for e, image in apply_delta(element).items():
                step[shift + e] = step.get(shift + e, VElement()) + image * Fraction(1, k)
        current = {e: x for e, x in step.items() if x}
        for e, x in current.items():
            total[e] = total.get(e, VElement()) + x
        k += 1
    return {e: x for e, x in total.items() if x}


# --- Naive and actual operators ---


@lru_cache(maxsize=200_000)
def _naive_word(word: VWord, t: HalfInt, target: WWord) -> WElement:
    gens = [(label, m) for label, m in word.letters]
    return nord_group_coefficient([gens], [t], WElement.from_word(target))


def naive_coefficient(v: VLike, t, w: WLike) -> WElement:
    """Coefficient of x^t in the naive operator of v applied to w."""
    t = HalfInt.of(t)
    result = WElement()
    for word, vc in as_v_element(v).items():
        for target, wc in as_w_element(w).items():
            for key, c in _naive_word(word, t, target).items():
                result.add_term(key, vc * wc * c)
    return result


@lru_cache(maxsize=200_000)
def _actual_word(word: VWord, t: HalfInt, target: WWord) -> WElement:
    result = WElement()
    for shift, reduced in exp_delta(word).items():
        result = result + naive_coefficient(reduced, t - shift, target)
    return result


def actual_coefficient(v: VLike, t, w: WLike) -> WElement:
    """Coefficient of x^t in Y_W(v, x) w."""
    t = HalfInt.of(t)
    result = WElement()
    for word, vc in as_v_element(v).items():
        for target, wc in as_w_element(w).items():
            for key, c in _actual_word(word, t, target).items():
                result.add_term(key, vc * wc * c)
    return result


def lowest_exponent(v: VLike, w: WLike) -> HalfInt:
    """Below -wt v - wt w every coefficient of Y_W(v, x) w vanishes."""
    return -(_max_weight(as_v_element(v)) + _max_weight(as_w_element(w)))


def _operator_series(coefficient, v: VLike, w: WLike, window: Window1) -> HalfSeries1:
    lo, hi = window
    floor = lowest_exponent(v, w)
    span = Span(None if lo <= floor else lo, hi)
    coeffs = {}
    for t in half_points(max(lo, floor), hi):
        value = coefficient(v, t, w)
        if value:
            coeffs[t] = value
    return HalfSeries1(span, coeffs, zero=WElement())


def naive_yw(v: VLike, w: WLike, window: Window1) -> HalfSeries1:
    return _operator_series(naive_coefficient, v, w, window)


def actual_yw(v: VLike, w: WLike, window: Window1) -> HalfSeries1:
    return _operator_series(actual_coefficient, v, w, window)


# --- Y_V closed formula and D_V ---


def _determinant(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    size = len(rows)
    total = ZERO
    for perm in permutations(range(size)):
        term = ONE
        for k, l in enumerate(perm):
            term *= rows[k][l]
            if not term:
                break
        if term:
            total += inversion_sign(perm) * term
    return total


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 0:
            yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def wick_sign(r: int, rho: int, rows: Sequence[int], cols: Sequence[int]) -> int:
    exponent = sum(rows) + sum(cols) + r * rho + rho * (rho + 1) // 2
    return -1 if exponent % 2 else 1


def contraction_choices(r: int, s: int) -> Iterator[Tuple[int, Tuple[int, ...], Tuple[int, ...]]]:
    for rho in range(0, min(r, s) + 1):
        for rows in combinations(range(1, r + 1), rho):
            for cols in combinations(range(1, s + 1), rho):
                yield rho, rows, cols


def drop_positions(letters: Tuple[Letter, ...], positions: Sequence[int]) -> Tuple[Letter, ...]:
    gone = set(positions)
    return tuple(l for i, l in enumerate(letters, start=1) if i not in gone)


def _y_v_word(a: VWord, b: VWord, p: int) -> VElement:
    result = VElement()
    r, s = len(a.letters), len(b.letters)
    for rho, rows, cols in contraction_choices(r, s):
        entries = [
            [
                pair_labels(a.letters[i - 1][0], b.letters[j - 1][0])
                * binom(Fraction(-b.letters[j - 1][1] - 1), a.letters[i - 1][1])
                for j in cols
            ]
            for i in rows
        ]
        det = _determinant(entries) if rho else ONE
        if not det:
            continue
        exponent = -sum(a.letters[i - 1][1] for i in rows) - sum(b.letters[j - 1][1] + 1 for j in cols)
        scale = wick_sign(r, rho, rows, cols) * det
        remaining_a = drop_positions(a.letters, rows)
        remaining_b = drop_positions(b.letters, cols)
        for shifts in _compositions(p - exponent, len(remaining_a)):
            factor = scale
            for (_, m), d in zip(remaining_a, shifts):
                factor *= binom(Fraction(m + d), m)
            created = tuple((label, m + d) for (label, m), d in zip(remaining_a, shifts))
            result.add_term(VWord(created + remaining_b), factor)
    return result


def y_v_coefficient(v: VLike, p: int, target: VLike) -> VElement:
    """Coefficient of x^p in Y_V(v, x) target."""
    result = VElement()
    for a, ac in as_v_element(v).items():
        for b, bc in as_v_element(target).items():
            for key, c in _y_v_word(a, b, p).items():
                result.add_term(key, ac * bc * c)
    return result


def y_v(v: VLike, target: VLike, window: Window1) -> HalfSeries1:
    lo, hi = window
    floor = -(_max_weight(as_v_element(v)) + _max_weight(as_v_element(target)))
    span = Span(None if lo <= floor else lo, hi)
    coeffs = {}
    for t in half_points(max(lo, floor), hi, integral=True):
        value = y_v_coefficient(v, int(t), target)
        if value:
            coeffs[t] = value
    return HalfSeries1(span, coeffs, zero=VElement())


def d_v(v: VLike) -> VElement:
    """Derivation with D1 = 0 and D a(-m-1/2) = (m+1) a(-m-3/2), the x-coefficient of Y_V(v, x)1."""
    result = VElement()
    for word, coeff in as_v_element(v).items():
        for k, (label, m) in enumerate(word.letters):
            raised = word.letters[:k] + ((label, m + 1),) + word.letters[k + 1 :]
            result.add_term(VWord(raised), coeff * (m + 1))
    return result


# --- Products and iterates ---


def product_coefficient(v1: VLike, v2: VLike, w: WLike, e1, e2) -> WElement:
    """Coefficient of x1^e1 x2^e2 in Y_W(v1, x1) Y_W(v2, x2) w."""
    return actual_coefficient(v1, e1, actual_coefficient(v2, e2, w))


def iterate_coefficient(v1: VLike, v2: VLike, w: WLike, e0: int, e2) -> WElement:
    """Coefficient of x0^e0 x2^e2 in Y_W(Y_V(v1, x0) v2, x2) w."""
    u = y_v_coefficient(v1, e0, v2)
    if not u:
        return WElement()
    return actual_coefficient(u, e2, w)


def _paired_table(points, coefficient, wprime: WWord, spans) -> HalfSeries2:
    coeffs = {}
    for exps in points:
        value = pair(wprime, coefficient(*exps))
        if value:
            coeffs[exps] = value
    return HalfSeries2(spans, coeffs)


def _weight_matched(total_weight: HalfInt, wprime: WWord, second: HalfInt) -> HalfInt:
    # wt w' = total_weight + e1 + e2
    return wprime.weight - total_weight - second


def product_series(v1: VLike, v2: VLike, w: WLike, wprime: WWord, window: Window2) -> HalfSeries2:
    """<w', Y_W(v1, x1) Y_W(v2, x2) w> on the window, keyed (x1-exp, x2-exp)."""
    (lo1, hi1), (lo2, hi2) = window
    v1, v2, w = as_v_element(v1), as_v_element(v2), as_w_element(w)
    floor2 = lowest_exponent(v2, w)
    spans = (Span(lo1, hi1), Span(None if lo2 <= floor2 else lo2, hi2))
    homogeneous = all(len({x.weight for x in e}) <= 1 for e in (v1, v2, w))
    points = []
    for e2 in half_points(max(lo2, floor2), hi2):
        if homogeneous and v1 and v2 and w:
            e1 = _weight_matched(_max_weight(v1) + _max_weight(v2) + _max_weight(w), wprime, e2)
            if lo1 <= e1 <= hi1:
                points.append((e1, e2))
        else:
            points.extend((e1, e2) for e1 in half_points(lo1, hi1))
    inner_cache: Dict[HalfInt, WElement] = {}

    def coefficient(e1, e2):
        if e2 not in inner_cache:
            inner_cache[e2] = actual_coefficient(v2, e2, w)
        return actual_coefficient(v1, e1, inner_cache[e2])

    return _paired_table(points, coefficient, wprime, spans)


def iterate_series(v1: VLike, v2: VLike, w: WLike, wprime: WWord, window: Window2) -> HalfSeries2:
    """<w', Y_W(Y_V(v1, x0) v2, x2) w> on the window, keyed (x0-exp, x2-exp)."""
    (lo0, hi0), (lo2, hi2) = window
    v1, v2, w = as_v_element(v1), as_v_element(v2), as_w_element(w)
    floor0 = -(_max_weight(v1) + _max_weight(v2))
    spans = (Span(None if lo0 <= floor0 else lo0, hi0), Span(lo2, hi2))
    points = [
        (e0, e2)
        for e0 in half_points(max(lo0, floor0), hi0, integral=True)
        for e2 in half_points(lo2, hi2)
    ]
    return _paired_table(points, lambda e0, e2: iterate_coefficient(v1, v2, w, int(e0), e2), wprime, spans)


# --- Closed forms ---


def _g_products(cells: Sequence[Tuple[int, int]], budget_y: HalfInt) -> Iterator[Tuple[HalfInt, HalfInt, Fraction]]:
    """
    Terms of prod_k G_{m_k n_k}(x, y): yields (x-exp, y-exp, coefficient)
    with total y-exponent at most `budget_y`.
    """
    if not cells:
        yield HalfInt(0), HalfInt(0), ONE
        return
    (m, n), rest = cells[0], cells[1:]
    floor_rest = HalfInt(sum(-1 - 2 * nn for _, nn in rest))
    i = 0
    while True:
        ey = HalfInt(2 * i - 1 - 2 * n)
        if ey + floor_rest > budget_y:
            return
        ex = HalfInt(-2 * (1 + m + n)) - ey
        c = kernel_coefficient(g_kernel(m, n), ex, ey)
        if c:
            for rx, ry, rc in _g_products(rest, budget_y - ey):
                yield ex + rx, ey + ry, c * rc
        i += 1


def _group_floor(letters: Sequence[Letter], budget: int) -> HalfInt:
    # lowest exponent of a single-variable normal-ordered group acting on weight <= budget
    return HalfInt(-2 * budget - len(letters) - 2 * sum(m for _, m in letters))


def closed_form_product_coefficient(a: VWord, b: VWord, w: WLike, ex, ey) -> WElement:
    """Wick form of the naive product at x^ex y^ey: contractions weighted by det of G_mn."""
    ex, ey = HalfInt.of(ex), HalfInt.of(ey)
    w = as_w_element(w)
    budget = _max_weight(w).floor()
    result = WElement()
    r, s = len(a.letters), len(b.letters)
    for rho, rows, cols in contraction_choices(r, s):
        rem_a, rem_b = drop_positions(a.letters, rows), drop_positions(b.letters, cols)
        if rho == 0:
            image = nord_group_coefficient([list(rem_a), list(rem_b)], [ex, ey], w)
            result = result + image
            continue
        sign = wick_sign(r, rho, rows, cols)
        budget_y = ey - _group_floor(rem_b, budget)
        for perm in permutations(range(rho)):
            form = ONE
            cells = []
            for k, l in enumerate(perm):
                (la, m), (lb, n) = a.letters[rows[k] - 1], b.letters[cols[l] - 1]
                form *= pair_labels(la, lb)
                cells.append((m, n))
            if not form:
                continue
            scale = sign * inversion_sign(perm) * form
            for dx, dy, c in _g_products(cells, budget_y):
                image = nord_group_coefficient([list(rem_a), list(rem_b)], [ex - dx, ey - dy], w)
                if image:
                    result = result + image * (scale * c)
    return result


def _shifted_pair_coefficient(rem_a: Sequence[Letter], rem_b: Sequence[Letter], w: WElement, ex: HalfInt, ey: HalfInt) -> WElement:
    """x^ex y^ey coefficient of :a(y+x)...b(y)...: w, by expanding each (y+x)^B with y large."""
    result = WElement()
    if not ex.is_integral or ex.doubled < 0:
        return result
    k = int(ex)
    if not rem_a:
        return nord_group_coefficient([[], list(rem_b)], [HalfInt(0), ey], w) if k == 0 else result
    budget = _max_weight(w).floor()
    total = ex + ey
    b_lo = _group_floor(rem_a, budget)
    b_hi = total - _group_floor(rem_b, budget)
    parity = len(rem_a) % 2 == 0
    for big in half_points(b_lo, b_hi, integral=parity):
        c = binom(big.as_fraction(), k)
        if not c:
            continue
        # y-exponent of the b group: ey - (big - k)
        image = nord_group_coefficient([list(rem_a), list(rem_b)], [big, total - big], w)
        if image:
            result = result + image * c
    return result


def closed_form_iterate_coefficient(a: VWord, b: VWord, w: WLike, ex, ey) -> WElement:
    """Taylor form of Ybar_W(Y_V(a, x) b, y) w at x^ex y^ey: contractions weighted by det of (x^{-n-1})^{(m)}."""
    ex, ey = HalfInt.of(ex), HalfInt.of(ey)
    w = as_w_element(w)
    result = WElement()
    r, s = len(a.letters), len(b.letters)
    for rho, rows, cols in contraction_choices(r, s):
        entries = [
            [
                pair_labels(a.letters[i - 1][0], b.letters[j - 1][0])
                * binom(Fraction(-b.letters[j - 1][1] - 1), a.letters[i - 1][1])
                for j in cols
            ]
            for i in rows
        ]
        det = _determinant(entries) if rho else ONE
        if not det:
            continue
        shift = -sum(a.letters[i - 1][1] for i in rows) - sum(b.letters[j - 1][1] + 1 for j in cols)
        image = _shifted_pair_coefficient(drop_positions(a.letters, rows), drop_positions(b.letters, cols), w, ex - shift, ey)
        if image:
            result = result + image * (wick_sign(r, rho, rows, cols) * det)
    return result


def composed_naive_product(a: VWord, b: VWord, w: WLike, ex, ey) -> WElement:
    return naive_coefficient(a, ex, naive_coefficient(b, ey, w))


def composed_naive_iterate(a: VWord, b: VWord, w: WLike, ex, ey) -> WElement:
    ex = HalfInt.of(ex)
    if not ex.is_integral:
        return WElement()
    u = y_v_coefficient(a, int(ex), b)
    return naive_coefficient(u, ey, w) if u else WElement()


# --- Closed-form and composed tables ---


def _pair_table(coefficient, a: VWord, b: VWord, w: WLike, window: Window2, x_integral=None) -> HalfSeries2:
    """Table of coefficient(a, b, w, ex, ey); points below the weight floor are certified zero."""
    (x_lo, x_hi), (y_lo, y_hi) = window
    w = as_w_element(w)
    floor = -(_max_weight(w) + a.weight + b.weight)
    points = (
        (ex, ey)
        for ex in half_points(x_lo, x_hi, integral=x_integral)
        for ey in half_points(y_lo, y_hi)
        if ex + ey >= floor
    )
    return series_from_points(
        points,
        lambda ex, ey: coefficient(a, b, w, ex, ey),
        (Span(x_lo, x_hi), Span(y_lo, y_hi)),
        zero=WElement(),
    )


def closed_form_product(a: VWord, b: VWord, w: WLike, window: Window2) -> HalfSeries2:
    return _pair_table(closed_form_product_coefficient, a, b, w, window)


def closed_form_iterate(a: VWord, b: VWord, w: WLike, window: Window2) -> HalfSeries2:
    # x0 carries integer powers only
    return _pair_table(closed_form_iterate_coefficient, a, b, w, window, x_integral=True)


def composed_product_table(a: VWord, b: VWord, w: WLike, window: Window2) -> HalfSeries2:
    return _pair_table(composed_naive_product, a, b, w, window)


def composed_iterate_table(a: VWord, b: VWord, w: WLike, window: Window2) -> HalfSeries2:
    return _pair_table(composed_naive_iterate, a, b, w, window, x_integral=True)
