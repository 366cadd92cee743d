"""
Windowed formal series in one or two variables with exponents in (1/2)Z.

A series only knows its coefficients inside its spans. A span bound of None
means every coefficient beyond the stored support in that direction is known
to vanish; a finite bound means coefficients past it are unknown, and asking
for them raises WindowUnderflowError instead of returning a silent zero.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, Optional, Sequence, Tuple, Union

from src.algebra_core import ZERO, HalfInt, binom, binom_half, c_coeff, half_points

logger = logging.getLogger(__name__)

INF = float("inf")

Exps = Tuple[HalfInt, ...]
Window1 = Tuple[HalfInt, HalfInt]
Window2 = Tuple[Window1, Window1]


class WindowUnderflowError(ValueError):
    """A requested coefficient is not determined by the data a series was built from."""

    def __init__(self, message: str, exps: Optional[Sequence[HalfInt]] = None):
        super().__init__(message)
        self.exps = tuple(exps) if exps is not None else None


def make_window(lo, hi) -> Window1:
    lo, hi = HalfInt.of(lo), HalfInt.of(hi)
    if lo > hi:
        raise ValueError(f"empty window [{lo}, {hi}]")
    return lo, hi


@dataclass(frozen=True)
class Span:
    lo: Optional[HalfInt] = None
    hi: Optional[HalfInt] = None

    def known(self, e: HalfInt) -> bool:
        return (self.lo is None or e >= self.lo) and (self.hi is None or e <= self.hi)

    def intersect(self, other: "Span") -> "Span":
        lo = max((b for b in (self.lo, other.lo) if b is not None), default=None)
        hi = min((b for b in (self.hi, other.hi) if b is not None), default=None)
        return Span(lo, hi)

    def to_json(self):
        return [
            None if self.lo is None else self.lo.doubled,
            None if self.hi is None else self.hi.doubled,
        ]


def _value_to_json(value):
    if isinstance(value, Fraction):
        return str(value)
    return value.to_json_terms()


class HalfSeries:
    """Coefficients keyed by exponent tuples; values are scalars or Fock-space elements."""

    def __init__(self, spans: Sequence[Span], coeffs: Optional[Dict[Exps, Any]] = None, zero=ZERO):
        self.spans = tuple(spans)
        self.zero = zero
        self.coeffs: Dict[Exps, Any] = {}
        for exps, value in (coeffs or {}).items():
            if value and self.known(exps):
                self.coeffs[tuple(exps)] = value

    @property
    def var_count(self) -> int:
        return len(self.spans)

    def _key(self, exps) -> Exps:
        if isinstance(exps, (HalfInt, int, str, Fraction)):
            exps = (exps,)
        key = tuple(HalfInt.of(e) for e in exps)
        if len(key) != self.var_count:
            raise ValueError(f"expected {self.var_count} exponents, got {len(key)}")
        return key

    def known(self, exps: Exps) -> bool:
        return all(span.known(e) for span, e in zip(self.spans, exps))

    def coefficient_at(self, *exps):
        key = self._key(exps[0] if len(exps) == 1 else exps)
        if not self.known(key):
            raise WindowUnderflowError(
                f"coefficient at {tuple(map(str, key))} lies outside the certified spans "
                f"{[s.to_json() for s in self.spans]}",
                key,
            )
        return self.coeffs.get(key, self.zero)

    def terms(self):
        return sorted(self.coeffs.items(), key=lambda item: tuple(e.doubled for e in item[0]))

    def support_bounds(self, k: int) -> Tuple[float, float]:
        """Extent of the possibly-nonzero exponents in variable k; unknown directions are infinite."""
        span = self.spans[k]
        values = [exps[k].as_fraction() for exps in self.coeffs]
        lo = -INF if span.lo is not None else min(values, default=INF)
        hi = INF if span.hi is not None else max(values, default=-INF)
        return lo, hi

    def __eq__(self, other) -> bool:
        if not isinstance(other, HalfSeries):
            return NotImplemented
        return self.spans == other.spans and self.coeffs == other.coeffs

    def to_json(self) -> dict:
        return {
            "var_count": self.var_count,
            "window": [span.to_json() for span in self.spans],
            "entries": [
                {"exps": [e.doubled for e in exps], "coeff": _value_to_json(value)}
                for exps, value in self.terms()
            ],
        }

    def __repr__(self) -> str:
        return f"{type(self).__name__}(spans={self.spans}, terms={len(self.coeffs)})"


class HalfSeries1(HalfSeries):
    def __init__(self, span: Span, coeffs=None, zero=ZERO):
        super().__init__((span,), {self._wrap(k): v for k, v in (coeffs or {}).items()}, zero)

    @staticmethod
    def _wrap(key) -> Exps:
        return key if isinstance(key, tuple) else (HalfInt.of(key),)

    @property
    def span(self) -> Span:
        return self.spans[0]


class HalfSeries2(HalfSeries):
    def __init__(self, spans: Sequence[Span], coeffs=None, zero=ZERO):
        if len(spans) != 2:
            raise ValueError("HalfSeries2 needs exactly two spans")
        super().__init__(spans, coeffs, zero)


def _rebuild(like: HalfSeries, spans, coeffs, zero) -> HalfSeries:
    if len(spans) == 1:
        return HalfSeries1(spans[0], coeffs, zero)
    if len(spans) == 2:
        return HalfSeries2(spans, coeffs, zero)
    return HalfSeries(spans, coeffs, zero)


def restrict(s: HalfSeries, spans: Sequence[Span]) -> HalfSeries:
    spans = tuple(a.intersect(b) for a, b in zip(s.spans, spans))
    return _rebuild(s, spans, s.coeffs, s.zero)


def series_add(s: HalfSeries, t: HalfSeries) -> HalfSeries:
    if s.var_count != t.var_count:
        raise ValueError("cannot add series in different numbers of variables")
    spans = tuple(a.intersect(b) for a, b in zip(s.spans, t.spans))
    coeffs: Dict[Exps, Any] = dict(s.coeffs)
    for exps, value in t.coeffs.items():
        coeffs[exps] = coeffs[exps] + value if exps in coeffs else value
    return _rebuild(s, spans, coeffs, s.zero if s.zero is not ZERO else t.zero)


def _product_span(s: HalfSeries, t: HalfSeries, k: int) -> Span:
    """Exponents of variable k at which every contributing pair of coefficients is known."""
    lows, highs = [], []
    for a, b in ((s, t), (t, s)):
        span = a.spans[k]
        b_lo, b_hi = b.support_bounds(k)
        if span.hi is not None:
            highs.append(span.hi.as_fraction() + b_lo)
        if span.lo is not None:
            lows.append(span.lo.as_fraction() + b_hi)
    lo = max(lows, default=-INF)
    hi = min(highs, default=INF)
    if lo > hi or lo == INF or hi == -INF:
        raise WindowUnderflowError(f"product leaves no certified exponents in variable {k}")
    return Span(
        None if lo == -INF else HalfInt.of(lo),
        None if hi == INF else HalfInt.of(hi),
    )


def series_mul(s: HalfSeries, t: HalfSeries) -> HalfSeries:
    """Windowed Cauchy product; at most one factor may be element-valued."""
    if s.var_count != t.var_count:
        raise ValueError("cannot multiply series in different numbers of variables")
    spans = tuple(_product_span(s, t, k) for k in range(s.var_count))
    coeffs: Dict[Exps, Any] = {}
    for ea, va in s.coeffs.items():
        for eb, vb in t.coeffs.items():
            exps = tuple(a + b for a, b in zip(ea, eb))
            if not all(span.known(e) for span, e in zip(spans, exps)):
                continue
            value = va * vb
            coeffs[exps] = coeffs[exps] + value if exps in coeffs else value
    zero = s.zero if s.zero is not ZERO else t.zero
    return _rebuild(s, spans, coeffs, zero)


# --- Expansions ---


class Expansion(str, Enum):
    XY = "xy"  # x large: negative powers of (x - y) expand in positive powers of y
    YX = "yx"


def binom_expand(alpha, window: Window2, direction: Expansion = Expansion.XY, minus: bool = False) -> HalfSeries2:
    """(x + y)^alpha, or (x - y)^alpha when `minus`, expanded in `direction`, keyed (x-exp, y-exp)."""
    alpha = HalfInt.of(alpha)
    a = alpha.as_fraction()
    natural = alpha.is_integral and alpha.doubled >= 0
    large, small = (0, 1) if direction == Expansion.XY else (1, 0)
    prefactor = 1
    if direction == Expansion.YX and minus:
        # (x - y)^alpha = (-1)^alpha (y - x)^alpha
        if not alpha.is_integral:
            raise ValueError(f"(x - y)^{alpha} has no real expansion with y large")
        prefactor = -1 if int(alpha) % 2 else 1
    (l_lo, l_hi), (s_lo, s_hi) = window[large], window[small]

    large_span = Span(None if natural and l_lo <= HalfInt(0) else l_lo, None if l_hi >= alpha else l_hi)
    small_span = Span(None if s_lo <= HalfInt(0) else s_lo, None if natural and s_hi >= alpha else s_hi)

    bounds = []
    if natural:
        bounds.append(int(alpha))
    if large_span.lo is not None:
        bounds.append((alpha - l_lo).floor())
    if small_span.hi is not None:
        bounds.append(s_hi.floor())
    k_max = min(bounds)
    coeffs = {}
    for k in range(0, k_max + 1):
        value = binom(a, k)
        if minus:
            value = value * (-1) ** k
        exps = [None, None]
        exps[large], exps[small] = alpha - k, HalfInt.of(k)
        coeffs[tuple(exps)] = prefactor * value
    spans = [None, None]
    spans[large], spans[small] = large_span, small_span
    return HalfSeries2(spans, coeffs)


def taylor_shift(s: HalfSeries1, window_x_hi) -> HalfSeries2:
    """
    s(y + x) expanded with y large, keyed (x-exp, y-exp): the coefficient of
    x^k y^(e-k) is C(e, k) s_e. Only x-exponents up to `window_x_hi` are produced.
    """
    x_hi = HalfInt.of(window_x_hi).floor()
    span = s.span
    y_lo = span.lo
    y_hi = None if span.hi is None else span.hi - x_hi
    if y_lo is not None and y_hi is not None and y_lo > y_hi:
        raise WindowUnderflowError(
            f"series certified on {span.to_json()} cannot determine {x_hi + 1} Taylor orders"
        )
    spans = (Span(None, HalfInt.of(x_hi)), Span(y_lo, y_hi))
    coeffs: Dict[Exps, Any] = {}
    for (e,), value in s.coeffs.items():
        for k in range(0, x_hi + 1):
            exps = (HalfInt.of(k), e - k)
            if not spans[1].known(exps[1]):
                continue
            c = binom(e.as_fraction(), k)
            if c:
                coeffs[exps] = value * c
    return HalfSeries2(spans, coeffs, s.zero)


# --- Kernels ---


class KernelKind(str, Enum):
    F = "f"  # x^{-1/2} y^{1/2} (x - y)^{-1}
    G_LOWER = "g"  # f + 1/2 x^{-1/2} y^{-1/2}
    G_UPPER = "G"  # iota_{xy} g
    POWER = "power"  # (x^{-n-1})^{(m)}, a monomial in x


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind
    m: int = 0
    n: int = 0
    direction: Expansion = Expansion.XY
    shifted: bool = False  # arguments (y + x, y) under yx, (x + y, y) under xy

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ValueError("derivative orders must be natural numbers")
        if self.kind == KernelKind.G_UPPER and self.direction != Expansion.XY:
            raise ValueError("G is defined as the xy-expansion of g; use kind g for other directions")

    @property
    def has_half_term(self) -> bool:
        return self.kind in (KernelKind.G_LOWER, KernelKind.G_UPPER)


_HALF = Fraction(1, 2)


def _unshifted_coefficient(spec: KernelSpec, ex: HalfInt, ey: HalfInt) -> Fraction:
    m, n = spec.m, spec.n
    if spec.direction == Expansion.XY:
        i = ey + HalfInt(1) + n
        if not i.is_integral or int(i) < (0 if spec.has_half_term else 1):
            return ZERO
        i = int(i)
        if i == 0:
            return _HALF * binom_half(m) * binom_half(n)
        return binom(Fraction(-2 * i - 1, 2), m) * binom(Fraction(2 * i - 1, 2), n)
    j = ex + HalfInt(1) + m
    if not j.is_integral or int(j) < 0:
        return ZERO
    j = int(j)
    if j == 0 and spec.has_half_term:
        return -_HALF * binom_half(m) * binom_half(n)
    return -binom(Fraction(2 * j - 1, 2), m) * binom(Fraction(-2 * j - 1, 2), n)


def _shifted_coefficient(spec: KernelSpec, ex: HalfInt, ey: HalfInt) -> Fraction:
    """
    Leibniz expansion of (1/m!n!) d^m_X d^n_Y [X^{-1/2} Y^{1/2} (X - Y)^{-1}]
    at X = y + x or x + y, Y = y, where X - Y = x.
    """
    m, n = spec.m, spec.n
    total = ZERO
    for a in range(m + 1):
        for b in range(n + 1):
            alpha = Fraction(-1, 2) - m + a
            beta = Fraction(1, 2) - n + b
            front = binom_half(m - a) * binom(_HALF, n - b) * (-1) ** a * binom(Fraction(a + b), a)
            if spec.direction == Expansion.YX:
                k = ex + (1 + a + b)
            else:
                k = ey - HalfInt.of(beta)
            if k.is_integral and int(k) >= 0:
                total += front * binom(alpha, int(k))
    if spec.has_half_term:
        alpha = Fraction(-1, 2) - m
        if spec.direction == Expansion.YX:
            k = ex
        else:
            k = ey + HalfInt(1) + n
        if k.is_integral and int(k) >= 0:
            total += _HALF * binom_half(m) * binom_half(n) * binom(alpha, int(k))
    return total


def kernel_coefficient(spec: KernelSpec, ex, ey) -> Fraction:
    ex, ey = HalfInt.of(ex), HalfInt.of(ey)
    m, n = spec.m, spec.n
    if spec.kind == KernelKind.POWER:
        if ey != HalfInt(0) or ex != HalfInt.of(-n - 1 - m):
            return ZERO
        return binom(Fraction(-n - 1), m)
    if (ex + ey).doubled != -2 * (1 + m + n):
        return ZERO
    if spec.shifted:
        return _shifted_coefficient(spec, ex, ey)
    return _unshifted_coefficient(spec, ex, ey)


def _kernel_spans(spec: KernelSpec, window: Window2) -> Tuple[Span, Span]:
    (x_lo, x_hi), (y_lo, y_hi) = window
    m, n = spec.m, spec.n
    if spec.kind == KernelKind.POWER:
        ex = HalfInt.of(-n - 1 - m)
        return (
            Span(None if x_lo <= ex else x_lo, None if x_hi >= ex else x_hi),
            Span(None if y_lo <= HalfInt(0) else y_lo, None if y_hi >= HalfInt(0) else y_hi),
        )
    if spec.direction == Expansion.XY:
        # x-exponents bounded above, y-exponents bounded below
        x_top = HalfInt.of(Fraction(-1, 2) - m)
        y_bottom = HalfInt.of(Fraction(-1, 2) - n)
        return (
            Span(x_lo, None if x_hi >= x_top else x_hi),
            Span(None if y_lo <= y_bottom else y_lo, y_hi),
        )
    if spec.shifted:
        x_bottom = HalfInt.of(-1 - m - n)
        y_top = HalfInt(0)
    else:
        x_bottom = HalfInt.of(Fraction(-1, 2) - m)
        y_top = HalfInt.of(Fraction(-1, 2) - n)
    return (
        Span(None if x_lo <= x_bottom else x_lo, x_hi),
        Span(y_lo, None if y_hi >= y_top else y_hi),
    )


def expand_kernel(spec: KernelSpec, window: Window2) -> HalfSeries2:
    """Exact coefficients of the kernel expansion on every lattice point of the window."""
    spans = _kernel_spans(spec, window)
    (x_lo, x_hi), (y_lo, y_hi) = window
    coeffs = {}
    for ex in half_points(x_lo, x_hi):
        ey = HalfInt(-2 * (1 + spec.m + spec.n) - ex.doubled)
        if spec.kind == KernelKind.POWER:
            ey = HalfInt(0)
        if y_lo <= ey <= y_hi:
            value = kernel_coefficient(spec, ex, ey)
            if value:
                coeffs[(ex, ey)] = value
    return HalfSeries2(spans, coeffs)


def power_derivative(alpha, m: int) -> Tuple[HalfInt, Fraction]:
    """(x^alpha)^{(m)} = C(alpha, m) x^{alpha - m}, returned as (exponent, coefficient)."""
    alpha = HalfInt.of(alpha)
    return alpha - m, binom(alpha.as_fraction(), m)


def c_mn_g_sides(m: int, n: int, window: Window2) -> Tuple[HalfSeries2, HalfSeries2]:
    """
    Left: (x^{-n-1})^{(m)} + y^{-n-m-1} sum_p C_{n,p+m} C(p+m, m) (x/y)^p.
    Right: the yx-expansion of g_mn(y + x, y). Both restricted to the window.
    """
    (x_lo, x_hi), (y_lo, y_hi) = window
    left = {}
    ex, value = power_derivative(-n - 1, m)
    if x_lo <= ex <= x_hi and y_lo <= HalfInt(0) <= y_hi:
        left[(ex, HalfInt(0))] = value
    for p in range(max(0, x_lo.ceil()), x_hi.floor() + 1):
        key = (HalfInt.of(p), HalfInt.of(-p - m - n - 1))
        if y_lo <= key[1] <= y_hi:
            c = c_coeff(n, p + m) * binom(Fraction(p + m), m)
            if c:
                left[key] = left.get(key, ZERO) + c
    right = expand_kernel(KernelSpec(KernelKind.G_LOWER, m, n, Expansion.YX, shifted=True), window)
    rect = (Span(x_lo, x_hi), Span(y_lo, y_hi))
    return HalfSeries2(rect, left), restrict(right, rect)


def c_mn_g_identity_check(m: int, n: int, window: Window2) -> bool:
    left, right = c_mn_g_sides(m, n, window)
    if left.coeffs != right.coeffs:
        logger.debug(f"C_mn-g identity differs for (m, n) = ({m}, {n})")
        return False
    return True


def kernel_derivative_check(m: int, n: int, window: Window2, direction: Expansion = Expansion.XY) -> bool:
    """f_mn equals the termwise (1/m!n!) mixed derivative of f_00 on the window."""
    derived = expand_kernel(KernelSpec(KernelKind.F, m, n, direction), window)
    (x_lo, x_hi), (y_lo, y_hi) = window
    for ex in half_points(x_lo, x_hi):
        for ey in half_points(y_lo, y_hi):
            base = kernel_coefficient(KernelSpec(KernelKind.F, 0, 0, direction), ex + m, ey + n)
            expected = binom((ex + m).as_fraction(), m) * binom((ey + n).as_fraction(), n) * base
            if derived.coefficient_at(ex, ey) != expected:
                return False
    return True


def series_from_points(
    points: Iterable[Exps], fn: Callable[..., Any], spans: Sequence[Span], zero=ZERO
) -> HalfSeries:
    coeffs = {}
    for exps in points:
        value = fn(*exps)
        if value:
            coeffs[tuple(exps)] = value
    return _rebuild(None, tuple(spans), coeffs, zero)
