"""
Numerical evaluation of two-point correlation series on a chosen branch,
exact reconstruction of the algebraic function they converge to, and
region bookkeeping for the product and iterate expansions.

l_p(z) = log|z| + i(arg z + 2 pi p) with arg z in [0, 2 pi); a power
z^e with e in (1/2)Z on branch p is exp(e l_p(z)).
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from src.algebra_core import HalfInt
from src.config.settings import (
    AGREEMENT_TOL,
    CERTIFY_MARGIN,
    CLOSED_FORM_TOL,
    DEFAULT_CUTOFF,
    MAX_CUTOFF,
    RECONSTRUCT_MAX_TERMS,
)
from src.fock_space import VWord, WWord, pair
from src.series import WindowUnderflowError
from src.vertex_ops import actual_coefficient, iterate_coefficient, lowest_exponent, product_coefficient

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
Z1, Z2 = sp.symbols("z1 z2")


class RegionError(ValueError):
    """A point lies on a pole or outside the region where a series is evaluated."""


class CorrelatorWindowError(WindowUnderflowError):
    """The upper truncation of a correlation series could not be certified."""


# --- Branches ---


def principal_arg(z: complex) -> float:
    """arg z normalized to [0, 2 pi)."""
    a = float(np.angle(z))
    if a < 0.0:
        a += TWO_PI
    return 0.0 if a >= TWO_PI else a


@dataclass(frozen=True)
class BranchPoint:
    z: complex
    p: int = 0

    def __post_init__(self):
        if self.z == 0:
            raise RegionError("branch point must be nonzero")

    @property
    def log(self) -> complex:
        return complex(np.log(abs(self.z)), principal_arg(self.z) + TWO_PI * self.p)


def branch_log(bp: BranchPoint) -> complex:
    return bp.log


def branch_pow(bp: BranchPoint, e) -> complex:
    """(z^e)_p for e in (1/2)Z; the branch only contributes the sign (-1)^(2 e p)."""
    e = HalfInt.of(e)
    value = abs(bp.z) ** float(e.as_fraction()) * np.exp(1j * float(e.as_fraction()) * principal_arg(bp.z))
    if (e.doubled * bp.p) % 2:
        value = -value
    return complex(value)


def branch_pow_half(bp: BranchPoint) -> complex:
    return branch_pow(bp, HalfInt(1))


def _branch_powers(z: complex, p: int, doubled: np.ndarray) -> np.ndarray:
    """Vectorized (z^{d/2})_p over an array of doubled exponents."""
    half = doubled.astype(np.float64) / 2.0
    values = np.abs(z) ** half * np.exp(1j * half * principal_arg(z))
    signs = np.where((doubled * p) % 2 == 1, -1.0, 1.0)
    return values * signs


# --- Regions ---


def in_product_region(z1: complex, z2: complex) -> bool:
    return abs(z1) > abs(z2) > 0


def in_iterate_region(z1: complex, z2: complex) -> bool:
    if not abs(z2) > abs(z1 - z2) > 0:
        return False
    if z1 == 0:
        return False
    return abs(principal_arg(z1) - principal_arg(z2)) < np.pi / 2


def _check_points(z1: complex, z2: complex):
    if z1 == 0 or z2 == 0:
        raise RegionError("z1 and z2 must be nonzero")
    if z1 == z2:
        raise RegionError("z1 = z2 is a pole of the correlator")


# --- Exact coefficient tables ---


def _total_exponent(v1: VWord, v2: VWord, w: WWord, wprime: WWord) -> HalfInt:
    # wt w' = wt v1 + wt v2 + wt w + e1 + e2
    return wprime.weight - v1.weight - v2.weight - w.weight


@lru_cache(maxsize=1024)
def product_coefficients(v1: VWord, v2: VWord, w: WWord, wprime: WWord, count: int) -> Tuple[Tuple[HalfInt, HalfInt, Fraction], ...]:
    """First `count` terms (e1, e2, <w', Y(v1)_{e1} Y(v2)_{e2} w>) ordered by increasing e2."""
    total = _total_exponent(v1, v2, w, wprime)
    low2 = lowest_exponent(v2, w)
    terms = []
    for k in range(count):
        e2 = low2 + k
        e1 = total - e2
        terms.append((e1, e2, pair(wprime, product_coefficient(v1, v2, w, e1, e2))))
    return tuple(terms)


@lru_cache(maxsize=1024)
def iterate_coefficients(v1: VWord, v2: VWord, w: WWord, wprime: WWord, count: int) -> Tuple[Tuple[int, HalfInt, Fraction], ...]:
    """First `count` terms (e0, e2, <w', Y(Y_V(v1)_{e0} v2)_{e2} w>) ordered by increasing e0."""
    total = _total_exponent(v1, v2, w, wprime)
    low0 = -(v1.weight + v2.weight)
    terms = []
    for k in range(count):
        e0 = low0 + k
        e2 = total - e0
        terms.append((int(e0), e2, pair(wprime, iterate_coefficient(v1, v2, w, int(e0), e2))))
    return tuple(terms)


# --- Closed form ---


@dataclass(frozen=True)
class AlgebraicCorrelator:
    """f = z1^{|v1|/2} z2^{|v2|/2} g / (z1^q1 z2^q2 (z1 - z2)^q12)."""

    g: sp.Poly
    q1: int
    q2: int
    q12: int
    parity1: int
    parity2: int
    terms_used: int = field(default=0, compare=False)
    _numeric: Callable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_numeric", sp.lambdify((Z1, Z2), self.g.as_expr(), "numpy"))

    def value(self, z1: complex, z2: complex, p: int = 0) -> complex:
        _check_points(z1, z2)
        prefactor = branch_pow(BranchPoint(z1, p), HalfInt(self.parity1)) * branch_pow(BranchPoint(z2, p), HalfInt(self.parity2))
        denominator = z1 ** self.q1 * z2 ** self.q2 * (z1 - z2) ** self.q12
        return complex(prefactor * complex(self._numeric(z1, z2)) / denominator)

    def __str__(self) -> str:
        numerator = f"z1^({self.parity1}/2) z2^({self.parity2}/2) ({self.g.as_expr()})"
        factors = [f for f in (self.q1 and f"z1^{self.q1}", self.q2 and f"z2^{self.q2}", self.q12 and f"(z1 - z2)^{self.q12}") if f]
        return numerator if not factors else f"{numerator} / ({' '.join(factors)})"


def _certified_numerator(series: Sequence[Fraction], q: int) -> Optional[List[Fraction]]:
    """
    Coefficients of (1 - t)^q h(t) when they vanish on the trailing margin; None otherwise.

    Heuristic acceptance: the last CERTIFY_MARGIN computed coefficients vanishing
    does not rule out a nonzero coefficient further out. No degree bound is
    available without commutativity, so records mark the closed form as such.
    """
    n = len(series)
    out = []
    binoms = [Fraction((-1) ** j * comb(q, j)) for j in range(q + 1)]
    for k in range(n):
        out.append(sum((binoms[j] * series[k - j] for j in range(min(q, k) + 1)), Fraction(0)))
    if any(out[n - CERTIFY_MARGIN :]):
        return None
    while out and not out[-1]:
        out.pop()
    return out


def _reduce(g: sp.Poly, q1: int, q2: int, q12: int) -> Tuple[sp.Poly, int, int, int]:
    for factor, attr in ((sp.Poly(Z1 - Z2, Z1, Z2), "q12"), (sp.Poly(Z1, Z1, Z2), "q1"), (sp.Poly(Z2, Z1, Z2), "q2")):
        orders = {"q1": q1, "q2": q2, "q12": q12}
        while orders[attr] > 0 and not g.is_zero:
            quotient, remainder = sp.div(g, factor)
            if not remainder.is_zero:
                break
            g = quotient
            orders[attr] -= 1
        q1, q2, q12 = orders["q1"], orders["q2"], orders["q12"]
    return g, q1, q2, q12


def reconstruct_correlator(v1: VWord, v2: VWord, w: WWord, wprime: WWord) -> AlgebraicCorrelator:
    """
    Exact algebraic function behind <w', Y(v1, z1) Y(v2, z2) w>. The product
    table is a power series in t = x2/x1 times a monomial; (1 - t)^q with
    q = ceil(wt v1 + wt v2) makes it a polynomial once enough terms are known.
    """
    return _reconstruct(v1, v2, w, wprime)


@lru_cache(maxsize=256)
def _reconstruct(v1: VWord, v2: VWord, w: WWord, wprime: WWord) -> AlgebraicCorrelator:
    parity1, parity2 = len(v1.letters) % 2, len(v2.letters) % 2
    q = (v1.weight + v2.weight).ceil()
    count = 4 * CERTIFY_MARGIN
    while True:
        terms = product_coefficients(v1, v2, w, wprime, count)
        numerator = _certified_numerator([c for _, _, c in terms], q)
        if numerator is not None:
            break
        if count * 2 > RECONSTRUCT_MAX_TERMS:
            raise CorrelatorWindowError(
                f"correlator of {v1}, {v2} on {w} -> {wprime} not polynomial after {count} terms",
                exps=(terms[-1][0], terms[-1][1]),
            )
        count *= 2
    if not numerator:
        return AlgebraicCorrelator(sp.Poly(0, Z1, Z2), 0, 0, 0, parity1, parity2, terms_used=count)

    e1_first, e2_first, _ = terms[0]
    degree = len(numerator) - 1
    # x1 and x2 exponents left after pulling out z^{|v|/2} and the (z1 - z2)^q denominator
    a = int(e1_first - HalfInt(parity1)) - degree + q
    b = int(e2_first - HalfInt(parity2))
    expr = sum(sp.Rational(c.numerator, c.denominator) * Z1 ** (degree - j) * Z2 ** j for j, c in enumerate(numerator))
    g = sp.Poly(expr * Z1 ** max(a, 0) * Z2 ** max(b, 0), Z1, Z2)
    g, q1, q2, q12 = _reduce(g, max(-a, 0), max(-b, 0), q)
    correlator = AlgebraicCorrelator(g, q1, q2, q12, parity1, parity2, terms_used=count)
    logger.debug(f"reconstructed <{wprime}, Y({v1}) Y({v2}) {w}> = {correlator}")
    return correlator


def closed_form_value(v1: VWord, v2: VWord, w: WWord, wprime: WWord, z1: complex, z2: complex, p: int = 0) -> complex:
    return reconstruct_correlator(v1, v2, w, wprime).value(z1, z2, p)


# --- Numerical evaluation ---


@dataclass
class NumericResult:
    value: complex
    error: float
    in_region: bool
    cutoff: int
    branch_mismatch: bool = False

    @property
    def converged(self) -> bool:
        return self.in_region and np.isfinite(self.error) and self.error < CLOSED_FORM_TOL


def _tail(terms: np.ndarray, ratio: float) -> float:
    if ratio >= 1.0 or len(terms) == 0:
        return float("inf")
    last = np.abs(terms[-CERTIFY_MARGIN:]).max()
    return float(last * ratio / (1.0 - ratio))


def eval_product_numeric(
    v1: VWord, v2: VWord, w: WWord, wprime: WWord, z1: complex, z2: complex, p: int = 0, cutoff: int = DEFAULT_CUTOFF, strict: bool = False
) -> NumericResult:
    """sum_k <w', Y(v1)_{e1} Y(v2)_{e2} w> (z1^{e1})_p (z2^{e2})_p truncated after `cutoff` terms."""
    _check_points(z1, z2)
    region = in_product_region(z1, z2)
    if strict and not region:
        raise RegionError(f"({z1}, {z2}) is outside |z1| > |z2| > 0")
    table = product_coefficients(v1, v2, w, wprime, cutoff)
    coeffs = np.array([float(c) for _, _, c in table], dtype=np.float64)
    d1 = np.array([e1.doubled for e1, _, _ in table], dtype=np.int64)
    d2 = np.array([e2.doubled for _, e2, _ in table], dtype=np.int64)
    terms = coeffs * _branch_powers(z1, p, d1) * _branch_powers(z2, p, d2)
    return NumericResult(
        value=complex(terms.sum()),
        error=_tail(terms, abs(z2) / abs(z1)),
        in_region=region,
        cutoff=cutoff,
    )


def eval_iterate_numeric(
    v1: VWord, v2: VWord, w: WWord, wprime: WWord, z1: complex, z2: complex, p: int = 0, cutoff: int = DEFAULT_CUTOFF, strict: bool = False
) -> NumericResult:
    """sum_k <w', Y(Y_V(v1)_{e0} v2)_{e2} w> (z1 - z2)^{e0} (z2^{e2})_p, compared against f^{p,p}."""
    _check_points(z1, z2)
    region = in_iterate_region(z1, z2)
    if strict and not region:
        raise RegionError(f"({z1}, {z2}) is outside |z2| > |z1 - z2| > 0, |arg z1 - arg z2| < pi/2")
    z0 = z1 - z2
    table = iterate_coefficients(v1, v2, w, wprime, cutoff)
    coeffs = np.array([float(c) for _, _, c in table], dtype=np.float64)
    e0 = np.array([e for e, _, _ in table], dtype=np.float64)
    d2 = np.array([e2.doubled for _, e2, _ in table], dtype=np.int64)
    terms = coeffs * np.power(complex(z0), e0) * _branch_powers(z2, p, d2)
    result = NumericResult(
        value=complex(terms.sum()),
        error=_tail(terms, abs(z0) / abs(z2)),
        in_region=region,
        cutoff=cutoff,
    )
    if abs(z2) > abs(z0):
        closed = closed_form_value(v1, v2, w, wprime, z1, z2, p)
        if result.error < CLOSED_FORM_TOL and abs(result.value - closed) > CLOSED_FORM_TOL * max(1.0, abs(closed)):
            result.branch_mismatch = True
            logger.warning(f"⚠️ iterate converges to a different branch at z1={z1}, z2={z2}, p={p}")
    return result


def n_point_product_numeric(
    vs: Sequence[VWord], w: WWord, wprime: WWord, zs: Sequence[complex], p: int = 0, cutoff: int = DEFAULT_CUTOFF, strict: bool = True
) -> NumericResult:
    """<w', Y(v1, z1) ... Y(vn, zn) w> for n <= 3, truncated to total order `cutoff`."""
    n = len(vs)
    if n != len(zs) or not 1 <= n <= 3:
        raise ValueError("n-point evaluation needs 1 to 3 operators with one point each")
    if any(z == 0 for z in zs):
        raise RegionError("evaluation points must be nonzero")
    region = all(abs(zs[i]) > abs(zs[i + 1]) for i in range(n - 1))
    if strict and not region:
        raise RegionError("points must satisfy |z1| > ... > |zn| > 0")
    if n == 2:
        return eval_product_numeric(vs[0], vs[1], w, wprime, zs[0], zs[1], p, cutoff)

    total = wprime.weight - w.weight - sum((v.weight for v in vs), HalfInt(0))
    points = [BranchPoint(z, p) for z in zs]
    if n == 1:
        coeff = pair(wprime, actual_coefficient(vs[0], total, w))
        value = complex(float(coeff) * branch_pow(points[0], total)) if coeff else 0j
        return NumericResult(value=value, error=0.0, in_region=True, cutoff=cutoff)

    v1, v2, v3 = vs
    shells = np.zeros(cutoff, dtype=np.complex128)
    low3 = lowest_exponent(v3, w)
    for k3 in range(cutoff):
        e3 = low3 + k3
        u3 = actual_coefficient(v3, e3, w)
        if not u3:
            continue
        low2 = -(v2.weight + v3.weight + w.weight + e3)
        for k2 in range(cutoff - k3):
            e2 = low2 + k2
            e1 = total - e2 - e3
            coeff = pair(wprime, actual_coefficient(v1, e1, actual_coefficient(v2, e2, u3)))
            if coeff:
                shells[k2 + k3] += float(coeff) * branch_pow(points[0], e1) * branch_pow(points[1], e2) * branch_pow(points[2], e3)
    ratio = max(abs(zs[1] / zs[0]), abs(zs[2] / zs[1]))
    return NumericResult(value=complex(shells.sum()), error=_tail(shells, ratio), in_region=region, cutoff=cutoff)


def escalate(evaluate: Callable[[int], NumericResult], cutoff: int = DEFAULT_CUTOFF) -> NumericResult:
    """Double the cutoff until the tail estimate is below tolerance or the cap is reached."""
    result = evaluate(cutoff)
    while result.in_region and not result.converged and cutoff * 2 <= MAX_CUTOFF:
        cutoff *= 2
        logger.debug(f"raising cutoff to {cutoff}")
        result = evaluate(cutoff)
    return result


def correlator_values(
    v1: VWord, v2: VWord, w: WWord, wprime: WWord, z1: complex, z2: complex, p: int = 0, cutoff: int = DEFAULT_CUTOFF, strict: bool = False
) -> dict:
    """Product, iterate and closed-form values at one point with region flags; the fields of a CorrelatorRecord."""
    _check_points(z1, z2)
    product_region, iterate_region = in_product_region(z1, z2), in_iterate_region(z1, z2)
    if strict and not (product_region or iterate_region):
        raise RegionError(f"({z1}, {z2}) lies in neither convergence region")
    correlator = reconstruct_correlator(v1, v2, w, wprime)
    closed = correlator.value(z1, z2, p)
    record = {
        "z1": (z1.real, z1.imag),
        "z2": (z2.real, z2.imag),
        "p": p,
        "cutoff": cutoff,
        "closed_form_value": (closed.real, closed.imag),
        "closed_form": str(correlator),
        "reconstruction": {
            "acceptance": "heuristic",
            "terms": correlator.terms_used,
            "vanishing_tail": CERTIFY_MARGIN,
        },
        "region_flags": {"product": product_region, "iterate": iterate_region},
        "abs_errors": {},
    }
    values = {}
    if product_region:
        product = escalate(lambda n: eval_product_numeric(v1, v2, w, wprime, z1, z2, p, n), cutoff)
        values["product"] = product.value
        record.update(product_value=(product.value.real, product.value.imag), product_error=product.error, cutoff=product.cutoff)
    if abs(z2) > abs(z1 - z2):
        iterate = escalate(lambda n: eval_iterate_numeric(v1, v2, w, wprime, z1, z2, p, n), cutoff)
        values["iterate"] = iterate.value
        record.update(
            iterate_value=(iterate.value.real, iterate.value.imag),
            iterate_error=iterate.error,
            branch_mismatch=iterate.branch_mismatch,
        )
    for name, value in values.items():
        record["abs_errors"][f"{name}_closed"] = abs(value - closed)
    if len(values) == 2:
        gap = abs(values["product"] - values["iterate"])
        record["abs_errors"]["product_iterate"] = gap
        if gap > AGREEMENT_TOL and not record.get("branch_mismatch"):
            logger.warning(f"⚠️ product and iterate differ by {gap:.3e} at z1={z1}, z2={z2}")
    return record


def sample_product_points(rng: np.random.Generator, count: int, ratio: float = 0.5) -> List[Tuple[complex, complex]]:
    """Random (z1, z2) with 0 < |z2/z1| <= ratio."""
    points = []
    for _ in range(count):
        z1 = complex(rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(0.0, TWO_PI)))
        z2 = z1 * complex(rng.uniform(0.05, ratio) * np.exp(1j * rng.uniform(0.0, TWO_PI)))
        points.append((z1, z2))
    return points


def sample_iterate_points(rng: np.random.Generator, count: int, ratio: float = 0.5, max_arg: float = np.pi / 4) -> List[Tuple[complex, complex]]:
    """Random (z1, z2) with |z1 - z2| <= ratio |z2| and |arg z1 - arg z2| < max_arg."""
    points = []
    while len(points) < count:
        z2 = complex(rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(0.0, TWO_PI)))
        z1 = z2 + z2 * complex(rng.uniform(0.05, ratio) * np.exp(1j * rng.uniform(0.0, TWO_PI)))
        if abs(principal_arg(z1) - principal_arg(z2)) < max_arg:
            points.append((z1, z2))
    return points
