"""
Exact scalars, half-integer exponents, binomials, the C_mn table and the
shuffle combinatorics shared by every other module.
"""

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Dict, Iterator, List, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

Scalar = Fraction
Rational = Union[int, Fraction]

ONE = Fraction(1)
ZERO = Fraction(0)


@dataclass(frozen=True, order=True)
class HalfInt:
    """A value in (1/2)Z stored as twice itself."""

    doubled: int

    @classmethod
    def of(cls, value) -> "HalfInt":
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, str):
            value = Fraction(value.strip())
        doubled = Fraction(value) * 2
        if doubled.denominator != 1:
            raise ValueError(f"{value!r} is not a half-integer")
        return cls(int(doubled))

    def _coerce(self, other) -> "HalfInt":
        if isinstance(other, HalfInt):
            return other
        if isinstance(other, (int, Fraction)):
            return HalfInt.of(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return HalfInt(self.doubled + other.doubled)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return HalfInt(self.doubled - other.doubled)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return HalfInt(other.doubled - self.doubled)

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.doubled)

    def __mul__(self, k: int) -> "HalfInt":
        if not isinstance(k, int):
            return NotImplemented
        return HalfInt(self.doubled * k)

    __rmul__ = __mul__

    @property
    def is_integral(self) -> bool:
        return self.doubled % 2 == 0

    def as_fraction(self) -> Fraction:
        return Fraction(self.doubled, 2)

    def __int__(self) -> int:
        if not self.is_integral:
            raise ValueError(f"{self} is not an integer")
        return self.doubled // 2

    def floor(self) -> int:
        return self.doubled // 2

    def ceil(self) -> int:
        return -((-self.doubled) // 2)

    def __str__(self) -> str:
        if self.is_integral:
            return str(self.doubled // 2)
        return f"{self.doubled}/2"

    def __repr__(self) -> str:
        return f"HalfInt({self})"


def half_points(lo: HalfInt, hi: HalfInt, integral: bool = None) -> Iterator[HalfInt]:
    """Points of (1/2)Z in [lo, hi]; restricted to Z or Z+1/2 when `integral` is given."""
    for d in range(lo.doubled, hi.doubled + 1):
        if integral is None or (d % 2 == 0) == integral:
            yield HalfInt(d)


@lru_cache(maxsize=None)
def binom(alpha: Fraction, k: int) -> Fraction:
    """Generalized binomial C(alpha, k) for rational alpha; zero for k < 0."""
    if k < 0:
        return ZERO
    alpha = Fraction(alpha)
    value = ONE
    for j in range(k):
        value = value * (alpha - j) / (j + 1)
    return value


def binom_half(m: int) -> Fraction:
    if m < 0:
        raise ValueError(f"binom_half expects m >= 0, got {m}")
    return binom(Fraction(-1, 2), m)


@lru_cache(maxsize=None)
def c_coeff(m: int, n: int) -> Fraction:
    """C_mn = 1/2 (m-n)/(m+n+1) C(-1/2,m) C(-1/2,n)."""
    if m < 0 or n < 0:
        raise ValueError(f"c_coeff expects naturals, got ({m}, {n})")
    return Fraction(m - n, 2 * (m + n + 1)) * binom_half(m) * binom_half(n)


def c_rt_sides(r: int, t: int, k: int) -> Tuple[Fraction, Fraction]:
    lhs = sum(
        (
            binom(m + r, r) * binom(k - m + t, t) * c_coeff(m + r, k - m + t)
            for m in range(k + 1)
        ),
        ZERO,
    )
    rhs = binom(Fraction(-r - t - 1), k) * c_coeff(r, t)
    return lhs, rhs


def c_rt_identity_check(r: int, t: int, k: int) -> bool:
    lhs, rhs = c_rt_sides(r, t, k)
    return lhs == rhs


def c_mn_antisymmetry_check(bound: int) -> bool:
    return all(
        c_coeff(m, n) == -c_coeff(n, m)
        for m in range(bound + 1)
        for n in range(bound + 1)
    )


# --- Shuffles ---


def inversion_sign(perm: Sequence[int]) -> int:
    inversions = sum(
        1
        for i in range(len(perm))
        for j in range(i + 1, len(perm))
        if perm[i] > perm[j]
    )
    return -1 if inversions % 2 else 1


@dataclass(frozen=True)
class Shuffle2:
    """A 2-shuffle of {1..r}: the increasing block `first` followed by its complement."""

    r: int
    first: Tuple[int, ...]
    second: Tuple[int, ...]

    def __post_init__(self):
        if tuple(sorted(self.first + self.second)) != tuple(range(1, self.r + 1)):
            raise ValueError(f"blocks {self.first}|{self.second} do not partition 1..{self.r}")
        for block in (self.first, self.second):
            if any(a >= b for a, b in zip(block, block[1:])):
                raise ValueError(f"block {block} is not strictly increasing")

    @classmethod
    def from_first(cls, r: int, first: Sequence[int]) -> "Shuffle2":
        chosen = set(first)
        rest = tuple(i for i in range(1, r + 1) if i not in chosen)
        return cls(r, tuple(first), rest)

    @property
    def mu(self) -> int:
        return len(self.first)

    @property
    def permutation(self) -> Tuple[int, ...]:
        return self.first + self.second


@dataclass(frozen=True)
class Shuffle3:
    """
    A 3-shuffle of {1..r}, stored as the iterate of two 2-shuffles:
    `outer` picks the first block out of {1..r}, `inner` splits the remaining
    r - mu positions (indexed 1..r-mu) into the second and third blocks.
    """

    outer: Shuffle2
    inner: Shuffle2

    def __post_init__(self):
        if self.inner.r != self.outer.r - self.outer.mu:
            raise ValueError("inner shuffle does not match the complement of the outer block")

    @classmethod
    def from_blocks(
        cls, r: int, first: Sequence[int], second: Sequence[int], third: Sequence[int]
    ) -> "Shuffle3":
        outer = Shuffle2(r, tuple(first), tuple(sorted(tuple(second) + tuple(third))))
        index = {p: i + 1 for i, p in enumerate(outer.second)}
        inner = Shuffle2(
            r - len(first),
            tuple(index[p] for p in second),
            tuple(index[p] for p in third),
        )
        return cls(outer, inner)

    @property
    def r(self) -> int:
        return self.outer.r

    @property
    def mu(self) -> int:
        return self.outer.mu

    @property
    def nu(self) -> int:
        return self.inner.mu

    @property
    def first(self) -> Tuple[int, ...]:
        return self.outer.first

    @property
    def second(self) -> Tuple[int, ...]:
        return tuple(self.outer.second[i - 1] for i in self.inner.first)

    @property
    def third(self) -> Tuple[int, ...]:
        return tuple(self.outer.second[i - 1] for i in self.inner.second)

    @property
    def permutation(self) -> Tuple[int, ...]:
        return self.first + self.second + self.third


def enumerate_shuffles2(r: int, mu: int) -> List[Shuffle2]:
    if not 0 <= mu <= r:
        raise ValueError(f"need 0 <= mu <= r, got mu={mu}, r={r}")
    return [Shuffle2.from_first(r, first) for first in combinations(range(1, r + 1), mu)]


def enumerate_shuffles3(r: int, mu: int, nu: int) -> List[Shuffle3]:
    if mu < 0 or nu < 0 or mu + nu > r:
        raise ValueError(f"need mu + nu <= r, got mu={mu}, nu={nu}, r={r}")
    inners = enumerate_shuffles2(r - mu, nu)
    return [Shuffle3(outer, inner) for outer in enumerate_shuffles2(r, mu) for inner in inners]


def shuffle_parity(s: Union[Shuffle2, Shuffle3]) -> Fraction:
    if isinstance(s, Shuffle3):
        return shuffle_parity(s.outer) * shuffle_parity(s.inner)
    exponent = sum(s.first) + s.mu * (s.mu + 1) // 2
    return -ONE if exponent % 2 else ONE


@lru_cache(maxsize=None)
def block_sort_sign(categories: Tuple[int, ...]) -> int:
    """
    Sign of the 3-shuffle that stably sorts positions by category (0, 1, 2).
    Memoized on the category pattern; normal ordering calls this per word.
    """
    r = len(categories)
    blocks = [tuple(i + 1 for i, c in enumerate(categories) if c == k) for k in range(3)]
    return int(shuffle_parity(Shuffle3.from_blocks(r, *blocks)))


# --- Shuffle identities ---


class RandomTable:
    """Lazily filled table of random rationals keyed by index tuples, seeded once."""

    def __init__(self, seed: int, spread: int = 50):
        self._rng = random.Random(seed)
        self._spread = spread
        self._values: Dict[Tuple[int, ...], Fraction] = {}

    def __call__(self, key) -> Fraction:
        key = tuple(key) if not isinstance(key, int) else (key,)
        if key not in self._values:
            num = self._rng.randint(-self._spread, self._spread)
            den = self._rng.randint(1, self._spread)
            self._values[key] = Fraction(num, den)
        return self._values[key]


Table = Callable[[Tuple[int, ...]], Fraction]


def _removal_sum(perms, start: int, size: int, phi: Table, psi: Table) -> Fraction:
    """Sum over shuffles of sign * (-1)^(pos-1) Psi(sigma(pos)) Phi(sigma without pos), pos in a block."""
    total = ZERO
    for perm, sign in perms:
        for pos in range(start + 1, start + size + 1):
            rest = perm[: pos - 1] + perm[pos:]
            term = sign * phi(rest) * psi(perm[pos - 1])
            total += -term if (pos - 1) % 2 else term
    return total


def _reduced_sum(r: int, shuffles_of, phi: Table, psi: Table) -> Fraction:
    """Sum_j (-1)^(j-1) Psi(j) Sum_tau sgn(tau) Phi(tau) with tau over shuffles of {1..r} minus j."""
    total = ZERO
    for j in range(1, r + 1):
        labels = [i for i in range(1, r + 1) if i != j]
        inner = ZERO
        for perm, sign in shuffles_of(r - 1):
            inner += sign * phi(tuple(labels[p - 1] for p in perm))
        term = psi(j) * inner
        total += -term if (j - 1) % 2 else term
    return total


def _shuffle3_terms(r: int, mu: int, nu: int):
    if mu < 0 or nu < 0 or mu + nu > r:
        return []
    return [(s.permutation, shuffle_parity(s)) for s in enumerate_shuffles3(r, mu, nu)]


def _shuffle2_terms(r: int, mu: int):
    if not 0 <= mu <= r:
        return []
    return [(s.permutation, shuffle_parity(s)) for s in enumerate_shuffles2(r, mu)]


def comb_identity_sides(
    r: int, mu: int, nu: int, phi: Table, psi: Table
) -> Dict[str, Tuple[Fraction, Fraction]]:
    """Both sides of the five block-removal identities for 3- and 2-shuffles."""
    three = _shuffle3_terms(r, mu, nu)
    two = _shuffle2_terms(r, mu)
    sides = {
        "comb-id-1": (
            _removal_sum(three, 0, mu, phi, psi),
            _reduced_sum(r, lambda n: _shuffle3_terms(n, mu - 1, nu), phi, psi),
        ),
        "comb-id-2": (
            _removal_sum(three, mu, nu, phi, psi),
            _reduced_sum(r, lambda n: _shuffle3_terms(n, mu, nu - 1), phi, psi),
        ),
        "comb-id-3": (
            _removal_sum(three, mu + nu, r - mu - nu, phi, psi),
            _reduced_sum(r, lambda n: _shuffle3_terms(n, mu, nu), phi, psi),
        ),
        "comb-id-4": (
            _removal_sum(two, 0, mu, phi, psi),
            _reduced_sum(r, lambda n: _shuffle2_terms(n, mu - 1), phi, psi),
        ),
        "comb-id-5": (
            _removal_sum(two, mu, r - mu, phi, psi),
            _reduced_sum(r, lambda n: _shuffle2_terms(n, mu), phi, psi),
        ),
    }
    return sides


def comb_identity_check(r: int, mu: int, nu: int, phi: Table, psi: Table) -> bool:
    sides = comb_identity_sides(r, mu, nu, phi, psi)
    failed = [name for name, (lhs, rhs) in sides.items() if lhs != rhs]
    if failed:
        logger.debug(f"shuffle identities failed for r={r}, mu={mu}, nu={nu}: {failed}")
    return not failed
