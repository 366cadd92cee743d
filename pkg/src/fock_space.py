"""
Fock spaces of the fermionic construction.

V is spanned by words a1(-m1-1/2)...as(-ms-1/2)1, W by words
h1(-i1)...hk(-ik) z1(0)...zl(0) u0 (negative modes left of zero modes).
Labels name the polarized basis of h = C^{2M}: e1..eM and eb1..ebM with
(e_i, eb_j) = delta_ij.
"""

import logging
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from src.algebra_core import ONE, ZERO, HalfInt

logger = logging.getLogger(__name__)

Label = str
Letter = Tuple[Label, int]

_LABEL_PATTERN = re.compile(r"^(eb|e)([1-9][0-9]*)$")


def parse_label(label: Label) -> Tuple[bool, int]:
    """Returns (barred, index) for 'e3' / 'eb3'."""
    match = _LABEL_PATTERN.match(label)
    if not match:
        raise ValueError(f"invalid generator label: {label!r}")
    return match.group(1) == "eb", int(match.group(2))


def space_labels(M: int) -> Tuple[Label, ...]:
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    return tuple(f"e{i}" for i in range(1, M + 1)) + tuple(f"eb{i}" for i in range(1, M + 1))


def dual_label(label: Label) -> Label:
    barred, index = parse_label(label)
    return f"e{index}" if barred else f"eb{index}"


def pair_labels(a: Label, b: Label) -> int:
    """The symmetric form on basis labels: (e_i, eb_j) = (eb_j, e_i) = delta_ij."""
    barred_a, i = parse_label(a)
    barred_b, j = parse_label(b)
    return 1 if barred_a != barred_b and i == j else 0


class HVector(dict):
    """Element of h: label -> exact coefficient."""

    @classmethod
    def basis(cls, label: Label) -> "HVector":
        parse_label(label)
        return cls({label: ONE})

    def pair(self, other: "HVector") -> Fraction:
        return sum(
            (ca * cb * pair_labels(a, b) for a, ca in self.items() for b, cb in other.items()),
            ZERO,
        )


HLike = Union[Label, HVector]


def as_hvector(h: HLike) -> HVector:
    if isinstance(h, HVector):
        return h
    return HVector.basis(h)


def bilinear(a: HLike, b: HLike) -> Fraction:
    return as_hvector(a).pair(as_hvector(b))


class LinearCombination(dict):
    """Finite exact-rational combination of hashable basis keys; zero coefficients are never stored."""

    def add_term(self, key, coeff) -> None:
        if not coeff:
            return
        value = self.get(key, ZERO) + coeff
        if value:
            self[key] = value
        else:
            self.pop(key, None)

    def copy(self):
        return type(self)(self)

    def __add__(self, other):
        if not isinstance(other, LinearCombination):
            return NotImplemented
        result = self.copy()
        for key, coeff in other.items():
            result.add_term(key, coeff)
        return result

    def __sub__(self, other):
        if not isinstance(other, LinearCombination):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return type(self)({key: -coeff for key, coeff in self.items()})

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, Fraction)):
            return NotImplemented
        if not scalar:
            return type(self)()
        return type(self)({key: coeff * scalar for key, coeff in self.items()})

    __rmul__ = __mul__

    @property
    def is_zero(self) -> bool:
        return not self

    def terms(self):
        return sorted(self.items(), key=lambda item: str(item[0]))


def _format_letters(letters: Iterable[Letter], v_side: bool) -> str:
    if v_side:
        return "".join(f"{label}({str(HalfInt(-2 * m - 1))})" for label, m in letters)
    return "".join(f"{label}({-m})" for label, m in letters)


@dataclass(frozen=True)
class VWord:
    """a1(-m1-1/2)...as(-ms-1/2)1, letters stored as (label, m)."""

    letters: Tuple[Letter, ...] = ()

    @property
    def weight(self) -> HalfInt:
        return HalfInt(sum(2 * m + 1 for _, m in self.letters))

    @property
    def parity(self) -> int:
        return len(self.letters) % 2

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return _format_letters(self.letters, v_side=True) or "1"


@dataclass(frozen=True)
class WWord:
    """h1(-i1)...hk(-ik) z1(0)...zl(0) u0; negatives stored as (label, i) with i > 0."""

    negatives: Tuple[Letter, ...] = ()
    zeros: Tuple[Label, ...] = ()

    @property
    def weight(self) -> HalfInt:
        return HalfInt(2 * sum(m for _, m in self.negatives))

    @property
    def parity(self) -> int:
        return (len(self.negatives) + len(self.zeros)) % 2

    def __str__(self) -> str:
        zeros = "".join(f"{label}(0)" for label in self.zeros)
        return _format_letters(self.negatives, v_side=False) + zeros + "u0"


VACUUM = VWord()
U0 = WWord()


class VElement(LinearCombination):
    @classmethod
    def from_word(cls, word: VWord, coeff=ONE) -> "VElement":
        return cls({word: Fraction(coeff)}) if coeff else cls()

    def to_json_terms(self) -> List[dict]:
        return [
            {"word": [[label, m] for label, m in word.letters], "zeros": [], "coeff": str(coeff)}
            for word, coeff in self.terms()
        ]


class WElement(LinearCombination):
    @classmethod
    def from_word(cls, word: WWord, coeff=ONE) -> "WElement":
        return cls({word: Fraction(coeff)}) if coeff else cls()

    def to_json_terms(self) -> List[dict]:
        return [
            {
                "word": [[label, m] for label, m in word.negatives],
                "zeros": list(word.zeros),
                "coeff": str(coeff),
            }
            for word, coeff in self.terms()
        ]


def weight(x) -> HalfInt:
    """Weight of a word, or of a homogeneous element."""
    if isinstance(x, (VWord, WWord)):
        return x.weight
    weights = {word.weight for word in x}
    if len(weights) != 1:
        raise ValueError(f"element is not homogeneous in weight: {sorted(map(str, weights))}")
    return weights.pop()


def parity(x) -> int:
    if isinstance(x, (VWord, WWord)):
        return x.parity
    parities = {word.parity for word in x}
    if len(parities) != 1:
        raise ValueError("element mixes even and odd words")
    return parities.pop()


def as_w_element(w: Union[WWord, WElement]) -> WElement:
    return WElement.from_word(w) if isinstance(w, WWord) else w


def as_v_element(v: Union[VWord, VElement]) -> VElement:
    return VElement.from_word(v) if isinstance(v, VWord) else v


def pair(wprime: WWord, w: Union[WWord, WElement]) -> Fraction:
    """Dual-basis pairing <w', w>."""
    return as_w_element(w).get(wprime, ZERO)


# --- Mode actions ---


def _act_on_w_word(label: Label, n: int, word: WWord) -> List[Tuple[WWord, int]]:
    if n < 0:
        return [(WWord(((label, -n),) + word.negatives, word.zeros), 1)]
    if n == 0:
        sign = -1 if len(word.negatives) % 2 else 1
        return [(WWord(word.negatives, (label,) + word.zeros), sign)]
    results = []
    for i, (b, m) in enumerate(word.negatives):
        if m == n and pair_labels(label, b):
            rest = word.negatives[:i] + word.negatives[i + 1 :]
            results.append((WWord(rest, word.zeros), -1 if i % 2 else 1))
    return results


def apply_mode(h: HLike, n: int, w: Union[WWord, WElement]) -> WElement:
    """h(n) on W: creation for n < 0, contraction for n > 0, free zero-mode action for n = 0."""
    result = WElement()
    for label, hc in as_hvector(h).items():
        for word, coeff in as_w_element(w).items():
            for image, sign in _act_on_w_word(label, n, word):
                result.add_term(image, sign * hc * coeff)
    return result


def _act_on_v_word(label: Label, n: HalfInt, word: VWord) -> List[Tuple[VWord, int]]:
    if n.is_integral:
        raise ValueError(f"V modes are half-integers, got {n}")
    if n.doubled < 0:
        return [(VWord(((label, (-n.doubled - 1) // 2),) + word.letters), 1)]
    beta = (n.doubled - 1) // 2
    results = []
    for i, (b, m) in enumerate(word.letters):
        if m == beta and pair_labels(label, b):
            results.append((VWord(word.letters[:i] + word.letters[i + 1 :]), -1 if i % 2 else 1))
    return results


def apply_v_mode(h: HLike, n: HalfInt, v: Union[VWord, VElement]) -> VElement:
    """h(n) on V: a(-i-1/2) prepends, a(beta+1/2) contracts with (a,b_i) delta_{beta,m_i} and sign (-1)^(i-1)."""
    n = HalfInt.of(n)
    result = VElement()
    for label, hc in as_hvector(h).items():
        for word, coeff in as_v_element(v).items():
            for image, sign in _act_on_v_word(label, n, word):
                result.add_term(image, sign * hc * coeff)
    return result


# --- Canonical forms of raw tensors ---


@dataclass(frozen=True)
class Mode:
    """A raw mode h(n) acting on W."""

    label: Label
    n: int

    def __str__(self) -> str:
        return f"{self.label}({self.n})"


K = "k"  # central element, acts as 1


def _find_redexes(term: Tuple) -> List[int]:
    redexes = []
    last = len(term) - 1
    for i, sym in enumerate(term):
        if sym == K:
            redexes.append(i)
            continue
        if sym.n > 0 and i == last:
            redexes.append(i)
            continue
        if i < last:
            nxt = term[i + 1]
            if nxt == K:
                continue
            if (sym.n > 0 and nxt.n <= 0) or (sym.n == 0 and nxt.n < 0):
                redexes.append(i)
    return redexes


def _rewrite(term: Tuple, i: int) -> List[Tuple[Tuple, int]]:
    sym = term[i]
    if sym == K:
        return [(term[:i] + term[i + 1 :], 1)]
    if i == len(term) - 1:
        return []  # positive mode on u0
    nxt = term[i + 1]
    swapped = term[:i] + (nxt, sym) + term[i + 2 :]
    out = [(swapped, -1)]
    if sym.n > 0 and nxt.n < 0 and sym.n == -nxt.n and pair_labels(sym.label, nxt.label):
        out.append((term[:i] + term[i + 2 :], 1))
    return out


def canonicalize_tensor(
    raw: Sequence[Union[Mode, str]], rng: Optional[random.Random] = None
) -> WElement:
    """
    Canonical form of the raw product raw[0] raw[1] ... u0 under the module
    relations. Redexes are taken leftmost-first, or uniformly at random when
    an `rng` is supplied.
    """
    pending: Dict[Tuple, Fraction] = {tuple(raw): ONE}
    result = WElement()
    while pending:
        term, coeff = pending.popitem()
        redexes = _find_redexes(term)
        if not redexes:
            negatives = tuple((m.label, -m.n) for m in term if m.n < 0)
            zeros = tuple(m.label for m in term if m.n == 0)
            result.add_term(WWord(negatives, zeros), coeff)
            continue
        i = rng.choice(redexes) if rng is not None else redexes[0]
        for image, sign in _rewrite(term, i):
            value = pending.get(image, ZERO) + sign * coeff
            if value:
                pending[image] = value
            else:
                pending.pop(image, None)
    return result


# --- Bases ---


def _letter_sequences(labels: Sequence[Label], budget: int, offset: int) -> List[Tuple[Letter, ...]]:
    """Letter tuples whose doubled weight sum(2m + offset) stays within `budget` (doubled)."""
    sequences = [()]
    frontier = [((), 0)]
    while frontier:
        nxt = []
        for letters, used in frontier:
            for m in range(0 if offset else 1, budget + 1):
                cost = 2 * m + offset
                if used + cost > budget:
                    break
                for label in labels:
                    extended = letters + ((label, m),)
                    sequences.append(extended)
                    nxt.append((extended, used + cost))
        frontier = nxt
    return sequences


def v_basis(M: int, max_weight) -> List[VWord]:
    budget = HalfInt.of(max_weight).doubled
    words = [VWord(letters) for letters in _letter_sequences(space_labels(M), budget, 1)]
    return sorted(words, key=lambda word: (word.weight, len(word), str(word)))


def w_basis(M: int, max_weight, max_zero_modes: int = 1) -> List[WWord]:
    labels = space_labels(M)
    budget = HalfInt.of(max_weight).doubled
    negatives = _letter_sequences(labels, budget, 0)
    zero_blocks: List[Tuple[Label, ...]] = [()]
    frontier: List[Tuple[Label, ...]] = [()]
    for _ in range(max_zero_modes):
        frontier = [block + (label,) for block in frontier for label in labels]
        zero_blocks.extend(frontier)
    words = [WWord(neg, zeros) for neg in negatives for zeros in zero_blocks]
    return sorted(words, key=lambda word: (word.weight, len(word.negatives) + len(word.zeros), str(word)))
