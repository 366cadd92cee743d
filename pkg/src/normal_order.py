"""
Normal ordering of module-side mode words and of generating-function
products.

A word is rearranged as (negative modes)(positive modes)(zero modes), the
first two blocks keeping their original relative order and the sign being
that of the 3-shuffle. The zero block is replaced by its recursive normal
ordering, which involves no relations among zero modes.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, Iterator, List, Sequence, Tuple, Union

from src.algebra_core import ONE, ZERO, HalfInt, binom, block_sort_sign
from src.fock_space import (
    HLike,
    Label,
    LinearCombination,
    WElement,
    WWord,
    apply_mode,
    as_hvector,
    as_w_element,
    pair_labels,
)

logger = logging.getLogger(__name__)

ModeLetter = Tuple[Label, int]
ModeWord = Tuple[ModeLetter, ...]
ZeroWord = Tuple[Label, ...]

_HALF = Fraction(1, 2)


def _category(n: int) -> int:
    return 0 if n < 0 else (1 if n > 0 else 2)


def _letters(word: Sequence[Tuple[HLike, int]]) -> List[List[Tuple[ModeLetter, Fraction]]]:
    """Expand each slot of a word with vector entries into its basis labels."""
    return [[((label, n), c) for label, c in as_hvector(h).items()] for h, n in word]


class ModeCombination(LinearCombination):
    """Linear combination of raw mode words (products in the free mode algebra)."""

    def to_strings(self) -> Dict[str, str]:
        return {format_mode_word(word): str(coeff) for word, coeff in self.terms()}


def format_mode_word(word: ModeWord) -> str:
    return "".join(f"{label}({n})" for label, n in word)


# --- Zero-mode recursions ---


@lru_cache(maxsize=None)
def zero_left_recursion(zeros: ZeroWord) -> Tuple[Tuple[ZeroWord, Fraction], ...]:
    """
    :a1(0)...ar(0): = a1(0):a2(0)...ar(0): + sum_{i>=2} ((-1)^(i+1)/2)(a1,ai) :a2..^ai..ar:
    as raw zero-mode products with coefficients.
    """
    if len(zeros) <= 1:
        return ((zeros, ONE),)
    head, tail = zeros[0], zeros[1:]
    result = LinearCombination()
    for word, coeff in zero_left_recursion(tail):
        result.add_term((head,) + word, coeff)
    for i in range(2, len(zeros) + 1):
        form = pair_labels(head, zeros[i - 1])
        if not form:
            continue
        sign = 1 if (i + 1) % 2 == 0 else -1
        rest = tail[: i - 2] + tail[i - 1 :]
        for word, coeff in zero_left_recursion(rest):
            result.add_term(word, sign * _HALF * form * coeff)
    return tuple(result.terms())


@lru_cache(maxsize=None)
def _zero_right(zeros: ZeroWord) -> Tuple[Tuple[ZeroWord, Fraction], ...]:
    r = len(zeros)
    if r <= 1:
        return ((zeros, ONE),)
    last, front = zeros[-1], zeros[:-1]
    result = LinearCombination()
    for word, coeff in _zero_right(front):
        result.add_term(word + (last,), coeff)
    for i in range(1, r):
        form = pair_labels(zeros[i - 1], last)
        if not form:
            continue
        sign = 1 if (i + r) % 2 == 0 else -1
        rest = front[: i - 1] + front[i:]
        for word, coeff in _zero_right(rest):
            result.add_term(word, sign * _HALF * form * coeff)
    return tuple(result.terms())


class OrderedProduct(LinearCombination):
    """Combination of (negatives, positives, zeros) blocks; zeros is a raw zero-mode product."""

    def apply(self, w: Union[WWord, WElement]) -> WElement:
        result = WElement()
        w = as_w_element(w)
        for (negatives, positives, zeros), coeff in self.items():
            image = _apply_blocks(negatives, positives, zeros, w)
            for word, c in image.items():
                result.add_term(word, coeff * c)
        return result

    def to_strings(self) -> Dict[str, str]:
        out = {}
        for (negatives, positives, zeros), coeff in self.terms():
            word = format_mode_word(negatives + positives + tuple((z, 0) for z in zeros))
            out[word or "1"] = str(coeff)
        return out


def zero_right_recursion(zeros: Sequence[Label]) -> OrderedProduct:
    result = OrderedProduct()
    for word, coeff in _zero_right(tuple(zeros)):
        result.add_term(((), (), word), coeff)
    return result


def _apply_blocks(negatives: ModeWord, positives: ModeWord, zeros: ZeroWord, w: WElement) -> WElement:
    for label in reversed(zeros):
        w = apply_mode(label, 0, w)
    for label, n in reversed(positives):
        if not w:
            return w
        w = apply_mode(label, n, w)
    for label, n in reversed(negatives):
        w = apply_mode(label, n, w)
    return w


def _split(word: ModeWord) -> Tuple[int, ModeWord, ModeWord, ZeroWord]:
    sign = block_sort_sign(tuple(_category(n) for _, n in word))
    negatives = tuple(letter for letter in word if letter[1] < 0)
    positives = tuple(letter for letter in word if letter[1] > 0)
    zeros = tuple(label for label, n in word if n == 0)
    return sign, negatives, positives, zeros


def normal_order_word(word: Sequence[Tuple[HLike, int]]) -> OrderedProduct:
    result = OrderedProduct()
    for choice in product(*_letters(word)):
        letters = tuple(letter for letter, _ in choice)
        scale = ONE
        for _, c in choice:
            scale *= c
        sign, negatives, positives, zeros = _split(letters)
        for zero_word, coeff in zero_left_recursion(zeros):
            result.add_term((negatives, positives, zero_word), sign * scale * coeff)
    return result


def apply_normal_ordered(word: ModeWord, w: WElement) -> WElement:
    """:word: w for a word of basis labels, without building the OrderedProduct."""
    sign, negatives, positives, zeros = _split(word)
    if sum(n for _, n in positives) > max((x.weight.floor() for x in w), default=0):
        return WElement()
    result = WElement()
    for zero_word, coeff in zero_left_recursion(zeros):
        image = _apply_blocks(negatives, positives, zero_word, w)
        for key, c in image.items():
            result.add_term(key, sign * coeff * c)
    return result


# --- Generating-function products ---


def _tuples(count: int, total: int, budget: int) -> Iterator[Tuple[int, ...]]:
    """Integer tuples summing to `total` whose positive parts sum to at most `budget`."""
    if count == 0:
        if total == 0:
            yield ()
        return
    if count == 1:
        if max(total, 0) <= budget:
            yield (total,)
        return
    for n in range(total - budget, budget + 1):
        for rest in _tuples(count - 1, total - n, budget - max(n, 0)):
            yield (n,) + rest


def _group_tuples(sizes: Sequence[int], totals: Sequence[int], budget: int) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    if not sizes:
        yield ()
        return
    for first in _tuples(sizes[0], totals[0], budget):
        used = sum(n for n in first if n > 0)
        for rest in _group_tuples(sizes[1:], totals[1:], budget - used):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _derivative_factor(n: int, m: int) -> Fraction:
    # coefficient of x^{-n-1/2-m} in (x^{-n-1/2})^{(m)}
    return binom(Fraction(-2 * n - 1, 2), m)


def nord_group_coefficient(
    groups: Sequence[Sequence[Tuple[HLike, int]]],
    targets: Sequence,
    w: Union[WWord, WElement],
) -> WElement:
    """
    Coefficient of prod_g x_g^{targets[g]} in
    :h_1^{(m_1)}(x_1)...h_r^{(m_r)}(x_g)...: w, each group sharing one formal variable.
    """
    if len(groups) != len(targets):
        raise ValueError("one target exponent per group is required")
    w = as_w_element(w)
    result = WElement()
    if not w:
        return result
    sizes, totals = [], []
    for group, target in zip(groups, targets):
        target = HalfInt.of(target)
        # sum(-n_i - 1/2 - m_i) = target
        doubled = -target.doubled - len(group) - 2 * sum(m for _, m in group)
        if doubled % 2:
            return result
        sizes.append(len(group))
        totals.append(doubled // 2)
    if not any(sizes):
        return w.copy() if all(t == 0 for t in totals) else result
    budget = max(word.weight.floor() for word in w)
    flat = [slot for group in groups for slot in group]
    expansions = _letters([(h, 0) for h, _ in flat])
    ms = [m for _, m in flat]
    for ns in _group_tuples(sizes, totals, budget):
        modes = [n for group in ns for n in group]
        factor = ONE
        for n, m in zip(modes, ms):
            factor *= _derivative_factor(n, m)
            if not factor:
                break
        if not factor:
            continue
        for choice in product(*expansions):
            scale = factor
            for _, c in choice:
                scale *= c
            word = tuple((letter[0], n) for (letter, _), n in zip(choice, modes))
            for key, c in apply_normal_ordered(word, w).items():
                result.add_term(key, scale * c)
    return result


def nord_series_coefficient(gens: Sequence[Tuple[HLike, int]], target, w: Union[WWord, WElement]) -> WElement:
    return nord_group_coefficient([gens], [target], w)


# --- Raw words back to normal-ordered form ---


def _sort_step(word: ModeWord) -> List[Tuple[ModeWord, Fraction]]:
    for i in range(len(word) - 1):
        (a, m), (b, n) = word[i], word[i + 1]
        if _category(m) > _category(n):
            swapped = word[:i] + (word[i + 1], word[i]) + word[i + 2 :]
            out = [(swapped, -ONE)]
            if m > 0 and n < 0 and m == -n:
                form = pair_labels(a, b)
                if form:
                    out.append((word[:i] + word[i + 2 :], Fraction(form)))
            return out
    return []


@lru_cache(maxsize=None)
def _raw_zeros_as_normal(zeros: ZeroWord) -> Tuple[Tuple[ZeroWord, Fraction], ...]:
    """Inverse of the left recursion: a raw zero product as a combination of :...: words."""
    if len(zeros) <= 1:
        return ((zeros, ONE),)
    head = zeros[0]
    result = LinearCombination()
    for u, coeff in _raw_zeros_as_normal(zeros[1:]):
        # head :u: = :head u: - sum_i ((-1)^(i+1)/2)(head, a_i) :u without a_i:
        result.add_term((head,) + u, coeff)
        for i in range(2, len(u) + 2):
            form = pair_labels(head, u[i - 2])
            if not form:
                continue
            sign = 1 if (i + 1) % 2 == 0 else -1
            rest = u[: i - 2] + u[i - 1 :]
            result.add_term(rest, -sign * _HALF * form * coeff)
    return tuple(result.terms())


def express_normal_ordered(raw: ModeCombination) -> ModeCombination:
    """
    Rewrite raw mode products as normal-ordered words, keyed by the word in
    canonical (negatives, positives, zeros) order. Uses the module relations
    across blocks and no relations among zero modes.
    """
    pending = LinearCombination(raw)
    result = ModeCombination()
    while pending:
        word, coeff = pending.popitem()
        step = _sort_step(word)
        if step:
            for image, c in step:
                pending.add_term(image, coeff * c)
            continue
        prefix = tuple(letter for letter in word if letter[1] != 0)
        zeros = tuple(label for label, n in word if n == 0)
        for u, c in _raw_zeros_as_normal(zeros):
            result.add_term(prefix + tuple((z, 0) for z in u), coeff * c)
    return result
