"""
Textual word grammar for the command line.

V words:  e1(-1/2)eb2(-3/2)1   (trailing 1 optional; "1" alone is the vacuum)
W words:  eb1(-2)e1(0)u0       (raw modes in any order, canonicalized; "u0" alone is the vacuum)
"""

import re
from fractions import Fraction
from typing import List, Tuple

from src.fock_space import VACUUM, U0, Mode, VWord, WElement, WWord, canonicalize_tensor

_LETTER = re.compile(r"\s*(eb|e)([1-9][0-9]*)\(\s*([+-]?\d+(?:/\d+)?)\s*\)")
_SPACE = re.compile(r"\s*")


class WordParseError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


def _scan(text: str, terminal: str) -> List[Tuple[str, Fraction, int]]:
    letters = []
    pos = 0
    while True:
        pos = _SPACE.match(text, pos).end()
        if pos == len(text):
            return letters
        if text.startswith(terminal, pos):
            end = _SPACE.match(text, pos + len(terminal)).end()
            if end != len(text):
                raise WordParseError(f"unexpected text after '{terminal}'", text, end)
            return letters
        match = _LETTER.match(text, pos)
        if not match:
            raise WordParseError("expected a letter like e1(-1/2)", text, pos)
        try:
            mode = Fraction(match.group(3))
        except (ValueError, ZeroDivisionError):
            raise WordParseError("invalid mode", text, match.start(3))
        letters.append((f"{match.group(1)}{match.group(2)}", mode, match.start(3)))
        pos = match.end()


def parse_v_word(text: str) -> VWord:
    """a1(-m1-1/2)...ar(-mr-1/2)1 -> VWord; every mode must be a negative half-odd integer."""
    if not text.strip():
        raise WordParseError("empty word", text, 0)
    letters = []
    for label, mode, position in _scan(text, "1"):
        doubled = mode * 2
        if doubled.denominator != 1 or doubled.numerator % 2 == 0 or mode > 0:
            raise WordParseError("V modes must be negative half-odd integers", text, position)
        letters.append((label, int(-mode - Fraction(1, 2))))
    return VWord(tuple(letters)) if letters else VACUUM


def parse_w_element(text: str) -> WElement:
    """Raw modes applied to u0, rewritten to canonical words under the module relations."""
    if not text.strip():
        raise WordParseError("empty word", text, 0)
    modes = []
    for label, mode, position in _scan(text, "u0"):
        if mode.denominator != 1:
            raise WordParseError("W modes must be integers", text, position)
        modes.append(Mode(label, int(mode)))
    if not text.rstrip().endswith("u0"):
        raise WordParseError("W words end in u0", text, len(text.rstrip()))
    return canonicalize_tensor(modes) if modes else WElement.from_word(U0)


def parse_w_word(text: str) -> WWord:
    """A W spec whose canonical form is a single basis word with coefficient 1."""
    element = parse_w_element(text)
    if len(element) != 1:
        raise WordParseError("expected a single basis word", text, 0)
    (word, coeff), = element.items()
    if coeff != 1:
        raise WordParseError(f"canonical form carries coefficient {coeff}", text, 0)
    return word
