"""Digit words and alphabets.

A digit word is a tuple of integers, most-significant digit first.  The
empty tuple is the canonical form of zero; it displays as "0".  Two text
forms are supported: the compact form over {-1,0,1} ("100-1" has digits
1,0,0,-1, with "-" binding to the following "1") and the general
comma-separated form ("2,0,-1").
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

DigitWord = tuple  # tuple[int, ...], most-significant first


@dataclass(frozen=True)
class Alphabet:
    """The contiguous digit set {lo, ..., hi}; must contain 0."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > 0 or self.hi < 0:
            raise ValueError("alphabet must contain 0")

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def __contains__(self, digit):
        return self.lo <= digit <= self.hi

    def __len__(self):
        return self.hi - self.lo + 1

    @property
    def digits(self) -> tuple:
        return tuple(range(self.lo, self.hi + 1))

    @property
    def max_abs(self) -> int:
        return max(-self.lo, self.hi)

    @property
    def symmetric(self) -> bool:
        return self.lo == -self.hi

    def hull(self, other: "Alphabet") -> "Alphabet":
        return Alphabet(min(self.lo, other.lo), max(self.hi, other.hi))

    @staticmethod
    def parse(text: str) -> "Alphabet":
        """Parse "lo..hi" (e.g. "-1..1")."""
        lo_s, sep, hi_s = text.partition("..")
        if not sep:
            raise ValueError(f"bad alphabet {text!r}, expected lo..hi")
        return Alphabet(int(lo_s), int(hi_s))

    def __str__(self):
        return f"{self.lo}..{self.hi}"


def weight(word: Sequence[int]) -> int:
    """Absolute digit sum of a word."""
    return sum(abs(d) for d in word)


def strip_zeros(word: Sequence[int]) -> DigitWord:
    """Remove leading zeros; zero becomes the empty word."""
    i = 0
    while i < len(word) and word[i] == 0:
        i += 1
    return tuple(word[i:])


def pad_zeros(word: Sequence[int], length: int) -> DigitWord:
    """Left-pad with zeros to the given length."""
    if len(word) > length:
        raise ValueError(f"word longer than {length}")
    return (0,) * (length - len(word)) + tuple(word)


def negate(word: Sequence[int]) -> DigitWord:
    return tuple(-d for d in word)


def format_word(word: Sequence[int], compact: bool | None = None) -> str:
    """Render a word; compact form when all digits are in {-1,0,1}."""
    if len(word) == 0:
        return "0"
    if compact is None:
        compact = all(-1 <= d <= 1 for d in word)
    if compact:
        if not all(-1 <= d <= 1 for d in word):
            raise ValueError("compact form needs digits in {-1,0,1}")
        return "".join("-1" if d == -1 else str(d) for d in word)
    return ",".join(str(d) for d in word)


def parse_word(text: str) -> DigitWord:
    """Parse either compact or comma-separated form."""
    text = text.strip()
    if text == "" or text == "0":
        return ()
    if "," in text:
        return tuple(int(part) for part in text.split(","))
    digits = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "-":
            if i + 1 >= len(text) or text[i + 1] != "1":
                raise ValueError(f"bad compact word {text!r}")
            digits.append(-1)
            i += 2
        elif ch in "01":
            digits.append(int(ch))
            i += 1
        else:
            raise ValueError(f"bad compact word {text!r}")
    return tuple(digits)


def abs_lex_key(word: Sequence[int], length: int) -> tuple:
    """Key comparing |digits| lexicographically after left-padding."""
    return tuple(abs(d) for d in pad_zeros(word, length))


def all_words(digits: Iterable[int], k: int):
    """Yield every length-k word over the digit set, lexicographically."""
    digits = sorted(digits)
    if k == 0:
        yield ()
        return
    stack = [()]
    while stack:
        prefix = stack.pop()
        if len(prefix) == k:
            yield prefix
            continue
        for d in reversed(digits):
            stack.append(prefix + (d,))
