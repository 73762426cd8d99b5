"""Pisot-type numeration bases.

A basis is a strictly increasing integer sequence U with U_0 = 1 that
eventually satisfies the linear recurrence whose characteristic polynomial
is the minimal polynomial of a Pisot number beta.  Roots are computed to
50+ significant digits; the recurrence onset h is inferred as the smallest
index from which the supplied initial terms obey the recurrence.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Sequence

import mpmath as mp
import sympy

from .errors import BadFirstTerm, InsufficientTerms, NotIncreasing, NotPisot
from .words import DigitWord

ROOT_DPS = 60  # working precision for root finding and embeddings


@dataclass(frozen=True, eq=False)
class PisotBasis:
    """A validated numeration basis; immutable, arithmetic is exact."""

    min_poly: tuple          # integer coefficients, constant term first, monic
    initial_terms: tuple     # U_0, U_1, ...
    h: int                   # recurrence onset: U_k recurs for k >= h + d
    pisot_margin: float
    name: str
    beta: mp.mpf             # dominant root, ~50 significant digits
    conjugates: tuple        # mpc roots beta_2..beta_d, decreasing modulus

    _terms: list = field(default_factory=list, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def degree(self) -> int:
        return len(self.min_poly) - 1

    @property
    def roots(self) -> tuple:
        """All roots, beta first."""
        return (self.beta,) + self.conjugates

    def term(self, k: int):
        """U_k, exact; memoized and safe for concurrent readers."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        if k < len(self._terms):
            return self._terms[k]
        with self._lock:
            d = self.degree
            rec = self.min_poly[:-1]  # U_k = -sum_j rec[j] * U_{k-d+j}
            while len(self._terms) <= k:
                m = len(self._terms)
                nxt = -sum(rec[j] * self._terms[m - d + j] for j in range(d))
                self._terms.append(nxt)
        return self._terms[k]

    def terms(self, count: int) -> list:
        self.term(count - 1)
        return self._terms[:count]

    def term_sums(self, count: int) -> list:
        """Prefix sums S_p = U_0 + ... + U_p for p < count."""
        out, acc = [], 0
        for u in self.terms(count):
            acc += u
            out.append(acc)
        return out

    def greedy_length(self, n: int) -> int:
        """Length of the greedy expansion of |n| (0 for n = 0)."""
        n = abs(n)
        if n == 0:
            return 0
        k = 0
        while self.term(k + 1) <= n:
            k += 1
        return k + 1

    def fitted_c(self, at: int = 60) -> mp.mpf:
        """Numeric constant c with U_k ~ c beta^k, fitted at index `at`."""
        with mp.workdps(ROOT_DPS):
            return mp.mpf(self.term(at)) / self.beta ** at

    def __eq__(self, other):
        if not isinstance(other, PisotBasis):
            return NotImplemented
        return (self.min_poly == other.min_poly
                and self.initial_terms == other.initial_terms)

    def __hash__(self):
        return hash((self.min_poly, self.initial_terms))

    def __str__(self):
        return self.name or f"basis{list(self.min_poly)}"


def make_basis(min_poly: Sequence[int], initial_terms: Sequence[int],
               pisot_margin: float = 1e-9, name: str = "") -> PisotBasis:
    """Validate and construct a basis.

    min_poly lists integer coefficients constant-term first and must be
    monic of degree >= 1.  Raises NotPisot / NotIncreasing / BadFirstTerm /
    InsufficientTerms per the respective violation.
    """
    poly = tuple(int(c) for c in min_poly)
    terms = tuple(int(t) for t in initial_terms)
    d = len(poly) - 1
    if d < 1 or poly[-1] != 1:
        raise ValueError("min_poly must be monic of degree >= 1")
    if not terms:
        raise InsufficientTerms("no initial terms")
    if terms[0] != 1:
        raise BadFirstTerm(f"U_0 = {terms[0]}, expected 1")
    if any(a >= b for a, b in zip(terms, terms[1:])):
        raise NotIncreasing(f"initial terms {list(terms)} not strictly increasing")
    if len(terms) < d:
        raise InsufficientTerms(f"need at least {d} initial terms, got {len(terms)}")

    if not sympy.Poly(list(reversed(poly)), sympy.Symbol("x")).is_irreducible:
        raise NotPisot(f"{list(poly)} is reducible, not a minimal polynomial")

    with mp.workdps(ROOT_DPS):
        roots = mp.polyroots([mp.mpf(c) for c in reversed(poly)],
                             maxsteps=200, extraprec=200)
        roots = sorted(roots, key=lambda r: -abs(r))
        dom, rest = roots[0], roots[1:]
        margin = mp.mpf(pisot_margin)
        if abs(mp.im(dom)) > mp.mpf(10) ** (-(ROOT_DPS - 10)):
            raise NotPisot("dominant root is not real")
        dom = mp.re(dom)
        if dom <= 1 + margin:
            raise NotPisot(f"dominant root {mp.nstr(dom, 12)} <= 1")
        for r in rest:
            if abs(r) >= 1 - margin:
                raise NotPisot(
                    f"conjugate of modulus {mp.nstr(abs(r), 12)} >= 1 - margin")
        conjugates = tuple(rest)

    h = _infer_onset(poly, terms)

    basis = PisotBasis(min_poly=poly, initial_terms=terms, h=h,
                       pisot_margin=float(pisot_margin), name=name,
                       beta=dom, conjugates=conjugates)
    basis._terms.extend(terms)
    return basis


def _infer_onset(poly: tuple, terms: tuple) -> int:
    d = len(poly) - 1
    rec = poly[:-1]

    def holds_from(h):
        for k in range(h + d, len(terms)):
            if terms[k] != -sum(rec[j] * terms[k - d + j] for j in range(d)):
                return False
        return True

    for h in range(len(terms) - d + 1):
        if holds_from(h):
            return h
    return len(terms) - d  # unreachable: the last h is vacuously true


def value_U(basis: PisotBasis, word: Sequence[int]):
    """Integer value sum_j z_j U_j of a word (most-significant first)."""
    k = len(word)
    if k == 0:
        return 0
    terms = basis.terms(k)
    return sum(d * terms[k - 1 - j] for j, d in enumerate(word))


def greedy_expansion(basis: PisotBasis, n: int) -> DigitWord:
    """The greedy U-expansion of n >= 0; zero is the empty word."""
    if n < 0:
        raise ValueError("greedy expansion is defined for n >= 0")
    if n == 0:
        return ()
    length = basis.greedy_length(n)
    terms = basis.terms(length)
    digits = []
    r = n
    for j in range(length - 1, -1, -1):
        q, r = divmod(r, terms[j])
        digits.append(q)
    return tuple(digits)


# --- built-in bases -------------------------------------------------------

_BUILTIN_SPECS = {
    "fibonacci": ((-1, -1, 1), (1, 2)),
    "tribonacci": ((-1, -1, -1, 1), (1, 2, 4)),
    "smallest-pisot": ((-1, -1, 0, 1), (1, 2, 3, 4, 6)),
}

_ALIASES = {
    "fib": "fibonacci", "f": "fibonacci",
    "trib": "tribonacci",
    "smallest_pisot": "smallest-pisot", "plastic": "smallest-pisot",
}

_builtin_cache: dict = {}


def builtin_basis(name: str) -> PisotBasis:
    key = _ALIASES.get(name.lower(), name.lower())
    if key not in _BUILTIN_SPECS:
        raise KeyError(f"unknown basis {name!r}; known: {sorted(_BUILTIN_SPECS)}")
    if key not in _builtin_cache:
        poly, terms = _BUILTIN_SPECS[key]
        _builtin_cache[key] = make_basis(poly, terms, name=key)
    return _builtin_cache[key]


def builtin_names() -> list:
    return sorted(_BUILTIN_SPECS)


# --- basis description files ---------------------------------------------

def parse_basis_file(text: str) -> PisotBasis:
    """Parse a key = value basis description.

    Recognized keys: name, min_poly (constant term first), initial_terms,
    pisot_margin.  Unknown keys are rejected.
    """
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected key = value")
        key = key.strip()
        if key in fields:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value.strip()

    known = {"name", "min_poly", "initial_terms", "pisot_margin"}
    unknown = set(fields) - known
    if unknown:
        raise ValueError(f"unknown keys: {sorted(unknown)}")
    for req in ("min_poly", "initial_terms"):
        if req not in fields:
            raise ValueError(f"missing key {req!r}")

    def int_list(s):
        return [int(p) for p in s.replace(",", " ").split()]

    return make_basis(int_list(fields["min_poly"]),
                      int_list(fields["initial_terms"]),
                      pisot_margin=float(fields.get("pisot_margin", 1e-9)),
                      name=fields.get("name", ""))


def format_basis_file(basis: PisotBasis) -> str:
    lines = []
    if basis.name:
        lines.append(f"name = {basis.name}")
    lines.append("min_poly = " + ", ".join(str(c) for c in basis.min_poly))
    lines.append("initial_terms = " + ", ".join(str(t) for t in basis.initial_terms))
    lines.append(f"pisot_margin = {basis.pisot_margin:g}")
    return "\n".join(lines) + "\n"


def load_basis(spec: str) -> PisotBasis:
    """Resolve a basis by builtin name or description-file path."""
    try:
        return builtin_basis(spec)
    except KeyError:
        pass
    with open(spec, "r", encoding="utf-8") as fh:
        return parse_basis_file(fh.read())
