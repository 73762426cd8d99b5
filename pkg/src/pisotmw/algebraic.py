"""Exact arithmetic in Z[beta].

Elements are integer coefficient vectors of length d = deg(beta),
representing sum_j m_j beta^j, kept reduced modulo the minimal polynomial
after every operation.  Embeddings evaluate the coefficient vector at a
stored root approximation (beta itself or a conjugate).
"""

from __future__ import annotations

from typing import Sequence

import mpmath as mp

from .basis import ROOT_DPS, PisotBasis
from .errors import BasisMismatch


class AlgebraicInt:
    """An element of Z[beta] in canonical (degree < d) form."""

    __slots__ = ("basis", "coeffs", "_hash")

    def __init__(self, basis: PisotBasis, coeffs: Sequence[int]):
        d = basis.degree
        if len(coeffs) != d:
            raise ValueError(f"need {d} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "coeffs", tuple(int(c) for c in coeffs))
        object.__setattr__(self, "_hash", hash(self.coeffs))

    def __setattr__(self, *_):
        raise AttributeError("AlgebraicInt is immutable")

    # -- ring operations --

    def _check(self, other):
        if self.basis is not other.basis and self.basis != other.basis:
            raise BasisMismatch("operands from different bases")

    def __add__(self, other):
        self._check(other)
        return AlgebraicInt(self.basis,
                            [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        return AlgebraicInt(self.basis,
                            [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return AlgebraicInt(self.basis, [-a for a in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, int):
            return AlgebraicInt(self.basis, [a * other for a in self.coeffs])
        self._check(other)
        d = self.basis.degree
        prod = [0] * (2 * d - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] += a * b
        return AlgebraicInt(self.basis, _reduce(self.basis.min_poly, prod))

    __rmul__ = __mul__

    def shift(self) -> "AlgebraicInt":
        """Multiply by beta."""
        return AlgebraicInt(self.basis,
                            _reduce(self.basis.min_poly, (0,) + self.coeffs))

    def shift_add(self, digit: int) -> "AlgebraicInt":
        """beta * self + digit, the Horner step for reading digit words."""
        red = _reduce(self.basis.min_poly, (0,) + self.coeffs)
        return AlgebraicInt(self.basis, (red[0] + digit,) + red[1:])

    def __eq__(self, other):
        if not isinstance(other, AlgebraicInt):
            return NotImplemented
        return self.coeffs == other.coeffs and self.basis == other.basis

    def __hash__(self):
        return self._hash

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __repr__(self):
        return f"AlgebraicInt({self.basis}, {list(self.coeffs)})"


def _reduce(min_poly: tuple, coeffs) -> tuple:
    """Reduce a coefficient list modulo the monic min_poly (beta^d = -lower)."""
    d = len(min_poly) - 1
    work = list(coeffs)
    for i in range(len(work) - 1, d - 1, -1):
        top = work[i]
        if top:
            work[i] = 0
            for j in range(d):
                work[i - d + j] -= top * min_poly[j]
    return tuple(work[:d])


def zero(basis: PisotBasis) -> AlgebraicInt:
    return AlgebraicInt(basis, [0] * basis.degree)


def one(basis: PisotBasis) -> AlgebraicInt:
    return AlgebraicInt(basis, [1] + [0] * (basis.degree - 1))


def beta_element(basis: PisotBasis) -> AlgebraicInt:
    if basis.degree == 1:
        return AlgebraicInt(basis, [-basis.min_poly[0]])
    return AlgebraicInt(basis, [0, 1] + [0] * (basis.degree - 2))


def value_beta(basis: PisotBasis, word: Sequence[int]) -> AlgebraicInt:
    """The Z[beta] value sum_j z_j beta^j with the rightmost digit at
    exponent 0; the empty word gives zero."""
    acc = zero(basis)
    for digit in word:
        acc = acc.shift_add(digit)
    return acc


def embed(basis: PisotBasis, a: AlgebraicInt, i: int = 1):
    """Evaluate a at the i-th root (i = 1 is beta itself), to ~50 digits."""
    if not 1 <= i <= basis.degree:
        raise ValueError(f"root index {i} out of range 1..{basis.degree}")
    root = basis.beta if i == 1 else basis.conjugates[i - 2]
    with mp.workdps(ROOT_DPS):
        acc = mp.mpf(0) if i == 1 else mp.mpc(0)
        for c in reversed(a.coeffs):
            acc = acc * root + c
        return acc


class EmbeddingTable:
    """Float-precision root powers for fast state pruning.

    Pruning bounds carry explicit slack, so float64 accuracy suffices;
    exact decisions (terminality, equality) never use this table.
    """

    def __init__(self, basis: PisotBasis):
        d = basis.degree
        self.degree = d
        roots = [complex(basis.beta)] + [complex(r) for r in basis.conjugates]
        self.powers = [[r ** j for j in range(d)] for r in roots]

    def embed(self, coeffs, i: int) -> complex:
        """Value of the coefficient vector at root i (1-based)."""
        pw = self.powers[i - 1]
        return sum(c * pw[j] for j, c in enumerate(coeffs) if c)
