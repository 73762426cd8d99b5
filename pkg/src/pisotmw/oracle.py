"""Brute-force ground truth for minimal-weight expansions.

Everything here is independent of the automata constructions: minimal
weights and counts come from branch-and-bound / dynamic programming over
raw digit words, and certify the automata built elsewhere.

Two engines cover different scales:

* `MinWeightOracle` — memoized most-significant-first branch and bound,
  exact for single targets of any size (used by find_B up to U_50).
* `dense_min_weights` / `dense_min_counts` — numpy min-plus sweeps over
  the whole representable value range at a fixed word length, for bulk
  range checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebraic import AlgebraicInt, EmbeddingTable, one, value_beta
from .basis import PisotBasis
from .errors import PisotMWError, SearchExhausted, Unrepresentable
from .words import Alphabet, DigitWord, strip_zeros, weight

INF = 1 << 60


class MinWeightOracle:
    """Minimal weight / minimal-weight counts over a fixed alphabet.

    Search runs most-significant-first over positions p = L-1..0; the
    state (p, remainder) is memoized and pruned when the remainder exceeds
    max|digit| * (U_0 + ... + U_p), which no suffix can produce.
    """

    def __init__(self, basis: PisotBasis, alphabet: Alphabet, slack: int = 8):
        self.basis = basis
        self.alphabet = alphabet
        self.slack = slack
        self._digits = sorted(alphabet.digits, key=abs)
        self._W: dict = {}
        self._C: dict = {}

    # -- minimal weight ----------------------------------------------------

    def _min_from(self, p: int, r) -> int:
        if p < 0:
            return 0 if r == 0 else INF
        key = (p, r)
        cached = self._W.get(key)
        if cached is not None:
            return cached
        amax = self.alphabet.max_abs
        if abs(r) > amax * self.basis.term_sums(p + 1)[p]:
            self._W[key] = INF
            return INF
        u = self.basis.term(p)
        best = INF
        for a in self._digits:
            cost = abs(a)
            if cost >= best:
                break  # digits are sorted by |a|
            sub = self._min_from(p - 1, r - a * u)
            if cost + sub < best:
                best = cost + sub
        self._W[key] = best
        return best

    def _stable_top(self, n: int) -> int:
        """Smallest position count at which the minimum has stabilized."""
        length = self.basis.greedy_length(n) + self.slack
        w = self._min_from(length - 1, n)
        while self._min_from(length, n) < w:
            w = self._min_from(length, n)
            length += 1
        return length

    def min_weight(self, n: int) -> int:
        """min sum|z_j| over all U-expansions of n over the alphabet."""
        length = self._stable_top(n)
        w = self._min_from(length - 1, n)
        if w >= INF:
            raise Unrepresentable(f"{n} has no expansion over {self.alphabet}")
        return w

    # -- counting ----------------------------------------------------------

    def _count_at(self, p: int, r) -> int:
        """Number of words on positions 0..p of value r and weight
        _min_from(p, r)."""
        if p < 0:
            return 1 if r == 0 else 0
        key = (p, r)
        cached = self._C.get(key)
        if cached is not None:
            return cached
        w = self._min_from(p, r)
        if w >= INF:
            self._C[key] = 0
            return 0
        u = self.basis.term(p)
        total = 0
        for a in self._digits:
            if abs(a) > w:
                break
            sub_r = r - a * u
            if abs(a) + self._min_from(p - 1, sub_r) == w:
                total += self._count_at(p - 1, sub_r)
        self._C[key] = total
        return total

    def count_fk(self, n: int, k: int) -> int:
        """f_k(n): length-k words of value n whose weight is the global
        minimum (0 when no length-k word achieves it)."""
        if k == 0:
            return 1 if n == 0 else 0
        if self._min_from(k - 1, n) != self.min_weight(n):
            return 0
        return self._count_at(k - 1, n)

    def count_f(self, n: int) -> int:
        """f(n): zero-stripped minimal-weight expansions of n.

        f(0) = 1, counting the empty word.
        """
        if n == 0:
            return 1
        k = self._stable_top(n)
        f = self.count_fk(n, k)
        guard = 0
        while self.count_fk(n, k + 1) != f:
            f = self.count_fk(n, k + 1)
            k += 1
            guard += 1
            if guard > 64:
                raise PisotMWError(f"f_k({n}) failed to stabilize")
        return f

    def enumerate_minimal(self, n: int, k: int) -> set:
        """All length-k minimal-weight expansions of n (the f_k(n) words)."""
        budget = self.min_weight(n)
        out: set = set()
        if k == 0:
            if n == 0:
                out.add(())
            return out

        def rec(p, r, left, prefix):
            if p < 0:
                if r == 0 and left == 0:
                    out.add(tuple(prefix))
                return
            u = self.basis.term(p)
            for a in self._digits:
                if abs(a) > left:
                    break
                if abs(a) + self._min_from(p - 1, r - a * u) <= left:
                    prefix.append(a)
                    rec(p - 1, r - a * u, left - abs(a), prefix)
                    prefix.pop()

        rec(k - 1, n, budget, [])
        return out

    def minimal_words_stripped(self, n: int) -> set:
        """Zero-stripped minimal-weight expansions of n (the f(n) words)."""
        k = self._stable_top(n)
        return {strip_zeros(w) for w in self.enumerate_minimal(n, k)}


# -- B constants of the digit-rewriting inequalities ------------------------

@dataclass(frozen=True)
class BSearchResult:
    b_weak: int        # least B with min_weight(B*U_k) <= B for k <= k_max
    b_strict: int      # least B with min_weight(B*U_k) <  B for k <= k_max
    k_max: int         # search horizon (the properties are checked, not proved)
    witness_weak: int  # k with the largest minimal weight at B = b_weak
    witness_strict: int


def find_B(basis: PisotBasis, k_max: int = 50, b_cap: int = 64) -> BSearchResult:
    """Smallest rewriting constants B for B*U_k, checked up to k_max.

    The candidate witness words are searched over {1-B, ..., B-1}: a word
    of weight <= B automatically has digits in that range, and the digit-B
    carry itself must rewrite into strictly smaller digits for the bound
    to be useful.
    """
    b_weak = b_strict = 0
    wit_weak = wit_strict = -1
    for b in range(1, b_cap + 1):
        if b == 1:
            weights = [INF] * (k_max + 1)  # alphabet {0} represents only 0
        else:
            oracle = MinWeightOracle(basis, Alphabet(1 - b, b - 1))
            weights = []
            for k in range(k_max + 1):
                try:
                    weights.append(oracle.min_weight(b * basis.term(k)))
                except Unrepresentable:
                    weights.append(INF)
        if not b_weak and all(w <= b for w in weights):
            b_weak = b
            wit_weak = max(range(k_max + 1), key=lambda k: weights[k])
        if not b_strict and all(w < b for w in weights):
            b_strict = b
            wit_strict = max(range(k_max + 1), key=lambda k: weights[k])
        if b_weak and b_strict:
            return BSearchResult(b_weak, b_strict, k_max, wit_weak, wit_strict)
    raise SearchExhausted(f"no B <= {b_cap} satisfies the rewriting bounds")


# -- dense numpy sweeps ------------------------------------------------------

DENSE_INF = np.int32(10 ** 9)


def _value_span(basis: PisotBasis, alphabet: Alphabet, k: int):
    s = basis.term_sums(max(k, 1))[k - 1] if k else 0
    return alphabet.lo * s, alphabet.hi * s


def dense_min_weights(basis: PisotBasis, alphabet: Alphabet, k: int):
    """(offset, W): W[v + offset] = min weight of length-k words of value v.

    Covers every representable value; unreachable cells hold DENSE_INF.
    Leading zeros make this the stabilized minimum for |v| well inside
    the range when k exceeds the greedy length by the usual slack.
    """
    lo, hi = _value_span(basis, alphabet, k)
    offset = -lo
    width = hi - lo + 1
    w = np.full(width, DENSE_INF, dtype=np.int32)
    w[offset] = 0
    for j in range(k):
        u = basis.term(j)
        new = np.full(width, DENSE_INF, dtype=np.int32)
        for a in alphabet:
            s = a * u
            src = w[max(0, -s): width + min(0, -s)]
            dst = new[max(0, s): width + min(0, s)]
            np.minimum(dst, src + np.int32(abs(a)), out=dst)
        w = new
    return offset, w


def dense_min_counts(basis: PisotBasis, alphabet: Alphabet, k: int):
    """(offset, W, C): per value, minimal weight over length-k words and
    the number of words achieving it — f_k by exhaustive enumeration,
    compressed but never consulting any automaton."""
    lo, hi = _value_span(basis, alphabet, k)
    offset = -lo
    width = hi - lo + 1
    w = np.full(width, DENSE_INF, dtype=np.int32)
    c = np.zeros(width, dtype=np.int64)
    w[offset] = 0
    c[offset] = 1
    for j in range(k):
        u = basis.term(j)
        new_w = np.full(width, DENSE_INF, dtype=np.int32)
        for a in alphabet:
            s = a * u
            src = w[max(0, -s): width + min(0, -s)]
            dst = new_w[max(0, s): width + min(0, s)]
            np.minimum(dst, src + np.int32(abs(a)), out=dst)
        new_c = np.zeros(width, dtype=np.int64)
        for a in alphabet:
            s = a * u
            src_w = w[max(0, -s): width + min(0, -s)]
            src_c = c[max(0, -s): width + min(0, -s)]
            dst_w = new_w[max(0, s): width + min(0, s)]
            dst_c = new_c[max(0, s): width + min(0, s)]
            match = src_w + np.int32(abs(a)) == dst_w
            dst_c += np.where(match, src_c, 0)
        w, c = new_w, new_c
    return offset, w, c


def dense_f_range(basis: PisotBasis, alphabet: Alphabet, n_hi: int,
                  slack: int = 3):
    """f(n) for all |n| <= n_hi as (offset, counts), via a stabilized
    dense sweep (checked against one extra level)."""
    k = basis.greedy_length(n_hi) + slack
    off1, w1, c1 = dense_min_counts(basis, alphabet, k)
    off2, w2, c2 = dense_min_counts(basis, alphabet, k + 1)
    lo, hi = -n_hi, n_hi
    a = c1[lo + off1: hi + off1 + 1]
    b = c2[lo + off2: hi + off2 + 1]
    if not np.array_equal(a, b):
        raise PisotMWError("dense f(n) sweep did not stabilize; raise slack")
    return -lo, a.copy()


# -- bounded beta-minimality oracle ------------------------------------------

class BetaWeightOracle:
    """Bounded search for the minimal weight of a Z[beta] value.

    Words run over {-max_digit..max_digit} on positions 0..L-1; callers
    shift the target by beta^pad to emulate negative positions.  States
    (position, remainder) are memoized; remainders are pruned with exact
    conjugate/real box bounds plus a small float slack.
    """

    def __init__(self, basis: PisotBasis, max_digit: int):
        self.basis = basis
        self.max_digit = max_digit
        self._emb = EmbeddingTable(basis)
        self._digits = sorted(range(-max_digit, max_digit + 1), key=abs)
        self._W: dict = {}
        # cumulative |root|^j sums per root, grown on demand
        self._mod = [abs(complex(r)) for r in
                     [complex(basis.beta)] + [complex(c) for c in basis.conjugates]]
        self._cums = [[1.0] for _ in self._mod]
        self._powers = [one(basis)]  # beta^0, beta^1, ...

    def _cum(self, i: int, p: int) -> float:
        cums = self._cums[i]
        while len(cums) <= p:
            cums.append(cums[-1] + self._mod[i] ** len(cums))
        return cums[p]

    def _power(self, p: int) -> AlgebraicInt:
        while len(self._powers) <= p:
            self._powers.append(self._powers[-1].shift())
        return self._powers[p]

    def _prunable(self, p: int, r: AlgebraicInt) -> bool:
        for i in range(self.basis.degree):
            bound = self.max_digit * self._cum(i, p)
            if abs(self._emb.embed(r.coeffs, i + 1)) > bound * (1 + 1e-9) + 1e-6:
                return True
        return False

    def _min_from(self, p: int, r: AlgebraicInt) -> int:
        if p < 0:
            return 0 if r.is_zero else INF
        key = (p, r.coeffs)
        cached = self._W.get(key)
        if cached is not None:
            return cached
        if self._prunable(p, r):
            self._W[key] = INF
            return INF
        power = self._power(p)
        best = INF
        for a in self._digits:
            cost = abs(a)
            if cost >= best:
                break
            sub = self._min_from(p - 1, r - a * power)
            if cost + sub < best:
                best = cost + sub
        self._W[key] = best
        return best

    def min_weight_of(self, x: AlgebraicInt, length: int) -> int:
        return self._min_from(length - 1, x)

    def is_minimal_word(self, word: DigitWord, pad: int) -> bool:
        """Whether no equally-valued word over the search window has
        smaller weight: y up to len(word)+pad long, shifts up to pad."""
        x = value_beta(self.basis, word)
        for _ in range(pad):
            x = x.shift()
        best = self.min_weight_of(x, len(word) + 2 * pad)
        return best >= weight(word)


def beta_min_weight(basis: PisotBasis, word: DigitWord, max_digit: int,
                    pad: int) -> int:
    """One-shot bounded beta-minimal weight of a word's value."""
    oracle = BetaWeightOracle(basis, max_digit)
    x = value_beta(basis, word)
    for _ in range(pad):
        x = x.shift()
    return oracle.min_weight_of(x, len(word) + 2 * pad)
