"""Quantitative layer: eigenvalues, growth exponents, measures,
characteristic functions, summatory asymptotics, joint spectral radius,
and exact per-length maxima of representation counts.

Everything consumes automata and matrices built elsewhere; exact counting
uses integer matrices / numpy int64 sweeps, spectral quantities use exact
characteristic polynomials with 50+ digit root finding (sympy + mpmath).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath as mp
import numpy as np
import sympy

from .automata import Automaton, mat_pow, mat_sum, vec_mat
from .basis import ROOT_DPS, PisotBasis, value_U
from .errors import (DepthTooLarge, DiagnosticFailed, DimensionMismatch,
                     DomainError, NotUniqueDominant, PisotMWError,
                     PrimitivityMissing)
from .words import Alphabet, DigitWord

CELL_BUDGET = 120_000_000  # dense value-sweep size cap (int64 cells)


# --------------------------------------------------------------------------
# eigenvalues
# --------------------------------------------------------------------------

def dominant_eigs(matrix: Sequence[Sequence[int]],
                  rel_gap: float = 1e-9) -> tuple:
    """(alpha, |alpha_2|) of a nonnegative integer matrix, ~50 digits.

    alpha must be real positive, simple, and strictly dominant; the
    characteristic polynomial is computed exactly (Berkowitz) and its
    roots to high precision.
    """
    n = len(matrix)
    if n == 0 or any(len(row) != n for row in matrix):
        raise DimensionMismatch("dominant_eigs needs a square matrix")
    poly = sympy.Matrix(matrix).charpoly()
    coeffs = [int(c) for c in poly.all_coeffs()]
    with mp.workdps(ROOT_DPS):
        roots = mp.polyroots([mp.mpf(c) for c in coeffs],
                             maxsteps=300, extraprec=300)
        roots = sorted(roots, key=lambda r: -abs(r))
        alpha = roots[0]
        if abs(mp.im(alpha)) > mp.mpf(10) ** (-(ROOT_DPS - 15)):
            raise NotUniqueDominant("dominant eigenvalue is not real")
        alpha = mp.re(alpha)
        if alpha <= 0:
            raise NotUniqueDominant("dominant eigenvalue is not positive")
        if len(roots) == 1:
            return alpha, mp.mpf(0)
        second = abs(roots[1])
        if second >= alpha * (1 - rel_gap):
            raise NotUniqueDominant(
                f"second eigenvalue modulus {mp.nstr(second, 12)} too close "
                f"to alpha {mp.nstr(alpha, 12)}")
        return alpha, second


def total_counts(aut: Automaton, k_max: int) -> list:
    """M_k = v1 A^k v2 for k = 0..k_max, exact."""
    vec = aut.initial_vector()
    term = aut.terminal_vector()
    mat = aut.adjacency()
    out = []
    for _ in range(k_max + 1):
        out.append(sum(v * t for v, t in zip(vec, term)))
        vec = vec_mat(vec, mat)
    return out


# --------------------------------------------------------------------------
# dense value sweeps (exact f_k for every value at once)
# --------------------------------------------------------------------------

def count_values(basis: PisotBasis, aut: Automaton, k: int,
                 strip_leading_zero: bool = False,
                 cell_budget: int = CELL_BUDGET):
    """(offset, counts): counts[v + offset] = number of accepted length-k
    words of U-value v (f_k(v) when aut recognizes L_U).

    Deterministic automata only (path counts equal word counts).  With
    strip_leading_zero, the first digit must be nonzero.
    """
    if not aut.deterministic:
        raise PisotMWError("count_values needs a deterministic automaton")
    digits = [l for l in aut.labels]
    lo_d, hi_d = min(digits), max(digits)
    s = basis.term_sums(max(k, 1))[k - 1] if k else 0
    lo, hi = lo_d * s, hi_d * s
    width = hi - lo + 1
    offset = -lo
    n = aut.n_states
    if width * n > cell_budget:
        raise DepthTooLarge(
            f"value sweep needs {width * n} cells (budget {cell_budget})")
    cur = np.zeros((n, width), dtype=np.int64)
    start = next(iter(aut.initial))
    cur[start, offset] = 1
    nxt = np.zeros_like(cur)
    edges = sorted(aut.edges)
    for pos in range(k - 1, -1, -1):
        u = basis.term(pos)
        first = pos == k - 1
        nxt.fill(0)
        for q, a, r in edges:
            if strip_leading_zero and first and a == 0:
                continue
            shift = a * u
            src = cur[q, max(0, -shift): width + min(0, -shift)]
            dst = nxt[r, max(0, shift): width + min(0, shift)]
            dst += src
        cur, nxt = nxt, cur
    counts = np.zeros(width, dtype=np.int64)
    for t in aut.terminal:
        counts += cur[t]
    return offset, counts


# --------------------------------------------------------------------------
# growth exponents
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaResult:
    gamma: float
    ell: int
    k1: int
    k2: int
    k3: int


def gamma_upper(basis: PisotBasis, alphabet: Alphabet,
                lbeta: Automaton, max_bump: int = 50) -> GammaResult:
    """The upper growth bound gamma < alpha for per-value counts in
    L_beta, via the entrywise-reduced power matrix.

    l = k1 + k2 + k3 + 1 with k1 the synchronizing zero-run, k2 the
    1-0^k2 loop at the initial state, k3 the eccentricity; (k1, k2) are
    bumped until the value-equality pair automaton carries no path
    labelled (0^k1 1 0^k2, 0^(k1+1+k2)); gamma = rho(A^l - J)^(1/l).
    """
    init = next(iter(lbeta.initial))
    k1 = _synchronizing_run(lbeta, init)
    if k1 is None:
        raise PrimitivityMissing("zero runs do not synchronize L_beta")
    k2 = _one_zero_loop(lbeta, init)
    if k2 is None:
        raise PrimitivityMissing("no 1 0^k loop at the initial state")
    k3 = _eccentricity(lbeta, init)

    states = _pair_value_states(basis, alphabet)
    for _ in range(max_bump):
        if not _pair_path_exists(basis, states, k1, k2):
            break
        k1 += 1
        k2 += 1
    else:
        raise PisotMWError("could not eliminate the ambiguous pair path")

    ell = k1 + k2 + k3 + 1
    power = mat_pow(lbeta.adjacency(), ell)
    if min(min(row) for row in power) < 2:
        raise DiagnosticFailed(
            f"A_beta^{ell} has an entry < 2; construction of l is broken")
    reduced = [[v - 1 for v in row] for row in power]
    gtilde, _ = dominant_eigs(reduced)
    with mp.workdps(ROOT_DPS):
        gamma = float(mp.power(gtilde, mp.mpf(1) / ell))
    return GammaResult(gamma, ell, k1, k2, k3)


def _synchronizing_run(aut: Automaton, init: int) -> Optional[int]:
    cur = frozenset(range(aut.n_states))
    target = frozenset([init])
    for k in range(aut.n_states * aut.n_states + 2):
        if cur == target:
            return k
        cur = aut.step(cur, 0)
        if not cur:
            return None
    return None


def _one_zero_loop(aut: Automaton, init: int) -> Optional[int]:
    tgt = aut._delta.get((init, 1))
    if not tgt:
        return None
    q = next(iter(tgt))
    for k2 in range(aut.n_states + 1):
        if q == init:
            return k2
        nxt = aut._delta.get((q, 0))
        if not nxt:
            return None
        q = next(iter(nxt))
    return None


def _eccentricity(aut: Automaton, init: int) -> int:
    from collections import deque
    dist = {init: 0}
    queue = deque([init])
    while queue:
        q = queue.popleft()
        for _l, r in aut.successors(q):
            if r not in dist:
                dist[r] = dist[q] + 1
                queue.append(r)
    return max(dist.values())


def _pair_value_states(basis: PisotBasis, alphabet: Alphabet):
    """Trim state set of the beta value-equality pair automaton
    (initial and terminal value 0), as reduced coefficient tuples."""
    from collections import deque

    from .constructions import StateBounds, _shift_add
    bounds = StateBounds(basis, 2 * alphabet.max_abs, zero_terminal=True)
    mp_low = basis.min_poly[:-1]
    zero = (0,) * basis.degree
    fwd = {zero: set()}
    queue = deque([zero])
    while queue:
        s = queue.popleft()
        for a in alphabet:
            for b in alphabet:
                s2 = _shift_add(mp_low, s, b - a)
                if not bounds.admits(s2):
                    continue
                if s2 not in fwd:
                    fwd[s2] = set()
                    queue.append(s2)
                fwd[s].add(s2)
    rev: dict = {s: set() for s in fwd}
    for s, outs in fwd.items():
        for r in outs:
            rev[r].add(s)
    co = {zero}
    queue = deque([zero])
    while queue:
        s = queue.popleft()
        for p in rev[s]:
            if p not in co:
                co.add(p)
                queue.append(p)
    return {s for s in fwd if s in co}


def _pair_path_exists(basis: PisotBasis, states: set, k1: int, k2: int) -> bool:
    """Whether some state of the pair automaton carries a run labelled
    (0^k1 1 0^k2, 0^(k1+1+k2)); the run must stay inside the trim set."""
    from .constructions import _shift_add
    mp_low = basis.min_poly[:-1]
    labels = [0] * k1 + [-1] + [0] * k2   # b - a per step
    for start in states:
        s = start
        alive = True
        for e in labels:
            s = _shift_add(mp_low, s, e)
            if s not in states:
                alive = False
                break
        if alive:
            return True
    return False


@dataclass(frozen=True)
class Exponents:
    eta: float
    theta: float
    zeta: float
    lam: float


def exponents(alpha: float, alpha2_modulus: float, beta: float,
              gamma: float, epsilon: float) -> Exponents:
    """Closed-form convergence/dimension exponents.

    eta = (log a - log(|a2|+eps)) / (log b + log a - log(|a2|+eps)),
    theta = (log a - log g)/log b, zeta = 2*theta*eta/(eta*(theta+2)+2*theta),
    lambda = log_b a - zeta.
    """
    import math
    if not (beta > 1):
        raise DomainError("beta must exceed 1")
    if not (alpha > alpha2_modulus + epsilon > 0):
        raise DomainError("need alpha > |alpha_2| + epsilon > 0")
    if not (0 < gamma < alpha):
        raise DomainError("need 0 < gamma < alpha")
    la, lb = math.log(alpha), math.log(beta)
    l2 = math.log(alpha2_modulus + epsilon)
    eta = (la - l2) / (lb + la - l2)
    theta = (la - math.log(gamma)) / lb
    zeta = 2 * theta * eta / (eta * (theta + 2) + 2 * theta)
    lam = la / lb - zeta
    return Exponents(eta, theta, zeta, lam)


# --------------------------------------------------------------------------
# characteristic functions and measures
# --------------------------------------------------------------------------

def characteristic_function(basis: PisotBasis, lu: Automaton, k: int,
                            t: float, dps: int = 50) -> complex:
    """hat(nu)_k(t) = v1 A(t/beta) A(t/beta^2) ... A(t/beta^k) v2 / M_k
    with A(x) = sum_a e(a x) A_a and e(x) = exp(2 pi i x)."""
    mats = {a: lu.adjacency(a) for a in lu.labels}
    n = lu.n_states
    with mp.workdps(dps + 10):
        beta = mp.mpf(basis.beta)
        vec = [mp.mpc(x) for x in lu.initial_vector()]
        for j in range(1, k + 1):
            x = mp.mpf(t) / beta ** j
            phases = {a: mp.expjpi(2 * a * x) for a in mats}
            new = [mp.mpc(0)] * n
            for q in range(n):
                if vec[q] == 0:
                    continue
                vq = vec[q]
                for a, mat in mats.items():
                    row = mat[q]
                    ph = phases[a] * vq
                    for r in range(n):
                        if row[r]:
                            new[r] += ph * row[r]
            vec = new
        total = mp.fsum([vec[q] for q in lu.terminal])
        m_k = total_counts(lu, k)[k]
        return complex(total / m_k)


@dataclass
class MeasureHistogram:
    k: int
    bin_edges: np.ndarray  # length bins+1
    masses: np.ndarray     # length bins, sums to 1

    def total_mass(self) -> float:
        return float(self.masses.sum())


def empirical_measure(basis: PisotBasis, lu: Automaton, k: int,
                      bins: int = 256, k_cap: int = 24) -> MeasureHistogram:
    """Histogram of mu_k = (1/M_k) sum f_k(n) delta_{n/U_k} over the
    support interval [min digit, max digit]/(beta-1)."""
    if k > k_cap:
        raise DepthTooLarge(f"measure depth {k} exceeds cap {k_cap}")
    offset, counts = count_values(basis, lu, k)
    beta = float(basis.beta)
    digits = list(lu.labels)
    lo = min(digits) / (beta - 1)
    hi = max(digits) / (beta - 1)
    u_k = float(basis.term(k))
    nz = np.nonzero(counts)[0]
    points = (nz - offset) / u_k
    weights = counts[nz].astype(np.float64)
    masses, edges = np.histogram(points, bins=bins, range=(lo, hi),
                                 weights=weights)
    total = weights.sum()
    return MeasureHistogram(k, edges, masses / total)


def measure_interval_mass(basis: PisotBasis, lu: Automaton, k: int,
                          lo: float, hi: float) -> float:
    """mu_k([lo, hi]) exactly from the value sweep."""
    offset, counts = count_values(basis, lu, k)
    u_k = float(basis.term(k))
    idx = np.arange(len(counts)) - offset
    points = idx / u_k
    mask = (points >= lo) & (points <= hi)
    return float(counts[mask].sum()) / float(counts.sum())


def self_similarity_check(basis: PisotBasis, lu: Automaton, k: int,
                          interval: tuple) -> dict:
    """Compare alpha * mu_k(beta^-1 A) against mu_k(A)."""
    lo, hi = interval
    alpha, _ = dominant_eigs(lu.adjacency())
    beta = float(basis.beta)
    m_a = measure_interval_mass(basis, lu, k, lo, hi)
    m_scaled = measure_interval_mass(basis, lu, k, lo / beta, hi / beta)
    ratio = float(alpha) * m_scaled / m_a if m_a else float("nan")
    return {"k": k, "interval": [lo, hi], "mass": m_a,
            "scaled_mass": m_scaled, "alpha_times_scaled": float(alpha) * m_scaled,
            "relative_deviation": abs(ratio - 1.0) if m_a else float("nan")}


# --------------------------------------------------------------------------
# summatory function
# --------------------------------------------------------------------------

def summatory(basis: PisotBasis, lu: Automaton, slack: int, n_limit: int,
              alpha: Optional[float] = None):
    """(S, ratio): S = sum_{|n|<N} f(n), ratio = S / N^(log_beta alpha).

    f is read from the stabilized length-k value sweep with
    k = greedy_length(N-1) + slack + 1.
    """
    values = summatory_profile(basis, lu, slack, [n_limit], alpha=alpha)
    return values[0][1], values[0][2]


def summatory_profile(basis: PisotBasis, lu: Automaton, slack: int,
                      n_limits: Sequence[int],
                      alpha: Optional[float] = None) -> list:
    """[(N, S(N), ratio)] for several N from one shared value sweep."""
    import math
    if alpha is None:
        a, _ = dominant_eigs(lu.adjacency())
        alpha = float(a)
    n_max = max(n_limits)
    k = basis.greedy_length(max(n_max - 1, 1)) + slack + 1
    offset, counts = count_values(basis, lu, k)
    csum = np.concatenate([[0], np.cumsum(counts)])
    exponent = math.log(alpha) / math.log(float(basis.beta))
    out = []
    for n_limit in n_limits:
        lo, hi = -(n_limit - 1), n_limit - 1
        s = int(csum[hi + offset + 1] - csum[lo + offset])
        out.append((n_limit, s, s / n_limit ** exponent))
    return out


# --------------------------------------------------------------------------
# joint spectral radius
# --------------------------------------------------------------------------

def jsr_estimate(matrices: Sequence, depth: int) -> tuple:
    """(lower, upper) bracketing the joint spectral radius.

    lower = max over products P of length l <= depth of rho(P)^(1/l);
    upper = min over l <= depth of max_P ||P||_inf^(1/l) (valid by
    submultiplicativity).  The product tree is pruned by entrywise
    domination, which preserves both maxima.
    """
    mats = [tuple(tuple(int(v) for v in row) for row in m) for m in matrices]
    if not mats:
        raise DimensionMismatch("empty matrix set")
    n = len(mats[0])
    if any(len(m) != n or any(len(r) != n for r in m) for m in mats):
        raise DimensionMismatch("matrices must be square and equally sized")

    def rho(mat) -> float:
        arr = np.array(mat, dtype=np.float64)
        if not arr.any():
            return 0.0
        return float(max(abs(np.linalg.eigvals(arr))))

    def norm_inf(mat) -> float:
        return float(max(sum(row) for row in mat))

    def prune(frontier):
        keep = []
        seen = set()
        for m in frontier:
            if m in seen or not any(any(row) for row in m):
                continue
            seen.add(m)
            keep.append(m)
        dominated = [False] * len(keep)
        for i, a in enumerate(keep):
            if dominated[i]:
                continue
            for j, b in enumerate(keep):
                if i != j and not dominated[j]:
                    if all(b[r][c] <= a[r][c] for r in range(n)
                           for c in range(n)):
                        dominated[j] = True
        return [m for m, d in zip(keep, dominated) if not d]

    def matmul(a, b):
        return tuple(tuple(sum(a[i][t] * b[t][j] for t in range(n))
                           for j in range(n)) for i in range(n))

    lower = 0.0
    upper = float("inf")
    frontier = prune(mats)
    length = 1
    while length <= depth:
        if frontier:
            lower = max([lower] + [rho(m) ** (1.0 / length) for m in frontier])
            upper = min(upper,
                        max(norm_inf(m) for m in frontier) ** (1.0 / length))
        else:
            upper = 0.0
            break
        length += 1
        if length > depth:
            break
        frontier = prune([matmul(p, m) for p in frontier for m in mats])
    return lower, upper


# --------------------------------------------------------------------------
# exact representation counts from the normalizer
# --------------------------------------------------------------------------

def output_matrices(normalizer: Automaton) -> dict:
    """R_a = adjacency of transitions with output digit a."""
    digits = sorted({l[1] for l in normalizer.labels})
    return {a: normalizer.component_adjacency("output", a) for a in digits}


def gu_representative(basis: PisotBasis, gu: Automaton, slack: int,
                      n: int) -> DigitWord:
    """The zero-stripped G_U word of value n (empty word for 0)."""
    if n == 0:
        return ()
    start_len = max(basis.greedy_length(abs(n)), 1)
    sums = basis.term_sums(start_len + slack + 1)
    init = next(iter(gu.initial))
    for length in range(start_len, start_len + slack + 1):
        terms = basis.terms(length)
        dead = set()

        def search(state, pos, remainder):
            # pos counts down; digits placed most-significant first
            if pos < 0:
                return () if remainder == 0 and state in gu.terminal else None
            key = (state, pos, remainder)
            if key in dead:
                return None
            if abs(remainder) > gu_max_abs * sums[pos]:
                dead.add(key)
                return None
            for a, r in gu.successors(state):
                if pos == length - 1 and a == 0:
                    continue
                sub = search(r, pos - 1, remainder - a * terms[pos])
                if sub is not None:
                    return (a,) + sub
            dead.add(key)
            return None

        gu_max_abs = max(abs(l) for l in gu.labels)
        found = search(init, length - 1, n)
        if found is not None:
            return found
    raise PisotMWError(f"no G_U representative found for {n}")


def representation_count(basis: PisotBasis, normalizer: Automaton,
                         gu: Automaton, slack: int, n: int) -> int:
    """f(n) as the number of successful normalizer paths whose output is
    the stripped G_U word of n."""
    word = gu_representative(basis, gu, slack, n)
    mats = output_matrices(normalizer)
    vec = normalizer.initial_vector()
    for digit in word:
        vec = vec_mat(vec, mats[digit])
    term = normalizer.terminal_vector()
    return sum(v * t for v, t in zip(vec, term))


def max_fk(basis: PisotBasis, normalizer: Automaton, slack: int, k: int,
           k_cap: int = 64, frontier_cap: int = 200_000) -> tuple:
    """(value, witness_n): the largest f_k(n) over all integers, via
    chains of output-digit matrices applied to the start vectors.

    Start vectors cover greedy representatives up to `slack` digits longer
    than k: indicator vectors of the states reached from the initial state
    by zero-input paths whose output starts with a nonzero digit.
    """
    if k > k_cap:
        raise DepthTooLarge(f"max_fk depth {k} exceeds cap {k_cap}")
    digits = sorted({l[1] for l in normalizer.labels})
    mats = output_matrices(normalizer)
    n_states = normalizer.n_states
    w = normalizer.terminal_vector()

    # start vectors: (tops, vector); tops is the extra output prefix
    init_vec = tuple(normalizer.initial_vector())
    starts = [((), init_vec)]
    level = [((), init_vec)]
    for _t in range(slack):
        new_level = []
        for tops, vec in level:
            for b in digits:
                if not tops and b == 0:
                    continue
                nxt = [0] * n_states
                for q, val in enumerate(vec):
                    if val:
                        for (a, bb), r in _pair_successors(normalizer, q):
                            if a == 0 and bb == b:
                                nxt[r] = 1
                if any(nxt):
                    entry = (tops + (b,), tuple(nxt))
                    new_level.append(entry)
        starts.extend(new_level)
        level = new_level

    frontier = {}
    for tops, vec in starts:
        if vec not in frontier:
            frontier[vec] = (tops, ())
    for _step in range(k):
        new = {}
        for vec, (tops, low) in frontier.items():
            for b in digits:
                nvec = tuple(vec_mat(list(vec), mats[b]))
                if not any(nvec):
                    continue
                if nvec not in new:
                    new[nvec] = (tops, low + (b,))
        if len(new) > frontier_cap:
            raise DepthTooLarge("max_fk frontier exploded")
        frontier = _prune_dominated(new)
    best, witness = 0, 0
    for vec, (tops, low) in frontier.items():
        total = sum(v * t for v, t in zip(vec, w))
        if total > best:
            best = total
            witness = value_U(basis, tops + low)
    return best, witness


def _pair_successors(aut: Automaton, q: int):
    return aut.successors(q)


def _prune_dominated(frontier: dict) -> dict:
    items = list(frontier.items())
    n = len(items)
    keep = [True] * n
    for i in range(n):
        if not keep[i]:
            continue
        vi = items[i][0]
        for j in range(n):
            if i != j and keep[j]:
                vj = items[j][0]
                if all(a <= b for a, b in zip(vj, vi)):
                    keep[j] = False
    return {v: w for (v, w), k in zip(items, keep) if k}


# --------------------------------------------------------------------------
# consolidated report
# --------------------------------------------------------------------------

@dataclass
class SpectralReport:
    basis: str
    alphabet: str
    alpha: float
    alpha2_modulus: float
    gamma: float
    ell: int
    epsilon: float
    eta: float
    theta: float
    zeta: float
    lam: float

    def validate(self):
        ok = (1 < self.alpha and self.alpha2_modulus < self.alpha
              and 0 < self.gamma < self.alpha and 0 < self.eta < 1
              and self.theta > 0 and self.zeta > 0)
        if not ok:
            raise DomainError("spectral report violates its invariants")
        return self

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def spectral_report(basis: PisotBasis, alphabet: Alphabet, lu: Automaton,
                    lbeta: Automaton,
                    epsilon_fraction: float = 0.05) -> SpectralReport:
    """alpha, gamma and the derived exponents for one basis/alphabet.

    epsilon defaults to 0.05 (alpha - |alpha_2|), echoed in the report.
    """
    alpha, alpha2 = dominant_eigs(lu.adjacency())
    alpha, alpha2 = float(alpha), float(alpha2)
    g = gamma_upper(basis, alphabet, lbeta)
    eps = epsilon_fraction * (alpha - alpha2)
    ex = exponents(alpha, alpha2, float(basis.beta), g.gamma, eps)
    return SpectralReport(
        basis=str(basis), alphabet=str(alphabet), alpha=alpha,
        alpha2_modulus=alpha2, gamma=g.gamma, ell=g.ell, epsilon=eps,
        eta=ex.eta, theta=ex.theta, zeta=ex.zeta, lam=ex.lam).validate()
