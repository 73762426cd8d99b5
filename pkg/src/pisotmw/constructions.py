"""The minimal-weight automata: zero automaton, L_beta, L_U, G_U, the
normalizing transducer, length slack, and structural diagnostics.

All constructions explore Z[beta]-valued state spaces pruned by conjugate
and real embedding boxes, decide terminality by exact integer linear
conditions on the base sequence, and are certified against the
brute-force oracle; certification failures widen the caps and retry, and
persistent failure raises instead of returning an uncertified automaton.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import mpmath as mp

from .automata import Automaton, determinize_minimize
from .basis import ROOT_DPS, PisotBasis, value_U
from .errors import (CertificationFailed, DiagnosticFailed, PisotMWError,
                     StateExplosion)
from .oracle import BetaWeightOracle, MinWeightOracle, find_B
from .words import Alphabet, all_words, weight

MAX_STATES = 400_000


def _shift_add(mp_low: tuple, coeffs: tuple, e: int) -> tuple:
    """beta * (coeff vector) + e, reduced modulo the monic minimal
    polynomial whose sub-leading coefficients are mp_low."""
    top = coeffs[-1]
    if top:
        new = [e - top * mp_low[0]]
        for j in range(1, len(coeffs)):
            new.append(coeffs[j - 1] - top * mp_low[j])
    else:
        new = [e]
        new.extend(coeffs[:-1])
    return tuple(new)


class StateBounds:
    """Embedding boxes that confine useful construction states.

    Conjugate bound: any prefix value satisfies |sigma_i(s)| <=
    dmax/(1-|beta_i|).  Real bound: states on accepting paths satisfy
    |sigma_1(s)| <= M + dmax/(beta-1), where M bounds the real embedding
    of terminal values via the linear terminal condition and the
    c_i-expansion of the base sequence.  dmax is the largest per-step
    digit (or digit difference).
    """

    def __init__(self, basis: PisotBasis, dmax: int, zero_terminal: bool = False):
        self.basis = basis
        self.dmax = dmax
        d = basis.degree
        roots = [complex(basis.beta)] + [complex(c) for c in basis.conjugates]
        self.root_powers = [[r ** j for j in range(d)] for r in roots]
        beta = float(basis.beta)
        self.conj_bounds = [dmax / (1.0 - abs(r)) for r in roots[1:]]
        if zero_terminal:
            m_real = 0.0
        else:
            cs = _sequence_constants(basis)
            low_terms = sum(basis.terms(basis.h)) if basis.h else 0
            m_real = (sum(abs(c) * cb for c, cb in zip(cs[1:], self.conj_bounds))
                      + dmax * low_terms) / cs[0].real
        self.real_bound = m_real + dmax / (beta - 1.0)

    def admits(self, coeffs: tuple) -> bool:
        pw = self.root_powers
        val = sum(c * pw[0][j].real for j, c in enumerate(coeffs) if c)
        if abs(val) > self.real_bound * (1 + 1e-9) + 1e-6:
            return False
        for i, bound in enumerate(self.conj_bounds, start=1):
            z = sum(c * pw[i][j] for j, c in enumerate(coeffs) if c)
            if abs(z) > bound * (1 + 1e-9) + 1e-6:
                return False
        return True


def _sequence_constants(basis: PisotBasis):
    """Constants c_i with U_{h+k} = sum_i c_i beta_i^k (all k >= 0)."""
    d = basis.degree
    with mp.workdps(ROOT_DPS):
        roots = [mp.mpc(basis.beta)] + [mp.mpc(c) for c in basis.conjugates]
        mat = mp.matrix(d, d)
        rhs = mp.matrix(d, 1)
        for k in range(d):
            rhs[k] = basis.term(basis.h + k)
            for i in range(d):
                mat[k, i] = roots[i] ** k
        sol = mp.lu_solve(mat, rhs)
        return [complex(sol[i]) for i in range(d)]


def _terminal_total(basis: PisotBasis, coeffs: tuple, buf: tuple):
    """sum_j m_j U_{h+j} + sum over buffered positions, exact."""
    h = basis.h
    total = sum(m * basis.term(h + j) for j, m in enumerate(coeffs) if m)
    for idx, digit in enumerate(buf):  # buf[0] sits at position h-1
        if digit:
            total += digit * basis.term(h - 1 - idx)
    return total


# --------------------------------------------------------------------------
# zero automaton
# --------------------------------------------------------------------------

def build_zero_automaton(basis: PisotBasis, alphabet: Alphabet,
                         max_states: int = MAX_STATES) -> Automaton:
    """Deterministic trim automaton for {z over alphabet : z ~_U 0}.

    States are (reduced high-part value, last h digits); a digit shifts
    the oldest buffered digit into the Z[beta] part.  Terminal states are
    exactly those whose completed integer value is zero.
    """
    bounds = StateBounds(basis, alphabet.max_abs)
    mp_low = basis.min_poly[:-1]
    h, d = basis.h, basis.degree
    zero = (0,) * d
    init = (zero, (0,) * h)
    index = {init: 0}
    order = [init]
    edges = []
    queue = deque([init])
    while queue:
        s, buf = state = queue.popleft()
        q = index[state]
        for a in alphabet:
            if h:
                s2 = _shift_add(mp_low, s, buf[0])
                buf2 = buf[1:] + (a,)
            else:
                s2 = _shift_add(mp_low, s, a)
                buf2 = buf
            if not bounds.admits(s2):
                continue
            nxt = (s2, buf2)
            if nxt not in index:
                if len(index) >= max_states:
                    raise StateExplosion("zero automaton exceeded state budget")
                index[nxt] = len(order)
                order.append(nxt)
                queue.append(nxt)
            edges.append((q, a, index[nxt]))
    terminal = [i for i, (s, buf) in enumerate(order)
                if _terminal_total(basis, s, buf) == 0]
    raw = Automaton(alphabet.digits, len(order), edges, [0], terminal)
    return raw.minimize()


# --------------------------------------------------------------------------
# construction parameters and certification reports
# --------------------------------------------------------------------------

@dataclass
class BuildParams:
    delta_cap: int = 12
    pad: Optional[int] = None          # default h + 4
    k_cert_beta: int = 10
    k_cert_u: int = 12
    widen_rounds: int = 4
    max_states: int = MAX_STATES

    def pad_for(self, basis: PisotBasis) -> int:
        return self.pad if self.pad is not None else basis.h + 4


@dataclass
class Certification:
    construction: str
    k_cert: int
    delta_cap: int
    pad: int
    status: str                     # "certified" | "failed"
    counterexample: Optional[str] = None
    rounds: int = 1

    def to_json(self) -> str:
        payload = {"construction": self.construction, "k_cert": self.k_cert,
                   "delta_cap": self.delta_cap, "pad": self.pad,
                   "status": self.status, "rounds": self.rounds}
        if self.counterexample is not None:
            payload["counterexample"] = self.counterexample
        return json.dumps(payload)


# --------------------------------------------------------------------------
# L_beta: minimal-weight beta-expansions
# --------------------------------------------------------------------------

def _reducer_graph_beta(basis: PisotBasis, in_alphabet: Alphabet,
                        wit_alphabet: Alphabet, max_states: int):
    """Reachable weight-reducer value graph over beta, delta-free.

    Group states are reduced Z[beta] values s of output-minus-input; the
    weight difference lives in the scanning determinizer, which only ever
    needs the minimum per group.  Transitions carry the per-step weight
    increment |b| - |a|, minimized per (s, a, s').
    """
    dmax = in_alphabet.max_abs + wit_alphabet.max_abs
    bounds = StateBounds(basis, dmax, zero_terminal=True)
    mp_low = basis.min_poly[:-1]
    zero = (0,) * basis.degree
    index = {zero: 0}
    order = [zero]
    trans: dict = {}
    queue = deque([zero])
    while queue:
        s = queue.popleft()
        q = index[s]
        for a in in_alphabet:
            best: dict = {}
            for b in wit_alphabet:
                s2 = _shift_add(mp_low, s, b - a)
                if not bounds.admits(s2):
                    continue
                if s2 not in index:
                    if len(index) >= max_states:
                        raise StateExplosion("beta reducer exceeded state budget")
                    index[s2] = len(order)
                    order.append(s2)
                    queue.append(s2)
                r = index[s2]
                inc = abs(b) - abs(a)
                if best.get(r, inc + 1) > inc:
                    best[r] = inc
            if best:
                trans[q, a] = tuple(best.items())
    return order, trans


def _accept_thresholds_beta(order, trans, zero_id: int) -> dict:
    """g(s): largest starting weight difference from which a virtual
    zero-input tail reaches value 0 with final difference < 0.

    Tail increments are |b| >= 0, so g <= -1 and the fixpoint iteration
    terminates; states without such a tail are absent.
    """
    g = {zero_id: -1}
    changed = True
    while changed:
        changed = False
        for (q, a), targets in trans.items():
            if a != 0:
                continue
            for r, inc in targets:
                if r in g:
                    cand = g[r] - inc
                    if g.get(q, cand - 1) < cand:
                        g[q] = cand
                        changed = True
    return g


def _injection_minima(trans, start_id: int, delta_cap: int) -> dict:
    """Minimal weight difference reachable per group along zero-input
    paths from the start (leading-zero padding); nonnegative increments."""
    best = {start_id: 0}
    queue = deque([start_id])
    while queue:
        q = queue.popleft()
        for r, inc in trans.get((q, 0), ()):
            cand = best[q] + inc
            if cand > delta_cap:
                continue
            if best.get(r, cand + 1) > cand:
                best[r] = cand
                queue.append(r)
    return best


def _pair_zero_input_closure(out, seeds):
    """Forward closure of seed ids along input-0 pair transitions, on
    graphs shaped as out[q] = [((a, b), r), ...]."""
    seen = set(seeds)
    queue = deque(seeds)
    while queue:
        q = queue.popleft()
        for (a, _b), r in out[q]:
            if a == 0 and r not in seen:
                seen.add(r)
                queue.append(r)
    return seen


_SCAN_ALL = "ALL"


def _min_delta_dfa(n_groups: int, trans: dict, labels, inject: dict,
                   thresholds: dict, delta_cap: int, scan: bool,
                   max_states: int = MAX_STATES) -> Automaton:
    """Determinize a reducer run-set with per-group minimal weight
    differences.

    Runs at the same group with smaller delta dominate (their accepting
    continuations are a superset), so a subset is a map group -> min
    delta.  Deltas clamp at -delta_cap (sound for acceptance) and prune
    above +delta_cap (missing reductions are caught by certification).
    With scan=True the automaton recognizes Sigma* Red Sigma*: injection
    states enter before every symbol and acceptance is absorbing.
    """

    def accepting(runs) -> bool:
        return any(d <= thresholds.get(g, -(1 << 30)) for g, d in runs)

    def advance(runs, label):
        merged = dict(runs)
        if scan:
            for g, d in inject.items():
                if merged.get(g, d + 1) > d:
                    merged[g] = d
        new: dict = {}
        for g, d in merged.items():
            for g2, inc in trans.get((g, label), ()):
                d2 = d + inc
                if d2 > delta_cap:
                    continue
                if d2 < -delta_cap:
                    d2 = -delta_cap
                if new.get(g2, d2 + 1) > d2:
                    new[g2] = d2
        return tuple(sorted(new.items()))

    start = () if scan else tuple(sorted(inject.items()))
    index = {start: 0}
    order = [start]
    edges = []
    terminal = set()
    if not scan and accepting(start):
        terminal.add(0)
    queue = deque([start])
    while queue:
        runs = queue.popleft()
        q = index[runs]
        for label in labels:
            if runs == _SCAN_ALL:
                nxt = _SCAN_ALL
            else:
                nxt = advance(runs, label)
                if scan and accepting(nxt):
                    nxt = _SCAN_ALL
            if nxt not in index:
                if len(index) >= max_states:
                    raise StateExplosion("reducer determinization exceeded budget")
                index[nxt] = len(order)
                order.append(nxt)
                queue.append(nxt)
                if nxt == _SCAN_ALL or (not scan and accepting(nxt)):
                    terminal.add(index[nxt])
            edges.append((q, label, index[nxt]))
    return Automaton(labels, len(order), edges, [0], terminal)


def build_min_weight_beta(basis: PisotBasis, alphabet: Alphabet,
                          delta_cap: Optional[int] = None,
                          pad: Optional[int] = None,
                          params: Optional[BuildParams] = None,
                          wit_alphabet: Optional[Alphabet] = None):
    """DFA for L_beta over the alphabet, plus its certification report.

    A word is weight-reducible when some zero-padded alignment of it pairs
    with a strictly lighter word of the same beta-value; L_beta is the
    complement of the factor closure of the reducible words.  The result
    must agree with the bounded-search beta-minimality oracle on all short
    words, else the caps widen and the construction repeats.
    """
    params = params or BuildParams()
    cap = delta_cap if delta_cap is not None else params.delta_cap
    pad = pad if pad is not None else params.pad_for(basis)
    if wit_alphabet is None:
        b = find_B(basis)
        wit_alphabet = alphabet.hull(Alphabet(1 - b.b_weak, b.b_weak - 1))
        oracle_digit = max(b.b_strict - 1, wit_alphabet.max_abs)
    else:
        oracle_digit = wit_alphabet.max_abs

    last_exc = None
    for rounds in range(1, params.widen_rounds + 1):
        aut = _build_lbeta_once(basis, alphabet, wit_alphabet, cap, params.max_states)
        cex = _certify_lbeta(basis, alphabet, aut, params.k_cert_beta,
                             oracle_digit, pad)
        cert = Certification("lbeta", params.k_cert_beta, cap, pad,
                             "certified" if cex is None else "failed",
                             cex, rounds)
        if cex is None:
            return aut, cert
        last_exc = cert
        cap *= 2
        pad += 2
        if rounds >= 3:
            wit_alphabet = Alphabet(wit_alphabet.lo - 1, wit_alphabet.hi + 1)
            oracle_digit += 1
    raise CertificationFailed(
        f"L_beta construction failed after widening: {last_exc.to_json()}",
        counterexample=last_exc.counterexample)


def _build_lbeta_once(basis, alphabet, wit_alphabet, delta_cap, max_states):
    order, trans = _reducer_graph_beta(basis, alphabet, wit_alphabet,
                                       max_states)
    zero_id = order.index((0,) * basis.degree)
    thresholds = _accept_thresholds_beta(order, trans, zero_id)
    inject = _injection_minima(trans, zero_id, delta_cap)
    forbidden = _min_delta_dfa(len(order), trans, alphabet.digits, inject,
                               thresholds, delta_cap, scan=True,
                               max_states=max_states)
    return determinize_minimize(forbidden.complement())


def _certify_lbeta(basis, alphabet, aut, k_cert, oracle_digit, pad):
    """Compare automaton membership with the bounded beta-minimality
    oracle on every word of length <= k_cert; return a counterexample
    in compact text form, or None."""
    oracle = BetaWeightOracle(basis, oracle_digit)
    from .algebraic import value_beta
    from .words import format_word

    start = next(iter(aut.initial)) if aut.initial else None
    if not (start is not None and start in aut.terminal):
        return "0"  # the empty word is beta-minimal
    # extensions of agreed non-members can be skipped only when the DFA is
    # structurally prefix-closed (all trim states terminal); the oracle
    # side is always monotone (appending a digit extends the witness too)
    prefix_closed = set(aut.terminal) == set(range(aut.n_states))
    memo: dict = {}

    def minimal(word):
        x = value_beta(basis, word)
        key = (x.coeffs, len(word))
        got = memo.get(key)
        if got is None:
            shifted = x
            for _ in range(pad):
                shifted = shifted.shift()
            got = oracle.min_weight_of(shifted, len(word) + 2 * pad)
            memo[key] = got
        return got >= weight(word)

    def rec(state, word, k):
        if word:
            in_lang = state is not None and state in aut.terminal
            if in_lang != minimal(word):
                return tuple(word)
            if not in_lang and prefix_closed:
                return None
        if k == 0:
            return None
        for a in alphabet:
            nxt = None
            if state is not None:
                tgt = aut._delta.get((state, a))
                nxt = next(iter(tgt)) if tgt else None
            word.append(a)
            bad = rec(nxt, word, k - 1)
            word.pop()
            if bad is not None:
                return bad
        return None

    cex = rec(start, [], k_cert)
    return None if cex is None else format_word(cex)


# --------------------------------------------------------------------------
# L_U: minimal-weight U-expansions
# --------------------------------------------------------------------------

class _LbetaFilter:
    """Liveness tracker for 'prefix in L_beta until the last g symbols'.

    L_beta is factorial, so its trim minimal DFA has every state
    terminal and membership of a prefix means the DFA is still alive.
    Encoded states: 0..n-1 alive, n+t dead for t+1 symbols (t < g).
    """

    def __init__(self, lbeta_dfa: Automaton, guard: int):
        if set(range(lbeta_dfa.n_states)) != set(lbeta_dfa.terminal):
            raise PisotMWError("L_beta DFA is not prefix-closed; "
                               "upstream construction is broken")
        self.dfa = lbeta_dfa
        self.n = lbeta_dfa.n_states
        self.guard = guard
        self.start = next(iter(lbeta_dfa.initial))

    def step(self, fstate: int, digit: int):
        """Next filter state, or None when the prefix died too long ago."""
        if fstate < self.n:
            tgt = self.dfa._delta.get((fstate, digit))
            if tgt:
                return next(iter(tgt))
            return self.n if self.guard > 0 else None
        age = fstate - self.n + 2
        if age > self.guard:
            return None
        return fstate + 1


def _reducer_graph_u(basis: PisotBasis, in_alphabet: Alphabet,
                     wit_alphabet: Alphabet, fin: _LbetaFilter,
                     fout: _LbetaFilter, max_states: int):
    """Reachable two-tape U-weight reducer with high-part filters,
    delta-free (the weight difference lives in the determinizer).

    Group states are (difference value, difference buffer, input filter,
    output filter); transitions carry minimal per-step weight increments.
    Thresholds mark groups whose two tapes hold equal U-values.
    """
    dmax = in_alphabet.max_abs + wit_alphabet.max_abs
    bounds = StateBounds(basis, dmax)
    mp_low = basis.min_poly[:-1]
    h, d = basis.h, basis.degree
    init = ((0,) * d, (0,) * h, fin.start, fout.start)
    index = {init: 0}
    order = [init]
    trans: dict = {}
    queue = deque([init])
    while queue:
        s, dbuf, fi, fo = state = queue.popleft()
        q = index[state]
        for a in in_alphabet:
            fi2 = fin.step(fi, a)
            if fi2 is None:
                continue
            best: dict = {}
            for b in wit_alphabet:
                fo2 = fout.step(fo, b)
                if fo2 is None:
                    continue
                e = b - a
                if h:
                    s2 = _shift_add(mp_low, s, dbuf[0])
                    dbuf2 = dbuf[1:] + (e,)
                else:
                    s2 = _shift_add(mp_low, s, e)
                    dbuf2 = dbuf
                if not bounds.admits(s2):
                    continue
                nxt = (s2, dbuf2, fi2, fo2)
                if nxt not in index:
                    if len(index) >= max_states:
                        raise StateExplosion("U reducer exceeded state budget")
                    index[nxt] = len(order)
                    order.append(nxt)
                    queue.append(nxt)
                r = index[nxt]
                inc = abs(b) - abs(a)
                if best.get(r, inc + 1) > inc:
                    best[r] = inc
            if best:
                trans[q, a] = tuple(best.items())
    thresholds = {i: -1 for i, (s, dbuf, fi, fo) in enumerate(order)
                  if _terminal_total(basis, s, dbuf) == 0}
    return order, trans, thresholds


def oracle_min_array(basis: PisotBasis, alphabet: Alphabet, k_cert: int,
                     slack: int = 6):
    """(offset, W): stabilized global minimal weights covering every value
    a length-k_cert word over the alphabet can take."""
    import numpy as np

    from .oracle import dense_min_weights
    k = k_cert + slack
    off1, w1 = dense_min_weights(basis, alphabet, k)
    off2, w2 = dense_min_weights(basis, alphabet, k + 1)
    span = alphabet.max_abs * basis.term_sums(k_cert)[k_cert - 1]
    lo, hi = -span, span
    a = w1[lo + off1: hi + off1 + 1]
    b = w2[lo + off2: hi + off2 + 1]
    if not np.array_equal(a, b):
        raise PisotMWError("oracle minimum failed to stabilize; raise slack")
    return span, a.copy()


def build_min_weight_u(basis: PisotBasis, alphabet: Alphabet,
                       params: Optional[BuildParams] = None,
                       return_cert: bool = False):
    """DFA for L_U over the alphabet, certified against the oracle.

    Assembled per the regularity theorem: the complement is the union of
    (i) words whose high part (all but the last g digits) already fails
    beta-minimality and (ii) the input projection of the two-tape reducer
    with zero-input-prefixed initial states.
    """
    params = params or BuildParams()
    b = find_B(basis)
    wit = alphabet.hull(Alphabet(1 - b.b_weak, b.b_weak - 1))
    oracle_alpha = wit
    cap = params.delta_cap
    pad = params.pad_for(basis)

    last_cert = None
    for rounds in range(1, params.widen_rounds + 1):
        guard = basis.h + pad
        lbeta_in, _ = build_min_weight_beta(basis, alphabet, delta_cap=cap,
                                            pad=pad, params=params,
                                            wit_alphabet=wit)
        if wit == alphabet:
            lbeta_wit = lbeta_in
        else:
            lbeta_wit, _ = build_min_weight_beta(basis, wit, delta_cap=cap,
                                                 pad=pad, params=params,
                                                 wit_alphabet=wit)
        aut = _build_lu_once(basis, alphabet, wit, lbeta_in, lbeta_wit,
                             guard, cap, params.max_states)
        cex = _certify_lu(basis, alphabet, oracle_alpha, aut, params.k_cert_u)
        cert = Certification("lu", params.k_cert_u, cap, pad,
                             "certified" if cex is None else "failed",
                             cex, rounds)
        if cex is None:
            return (aut, cert) if return_cert else aut
        last_cert = cert
        cap *= 2
        pad += 2
        if rounds >= 3:
            wit = Alphabet(wit.lo - 1, wit.hi + 1)
            oracle_alpha = wit
    raise CertificationFailed(
        f"L_U construction failed after widening: {last_cert.to_json()}",
        counterexample=last_cert.counterexample)


def _build_lu_once(basis, alphabet, wit, lbeta_in, lbeta_wit, guard, cap,
                   max_states):
    fin = _LbetaFilter(lbeta_in, guard)
    fout = _LbetaFilter(lbeta_wit, guard)
    order, trans, thresholds = _reducer_graph_u(basis, alphabet, wit,
                                                fin, fout, max_states)
    # B part: input projection of the reducer, with the zero-input prefix
    # minima as initial run set
    inject = _injection_minima(trans, 0, cap)
    b_nfa = _min_delta_dfa(len(order), trans, alphabet.digits, inject,
                           thresholds, cap, scan=False,
                           max_states=max_states)

    # A part: words whose high part leaves L_beta, i.e. (not L_beta) Sigma^guard
    notlb = lbeta_in.complement()
    if guard:
        base = notlb.n_states
        a_edges = list(notlb.edges)
        for q in notlb.terminal:
            for a in alphabet:
                a_edges.append((q, a, base))
        for i in range(guard - 1):
            for a in alphabet:
                a_edges.append((base + i, a, base + i + 1))
        a_nfa = Automaton(alphabet.digits, base + guard, a_edges,
                          notlb.initial, [base + guard - 1])
    else:
        a_nfa = notlb

    non_minimal = a_nfa.union(b_nfa)
    return determinize_minimize(non_minimal.complement())


def _certify_lu(basis, alphabet, oracle_alpha, aut, k_cert):
    """Exhaustively compare automaton membership against oracle minimal
    weights on every word of length <= k_cert (word in L_U iff its weight
    equals the global minimum for its value); returns a compact
    counterexample or None.

    Words are enumerated per exact length, most-significant digit first,
    so the U-value accrues as digit * U_{length-1-depth}.
    """
    from .words import format_word
    span, warr = oracle_min_array(basis, oracle_alpha, k_cert)
    start = next(iter(aut.initial)) if aut.initial else None
    terminal = aut.terminal
    delta = aut._delta
    digits = list(alphabet)
    if not (start is not None and start in terminal):
        return "0"  # empty word (value 0, weight 0) must be accepted
    for length in range(1, k_cert + 1):
        terms = basis.terms(length)
        stack = [(start, 0, 0, 0, ())]
        while stack:
            state, depth, value, wt, word = stack.pop()
            if depth == length:
                in_lang = state is not None and state in terminal
                if in_lang != (wt == int(warr[value + span])):
                    return format_word(word)
                continue
            u = terms[length - 1 - depth]
            for a in digits:
                nxt = None
                if state is not None:
                    tgt = delta.get((state, a))
                    nxt = next(iter(tgt)) if tgt else None
                stack.append((nxt, depth + 1, value + a * u, wt + abs(a),
                              word + (a,)))
    return None


# --------------------------------------------------------------------------
# G_U: greedy minimal-weight expansions, and the normalizer
# --------------------------------------------------------------------------

def _pair_value_graph(basis: PisotBasis, left: Automaton, right: Automaton,
                      in_alphabet: Alphabet, out_alphabet: Alphabet,
                      track_lex: bool, max_states: int):
    """Product of two DFAs with the exact value-equality tracker (and the
    strict |input| < |output| lexicographic flag when track_lex).

    Returns (order, out, terminal_ids); pair-deterministic by label.
    """
    dmax = in_alphabet.max_abs + out_alphabet.max_abs
    bounds = StateBounds(basis, dmax)
    mp_low = basis.min_poly[:-1]
    h, d = basis.h, basis.degree
    lstart = next(iter(left.initial))
    rstart = next(iter(right.initial))
    init = (lstart, rstart, (0,) * d, (0,) * h, 0)  # lex: 0 = eq, 1 = lt
    index = {init: 0}
    order = [init]
    out = [[]]
    queue = deque([init])
    while queue:
        ql, qr, s, dbuf, lex = state = queue.popleft()
        q = index[state]
        for a in in_alphabet:
            ltgt = left._delta.get((ql, a))
            if not ltgt:
                continue
            ql2 = next(iter(ltgt))
            for b in out_alphabet:
                rtgt = right._delta.get((qr, b))
                if not rtgt:
                    continue
                qr2 = next(iter(rtgt))
                if track_lex:
                    if lex:
                        lex2 = 1
                    elif abs(a) < abs(b):
                        lex2 = 1
                    elif abs(a) == abs(b):
                        lex2 = 0
                    else:
                        continue  # |input| already exceeds |output|
                else:
                    lex2 = 0
                e = b - a
                if h:
                    s2 = _shift_add(mp_low, s, dbuf[0])
                    dbuf2 = dbuf[1:] + (e,)
                else:
                    s2 = _shift_add(mp_low, s, e)
                    dbuf2 = dbuf
                if not bounds.admits(s2):
                    continue
                nxt = (ql2, qr2, s2, dbuf2, lex2)
                if nxt not in index:
                    if len(index) >= max_states:
                        raise StateExplosion("pair product exceeded state budget")
                    index[nxt] = len(order)
                    order.append(nxt)
                    out.append([])
                    queue.append(nxt)
                out[q].append(((a, b), index[nxt]))
    terminal = {i for i, (ql, qr, s, dbuf, lex) in enumerate(order)
                if ql in left.terminal and qr in right.terminal
                and (lex == 1 or not track_lex)
                and _terminal_total(basis, s, dbuf) == 0}
    return order, out, terminal


def build_greedy_automaton(basis: PisotBasis, alphabet: Alphabet,
                           lu: Optional[Automaton] = None,
                           params: Optional[BuildParams] = None) -> Automaton:
    """DFA for G_U: the per-value unique, absolute-lexicographically
    largest minimal-weight expansions.

    A word is dominated when some equally-valued equal-length L_U word is
    strictly larger digitwise in absolute value; G_U removes from L_U the
    leading-zero closure of the dominated words.
    """
    params = params or BuildParams()
    if lu is None:
        lu = build_min_weight_u(basis, alphabet, params)
    order, out, terminal = _pair_value_graph(
        basis, lu, lu, alphabet, alphabet, True, params.max_states)

    # H: input projection; then close under removing leading zeros
    initials = _pair_zero_input_closure(out, [0])
    edges = set()
    for q, trans in enumerate(out):
        for (a, _b), r in trans:
            edges.add((q, a, r))
    h_down = Automaton(alphabet.digits, len(order), edges, initials, terminal)
    dh = h_down.determinize()
    dh_start = next(iter(dh.initial))

    # dominated = 0^* . L(dh): fresh start strips leading zeros greedily
    fresh = dh.n_states
    bad_edges = list(dh.edges)
    bad_edges.append((fresh, 0, fresh))
    for a in alphabet:
        if a == 0:
            continue
        tgt = dh._delta.get((dh_start, a))
        if tgt:
            bad_edges.append((fresh, a, next(iter(tgt))))
    bad_terminal = set(dh.terminal)
    if dh_start in dh.terminal:
        bad_terminal.add(fresh)
    dominated = Automaton(alphabet.digits, fresh + 1, bad_edges,
                          [fresh], bad_terminal)

    gu = determinize_minimize(lu.intersect(dominated.complement()))
    _certify_gu(basis, alphabet, lu, gu)
    return gu


def _certify_gu(basis, alphabet, lu, gu, n_range: int = 100):
    """G_U must sit inside L_U and pick exactly the abs-lex-largest
    stripped minimal word for every |n| <= n_range."""
    from .automata import language_subset
    from .words import abs_lex_key, format_word, strip_zeros

    if not language_subset(gu, lu):
        raise CertificationFailed("G_U is not contained in L_U")
    oracle = MinWeightOracle(basis, alphabet)
    for n in range(-n_range, n_range + 1):
        words = oracle.minimal_words_stripped(n)
        top = max(len(w) for w in words) if words else 0
        best = max(words, key=lambda w: abs_lex_key(w, top))
        for w in words:
            expect = w == best
            if gu.accepts(w) != expect:
                raise CertificationFailed(
                    f"G_U wrong on n={n}, word {format_word(w)}",
                    counterexample=format_word(w))


def build_normalizer(basis: PisotBasis, alphabet: Alphabet,
                     lu: Optional[Automaton] = None,
                     gu: Optional[Automaton] = None,
                     params: Optional[BuildParams] = None) -> Automaton:
    """Trim minimal letter-to-letter transducer accepting the equal-length
    pairs (z, y) in L_U x G_U with equal U-value."""
    params = params or BuildParams()
    if lu is None:
        lu = build_min_weight_u(basis, alphabet, params)
    if gu is None:
        gu = build_greedy_automaton(basis, alphabet, lu, params)
    order, out, terminal = _pair_value_graph(
        basis, lu, gu, alphabet, alphabet, False, params.max_states)
    edges = []
    for q, trans in enumerate(out):
        for label, r in trans:
            edges.append((q, label, r))
    labels = {label for _, label, _ in edges}
    raw = Automaton(labels, len(order), edges, [0], terminal)
    return raw.minimize()


def length_slack(basis: PisotBasis, alphabet: Alphabet,
                 normalizer: Optional[Automaton] = None,
                 params: Optional[BuildParams] = None,
                 check_range: int = 10_000) -> int:
    """Maximal length excess m between zero-stripped equivalent minimal
    words, from the normalizer's zero-input prefix structure.

    In an accepted pair (0^t z, y) with stripped output, the excess of y
    over z is the leading run of input-0 transitions whose first output
    digit is nonzero; m is the longest such run in the trim transducer.
    Cross-checked empirically over |n| <= check_range.
    """
    if normalizer is None:
        normalizer = build_normalizer(basis, alphabet, params=params)
    n_aut = normalizer
    zero_next: dict = {}
    for q, (a, b), r in n_aut.edges:
        if a == 0:
            zero_next.setdefault(q, []).append((b, r))

    longest: dict = {}
    on_stack: set = set()

    def longest_zero_path(q):
        if q in longest:
            return longest[q]
        if q in on_stack:
            raise DiagnosticFailed(
                "zero-input cycle in the normalizer; length slack unbounded")
        on_stack.add(q)
        best = 0
        for _b, r in zero_next.get(q, ()):
            best = max(best, 1 + longest_zero_path(r))
        on_stack.discard(q)
        longest[q] = best
        return best

    m = 0
    for q in n_aut.initial:
        for b, r in zero_next.get(q, ()):
            if b != 0:
                m = max(m, 1 + longest_zero_path(r))

    m_emp = _empirical_length_slack(basis, alphabet, n_aut, check_range)
    if m_emp > m:
        raise DiagnosticFailed(
            f"empirical length slack {m_emp} exceeds structural bound {m}")
    return m


def _empirical_length_slack(basis, alphabet, normalizer, n_hi) -> int:
    """max over 0 < |n| <= n_hi of (longest minus shortest stripped
    minimal-word length), via dense per-length sweeps.

    The shortest stripped length is the first k at which a length-k word
    attains the global minimal weight; the longest is the stripped length
    of the greedy representative, read off the normalizer's output side.
    """
    import numpy as np

    from .oracle import DENSE_INF, dense_min_weights
    k_max = basis.greedy_length(n_hi) + 8
    span = n_hi
    off_ref, w_ref = dense_min_weights(basis, alphabet, k_max)
    ref = w_ref[off_ref - span: off_ref + span + 1]

    first = np.zeros(2 * span + 1, dtype=np.int32)
    for k in range(1, k_max + 1):
        off_k, w_k = dense_min_weights(basis, alphabet, k)
        window = np.full(2 * span + 1, DENSE_INF, dtype=np.int32)
        lo = max(-span, -off_k)
        hi = min(span, len(w_k) - off_k - 1)
        window[lo + span: hi + span + 1] = w_k[lo + off_k: hi + off_k + 1]
        achieved = window == ref
        first = np.where((first == 0) & achieved, k, first)

    lengths = _first_output_lengths(basis, normalizer, span, k_max)
    valid = (first > 0) & (lengths > 0)
    excess = np.where(valid, lengths - first, 0)
    return int(excess.max())


def _first_output_lengths(basis, normalizer, span, k_max):
    """First length at which each value |n| <= span is the value of a
    stripped accepted output word of the normalizer."""
    import numpy as np
    proj = normalizer.project("output")
    det = proj.determinize()
    from .spectral import count_values
    out = np.zeros(2 * span + 1, dtype=np.int32)
    for k in range(1, k_max + 1):
        off, counts = count_values(basis, det, k, strip_leading_zero=True)
        lo = max(-span, -off)
        hi = min(span, len(counts) - off - 1)
        window = np.zeros(2 * span + 1, dtype=np.int64)
        window[lo + span: hi + span + 1] = counts[lo + off: hi + off + 1]
        out = np.where((out == 0) & (window > 0), k, out)
    return out


# --------------------------------------------------------------------------
# structural diagnostics
# --------------------------------------------------------------------------

@dataclass
class DiagnosticsReport:
    basis: str
    alphabet: str
    primitive: bool
    primitivity_exponent: Optional[int]
    nontrivial_scc_count: int
    scc_matches_beta: bool
    synchronizing_k: Optional[int]

    def to_json(self) -> str:
        return json.dumps(self.__dict__)


def _primitivity_exponent(mat, cap: Optional[int] = None) -> Optional[int]:
    """Least e with mat^e entrywise positive, or None up to the cap
    (default (n-1)^2 + 1, the Wielandt bound)."""
    n = len(mat)
    if n == 0:
        return None
    if cap is None:
        cap = (n - 1) * (n - 1) + 2
    full = (1 << n) - 1
    base = [sum(1 << j for j in range(n) if mat[i][j]) for i in range(n)]
    cur = base
    for e in range(1, cap + 1):
        if all(row == full for row in cur):
            return e
        nxt = [0] * n
        for i in range(n):
            acc = 0
            row = cur[i]
            for j in range(n):
                if row >> j & 1:
                    acc |= base[j]
            nxt[i] = acc
        cur = nxt
    return None


def _nontrivial_sccs(aut: Automaton):
    """Strongly connected components containing at least one cycle."""
    import sys
    n = aut.n_states
    adj = [[] for _ in range(n)]
    self_loop = [False] * n
    for q, _l, r in aut.edges:
        adj[q].append(r)
        if q == r:
            self_loop[q] = True
    index = [0] * n
    low = [0] * n
    on_stack = [False] * n
    visited = [False] * n
    stack = []
    sccs = []
    counter = [1]
    sys.setrecursionlimit(max(10000, 4 * n + 100))

    def strongconnect(v):
        index[v] = low[v] = counter[0]
        counter[0] += 1
        visited[v] = True
        stack.append(v)
        on_stack[v] = True
        for w in adj[v]:
            if not visited[w]:
                strongconnect(w)
                low[v] = min(low[v], low[w])
            elif on_stack[w]:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack[w] = False
                comp.append(w)
                if w == v:
                    break
            sccs.append(comp)

    for v in range(n):
        if not visited[v]:
            strongconnect(v)
    return [c for c in sccs if len(c) > 1 or self_loop[c[0]]]


def _graphs_isomorphic(sub_edges, sub_states, beta: Automaton) -> bool:
    """Deterministic labeled-graph isomorphism (terminal sets ignored):
    try anchoring beta's initial state at every candidate node."""
    beta_key = _anchored_key(beta.edges, set(range(beta.n_states)),
                             next(iter(beta.initial)))
    for anchor in sub_states:
        if _anchored_key(sub_edges, sub_states, anchor) == beta_key:
            return True
    return False


def _anchored_key(edges, states, anchor):
    out = {}
    for q, l, r in edges:
        if q in states and r in states:
            out.setdefault(q, []).append((l, r))
    order = {anchor: 0}
    seq = [anchor]
    pos = 0
    key = []
    from .automata import _label_key
    while pos < len(seq):
        q = seq[pos]
        pos += 1
        row = []
        for l, r in sorted(out.get(q, []), key=lambda e: _label_key(e[0])):
            if r not in order:
                order[r] = len(seq)
                seq.append(r)
            row.append((l, order[r]))
        key.append(tuple(row))
    if len(seq) != len(states):
        return None  # anchor does not reach the whole component
    return tuple(key)


def diagnostics(basis: PisotBasis, alphabet: Alphabet,
                lu: Optional[Automaton] = None,
                lbeta: Optional[Automaton] = None,
                params: Optional[BuildParams] = None) -> DiagnosticsReport:
    """Structural checks: primitivity of the L_beta adjacency matrix,
    unique strongly connected component of the L_U automaton matching the
    L_beta automaton up to terminal states, and the least k with 0^k
    synchronizing every L_beta state to the initial one.

    Raises DiagnosticFailed naming the first failed check.
    """
    params = params or BuildParams()
    if lbeta is None:
        lbeta, _ = build_min_weight_beta(basis, alphabet, params=params)
    if lu is None:
        lu = build_min_weight_u(basis, alphabet, params)

    exponent = _primitivity_exponent(lbeta.adjacency())
    if exponent is None:
        raise DiagnosticFailed(
            f"A_beta not primitive for {basis}/{alphabet}")

    sccs = _nontrivial_sccs(lu)
    if len(sccs) != 1:
        raise DiagnosticFailed(
            f"L_U automaton has {len(sccs)} nontrivial SCCs, expected 1")
    scc = set(sccs[0])
    if not _graphs_isomorphic(lu.edges, scc, lbeta):
        raise DiagnosticFailed(
            "unique SCC of the L_U automaton does not match the L_beta "
            "automaton as a labeled graph")

    sync = None
    states = frozenset(range(lbeta.n_states))
    cur = states
    init = next(iter(lbeta.initial))
    for k in range(0, lbeta.n_states * lbeta.n_states + 2):
        if cur == frozenset([init]):
            sync = k
            break
        cur = lbeta.step(cur, 0)
        if not cur:
            break
    if sync is None:
        raise DiagnosticFailed("zero runs do not synchronize the L_beta "
                               "automaton to its initial state")

    return DiagnosticsReport(
        basis=str(basis), alphabet=str(alphabet), primitive=True,
        primitivity_exponent=exponent, nontrivial_scc_count=len(sccs),
        scc_matches_beta=True, synchronizing_k=sync)


# --------------------------------------------------------------------------
# cached construction bundle
# --------------------------------------------------------------------------

class ConstructionContext:
    """Builds and caches the full automaton family for one basis/alphabet."""

    def __init__(self, basis: PisotBasis, alphabet: Alphabet,
                 params: Optional[BuildParams] = None):
        self.basis = basis
        self.alphabet = alphabet
        self.params = params or BuildParams()
        self._cache: dict = {}
        self.certifications: dict = {}

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    @property
    def b_constants(self):
        return self._get("b", lambda: find_B(self.basis))

    @property
    def wit_alphabet(self) -> Alphabet:
        b = self.b_constants
        return self.alphabet.hull(Alphabet(1 - b.b_weak, b.b_weak - 1))

    @property
    def zero(self) -> Automaton:
        return self._get("zero", lambda: build_zero_automaton(
            self.basis, self.alphabet, self.params.max_states))

    @property
    def lbeta(self) -> Automaton:
        def build():
            aut, cert = build_min_weight_beta(self.basis, self.alphabet,
                                              params=self.params,
                                              wit_alphabet=self.wit_alphabet)
            self.certifications["lbeta"] = cert
            return aut
        return self._get("lbeta", build)

    @property
    def lu(self) -> Automaton:
        def build():
            aut, cert = build_min_weight_u(self.basis, self.alphabet,
                                           self.params, return_cert=True)
            self.certifications["lu"] = cert
            return aut
        return self._get("lu", build)

    @property
    def gu(self) -> Automaton:
        return self._get("gu", lambda: build_greedy_automaton(
            self.basis, self.alphabet, self.lu, self.params))

    @property
    def normalizer(self) -> Automaton:
        return self._get("normalizer", lambda: build_normalizer(
            self.basis, self.alphabet, self.lu, self.gu, self.params))

    @property
    def slack(self) -> int:
        return self._get("slack", lambda: length_slack(
            self.basis, self.alphabet, self.normalizer, self.params))

    def oracle(self) -> MinWeightOracle:
        return self._get("oracle", lambda: MinWeightOracle(
            self.basis, self.wit_alphabet))

    def diagnostics(self) -> DiagnosticsReport:
        return self._get("diag", lambda: diagnostics(
            self.basis, self.alphabet, self.lu, self.lbeta, self.params))
