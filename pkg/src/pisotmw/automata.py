"""Finite automata and letter-to-letter transducers over digit labels.

Labels are either integers (digits) or integer pairs (input, output) for
transducers.  Automata are immutable once built; every operation returns
a fresh automaton.  Deterministic automata canonicalized through
`determinize_minimize` number their states in BFS order by sorted label,
so isomorphic inputs yield structurally identical outputs.

Counting uses exact arbitrary-precision integer matrices (CountMatrix is
a plain list of int lists): count_accepted(k) = v1 A^k v2 for the
initial/terminal indicator vectors.
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from typing import Iterable, Sequence

from .errors import AlphabetMismatch, NotDeterministic

CountMatrix = list  # list[list[int]], square, nonnegative


def _label_key(label):
    return tuple(label) if isinstance(label, tuple) else (label,)


class Automaton:
    """A labeled directed graph with initial and terminal state sets."""

    def __init__(self, labels: Iterable, n_states: int, edges: Iterable,
                 initial: Iterable, terminal: Iterable):
        self.labels = tuple(sorted(set(labels), key=_label_key))
        self.n_states = int(n_states)
        self.edges = frozenset((int(q), l, int(r)) for q, l, r in edges)
        self.initial = frozenset(int(q) for q in initial)
        self.terminal = frozenset(int(q) for q in terminal)
        label_set = set(self.labels)
        delta = defaultdict(set)
        out = defaultdict(list)
        for q, l, r in self.edges:
            if l not in label_set:
                raise ValueError(f"edge label {l!r} not in alphabet")
            if not (0 <= q < self.n_states and 0 <= r < self.n_states):
                raise ValueError("edge endpoint out of range")
            delta[q, l].add(r)
            out[q].append((l, r))
        self._delta = {k: frozenset(v) for k, v in delta.items()}
        self._out = {q: tuple(sorted(v, key=lambda e: (_label_key(e[0]), e[1])))
                     for q, v in out.items()}

    # -- basic structure ----------------------------------------------------

    @property
    def deterministic(self) -> bool:
        return (len(self.initial) == 1
                and all(len(v) == 1 for v in self._delta.values()))

    @property
    def is_transducer(self) -> bool:
        return bool(self.labels) and all(
            isinstance(l, tuple) and len(l) == 2 for l in self.labels)

    def successors(self, q: int):
        return self._out.get(q, ())

    def step(self, states: frozenset, label) -> frozenset:
        nxt = set()
        for q in states:
            nxt |= self._delta.get((q, label), frozenset())
        return frozenset(nxt)

    def accepts(self, word: Sequence) -> bool:
        states = self.initial
        for label in word:
            states = self.step(states, label)
            if not states:
                return False
        return bool(states & self.terminal)

    # -- reachability and trimming ------------------------------------------

    def reachable_states(self) -> set:
        seen = set(self.initial)
        queue = deque(seen)
        while queue:
            q = queue.popleft()
            for _, r in self.successors(q):
                if r not in seen:
                    seen.add(r)
                    queue.append(r)
        return seen

    def coreachable_states(self) -> set:
        rev = defaultdict(set)
        for q, _, r in self.edges:
            rev[r].add(q)
        seen = set(self.terminal)
        queue = deque(seen)
        while queue:
            q = queue.popleft()
            for p in rev[q]:
                if p not in seen:
                    seen.add(p)
                    queue.append(p)
        return seen

    def terminal_distances(self) -> dict:
        """Shortest path length from each state to a terminal state."""
        rev = defaultdict(set)
        for q, _, r in self.edges:
            rev[r].add(q)
        dist = {q: 0 for q in self.terminal}
        queue = deque(self.terminal)
        while queue:
            q = queue.popleft()
            for p in rev[q]:
                if p not in dist:
                    dist[p] = dist[q] + 1
                    queue.append(p)
        return dist

    def trim(self) -> "Automaton":
        """Keep states both reachable and co-reachable."""
        keep = sorted(self.reachable_states() & self.coreachable_states())
        index = {q: i for i, q in enumerate(keep)}
        return Automaton(
            self.labels, len(keep),
            [(index[q], l, index[r]) for q, l, r in self.edges
             if q in index and r in index],
            [index[q] for q in self.initial if q in index],
            [index[q] for q in self.terminal if q in index])

    def is_empty(self) -> bool:
        return not (self.reachable_states() & self.terminal)

    # -- word enumeration and counting ----------------------------------------

    def enumerate_words(self, k: int) -> list:
        """All accepted length-k words, lexicographically by sorted label."""
        dist = self.terminal_distances()
        out = []

        def rec(states, depth, prefix):
            if depth == k:
                if states & self.terminal:
                    out.append(tuple(prefix))
                return
            remaining = k - depth
            for label in self.labels:
                nxt = {r for q in states
                       for r in self._delta.get((q, label), ())}
                nxt = frozenset(r for r in nxt if dist.get(r, k + 1) <= remaining - 1)
                if nxt:
                    prefix.append(label)
                    rec(nxt, depth + 1, prefix)
                    prefix.pop()

        start = frozenset(q for q in self.initial
                          if dist.get(q, k + 1) <= k)
        if start:
            rec(start, 0, [])
        return out

    def adjacency(self, label=None) -> CountMatrix:
        """Per-label (or total) transition-count matrix, exact integers."""
        n = self.n_states
        mat = [[0] * n for _ in range(n)]
        for q, l, r in self.edges:
            if label is None or l == label:
                mat[q][r] += 1
        return mat

    def component_adjacency(self, side: str, digit: int) -> CountMatrix:
        """For transducers: adjacency of transitions whose input (side
        'input') or output (side 'output') component equals digit."""
        if not self.is_transducer:
            raise ValueError("component_adjacency needs pair labels")
        idx = {"input": 0, "output": 1}[side]
        n = self.n_states
        mat = [[0] * n for _ in range(n)]
        for q, l, r in self.edges:
            if l[idx] == digit:
                mat[q][r] += 1
        return mat

    def initial_vector(self) -> list:
        return [1 if q in self.initial else 0 for q in range(self.n_states)]

    def terminal_vector(self) -> list:
        return [1 if q in self.terminal else 0 for q in range(self.n_states)]

    def count_paths(self, k: int):
        """Number of initial->terminal paths of length k (label multiplicity
        counts; on nondeterministic automata this exceeds the word count)."""
        vec = self.initial_vector()
        mat = self.adjacency()
        for _ in range(k):
            vec = vec_mat(vec, mat)
        return sum(v * t for v, t in zip(vec, self.terminal_vector()))

    def count_accepted(self, k: int, allow_paths: bool = False):
        """Number of accepted length-k words; requires determinism unless
        allow_paths explicitly requests raw path counting."""
        if not self.deterministic and not allow_paths:
            raise NotDeterministic(
                "word counting on a nondeterministic automaton; "
                "pass allow_paths=True for raw path counts")
        return self.count_paths(k)

    # -- determinization, minimization, canonical form -----------------------

    def determinize(self) -> "Automaton":
        """Subset construction (bitmask subsets); deterministic, reachable."""
        masks = {}
        for (q, l), dsts in self._delta.items():
            acc = 0
            for r in dsts:
                acc |= 1 << r
            masks[q, l] = acc
        term_mask = 0
        for q in self.terminal:
            term_mask |= 1 << q
        start = 0
        for q in self.initial:
            start |= 1 << q
        index = {start: 0}
        order = [start]
        edges = []
        queue = deque([start])
        while queue:
            subset = queue.popleft()
            q = index[subset]
            for label in self.labels:
                nxt = 0
                bits = subset
                while bits:
                    low = bits & -bits
                    nxt |= masks.get((low.bit_length() - 1, label), 0)
                    bits ^= low
                if not nxt:
                    continue
                if nxt not in index:
                    index[nxt] = len(order)
                    order.append(nxt)
                    queue.append(nxt)
                edges.append((q, label, index[nxt]))
        terminal = [index[s] for s in order if s & term_mask]
        return Automaton(self.labels, len(order), edges, [0], terminal)

    def minimize(self) -> "Automaton":
        """Trim minimal DFA (Moore refinement), canonically numbered."""
        if not self.deterministic:
            raise NotDeterministic("minimize requires a DFA; determinize first")
        aut = self.trim()
        if aut.n_states == 0:
            return Automaton(self.labels, 0, [], [], [])
        n = aut.n_states
        sink = n  # implicit dead state completing the DFA
        labels = aut.labels

        def dst(q, label):
            if q == sink:
                return sink
            tgt = aut._delta.get((q, label))
            return next(iter(tgt)) if tgt else sink

        # initial partition: terminal / nonterminal (sink is nonterminal)
        block = [1 if q in aut.terminal else 0 for q in range(n)] + [0]
        while True:
            signature = {}
            new_block = [0] * (n + 1)
            for q in range(n + 1):
                sig = (block[q],) + tuple(block[dst(q, l)] for l in labels)
                if sig not in signature:
                    signature[sig] = len(signature)
                new_block[q] = signature[sig]
            if new_block == block:
                break
            block = new_block
        sink_block = block[sink]
        edges = []
        for q, l, r in aut.edges:
            if block[q] != sink_block and block[r] != sink_block:
                edges.append((block[q], l, block[r]))
        init = {block[q] for q in aut.initial if block[q] != sink_block}
        term = {block[q] for q in aut.terminal}
        merged = Automaton(labels, max(block) + 1, set(edges), init, term)
        return merged.trim().renumber_canonical()

    def renumber_canonical(self) -> "Automaton":
        """BFS numbering from the initial set, labels in sorted order."""
        order = []
        index = {}
        for q in sorted(self.initial):
            index[q] = len(order)
            order.append(q)
        pos = 0
        while pos < len(order):
            q = order[pos]
            pos += 1
            for l, r in self.successors(q):
                if r not in index:
                    index[r] = len(order)
                    order.append(r)
        # unreachable states are dropped
        edges = [(index[q], l, index[r]) for q, l, r in self.edges
                 if q in index and r in index]
        return Automaton(self.labels, len(order), edges,
                         [index[q] for q in self.initial],
                         [index[q] for q in self.terminal if q in index])

    def canonical_key(self, ignore_terminal: bool = False) -> tuple:
        """Structural signature of the canonical form; equal keys mean
        isomorphic (for canonicalized DFAs, equal languages)."""
        aut = self.renumber_canonical()
        edges = tuple(sorted(aut.edges, key=lambda e: (e[0], _label_key(e[1]), e[2])))
        term = () if ignore_terminal else tuple(sorted(aut.terminal))
        return (aut.labels, aut.n_states, tuple(sorted(aut.initial)), term, edges)

    # -- boolean operations ---------------------------------------------------

    def _check_alphabet(self, other: "Automaton"):
        if self.labels != other.labels:
            raise AlphabetMismatch(
                f"label sets differ: {self.labels} vs {other.labels}")

    def complete(self) -> "Automaton":
        """Add a sink so every (state, label) has a transition."""
        aut = self if self.deterministic else self.determinize()
        n = aut.n_states
        edges = list(aut.edges)
        need_sink = False
        for q in range(n):
            for l in aut.labels:
                if (q, l) not in aut._delta:
                    edges.append((q, l, n))
                    need_sink = True
        if not need_sink and n > 0:
            return aut
        if n == 0:
            return Automaton(aut.labels, 1, [(0, l, 0) for l in aut.labels],
                             [0], [])
        for l in aut.labels:
            edges.append((n, l, n))
        return Automaton(aut.labels, n + 1, edges, aut.initial, aut.terminal)

    def complement(self) -> "Automaton":
        """Language complement within labels^*."""
        comp = self.complete()
        terminal = set(range(comp.n_states)) - comp.terminal
        return Automaton(comp.labels, comp.n_states, comp.edges,
                         comp.initial, terminal)

    def intersect(self, other: "Automaton") -> "Automaton":
        self._check_alphabet(other)
        return _product(self, other, lambda a, b: a and b)

    def union(self, other: "Automaton") -> "Automaton":
        self._check_alphabet(other)
        off = self.n_states
        edges = list(self.edges) + [(q + off, l, r + off)
                                    for q, l, r in other.edges]
        return Automaton(self.labels, off + other.n_states, edges,
                         set(self.initial) | {q + off for q in other.initial},
                         set(self.terminal) | {q + off for q in other.terminal})

    def difference(self, other: "Automaton") -> "Automaton":
        self._check_alphabet(other)
        return self.intersect(other.complement())

    # -- transducer projection -------------------------------------------------

    def project(self, side: str) -> "Automaton":
        """Erase one pair component; an NFA over single digits results."""
        if not self.is_transducer:
            raise ValueError("project needs pair labels")
        idx = {"input": 0, "output": 1}[side]
        edges = [(q, l[idx], r) for q, l, r in self.edges]
        labels = {l[idx] for l in self.labels}
        return Automaton(labels, self.n_states, set(edges),
                         self.initial, self.terminal)

    # -- serialization ----------------------------------------------------------

    def to_json(self) -> str:
        label_list = [list(l) if isinstance(l, tuple) else l
                      for l in self.labels]
        label_index = {l: i for i, l in enumerate(self.labels)}
        transitions = sorted(
            [q, label_index[l], r] for q, l, r in self.edges)
        return json.dumps({
            "labels": label_list,
            "states": self.n_states,
            "initial": sorted(self.initial),
            "terminal": sorted(self.terminal),
            "transitions": transitions,
        })

    @staticmethod
    def from_json(text: str) -> "Automaton":
        data = json.loads(text)
        labels = [tuple(l) if isinstance(l, list) else l
                  for l in data["labels"]]
        edges = [(q, labels[i], r) for q, i, r in data["transitions"]]
        return Automaton(labels, data["states"], edges,
                         data["initial"], data["terminal"])

    def to_dot(self, name: str = "automaton") -> str:
        def fmt(l):
            if isinstance(l, tuple):
                return f"{l[0]}|{l[1]}"
            return str(l)

        lines = [f"digraph {name} {{", "  rankdir=LR;",
                 '  node [shape=circle];']
        for q in sorted(self.terminal):
            lines.append(f"  {q} [shape=doublecircle];")
        for i, q in enumerate(sorted(self.initial)):
            lines.append(f'  __start{i} [shape=point, style=invis];')
            lines.append(f"  __start{i} -> {q};")
        grouped = defaultdict(list)
        for q, l, r in sorted(self.edges, key=lambda e: (e[0], e[2], _label_key(e[1]))):
            grouped[q, r].append(fmt(l))
        for (q, r), ls in grouped.items():
            lines.append(f'  {q} -> {r} [label="{", ".join(ls)}"];')
        lines.append("}")
        return "\n".join(lines)

    def __repr__(self):
        kind = "LetterTransducer" if self.is_transducer else "Automaton"
        return (f"{kind}(states={self.n_states}, edges={len(self.edges)}, "
                f"labels={len(self.labels)}, det={self.deterministic})")


def _product(a: Automaton, b: Automaton, accept) -> Automaton:
    """Synchronous product; accepting per the combiner on terminal flags."""
    da, db = a.determinize(), b.determinize()
    ca, cb = da.complete(), db.complete()
    start = (next(iter(ca.initial)), next(iter(cb.initial)))
    index = {start: 0}
    queue = deque([start])
    edges = []
    terminal = []
    while queue:
        qa, qb = queue.popleft()
        q = index[qa, qb]
        if accept(qa in ca.terminal, qb in cb.terminal):
            terminal.append(q)
        for label in ca.labels:
            ra = next(iter(ca._delta[qa, label]))
            rb = next(iter(cb._delta[qb, label]))
            key = (ra, rb)
            if key not in index:
                index[key] = len(index)
                queue.append(key)
            edges.append((q, label, index[key]))
    return Automaton(ca.labels, len(index), edges, [0], terminal).trim()


# -- module-level operation wrappers (spec surface) --------------------------

def determinize_minimize(aut: Automaton) -> Automaton:
    """Deterministic trim minimal automaton in canonical numbering."""
    return aut.determinize().minimize()


def boolean_op(op: str, a: Automaton, b: Automaton | None = None) -> Automaton:
    ops1 = {"complement": Automaton.complement}
    ops2 = {"intersect": Automaton.intersect, "union": Automaton.union,
            "difference": Automaton.difference}
    if op in ops1:
        if b is not None:
            raise ValueError(f"{op} is unary")
        return ops1[op](a)
    if op in ops2:
        if b is None:
            raise ValueError(f"{op} needs two automata")
        return ops2[op](a, b)
    raise ValueError(f"unknown boolean op {op!r}")


def language_equal(a: Automaton, b: Automaton) -> bool:
    """Exact language equality via canonical minimal DFAs."""
    ka = determinize_minimize(a).canonical_key()
    kb = determinize_minimize(b).canonical_key()
    return ka == kb


def language_subset(a: Automaton, b: Automaton) -> bool:
    """Whether L(a) is contained in L(b)."""
    return a.difference(b).trim().n_states == 0


# -- exact integer matrix helpers ---------------------------------------------

def mat_mul(a: CountMatrix, b: CountMatrix) -> CountMatrix:
    n, m = len(a), len(b[0]) if b else 0
    out = [[0] * m for _ in range(n)]
    for i, row in enumerate(a):
        oi = out[i]
        for k, v in enumerate(row):
            if v:
                bk = b[k]
                for j in range(m):
                    if bk[j]:
                        oi[j] += v * bk[j]
    return out


def vec_mat(vec: list, mat: CountMatrix) -> list:
    m = len(mat[0]) if mat else 0
    out = [0] * m
    for i, v in enumerate(vec):
        if v:
            row = mat[i]
            for j in range(m):
                if row[j]:
                    out[j] += v * row[j]
    return out


def mat_pow(mat: CountMatrix, k: int) -> CountMatrix:
    n = len(mat)
    result = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    base = mat
    while k:
        if k & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base) if k > 1 else base
        k >>= 1
    return result


def mat_sum(mats: Sequence[CountMatrix]) -> CountMatrix:
    n = len(mats[0])
    out = [[0] * n for _ in range(n)]
    for m in mats:
        for i in range(n):
            row, src = out[i], m[i]
            for j in range(n):
                row[j] += src[j]
    return out
