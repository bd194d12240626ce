"""Subshifts of finite type, word automata and finite views of limit sets."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .ca_core import (CellularAutomaton, DomainError, Inconclusive, PeriodicConfiguration,
                      Word, _kv_lines, apply_local, format_word, parse_word, window_index)

DEFAULT_STATE_BUDGET = 10 ** 6


# ------------------------------------------------------------------------ SFT

@dataclass(frozen=True)
class Sft:
    alphabet: int
    forbidden: tuple = ()

    def __post_init__(self):
        fb = tuple(sorted({tuple(w) for w in self.forbidden}, key=lambda w: (len(w), w)))
        if any(len(w) == 0 for w in fb):
            raise DomainError("empty forbidden word")
        object.__setattr__(self, "forbidden", fb)

    @classmethod
    def avoiding(cls, *words, alphabet=2):
        return cls(alphabet, tuple(parse_word(w) if isinstance(w, str) else tuple(w) for w in words))

    @property
    def order(self) -> int:
        return max((len(w) for w in self.forbidden), default=1)

    def contains(self, w) -> bool:
        w = tuple(w)
        for f in self.forbidden:
            L = len(f)
            for i in range(len(w) - L + 1):
                if w[i:i + L] == f:
                    return False
        return True

    def first_violation(self, w):
        """Smallest end position of a forbidden factor, or None."""
        w = tuple(w)
        best = None
        for f in self.forbidden:
            L = len(f)
            for i in range(len(w) - L + 1):
                if w[i:i + L] == f:
                    if best is None or i + L < best:
                        best = i + L
                    break
        return best

    # de Bruijn style transition on suffix states
    def advance(self, state: Word, s: int):
        nxt = state + (s,)
        for f in self.forbidden:
            if len(f) <= len(nxt) and nxt[len(nxt) - len(f):] == f:
                return None
        keep = self.order - 1
        return nxt[max(0, len(nxt) - keep):] if keep > 0 else ()


def sft_to_text(sft: Sft) -> str:
    lines = [f"alphabet: {sft.alphabet}"] + [f"forbid: {format_word(w)}" for w in sft.forbidden]
    return "\n".join(lines) + "\n"


def sft_from_text(text: str) -> Sft:
    kv = _kv_lines(text)
    alphabet = None
    forb = []
    for k, v in kv:
        if k == "alphabet":
            alphabet = int(v)
        elif k == "forbid":
            forb.append(parse_word(v))
        else:
            raise DomainError(f"unknown key {k!r} in SFT file")
    if alphabet is None:
        raise DomainError("SFT file lacks alphabet")
    return Sft(alphabet, tuple(forb))


def load_sft(path) -> Sft:
    return sft_from_text(Path(path).read_text())


# ------------------------------------------------------------ ranked language

class RankedLanguage:
    """L_k(Σ) with lexicographic rank/unrank backed by a counting table."""

    def __init__(self, sft: Sft, length: int):
        if length < 1:
            raise DomainError("length must be positive")
        self.sft = sft
        self.length = length
        # suffix states of the de Bruijn graph reachable from the empty prefix
        self._trans = {}
        todo = [()]
        while todo:
            st = todo.pop()
            if st in self._trans:
                continue
            row = tuple(sft.advance(st, s) for s in range(sft.alphabet))
            self._trans[st] = row
            todo += [n for n in row if n is not None and n not in self._trans]
        # table[rem][state] = number of ways to append rem more symbols
        self._table = [dict.fromkeys(self._trans, 1)]
        for _ in range(length):
            prev = self._table[-1]
            self._table.append({st: sum(prev[n] for n in row if n is not None)
                                for st, row in self._trans.items()})
        self.count = self._table[length][()]

    def count_from(self, state, rem) -> int:
        return self._table[rem][state]

    def __contains__(self, w):
        return len(w) == self.length and self.sft.contains(w)

    def rank(self, w) -> int:
        w = tuple(w)
        if w not in self:
            raise DomainError(f"{format_word(w)} is not in the language")
        state, r = (), 0
        for i, c in enumerate(w):
            rem = self.length - i - 1
            for s in range(c):
                nxt = self.sft.advance(state, s)
                if nxt is not None:
                    r += self.count_from(nxt, rem)
            state = self.sft.advance(state, c)
        return r

    def unrank(self, idx: int) -> Word:
        if not 0 <= idx < self.count:
            raise DomainError(f"index {idx} out of range [0, {self.count})")
        state, out = (), []
        for i in range(self.length):
            rem = self.length - i - 1
            for s in range(self.sft.alphabet):
                nxt = self.sft.advance(state, s)
                if nxt is None:
                    continue
                c = self.count_from(nxt, rem)
                if idx < c:
                    out.append(s)
                    state = nxt
                    break
                idx -= c
        return tuple(out)

    def enumerate(self):
        def rec(state, prefix):
            if len(prefix) == self.length:
                yield tuple(prefix)
                return
            for s in range(self.sft.alphabet):
                nxt = self.sft.advance(state, s)
                if nxt is not None and self.count_from(nxt, self.length - len(prefix) - 1):
                    prefix.append(s)
                    yield from rec(nxt, prefix)
                    prefix.pop()
        yield from rec((), [])


def language_slice(sft: Sft, k: int) -> RankedLanguage:
    return RankedLanguage(sft, k)


def rank_word(rl: RankedLanguage, w) -> int:
    return rl.rank(w)


def unrank(rl: RankedLanguage, i: int) -> Word:
    return rl.unrank(i)


# -------------------------------------------------------------- automata

@dataclass
class WordAutomaton:
    """Finite automaton over symbols 0..alphabet-1.

    ``delta[q]`` maps a symbol to a tuple of successor states (length <= 1
    once deterministic).  Missing entries mean no transition.
    """
    alphabet: int
    delta: list
    initial: frozenset
    accepting: frozenset
    deterministic: bool = False

    @property
    def n_states(self):
        return len(self.delta)

    def run(self, w):
        cur = set(self.initial)
        for s in w:
            cur = {p for q in cur for p in self.delta[q].get(s, ())}
            if not cur:
                break
        return cur

    def accepts(self, w) -> bool:
        return bool(self.run(w) & self.accepting)


def sft_automaton(sft: Sft) -> WordAutomaton:
    """Deterministic automaton of L(Σ) over suffix states, all accepting."""
    index = {(): 0}
    delta = [{}]
    todo = deque([()])
    while todo:
        st = todo.popleft()
        q = index[st]
        for s in range(sft.alphabet):
            nxt = sft.advance(st, s)
            if nxt is None:
                continue
            if nxt not in index:
                index[nxt] = len(delta)
                delta.append({})
                todo.append(nxt)
            delta[q][s] = (index[nxt],)
    return WordAutomaton(sft.alphabet, delta, frozenset({0}), frozenset(range(len(delta))), True)


def full_automaton(alphabet: int) -> WordAutomaton:
    return WordAutomaton(alphabet, [{s: (0,) for s in range(alphabet)}],
                         frozenset({0}), frozenset({0}), True)


def determinize(a: WordAutomaton, budget: int = DEFAULT_STATE_BUDGET) -> WordAutomaton:
    """Subset construction; the empty subset becomes an explicit dead state."""
    start = frozenset(a.initial)
    index = {start: 0}
    subsets = [start]
    delta = []
    i = 0
    while i < len(subsets):
        cur = subsets[i]
        row = {}
        for s in range(a.alphabet):
            nxt = frozenset(p for q in cur for p in a.delta[q].get(s, ()))
            if nxt not in index:
                if len(subsets) >= budget:
                    raise Inconclusive(f"determinization exceeded {budget} states")
                index[nxt] = len(subsets)
                subsets.append(nxt)
            row[s] = (index[nxt],)
        delta.append(row)
        i += 1
    acc = frozenset(j for j, S in enumerate(subsets) if S & a.accepting)
    d = WordAutomaton(a.alphabet, delta, frozenset({0}), acc, True)
    d.subsets = subsets
    return d


def minimize(d: WordAutomaton) -> WordAutomaton:
    """Moore partition refinement on a complete DFA."""
    if not d.deterministic:
        raise DomainError("minimize expects a deterministic automaton")
    n = d.n_states
    block = [1 if q in d.accepting else 0 for q in range(n)]
    while True:
        sig = {}
        new = []
        for q in range(n):
            key = (block[q],) + tuple(block[d.delta[q][s][0]] for s in range(d.alphabet))
            new.append(sig.setdefault(key, len(sig)))
        if len(sig) == len(set(block)):
            break
        block = new
    # renumber so the initial state's block comes first, by BFS order
    q0 = next(iter(d.initial))
    order = {block[q0]: 0}
    todo = deque([q0])
    seen = {q0}
    while todo:
        q = todo.popleft()
        for s in range(d.alphabet):
            p = d.delta[q][s][0]
            if block[p] not in order:
                order[block[p]] = len(order)
            if p not in seen:
                seen.add(p)
                todo.append(p)
    m = len(order)
    delta = [None] * m
    acc = set()
    for q in seen:
        b = order[block[q]]
        if delta[b] is None:
            delta[b] = {s: (order[block[d.delta[q][s][0]]],) for s in range(d.alphabet)}
        if q in d.accepting:
            acc.add(b)
    return WordAutomaton(d.alphabet, delta, frozenset({0}), frozenset(acc), True)


def image_language(a: WordAutomaton, ca: CellularAutomaton,
                   budget: int = DEFAULT_STATE_BUDGET) -> WordAutomaton:
    """Automaton of L(F(X)) where ``a`` recognises L(X).

    Product of ``a`` with the de Bruijn graph of ``f``: a state remembers the
    last 2r preimage symbols; reading an output symbol b picks a next preimage
    symbol c with f(window) = b.
    """
    if not ca.is_table:
        raise DomainError("image_language needs a table rule")
    A, r = ca.alphabet, ca.radius
    n_ctx = A ** (2 * r)
    if a.n_states * n_ctx > budget:
        raise Inconclusive("product automaton exceeds the state budget")
    # states of the product: q * n_ctx + context index
    delta = [dict() for _ in range(a.n_states * n_ctx)]
    for q in range(a.n_states):
        for ctx in range(n_ctx):
            src = q * n_ctx + ctx
            for c in range(A):
                win = ctx * A + c
                b = ca.table[win]
                nctx = win % n_ctx
                for p in a.delta[q].get(c, ()):
                    delta[src].setdefault(b, set()).add(p * n_ctx + nctx)
    delta = [{b: tuple(sorted(v)) for b, v in row.items()} for row in delta]
    # initial: reading the first 2r preimage symbols produces no output
    init = set()
    for ctx_word in itertools.product(range(A), repeat=2 * r):
        qs = set(a.initial)
        for c in ctx_word:
            qs = {p for q in qs for p in a.delta[q].get(c, ())}
        ctx = window_index(ctx_word, A) if r else 0
        init |= {q * n_ctx + ctx for q in qs}
    acc = frozenset(q * n_ctx + c for q in a.accepting for c in range(n_ctx))
    nfa = WordAutomaton(A, delta, frozenset(init), acc, False)
    return minimize(determinize(nfa, budget))


def _bfs_rejected(d: WordAutomaton):
    """Lexicographically least shortest word rejected by a complete DFA."""
    q0 = next(iter(d.initial))
    if q0 not in d.accepting:
        return ()
    prev = {q0: None}
    todo = deque([q0])
    while todo:
        q = todo.popleft()
        for s in range(d.alphabet):
            p = d.delta[q][s][0]
            if p in prev:
                continue
            prev[p] = (q, s)
            if p not in d.accepting:
                word = []
                while prev[p] is not None:
                    p, s2 = prev[p]
                    word.append(s2)
                return tuple(reversed(word))
            todo.append(p)
    return None


def image_of_full_shift(ca: CellularAutomaton) -> WordAutomaton:
    return image_language(full_automaton(ca.alphabet), ca)


def is_surjective(ca: CellularAutomaton) -> bool:
    if not ca.is_table:
        raise DomainError("surjectivity is decided for table rules only")
    return _bfs_rejected(image_of_full_shift(ca)) is None


def shortest_orphan(ca: CellularAutomaton):
    if not ca.is_table:
        raise DomainError("orphan search needs a table rule")
    return _bfs_rejected(image_of_full_shift(ca))


def preimage_counts(ca: CellularAutomaton, n: int) -> np.ndarray:
    """Number of preimage words of each length-n word (index = base-A value).

    Dynamic programming over de Bruijn contexts: ``M[w, ctx]`` counts the
    preimages of w whose last 2r symbols are ctx.
    """
    if not ca.is_table:
        raise DomainError("preimage counting needs a table rule")
    A = ca.alphabet
    n_ctx = A ** (2 * ca.radius)
    if A ** n * n_ctx > 1 << 26:
        raise Inconclusive("too many words to tabulate")
    M = np.ones((1, n_ctx), dtype=np.int64)
    for _ in range(n):
        nxt = np.zeros((M.shape[0] * A, n_ctx), dtype=np.int64)
        for ctx in range(n_ctx):
            for c in range(A):
                win = ctx * A + c
                b = ca.table[win]
                nxt[b::A, win % n_ctx] += M[:, ctx]
        M = nxt
    return M.sum(axis=1)


def is_balanced(ca: CellularAutomaton, n: int) -> bool:
    """Balance oracle: every length-n word has exactly A^(2r) preimages.

    Balance at length n implies balance at every shorter length, and a
    non-surjective CA has an orphan no longer than the number of subsets of
    de Bruijn contexts, so choosing n at least that large makes the test exact.
    """
    counts = preimage_counts(ca, n)
    return bool(np.all(counts == ca.alphabet ** (2 * ca.radius)))


def balance_surjective(ca: CellularAutomaton, n: int | None = None) -> bool:
    if n is None:
        n = min(2 ** (ca.alphabet ** (2 * ca.radius)), 16)
    return is_balanced(ca, n)


# --------------------------------------------------------- limit set views

def preimage_words(ca: CellularAutomaton, w, limit=None):
    """All words p of length |w|+2r with apply_local(ca, p) == w (DFS)."""
    w = tuple(w)
    A, W = ca.alphabet, ca.width
    if W == 1:
        opts = [[c for c in range(A) if ca.local((c,)) == s] for s in w]
        return [tuple(p) for p in itertools.product(*opts)]
    by_prefix = {}
    for win in itertools.product(range(A), repeat=W):
        by_prefix.setdefault((win[:-1], ca.local(win)), []).append(win[-1])
    out = []

    def rec(prefix, i):
        if limit is not None and len(out) >= limit:
            return
        if i == len(w):
            out.append(tuple(prefix))
            return
        for c in by_prefix.get((tuple(prefix[len(prefix) - W + 1:]), w[i]), ()):
            prefix.append(c)
            rec(prefix, i + 1)
            prefix.pop()

    for start in itertools.product(range(A), repeat=W - 1):
        rec(list(start), 0)
    return out


def word_reachable_at_depth(ca: CellularAutomaton, w, d: int, budget: int = 200_000) -> bool:
    if d < 0:
        raise DomainError("depth must be nonnegative")
    w = tuple(w)
    if d == 0:
        return True
    counter = [0]
    dead = set()

    def rec(word, depth):
        if depth == 0:
            return True
        if (word, depth) in dead:
            return False
        for p in preimage_words(ca, word):
            counter[0] += 1
            if counter[0] > budget:
                raise Inconclusive(f"backward search exceeded {budget} nodes")
            if rec(p, depth - 1):
                return True
        dead.add((word, depth))
        return False

    return rec(w, d)


@dataclass
class LimitApprox:
    width: int
    depth: int
    outer: set = field(default_factory=set)
    inner: set = field(default_factory=set)


def limit_outer(ca: CellularAutomaton, width: int, depth: int, period: int | None = None,
                budget: int = 200_000) -> LimitApprox:
    if ca.alphabet ** width > budget:
        raise Inconclusive("too many words of this width")
    outer = {w for w in itertools.product(range(ca.alphabet), repeat=width)
             if word_reachable_at_depth(ca, w, depth, budget)}
    inner = set()
    if period:
        for p in range(1, period + 1):
            for x in recurrent_periodic(ca, p):
                ext = x.extended(0, width)
                inner |= {ext[i:i + width] for i in range(p)}
    return LimitApprox(width, depth, outer, inner)


def successor_array(ca: CellularAutomaton, P: int) -> np.ndarray:
    """Global map on all A^P period-P configurations, encoded base A (cell 0 most significant)."""
    A, r = ca.alphabet, ca.radius
    total = A ** P
    codes = np.arange(total, dtype=np.int64)
    digits = [(codes // A ** (P - 1 - i)) % A for i in range(P)]
    out = np.zeros(total, dtype=np.int64)
    if ca.is_table:
        tab = np.frombuffer(ca.table, dtype=np.uint8).astype(np.int64)
        for i in range(P):
            idx = np.zeros(total, dtype=np.int64)
            for j in range(i - r, i + r + 1):
                idx = idx * A + digits[j % P]
            out = out * A + tab[idx]
        return out
    for code in range(total):
        cells = tuple(int(d[code]) for d in digits)
        x = PeriodicConfiguration(A, cells)
        from .ca_core import step
        y = step(ca, x).cells
        out[code] = window_index(y, A)
    return out


def recurrent_mask(succ: np.ndarray) -> np.ndarray:
    """Nodes lying on cycles of a functional graph, by iterating the image."""
    alive = np.ones(len(succ), dtype=bool)
    while True:
        nxt = np.zeros(len(succ), dtype=bool)
        nxt[succ[alive]] = True
        if np.array_equal(nxt, alive):
            return alive
        alive = nxt


def recurrent_periodic(ca: CellularAutomaton, P: int, budget: int = 1 << 24) -> set:
    if ca.alphabet ** P > budget:
        raise Inconclusive(f"{ca.alphabet}^{P} configurations exceed the budget")
    succ = successor_array(ca, P)
    mask = recurrent_mask(succ)
    out = set()
    for code in np.flatnonzero(mask):
        digits = []
        c = int(code)
        for _ in range(P):
            c, d = divmod(c, ca.alphabet)
            digits.append(d)
        out.add(PeriodicConfiguration(ca.alphabet, tuple(reversed(digits))))
    return out
