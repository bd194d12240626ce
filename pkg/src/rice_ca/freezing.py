"""Strongly freezing words and the compression code xi : L_k(Sigma) x C -> E.

A word is strongly freezing when it has no border (no proper suffix equal
to a prefix).  A set of equal-length words is strongly freezing when no
member overlaps a member (itself included) at a nonzero offset.  Such sets
let a reader find codeword boundaries without ambiguity.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from .ca_core import DomainError, Word, _kv_lines, format_word, parse_word
from .lang_lab import RankedLanguage, Sft, language_slice


# ------------------------------------------------------------------ words

def is_strongly_freezing_word(u) -> bool:
    u = tuple(u)
    if not u:
        raise DomainError("empty word")
    n = len(u)
    return all(u[i:] != u[:n - i] for i in range(1, n))


def overlap_offsets(a, b):
    """Offsets i in [1, n) at which b placed i cells after a agrees with a."""
    n = len(a)
    return [i for i in range(1, n) if a[i:] == b[:n - i]]


def is_strongly_freezing_set(E, sample: int | None = None, seed: int = 0):
    """Check that no word of E overlaps a word of E at an offset in [1, n).

    Exhaustive by default: every proper suffix of every word is looked up in
    an index of prefixes.  With ``sample`` set, that many random ordered pairs
    are checked at every offset instead.  Returns ``(ok, violations,
    checked)`` where violations are ``(a, b, offset)`` triples.
    """
    E = [tuple(w) for w in E]
    if not E:
        return True, [], 0
    n = len(E[0])
    if any(len(w) != n for w in E):
        raise DomainError("words of a freezing set must share one length")
    violations = []
    if sample is None:
        prefixes = {}
        for w in E:
            for L in range(1, n):
                prefixes.setdefault(w[:L], []).append(w)
        for a in E:
            for i in range(1, n):
                for b in prefixes.get(a[i:], ()):
                    violations.append((a, b, i))
        return not violations, violations, len(E) * len(E)
    rng = random.Random(seed)
    for _ in range(sample):
        a, b = E[rng.randrange(len(E))], E[rng.randrange(len(E))]
        for i in overlap_offsets(a, b):
            violations.append((a, b, i))
    return not violations, violations, sample


def extend_strongly_freezing(u) -> Word:
    """Return u if unbordered, else u b^c with b = 1 - u[0] and c minimal."""
    u = tuple(u)
    if not u:
        raise DomainError("empty word")
    if is_strongly_freezing_word(u):
        return u
    b = 1 - u[0]
    c = 1
    while True:
        w = u + (b,) * c
        if is_strongly_freezing_word(w):
            return w
        c += 1


# ---------------------------------------------------------- symbol coding

@dataclass(frozen=True)
class SymbolCoding:
    """C = A x B written in l bits, index a * |B| + b, most significant bit first."""
    size_a: int
    size_b: int

    @property
    def size(self) -> int:
        return self.size_a * self.size_b

    @property
    def width(self) -> int:
        return max(1, math.ceil(math.log2(self.size))) if self.size > 1 else 1

    def index(self, a: int, b: int) -> int:
        if not (0 <= a < self.size_a and 0 <= b < self.size_b):
            raise DomainError("symbol outside C")
        return a * self.size_b + b

    def pair(self, c: int):
        return divmod(c, self.size_b)

    def bits(self, c: int) -> Word:
        if not 0 <= c < self.size:
            raise DomainError("symbol outside C")
        return tuple((c >> (self.width - 1 - j)) & 1 for j in range(self.width))

    def from_bits(self, bits) -> int:
        c = 0
        for x in bits:
            c = 2 * c + x
        if c >= self.size:
            raise DomainError("bit pattern codes no symbol")
        return c


def int_to_bits(v: int, n: int) -> Word:
    if v < 0 or v >= 1 << n:
        raise DomainError(f"{v} does not fit in {n} bits")
    return tuple((v >> (n - 1 - j)) & 1 for j in range(n))


def bits_to_int(bits) -> int:
    v = 0
    for x in bits:
        v = 2 * v + x
    return v


# ------------------------------------------------------------------ code

@dataclass(eq=False)
class FreezingCode:
    sigma: Sft
    u_sigma: Word
    delimiter: Word | None
    k: int
    coding: SymbolCoding
    mode: str
    m: int | None = None
    n: int | None = None
    ranked: RankedLanguage | None = None
    z_pool: tuple = ()
    table: dict = field(default_factory=dict)   # toy: (z_index, c) -> codeword

    def __post_init__(self):
        self._rev = {w: key for key, w in self.table.items()}
        self._z_index = {z: i for i, z in enumerate(self.z_pool)}

    @property
    def l(self):
        return self.coding.width

    # -- encode / decode
    def encode(self, z, v: int) -> Word:
        z = tuple(z)
        if len(z) != self.k or not self.sigma.contains(z):
            raise DomainError("z must be a word of L_k(Sigma)")
        if self.mode == "toy":
            if z not in self._z_index:
                raise DomainError("z is not in the pool of this toy code")
            return self.table[(self._z_index[z], v)]
        self.coding.bits(v)
        u, half = self.delimiter, self.m * len(self.delimiter)
        payload = int_to_bits(self.ranked.rank(z[half:]), self.n)
        return u + z[:half] + payload + self.coding.bits(v) + u

    def decode(self, w):
        w = tuple(w)
        if self.mode == "toy":
            key = self._rev.get(w)
            if key is None:
                raise DomainError("not a codeword")
            return self.z_pool[key[0]], key[1]
        if len(w) != self.k:
            raise DomainError("codeword has wrong length")
        u, half = self.delimiter, self.m * len(self.delimiter)
        lu = len(u)
        if w[:lu] != u or w[self.k - lu:] != u:
            raise DomainError("codeword lacks its delimiters")
        z1 = w[lu:lu + half]
        rank = bits_to_int(w[lu + half:lu + half + self.n])
        if rank >= self.ranked.count:
            raise DomainError("rank payload out of range")
        v = self.coding.from_bits(w[lu + half + self.n:self.k - lu])
        z = z1 + self.ranked.unrank(rank)
        if not self.sigma.contains(z):
            raise DomainError("decoded z leaves Sigma")
        return z, v

    def lookup(self, w):
        """(z, v) if w is a codeword, else None."""
        if self.mode == "toy":
            key = self._rev.get(tuple(w))
            return None if key is None else (self.z_pool[key[0]], key[1])
        try:
            return self.decode(w)
        except DomainError:
            return None

    def codewords(self):
        if self.mode != "toy":
            raise DomainError("formula-mode codes are not materialised")
        return sorted(self.table.values())

    def sample_codeword(self, rng: random.Random, full: RankedLanguage | None = None):
        if self.mode == "toy":
            key = rng.choice(sorted(self.table))
            return self.table[key]
        if full is None:
            full = language_slice(self.sigma, self.k)
        z = full.unrank(rng.randrange(full.count))
        return self.encode(z, rng.randrange(self.coding.size))


def formula_parameters(u_len: int, l: int):
    """Smallest m with 2^(m|u|-2|u|-l) >= (2^|u|-1)^m, checked with exact integers."""
    if u_len < 1 or l < 1:
        raise DomainError("need |u| >= 1 and l >= 1")
    base = (1 << u_len) - 1
    m = 1
    while True:
        n = m * u_len - 2 * u_len - l
        if n >= 0 and (1 << n) >= base ** m:
            return m, n, 2 * m * u_len
        m += 1
        if m > 10 ** 6:
            raise DomainError("parameter search overflow")


def m_bound(u_len: int, l: int) -> float:
    """The real-valued lower bound on m, logarithm in base 2."""
    return (2 * u_len + l) / (u_len - math.log2(2 ** u_len - 1))


def build_code(u_sigma, coding: SymbolCoding) -> FreezingCode:
    u_sigma = parse_word(u_sigma) if isinstance(u_sigma, str) else tuple(u_sigma)
    sigma = Sft(2, (u_sigma,))
    if language_slice(sigma, max(1, 2 * len(u_sigma))).count == 0:
        raise DomainError("Sigma is empty")
    u_e = extend_strongly_freezing(u_sigma)
    m, n, k = formula_parameters(len(u_e), coding.width)
    ranked = language_slice(sigma, m * len(u_e))
    if not (1 << n) >= ((1 << len(u_e)) - 1) ** m >= ranked.count:
        raise DomainError("counting inequality fails")
    return FreezingCode(sigma, u_sigma, u_e, k, coding, "formula", m=m, n=n, ranked=ranked)


# ------------------------------------------------------------- toy search

def _toy_candidates(sigma: Sft, k: int, marker):
    out = []
    m = len(marker)
    for v in range(1 << (k - m)):
        w = marker + int_to_bits(v, k - m)
        if not sigma.contains(w) and is_strongly_freezing_word(w):
            out.append(w)
    return out


def _independent_set(cands, need, budget):
    """Pick ``need`` mutually non-overlapping words (greedy by degree, then DFS)."""
    n = len(cands[0]) if cands else 0
    prefixes = {}
    for j, w in enumerate(cands):
        for L in range(1, n):
            prefixes.setdefault(w[:L], []).append(j)
    conflicts = [set() for _ in cands]
    for j, a in enumerate(cands):
        for i in range(1, n):
            for b in prefixes.get(a[i:], ()):
                conflicts[j].add(b)
                conflicts[b].add(j)
    order = sorted(range(len(cands)), key=lambda j: (len(conflicts[j]), cands[j]))
    chosen, blocked = [], [0] * len(cands)
    nodes = [0]

    def dfs(pos):
        if len(chosen) == need:
            return True
        nodes[0] += 1
        if nodes[0] > budget:
            return False
        free = sum(1 for j in order[pos:] if not blocked[j])
        if len(chosen) + free < need:
            return False
        for p in range(pos, len(order)):
            j = order[p]
            if blocked[j] or j in conflicts[j]:
                continue
            chosen.append(j)
            for c in conflicts[j]:
                blocked[c] += 1
            if dfs(p + 1):
                return True
            for c in conflicts[j]:
                blocked[c] -= 1
            chosen.pop()
            if nodes[0] > budget:
                return False
        return False

    dfs(0)
    return [cands[j] for j in chosen] if len(chosen) == need else None


def search_toy_code(sigma: Sft, z_pool, coding: SymbolCoding, k: int,
                    marker=None, budget: int = 200_000) -> FreezingCode:
    """Search a strongly freezing E of size |z_pool| * |C| outside L_k(Sigma).

    Candidates are unbordered words of length k that contain a forbidden
    pattern of Sigma.  They are restricted to a common prefix ``marker``
    (default: try 0^a 1 and 1^a 0 for growing a, then no prefix at all when
    k is small), which keeps the conflict graph sparse; the choice itself is
    a DFS over the conflict graph.
    """
    z_pool = tuple(tuple(z) for z in z_pool)
    if any(len(z) != k or not sigma.contains(z) for z in z_pool):
        raise DomainError("z_pool must lie in L_k(Sigma)")
    need = len(z_pool) * coding.size
    outside = (1 << k) - language_slice(sigma, k).count
    if need > outside:
        raise DomainError(f"pigeonhole: {need} codewords needed, only {outside} words outside L_k(Sigma)")
    if marker is not None:
        markers = [parse_word(marker) if isinstance(marker, str) else tuple(marker)]
    else:
        markers = []
        for a in range(1, k - 1):
            markers += [(0,) * a + (1,), (1,) * a + (0,)]
        if k <= 12:
            markers.append(())
    best = None
    for mk in markers:
        cands = _toy_candidates(sigma, k, mk)
        if len(cands) < need:
            continue
        E = _independent_set(cands, need, budget)
        if E is not None:
            best = (mk, sorted(E))
            break
    if best is None:
        raise DomainError(f"no strongly freezing code with {need} words at k={k}")
    mk, E = best
    ok, viol, _ = is_strongly_freezing_set(E)
    if not ok:
        a, b, i = viol[0]
        raise DomainError(f"overlap {format_word(a)} / {format_word(b)} at offset {i}")
    keys = [(zi, c) for zi in range(len(z_pool)) for c in range(coding.size)]
    table = dict(zip(keys, E))
    return FreezingCode(sigma, sigma.forbidden[0], None, k, coding, "toy",
                        z_pool=z_pool, table=table)


# -------------------------------------------------------------- file format

def code_to_text(code: FreezingCode) -> str:
    lines = [f"mode: {code.mode}", f"u_sigma: {format_word(code.u_sigma)}",
             f"u_E: {format_word(code.delimiter) if code.delimiter else '-'}",
             f"m: {code.m if code.m is not None else '-'}",
             f"n: {code.n if code.n is not None else '-'}",
             f"l: {code.l}", f"k: {code.k}",
             f"C: {code.coding.size_a} {code.coding.size_b}"]
    for c in range(code.coding.size):
        a, b = code.coding.pair(c)
        lines.append(f"symbol: {c} {a} {b} {format_word(code.coding.bits(c))}")
    if code.mode == "toy":
        for i, z in enumerate(code.z_pool):
            lines.append(f"zpool: {i} {format_word(z)}")
        for (zi, c), w in sorted(code.table.items()):
            lines.append(f"codeword: {zi} {c} {format_word(w)}")
    return "\n".join(lines) + "\n"


def code_from_text(text: str) -> FreezingCode:
    kv = _kv_lines(text)
    d = {}
    pool, table = {}, {}
    for key, v in kv:
        if key == "zpool":
            i, z = v.split()
            pool[int(i)] = parse_word(z)
        elif key == "codeword":
            zi, c, w = v.split()
            table[(int(zi), int(c))] = parse_word(w)
        elif key != "symbol":
            d[key] = v
    try:
        u_sigma = parse_word(d["u_sigma"])
        sa, sb = map(int, d["C"].split())
        mode = d["mode"]
    except KeyError as e:
        raise DomainError(f"code file lacks {e}") from None
    coding = SymbolCoding(sa, sb)
    if mode == "formula":
        code = build_code(u_sigma, coding)
        if code.k != int(d["k"]):
            raise DomainError("code file parameters disagree with the formula")
        return code
    sigma = Sft(2, (u_sigma,))
    z_pool = tuple(pool[i] for i in sorted(pool))
    return FreezingCode(sigma, u_sigma, None, int(d["k"]), coding, "toy",
                        z_pool=z_pool, table=table)


def load_code(path) -> FreezingCode:
    return code_from_text(Path(path).read_text())


def save_code(code: FreezingCode, path) -> None:
    Path(path).write_text(code_to_text(code))
