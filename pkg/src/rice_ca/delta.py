"""Compilation of (G, N, S, code) into the binary automaton Delta, and the reduction.

Delta reads a window of radius r = (r_S + 1) k - 1 and distinguishes four
situations, in this priority:

1. SIGMA: the window avoids u_Sigma, so the cell simply applies G.
2. UNFREEZE: the cell lies in a codeword flanked by r_S codewords on each
   side and that codeword carries the firing state gamma; the cell outputs
   its bit of the stored z-block.
3. SIMULATE: same context, the squad state is neither gamma nor kappa and
   the N state is not theta; the codeword is rewritten with the z-block
   unchanged and (N, S) advanced one step on the decoded neighbourhood.
4. KILL: everything else outputs 0.

The codeword context is located by scanning the k possible alignments of
a block of 2 r_S + 1 codewords covering the cell.  Because the code is
strongly freezing at most one alignment can match.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from .ca_core import (CellularAutomaton, DomainError, PeriodicConfiguration, _kv_lines,
                      eca, is_quiescent, is_spreading, load_rule, pad_radius, power,
                      register_proc, save_rule, Word)
from .freezing import FreezingCode, SymbolCoding, build_code, load_code, save_code, search_toy_code
from .lang_lab import Sft, is_surjective, recurrent_periodic, shortest_orphan
from .squad import SquadAutomaton, build_squad, firing_time, load_squad, seed_segment


class Case(enum.IntEnum):
    SIGMA = 1
    UNFREEZE = 2
    SIMULATE = 3
    KILL = 4


@dataclass(frozen=True)
class CaseTag:
    case: Case
    offset: int | None = None      # start i of the codeword block inside the window
    cell: int | None = None        # position of the cell inside the central codeword
    z: Word | None = None          # z-block of the central codeword
    v: Word | None = None          # N states of the 2 r_S + 1 codewords
    w: Word | None = None          # squad states of the 2 r_S + 1 codewords


MUTATIONS = (None, "kill-one", "rotate-simulate", "flip-unfreeze")


@dataclass(frozen=True, eq=False)
class PartialCa:
    """A binary CA G whose rule is only consulted on windows of L(Sigma)."""
    base: CellularAutomaton
    domain: Sft

    def __post_init__(self):
        if self.base.alphabet != 2 or not self.base.is_table:
            raise DomainError("G must be a binary table rule")

    @property
    def radius(self):
        return self.base.radius

    def local(self, window) -> int:
        if not self.domain.contains(window):
            raise DomainError("window outside L(Sigma)")
        return self.base.local(window)


@dataclass(frozen=True, eq=False)
class DeltaAutomaton:
    g: PartialCa
    n_ca: CellularAutomaton
    theta: int
    squad: SquadAutomaton
    code: FreezingCode
    mutation: str | None = None
    params: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.code.k

    @property
    def r_s(self) -> int:
        return self.n_ca.radius

    @property
    def radius(self) -> int:
        return (self.r_s + 1) * self.k - 1

    @property
    def u(self) -> Word:
        return self.code.u_sigma

    @cached_property
    def ca(self) -> CellularAutomaton:
        return CellularAutomaton(2, self.radius, proc=self.local, proc_name="delta",
                                 params=dict(self.params), stepper=self.step_cells)

    def delta_n(self, v) -> int:
        return self.n_ca.local(v)

    def delta_s(self, w) -> int:
        return self.squad.ca.local(w)

    # -- core evaluation on an arbitrary sequence with precomputed lookups
    def _scan(self, ext):
        """Codeword lookup and u-occurrence prefix sums along ``ext``."""
        k, u = self.k, self.u
        lu = len(u)
        look = self.code.lookup
        ue = self.code.delimiter
        if ue is None:
            cw = [look(ext[s:s + k]) for s in range(len(ext) - k + 1)]
        else:
            # formula codewords start and end with u_E; only those starts are decoded
            le = len(ue)
            cw = [look(ext[s:s + k]) if ext[s:s + le] == ue and ext[s + k - le:s + k] == ue
                  else None for s in range(len(ext) - k + 1)]
        occ = [0]
        for s in range(len(ext) - lu + 1):
            occ.append(occ[-1] + (tuple(ext[s:s + lu]) == u))
        return cw, occ

    def _classify(self, ext, p, cw, occ) -> CaseTag:
        r, k, rs = self.radius, self.k, self.r_s
        lu = len(self.u)
        lo, hi = p - r, p + r - lu + 1          # u starts that fit in the window
        if occ[hi + 1] - occ[lo] == 0:
            return CaseTag(Case.SIGMA)
        ncw = len(cw)
        for i in range(k):
            start = p - r + i
            blocks = []
            for t in range(2 * rs + 1):
                s = start + t * k
                d = cw[s] if 0 <= s < ncw else None
                if d is None:
                    break
                blocks.append(d)
            else:
                pairs = [self.code.coding.pair(c) for _, c in blocks]
                v = tuple(a for a, _ in pairs)
                w = tuple(b for _, b in pairs)
                z = blocks[rs][0]
                cell = p - (start + rs * k)
                if w[rs] == self.squad.gamma:
                    return CaseTag(Case.UNFREEZE, i, cell, z, v, w)
                if v[rs] != self.theta and w[rs] not in (self.squad.gamma, self.squad.kappa):
                    return CaseTag(Case.SIMULATE, i, cell, z, v, w)
                return CaseTag(Case.KILL, i, cell, z, v, w)
        return CaseTag(Case.KILL)

    def _output(self, ext, p, tag: CaseTag) -> int:
        mut = self.mutation
        if tag.case == Case.SIGMA:
            rg = self.g.radius
            return self.g.base.local(ext[p - rg:p + rg + 1])
        if tag.case == Case.UNFREEZE:
            bit = tag.z[tag.cell]
            return 1 - bit if mut == "flip-unfreeze" else bit
        if tag.case == Case.SIMULATE:
            c = self.code.coding.index(self.delta_n(tag.v), self.delta_s(tag.w))
            word = self.code.encode(tag.z, c)
            j = tag.cell
            if mut == "rotate-simulate":
                j = (j - 1) % self.k
            return word[j]
        return 1 if mut == "kill-one" else 0

    def classify_window(self, y) -> CaseTag:
        y = tuple(y)
        if len(y) != 2 * self.radius + 1:
            raise DomainError(f"window must have length {2 * self.radius + 1}")
        cw, occ = self._scan(y)
        return self._classify(y, self.radius, cw, occ)

    def local(self, y) -> int:
        y = tuple(y)
        cw, occ = self._scan(y)
        tag = self._classify(y, self.radius, cw, occ)
        return self._output(y, self.radius, tag)

    def apply(self, w) -> Word:
        """Image of a finite word (length >= 2r + 1), shorter by 2r."""
        w = tuple(w)
        r = self.radius
        if len(w) < 2 * r + 1:
            raise DomainError("word shorter than the window")
        cw, occ = self._scan(w)
        return tuple(self._output(w, p, self._classify(w, p, cw, occ))
                     for p in range(r, len(w) - r))

    def apply_tags(self, w):
        w = tuple(w)
        r = self.radius
        cw, occ = self._scan(w)
        return [self._classify(w, p, cw, occ) for p in range(r, len(w) - r)]

    def step_cells(self, cells) -> Word:
        P = len(cells)
        r = self.radius
        reps = -(-r // P)
        ext = tuple(cells) * (2 * reps + 1)
        start = reps * P - r
        return self.apply(ext[start:start + P + 2 * r])

    def step(self, x: PeriodicConfiguration) -> PeriodicConfiguration:
        return PeriodicConfiguration(2, self.step_cells(x.cells))

    def mutant(self, mutation: str) -> "DeltaAutomaton":
        if mutation not in MUTATIONS:
            raise DomainError(f"unknown mutation {mutation!r}")
        return DeltaAutomaton(self.g, self.n_ca, self.theta, self.squad, self.code, mutation,
                              dict(self.params))

    # -- encoding helpers
    def encode_tracks(self, z_blocks, v, w) -> Word:
        """Concatenate xi(z_i, (v_i, w_i)) over the blocks."""
        if not len(z_blocks) == len(v) == len(w):
            raise DomainError("track lengths differ")
        out = ()
        for z, a, b in zip(z_blocks, v, w):
            out += self.code.encode(z, self.code.coding.index(a, b))
        return out

    def decode_tracks(self, cells):
        """Inverse of encode_tracks for a block-aligned word."""
        k = self.k
        if len(cells) % k:
            raise DomainError("length is not a multiple of k")
        zs, vs, ws = [], [], []
        for s in range(0, len(cells), k):
            z, c = self.code.decode(cells[s:s + k])
            a, b = self.code.coding.pair(c)
            zs.append(z)
            vs.append(a)
            ws.append(b)
        return zs, tuple(vs), tuple(ws)


def classify_window(d: DeltaAutomaton, y) -> CaseTag:
    return d.classify_window(y)


def build_delta(g: PartialCa, n_ca: CellularAutomaton, squad: SquadAutomaton, code: FreezingCode,
                theta: int = 0, mutation: str | None = None, params=None) -> DeltaAutomaton:
    r_s = max(n_ca.radius, squad.ca.radius)
    if n_ca.radius < r_s:
        n_ca = pad_radius(n_ca, r_s)
    if squad.ca.radius < r_s:
        squad = SquadAutomaton(pad_radius(squad.ca, r_s), squad.names, squad.gamma, squad.kappa,
                               squad.quiet, squad.general, squad.wall)
    if g.radius >= r_s * code.k:
        raise DomainError("radius of G must be below r_S * k")
    if (code.coding.size_a, code.coding.size_b) != (n_ca.alphabet, squad.n_states):
        raise DomainError("code symbols must be pairs (N state, squad state)")
    if not 0 <= theta < n_ca.alphabet or not is_spreading(n_ca, theta):
        raise DomainError("theta must be a spreading state of N")
    if g.domain.forbidden != (code.u_sigma,):
        raise DomainError("G's domain must be the subshift avoiding the code's u_Sigma")
    if mutation not in MUTATIONS:
        raise DomainError(f"unknown mutation {mutation!r}")
    return DeltaAutomaton(g, n_ca, theta, squad, code, mutation, dict(params or {}))


# ------------------------------------------------------------------ Lambda

def codeword_starts(d: DeltaAutomaton, cells) -> list:
    """Cyclic start positions of codewords in a periodic configuration."""
    P, k = len(cells), d.k
    ext = tuple(cells) * (-(-k // P) + 1)
    return [s for s in range(P) if d.code.lookup(ext[s:s + k]) is not None]


def is_lambda(d: DeltaAutomaton, x: PeriodicConfiguration) -> bool:
    """True iff x is, up to rotation, a run of aligned codewords and zeros elsewhere."""
    cells = x.cells
    P, k = len(cells), d.k
    starts = codeword_starts(d, cells)
    if not starts:
        return all(c == 0 for c in cells)
    m = len(starts)
    if m * k > P:
        return False
    sset = set(starts)
    # the run begins at a start whose predecessor (s - k) is not a start,
    # unless the run covers the whole period
    heads = [s for s in starts if (s - k) % P not in sset]
    if not heads:
        if m * k != P:
            return False
        head = starts[0]
    elif len(heads) != 1:
        return False
    else:
        head = heads[0]
    if {(head + t * k) % P for t in range(m)} != sset:
        return False
    covered = {(head + j) % P for j in range(m * k)}
    return all(cells[i] == 0 for i in range(P) if i not in covered)


def in_sigma(d: DeltaAutomaton, x: PeriodicConfiguration) -> bool:
    P, lu = x.period, len(d.u)
    ext = x.cells * (-(-lu // P) + 1)
    return all(ext[s:s + lu] != d.u for s in range(P))


# -------------------------------------------------------------- reduction

def complement_ca(ca: CellularAutomaton) -> CellularAutomaton:
    """Conjugate of a binary table rule by bitwise complement."""
    if ca.alphabet != 2 or not ca.is_table:
        raise DomainError("complement needs a binary table rule")
    n = len(ca.table)
    return CellularAutomaton(2, ca.radius, table=bytes(1 - ca.table[n - 1 - i] for i in range(n)))


def square_quiescent(g: CellularAutomaton):
    """(g or g^2, q) where q is a quiescent state, preferring 0."""
    if g.alphabet != 2:
        raise DomainError("binary rules only")
    for h in (g, power(g, 2)):
        for q in (0, 1):
            if is_quiescent(h, q):
                return h, q
    raise AssertionError("the square of a binary rule always has a quiescent state")


@dataclass(frozen=True, eq=False)
class ReductionInstance:
    g0: CellularAutomaton
    g1: CellularAutomaton
    n_ca: CellularAutomaton
    theta: int
    squad: SquadAutomaton
    q: int
    complemented: bool
    u0: Word
    u1: Word
    u_sigma: Word
    sigma: Sft
    code: FreezingCode
    f0: DeltaAutomaton
    f1: DeltaAutomaton

    def f(self, which: int) -> DeltaAutomaton:
        if which not in (0, 1):
            raise DomainError("which must be 0 or 1")
        return self.f1 if which else self.f0

    def g(self, which: int) -> CellularAutomaton:
        return self.g1 if which else self.g0


def random_window(rng: random.Random, d: DeltaAutomaton, length: int) -> Word:
    """A window drawn from a mixture aimed at all four cases.

    Families: uniform bits; sparse bits; an aligned run of random codewords
    at a random offset padded with noise; the same with a few flipped bits;
    a run of codewords with the squad track forced to gamma.
    """
    fam = rng.randrange(5)
    if fam == 0:
        return tuple(rng.randrange(2) for _ in range(length))
    if fam == 1:
        return tuple(int(rng.random() < 0.08) for _ in range(length))
    k = d.k
    gamma = d.squad.gamma if fam == 4 else None
    blocks = ()
    while len(blocks) < length + k:
        z, c = d.code.decode(d.code.sample_codeword(rng))
        if gamma is not None:
            c = d.code.coding.index(d.code.coding.pair(c)[0], gamma)
        blocks += d.code.encode(z, c)
    seq = tuple(rng.randrange(2) for _ in range(k)) + blocks
    s0 = rng.randrange(2 * k)
    w = list(seq[s0:s0 + length])
    if fam == 3:
        for _ in range(rng.randrange(1, 4)):
            w[rng.randrange(length)] ^= 1
    return tuple(w)


def check_agreement(f0: DeltaAutomaton, f1: DeltaAutomaton, samples: int, seed: int = 0):
    """Sampled windows outside SIGMA where f0 and f1 disagree."""
    rng = random.Random(seed)
    L = 2 * f0.radius + 1
    bad = []
    for _ in range(samples):
        y = random_window(rng, f0, L)
        if f0.classify_window(y).case == Case.SIGMA:
            continue
        a, b = f0.local(y), f1.local(y)
        if a != b:
            bad.append((y, a, b))
    return bad


def build_reduction_pair(g0: CellularAutomaton, g1: CellularAutomaton, n_ca: CellularAutomaton,
                         squad: SquadAutomaton | None = None, code_mode: str = "toy",
                         theta: int = 0, k: int = 15, z_pool=None, code: FreezingCode | None = None,
                         check_samples: int = 500) -> ReductionInstance:
    squad = squad or build_squad()
    if g0.alphabet != 2 or g1.alphabet != 2:
        raise DomainError("G0 and G1 must be binary")
    for g in (g0, g1):
        if is_surjective(g):
            raise DomainError("G0 and G1 must be nonsurjective")
    shared = [q for q in (0, 1) if is_quiescent(g0, q) and is_quiescent(g1, q)]
    if not shared:
        raise DomainError("G0 and G1 share no quiescent state")
    q = shared[0]
    complemented = q == 1
    if complemented:
        g0, g1 = complement_ca(g0), complement_ca(g1)
    u0, u1 = shortest_orphan(g0), shortest_orphan(g1)
    u = (1,) + u0 + u1 + (1,)
    sigma = Sft(2, (u,))
    coding = SymbolCoding(n_ca.alphabet, squad.n_states)
    if code is None:
        if code_mode == "toy":
            pool = [tuple(z) for z in z_pool] if z_pool is not None else [(0,) * k]
            code = search_toy_code(sigma, pool, coding, k)
        elif code_mode == "formula":
            code = build_code(u, coding)
        else:
            raise DomainError(f"unknown code mode {code_mode!r}")
    elif code.u_sigma != u:
        raise DomainError("supplied code was built for another u_Sigma")
    f0 = build_delta(PartialCa(g0, sigma), n_ca, squad, code, theta)
    f1 = build_delta(PartialCa(g1, sigma), n_ca, squad, code, theta)
    if check_samples:
        bad = check_agreement(f0, f1, check_samples, seed=0)
        if bad:
            raise AssertionError("F0 and F1 disagree outside case (1)")
    return ReductionInstance(g0, g1, n_ca, theta, squad, q, complemented, u0, u1, u, sigma,
                             code, f0, f1)


# ------------------------------------------------------------- nilpotency

@dataclass(frozen=True)
class NilVerdict:
    kind: str                       # nilpotent | non_nilpotent | inconclusive
    t: int | None = None
    witness: PeriodicConfiguration | None = None

    def __str__(self):
        if self.kind == "nilpotent":
            return f"nilpotent({self.t})"
        if self.kind == "non_nilpotent":
            return f"non_nilpotent(inf {self.witness} inf)"
        return "inconclusive"


def nilpotency_probe(n_ca: CellularAutomaton, theta: int, width: int, depth: int,
                     budget: int = 1 << 20) -> NilVerdict:
    """Bounded search for either nilpotency or a theta-free cycle.

    With theta spreading, N is nilpotent iff every configuration eventually
    shows theta somewhere; a theta-free periodic cycle refutes it, and
    N^t sending every window to theta proves it.
    """
    if not is_spreading(n_ca, theta):
        raise DomainError("theta is not spreading")
    A, r = n_ca.alphabet, n_ca.radius
    for t in range(1, depth + 1):
        if A ** (2 * r * t + 1) > budget:
            break
        nt = power(n_ca, t, budget=budget)
        if nt.is_table and all(b == theta for b in nt.table):
            return NilVerdict("nilpotent", t=t)
    for P in range(1, width + 1):
        if A ** P > budget:
            break
        for x in sorted(recurrent_periodic(n_ca, P), key=lambda c: c.cells):
            if theta not in x.cells:
                return NilVerdict("non_nilpotent", witness=x)
    return NilVerdict("inconclusive")


def decide_nilpotency_with_oracle(inst: ReductionInstance, oracle) -> bool:
    """The decision skeleton: N is nilpotent iff the property separates F0 from F1."""
    return bool(oracle(inst.f0.ca)) and not bool(oracle(inst.f1.ca))


# ------------------------------------------------------------ Sigma witness

def sigomeg_witness(inst: ReductionInstance, which: int, x: PeriodicConfiguration, idx: int,
                    probe_width: int = 8, probe_depth: int = 4):
    """A configuration x~ with Delta^J(x~) = x, for the idx-th admissible firing time.

    The blocks of x~ encode the k-blocks of x, a theta-free periodic N
    configuration y, and a squad seed of length n; the squad fires after
    t(n) steps, so J = t(n) + 1.  Returns (x~, J).
    """
    d = inst.f(which)
    verdict = nilpotency_probe(inst.n_ca, inst.theta, probe_width, probe_depth)
    if verdict.kind != "non_nilpotent":
        raise DomainError("N must be non-nilpotent with a known theta-free cycle")
    if x.alphabet != 2 or not in_sigma(d, x):
        raise DomainError("x must be a binary configuration of Sigma")
    y = verdict.witness
    k = d.k
    found = -1
    n = 1
    while True:
        n += 1
        blocks = n + 1
        if blocks % y.period or (blocks * k) % x.period:
            continue
        found += 1
        if found == idx:
            break
    blocks = n + 1
    cells = x.cells * ((blocks * k) // x.period)
    zs = [cells[i * k:(i + 1) * k] for i in range(blocks)]
    vs = y.cells * (blocks // y.period)
    ws = seed_segment(n, d.squad).cells
    xt = PeriodicConfiguration(2, d.encode_tracks(zs, vs, ws))
    return xt, firing_time(n) + 1


# ------------------------------------------------------------ file formats

def manifest_from_text(text: str, base: Path):
    d = dict(_kv_lines(text))
    try:
        g0 = load_rule(base / d["g0"])
        g1 = load_rule(base / d["g1"])
        n_ca = load_rule(base / d["n"])
    except KeyError as e:
        raise DomainError(f"delta manifest lacks {e}") from None
    squad = load_squad(base / d["squad"]) if d.get("squad", "builtin") != "builtin" else build_squad()
    theta = int(d.get("theta", 0))
    code = load_code(base / d["code"]) if "code" in d else None
    k = int(d.get("k", 15))
    mode = d.get("mode", "toy")
    return build_reduction_pair(g0, g1, n_ca, squad, mode, theta, k=k, code=code)


def load_instance(manifest) -> ReductionInstance:
    manifest = Path(manifest)
    return manifest_from_text(manifest.read_text(), manifest.parent)


def save_instance(inst: ReductionInstance, directory, name: str = "instance") -> Path:
    """Write rule, code and manifest files plus the two compiled proc rules."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_rule(inst.g0, directory / f"{name}.g0.rule")
    save_rule(inst.g1, directory / f"{name}.g1.rule")
    save_rule(inst.n_ca, directory / f"{name}.n.rule")
    save_code(inst.code, directory / f"{name}.code")
    man = directory / f"{name}.manifest"
    man.write_text("\n".join([
        f"g0: {name}.g0.rule", f"g1: {name}.g1.rule", f"n: {name}.n.rule",
        f"theta: {inst.theta}", "squad: builtin", f"code: {name}.code",
        f"mode: {inst.code.mode}", f"k: {inst.code.k}"]) + "\n")
    for which in (0, 1):
        d = inst.f(which)
        lines = ["alphabet: 2", f"radius: {d.radius}", "kind: proc", "proc: delta",
                 f"manifest: {man.name}", f"which: {which}"]
        (directory / f"{name}.f{which}.rule").write_text("\n".join(lines) + "\n")
    return man


@register_proc("delta")
def _load_delta_rule(d: dict, base: Path) -> CellularAutomaton:
    inst = load_instance(base / d["manifest"])
    f = inst.f(int(d.get("which", 0)))
    f = DeltaAutomaton(f.g, f.n_ca, f.theta, f.squad, f.code, f.mutation,
                       {"manifest": d["manifest"], "which": d.get("which", "0")})
    return f.ca


# ------------------------------------------------------- reference instance

REFERENCE_K = 15


def reference_instance(nilpotent: bool = False) -> ReductionInstance:
    """The desk-scale instance used by the suites.

    G0 = ECA 128 (orphan 101), G1 = ECA 0 (orphan 1), so u_Sigma = 110111;
    N = ECA 128 with theta = 0 (not nilpotent, 1^inf is theta-free), or
    ECA 0 (nilpotent) when ``nilpotent`` is set; toy code with k = 15 and
    the single z-block 0^15.
    """
    return _reference(bool(nilpotent))


_REF_CACHE: dict = {}


def _reference(nilpotent: bool) -> ReductionInstance:
    if nilpotent not in _REF_CACHE:
        n_ca = eca(0) if nilpotent else eca(128)
        _REF_CACHE[nilpotent] = build_reduction_pair(eca(128), eca(0), n_ca, build_squad(),
                                                     "toy", 0, k=REFERENCE_K)
    return _REF_CACHE[nilpotent]
