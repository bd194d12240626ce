"""A firing-squad automaton S with firing state gamma and error state kappa.

Segments are delimited by walls: the periodic configuration
``W G Q^(n-1)`` is a segment of n soldiers whose leftmost soldier is the
general.  Synchronisation is the classical recursive halving: the general
sends a fast signal (speed 1) and a slow signal (speed 1/3); the fast one
bounces off the far end and meets the slow one at the middle, where a new
pair of generals is born.  Both halves then repeat the procedure.  When
every soldier is a marked segment end and no signal is left, the segment
enters a short firing countdown PF_1 .. PF_h and then fires.

The countdown gives the error state time to spread.  A countdown cell
whose neighbourhood is not uniformly at the same countdown stage (walls
aside) is an unseen window and turns into kappa, so a firing region that is
not synchronised with its surroundings is wrapped in a kappa halo of width
h - 1 by the time it fires.

The table is derived by running the signal rules on seeds and recording
every window that occurs; all other windows map to kappa.  It is shipped
as ``data/squad.rule`` with a manifest naming the special states.
"""

from __future__ import annotations

import itertools
from collections import namedtuple
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .ca_core import (CellularAutomaton, DomainError, PeriodicConfiguration, _kv_lines,
                      eventual_cycle, rule_from_text, rule_to_text, step)

COUNTDOWN = 3
DERIVE_MAX_N = 128

# ---------------------------------------------------------------- signal rules

St = namedtuple("St", "kind mark R L bR bL SR SL")
_W = St("W", 1, 0, 0, 0, 0, None, None)
_Q = St("C", 0, 0, 0, 0, 0, None, None)
_G0 = St("C", 1, 0, 0, 1, 0, 0, None)
_GAMMA = St("gamma", 1, 0, 0, 0, 0, None, None)


def _pf(j):
    return St("PF", j, 0, 0, 0, 0, None, None)


def _is_c(s):
    return s.kind == "C"


def _quiet_marked(s):
    return s.kind == "W" or (_is_c(s) and s.mark and not (s.R or s.L or s.bR or s.bL)
                             and s.SR is None and s.SL is None)


def _fleft(s):
    return _is_c(s) and bool(s.L or s.bL)


def _fright(s):
    return _is_c(s) and bool(s.R or s.bR)


def _odd_r(s):
    return _fleft(s) and s.SR == 1


def _odd_l(s):
    return _fright(s) and s.SL == 1


def _signal_rule(a, c, b, h=COUNTDOWN):
    """Transition of the synchronisation on legitimate windows.

    R/L are fast signals in flight, bR/bL fast signals that just bounced or
    were emitted, SR/SL slow signals with a phase 0..2.  A leftward fast
    signal sharing a cell with a phase-1 slow signal is an odd split (one
    double general); a leftward fast signal one cell right of a phase-2
    slow signal is an even split (two adjacent generals).
    """
    if c.kind == "PF":
        if c.mark == h:
            return _GAMMA
        return _pf(c.mark + 1)
    if c.kind == "W":
        if a.kind == "PF" and b.kind == "PF":
            return _GAMMA if a.mark == h else _W
        return _W
    if all(_quiet_marked(s) for s in (a, c, b)):
        return _pf(1)
    gen_r = gen_l = _odd_r(c) or _odd_l(c)
    ev_r_right = _fleft(c) and _is_c(a) and a.SR == 2
    ev_r_left = _is_c(b) and _fleft(b) and c.SR == 2
    ev_l_right = _fright(a) and c.SL == 2
    ev_l_left = _fright(c) and _is_c(b) and b.SL == 2
    gen_r |= ev_r_right or ev_l_right
    gen_l |= ev_r_left or ev_l_left
    R = _is_c(a) and bool(a.bR or (a.R and not a.mark)) and not _odd_l(a) and not ev_l_right
    L = _is_c(b) and bool(b.bL or (b.L and not b.mark)) and not _odd_r(b) and not ev_r_left
    bL = bool(c.R) and bool(c.mark or b.kind == "W") and not ev_l_left
    bR = bool(c.L) and bool(c.mark or a.kind == "W") and not ev_r_right
    mark = bool(c.mark or (c.R and b.kind == "W") or (c.L and a.kind == "W"))
    SR = c.SR + 1 if c.SR is not None and c.SR < 2 and not _odd_r(c) else None
    if _is_c(a) and a.SR == 2 and not ev_r_right:
        SR = 0
    SL = c.SL + 1 if c.SL is not None and c.SL < 2 and not _odd_l(c) else None
    if _is_c(b) and b.SL == 2 and not ev_l_right and not ev_l_left:
        SL = 0
    if ev_l_left:
        SL = None
    if gen_r or gen_l:
        fresh = not c.mark
        mark = True
        if fresh and gen_r:
            bR, SR = True, 0
        if fresh and gen_l:
            bL, SL = True, 0
    return St("C", int(mark), int(R), int(L), int(bR), int(bL), SR, SL)


def _state_name(s) -> str:
    if s.kind == "W":
        return "wall"
    if s.kind == "PF":
        return f"pf{s.mark}"
    if s.kind == "gamma":
        return "gamma"
    if s == _Q:
        return "quiet"
    if s == _G0:
        return "general"
    flags = "".join(ch for ch, v in zip("MRLrl", (s.mark, s.R, s.L, s.bR, s.bL)) if v)
    sr = "" if s.SR is None else f"s{s.SR}"
    sl = "" if s.SL is None else f"z{s.SL}"
    return "c" + flags + sr + sl


def derive_table(max_n: int = DERIVE_MAX_N, h: int = COUNTDOWN):
    """Run seeds n = 2..max_n and collect the legitimate windows.

    Returns (state names, rule table bytes, firing times).  State order:
    quiet, general, wall, then the remaining synchronisation states sorted
    by name, the countdown states, gamma and kappa last.
    """
    seen = {}
    times = {}
    for n in range(2, max_n + 1):
        x = [_W, _G0] + [_Q] * (n - 1)
        P = len(x)
        for t in range(1, 4 * n + h + 2):
            y = []
            for i in range(P):
                w = (x[i - 1], x[i], x[(i + 1) % P])
                o = _signal_rule(*w, h=h)
                if seen.setdefault(w, o) != o:
                    raise AssertionError("signal rule is not a function of the window")
                y.append(o)
            x = y
            if all(s == _GAMMA for s in x):
                times[n] = t
                break
        else:
            raise AssertionError(f"segment of length {n} did not fire")
    states = {s for w in seen for s in w} | set(seen.values())
    fixed = [_Q, _G0, _W]
    pfs = [_pf(j) for j in range(1, h + 1)]
    rest = sorted((s for s in states if s not in fixed and s not in pfs and s != _GAMMA),
                  key=_state_name)
    order = fixed + rest + pfs + [_GAMMA]
    names = [_state_name(s) for s in order] + ["kappa"]
    idx = {s: i for i, s in enumerate(order)}
    nb = len(names)
    gamma, kappa = idx[_GAMMA], nb - 1
    table = bytearray([kappa]) * (nb ** 3)
    for (a, c, b), o in seen.items():
        table[(idx[a] * nb + idx[c]) * nb + idx[b]] = idx[o]
    table[(gamma * nb + gamma) * nb + gamma] = gamma
    return names, bytes(table), times


# ------------------------------------------------------------------ automaton

@dataclass(frozen=True, eq=False)
class SquadAutomaton:
    ca: CellularAutomaton
    names: tuple
    gamma: int
    kappa: int
    quiet: int
    general: int
    wall: int

    @property
    def n_states(self):
        return self.ca.alphabet

    def symbol(self, name: str) -> int:
        return self.names.index(name)

    def legit_windows(self):
        """Windows whose image is neither kappa nor produced by the gamma fixed point."""
        nb = self.n_states
        tab = self.ca.table
        out = []
        for i, o in enumerate(tab):
            if o != self.kappa:
                w = (i // (nb * nb), (i // nb) % nb, i % nb)
                out.append((w, o))
        return out


def manifest_text(names, gamma, kappa, quiet, general, wall) -> str:
    lines = ["rule: squad.rule", f"gamma: {gamma}", f"kappa: {kappa}", f"quiet: {quiet}",
             f"general: {general}", f"wall: {wall}"]
    lines += [f"state: {i} {n}" for i, n in enumerate(names)]
    return "\n".join(lines) + "\n"


def write_squad_data(directory) -> None:
    names, table, _ = derive_table()
    directory = Path(directory)
    ca = CellularAutomaton(len(names), 1, table=table)
    (directory / "squad.rule").write_text(rule_to_text(ca))
    (directory / "squad.manifest").write_text(
        manifest_text(names, names.index("gamma"), names.index("kappa"),
                      names.index("quiet"), names.index("general"), names.index("wall")))


def load_squad(manifest_path=None) -> SquadAutomaton:
    if manifest_path is None:
        base = resources.files("rice_ca") / "data"
        mtext = (base / "squad.manifest").read_text()
        rtext = (base / "squad.rule").read_text()
    else:
        manifest_path = Path(manifest_path)
        mtext = manifest_path.read_text()
        d0 = dict(_kv_lines(mtext))
        rtext = (manifest_path.parent / d0.get("rule", "squad.rule")).read_text()
    kv = _kv_lines(mtext)
    d = {k: v for k, v in kv if k != "state"}
    names = [v.split(None, 1)[1] for k, v in kv if k == "state"]
    ca = rule_from_text(rtext)
    sq = SquadAutomaton(ca, tuple(names), int(d["gamma"]), int(d["kappa"]), int(d["quiet"]),
                        int(d["general"]), int(d["wall"]))
    _validate(sq)
    return sq


def _validate(sq: SquadAutomaton) -> None:
    nb = sq.n_states
    if len(sq.names) != nb or sq.ca.radius != 1:
        raise DomainError("squad manifest does not match its rule")
    tab = sq.ca.table
    g, k = sq.gamma, sq.kappa
    for a, c, b in itertools.product(range(nb), repeat=3):
        o = tab[(a * nb + c) * nb + b]
        w = (a, c, b)
        if k in w and o != k:
            raise DomainError("kappa is not spreading")
        if g in w and any(s not in (g, k) for s in w) and o != k:
            raise DomainError("gamma next to a live state must give kappa")
    if tab[(g * nb + g) * nb + g] != g:
        raise DomainError("uniform gamma must be fixed")


@lru_cache(maxsize=None)
def build_squad() -> SquadAutomaton:
    return load_squad()


def seed_segment(n: int, squad: SquadAutomaton | None = None) -> PeriodicConfiguration:
    if n < 2:
        raise DomainError("segments need at least two soldiers")
    sq = squad or build_squad()
    return PeriodicConfiguration(sq.n_states, (sq.wall, sq.general) + (sq.quiet,) * (n - 1))


@lru_cache(maxsize=None)
def firing_time(n: int) -> int:
    sq = build_squad()
    x = seed_segment(n, sq)
    for t in range(1, 4 * n + 1):
        x = step(sq.ca, x)
        if all(c == sq.gamma for c in x.cells):
            return t
        if sq.gamma in x.cells or sq.kappa in x.cells:
            break
    raise DomainError(f"segment of length {n} does not fire cleanly within {4 * n} steps")


def validate_segments(max_n: int = 32, squad: SquadAutomaton | None = None):
    """Per segment length: (n, t(n), clean) where clean means no gamma/kappa before t(n)."""
    sq = squad or build_squad()
    out = []
    for n in range(2, max_n + 1):
        x = seed_segment(n, sq)
        clean, t_fire = True, None
        for t in range(1, 4 * n + 1):
            x = step(sq.ca, x)
            if all(c == sq.gamma for c in x.cells):
                t_fire = t
                break
            if sq.gamma in x.cells or sq.kappa in x.cells:
                clean = False
        out.append((n, t_fire, clean and t_fire is not None))
    return out


# ------------------------------------------------------------ limit checks

def _segments_config(sq, P, rng):
    """Random concatenation of seed segments of total period P (walls included)."""
    cells = []
    while len(cells) < P:
        n = int(rng.integers(2, max(3, P)))
        cells += [sq.wall, sq.general] + [sq.quiet] * (n - 1)
    return tuple(cells[:P])


def check_limit_gamma(P: int, squad: SquadAutomaton | None = None, budget: int = 1 << 22,
                      samples: int = 2000, seed: int = 0):
    """Recurrent period-P configurations containing gamma must lie in {gamma, kappa}^Z.

    Exhaustive over all |B|^P configurations when that fits the budget;
    otherwise ``samples`` configurations (half uniform, half random
    concatenations of seed segments) are driven to their cycle and every
    cycle configuration is checked, and the report is flagged as sampled.
    """
    sq = squad or build_squad()
    nb = sq.n_states
    if P < 1:
        raise DomainError("period must be positive")

    def bad(cells):
        return sq.gamma in cells and any(c not in (sq.gamma, sq.kappa) for c in cells)

    if nb ** P <= budget:
        from .lang_lab import recurrent_mask, successor_array
        succ = successor_array(sq.ca, P)
        mask = recurrent_mask(succ)
        codes = np.flatnonzero(mask)
        digits = np.stack([(codes // nb ** (P - 1 - i)) % nb for i in range(P)], axis=1)
        has_gamma = (digits == sq.gamma).any(axis=1)
        live = ~np.isin(digits, [sq.gamma, sq.kappa])
        viol = has_gamma & live.any(axis=1)
        return {"period": P, "sampled": False, "configurations": nb ** P,
                "recurrent": int(mask.sum()), "recurrent_with_gamma": int(has_gamma.sum()),
                "violations": [tuple(int(v) for v in row) for row in digits[viol]]}
    rng = np.random.default_rng(seed)
    cycles = set()
    for i in range(samples):
        if i % 2:
            cells = _segments_config(sq, P, rng)
        else:
            cells = tuple(int(v) for v in rng.integers(0, nb, P))
        summary = eventual_cycle(sq.ca, PeriodicConfiguration(nb, cells), budget=64 * P + 64)
        cycles.update(c.cells for c in summary.cycle)
    with_gamma = [c for c in cycles if sq.gamma in c]
    return {"period": P, "sampled": True, "configurations": samples, "recurrent": len(cycles),
            "recurrent_with_gamma": len(with_gamma),
            "violations": sorted(c for c in with_gamma if bad(c))}


def backward_fire_chain(distance: int, depth: int, squad: SquadAutomaton | None = None,
                        budget: int = 2_000_000):
    """Search a depth-``depth`` history ending with gamma at 0 and a live state at ``distance``.

    ``distance`` may be negative (live cell to the left of the gamma cell).

    This is the cell-level picture of a chain of codeword blocks under the
    simulating case of the compiled rule: at every time before the end,
    the cells in the backward light cones of the two target cells must be
    neither gamma nor kappa (case (3) never applies to such centres).  Cells
    outside both cones are unconstrained.

    The bottom row (time -depth) is enumerated left to right.  Each new
    bottom cell fixes one more cell on every level above, so the search
    only needs the last two cells of each level: the layers of distinct
    frontiers are explored breadth first with parent pointers for the
    witness.

    Returns a witness (list of rows, earliest first) or None; raises
    Inconclusive when a layer exceeds the budget.
    """
    from .ca_core import Inconclusive
    sq = squad or build_squad()
    nb, g, k = sq.n_states, sq.gamma, sq.kappa
    tab = sq.ca.table
    D, l = depth, distance
    if D < 1 or l == 0:
        raise DomainError("depth must be positive and distance nonzero")
    lo = min(0, l) - D
    width = abs(l) + 1 + 2 * D
    live = tuple(s for s in range(nb) if s not in (g, k))
    every = tuple(range(nb))

    def allowed(s, x, v):
        t = s - D
        if t == 0:
            if x == 0:
                return v == g
            if x == l:
                return v != g and v != k
            return True
        if abs(x) <= -t - 1 or abs(x - l) <= -t - 1:
            return v != g and v != k
        return True

    # frontier: tuple of per-level pairs (second last, last) for levels 0..D-1
    empty = tuple((None, None) for _ in range(D))
    layers = [{empty: None}]
    for j in range(width):
        x0 = lo + j
        nxt = {}
        choices = live if not allowed(0, x0, g) else every
        for f in layers[-1]:
            for v in choices:
                new = list(f)
                new[0] = (f[0][1], v)
                incoming = v
                good = True
                for s in range(1, D + 1):
                    jj = j - s
                    if jj < s:
                        break
                    a, c = f[s - 1]
                    o = tab[(a * nb + c) * nb + incoming]
                    if not allowed(s, lo + jj, o):
                        good = False
                        break
                    if s < D:
                        new[s] = (f[s][1], o)
                    incoming = o
                if good:
                    key = tuple(new)
                    if key not in nxt:
                        nxt[key] = (f, v)
                        if len(nxt) > budget:
                            raise Inconclusive(f"fire search layer exceeded {budget} frontiers")
        if not nxt:
            return None
        layers.append(nxt)
    # reconstruct the bottom row and recompute the trapezoid
    f = next(iter(layers[-1]))
    bottom = []
    for layer in reversed(layers[1:]):
        f, v = layer[f]
        bottom.append(v)
    bottom.reverse()
    rows = [bottom]
    for _ in range(D):
        r = rows[-1]
        rows.append([tab[(r[i - 1] * nb + r[i]) * nb + r[i + 1]] for i in range(1, len(r) - 1)])
    return rows
