"""One-dimensional cellular automata on periodic configurations.

Neighbourhoods are ordered lexicographically with the leftmost cell most
significant, so for elementary CA the table index of window ``abc`` is
``4a + 2b + c`` and the Wolfram rule number ``n`` gives output
``(n >> (4a + 2b + c)) & 1``.  Example: rule 128 maps only ``111`` (index 7)
to 1 because 128 = 2**7.
"""

from __future__ import annotations

import importlib
import itertools
from dataclasses import dataclass, field
from math import lcm
from pathlib import Path
from typing import Callable, Iterable, Sequence

Word = tuple  # tuple of ints, each < alphabet size

SYMBOLS = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"

DEFAULT_TABLE_BUDGET = 1 << 20


class DomainError(ValueError):
    pass


class Inconclusive(RuntimeError):
    """A search or simulation ran out of budget before reaching an answer."""


def parse_word(s: str | Sequence[int]) -> Word:
    if isinstance(s, str):
        try:
            return tuple(SYMBOLS.index(ch) for ch in s)
        except ValueError:
            raise DomainError(f"bad symbol in {s!r}") from None
    return tuple(int(c) for c in s)


def format_word(w: Iterable[int]) -> str:
    return "".join(SYMBOLS[c] for c in w)


def window_index(window: Sequence[int], alphabet: int) -> int:
    idx = 0
    for s in window:
        idx = idx * alphabet + s
    return idx


def index_window(idx: int, alphabet: int, length: int) -> Word:
    out = [0] * length
    for i in range(length - 1, -1, -1):
        idx, out[i] = divmod(idx, alphabet)
    return tuple(out)


@dataclass(frozen=True)
class PeriodicConfiguration:
    alphabet: int
    cells: Word

    def __post_init__(self):
        if not self.cells:
            raise DomainError("period must be at least 1")
        if any(not 0 <= c < self.alphabet for c in self.cells):
            raise DomainError("symbol out of range")

    @classmethod
    def from_string(cls, s: str, alphabet: int = 2) -> "PeriodicConfiguration":
        return cls(alphabet, parse_word(s))

    @property
    def period(self) -> int:
        return len(self.cells)

    def rotate(self, k: int = 1) -> "PeriodicConfiguration":
        k %= self.period
        return PeriodicConfiguration(self.alphabet, self.cells[k:] + self.cells[:k])

    def extended(self, left: int, right: int) -> Word:
        """Cells at positions -left .. period+right-1 of the periodic repetition."""
        P = self.period
        return tuple(self.cells[i % P] for i in range(-left, P + right))

    def __str__(self):
        return format_word(self.cells)


@dataclass(frozen=True)
class OrbitSummary:
    tail: int
    cycle: tuple  # of PeriodicConfiguration


@dataclass(frozen=True, eq=False)
class CellularAutomaton:
    """The triple (B, r, f).

    Either ``table`` (bytes of length alphabet**(2r+1)) or ``proc`` (a
    callable on window tuples) is set.  ``proc_name``/``params`` describe a
    procedural rule for the rule-file format; ``stepper`` is an optional fast
    global map used by ``step`` in place of the per-window loop.
    """

    alphabet: int
    radius: int
    table: bytes | None = None
    proc: Callable[[Word], int] | None = None
    proc_name: str | None = None
    params: dict = field(default_factory=dict)
    stepper: Callable[[Word], Word] | None = None

    def __post_init__(self):
        if self.alphabet < 1 or self.radius < 0:
            raise DomainError("bad alphabet or radius")
        if (self.table is None) == (self.proc is None):
            raise DomainError("exactly one of table/proc must be given")
        if self.table is not None and len(self.table) != self.alphabet ** self.width:
            raise DomainError(
                f"table needs {self.alphabet ** self.width} entries, got {len(self.table)}")

    @property
    def width(self) -> int:
        return 2 * self.radius + 1

    @property
    def is_table(self) -> bool:
        return self.table is not None

    def local(self, window: Sequence[int]) -> int:
        if self.table is not None:
            return self.table[window_index(window, self.alphabet)]
        return self.proc(tuple(window))

    def windows(self):
        return itertools.product(range(self.alphabet), repeat=self.width)

    def __repr__(self):
        kind = "table" if self.is_table else f"proc:{self.proc_name}"
        return f"CellularAutomaton(alphabet={self.alphabet}, radius={self.radius}, {kind})"


def table_ca(alphabet: int, radius: int, f: Callable[[Word], int]) -> CellularAutomaton:
    n = alphabet ** (2 * radius + 1)
    tab = bytes(f(index_window(i, alphabet, 2 * radius + 1)) for i in range(n))
    return CellularAutomaton(alphabet, radius, table=tab)


def eca(number: int) -> CellularAutomaton:
    """Elementary CA by Wolfram number."""
    if not 0 <= number < 256:
        raise DomainError("ECA number must be in 0..255")
    return CellularAutomaton(2, 1, table=bytes((number >> i) & 1 for i in range(8)))


def identity_ca(alphabet: int = 2) -> CellularAutomaton:
    return CellularAutomaton(alphabet, 0, table=bytes(range(alphabet)))


def apply_local(ca: CellularAutomaton, w: Sequence[int]) -> Word:
    n = len(w) - 2 * ca.radius
    if n < 1:
        raise DomainError(f"word of length {len(w)} shorter than window {ca.width}")
    if ca.table is not None:
        a, width, tab = ca.alphabet, ca.width, ca.table
        mod = a ** (width - 1)
        idx = window_index(w[:width - 1], a)
        out = []
        for j in range(width - 1, len(w)):
            idx = (idx % mod) * a + w[j] if width > 1 else w[j]
            out.append(tab[idx])
        return tuple(out)
    w = tuple(w)
    return tuple(ca.proc(w[i:i + ca.width]) for i in range(n))


def step(ca: CellularAutomaton, x: PeriodicConfiguration) -> PeriodicConfiguration:
    if x.alphabet != ca.alphabet:
        raise DomainError("alphabet mismatch")
    if ca.stepper is not None:
        return PeriodicConfiguration(x.alphabet, tuple(ca.stepper(x.cells)))
    r = ca.radius
    return PeriodicConfiguration(x.alphabet, apply_local(ca, x.extended(r, r)))


def iterate(ca: CellularAutomaton, x: PeriodicConfiguration, t: int) -> PeriodicConfiguration:
    for _ in range(t):
        x = step(ca, x)
    return x


def orbit(ca, x, t):
    out = [x]
    for _ in range(t):
        x = step(ca, x)
        out.append(x)
    return out


def power(ca: CellularAutomaton, j: int, budget: int = DEFAULT_TABLE_BUDGET) -> CellularAutomaton:
    if j < 1:
        raise DomainError("power needs j >= 1")
    if j == 1:
        return ca
    r2 = j * ca.radius

    def composed(window):
        w = window
        for _ in range(j):
            w = apply_local(ca, w)
        return w[0]

    if ca.alphabet ** (2 * r2 + 1) <= budget:
        return table_ca(ca.alphabet, r2, composed)
    return CellularAutomaton(ca.alphabet, r2, proc=composed, proc_name="power",
                             params={"j": j})


def pad_radius(ca: CellularAutomaton, r2: int, budget: int = DEFAULT_TABLE_BUDGET) -> CellularAutomaton:
    if r2 < ca.radius:
        raise DomainError("cannot shrink the radius")
    if r2 == ca.radius:
        return ca
    d = r2 - ca.radius

    def padded(window):
        return ca.local(window[d:len(window) - d])

    if ca.is_table and ca.alphabet ** (2 * r2 + 1) <= budget:
        return table_ca(ca.alphabet, r2, padded)
    return CellularAutomaton(ca.alphabet, r2, proc=padded, proc_name="pad",
                             params={"radius": r2})


def uniform_image(ca: CellularAutomaton, b: int) -> int:
    return ca.local((b,) * ca.width)


def is_quiescent(ca: CellularAutomaton, b: int) -> bool:
    return uniform_image(ca, b) == b


def is_spreading(ca: CellularAutomaton, b: int, samples: int = 2000, seed: int = 0) -> bool:
    """Every window containing b maps to b.

    Exhaustive for table rules; for procedural rules the windows are sampled
    (random windows with b planted at a random position).
    """
    if ca.is_table:
        return all(ca.table[i] == b
                   for i, w in enumerate(ca.windows()) if b in w)
    import random
    rng = random.Random(seed)
    for _ in range(samples):
        w = [rng.randrange(ca.alphabet) for _ in range(ca.width)]
        w[rng.randrange(ca.width)] = b
        if ca.local(w) != b:
            return False
    return True


def uniform_period(ca: CellularAutomaton) -> int:
    """Ultimate period of the dynamics restricted to uniform configurations."""
    succ = [uniform_image(ca, b) for b in range(ca.alphabet)]
    p = 1
    for b in range(ca.alphabet):
        seen = {}
        t = 0
        while b not in seen:
            seen[b] = t
            b = succ[b]
            t += 1
        p = lcm(p, t - seen[b])
    return p


def eventual_cycle(ca: CellularAutomaton, x: PeriodicConfiguration, budget: int = 10_000) -> OrbitSummary:
    if budget < 1:
        raise DomainError("budget must be positive")
    seen = {x.cells: 0}
    hist = [x]
    for t in range(1, budget + 1):
        x = step(ca, x)
        if x.cells in seen:
            t0 = seen[x.cells]
            return OrbitSummary(t0, tuple(hist[t0:]))
        seen[x.cells] = t
        hist.append(x)
    raise Inconclusive(f"no cycle within {budget} steps")


# ---------------------------------------------------------------- file formats

PROC_LOADERS: dict[str, Callable] = {}
# procedural rules shipped with the package register themselves on import
_BUILTIN_PROCS = {"delta": "rice_ca.delta"}


def register_proc(name):
    def deco(fn):
        PROC_LOADERS[name] = fn
        return fn
    return deco


def _kv_lines(text: str):
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise DomainError(f"malformed line {line!r}")
        k, v = line.split(":", 1)
        out.append((k.strip(), v.strip()))
    return out


def rule_to_text(ca: CellularAutomaton) -> str:
    lines = [f"alphabet: {ca.alphabet}", f"radius: {ca.radius}"]
    if ca.is_table:
        lines += ["kind: table", "table: " + format_word(ca.table)]
    else:
        lines += ["kind: proc", f"proc: {ca.proc_name}"]
        lines += [f"{k}: {v}" for k, v in ca.params.items()]
    return "\n".join(lines) + "\n"


def rule_from_text(text: str, base: Path | None = None) -> CellularAutomaton:
    kv = _kv_lines(text)
    d = dict(kv)
    try:
        alphabet, radius, kind = int(d["alphabet"]), int(d["radius"]), d["kind"]
    except KeyError as e:
        raise DomainError(f"rule file lacks {e}") from None
    if kind == "table":
        tab = parse_word(d.get("table", ""))
        return CellularAutomaton(alphabet, radius, table=bytes(tab))
    if kind == "proc":
        name = d.get("proc")
        if name not in PROC_LOADERS and name in _BUILTIN_PROCS:
            importlib.import_module(_BUILTIN_PROCS[name])
        if name not in PROC_LOADERS:
            raise DomainError(f"unknown procedural rule {name!r}")
        ca = PROC_LOADERS[name](d, base or Path("."))
        if ca.alphabet != alphabet or ca.radius != radius:
            raise DomainError("procedural rule disagrees with declared alphabet/radius")
        return ca
    raise DomainError(f"unknown rule kind {kind!r}")


def load_rule(path) -> CellularAutomaton:
    path = Path(path)
    return rule_from_text(path.read_text(), path.parent)


def save_rule(ca: CellularAutomaton, path) -> None:
    Path(path).write_text(rule_to_text(ca))


def config_to_text(x: PeriodicConfiguration) -> str:
    return f"alphabet: {x.alphabet}\nperiod: {x.period}\ncells: {format_word(x.cells)}\n"


def config_from_text(text: str) -> PeriodicConfiguration:
    d = dict(_kv_lines(text))
    try:
        x = PeriodicConfiguration(int(d["alphabet"]), parse_word(d["cells"]))
    except KeyError as e:
        raise DomainError(f"configuration file lacks {e}") from None
    if "period" in d and int(d["period"]) != x.period:
        raise DomainError("period does not match cells")
    return x


def load_config(path) -> PeriodicConfiguration:
    return config_from_text(Path(path).read_text())
