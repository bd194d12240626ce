"""Verification suites with deterministic line-oriented reports.

Every suite takes a dict of string parameters and a seed.  Randomised
suites draw trial ``i`` from its own generator seeded by ``(seed, i)``, so
results do not depend on evaluation order.  A report is ``key: value``
lines; the elapsed time is kept on the object but only printed on request
so that repeated runs produce identical bytes.
"""

from __future__ import annotations

import itertools
import random
import time
from collections import Counter
from dataclasses import dataclass, field

from .ca_core import DomainError, PeriodicConfiguration, apply_local, eca, format_word
from .delta import (Case, in_sigma, is_lambda, random_window, reference_instance,
                    sigomeg_witness)
from .freezing import (SymbolCoding, build_code, extend_strongly_freezing, formula_parameters,
                       is_strongly_freezing_set, is_strongly_freezing_word, m_bound)
from .lang_lab import balance_surjective, is_surjective, language_slice, shortest_orphan

MAX_LISTED = 10


@dataclass
class SuiteReport:
    suite: str
    seed: int
    samples: int
    params: dict = field(default_factory=dict)
    details: list = field(default_factory=list)       # (key, value) pairs
    violations: list = field(default_factory=list)    # (input, expected, got)
    inconclusive: bool = False
    elapsed: float = 0.0

    @property
    def verdict(self) -> str:
        if self.violations:
            return "fail"
        if self.inconclusive:
            return "inconclusive"
        return "pass"

    def add(self, key, value):
        self.details.append((key, value))

    def to_text(self, timing: bool = False) -> str:
        lines = [f"suite: {self.suite}", f"seed: {self.seed}", f"samples: {self.samples}"]
        if self.params:
            lines.append("params: " + " ".join(f"{k}={v}" for k, v in sorted(self.params.items())))
        lines += [f"{k}: {v}" for k, v in self.details]
        lines.append(f"violations: {len(self.violations)}")
        for inp, exp, got in self.violations[:MAX_LISTED]:
            lines.append(f"violation: input={inp} expected={exp} got={got}")
        lines.append(f"verdict: {self.verdict}")
        if timing:
            lines.append(f"elapsed: {self.elapsed:.2f}s")
        return "\n".join(lines) + "\n"


def trial_rng(seed: int, idx: int) -> random.Random:
    return random.Random(f"{seed}/{idx}")


def _int(params, key, default):
    try:
        return int(params.get(key, default))
    except ValueError:
        raise DomainError(f"parameter {key} must be an integer") from None


def _naive_bordered(u) -> bool:
    n = len(u)
    return any(u[:b] == u[n - b:] for b in range(1, n))


def _w(word) -> str:
    return format_word(word)


# ---------------------------------------------------------------- suites

def suite_freezing(rep: SuiteReport, params, seed):
    max_len = _int(params, "max_len", 14)
    targets = params.get("target", "words,toy").split(",")
    if "words" in targets:
        checked = 0
        for n in range(1, max_len + 1):
            for w in itertools.product((0, 1), repeat=n):
                checked += 1
                fast = is_strongly_freezing_word(w)
                if fast == _naive_bordered(w):
                    rep.violations.append((_w(w), not _naive_bordered(w), fast))
                e = extend_strongly_freezing(w)
                if e[:n] != w or _naive_bordered(e):
                    rep.violations.append((_w(w), "unbordered extension", _w(e)))
        rep.add("words_checked", checked)
    if "toy" in targets:
        code = reference_instance().code
        ok, viol, npairs = is_strongly_freezing_set(code.codewords())
        rep.add("toy_codewords", len(code.codewords()))
        rep.add("toy_pairs_checked", npairs)
        rep.violations += [(f"{_w(a)}|{_w(b)}", "no overlap", f"offset {i}") for a, b, i in viol]
    if "formula" in targets:
        pairs = _int(params, "pairs", 10_000)
        code = build_code((0, 1, 1), SymbolCoding(2, 1))
        rng = random.Random(f"{seed}/formula")
        full = language_slice(code.sigma, code.k)
        words = [code.sample_codeword(rng, full) for _ in range(2 * pairs)]
        viol = []
        for j in range(pairs):
            a, b = words[2 * j], words[2 * j + 1]
            for i in range(1, code.k):
                if a[i:] == b[:code.k - i]:
                    viol.append((a, b, i))
        offsets = Counter(i for _, _, i in viol)
        rep.add("formula_k", code.k)
        rep.add("formula_pairs", pairs)
        rep.add("formula_violation_offsets",
                " ".join(f"{i}x{c}" for i, c in sorted(offsets.items())) or "none")
        rep.violations += [(f"{_w(a)}|{_w(b)}", "no overlap", f"offset {i}") for a, b, i in viol]


def suite_code_roundtrip(rep: SuiteReport, params, seed):
    m, n, k = formula_parameters(3, 1)
    rep.add("formula_mnk", f"{m} {n} {k}")
    if (m, n, k) != (37, 104, 222):
        rep.violations.append(("u_E=011 l=1", "37 104 222", f"{m} {n} {k}"))
    if not 7 ** 37 <= 2 ** 104:
        rep.violations.append(("7^37 <= 2^104", True, False))
    if 7 ** 36 <= 2 ** (36 * 3 - 6 - 1):
        rep.violations.append(("m=36 rejected", True, False))
    rep.add("m_bound", f"{m_bound(3, 1):.4f}")
    code = build_code((0, 1, 1), SymbolCoding(2, 1))
    full = language_slice(code.sigma, code.k)
    samples = rep.samples
    for i in range(samples):
        rng = trial_rng(seed, i)
        z = full.unrank(rng.randrange(full.count))
        v = rng.randrange(code.coding.size)
        w = code.encode(z, v)
        back = code.decode(w)
        u = code.delimiter
        if back != (z, v) or w[:len(u)] != u or w[-len(u):] != u or code.sigma.contains(w):
            rep.violations.append((f"z={_w(z)} v={v}", "round trip", _w(w)))
    toy = reference_instance().code
    seen = set()
    for (zi, c), w in sorted(toy.table.items()):
        if toy.decode(w) != (toy.z_pool[zi], c) or w in seen:
            rep.violations.append((f"toy z={zi} c={c}", "round trip", _w(w)))
        seen.add(w)
    rep.add("toy_roundtrips", len(toy.table))


def suite_squad(rep: SuiteReport, params, seed):
    from .squad import build_squad, check_limit_gamma, firing_time, seed_segment, validate_segments
    from .ca_core import eventual_cycle
    sq = build_squad()
    max_n = _int(params, "max_n", 32)
    max_p = _int(params, "period", 4)
    rows = validate_segments(max_n, sq)
    prev = 0
    for n, t, clean in rows:
        if not clean:
            rep.violations.append((f"n={n}", "clean firing", f"t={t}"))
            continue
        if t <= prev or t > 4 * n or t < 2 * n - 2:
            rep.violations.append((f"n={n}", "increasing, 2n-2 <= t <= 4n", f"t={t}"))
        prev = t
        if t != firing_time(n):
            rep.violations.append((f"n={n}", "memoised firing time", firing_time(n)))
        orb = eventual_cycle(sq.ca, seed_segment(n, sq), budget=4 * n + 2)
        if orb.tail != t or len(orb.cycle) != 1:
            rep.violations.append((f"n={n}", f"tail {t} into the gamma fixed point", orb.tail))
    rep.add("firing_times", " ".join(str(t) for _, t, _ in rows))
    nb = sq.n_states
    tab = sq.ca.table
    for a, c, b in itertools.product(range(nb), repeat=3):
        o = tab[(a * nb + c) * nb + b]
        if sq.kappa in (a, c, b) and o != sq.kappa:
            rep.violations.append((f"{a},{c},{b}", "kappa", o))
        if c == sq.gamma and any(s not in (sq.gamma, sq.kappa) for s in (a, b)) and o != sq.kappa:
            rep.violations.append((f"{a},{c},{b}", "kappa (gamma isolation)", o))
    for P in range(1, max_p + 1):
        r = check_limit_gamma(P, sq)
        rep.add(f"limit_period_{P}", f"configurations={r['configurations']} "
                f"recurrent={r['recurrent']} with_gamma={r['recurrent_with_gamma']}")
        rep.violations += [(f"P={P}", "{gamma,kappa}^Z", _w(v)) for v in r["violations"]]


def _reference_f(params, which=0):
    inst = reference_instance(params.get("n", "eca128") == "eca0")
    d = inst.f(which)
    mut = params.get("mutation", "none")
    return inst, (d if mut == "none" else d.mutant(mut))


def _block_at(d, x, origin, start) -> bool:
    """x has 2 r_S + 1 aligned codewords whose central one starts at ``start``."""
    k, rs = d.k, d.r_s
    for t in range(-rs, rs + 1):
        s = origin + start + t * k
        if s < 0 or s + k > len(x) or d.code.lookup(x[s:s + k]) is None:
            return False
    return True


def _plant_u_sample(rng, d, length, origin):
    """Random window with copies of u planted just inside the reach of the cells."""
    x = [rng.randrange(2) for _ in range(length)]
    u, r = d.u, d.radius
    lu = len(u)
    for _ in range(2):
        side = rng.randrange(2)
        s = origin + (1 - r + rng.randrange(-2, 3) if side == 0 else r - lu + 4 + rng.randrange(-2, 3))
        s = min(max(0, s), length - lu)
        x[s:s + lu] = u
    return tuple(x)


def suite_preinv0(rep: SuiteReport, params, seed):
    inst, d = _reference_f(params, _int(params, "which", 0))
    r, k, u = d.radius, d.k, d.u
    lu = len(u)
    L = lu + 2 * r
    hits = 0
    for i in range(rep.samples):
        rng = trial_rng(seed, i)
        x = _plant_u_sample(rng, d, L, r) if i % 4 == 3 else random_window(rng, d, L)
        y = d.apply(x)
        if y != u:
            continue
        hits += 1
        if not any(_block_at(d, x, r, s) for s in range(-k + 1, 1)):
            rep.violations.append((_w(x), "aligned codeword block at i in (-k,0]", _w(y)))
    rep.add("antecedent_hits", hits)


def suite_preinv(rep: SuiteReport, params, seed):
    inst, d = _reference_f(params, _int(params, "which", 0))
    r, k, rs = d.radius, d.k, d.r_s
    L = k + 2 * r
    hits = 0
    for i in range(rep.samples):
        rng = trial_rng(seed, i)
        x = random_window(rng, d, L)
        y = d.apply(x)
        if d.code.lookup(y) is None:
            continue
        hits += 1
        if not _block_at(d, x, r, 0):
            rep.violations.append((_w(x), f"E^{2 * rs + 1} at -{rs}k", _w(y)))
    rep.add("antecedent_hits", hits)


def suite_reduction_agree(rep: SuiteReport, params, seed):
    inst = reference_instance(params.get("n", "eca128") == "eca0")
    f0, f1 = inst.f0, inst.f1
    mut = params.get("mutation", "none")
    if mut != "none":
        f1 = f1.mutant(mut)
    L = 2 * f0.radius + 1
    cases = Counter()
    for i in range(rep.samples):
        rng = trial_rng(seed, i)
        y = random_window(rng, f0, L)
        tag = f0.classify_window(y)
        cases[tag.case.name] += 1
        if tag.case == Case.SIGMA:
            continue
        a, b = f0.local(y), f1.local(y)
        if a != b:
            rep.violations.append((_w(y), a, b))
    rep.add("cases", " ".join(f"{c}={cases[c]}" for c in ("SIGMA", "UNFREEZE", "SIMULATE", "KILL")))


def suite_fire(rep: SuiteReport, params, seed):
    from .ca_core import Inconclusive
    from .squad import backward_fire_chain
    depth = _int(params, "depth", 5)
    dist = _int(params, "distance", 5)
    for l in [x for j in range(1, dist + 1) for x in (j, -j)]:
        try:
            w = backward_fire_chain(l, depth)
        except Inconclusive:
            rep.inconclusive = True
            rep.add(f"distance_{l}", "inconclusive")
            continue
        rep.add(f"distance_{l}", "no chain" if w is None else "chain")
        if w is not None:
            rep.violations.append((f"distance={l} depth={depth}", "no chain",
                                   " / ".join(_w(row) for row in w)))


def _recurrent_configs(d, P, **kw):
    from .kernel import recurrent_classes, unpack
    reps, passes = recurrent_classes(d, P, **kw)
    return [PeriodicConfiguration(2, unpack(x, P)) for x in reps], passes


def suite_ssgamma(rep: SuiteReport, params, seed):
    inst = reference_instance(params.get("n", "eca128") == "eca0")
    P = _int(params, "period", 2 * inst.code.k)
    for which in (0, 1):
        confs, passes = _recurrent_configs(inst.f(which), P)
        lam = sum(1 for x in confs if is_lambda(inst.f(which), x) and not in_sigma(inst.f(which), x))
        rep.add(f"f{which}_recurrent_classes", f"{len(confs)} (codeword classes {lam}, passes {passes})")
        for x in confs:
            if not (in_sigma(inst.f(which), x) or is_lambda(inst.f(which), x)):
                rep.violations.append((f"f{which} {x}", "Sigma or Lambda", "neither"))


def suite_prodnilp(rep: SuiteReport, params, seed):
    from .delta import codeword_starts, nilpotency_probe
    inst = reference_instance(True)
    P = _int(params, "period", 2 * inst.code.k)
    verdict = nilpotency_probe(inst.n_ca, inst.theta, 4, 4)
    rep.add("n_verdict", str(verdict))
    if verdict.kind != "nilpotent":
        rep.violations.append(("N", "nilpotent", str(verdict)))
    for which in (0, 1):
        d = inst.f(which)
        confs, _ = _recurrent_configs(d, P)
        gconfs, _ = _recurrent_configs(d, P, plain=True, only_sigma=True)
        rep.add(f"f{which}_recurrent", " ".join(str(x) for x in confs))
        rep.add(f"g{which}_recurrent", " ".join(str(x) for x in gconfs))
        for x in confs:
            if codeword_starts(d, x.cells):
                rep.violations.append((f"f{which} {x}", "no codeword", "codeword"))
        if sorted(x.cells for x in confs) != sorted(x.cells for x in gconfs):
            rep.violations.append((f"f{which} period {P}", "Rec(Delta) = Rec(G)", "differ"))


def suite_sigomeg(rep: SuiteReport, params, seed):
    inst = reference_instance(params.get("n", "eca128") == "eca0")
    count = _int(params, "count", 3)
    k = inst.code.k
    x = PeriodicConfiguration(2, inst.code.z_pool[0])
    js = []
    for which in (0, 1):
        d = inst.f(which)
        for idx in range(count):
            xt, J = sigomeg_witness(inst, which, x, idx)
            zs, v, w = d.decode_tracks(xt.cells)
            y = xt
            for j in range(1, J):
                y = d.step(y)
                v = apply_local(inst.n_ca, v[-1:] + v + v[:1])
                w = apply_local(d.squad.ca, w[-1:] + w + w[:1])
                try:
                    got = d.decode_tracks(y.cells)
                except DomainError:
                    got = None
                if got != (zs, v, w):
                    rep.violations.append((f"f{which} idx={idx} j={j}", "case (3) tracks", "differ"))
                    break
            y = d.step(y)
            target = x.cells * (xt.period // x.period)
            if y.cells != target:
                rep.violations.append((f"f{which} idx={idx} J={J}", _w(target), _w(y.cells)))
            if which == 0:
                js.append(J)
    rep.add("firing_J", " ".join(map(str, js)))
    if len(set(js)) < min(count, 3):
        rep.violations.append(("J values", "distinct", " ".join(map(str, js))))


def suite_surjectivity(rep: SuiteReport, params, seed):
    n_surj = 0
    for n in range(256):
        a = is_surjective(eca(n))
        b = balance_surjective(eca(n))
        n_surj += a
        if a != b:
            rep.violations.append((f"ECA {n}", b, a))
    rep.add("surjective_eca", n_surj)
    g = eca(128)
    orphan = shortest_orphan(g)
    rep.add("orphan_eca128", _w(orphan))
    if orphan != (1, 0, 1):
        rep.violations.append(("orphan ECA 128", "101", _w(orphan)))
    pre = [w for w in itertools.product((0, 1), repeat=5) if apply_local(g, w) == (1, 0, 1)]
    if pre:
        rep.violations.append(("preimages of 101", "none", _w(pre[0])))
    for L in (1, 2):
        images = {apply_local(g, w) for w in itertools.product((0, 1), repeat=L + 2)}
        if len(images) != 2 ** L:
            rep.violations.append((f"length {L}", "every word has a preimage", len(images)))


SUITES = {
    "freezing": (suite_freezing, 0),
    "code-roundtrip": (suite_code_roundtrip, 1000),
    "squad": (suite_squad, 0),
    "preinv0": (suite_preinv0, 100_000),
    "preinv": (suite_preinv, 100_000),
    "fire": (suite_fire, 0),
    "ssgamma": (suite_ssgamma, 0),
    "prodnilp": (suite_prodnilp, 0),
    "sigomeg": (suite_sigomeg, 0),
    "surjectivity": (suite_surjectivity, 0),
    "reduction-agree": (suite_reduction_agree, 100_000),
}


def run_suite(name: str, params: dict | None = None, seed: int = 0,
              samples: int | None = None) -> SuiteReport:
    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from {', '.join(sorted(SUITES))}")
    fn, default_samples = SUITES[name]
    params = {str(k): str(v) for k, v in (params or {}).items()}
    if samples is None:
        samples = _int(params, "samples", default_samples)
    params.pop("samples", None)
    if samples < 0:
        raise DomainError("samples must be nonnegative")
    rep = SuiteReport(name, int(seed), samples, params)
    t0 = time.perf_counter()
    fn(rep, params, int(seed))
    rep.elapsed = time.perf_counter() - t0
    return rep
