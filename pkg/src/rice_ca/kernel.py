"""Compiled global maps on periodic configurations packed into integers.

Exhaustive recurrence checks over all 2^P period-P configurations of a
compiled Delta are too slow in pure Python.  Here a configuration is an
integer with cell 0 as the most significant of P bits, the map is
evaluated by a numba kernel, and recurrence is computed on rotation
classes: the global map commutes with the shift, so iterating the image of
the set of canonical (minimal rotation) representatives until it is
stable yields exactly the classes of recurrent configurations.

Only toy codes are supported (the codeword table is materialised), and the
window must cover the whole ring so that case (1) becomes a property of
the configuration.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .ca_core import DomainError
from .delta import DeltaAutomaton


@njit(cache=True)
def _cell(x, P, i):
    return (x >> (P - 1 - i)) & 1


@njit(cache=True)
def _rot(x, P, s, mask):
    s = s % P
    if s == 0:
        return x
    return ((x << s) | (x >> (P - s))) & mask


@njit(cache=True)
def _canon(x, P, mask):
    best = x
    y = x
    for _ in range(P - 1):
        y = ((y << 1) | (y >> (P - 1))) & mask
        if y < best:
            best = y
    return best


@njit(cache=True)
def _window_int(x, P, s, L, mask):
    """The L cells starting at cyclic position s, as an L-bit integer."""
    if P >= L:
        return _rot(x, P, s, mask) >> (P - L)
    v = 0
    for j in range(L):
        v = 2 * v + _cell(x, P, (s + j) % P)
    return v


@njit(cache=True)
def _has_u(x, P, u, lu, mask):
    for s in range(P):
        if _window_int(x, P, s, lu, mask) == u:
            return True
    return False


@njit(cache=True)
def _apply_g(x, P, gtab, rg):
    y = 0
    for p in range(P):
        idx = 0
        for j in range(p - rg, p + rg + 1):
            idx = 2 * idx + _cell(x, P, j % P)
        y = 2 * y + gtab[idx]
    return y


@njit(cache=True)
def _delta(x, P, k, rs, u, lu, gtab, rg, cwtab, code_z, code_a, code_b, zbits, enc,
           ntab, stab, nA, nB, theta, gamma, kappa):
    mask = (np.int64(1) << P) - 1
    if not _has_u(x, P, u, lu, mask):
        return _apply_g(x, P, gtab, rg)
    cw = np.empty(P, dtype=np.int64)
    for s in range(P):
        cw[s] = cwtab[_window_int(x, P, s, k, mask)]
    out = np.zeros(P, dtype=np.int64)
    for c0 in range(P):
        ok = True
        for t in range(-rs, rs + 1):
            if cw[(c0 + t * k) % P] < 0:
                ok = False
                break
        if not ok:
            continue
        cid = cw[c0]
        bc = code_b[cid]
        if bc == gamma:
            for j in range(k):
                out[(c0 + j) % P] = zbits[code_z[cid], j]
            continue
        if code_a[cid] == theta or bc == kappa:
            continue
        ni = 0
        si = 0
        for t in range(-rs, rs + 1):
            nb = cw[(c0 + t * k) % P]
            ni = ni * nA + code_a[nb]
            si = si * nB + code_b[nb]
        word = enc[code_z[cid], ntab[ni] * nB + stab[si]]
        for j in range(k):
            out[(c0 + j) % P] = (word >> (k - 1 - j)) & 1
    y = 0
    for p in range(P):
        y = 2 * y + out[p]
    return y


@njit(cache=True)
def _apply_many(xs, P, args):
    out = np.empty(len(xs), dtype=np.int64)
    for i in range(len(xs)):
        out[i] = _delta(xs[i], P, *args)
    return out


@njit(cache=True)
def _first_pass_delta(P, args, bitmap, only_sigma, u, lu):
    """Image of all necklace representatives (optionally only those avoiding u)."""
    mask = (np.int64(1) << P) - 1
    w = np.zeros(P + 1, dtype=np.int64)
    m = 1
    w[0] = -1
    count = 0
    while m > 0:
        w[m - 1] += 1
        if P % m == 0:
            x = np.int64(0)
            for i in range(P):
                x = 2 * x + w[i % m]
            if not only_sigma or not _has_u(x, P, u, lu, mask):
                y = _canon(_delta(x, P, *args), P, mask)
                bitmap[y >> 6] |= np.uint64(1) << np.uint64(y & 63)
                count += 1
        L = m
        while L < P:
            w[L] = w[L - m]
            L += 1
        m = P
        while m > 0 and w[m - 1] == 1:
            m -= 1
    return count


@njit(cache=True)
def _next_pass(P, args, src, dst):
    mask = (np.int64(1) << P) - 1
    for wi in range(len(src)):
        word = src[wi]
        if word == 0:
            continue
        for b in range(64):
            if (word >> np.uint64(b)) & np.uint64(1):
                x = np.int64(wi * 64 + b)
                y = _canon(_delta(x, P, *args), P, mask)
                dst[y >> 6] |= np.uint64(1) << np.uint64(y & 63)


def kernel_args(d: DeltaAutomaton, plain: bool = False):
    """Flatten a toy-code Delta into arrays for the kernel.

    With ``plain`` the arguments describe G alone: u is set to an
    impossible pattern so every configuration takes the SIGMA branch.
    """
    code = d.code
    if code.mode != "toy":
        raise DomainError("the kernel needs a toy code")
    k, rs = d.k, d.r_s
    if k > 24:
        raise DomainError("codeword table too large")
    coding = code.coding
    nA, nB = coding.size_a, coding.size_b
    keys = sorted(code.table)
    cwtab = np.full(1 << k, -1, dtype=np.int64)
    code_z = np.zeros(len(keys), dtype=np.int64)
    code_a = np.zeros(len(keys), dtype=np.int64)
    code_b = np.zeros(len(keys), dtype=np.int64)
    enc = np.zeros((len(code.z_pool), coding.size), dtype=np.int64)
    for cid, (zi, c) in enumerate(keys):
        word = code.table[(zi, c)]
        val = int("".join(map(str, word)), 2)
        cwtab[val] = cid
        code_z[cid] = zi
        code_a[cid], code_b[cid] = coding.pair(c)
        enc[zi, c] = val
    zbits = np.array(code.z_pool, dtype=np.int64).reshape(len(code.z_pool), k)
    if not (d.n_ca.is_table and d.squad.ca.is_table and d.g.base.is_table):
        raise DomainError("component rules must be tables")
    ntab = np.frombuffer(d.n_ca.table, dtype=np.uint8).astype(np.int64)
    stab = np.frombuffer(d.squad.ca.table, dtype=np.uint8).astype(np.int64)
    gtab = np.frombuffer(d.g.base.table, dtype=np.uint8).astype(np.int64)
    u = int("".join(map(str, d.u)), 2)
    lu = len(d.u)
    if plain:
        u, lu = -1, 1                # a 1-cell window is never -1
    return (np.int64(k), np.int64(rs), np.int64(u), np.int64(lu), gtab, np.int64(d.g.radius),
            cwtab, code_z, code_a, code_b, zbits, enc, ntab, stab, np.int64(nA), np.int64(nB),
            np.int64(d.theta), np.int64(d.squad.gamma), np.int64(d.squad.kappa))


def _check_period(d: DeltaAutomaton, P: int):
    if not 1 <= P <= 31:
        raise DomainError("period must be in 1..31 for the packed kernel")
    if 2 * d.radius + 1 < P + len(d.u) - 1:
        raise DomainError("the window must cover the ring for this kernel")


def step_packed(d: DeltaAutomaton, xs, P: int, plain: bool = False) -> np.ndarray:
    """Kernel image of packed period-P configurations."""
    _check_period(d, P)
    return _apply_many(np.asarray(xs, dtype=np.int64), np.int64(P), kernel_args(d, plain))


def pack(cells) -> int:
    return int("".join(map(str, cells)), 2) if cells else 0


def unpack(x: int, P: int):
    return tuple((x >> (P - 1 - i)) & 1 for i in range(P))


def recurrent_classes(d: DeltaAutomaton, P: int, plain: bool = False, only_sigma: bool = False):
    """Canonical representatives of recurrent period-P configurations.

    ``plain`` iterates G instead of Delta; ``only_sigma`` starts from the
    configurations avoiding u (the domain of G).  Returns (sorted list of
    canonical integers, number of image passes).
    """
    _check_period(d, P)
    args = kernel_args(d, plain)
    nwords = max(1, (1 << P) >> 6)
    cur = np.zeros(nwords, dtype=np.uint64)
    u = int("".join(map(str, d.u)), 2)
    _first_pass_delta(np.int64(P), args, cur, only_sigma, np.int64(u), np.int64(len(d.u)))
    passes = 1
    while True:
        nxt = np.zeros_like(cur)
        _next_pass(np.int64(P), args, cur, nxt)
        passes += 1
        if np.array_equal(nxt, cur):
            break
        cur = nxt
    idx = np.flatnonzero(cur)
    out = []
    for wi in idx:
        word = int(cur[wi])
        for b in range(64):
            if word >> b & 1:
                out.append(int(wi) * 64 + b)
    return out, passes
