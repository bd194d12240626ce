import random

import numpy as np
import pytest

from rice_ca.ca_core import DomainError, PeriodicConfiguration, step
from rice_ca.delta import reference_instance
from rice_ca.kernel import pack, recurrent_classes, step_packed, unpack
from rice_ca.lang_lab import recurrent_mask


@pytest.fixture(scope="module")
def ref():
    return reference_instance()


def canon(cells):
    P = len(cells)
    return min(pack(cells[s:] + cells[:s]) for s in range(P))


def test_pack_roundtrip():
    assert pack((1, 0, 1, 1)) == 11
    assert unpack(11, 4) == (1, 0, 1, 1)


@pytest.mark.parametrize("P", [7, 15, 20, 31])
def test_kernel_matches_python_delta(ref, P):
    rng = random.Random(P)
    for which in (0, 1):
        d = ref.f(which)
        xs = [tuple(rng.randrange(2) for _ in range(P)) for _ in range(60)]
        # plant codeword runs so the non-Sigma branches are exercised
        w = ref.code.codewords()
        xs += [(rng.choice(w) + rng.choice(w) + (0,) * P)[:P] for _ in range(30)]
        got = step_packed(d, [pack(x) for x in xs], P)
        for x, y in zip(xs, got):
            assert unpack(int(y), P) == step(d.ca, PeriodicConfiguration(2, x)).cells


def test_recurrent_classes_match_functional_graph(ref):
    P = 12
    d = ref.f0
    xs = np.arange(1 << P, dtype=np.int64)
    succ = np.array([pack(step(d.ca, PeriodicConfiguration(2, unpack(int(x), P))).cells)
                     for x in xs])
    expect = sorted({canon(unpack(int(x), P)) for x in np.flatnonzero(recurrent_mask(succ))})
    got, _ = recurrent_classes(d, P)
    assert got == expect


def test_plain_mode_iterates_g(ref):
    d = ref.f1
    got, _ = recurrent_classes(d, 10, plain=True, only_sigma=True)
    assert got == [0]


def test_period_limits(ref):
    with pytest.raises(DomainError):
        recurrent_classes(ref.f0, 32)
