import random

import pytest

from rice_ca.ca_core import (DomainError, PeriodicConfiguration, eca, iterate, load_rule,
                             parse_word, step)
from rice_ca.delta import (Case, MUTATIONS, build_reduction_pair, check_agreement,
                           codeword_starts, complement_ca, decide_nilpotency_with_oracle,
                           in_sigma, is_lambda, load_instance, nilpotency_probe, random_window,
                           reference_instance, save_instance, sigomeg_witness, square_quiescent)
from rice_ca.lang_lab import is_surjective


@pytest.fixture(scope="module")
def ref():
    return reference_instance()


def test_reference_instance_shape(ref):
    assert ref.u0 == (1, 0, 1) and ref.u1 == (1,)
    assert ref.u_sigma == parse_word("110111")
    assert ref.code.k == 15 and len(ref.code.codewords()) == 66
    assert ref.f0.radius == 29
    assert not ref.complemented


def test_delta_is_g_on_sigma(ref, rng):
    for which in (0, 1):
        d = ref.f(which)
        for _ in range(10):
            cells = tuple(rng.randrange(2) for _ in range(20))
            x = PeriodicConfiguration(2, cells)
            if not in_sigma(d, x):
                continue
            assert step(d.ca, x) == step(ref.g(which), x)


def test_all_four_cases_are_reached(ref):
    d = ref.f0
    sq = d.squad
    L = 2 * d.radius + 1
    z = ref.code.z_pool[0]
    assert d.classify_window((0,) * L).case == Case.SIGMA
    start = 2 * d.k + d.k // 2 - d.radius      # centre cell in the middle of block 2

    def window(w_mid, v_mid=1):
        blocks = d.encode_tracks([z] * 5, (1, 1, v_mid, 1, 1),
                                 (sq.quiet, sq.quiet, w_mid, sq.quiet, sq.quiet))
        return blocks[start:start + L]

    assert d.classify_window(window(sq.gamma)).case == Case.UNFREEZE
    assert d.classify_window(window(sq.general)).case == Case.SIMULATE
    assert d.classify_window(window(sq.general, 0)).case == Case.KILL
    assert d.classify_window(window(sq.kappa)).case == Case.KILL
    assert d.classify_window(window(sq.general)).cell == d.k // 2


def test_unfreeze_writes_the_z_block(ref):
    d = ref.f0
    sq = d.squad
    z = ref.code.z_pool[0]
    cells = d.encode_tracks([z] * 3, (1, 1, 1), (sq.gamma,) * 3)
    assert d.step_cells(cells) == z * 3


def test_simulate_runs_both_tracks(ref):
    d = ref.f0
    sq = d.squad
    n = 6
    z = ref.code.z_pool[0]
    w = (sq.wall, sq.general) + (sq.quiet,) * (n - 1)
    x = PeriodicConfiguration(2, d.encode_tracks([z] * (n + 1), (1,) * (n + 1), w))
    y = step(d.ca, x)
    _, v2, w2 = d.decode_tracks(y.cells)
    assert v2 == (1,) * (n + 1)
    assert w2 == step(sq.ca, PeriodicConfiguration(sq.n_states, w)).cells


def test_f0_f1_agree_outside_sigma(ref):
    assert check_agreement(ref.f0, ref.f1, 300, seed=3) == []


@pytest.mark.parametrize("mutation", [m for m in MUTATIONS if m])
def test_mutants_change_the_rule(ref, mutation):
    d = ref.f0
    m = d.mutant(mutation)
    rng = random.Random(0)
    L = 2 * d.radius + 1
    diff = sum(d.local(y) != m.local(y) for y in (random_window(rng, d, L) for _ in range(400)))
    assert diff > 0


def test_unknown_mutation(ref):
    with pytest.raises(DomainError):
        ref.f0.mutant("nope")


def test_lambda_and_sigma_membership(ref):
    d = ref.f0
    sq = d.squad
    z = ref.code.z_pool[0]
    run = d.encode_tracks([z] * 2, (1, 1), (sq.quiet, sq.quiet))
    x = PeriodicConfiguration(2, (0,) * 7 + run + (0,) * 4)
    assert is_lambda(d, x) and not in_sigma(d, x)
    assert codeword_starts(d, x.cells) == [7, 7 + d.k]
    assert is_lambda(d, PeriodicConfiguration(2, (0,) * 9))
    assert not is_lambda(d, PeriodicConfiguration(2, (1,) + (0,) * 8))


def test_complement_normalization():
    inst = build_reduction_pair(eca(255), eca(254), eca(128), check_samples=50)
    assert inst.q == 1 and inst.complemented
    assert inst.g0.table == eca(0).table
    assert inst.g1.table == eca(128).table
    assert complement_ca(complement_ca(eca(110))).table == eca(110).table


def test_square_quiescent():
    h, q = square_quiescent(eca(1))
    assert h.radius == 2
    assert h.local((q,) * 5) == q
    h, q = square_quiescent(eca(128))
    assert h.radius == 1 and q == 0


def test_preconditions_are_checked():
    with pytest.raises(DomainError):
        build_reduction_pair(eca(90), eca(0), eca(128))     # 90 is surjective
    with pytest.raises(DomainError):
        build_reduction_pair(eca(255), eca(0), eca(128))    # no shared quiescent state
    assert is_surjective(eca(90))


def test_nilpotency_probe():
    assert str(nilpotency_probe(eca(0), 0, 8, 4)) == "nilpotent(1)"
    assert str(nilpotency_probe(eca(128), 0, 8, 4)) == "non_nilpotent(inf 1 inf)"
    with pytest.raises(DomainError):
        nilpotency_probe(eca(204), 0, 4, 4)


def test_decision_truth_table(ref):
    table = {}
    for a in (False, True):
        for b in (False, True):
            answers = {id(ref.f0.ca): a, id(ref.f1.ca): b}
            table[a, b] = decide_nilpotency_with_oracle(ref, lambda ca: answers[id(ca)])
    assert table == {(True, False): True, (True, True): False, (False, False): False,
                     (False, True): False}


def test_sigomeg_witness_reference(ref):
    x = PeriodicConfiguration(2, ref.code.z_pool[0])
    js = set()
    for idx in range(3):
        xt, J = sigomeg_witness(ref, 0, x, idx)
        assert iterate(ref.f0.ca, xt, J).cells == x.cells * (xt.period // x.period)
        js.add(J)
    assert len(js) == 3


def test_sigomeg_witness_nontrivial_block():
    pool = [(0,) * 16, (0, 1) * 8]
    inst = build_reduction_pair(eca(128), eca(0), eca(128), k=16, z_pool=pool, check_samples=100)
    x = PeriodicConfiguration(2, (0, 1))
    for which in (0, 1):
        xt, J = sigomeg_witness(inst, which, x, 1)
        y = iterate(inst.f(which).ca, xt, J)
        assert y.cells == (0, 1) * (xt.period // 2)


def test_sigomeg_needs_non_nilpotent_n():
    inst = reference_instance(nilpotent=True)
    with pytest.raises(DomainError):
        sigomeg_witness(inst, 0, PeriodicConfiguration(2, (0,)), 0)


def test_save_and_load_instance(tmp_path, ref):
    man = save_instance(ref, tmp_path)
    back = load_instance(man)
    assert back.code.table == ref.code.table
    f1 = load_rule(tmp_path / "instance.f1.rule")
    rng = random.Random(2)
    for _ in range(5):
        x = PeriodicConfiguration(2, random_window(rng, ref.f1, 45))
        assert step(f1, x) == step(ref.f1.ca, x)
