import itertools

import pytest
from hypothesis import given, settings, strategies as st

from rice_ca.ca_core import DomainError, apply_local, eca, parse_word, table_ca
from rice_ca.lang_lab import (Sft, balance_surjective, determinize, image_of_full_shift,
                              is_surjective, language_slice, minimize, preimage_counts,
                              preimage_words, recurrent_periodic, sft_automaton, sft_from_text,
                              sft_to_text, shortest_orphan, word_reachable_at_depth)


def brute_language(sft, k):
    return [w for w in itertools.product(range(sft.alphabet), repeat=k) if sft.contains(w)]


@pytest.mark.parametrize("forb,k", [(("11",), 8), (("110111",), 12), (("00", "111"), 9),
                                    ((), 6)])
def test_rank_unrank_matches_sorted_enumeration(forb, k):
    sft = Sft.avoiding(*forb)
    rl = language_slice(sft, k)
    words = brute_language(sft, k)
    assert rl.count == len(words)
    assert list(rl.enumerate()) == words
    for i, w in enumerate(words):
        assert rl.rank(w) == i
        assert rl.unrank(i) == w


def test_golden_mean_counts_are_fibonacci():
    sft = Sft.avoiding("11")
    assert [language_slice(sft, k).count for k in range(1, 11)] == [2, 3, 5, 8, 13, 21, 34, 55,
                                                                     89, 144]


def test_long_slice_is_not_recursive():
    # thousands of symbols used to exhaust the interpreter stack
    rl = language_slice(Sft.avoiding("1111"), 4000)
    w = rl.unrank(rl.count // 3)
    assert len(w) == 4000 and rl.rank(w) == rl.count // 3


def test_rank_rejects_forbidden_word():
    rl = language_slice(Sft.avoiding("11"), 4)
    with pytest.raises(DomainError):
        rl.rank(parse_word("0110"))
    with pytest.raises(DomainError):
        rl.unrank(rl.count)


def test_sft_text_roundtrip():
    sft = Sft.avoiding("101", "00")
    assert sft_from_text(sft_to_text(sft)) == sft


def test_sft_automaton_accepts_exactly_the_language():
    sft = Sft.avoiding("110111")
    a = minimize(determinize(sft_automaton(sft)))
    for w in itertools.product((0, 1), repeat=9):
        assert a.accepts(w) == sft.contains(w)


def test_image_language_of_eca128():
    a = image_of_full_shift(eca(128))
    images = {apply_local(eca(128), w) for w in itertools.product((0, 1), repeat=8)}
    for w in itertools.product((0, 1), repeat=6):
        assert a.accepts(w) == (w in images)


def test_orphans():
    assert shortest_orphan(eca(128)) == (1, 0, 1)
    assert shortest_orphan(eca(0)) == (1,)
    assert shortest_orphan(eca(90)) is None
    assert not any(apply_local(eca(128), p) == (1, 0, 1)
                   for p in itertools.product((0, 1), repeat=5))


def test_surjectivity_agrees_with_balance_on_all_eca():
    for n in range(256):
        assert is_surjective(eca(n)) == balance_surjective(eca(n)), n


def test_three_state_shift_is_surjective():
    ca = table_ca(3, 1, lambda w: (w[1] + w[2]) % 3)
    assert is_surjective(ca) and balance_surjective(ca, 6)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 255), st.integers(1, 5))
def test_preimage_counts_match_brute_force(n, length):
    ca = eca(n)
    counts = preimage_counts(ca, length)
    brute = [0] * (1 << length)
    for p in itertools.product((0, 1), repeat=length + 2):
        w = apply_local(ca, p)
        brute[int("".join(map(str, w)), 2)] += 1
    assert list(counts) == brute


def test_preimage_words_are_preimages():
    ca = eca(110)
    w = parse_word("0110")
    pre = preimage_words(ca, w)
    assert pre and all(apply_local(ca, p) == w for p in pre)
    assert len(pre) == int(preimage_counts(ca, 4)[0b0110])


def test_depth_reachability_and_recurrence():
    assert not word_reachable_at_depth(eca(128), parse_word("101"), 1)
    assert word_reachable_at_depth(eca(128), parse_word("111"), 3)
    rec = recurrent_periodic(eca(128), 6)
    assert {str(x) for x in rec} == {"000000", "111111"}
