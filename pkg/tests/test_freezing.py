import itertools
import math
import random

import pytest

from rice_ca.ca_core import DomainError, parse_word
from rice_ca.freezing import (SymbolCoding, build_code, code_from_text, code_to_text,
                              extend_strongly_freezing, formula_parameters,
                              is_strongly_freezing_set, is_strongly_freezing_word, m_bound,
                              search_toy_code)
from rice_ca.lang_lab import Sft, language_slice


def naive_unbordered(u):
    # a border is a nonempty proper prefix that is also a suffix
    return not any(u[:j] == u[-j:] for j in range(1, len(u)))


def test_word_check_agrees_with_border_scan():
    for n in range(1, 12):
        for u in itertools.product((0, 1), repeat=n):
            assert is_strongly_freezing_word(u) == naive_unbordered(u)
            e = extend_strongly_freezing(u)
            assert e[:n] == u and naive_unbordered(e)


def test_extension_examples():
    assert extend_strongly_freezing(parse_word("011")) == (0, 1, 1)
    assert extend_strongly_freezing(parse_word("101")) == (1, 0, 1, 0, 0)
    assert extend_strongly_freezing(parse_word("0")) == (0,)


def test_set_check_finds_overlaps():
    ok, viol, _ = is_strongly_freezing_set([parse_word("0011"), parse_word("1100")])
    assert not ok
    assert (parse_word("0011"), parse_word("1100"), 2) in viol
    ok, _, _ = is_strongly_freezing_set([parse_word("00111"), parse_word("00101")])
    assert ok


def test_symbol_coding_roundtrip():
    c = SymbolCoding(2, 33)
    assert c.size == 66 and c.width == 7
    for v in range(c.size):
        assert c.from_bits(c.bits(v)) == v
        a, b = c.pair(v)
        assert c.index(a, b) == v
    with pytest.raises(DomainError):
        c.from_bits((1,) * 7)


def test_formula_parameters_reference_values():
    m, n, k = formula_parameters(3, 1)
    assert (m, n, k) == (37, 104, 222)
    assert 7 ** 37 <= 2 ** 104
    # m = 36 fails the inequality, so 37 is minimal
    assert 2 ** (36 * 3 - 6 - 1) < 7 ** 36
    assert m >= m_bound(3, 1)
    assert math.isclose(m_bound(3, 1), 7 / (3 - math.log2(7)))


def test_formula_code_roundtrip():
    code = build_code("011", SymbolCoding(2, 1))
    assert code.k == 222 and code.delimiter == (0, 1, 1)
    full = language_slice(code.sigma, code.k)
    rng = random.Random(5)
    for _ in range(200):
        z = full.unrank(rng.randrange(full.count))
        v = rng.randrange(2)
        w = code.encode(z, v)
        assert len(w) == code.k and not code.sigma.contains(w)
        assert code.decode(w) == (z, v)
    with pytest.raises(DomainError):
        code.decode((0,) * code.k)


def test_formula_codewords_overlap_through_the_delimiters():
    # any two codewords start and end with u_E, so they share u_E at offset k - |u_E|
    code = build_code("011", SymbolCoding(2, 1))
    rng = random.Random(9)
    a, b = code.sample_codeword(rng), code.sample_codeword(rng)
    assert a[code.k - 3:] == b[:3]


def test_toy_code_search():
    sigma = Sft.avoiding("110111")
    coding = SymbolCoding(2, 33)
    code = search_toy_code(sigma, [(0,) * 15], coding, 15)
    words = code.codewords()
    assert len(words) == 66 and len(set(words)) == 66
    assert all(not sigma.contains(w) for w in words)
    ok, _, _ = is_strongly_freezing_set(words)
    assert ok
    back = code_from_text(code_to_text(code))
    assert back.table == code.table and back.z_pool == code.z_pool


def test_toy_search_pigeonhole():
    with pytest.raises(DomainError):
        search_toy_code(Sft.avoiding("1111"), [(0,) * 5], SymbolCoding(2, 33), 5)
