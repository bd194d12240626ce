import itertools

import pytest

from rice_ca.ca_core import (CellularAutomaton, DomainError, PeriodicConfiguration, apply_local,
                             config_from_text, config_to_text, eca, eventual_cycle, format_word,
                             identity_ca, is_quiescent, is_spreading, iterate, pad_radius,
                             parse_word, power, rule_from_text, rule_to_text, step, table_ca,
                             uniform_period)


def naive_eca(n, cells):
    P = len(cells)
    return tuple((n >> (4 * cells[i - 1] + 2 * cells[i] + cells[(i + 1) % P])) & 1
                 for i in range(P))


def test_word_roundtrip():
    w = parse_word("0a9Z")
    assert w == (0, 10, 9, 61)
    assert format_word(w) == "0a9Z"


@pytest.mark.parametrize("n", [0, 30, 90, 110, 128, 184, 255])
def test_eca_matches_wolfram_numbering(n, rng):
    for _ in range(20):
        cells = tuple(rng.randrange(2) for _ in range(rng.randrange(1, 12)))
        x = PeriodicConfiguration(2, cells)
        assert step(eca(n), x).cells == naive_eca(n, cells)


def test_rule30_known_row():
    x = PeriodicConfiguration.from_string("0000100000")
    assert format_word(step(eca(30), x).cells) == "0001110000"


def test_apply_local_shrinks_by_2r():
    assert apply_local(eca(128), parse_word("01110")) == (0, 1, 0)


def test_power_and_padding_agree_with_iteration(rng):
    g = eca(110)
    g3 = power(g, 3)
    assert g3.radius == 3
    for _ in range(30):
        x = PeriodicConfiguration(2, tuple(rng.randrange(2) for _ in range(9)))
        assert step(g3, x) == iterate(g, x, 3)
        assert step(pad_radius(g, 2), x) == step(g, x)


def test_quiescent_spreading_and_uniform_period():
    assert is_quiescent(eca(128), 0) and is_quiescent(eca(128), 1)
    assert is_spreading(eca(0), 0)
    assert not is_spreading(eca(204), 0)
    assert uniform_period(eca(1)) == 2      # 000 -> 1, 111 -> 0
    assert uniform_period(identity_ca()) == 1


def test_eventual_cycle_of_shift():
    shift = table_ca(2, 1, lambda w: w[2])
    s = eventual_cycle(shift, PeriodicConfiguration.from_string("0011"))
    assert s.tail == 0 and len(s.cycle) == 4
    s = eventual_cycle(eca(128), PeriodicConfiguration.from_string("011100"))
    assert s.tail == 2 and s.cycle[0].cells == (0,) * 6


def test_rule_and_config_text_roundtrip():
    for n in (0, 54, 255):
        ca = rule_from_text(rule_to_text(eca(n)))
        assert ca.table == eca(n).table
    x = PeriodicConfiguration(5, (0, 4, 2, 2))
    assert config_from_text(config_to_text(x)) == x


def test_bad_inputs_raise():
    with pytest.raises(DomainError):
        CellularAutomaton(2, 1, table=b"\0" * 7)
    with pytest.raises(DomainError):
        PeriodicConfiguration(2, (0, 2))
    with pytest.raises(DomainError):
        PeriodicConfiguration(2, ())
    with pytest.raises(DomainError):
        rule_from_text("alphabet: 2\nradius: 1\ntable: 0101\n")


def test_table_ca_enumerates_every_window():
    ca = table_ca(3, 1, lambda w: (w[0] + w[2]) % 3)
    for w in itertools.product(range(3), repeat=3):
        assert ca.local(w) == (w[0] + w[2]) % 3
