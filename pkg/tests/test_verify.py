import pytest

from rice_ca.ca_core import DomainError
from rice_ca.verify import SUITES, run_suite, trial_rng


def test_trial_rng_is_per_trial():
    assert trial_rng(1, 5).random() == trial_rng(1, 5).random()
    assert trial_rng(1, 5).random() != trial_rng(1, 6).random()


def test_reports_are_deterministic():
    a = run_suite("reduction-agree", {}, seed=7, samples=200).to_text()
    b = run_suite("reduction-agree", {}, seed=7, samples=200).to_text()
    assert a == b
    assert "verdict: pass" in a


def test_timing_is_opt_in():
    rep = run_suite("code-roundtrip", {}, seed=0, samples=5)
    assert "elapsed" not in rep.to_text()
    assert "elapsed" in rep.to_text(timing=True)


@pytest.mark.parametrize("suite,mutation", [("preinv0", "kill-one"),
                                            ("preinv", "rotate-simulate"),
                                            ("reduction-agree", "flip-unfreeze")])
def test_negative_controls(suite, mutation):
    rep = run_suite(suite, {"mutation": mutation}, seed=42, samples=3000)
    assert rep.verdict == "fail"


def test_clean_suites_pass_small():
    for name in ("preinv0", "preinv"):
        assert run_suite(name, {}, seed=42, samples=1500).verdict == "pass"
    assert run_suite("sigomeg", {}, seed=0).verdict == "pass"


def test_fire_suite_small():
    rep = run_suite("fire", {"depth": "3", "distance": "3"})
    assert rep.verdict == "pass"


def test_bad_suite_and_params():
    with pytest.raises(DomainError):
        run_suite("nope")
    with pytest.raises(DomainError):
        run_suite("preinv", {}, samples=-1)
    assert set(SUITES) >= {"preinv0", "preinv", "reduction-agree", "ssgamma", "prodnilp",
                           "sigomeg", "squad", "freezing", "fire", "surjectivity"}
