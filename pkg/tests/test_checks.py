import pytest

from corrarms import checks, errors


def test_unknown_suite():
    with pytest.raises(errors.UnknownSuite):
        checks.verify_bounds("thm9")


def test_report_verdicts():
    rep = checks.BoundReport("x")
    rep.add("a", 1.0, 2.0)
    assert rep.passed
    rep.add("b", 1.0, 2.0, ">=")
    assert not rep.passed
    assert str(rep).splitlines()[0] == "x: FAIL"
    assert "[FAIL] b" in str(rep)


def test_kl_grid_size_and_order():
    pairs = checks.kl_grid()
    assert len(pairs) == 1000
    assert all(1 > r0 > r1 >= 0 for r0, r1 in pairs)


@pytest.mark.parametrize(
    "suite, scale",
    [
        ("lemma5", {"ts": (100,), "thetas": (2.0,)}),
        ("lemma7", {"pairs": [(0.9, 0.5), (0.3, 0.0)]}),
        ("lemma8", {"n_pairs": 10, "mc_samples": 100_000}),
        ("phi_star", {"trials": 500}),
        ("thm1", {"trials": 50}),
        ("thm2", {"trials": 500}),
        ("thm3", {"trials": 20}),
        ("thm4", {"trials": 20}),
    ],
)
def test_suites_pass_at_reduced_scale(suite, scale):
    rep = checks.verify_bounds(suite, seed=3, **scale)
    assert rep.lines and rep.passed, str(rep)
