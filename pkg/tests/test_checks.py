import math

import numpy as np
import pytest

import spanforge as sf
from spanforge.checks import run_lemma
from spanforge.compose import compose_formula
from spanforge.errors import NotCanonicalError
from spanforge.formula import all_inputs
from spanforge.spanprog import SpanProgram, make_and, make_or


def test_canonical_or_passes():
    rep = sf.check_canonical_premise(make_or(1, 1))
    assert rep.passed
    assert all(item.lhs <= item.rhs + item.tolerance for item in rep.items)


def test_canonical_and_raises():
    with pytest.raises(NotCanonicalError, match="3 false inputs"):
        sf.check_canonical_premise(make_and(1, 1))


def test_canonical_hand_built_and2():
    # canonical-shaped AND2: one basis vector per false input {00, 01, 10}
    P = SpanProgram(
        n=2, target=np.ones(3), free=None,
        inputs={(1, 1): np.array([[1.0], [2.0], [0.0]]),
                (2, 1): np.array([[1.0], [0.0], [2.0]])})
    for x, want in [("00", 0), ("01", 0), ("10", 0), ("11", 1)]:
        assert sf.eval_span(P, x) == want
    rep = sf.check_canonical_premise(P)
    assert rep.passed, [i.to_json() for i in rep.items if not i.passed]


def test_norm_lemma_or_instances():
    rep = sf.check_norm_lemma(make_or(1, 1))
    assert rep.passed
    lhs, rhs = rep.items[-1].lhs, rep.items[-1].rhs
    assert lhs == pytest.approx(1.7580266923, abs=1e-6)
    assert rhs == pytest.approx(4 * (1 + math.sqrt(2)) + 2, abs=1e-9)
    # asymmetric weights: the bound divides by the smallest cost
    rep = sf.check_norm_lemma(make_or(4, 1), s=[2.0, 1.0])
    assert rep.passed
    wsize = math.sqrt(5)
    assert rep.items[-1].rhs == pytest.approx(4 * (1 + wsize) + 2, abs=1e-9)


def test_norm_lemma_no_input_degenerate():
    P = SpanProgram(n=1, target=np.array([1.0, 1.0]), free=None, inputs={})
    # f is identically 0 -> canonical shape requires dim == #false inputs = 2
    rep = sf.check_norm_lemma(P)
    assert rep.passed
    assert rep.items[-1].rhs == pytest.approx(2 * (1 + 0.0) + 0, abs=1e-12)


def test_compose_lemma_cases(bal4):
    C = compose_formula(bal4)
    for x in ["1111", "1100", "0000", "0110"]:
        rep = sf.check_compose_lemma(C, x)
        assert rep.passed, [i.to_json() for i in rep.items if not i.passed]


def test_compose_lemma_empty_subset():
    C = sf.direct_sum_compose(make_or(1, 1), {})
    for x in all_inputs(2):
        rep = sf.check_compose_lemma(C, x)
        assert rep.passed
        assert any("sigma taken to be 1" in note for note in rep.notes)


def test_directsum_norm(bal4, skew4):
    for f in (bal4, skew4):
        rep = sf.check_directsum_norm(compose_formula(f))
        assert rep.passed
    # single gate: the composed program is the gate program, slack factor 2
    rep = sf.check_directsum_norm(compose_formula(sf.parse("OR(x1,x2)")))
    assert rep.passed
    assert rep.items[0].lhs == pytest.approx(rep.items[0].rhs / 2, abs=1e-9)


def test_witness_bounds_equality_instance():
    C = compose_formula(sf.parse("AND(x1,x2)"))
    rep = sf.check_witness_bounds(C, "11")
    item = rep.items[0]
    assert rep.passed
    assert item.lhs == pytest.approx(item.rhs, abs=1e-12)
    assert item.lhs == pytest.approx(1 + math.sqrt(2), abs=1e-12)


def test_witness_bounds_sweep(bal4):
    C = compose_formula(bal4)
    for x in all_inputs(4):
        assert sf.check_witness_bounds(C, x).passed


def test_balance_lemma_equality_on_complete_or():
    # pure-OR complete trees meet the growth inequality with equality
    f = sf.parse("OR(OR(x1,x2),OR(x3,x4))")
    rep = sf.check_balance_lemma(f)
    assert rep.passed
    growth = [i for i in rep.items if "growth" in i.description]
    for item in growth:
        assert item.lhs == pytest.approx(item.rhs, abs=1e-9)


def test_balance_lemma_random():
    for seed in range(10):
        f = sf.random_andor(12, seed, alternating=False)
        assert sf.check_balance_lemma(f).passed


def test_gap_lemma_balanced(bal4):
    for x in all_inputs(4):
        rep = sf.check_gap_lemma(bal4, x)
        assert rep.passed


def test_gap_lemma_nonvacuous_with_weak_coupling(bal4):
    hits = 0
    for x in all_inputs(4):
        rep = sf.check_gap_lemma(bal4, x, w_out=0.01)
        assert rep.passed, [i.to_json() for i in rep.items if not i.passed]
        if not any("no eigenvalues" in n for n in rep.notes):
            hits += 1
    assert hits > 0


def test_gap_lemma_vacuous_flagged():
    f = sf.parse("AND(x1,x2)")
    rep = sf.check_gap_lemma(f, "11")
    if any("no eigenvalues" in n for n in rep.notes):
        assert rep.passed


def test_reports_carry_numbers(bal4):
    rep = sf.check_balance_lemma(bal4)
    data = rep.to_json()
    assert data["items"], "report must carry measured quantities"
    for item in data["items"]:
        assert isinstance(item["lhs"], float) and isinstance(item["rhs"], float)


def test_run_lemma_all(skew4):
    reports = run_lemma(skew4, "all")
    assert {r.lemma for r in reports} >= {"balance", "dsnorm", "gap",
                                          "compose", "witness"}
    assert all(r.passed for r in reports if r.items)


def test_run_lemma_canonical_skips_and_gates(skew4):
    reports = run_lemma(skew4, "canonical")
    skipped = [r for r in reports if r.notes and "skipped" in r.notes[0]]
    passed = [r for r in reports if r.items]
    assert skipped and passed  # AND vertices skip, OR vertices check


def test_verification_corpus_sweep():
    # deterministic small corpus: the four composition-level checkers
    for name, f in sf.verification_corpus(count=6, seed=3, max_n=7):
        C = compose_formula(f)
        assert sf.check_directsum_norm(C).passed, name
        for x in all_inputs(f.n):
            assert sf.check_compose_lemma(C, x).passed, (name, x)
            assert sf.check_witness_bounds(C, x).passed, (name, x)
            assert sf.check_gap_lemma(f, x).passed, (name, x)
