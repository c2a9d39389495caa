import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spanforge.errors import SpanProgramError
from spanforge.spanprog import (RANK_CUTOFF, SpanProgram, eval_span, make_and,
                                make_or, make_passthrough, witness_report)

SQRT2 = math.sqrt(2)


# ---------------------------------------------------------------------------
# constructions


def test_make_and_parameters():
    P = make_and(1, 1)
    assert P.target == pytest.approx([2 ** -0.25, 2 ** -0.25])
    assert P.is_strict and P.is_monotone
    P31 = make_and(3, 1)
    assert P31.target[0] == pytest.approx((3 / 4) ** 0.25)
    assert P31.target[1] == pytest.approx((1 / 4) ** 0.25)


def test_make_or_parameters():
    P = make_or(1, 1)
    eps = np.array([P.inputs[(1, 1)][0, 0], P.inputs[(2, 1)][0, 0]])
    # the aggregate input norm reaches its extreme value 2^{1/4} at s1 = s2
    assert np.linalg.norm(eps) == pytest.approx(2 ** 0.25, abs=1e-12)


def test_make_rejects_nonpositive_weights():
    with pytest.raises(SpanProgramError):
        make_and(0, 1)
    with pytest.raises(SpanProgramError):
        make_or(1, -2)


# ---------------------------------------------------------------------------
# evaluation


@pytest.mark.parametrize("x,expected", [("11", 1), ("10", 0), ("01", 0), ("00", 0)])
def test_eval_and(x, expected):
    assert eval_span(make_and(1, 1), x) == expected


@pytest.mark.parametrize("x,expected", [("11", 1), ("10", 1), ("01", 1), ("00", 0)])
def test_eval_or(x, expected):
    assert eval_span(make_or(1, 1), x) == expected


def test_eval_zero_target_always_true():
    P = SpanProgram(n=1, target=np.zeros(2), free=None,
                    inputs={(1, 1): np.array([[1.0], [0.0]])})
    assert eval_span(P, "0") == 1 and eval_span(P, "1") == 1


def test_eval_passthrough():
    P = make_passthrough()
    assert eval_span(P, "1") == 1 and eval_span(P, "0") == 0


# ---------------------------------------------------------------------------
# witness sizes (the gate-program table)


@pytest.mark.parametrize("s1,s2", [(1.0, 1.0), (3.0, 1.0), (10.0, 0.5)])
def test_and_witness_table(s1, s2):
    P = make_and(s1, s2)
    costs = [math.sqrt(s1), math.sqrt(s2)]
    sp = math.sqrt(s1 + s2)
    for x in ("11", "10", "01"):
        assert witness_report(P, x, costs).size == pytest.approx(sp, rel=1e-12)
    assert witness_report(P, "00", costs).size == pytest.approx(sp / 2, rel=1e-12)


@pytest.mark.parametrize("s1,s2", [(1.0, 1.0), (3.0, 1.0), (10.0, 0.5)])
def test_or_witness_table(s1, s2):
    P = make_or(s1, s2)
    costs = [math.sqrt(s1), math.sqrt(s2)]
    sp = math.sqrt(s1 + s2)
    for x in ("00", "10", "01"):
        assert witness_report(P, x, costs).size == pytest.approx(sp, rel=1e-12)
    assert witness_report(P, "11", costs).size == pytest.approx(sp / 2, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(1.0, 100.0), st.floats(1.0, 100.0), st.integers(0, 3))
def test_and_or_duality(s1, s2, xi):
    # the AND program's witness size equals the OR program's on the
    # complemented input
    x = ((xi >> 1) & 1, xi & 1)
    xbar = (1 - x[0], 1 - x[1])
    costs = [math.sqrt(s1), math.sqrt(s2)]
    a = witness_report(make_and(s1, s2), x, costs).size
    b = witness_report(make_or(s1, s2), xbar, costs).size
    assert a == pytest.approx(b, rel=1e-9)


def test_full_witness_sizes():
    P = make_and(1, 1)
    r = witness_report(P, "11")
    assert r.full_size == pytest.approx(1 + SQRT2, abs=1e-12)
    # strict program: full = 1 + plain at the same optimum
    assert r.full_size == pytest.approx(1 + r.size, abs=1e-12)
    r0 = witness_report(make_or(1, 1), "00")
    assert r0.full_size == pytest.approx(1 + SQRT2, abs=1e-12)
    assert r0.witness == pytest.approx([1.0])  # forced separating scalar


def test_witness_feasibility_residuals():
    P = make_and(2, 3)
    r = witness_report(P, "11")
    assert r.residual < 1e-8
    r0 = witness_report(P, "01")
    assert r0.residual < 1e-8


def test_witness_against_nullspace_reference():
    # independent route: parametrize the constraint set by a null-space basis
    rng = np.random.default_rng(7)
    for trial in range(20):
        dim, m = 4, 6
        M = rng.normal(size=(dim, m))
        t = M @ rng.normal(size=m)  # guaranteed feasible
        d = rng.uniform(0.1, 3.0, size=m)
        # reference solve of min w^T diag(d) w with the same constraint
        w0, *_ = np.linalg.lstsq(M, t, rcond=RANK_CUTOFF)
        _, s, Vt = np.linalg.svd(M)
        rank = int(np.sum(s > RANK_CUTOFF * s[0]))
        N = Vt[rank:, :].T
        if N.size:
            z = np.linalg.lstsq(N.T @ np.diag(d) @ N,
                                -N.T @ (d * w0), rcond=None)[0]
            w_ref = w0 + N @ z
        else:
            w_ref = w0
        ref = float(w_ref @ (d * w_ref))
        # rebuild the program with those weights as per-input costs via a
        # diagonal stretch: scale each column by 1/sqrt(d_i) and keep unit
        # costs, which reproduces the weighted objective
        M2 = M / np.sqrt(d)
        P2 = SpanProgram(n=1, target=t, free=None, inputs={(1, 1): M2})
        got2 = witness_report(P2, "1")
        assert got2.size == pytest.approx(ref, rel=1e-8, abs=1e-8)


def test_zero_cost_coordinates_are_unpenalized():
    P = make_and(1, 1)
    r = witness_report(P, "11", [0.0, 1.0])
    # only the second coordinate is charged
    assert r.size == pytest.approx(P.target[1] ** 2, rel=1e-12)


def test_case_mismatch_raises():
    P = make_and(1, 1)
    from spanforge.errors import SolverError
    from spanforge.spanprog import _solve_false

    with pytest.raises(SolverError):
        _solve_false(P, "11", np.ones(2))


# ---------------------------------------------------------------------------
# serialization


def test_program_json_round_trip():
    P = make_and(3, 1)
    data = P.to_json()
    back = SpanProgram.from_json(json.dumps(data))
    assert back.n == P.n and back.dim == P.dim
    assert np.allclose(back.target, P.target)
    for key in P.inputs:
        assert np.allclose(back.inputs[key], P.inputs[key])
    assert [e.label for e in back.index_entries()] == \
        [e.label for e in P.index_entries()]


def test_program_json_schema_errors():
    with pytest.raises(SpanProgramError):
        SpanProgram.from_json({"n": 1})
    with pytest.raises(SpanProgramError):
        SpanProgram.from_json({"n": 1, "dim": 2, "target": [1.0],
                               "free": [], "inputs": []})
    with pytest.raises(SpanProgramError):
        SpanProgram.from_json({"n": 1, "dim": 1, "target": [1.0], "free": [],
                               "inputs": [{"j": 5, "b": 1, "vectors": [[1.0]]}]})


def test_witness_report_json():
    out = witness_report(make_or(1, 1), "10").to_json()
    assert set(out) == {"case", "size", "full_size", "residual"}
    assert out["case"] == 1
