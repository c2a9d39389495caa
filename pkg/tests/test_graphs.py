import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import spanforge as sf
from spanforge.compose import compose_formula
from spanforge.formula import all_inputs
from spanforge.graphs import (abs_norm, biadjacency, input_graph,
                              query_estimate, spectral_report, to_dot,
                              zero_witness_exists)
from spanforge.spanprog import SpanProgram, make_and, make_or

SQRT2 = math.sqrt(2)


def test_biadjacency_or():
    pg = biadjacency(make_or(1, 1))
    eps = 2 ** -0.25
    expected = np.array([[1, eps, eps], [0, 1, 0], [0, 0, 1]])
    assert np.allclose(pg.biadj, expected)


def test_biadjacency_and_block_shape():
    pg = biadjacency(make_and(1, 1))
    assert pg.biadj.shape == (4, 3)
    a = 2 ** -0.25
    assert np.allclose(pg.biadj[:, 0], [a, a, 0, 0])


def test_biadjacency_no_inputs():
    P = SpanProgram(n=1, target=np.array([0.7]), free=None, inputs={})
    pg = biadjacency(P)
    assert pg.biadj.shape == (1, 1) and pg.biadj[0, 0] == 0.7


def test_input_graph_partner_rows():
    P = make_or(1, 1)
    assert input_graph(P, "11").biadj.shape == (1, 3)  # both partners removed
    assert input_graph(P, "00").biadj.shape == (3, 3)  # identity kept
    assert input_graph(make_and(1, 1), "10").biadj.shape == (3, 3)


def test_adjacency_symmetrization():
    pg = biadjacency(make_or(1, 1))
    A = pg.adjacency()
    assert np.allclose(A, A.T)
    assert pg.norm == pytest.approx(np.linalg.norm(A, 2), abs=1e-12)


def test_zero_witness_matches_eval():
    for P in (make_or(1, 1), make_and(1, 1), make_and(3, 1)):
        for x in all_inputs(2):
            assert zero_witness_exists(P, x) == sf.eval_span(P, x)


def test_zero_witness_composed(nested7):
    C = compose_formula(nested7)
    for x in all_inputs(7):
        assert zero_witness_exists(C.program, x) == nested7.evaluate(x)


def test_abs_norm_basics():
    assert abs_norm(np.eye(5)).spectral == pytest.approx(1.0)
    assert abs_norm(np.ones((2, 2))).spectral == pytest.approx(2.0)
    r = abs_norm(biadjacency(make_or(1, 1)).biadj)
    assert r.spectral == pytest.approx(1.7580266923, abs=1e-9)
    assert r.spectral ** 2 <= r.frobenius ** 2
    assert r.frobenius ** 2 == pytest.approx(3 + SQRT2, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (4, 5), elements=st.floats(-10, 10)))
def test_abs_norm_dominated_by_frobenius(M):
    r = abs_norm(M)
    assert r.spectral <= r.frobenius + 1e-9


def test_abs_adjacency_square_chain(bal4):
    # whenever the abs biadjacency norm is >= 1, the symmetrized norm is
    # within its square
    C = compose_formula(bal4)
    r = abs_norm(biadjacency(C.program).biadj)
    pg = biadjacency(C.program)
    if r.spectral >= 1.0:
        assert pg.abs_adjacency_norm <= r.spectral ** 2 + 1e-9


def test_query_estimate_or2():
    q = query_estimate(make_or(1, 1))
    assert q.full_witness_size == pytest.approx(1 + SQRT2, abs=1e-9)
    assert q.value == pytest.approx(q.full_witness_size * q.graph_norm, abs=1e-12)
    assert 4.0 < q.value < 4.5


def test_query_estimate_composed(bal4):
    C = compose_formula(bal4)
    q = query_estimate(C)
    assert q.full_witness_size == pytest.approx(5.0, abs=1e-9)
    q_at = query_estimate(C, x="1100")
    assert q_at.value <= q.value + 1e-9


def test_query_estimate_passthrough():
    q = query_estimate(sf.make_passthrough())
    assert q.value > 0  # recorded, not asserted against a closed form


def test_spectral_report_contract():
    A = np.diag([0.0, 0.5, -0.5, 2.0])
    rep = spectral_report(A)
    assert rep.zero_dim == 1
    assert rep.gap == pytest.approx(0.5)
    out = rep.to_json()
    assert set(out) == {"eigenvalues", "gap", "zero_dim", "T_est"}


def test_dot_export(bal4):
    C = compose_formula(bal4)
    dot = to_dot(biadjacency(C.program))
    assert dot.startswith("graph")
    assert 'weight="' in dot and "--" in dot
    # deterministic
    assert dot == to_dot(biadjacency(compose_formula(bal4).program))
