import math

import numpy as np
import pytest

import spanforge as sf
from spanforge.compose import compose_formula, direct_sum_compose
from spanforge.errors import CompositionError
from spanforge.formula import all_inputs
from spanforge.oracles import (full_witness_size_at, max_witness_sizes_tree,
                               witness_size_at)
from spanforge.spanprog import (eval_span, make_and, make_or,
                                max_witness_sizes, witness_report)


def test_empty_subset_is_isomorphic():
    P = make_or(1, 1)
    C = direct_sum_compose(P, {})
    assert C.program.n == P.n and C.program.dim == P.dim
    assert C.program.num_free == 0
    assert np.allclose(C.program.matrix(), P.matrix())
    for x in all_inputs(2):
        assert eval_span(C.program, x) == eval_span(P, x)


def test_or_of_two_ands():
    outer = make_or(2, 2)
    inner = make_and(1, 1)
    C = direct_sum_compose(outer, {1: (None, inner), 2: (None, inner)})
    assert C.program.n == 4
    for x in all_inputs(4):
        expected = (x[0] & x[1]) | (x[2] & x[3])
        assert eval_span(C.program, x) == expected
    wmax = max_witness_sizes(C.program)[0]
    assert wmax == pytest.approx(2.0, abs=1e-9)


def test_and_with_partial_substitution():
    outer = make_and(1, 1)
    C = direct_sum_compose(outer, {1: (None, make_or(1, 1))})
    assert C.program.n == 3
    for x in all_inputs(3):
        expected = (x[0] | x[1]) & x[2]
        assert eval_span(C.program, x) == expected


def test_missing_complement_program_raises():
    # an outer program gating on x_j = 0 needs the complement inner program
    outer = make_and(1, 1)
    outer.inputs[(1, 0)] = np.array([[0.5], [0.0]])
    outer.input_labels[(1, 0)] = ("neg",)
    with pytest.raises(CompositionError, match="complement"):
        direct_sum_compose(outer, {1: (None, make_or(1, 1))})


def test_labels_trace_paths(bal4):
    C = compose_formula(bal4)
    labels = [e.label for e in C.program.index_entries()]
    assert any(lab.endswith("/link") for lab in labels)
    assert any(lab.startswith("r:or") and "r/0:and" in lab for lab in labels)


def test_compose_formula_single_gate():
    f = sf.parse("OR(x1,x2)")
    C = compose_formula(f)
    assert np.allclose(C.program.matrix(), make_or(1, 1).matrix())


def test_compose_formula_single_leaf():
    f = sf.normalize(sf.parse("OR(x1,CONST0())"))
    C = compose_formula(f)
    assert C.program.n == 1
    assert eval_span(C.program, "1") == 1 and eval_span(C.program, "0") == 0


def test_compose_requires_fanin2():
    with pytest.raises(sf.SpanforgeError):
        compose_formula(sf.parse("AND(x1,x2,x3)"))
    with pytest.raises(CompositionError, match="attached"):
        compose_formula(sf.parse("MAJ3(x1,x2,x3)"))


@pytest.mark.parametrize("text,n", [
    ("OR(AND(x1,x2),AND(x3,x4))", 4),
    ("AND(OR(AND(x1,x2),x3),x4)", 4),
    ("OR(AND(OR(AND(x1,x2),x3),x4),AND(x5,OR(x6,x7)))", 7),
])
def test_composition_evaluates_and_reaches_sqrt_n(text, n):
    f = sf.parse(text)
    C = compose_formula(f)
    best = 0.0
    for x in all_inputs(n):
        assert eval_span(C.program, x) == f.evaluate(x)
        best = max(best, witness_report(C.program, x).size)
    assert best == pytest.approx(math.sqrt(n), abs=1e-6)


def test_numeric_sizes_match_closed_form_oracle(nested7):
    C = compose_formula(nested7)
    for x in all_inputs(7):
        r = witness_report(C.program, x)
        assert r.size == pytest.approx(witness_size_at(nested7, x), rel=1e-9)
        assert r.full_size == pytest.approx(full_witness_size_at(nested7, x),
                                            rel=1e-9)


def test_oracle_maxima_match_exhaustive():
    for seed in range(6):
        f = sf.random_andor(7, seed)
        C = compose_formula(f)
        w_num, wf_num = max_witness_sizes(C.program)
        w_dp, wf_dp = max_witness_sizes_tree(f)
        assert w_num == pytest.approx(w_dp, rel=1e-9)
        assert wf_num == pytest.approx(wf_dp, rel=1e-9)
        assert w_dp == pytest.approx(math.sqrt(f.n), rel=1e-12)


def test_composition_bound_against_outer():
    # composed witness size never exceeds the outer program's at the induced
    # input with inner witness sizes as costs
    f = sf.parse("OR(AND(x1,x2),AND(x3,x4))")
    C = compose_formula(f)
    outer = C.outer
    for x in all_inputs(4):
        y = [C.inner_bits(1, x)[0] & C.inner_bits(1, x)[1],
             C.inner_bits(2, x)[0] & C.inner_bits(2, x)[1]]
        r = [math.sqrt(2), math.sqrt(2)]
        lhs = witness_report(C.program, x).size
        rhs = witness_report(outer, y, r).size
        assert lhs <= rhs + 1e-9


def test_per_vertex_provenance(skew4):
    C = compose_formula(skew4)
    vp = C.vertex_programs()
    assert set(vp) == {"r", "r/0", "r/0/0"}
    assert vp["r/0/0"].program.n == 2
    gp = C.gate_programs()
    assert gp["r"].n == 2 and len(gp) == 3


def test_compose_nonalternating_shapes():
    # adjacent equal gates produce structurally different compositions;
    # evaluation equivalence must still hold
    for seed in range(8):
        f = sf.random_andor(8, seed, alternating=False)
        C = compose_formula(f)
        for x in all_inputs(8):
            assert eval_span(C.program, x) == f.evaluate(x), (seed, x)
    w, wf = max_witness_sizes(compose_formula(
        sf.parse("OR(OR(x1,x2),x3)")).program)
    assert w == pytest.approx(math.sqrt(3), abs=1e-9)


def test_compose_uses_attached_programs():
    from spanforge.formula import Formula, GateNode, Leaf
    from spanforge.gates import DEFAULT_REGISTRY, GateSpec

    myor = GateSpec("MYOR", 2, (0, 1, 1, 1),
                    attached_programs=(make_or(1, 1), None))
    f = Formula(GateNode(myor, (Leaf(1), Leaf(2))), 2)
    C = compose_formula(f)
    assert np.allclose(C.program.matrix(), make_or(1, 1).matrix())
    # and nested over an internal child (monotone, so no dual needed)
    and2 = DEFAULT_REGISTRY.resolve("AND", 2)
    inner = GateNode(and2, (Leaf(1), Leaf(2)))
    g = Formula(GateNode(myor, (inner, Leaf(3))), 3)
    Cg = compose_formula(g)
    for x in all_inputs(3):
        assert eval_span(Cg.program, x) == ((x[0] & x[1]) | x[2])


def test_compose_rejects_permuted_leaves():
    from spanforge.formula import Formula, GateNode, Leaf
    from spanforge.gates import DEFAULT_REGISTRY

    and2 = DEFAULT_REGISTRY.resolve("AND", 2)
    swapped = Formula(GateNode(and2, (Leaf(2), Leaf(1))), 2)
    with pytest.raises(CompositionError, match="left-to-right"):
        compose_formula(swapped)
