"""Closed-form witness-size recursions for composed AND-OR programs.

For the direct-sum composition along a fan-in-2 AND-OR formula with subtree
sizes as gate weights, the optimal witnesses decompose along the tree, so
the per-input witness size and full witness size satisfy exact recursions in
the child values.  These give an evaluator independent of the numeric
least-squares path (used to cross-check it) and an exact dynamic program for
the maxima over all inputs, usable at sizes where exhaustive sweeps are not.

Per vertex with children j = 1, 2 of subtree sizes s_j, the child weight is
a_j = sqrt(s_j / (s1 + s2)), and:

  true case  (value 1): W = cost-weighted squared witness norm, F = the same
      with free link coordinates charged (the global "+1" is added at the
      root);
  false case (value 0): W = penalty norm of the separating vector, F = W
      plus the separating vector's own squared norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import FormulaError
from .formula import Formula, GateNode, Leaf


@dataclass(frozen=True)
class CaseValues:
    value: int
    w: float
    f: float


def _gate_kind(node: GateNode) -> str:
    if node.gate.is_and and node.gate.arity == 2:
        return "and"
    if node.gate.is_or and node.gate.arity == 2:
        return "or"
    raise FormulaError(
        f"witness recursion needs fan-in-2 AND/OR gates, found {node.gate.name}")


def _leaf_count(node) -> int:
    if isinstance(node, Leaf):
        return 1
    return sum(_leaf_count(c) for c in node.children)


def _rec(node: GateNode, bits: tuple[int, ...]) -> CaseValues:
    kind = _gate_kind(node)
    sizes = [_leaf_count(c) for c in node.children]
    sp = sum(sizes)
    weights = [math.sqrt(s / sp) for s in sizes]
    children: list[tuple[CaseValues, bool]] = []
    for child in node.children:
        if isinstance(child, Leaf):
            children.append((CaseValues(bits[child.index - 1], 1.0, 1.0), True))
        else:
            children.append((_rec(child, bits), False))

    vals = [cv.value for cv, _ in children]
    if kind == "and":
        if vals[0] & vals[1]:
            w = sum(a * (1.0 if leaf else cv.w)
                    for a, (cv, leaf) in zip(weights, children))
            f = sum(a * (1.0 if leaf else 1.0 + cv.f)
                    for a, (cv, leaf) in zip(weights, children))
            return CaseValues(1, w, f)
        w = 1.0 / sum(a / (1.0 if leaf else cv.w)
                      for a, (cv, leaf) in zip(weights, children)
                      if cv.value == 0)
        f = 1.0 / sum(a / (2.0 if leaf else 1.0 + cv.f)
                      for a, (cv, leaf) in zip(weights, children)
                      if cv.value == 0)
        return CaseValues(0, w, f)

    if vals[0] | vals[1]:
        w = 1.0 / sum(a / (1.0 if leaf else cv.w)
                      for a, (cv, leaf) in zip(weights, children)
                      if cv.value == 1)
        f = 1.0 / sum(a / (1.0 if leaf else 1.0 + cv.f)
                      for a, (cv, leaf) in zip(weights, children)
                      if cv.value == 1)
        return CaseValues(1, w, f)
    w = sum(a * (1.0 if leaf else cv.w)
            for a, (cv, leaf) in zip(weights, children))
    f = 1.0 + sum(a * (1.0 if leaf else cv.f)
                  for a, (cv, leaf) in zip(weights, children))
    return CaseValues(0, w, f)


def _check_input(formula: Formula, x) -> tuple[int, ...]:
    bits = tuple(int(b) for b in x)
    if len(bits) != formula.n:
        raise FormulaError(f"input has {len(bits)} bits, formula reads {formula.n}")
    return bits


def evaluate_cases(formula: Formula, x) -> CaseValues:
    bits = _check_input(formula, x)
    if isinstance(formula.root, Leaf):
        return CaseValues(bits[0], 1.0, 2.0 if bits[0] == 0 else 1.0)
    return _rec(formula.root, bits)


def witness_size_at(formula: Formula, x) -> float:
    """Witness size of the formula's composed program on x (unit costs)."""
    if isinstance(formula.root, Leaf):
        _check_input(formula, x)
        return 1.0
    return _rec(formula.root, _check_input(formula, x)).w


def full_witness_size_at(formula: Formula, x) -> float:
    """Full witness size of the composed program on x (unit costs)."""
    if isinstance(formula.root, Leaf):
        bits = _check_input(formula, x)
        return 2.0
    cv = _rec(formula.root, _check_input(formula, x))
    return 1.0 + cv.f if cv.value == 1 else cv.f


@dataclass(frozen=True)
class CaseMaxima:
    w1: float
    f1: float
    w0: float
    f0: float


def _max_rec(node: GateNode) -> CaseMaxima:
    kind = _gate_kind(node)
    sizes = [_leaf_count(c) for c in node.children]
    sp = sum(sizes)
    weights = [math.sqrt(s / sp) for s in sizes]
    # per child: (w1 term, f1 term, w0 term, f0 term under AND, f0 term under OR)
    terms = []
    for child in node.children:
        if isinstance(child, Leaf):
            terms.append((1.0, 1.0, 1.0, 2.0, 1.0))
        else:
            m = _max_rec(child)
            terms.append((m.w1, 1.0 + m.f1, m.w0, 1.0 + m.f0, m.f0))

    if kind == "and":
        w1 = sum(a * t[0] for a, t in zip(weights, terms))
        f1 = sum(a * t[1] for a, t in zip(weights, terms))
        w0 = max(t[2] / a for a, t in zip(weights, terms))
        f0 = max(t[3] / a for a, t in zip(weights, terms))
    else:
        w1 = max(t[0] / a for a, t in zip(weights, terms))
        f1 = max(t[1] / a for a, t in zip(weights, terms))
        w0 = sum(a * t[2] for a, t in zip(weights, terms))
        f0 = 1.0 + sum(a * t[4] for a, t in zip(weights, terms))
    return CaseMaxima(w1=w1, f1=f1, w0=w0, f0=f0)


def max_witness_sizes_tree(formula: Formula) -> tuple[float, float]:
    """Exact (max witness size, max full witness size) over all inputs."""
    if isinstance(formula.root, Leaf):
        return 1.0, 2.0
    m = _max_rec(formula.root)
    return max(m.w1, m.w0), max(1.0 + m.f1, m.f0)
