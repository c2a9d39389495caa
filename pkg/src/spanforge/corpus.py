"""Seeded random formula families for sweeps and verification corpora.

Shapes are drawn by recursive splitting of the leaf count; gates alternate
between AND and OR along every root-to-leaf path unless ``alternating`` is
disabled.  All draws are deterministic in the seed.
"""

from __future__ import annotations

import numpy as np

from .errors import FormulaError
from .formula import Formula, GateNode, Leaf, _finish_formula
from .gates import DEFAULT_REGISTRY

_AND2 = DEFAULT_REGISTRY.resolve("AND", 2)
_OR2 = DEFAULT_REGISTRY.resolve("OR", 2)


def _gate(name: str):
    return _AND2 if name == "AND" else _OR2


def _other(name: str) -> str:
    return "OR" if name == "AND" else "AND"


def balanced_andor(n: int, root_gate: str = "OR") -> Formula:
    """Complete alternating binary tree; n must be a power of two."""
    if n < 1 or n & (n - 1):
        raise FormulaError(f"balanced family needs a power-of-two size, got {n}")

    counter = [0]

    def rec(size: int, gate_name: str):
        if size == 1:
            counter[0] += 1
            return Leaf(counter[0])
        half = size // 2
        child = _other(gate_name)
        return GateNode(_gate(gate_name), (rec(half, child), rec(half, child)))

    return _finish_formula(rec(n, root_gate))


def skew_andor(n: int, root_gate: str = "AND") -> Formula:
    """Maximally unbalanced chain: each vertex pairs a subtree with a leaf."""
    if n < 1:
        raise FormulaError("size must be positive")
    if n == 1:
        return Formula(Leaf(1), 1)
    node = Leaf(1)
    gate_name = root_gate
    # build bottom-up so the root carries the requested gate
    names = []
    g = root_gate
    for _ in range(n - 1):
        names.append(g)
        g = _other(g)
    for depth, leaf_index in enumerate(range(2, n + 1)):
        node = GateNode(_gate(names[n - 1 - depth]), (node, Leaf(leaf_index)))
    return _finish_formula(node)


def random_andor(n: int, seed: int, alternating: bool = True) -> Formula:
    """Random-shape AND-OR formula on n leaves (deterministic in the seed)."""
    if n < 1:
        raise FormulaError("size must be positive")
    rng = np.random.default_rng(seed)
    if n == 1:
        return Formula(Leaf(1), 1)
    counter = [0]

    def rec(size: int, gate_name: str):
        if size == 1:
            counter[0] += 1
            return Leaf(counter[0])
        left = int(rng.integers(1, size))
        child = _other(gate_name) if alternating \
            else ("AND" if rng.integers(2) else "OR")
        return GateNode(_gate(gate_name),
                        (rec(left, child), rec(size - left, child)))

    root_gate = "AND" if rng.integers(2) else "OR"
    return _finish_formula(rec(n, root_gate))


def family_formula(family: str, n: int, seed: int = 0) -> Formula:
    if family == "balanced-andor":
        return balanced_andor(n)
    if family == "skew-andor":
        return skew_andor(n)
    if family == "random-andor":
        return random_andor(n, seed)
    raise FormulaError(f"unknown family {family!r}")


def verification_corpus(count: int = 50, seed: int = 0,
                        max_n: int = 12) -> list[tuple[str, Formula]]:
    """The standard corpus: one formula per size 2..max_n, then random
    smaller ones, all with alternating gates (so the tree conventions match
    the formula metrics exactly)."""
    out: list[tuple[str, Formula]] = []
    sizes = list(range(2, max_n + 1))
    for i, n in enumerate(sizes):
        out.append((f"corpus{i:02d}_n{n}", random_andor(n, seed + i)))
    i = len(sizes)
    while len(out) < count:
        n = 2 + (seed + i) % 8  # sizes 2..9 keep exhaustive sweeps cheap
        out.append((f"corpus{i:02d}_n{n}", random_andor(n, seed + 1000 + i)))
        i += 1
    return out[:count]
