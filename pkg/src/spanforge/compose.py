"""Direct-sum composition of span programs, and composition along a formula.

Composing an outer program P on n bits with inner programs for a subset S of
its inputs produces a program on the concatenated inner input blocks.  The
inner-product space is the outer space plus one copy of each inner space per
outer input vector it feeds; for each such vector the composition adds a free
"link" vector (outer vector minus the embedded inner target), and embeds the
inner program's free and input vectors into the matching copy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import CompositionError, FormulaError
from .formula import Formula, GateNode, Leaf, Path, path_str
from .spanprog import (SpanProgram, make_and, make_or, make_passthrough,
                       max_witness_sizes)

InnerLike = Union[SpanProgram, "ComposedProgram", None]


def flat_program(obj) -> SpanProgram:
    return obj.program if isinstance(obj, ComposedProgram) else obj


@dataclass(eq=False)
class ComposedProgram:
    """A composed span program plus the provenance needed to audit it.

    ``inners`` maps outer input positions in ``subset`` to the pair of
    programs computing the complemented and plain inner function (either may
    be None when unused).  ``children`` holds composed inner programs for
    formula composition, keyed the same way.  ``bit_offset[j]`` is the number
    of composed input bits preceding outer input j's block.
    """

    program: SpanProgram
    outer: SpanProgram
    inners: dict[int, tuple[InnerLike, InnerLike]]
    subset: frozenset[int]
    bit_offset: dict[int, int]
    block_width: dict[int, int]
    costs: dict[int, float] = field(default_factory=dict)
    formula: Formula | None = None
    path: str = "r"
    children: dict[int, "ComposedProgram"] = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.program.n

    def inner_bits(self, j: int, x: Sequence[int] | str) -> tuple[int, ...]:
        bits = tuple(int(b) for b in x)
        lo = self.bit_offset[j]
        return bits[lo: lo + self.block_width[j]]

    def gate_programs(self) -> dict[str, SpanProgram]:
        """All single-gate programs used in this composition, by vertex path."""
        out = {self.path: self.outer}
        for child in self.children.values():
            out.update(child.gate_programs())
        return out

    def vertex_programs(self) -> dict[str, "ComposedProgram"]:
        out = {self.path: self}
        for child in self.children.values():
            out.update(child.vertex_programs())
        return out

    def max_sizes(self, limit: int = 16) -> tuple[float, float]:
        """Cached (max witness size, max full witness size), unit costs."""
        if "max_sizes" not in self._cache:
            self._cache["max_sizes"] = max_witness_sizes(self.program, limit=limit)
        return self._cache["max_sizes"]


def direct_sum_compose(outer: SpanProgram,
                       inners: Mapping[int, tuple[InnerLike, InnerLike]],
                       subset: Sequence[int] | None = None,
                       ) -> ComposedProgram:
    """Compose ``outer`` with inner program pairs on the positions in subset.

    ``inners[j]`` is the pair (program for the complement, program for the
    function) substituted at outer input j.  Positions outside the subset
    stay single input bits.  Raises if a referenced inner program is missing
    (in particular, when the outer program gates vectors on x_j = 0 but no
    complement program was supplied) or if dimensions disagree.
    """
    S = frozenset(inners) if subset is None else frozenset(subset)
    if subset is not None and S != frozenset(inners):
        raise CompositionError("subset and inner map disagree")
    for j in S:
        if not 1 <= j <= outer.n:
            raise CompositionError(f"inner position {j} outside 1..{outer.n}")

    # widths and offsets of the composed input blocks
    width: dict[int, int] = {}
    for j in range(1, outer.n + 1):
        if j not in S:
            width[j] = 1
            continue
        p0, p1 = inners[j]
        ns = {flat_program(p).n for p in (p0, p1) if p is not None}
        if not ns:
            raise CompositionError(f"inner pair at position {j} is empty")
        if len(ns) != 1:
            raise CompositionError(f"inner programs at position {j} disagree on n")
        width[j] = ns.pop()
    offset: dict[int, int] = {}
    total_bits = 0
    for j in range(1, outer.n + 1):
        offset[j] = total_bits
        total_bits += width[j]

    # inner-product-space blocks: outer first, then one inner copy per
    # outer input vector being substituted
    blocks: list[tuple[tuple, int, int]] = [(("outer",), 0, outer.dim)]
    dim_total = outer.dim
    block_at: dict[tuple, tuple[int, int]] = {("outer",): (0, outer.dim)}
    inner_progs: dict[tuple[int, int], SpanProgram] = {}
    for j in sorted(S):
        for c in (0, 1):
            m_jc = outer.inputs[(j, c)].shape[1]
            if m_jc == 0:
                continue
            prog = inners[j][c]
            if prog is None:
                raise CompositionError(
                    f"outer program references input (j={j}, b={c}) but no "
                    f"{'complement ' if c == 0 else ''}inner program was supplied")
            inner = flat_program(prog)
            inner_progs[(j, c)] = inner
            for pos in range(m_jc):
                key = (j, c, pos)
                block_at[key] = (dim_total, inner.dim)
                blocks.append((key, dim_total, inner.dim))
                dim_total += inner.dim

    def embed(key: tuple, vec: np.ndarray) -> np.ndarray:
        out = np.zeros(dim_total)
        lo, d = block_at[key]
        out[lo: lo + d] = vec
        return out

    target = embed(("outer",), outer.target)

    outer_entries = outer.index_entries()
    outer_input_label = {(e.j, e.b, e.pos): e.label
                         for e in outer_entries if e.kind == "input"}

    free_cols: list[np.ndarray] = []
    free_labels: list[str] = []
    for i in range(outer.num_free):
        free_cols.append(embed(("outer",), outer.free[:, i]))
        free_labels.append(outer.free_labels[i])
    for j in sorted(S):
        for c in (0, 1):
            if (j, c) not in inner_progs:
                continue
            inner = inner_progs[(j, c)]
            for pos in range(outer.inputs[(j, c)].shape[1]):
                label = outer_input_label[(j, c, pos)]
                col = embed(("outer",), outer.inputs[(j, c)][:, pos]) \
                    - embed((j, c, pos), inner.target)
                free_cols.append(col)
                free_labels.append(f"{label}/link")
    for j in sorted(S):
        for c in (0, 1):
            if (j, c) not in inner_progs:
                continue
            inner = inner_progs[(j, c)]
            for pos in range(outer.inputs[(j, c)].shape[1]):
                label = outer_input_label[(j, c, pos)]
                for i in range(inner.num_free):
                    free_cols.append(embed((j, c, pos), inner.free[:, i]))
                    free_labels.append(f"{label}/{inner.free_labels[i]}")

    input_cols: dict[tuple[int, int], list[np.ndarray]] = {}
    input_labels: dict[tuple[int, int], list[str]] = {}

    def add_input(bit: int, b: int, col: np.ndarray, label: str) -> None:
        input_cols.setdefault((bit, b), []).append(col)
        input_labels.setdefault((bit, b), []).append(label)

    for j in range(1, outer.n + 1):
        if j not in S:
            bit = offset[j] + 1
            for b in (0, 1):
                block = outer.inputs[(j, b)]
                for pos in range(block.shape[1]):
                    add_input(bit, b, embed(("outer",), block[:, pos]),
                              outer_input_label[(j, b, pos)])
            continue
        for c in (0, 1):
            if (j, c) not in inner_progs:
                continue
            inner = inner_progs[(j, c)]
            for pos in range(outer.inputs[(j, c)].shape[1]):
                label = outer_input_label[(j, c, pos)]
                for k in range(1, inner.n + 1):
                    bit = offset[j] + k
                    for b in (0, 1):
                        block = inner.inputs[(k, b)]
                        inner_lab = inner.input_labels[(k, b)]
                        for i in range(block.shape[1]):
                            add_input(bit, b, embed((j, c, pos), block[:, i]),
                                      f"{label}/{inner_lab[i]}")

    program = SpanProgram(
        n=total_bits,
        target=target,
        free=np.column_stack(free_cols) if free_cols else np.zeros((dim_total, 0)),
        inputs={key: np.column_stack(cols) for key, cols in input_cols.items()},
        free_labels=tuple(free_labels),
        input_labels={key: tuple(labels) for key, labels in input_labels.items()})

    children = {j: pair[1] for j, pair in inners.items()
                if isinstance(pair[1], ComposedProgram)}
    return ComposedProgram(program=program, outer=outer,
                           inners=dict(inners), subset=S,
                           bit_offset=offset, block_width=width,
                           children=children)


def compose_formula(formula: Formula) -> ComposedProgram:
    """Compose gate programs along a fan-in-2 AND-OR formula.

    Each vertex uses the AND/OR program weighted by its two subformula
    sizes; leaf children stay direct input bits.  Other gates must carry an
    attached program pair; a non-monotone attached program over an internal
    child raises, since complement programs for subformulas are not derived.
    """
    order = formula.leaf_indices()
    if order != sorted(order):
        raise CompositionError(
            "compose_formula expects leaf indices in left-to-right order "
            f"(got {order}); renumber the variables")
    sizes = formula.subtree_sizes()

    def rec(path: Path, node) -> ComposedProgram | None:
        if isinstance(node, Leaf):
            return None
        label = path_str(path)
        weights = [sizes[path + (j,)] for j in range(len(node.children))]
        if node.gate.is_and and node.gate.arity == 2:
            outer = make_and(weights[0], weights[1], prefix=f"{label}:")
        elif node.gate.is_or and node.gate.arity == 2:
            outer = make_or(weights[0], weights[1], prefix=f"{label}:")
        elif node.gate.attached_programs is not None:
            outer = node.gate.attached_programs[0]
            if not isinstance(outer, SpanProgram) or outer.n != node.gate.arity:
                raise CompositionError(
                    f"attached program for gate {node.gate.name} does not "
                    f"match its arity")
        elif node.gate.is_and or node.gate.is_or:
            raise FormulaError(
                f"gate {node.gate.name} has fan-in {node.gate.arity}; "
                f"apply expand_fanin2 first")
        else:
            raise CompositionError(
                f"gate {node.gate.name} has no attached span programs")

        inners: dict[int, tuple[InnerLike, InnerLike]] = {}
        for j, child in enumerate(node.children):
            sub = rec(path + (j,), child)
            if sub is not None:
                inners[j + 1] = (None, sub)
        composed = direct_sum_compose(outer, inners)
        composed.formula = _subformula(formula, path)
        composed.path = label
        composed.costs = {j + 1: float(np.sqrt(w)) for j, w in enumerate(weights)}
        return composed

    if isinstance(formula.root, Leaf):
        prog = make_passthrough(prefix="r:")
        return ComposedProgram(program=prog, outer=prog, inners={},
                               subset=frozenset(), bit_offset={1: 0},
                               block_width={1: 1}, formula=formula, path="r")
    composed = rec((), formula.root)
    assert composed is not None
    return composed


def _subformula(formula: Formula, path: Path) -> Formula:
    """Subtree at ``path`` with its leaves renumbered to 1..s."""
    node = formula.node_at(path)
    indices = sorted(formula.leaf_indices(path))
    mapping = {orig: new + 1 for new, orig in enumerate(indices)}

    def rec(n):
        if isinstance(n, Leaf):
            return Leaf(mapping[n.index])
        return GateNode(n.gate, tuple(rec(c) for c in n.children))

    return Formula(rec(node), len(indices))
