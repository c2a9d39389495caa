"""Weighted NAND trees for fan-in-2 AND-OR formulas, and their spectra.

An AND-OR formula converts to a tree of NAND vertices (possibly with unary
pass-through inversions where equal gates are nested) whose leaves carry
possibly-complemented input literals; the output may be complemented as a
whole.  For a concrete input the tree gains one pendant child under each
leaf whose literal evaluates to 1, and an auxiliary vertex above the root.
Edge weights are (s_child / s_parent)^{1/4} from subtree leaf counts, 1 on
pendant edges, and a configurable output weight (default s_root^{-1/4}).

With these conventions a zero-eigenvalue eigenvector with support on the
auxiliary vertex exists iff the tree's own NAND value at the root is 1 (the
eigenvalue equation at the auxiliary vertex forces its neighbour to zero, so
the support lands on the auxiliary vertex itself).  ``calibrate_tree``
verifies this equivalence exhaustively and is a precondition for trusting
the small-eigenvalue analysis in the gap checker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .errors import CalibrationError, FormulaError
from .formula import Formula, FormulaMetrics, Leaf, Path, all_inputs, metrics

ZERO_AMP_TOL = 1e-10


# ---------------------------------------------------------------------------
# NAND form


@dataclass(frozen=True)
class NandLeaf:
    var: int
    negated: bool


@dataclass(frozen=True)
class NandGate:
    children: tuple["NandNode", ...]  # one child = pass-through inversion


NandNode = Union[NandLeaf, NandGate]


@dataclass(frozen=True)
class NandFormula:
    """NAND-gate form of an AND-OR formula (output possibly complemented)."""

    root: NandNode
    n: int
    output_negated: bool

    def nand_value(self, node: NandNode, bits: Sequence[int]) -> int:
        if isinstance(node, NandLeaf):
            lit = bits[node.var - 1]
            return 1 - lit if node.negated else lit
        prod = 1
        for c in node.children:
            prod *= self.nand_value(c, bits)
        return 1 - prod

    def value(self, x: Sequence[int] | str) -> int:
        bits = tuple(int(b) for b in x)
        if len(bits) != self.n:
            raise FormulaError(f"input has {len(bits)} bits, tree reads {self.n}")
        v = self.nand_value(self.root, bits)
        return 1 - v if self.output_negated else v


def to_nand_form(formula: Formula) -> NandFormula:
    """Convert a fan-in-2 AND-OR formula to NAND form.

    AND vertices become NAND with plain children, OR vertices become NAND of
    complemented children; where two equal gates meet, a unary NAND restores
    the required polarity.  The output is complemented iff the root is AND.
    """

    def natural(node) -> NandNode:
        # NAND-value of the result equals: not(subformula) under AND,
        # the subformula itself under OR
        if node.gate.is_and and node.gate.arity == 2:
            return NandGate(tuple(build(c, want=0) for c in node.children))
        if node.gate.is_or and node.gate.arity == 2:
            return NandGate(tuple(build(c, want=1) for c in node.children))
        raise FormulaError(
            f"NAND form needs fan-in-2 AND/OR gates, found {node.gate.name}")

    def build(node, want: int) -> NandNode:
        # returns a NAND node whose value is: subformula XOR want
        if isinstance(node, Leaf):
            return NandLeaf(node.var if hasattr(node, "var") else node.index,
                            negated=bool(want))
        is_and = node.gate.is_and
        nat = natural(node)
        natural_flag = 1 if is_and else 0
        if want == natural_flag:
            return nat
        return NandGate((nat,))

    if isinstance(formula.root, Leaf):
        return NandFormula(NandLeaf(formula.root.index, False), formula.n, False)
    root_flag = 1 if formula.root.gate.is_and else 0
    return NandFormula(natural(formula.root), formula.n,
                       output_negated=bool(root_flag))


# ---------------------------------------------------------------------------
# the weighted tree


@dataclass
class TreeVertex:
    label: str
    kind: str                  # aux_root | gate | inverter | leaf | pendant
    parent: int | None
    size: float
    sigma: float               # path-sum value used in the y formula
    nand: int | None           # None for the auxiliary root


@dataclass
class NandTree:
    vertices: list[TreeVertex]
    adjacency: np.ndarray
    aux_index: int
    root_index: int
    n: int
    sigma_root: float          # path sum at the tree root (tree recursion)
    formula_sigma: float       # path sum of the source formula
    w_out: float

    @property
    def size(self) -> int:
        return len(self.vertices)

    def e_max(self) -> float:
        return 1.0 / math.sqrt(8.0 * self.sigma_root ** 3 * self.n)

    def y_values(self, energy: float) -> np.ndarray:
        """Per-vertex y bound at the given eigenvalue (nan at the aux root)."""
        if energy < 0 or energy > self.e_max() + 1e-15:
            raise FormulaError(
                f"energy {energy:.6g} outside [0, {self.e_max():.6g}]")
        out = np.full(self.size, np.nan)
        c2 = self.sigma_root ** 2
        for i, v in enumerate(self.vertices):
            if v.kind == "aux_root":
                continue
            gamma = 4.0 * c2 * v.size * v.sigma
            denom = 1.0 - gamma * energy ** 2
            if denom <= 0:
                raise FormulaError("gamma * E^2 reached 1; energy out of range")
            out[i] = math.sqrt(v.size) * v.sigma / denom
        return out

    def gamma_values(self) -> np.ndarray:
        c2 = self.sigma_root ** 2
        return np.array([4.0 * c2 * v.size * v.sigma
                         if v.kind != "aux_root" else np.nan
                         for v in self.vertices])

    def edge_weight(self, child: int) -> float:
        p = self.vertices[child].parent
        assert p is not None
        return float(self.adjacency[p, child])

    def zero_support_on_aux(self, tol: float = ZERO_AMP_TOL) -> bool:
        evals, evecs = np.linalg.eigh(self.adjacency)
        scale = float(np.max(np.abs(evals)))
        if scale == 0.0:
            return True
        zero = np.abs(evals) <= 1e-10 * scale
        if not np.any(zero):
            return False
        return bool(np.max(np.abs(evecs[self.aux_index, zero])) > tol)

    def to_dot(self, name: str = "nandtree") -> str:
        lines = [f"graph {name} {{"]
        for i, v in enumerate(self.vertices):
            lines.append(f'  v{i} [label="{v.label}"];')
        for i, v in enumerate(self.vertices):
            if v.parent is not None:
                w = self.adjacency[v.parent, i]
                lines.append(f'  v{v.parent} -- v{i} [weight="{w:.12g}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_nand_tree(formula: Formula, x: Sequence[int] | str,
                    w_out: float | None = None) -> NandTree:
    """Build the input-specific weighted tree for a fan-in-2 AND-OR formula."""
    bits = tuple(int(b) for b in (x if not isinstance(x, str) else x))
    if len(bits) != formula.n:
        raise FormulaError(f"input has {len(bits)} bits, formula reads {formula.n}")
    nand = to_nand_form(formula)
    fm = metrics(formula)

    vertices: list[TreeVertex] = []
    edges: list[tuple[int, int, float]] = []

    def add_vertex(v: TreeVertex) -> int:
        vertices.append(v)
        return len(vertices) - 1

    def rec(node: NandNode, parent: int | None, label: str) -> tuple[int, float, float, int]:
        """Returns (index, size, sigma, nand value)."""
        if isinstance(node, NandLeaf):
            lit = bits[node.var - 1] ^ int(node.negated)
            idx = add_vertex(TreeVertex(label=f"{label}x{node.var}", kind="leaf",
                                        parent=parent, size=1.0, sigma=1.0,
                                        nand=lit))
            if lit == 1:
                pidx = add_vertex(TreeVertex(label=f"{label}x{node.var}/pendant",
                                             kind="pendant", parent=idx,
                                             size=1.0, sigma=1.0, nand=0))
                edges.append((idx, pidx, 1.0))
            return idx, 1.0, 1.0, lit
        idx = add_vertex(TreeVertex(label=label or "root",
                                    kind="gate" if len(node.children) == 2
                                    else "inverter",
                                    parent=parent, size=0.0, sigma=0.0, nand=0))
        sizes, sigmas, prod = [], [], 1
        for ci, child in enumerate(node.children):
            cidx, csize, csigma, cn = rec(child, idx, f"{label}{ci}/")
            sizes.append((cidx, csize))
            sigmas.append(csigma)
            prod *= cn
        size = sum(s for _, s in sizes)
        sigma = 1.0 / math.sqrt(size) + max(sigmas)
        for cidx, csize in sizes:
            edges.append((idx, cidx, (csize / size) ** 0.25))
        vertices[idx].size = size
        vertices[idx].sigma = sigma
        vertices[idx].nand = 1 - prod
        return idx, size, sigma, 1 - prod

    root_idx, root_size, root_sigma, _ = rec(nand.root, None, "")
    weight = root_size ** -0.25 if w_out is None else float(w_out)
    aux_idx = add_vertex(TreeVertex(label="aux", kind="aux_root", parent=None,
                                    size=float("nan"), sigma=float("nan"),
                                    nand=None))
    vertices[root_idx].parent = aux_idx
    edges.append((aux_idx, root_idx, weight))

    A = np.zeros((len(vertices), len(vertices)))
    for a, b, w in edges:
        A[a, b] = A[b, a] = w

    return NandTree(vertices=vertices, adjacency=A, aux_index=aux_idx,
                    root_index=root_idx, n=formula.n,
                    sigma_root=root_sigma, formula_sigma=fm.sigma_minus_root,
                    w_out=weight)


# ---------------------------------------------------------------------------
# the formula-level y map


def y_values(formula: Formula, energy: float,
             fm: FormulaMetrics | None = None) -> dict[Path, float]:
    """y_v = sqrt(s_v) * sigma(v) / (1 - gamma_v E^2) over formula vertices.

    gamma_v = 4 sigma(root)^2 s_v sigma(v); the energy must lie in
    [0, (8 sigma(root)^3 n)^{-1/2}], inside which gamma_v E^2 <= 1/2.
    """
    fm = fm or metrics(formula)
    c = fm.sigma_minus_root
    e_max = 1.0 / math.sqrt(8.0 * c ** 3 * fm.n)
    if energy < 0 or energy > e_max + 1e-15:
        raise FormulaError(f"energy {energy:.6g} outside [0, {e_max:.6g}]")
    out: dict[Path, float] = {}
    for path, s in fm.size.items():
        sig = fm.sigma_minus[path]
        gamma = 4.0 * c ** 2 * s * sig
        denom = 1.0 - gamma * energy ** 2
        if denom <= 0:
            raise FormulaError("gamma * E^2 reached 1; energy out of range")
        out[path] = math.sqrt(s) * sig / denom
    return out


# ---------------------------------------------------------------------------
# calibration


@dataclass
class CalibrationReport:
    passed: bool
    cases: int
    failures: list[str] = field(default_factory=list)


def calibrate_tree(formula: Formula, w_out: float | None = None,
                   max_n: int = 10) -> CalibrationReport:
    """Exhaustively verify the zero-eigenvector convention for one formula.

    For every input, a zero-eigenvalue eigenvector supported on the
    auxiliary vertex must exist iff the tree's root NAND value is 1.
    """
    if formula.n > max_n:
        raise FormulaError(f"calibration is exhaustive; n={formula.n} > {max_n}")
    nand = to_nand_form(formula)
    failures = []
    cases = 0
    for bits in all_inputs(formula.n):
        tree = build_nand_tree(formula, bits, w_out)
        expected = tree.vertices[tree.root_index].nand == 1
        got = tree.zero_support_on_aux()
        phi = formula.evaluate(bits)
        if nand.value(bits) != phi:
            failures.append(f"x={''.join(map(str, bits))}: NAND form value "
                            f"disagrees with the formula")
        if got != expected:
            failures.append(
                f"x={''.join(map(str, bits))}: zero-support {got} but root "
                f"NAND value {int(expected)}")
        cases += 1
    return CalibrationReport(passed=not failures, cases=cases,
                             failures=failures)


@lru_cache(maxsize=256)
def _calibrate_cached(formula: Formula, w_out: float | None) -> bool:
    report = calibrate_tree(formula, w_out)
    if not report.passed:
        raise CalibrationError(
            "tree convention failed calibration: " + "; ".join(report.failures[:3]))
    return True


def ensure_calibrated(formula: Formula, w_out: float | None = None,
                      max_n: int = 10) -> bool:
    """Calibrate (cached) when exhaustive checking is feasible; else skip."""
    if formula.n > max_n:
        return False
    return _calibrate_cached(formula, w_out)
