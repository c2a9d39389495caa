"""Bipartite graphs of span programs: norms, null-space witnesses, spectra.

The biadjacency matrix of a program stacks the target column against all
program columns over the inner-product space, with an identity "partner" row
per column index:

    B = [[t, A],
         [0, I]]

The input-dependent variant keeps partner rows exactly for the indices that
are unavailable on x (the dangling edges); a right null vector of B(x) with
nonzero weight on the target column rescales to a true-case witness, which
is what ``zero_witness_exists`` detects.  The symmetrized adjacency is
[[0, B], [B^T, 0]], whose operator norm is the largest singular value of B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SpanProgramError
from .spanprog import RANK_CUTOFF, SpanProgram, max_witness_sizes, witness_report

EIG_RESIDUAL_TOL = 1e-8


@dataclass
class ProgramGraph:
    biadj: np.ndarray
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]

    def adjacency(self) -> np.ndarray:
        r, c = self.biadj.shape
        A = np.zeros((r + c, r + c))
        A[:r, r:] = self.biadj
        A[r:, :r] = self.biadj.T
        return A

    @property
    def norm(self) -> float:
        """Operator norm of the symmetrized adjacency = sigma_max(B)."""
        return float(np.linalg.svd(self.biadj, compute_uv=False)[0])

    @property
    def abs_adjacency_norm(self) -> float:
        """Operator norm of the entrywise absolute value of the adjacency."""
        return float(np.linalg.svd(np.abs(self.biadj), compute_uv=False)[0])


def biadjacency(program: SpanProgram) -> ProgramGraph:
    entries = program.index_entries()
    A = program.matrix()
    dim, m = A.shape
    B = np.zeros((dim + m, 1 + m))
    B[:dim, 0] = program.target
    B[:dim, 1:] = A
    B[dim:, 1:] = np.eye(m)
    rows = tuple([f"V{i}" for i in range(dim)] +
                 [f"partner:{e.label}" for e in entries])
    cols = ("out",) + tuple(e.label for e in entries)
    return ProgramGraph(B, rows, cols)


def input_graph(program: SpanProgram, x: Sequence[int] | str) -> ProgramGraph:
    """Biadjacency with partner rows only for the unavailable indices."""
    entries = program.index_entries()
    A = program.matrix()
    mask = program.available_mask(x)
    dim, m = A.shape
    dangling = [i for i in range(m) if not mask[i]]
    B = np.zeros((dim + len(dangling), 1 + m))
    B[:dim, 0] = program.target
    B[:dim, 1:] = A
    for row, i in enumerate(dangling):
        B[dim + row, 1 + i] = 1.0
    rows = tuple([f"V{i}" for i in range(dim)] +
                 [f"partner:{entries[i].label}" for i in dangling])
    cols = ("out",) + tuple(e.label for e in entries)
    return ProgramGraph(B, rows, cols)


def zero_witness_exists(program: SpanProgram, x: Sequence[int] | str,
                        tol: float = 1e-10) -> int:
    """1 iff B(x) has a right null vector with weight on the target column."""
    B = input_graph(program, x).biadj
    _, s, Vt = np.linalg.svd(B)
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        return 1  # zero matrix: every vector is a null vector
    rank = int(np.sum(s > RANK_CUTOFF * smax))
    null_rows = Vt[rank:, :]
    if null_rows.shape[0] == 0:
        return 0
    return 1 if float(np.linalg.norm(null_rows[:, 0])) > tol else 0


@dataclass
class AbsNorm:
    spectral: float
    frobenius: float


def abs_norm(matrix: np.ndarray) -> AbsNorm:
    """Operator and Frobenius norms of the entrywise absolute value."""
    M = np.abs(np.asarray(matrix, dtype=float))
    if M.size == 0:
        return AbsNorm(0.0, 0.0)
    return AbsNorm(float(np.linalg.svd(M, compute_uv=False)[0]),
                   float(np.linalg.norm(M)))


@dataclass
class QueryEstimate:
    value: float
    full_witness_size: float
    graph_norm: float

    def to_json(self) -> dict:
        return {"t_est": self.value, "wsizef": self.full_witness_size,
                "abs_norm": self.graph_norm}


def query_estimate(composed, x: Sequence[int] | str | None = None,
                   limit: int = 14) -> QueryEstimate:
    """Constant-free query-count estimate: wsizef times the abs-graph norm.

    Accepts a plain program or a composed one.  With x given, uses the full
    witness size at x; otherwise the maximum over inputs (closed-form when
    formula provenance is available, exhaustive below ``limit`` bits else).
    """
    from .compose import ComposedProgram

    program = composed.program if isinstance(composed, ComposedProgram) else composed
    norm = abs_norm(biadjacency(program).biadj).spectral
    if x is not None:
        wf = witness_report(program, x).full_size
    elif isinstance(composed, ComposedProgram) and composed.formula is not None:
        from .oracles import max_witness_sizes_tree

        wf = max_witness_sizes_tree(composed.formula)[1]
    else:
        if program.n > limit:
            raise SpanProgramError(
                f"cannot sweep 2^{program.n} inputs; pass x explicitly")
        wf = max_witness_sizes(program)[1]
    return QueryEstimate(value=wf * norm, full_witness_size=wf, graph_norm=norm)


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gap: float
    zero_dim: int
    t_est: float | None = None
    max_residual: float = 0.0

    def to_json(self) -> dict:
        return {"eigenvalues": [float(v) for v in self.eigenvalues],
                "gap": self.gap, "zero_dim": self.zero_dim,
                "T_est": self.t_est}


def spectral_report(matrix: np.ndarray, t_est: float | None = None,
                    zero_tol: float = 1e-10) -> SpectralReport:
    """Dense symmetric eigendecomposition with residual validation."""
    A = np.asarray(matrix, dtype=float)
    if not np.allclose(A, A.T, atol=1e-12, rtol=0.0):
        raise SpanProgramError("spectral_report expects a symmetric matrix")
    evals, evecs = np.linalg.eigh(A)
    scale = float(np.max(np.abs(evals))) if evals.size else 0.0
    residual = float(np.max(np.abs(A @ evecs - evecs * evals))) if evals.size else 0.0
    if scale > 0 and residual > EIG_RESIDUAL_TOL * scale:
        raise SpanProgramError(f"eigensolver residual {residual:.3e} too large")
    zero_dim = int(np.sum(np.abs(evals) <= zero_tol * scale)) if scale > 0 \
        else evals.size
    positive = evals[evals > zero_tol * scale] if scale > 0 else np.array([])
    gap = float(positive.min()) if positive.size else math.inf
    return SpectralReport(eigenvalues=evals, eigenvectors=evecs, gap=gap,
                          zero_dim=zero_dim, t_est=t_est, max_residual=residual)


def to_dot(graph: ProgramGraph, name: str = "program") -> str:
    """Render the bipartite graph in DOT format (weight attribute %.12g)."""
    lines = [f"graph {name} {{"]
    for i, lab in enumerate(graph.row_labels):
        lines.append(f'  r{i} [label="{lab}"];')
    for i, lab in enumerate(graph.col_labels):
        lines.append(f'  c{i} [label="{lab}"];')
    rows, cols = graph.biadj.shape
    for i in range(rows):
        for j in range(cols):
            w = graph.biadj[i, j]
            if w != 0.0:
                lines.append(f'  r{i} -- c{j} [weight="{w:.12g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
