"""Span programs over real scalars, with witness-size solvers.

A span program on n input bits consists of a target vector, a set of free
vectors, and input vectors gated by the literals (j, b).  On input x the
available vectors are the free ones plus those with b = x_j; the program
evaluates to 1 iff the target lies in their span.

Witness sizes are computed as equality-constrained least-squares problems:
the true case minimizes the cost-weighted squared norm of a coefficient
vector reaching the target (KKT system, pseudo-inverse); the false case
parametrizes the orthogonal complement of the available vectors by an
orthonormal null-space basis and minimizes over the affine slice with unit
inner product against the target.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import SolverError, SpanProgramError

RANK_CUTOFF = 1e-10   # relative singular-value cutoff for rank/null decisions
FEAS_TOL = 1e-8


@dataclass(frozen=True)
class IndexEntry:
    """One column of a span program: a free vector or an input vector."""

    kind: str           # "free" | "input"
    j: int              # input position (0 for free)
    b: int              # gating bit (0 for free)
    pos: int            # position within its block
    label: str


@dataclass(eq=False)
class SpanProgram:
    n: int
    target: np.ndarray
    free: np.ndarray                                 # (dim, #free)
    inputs: dict[tuple[int, int], np.ndarray]        # (j, b) -> (dim, m_jb)
    free_labels: tuple[str, ...] = ()
    input_labels: dict[tuple[int, int], tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.target = np.asarray(self.target, dtype=float).reshape(-1)
        dim = self.target.shape[0]
        self.free = self._block(self.free, dim)
        clean: dict[tuple[int, int], np.ndarray] = {}
        for j in range(1, self.n + 1):
            for b in (0, 1):
                clean[(j, b)] = self._block(self.inputs.get((j, b)), dim)
        self.inputs = clean
        if not self.free_labels:
            self.free_labels = tuple(f"f{i}" for i in range(self.free.shape[1]))
        labels: dict[tuple[int, int], tuple[str, ...]] = {}
        for key, block in self.inputs.items():
            got = tuple(self.input_labels.get(key, ()))
            if len(got) != block.shape[1]:
                got = tuple(f"j{key[0]}b{key[1]}:{i}" for i in range(block.shape[1]))
            labels[key] = got
        self.input_labels = labels
        self.validate()

    @staticmethod
    def _block(block, dim: int) -> np.ndarray:
        if block is None:
            return np.zeros((dim, 0))
        arr = np.asarray(block, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(dim, -1) if arr.size else arr.reshape(dim, 0)
        return arr

    def validate(self) -> None:
        dim = self.dim
        if self.free.shape[0] != dim:
            raise SpanProgramError("free block has wrong dimension")
        if len(self.free_labels) != self.free.shape[1]:
            raise SpanProgramError("free labels out of sync")
        for key, block in self.inputs.items():
            if block.shape[0] != dim:
                raise SpanProgramError(f"input block {key} has wrong dimension")

    # -- structure ----------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.target.shape[0]

    @property
    def num_free(self) -> int:
        return self.free.shape[1]

    @property
    def num_inputs(self) -> int:
        return sum(block.shape[1] for block in self.inputs.values())

    @property
    def is_strict(self) -> bool:
        return self.num_free == 0

    @property
    def is_monotone(self) -> bool:
        return all(self.inputs[(j, 0)].shape[1] == 0 for j in range(1, self.n + 1))

    def index_entries(self) -> list[IndexEntry]:
        entries = [IndexEntry("free", 0, 0, i, self.free_labels[i])
                   for i in range(self.num_free)]
        for j in range(1, self.n + 1):
            for b in (0, 1):
                labels = self.input_labels[(j, b)]
                entries.extend(IndexEntry("input", j, b, i, labels[i])
                               for i in range(self.inputs[(j, b)].shape[1]))
        return entries

    def matrix(self) -> np.ndarray:
        """All columns in canonical order: free, then (j, b) blocks."""
        blocks = [self.free] + [self.inputs[(j, b)]
                                for j in range(1, self.n + 1) for b in (0, 1)]
        return np.hstack(blocks) if blocks else np.zeros((self.dim, 0))

    def available_mask(self, x: Sequence[int]) -> np.ndarray:
        bits = _bits(x, self.n)
        mask = []
        mask.extend([True] * self.num_free)
        for j in range(1, self.n + 1):
            for b in (0, 1):
                mask.extend([b == bits[j - 1]] * self.inputs[(j, b)].shape[1])
        return np.array(mask, dtype=bool)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "dim": self.dim,
            "target": self.target.tolist(),
            "free": [self.free[:, i].tolist() for i in range(self.num_free)],
            "inputs": [
                {"j": j, "b": b,
                 "vectors": [self.inputs[(j, b)][:, i].tolist()
                             for i in range(self.inputs[(j, b)].shape[1])]}
                for j in range(1, self.n + 1) for b in (0, 1)
                if self.inputs[(j, b)].shape[1]
            ],
            "labels": [e.label for e in self.index_entries()],
        }

    @staticmethod
    def from_json(data: dict | str) -> "SpanProgram":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            n = int(data["n"])
            dim = int(data["dim"])
            target = np.asarray(data["target"], dtype=float)
            if target.shape != (dim,):
                raise SpanProgramError(
                    f"target has {target.shape[0]} entries, dim says {dim}")
            free_vecs = [np.asarray(v, dtype=float) for v in data.get("free", [])]
            inputs: dict[tuple[int, int], list[np.ndarray]] = {}
            for item in data.get("inputs", []):
                j, b = int(item["j"]), int(item["b"])
                if not (1 <= j <= n and b in (0, 1)):
                    raise SpanProgramError(f"bad input block (j={j}, b={b})")
                vecs = [np.asarray(v, dtype=float) for v in item["vectors"]]
                inputs.setdefault((j, b), []).extend(vecs)
            for v in free_vecs + [v for vs in inputs.values() for v in vs]:
                if v.shape != (dim,):
                    raise SpanProgramError("vector length does not match dim")
            labels = data.get("labels")
        except (KeyError, TypeError, ValueError) as exc:
            raise SpanProgramError(f"malformed span-program JSON: {exc}") from exc
        prog = SpanProgram(
            n=n, target=target,
            free=np.column_stack(free_vecs) if free_vecs else np.zeros((dim, 0)),
            inputs={key: np.column_stack(vs) for key, vs in inputs.items()})
        if labels is not None:
            entries = prog.index_entries()
            if len(labels) != len(entries):
                raise SpanProgramError("label count does not match index count")
            prog.free_labels = tuple(labels[: prog.num_free])
            offset = prog.num_free
            relabel: dict[tuple[int, int], tuple[str, ...]] = {}
            for j in range(1, n + 1):
                for b in (0, 1):
                    m = prog.inputs[(j, b)].shape[1]
                    relabel[(j, b)] = tuple(labels[offset: offset + m])
                    offset += m
            prog.input_labels = relabel
        return prog


def _bits(x: Sequence[int] | str, n: int) -> tuple[int, ...]:
    if isinstance(x, str):
        bits = tuple(int(c) for c in x)
    else:
        bits = tuple(int(b) for b in x)
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise SpanProgramError(f"input must be {n} bits, got {x!r}")
    return bits


def _costs(s: Sequence[float] | None, n: int) -> np.ndarray:
    if s is None:
        return np.ones(n)
    arr = np.asarray(s, dtype=float)
    if arr.shape != (n,):
        raise SpanProgramError(f"expected {n} costs, got {arr.shape}")
    if np.any(arr < 0):
        raise SpanProgramError("costs must be nonnegative")
    return arr


# ---------------------------------------------------------------------------
# constructions


def make_and(s1: float, s2: float, prefix: str = "") -> SpanProgram:
    """Two-bit AND program with weights (s1, s2).

    Target ((s1/sp)^{1/4}, (s2/sp)^{1/4}) with sp = s1+s2; unit input vectors
    on the two axes, gated by x1 = 1 and x2 = 1.  Strict and monotone.
    """
    if s1 <= 0 or s2 <= 0:
        raise SpanProgramError("weights must be positive")
    sp = s1 + s2
    a1, a2 = (s1 / sp) ** 0.25, (s2 / sp) ** 0.25
    return SpanProgram(
        n=2, target=np.array([a1, a2]),
        free=np.zeros((2, 0)),
        inputs={(1, 1): np.array([[1.0], [0.0]]),
                (2, 1): np.array([[0.0], [1.0]])},
        input_labels={(1, 1): (f"{prefix}and:1",), (2, 1): (f"{prefix}and:2",)})


def make_or(s1: float, s2: float, prefix: str = "") -> SpanProgram:
    """Two-bit OR program with weights (s1, s2): scalar target 1, input
    scalars (s_j/sp)^{1/4}.  Strict and monotone."""
    if s1 <= 0 or s2 <= 0:
        raise SpanProgramError("weights must be positive")
    sp = s1 + s2
    e1, e2 = (s1 / sp) ** 0.25, (s2 / sp) ** 0.25
    return SpanProgram(
        n=2, target=np.array([1.0]),
        free=np.zeros((1, 0)),
        inputs={(1, 1): np.array([[e1]]), (2, 1): np.array([[e2]])},
        input_labels={(1, 1): (f"{prefix}or:1",), (2, 1): (f"{prefix}or:2",)})


def make_passthrough(prefix: str = "") -> SpanProgram:
    """One-bit identity program: computes x1 with witness size 1."""
    return SpanProgram(
        n=1, target=np.array([1.0]),
        free=np.zeros((1, 0)),
        inputs={(1, 1): np.array([[1.0]])},
        input_labels={(1, 1): (f"{prefix}id:1",)})


# ---------------------------------------------------------------------------
# evaluation and witness sizes


def eval_span(program: SpanProgram, x: Sequence[int] | str) -> int:
    """1 iff the target lies in the span of the available vectors."""
    t = program.target
    if not np.any(t):
        return 1
    A = program.matrix()
    M = A[:, program.available_mask(x)]
    if M.shape[1] == 0:
        return 0
    aug = np.column_stack([M, t])
    s_aug = np.linalg.svd(aug, compute_uv=False)
    cutoff = RANK_CUTOFF * s_aug[0]
    rank_aug = int(np.sum(s_aug > cutoff))
    s_m = np.linalg.svd(M, compute_uv=False)
    rank_m = int(np.sum(s_m > cutoff))
    return 1 if rank_m == rank_aug else 0


@dataclass
class WitnessResult:
    """Witness data for one input: both plain and full objective values.

    In the true case ``witness`` holds coefficients over the available
    columns (labels in ``witness_labels``); in the false case it is the
    separating vector in the program's inner-product space.  ``full_witness``
    is the optimizer of the full objective, which may differ.
    """

    value: int
    size: float
    full_size: float
    witness: np.ndarray
    full_witness: np.ndarray
    residual: float
    witness_labels: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"case": self.value, "size": self.size,
                "full_size": self.full_size, "residual": self.residual}


def _kkt_min(D: np.ndarray, M: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimize w^T D w subject to M w = t via the KKT pseudo-inverse."""
    m = M.shape[1]
    K = np.zeros((m + M.shape[0], m + M.shape[0]))
    K[:m, :m] = np.diag(D)
    K[:m, m:] = M.T
    K[m:, :m] = M
    rhs = np.concatenate([np.zeros(m), t])
    sol, *_ = np.linalg.lstsq(K, rhs, rcond=RANK_CUTOFF)
    w = sol[:m]
    residual = float(np.linalg.norm(M @ w - t))
    return w, residual


def _solve_true(program: SpanProgram, x, costs: np.ndarray
                ) -> WitnessResult:
    A = program.matrix()
    mask = program.available_mask(x)
    M = A[:, mask]
    entries = [e for e, keep in zip(program.index_entries(), mask) if keep]
    d_plain = np.array([0.0 if e.kind == "free" else costs[e.j - 1]
                        for e in entries])
    d_full = np.array([1.0 if e.kind == "free" else costs[e.j - 1]
                       for e in entries])
    t = program.target

    w, res = _kkt_min(d_plain, M, t)
    scale = max(1.0, float(np.linalg.norm(t)))
    if res > FEAS_TOL * scale:
        raise SolverError(f"true-case witness infeasible (residual {res:.3e})")
    size = float(w @ (d_plain * w))

    w_full, res_full = _kkt_min(d_full, M, t)
    if res_full > FEAS_TOL * scale:
        raise SolverError(f"full true-case witness infeasible (residual {res_full:.3e})")
    full = 1.0 + float(w_full @ (d_full * w_full))

    return WitnessResult(value=1, size=max(size, 0.0), full_size=max(full, 1.0),
                         witness=w, full_witness=w_full,
                         residual=max(res, res_full),
                         witness_labels=tuple(e.label for e in entries))


def _null_basis(M: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of M's columns."""
    if M.shape[1] == 0:
        return np.eye(dim)
    U, s, _ = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > RANK_CUTOFF * s[0])) if s.size else 0
    return U[:, rank:]


def _constrained_quad_min(Q: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Minimize u^T Q u subject to c^T u = 1 via the KKT pseudo-inverse."""
    q = Q.shape[0]
    K = np.zeros((q + 1, q + 1))
    K[:q, :q] = Q
    K[:q, q] = c
    K[q, :q] = c
    rhs = np.zeros(q + 1)
    rhs[q] = 1.0
    sol, *_ = np.linalg.lstsq(K, rhs, rcond=RANK_CUTOFF)
    return sol[:q]


def _solve_false(program: SpanProgram, x, costs: np.ndarray
                 ) -> WitnessResult:
    A = program.matrix()
    mask = program.available_mask(x)
    entries = program.index_entries()
    M_av = A[:, mask]
    N = _null_basis(M_av, program.dim)
    t = program.target
    c = N.T @ t
    if np.linalg.norm(c) <= RANK_CUTOFF * max(1.0, np.linalg.norm(t)):
        raise SolverError("no separating vector: program accepts this input")

    unavail = [i for i, (e, keep) in enumerate(zip(entries, mask))
               if not keep and e.kind == "input"]
    V = A[:, unavail]
    d = np.array([costs[entries[i].j - 1] for i in unavail])
    G = (V * d) @ V.T if V.size else np.zeros((program.dim, program.dim))
    Q = N.T @ G @ N

    u = _constrained_quad_min(Q, c)
    w = N @ u
    res = max(abs(float(t @ w) - 1.0), float(np.linalg.norm(M_av.T @ w)))
    if res > FEAS_TOL:
        raise SolverError(f"false-case witness infeasible (residual {res:.3e})")
    size = float(u @ Q @ u)

    u_full = _constrained_quad_min(Q + np.eye(Q.shape[0]), c)
    w_full = N @ u_full
    res_full = max(abs(float(t @ w_full) - 1.0),
                   float(np.linalg.norm(M_av.T @ w_full)))
    if res_full > FEAS_TOL:
        raise SolverError(f"full false-case witness infeasible (residual {res_full:.3e})")
    full = float(u_full @ (Q + np.eye(Q.shape[0])) @ u_full)

    return WitnessResult(value=0, size=max(size, 0.0), full_size=max(full, 0.0),
                         witness=w, full_witness=w_full,
                         residual=max(res, res_full))


def witness_report(program: SpanProgram, x: Sequence[int] | str,
                   s: Sequence[float] | None = None) -> WitnessResult:
    """Witness sizes of the program on x with costs s (default all-ones)."""
    costs = _costs(s, program.n)
    if eval_span(program, x):
        return _solve_true(program, x, costs)
    return _solve_false(program, x, costs)


def witness_size(program: SpanProgram, x: Sequence[int] | str,
                 s: Sequence[float] | None = None) -> WitnessResult:
    return witness_report(program, x, s)


def full_witness_size(program: SpanProgram, x: Sequence[int] | str,
                      s: Sequence[float] | None = None) -> WitnessResult:
    return witness_report(program, x, s)


def max_witness_sizes(program: SpanProgram,
                      s: Sequence[float] | None = None,
                      limit: int = 16) -> tuple[float, float]:
    """(max witness size, max full witness size) over all inputs."""
    if program.n > limit:
        raise SpanProgramError(
            f"refusing exhaustive sweep over 2^{program.n} inputs")
    best = best_full = 0.0
    for i in range(1 << program.n):
        bits = tuple((i >> (program.n - 1 - j)) & 1 for j in range(program.n))
        r = witness_report(program, bits, s)
        best = max(best, r.size)
        best_full = max(best_full, r.full_size)
    return best, best_full
