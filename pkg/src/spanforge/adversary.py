"""Adversary bounds with costs: closed forms, a numeric minimax solver, and
certificate validation.

The minimax value of a k-bit gate g with positive costs s is

    min over distributions {p_x} of  max over pairs g(x) != g(y) of
        1 / sum_{j : x_j != y_j} sqrt(p_x(j) p_y(j)) / s_j

where each p_x ranges over probability distributions on the k input
positions.  The inner quantity is concave in p, so the solver runs projected
supergradient ascent on the pair minimum, with random restarts and an
optional SLSQP polish.  Solutions are upper bounds on the true value; the
closed form sqrt(sum s_j^2) is exact for AND/OR-type gates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BoundError, GateError
from .gates import DEFAULT_REGISTRY, GateRegistry, GateSpec

MINIMAX_MAX_ARITY = 4
MINIMAX_TOL = 1e-3


def adv_closed_form_andor(costs: Sequence[float]) -> float:
    """Adversary value of an AND/OR gate with the given costs."""
    s = np.asarray(costs, dtype=float)
    if s.size == 0:
        raise BoundError("cost vector must be nonempty")
    return float(np.sqrt(np.sum(s * s)))


def gate_cost_bound(gate: GateSpec, costs: Sequence[float],
                    seed: int = 0) -> tuple[float, str]:
    """Resolve a gate's composed cost: closed form if declared, else minimax.

    Returns ``(value, method)`` where method is ``closed_form`` or
    ``minimax``; the minimax fallback computes the nonnegative-weight bound,
    a valid lower bound that may be smaller than the general one.
    """
    if gate.cost_bound is not None:
        return float(gate.cost_bound(list(costs))), "closed_form"
    result = adv_minimax(gate, costs, seed=seed)
    return result.value, "minimax"


def adv_formula(formula, bound_fn=None, seed: int = 0) -> float:
    """Composed adversary value of a formula (leaves contribute 1)."""
    from .formula import metrics

    return metrics(formula, bound_fn=bound_fn, seed=seed).adv_root


# ---------------------------------------------------------------------------
# minimax solver


@dataclass
class MinimaxResult:
    value: float
    method: str
    tolerance: float
    converged: bool
    spread: float
    restarts: int
    distributions: np.ndarray | None = None

    def to_json(self) -> dict:
        return {"bound": self.value, "method": self.method,
                "tolerance": self.tolerance, "converged": self.converged,
                "bracket": [self.value - self.spread, self.value]}


def _gate_pairs(gate: GateSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index arrays (xs, ys, diff-mask) over unordered pairs with g(x) != g(y)."""
    k = gate.arity
    table = gate.truth_table
    xs, ys, masks = [], [], []
    for x in range(1 << k):
        for y in range(x + 1, 1 << k):
            if table[x] != table[y]:
                xs.append(x)
                ys.append(y)
                masks.append([(x >> (k - 1 - j)) & 1 != (y >> (k - 1 - j)) & 1
                              for j in range(k)])
    return np.array(xs), np.array(ys), np.array(masks, dtype=float)


def _project_simplex(P: np.ndarray) -> np.ndarray:
    """Euclidean projection of each trailing-axis row onto the simplex."""
    k = P.shape[-1]
    u = np.sort(P, axis=-1)[..., ::-1]
    css = np.cumsum(u, axis=-1) - 1.0
    idx = np.arange(1, k + 1)
    cond = u - css / idx > 0
    rho = k - 1 - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(css, rho[..., None], axis=-1) / (rho[..., None] + 1)
    return np.maximum(P - theta, 0.0)


def _pair_min(P: np.ndarray, xs, ys, masks, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-restart minimum over pairs; also returns the (R, m) pair values."""
    root = np.sqrt(P[:, xs, :] * P[:, ys, :])
    D = np.einsum("rmk,mk->rm", root, masks / s)
    return D.min(axis=1), D


def adv_minimax(gate: GateSpec, costs: Sequence[float], seed: int = 0,
                restarts: int = 64, iterations: int = 300,
                tol: float = MINIMAX_TOL, polish: bool = True) -> MinimaxResult:
    """Numeric adversary bound via projected supergradient ascent.

    Costs are rescaled to unit maximum internally, which makes the solver
    exactly scale-equivariant: adv_minimax(g, c*s) = c * adv_minimax(g, s).
    """
    k = gate.arity
    if k > MINIMAX_MAX_ARITY:
        raise BoundError(
            f"minimax solver handles arity <= {MINIMAX_MAX_ARITY}, gate has {k}")
    if gate.is_constant:
        raise BoundError(f"gate {gate.name} is constant; adversary value is 0")
    s_raw = np.asarray(costs, dtype=float)
    if s_raw.shape != (k,):
        raise BoundError(f"expected {k} costs, got {s_raw.shape}")
    if np.any(s_raw <= 0):
        raise BoundError("minimax solver requires strictly positive costs")
    scale = float(s_raw.max())
    s = s_raw / scale

    xs, ys, masks = _gate_pairs(gate)
    m = len(xs)
    nstates = 1 << k
    rng = np.random.default_rng(seed)

    P = rng.dirichlet(np.ones(k), size=(restarts, nstates))
    P[0, :, :] = 1.0 / k  # deterministic uniform start
    P = np.clip(P, 1e-12, None)
    P /= P.sum(axis=-1, keepdims=True)

    # pair -> state scatter matrices, so gradient accumulation is an einsum
    scatter_x = np.zeros((m, nstates))
    scatter_y = np.zeros((m, nstates))
    scatter_x[np.arange(m), xs] = 1.0
    scatter_y[np.arange(m), ys] = 1.0
    weighted = masks / s

    best_G = np.full(restarts, -np.inf)
    best_P = P.copy()

    for t in range(1, iterations + 1):
        G, D = _pair_min(P, xs, ys, masks, s)
        improved = G > best_G
        best_G = np.where(improved, G, best_G)
        best_P[improved] = P[improved]

        active = (D <= G[:, None] + 1e-12).astype(float)
        active /= active.sum(axis=1, keepdims=True)

        Px = P[:, xs, :]
        Py = P[:, ys, :]
        gx = active[:, :, None] * 0.5 * np.sqrt(Py / np.maximum(Px, 1e-15)) * weighted
        gy = active[:, :, None] * 0.5 * np.sqrt(Px / np.maximum(Py, 1e-15)) * weighted
        grad = np.einsum("rmk,ms->rsk", gx, scatter_x)
        grad += np.einsum("rmk,ms->rsk", gy, scatter_y)

        norms = np.sqrt(np.sum(grad * grad, axis=(1, 2)))
        grad /= np.maximum(norms, 1e-30)[:, None, None]
        P = _project_simplex(P + (0.5 / math.sqrt(t)) * grad)
        P = np.clip(P, 0.0, None)

    order = np.argsort(best_G)[::-1]
    G_star = best_G[order[0]]
    P_star = best_P[order[0]]

    polished_ok = False
    if polish:
        polished = _slsqp_polish(P_star, xs, ys, masks, s, G_star)
        if polished is not None:
            G_pol, P_pol, stationary = polished
            # a stationary polish that cannot move the value certifies the point
            polished_ok = stationary and G_pol >= G_star * (1.0 - 1e-9)
            if G_pol > G_star:
                G_star, P_star = G_pol, P_pol

    top = best_G[order[: max(4, restarts // 4)]]
    spread = float(1.0 / top[-1] - 1.0 / top[0]) if top[-1] > 0 else math.inf
    converged = polished_ok or spread <= tol * max(1.0, 1.0 / G_star)
    value = scale / G_star
    return MinimaxResult(value=value, method="minimax", tolerance=tol,
                         converged=converged, spread=spread * scale,
                         restarts=restarts, distributions=P_star)


def _slsqp_polish(P0, xs, ys, masks, s, G0):
    """Refine the best restart with an epigraph NLP (max u s.t. D_pair >= u).

    Returns (value, distributions, stationary) where the value is recomputed
    from the feasible, renormalized point (valid regardless of the solver's
    exit status); ``stationary`` is True when SLSQP finished or stalled with
    no ascent direction (status 8), which happens at an optimum.
    """
    import warnings

    from scipy.optimize import minimize

    nstates, k = P0.shape
    z0 = np.concatenate([P0.ravel(), [G0]])

    def pair_values(z):
        P = z[:-1].reshape(nstates, k)
        root = np.sqrt(np.maximum(P[xs] * P[ys], 0.0))
        return np.einsum("mk,mk->m", root, masks / s)

    cons = [
        {"type": "ineq", "fun": lambda z: pair_values(z) - z[-1]},
        {"type": "eq",
         "fun": lambda z: z[:-1].reshape(nstates, k).sum(axis=1) - 1.0},
    ]
    bounds = [(1e-12, 1.0)] * (nstates * k) + [(0.0, None)]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = minimize(lambda z: -z[-1], z0, method="SLSQP", bounds=bounds,
                           constraints=cons,
                           options={"maxiter": 200, "ftol": 1e-14})
    except Exception:
        return None
    P = np.clip(res.x[:-1].reshape(nstates, k), 0.0, None)
    total = P.sum(axis=1, keepdims=True)
    if np.any(total <= 0):
        return None
    P /= total
    root = np.sqrt(P[xs] * P[ys])
    G = float(np.einsum("mk,mk->m", root, masks / s).min())
    if not np.isfinite(G):
        return None
    return G, P, bool(res.success or res.status == 8)


# ---------------------------------------------------------------------------
# grid oracles (coarse but solver-independent)


def grid_minimax_2bit(gate: GateSpec, costs: Sequence[float],
                      resolution: int = 41) -> float:
    """Exhaustive grid over the four 1-parameter distributions of a 2-bit gate."""
    if gate.arity != 2:
        raise BoundError("grid_minimax_2bit needs a 2-bit gate")
    s = np.asarray(costs, dtype=float)
    xs, ys, masks = _gate_pairs(gate)
    q = np.linspace(0.0, 1.0, resolution)
    grids = np.meshgrid(q, q, q, q, indexing="ij")
    Q = np.stack([g.ravel() for g in grids], axis=1)  # (G, 4) mass on input 1
    P = np.stack([Q, 1.0 - Q], axis=2)  # (G, 4, 2)
    root = np.sqrt(P[:, xs, :] * P[:, ys, :])
    D = np.einsum("gmk,mk->gm", root, masks / s)
    with np.errstate(divide="ignore"):
        vals = np.where(D > 0, 1.0 / D, np.inf).max(axis=1)
    return float(vals.min())


def grid_minimax_maj3(resolution: int = 801) -> float:
    """Unit-cost MAJ3 value by grid over the symmetry-reduced distributions.

    The pair minimum is concave and permutation/complement symmetric, so a
    minimizer exists among symmetric distributions: p_x depends only on the
    Hamming weight of x and whether the coordinate carries x's minority bit.
    That leaves two parameters, gridded here.
    """
    from .gates import MAJ3

    xs, ys, masks = _gate_pairs(MAJ3)
    a = np.linspace(0.0, 1.0, resolution)  # weight-1 inputs: mass on the 1-bit
    b = np.linspace(0.0, 1.0, resolution)  # weight-2 inputs: mass on the 0-bit
    A, B = np.meshgrid(a, b, indexing="ij")
    G = A.size

    P = np.empty((G, 8, 3))
    for x in range(8):
        bits = np.array([(x >> (2 - j)) & 1 for j in range(3)])
        w = bits.sum()
        if w in (0, 3):
            P[:, x, :] = 1.0 / 3.0
        elif w == 1:
            mass = A.ravel()
            P[:, x, :] = ((1.0 - mass) / 2.0)[:, None]
            P[:, x, bits.argmax()] = mass
        else:
            mass = B.ravel()
            P[:, x, :] = ((1.0 - mass) / 2.0)[:, None]
            P[:, x, bits.argmin()] = mass

    root = np.sqrt(P[:, xs, :] * P[:, ys, :])
    D = np.einsum("gmk,mk->gm", root, masks)
    with np.errstate(divide="ignore"):
        vals = np.where(D > 0, 1.0 / D, np.inf).max(axis=1)
    return float(vals.min())


# ---------------------------------------------------------------------------
# adversary-matrix certificates


@dataclass
class CertificateReport:
    """Outcome of validating an adversary-matrix certificate."""

    feasible: bool
    bound: float
    gate: str
    costs: tuple[float, ...]
    violations: list[str] = field(default_factory=list)
    constraint_norms: dict[int, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"bound": self.bound if self.feasible else 0.0,
                "method": "certificate", "tolerance": 1e-9,
                "feasible": self.feasible, "violations": self.violations,
                "constraint_norms": {str(j): v for j, v in
                                     sorted(self.constraint_norms.items())}}


def validate_adversary_matrix(gate: GateSpec, gamma: np.ndarray,
                              costs: Sequence[float],
                              slack: float = 1e-9) -> CertificateReport:
    """Check an adversary matrix and return its norm as a certified bound.

    Requirements: gamma is symmetric, indexed by the 2**k inputs, vanishes on
    pairs with equal gate value, and each entrywise product with the j-th
    difference mask has spectral norm at most s_j (+slack).
    """
    k = gate.arity
    n_states = 1 << k
    gamma = np.asarray(gamma, dtype=float)
    s = np.asarray(costs, dtype=float)
    violations: list[str] = []
    if gamma.shape != (n_states, n_states):
        raise BoundError(f"gamma must be {n_states}x{n_states}, got {gamma.shape}")
    if s.shape != (k,):
        raise BoundError(f"expected {k} costs, got {s.shape}")

    if not np.allclose(gamma, gamma.T, atol=slack, rtol=0.0):
        violations.append("matrix is not symmetric")

    table = gate.truth_table
    for x in range(n_states):
        for y in range(n_states):
            if table[x] == table[y] and abs(gamma[x, y]) > slack:
                violations.append(
                    f"nonzero entry at equal-value pair ({x:0{k}b},{y:0{k}b})")

    norms: dict[int, float] = {}
    for j in range(k):
        stride = 1 << (k - 1 - j)
        mask = np.fromfunction(
            lambda x, y: ((x.astype(int) ^ y.astype(int)) & stride) != 0,
            (n_states, n_states))
        nj = float(np.linalg.norm(gamma * mask, 2))
        norms[j + 1] = nj
        if nj > s[j] + slack:
            violations.append(
                f"input {j + 1}: masked norm {nj:.12g} exceeds cost {s[j]:.12g}")

    bound = float(np.linalg.norm(gamma, 2))
    return CertificateReport(feasible=not violations, bound=bound,
                             gate=gate.name, costs=tuple(float(c) for c in s),
                             violations=violations, constraint_norms=norms)


def load_certificate(data: dict | str,
                     registry: GateRegistry | None = None
                     ) -> tuple[GateSpec, np.ndarray, np.ndarray]:
    """Parse certificate JSON {gate, costs[], gamma[][]}."""
    if isinstance(data, str):
        data = json.loads(data)
    registry = registry or DEFAULT_REGISTRY
    costs = np.asarray(data["costs"], dtype=float)
    gamma = np.asarray(data["gamma"], dtype=float)
    k = len(costs)
    try:
        gate = registry.resolve(str(data["gate"]), k)
    except GateError as exc:
        raise BoundError(str(exc)) from exc
    return gate, costs, gamma


def save_certificate(gate: GateSpec, costs: Sequence[float],
                     gamma: np.ndarray) -> dict:
    return {"gate": gate.name, "costs": [float(c) for c in costs],
            "gamma": np.asarray(gamma, dtype=float).tolist()}
