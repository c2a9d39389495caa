"""Executable inequality checkers, each returning a machine-readable report.

Every checker measures both sides of its inequality numerically and reports
them; a report never contains a bare boolean.  Tolerances default to 1e-8
absolute (a decade above the dense-linear-algebra residuals used by the
witness solvers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .compose import ComposedProgram, flat_program
from .errors import NotCanonicalError, SpanProgramError
from .formula import Formula, FormulaMetrics, all_inputs, metrics, path_str
from .graphs import abs_norm, biadjacency, spectral_report
from .nandtree import build_nand_tree, ensure_calibrated
from .spanprog import SpanProgram, eval_span, max_witness_sizes, witness_report

DEFAULT_TOL = 1e-8
AMP_ZERO = 1e-10        # relative amplitude treated as exactly zero
AMP_BORDERLINE = 1e-7   # below this, one-sided near-zeros are logged, not failed


@dataclass
class CheckItem:
    description: str
    lhs: float
    rhs: float
    tolerance: float
    passed: bool
    note: str = ""

    def to_json(self) -> dict:
        return {"description": self.description, "lhs": self.lhs,
                "rhs": self.rhs, "tolerance": self.tolerance,
                "passed": self.passed, **({"note": self.note} if self.note else {})}


@dataclass
class VerificationReport:
    lemma: str
    instance: str
    items: list[CheckItem] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    def add(self, description: str, lhs: float, rhs: float,
            tolerance: float = DEFAULT_TOL, note: str = "") -> CheckItem:
        item = CheckItem(description, float(lhs), float(rhs), tolerance,
                         bool(lhs <= rhs + tolerance), note)
        self.items.append(item)
        return item

    def to_json(self) -> dict:
        return {"lemma": self.lemma, "instance": self.instance,
                "passed": self.passed,
                "items": [i.to_json() for i in self.items],
                "notes": self.notes}


# ---------------------------------------------------------------------------
# canonical-form programs


def check_canonical_premise(program: SpanProgram,
                            s: Sequence[float] | None = None,
                            tol: float = DEFAULT_TOL) -> VerificationReport:
    """Verify canonical shape: V is indexed by the false inputs, the target
    is the all-ones vector, and each false input's own basis vector is an
    optimal separating witness."""
    if program.n > 14:
        raise SpanProgramError("canonical check is exhaustive over inputs")
    zeros = [bits for bits in all_inputs(program.n)
             if eval_span(program, bits) == 0]
    if program.dim != len(zeros):
        raise NotCanonicalError(
            f"dim V = {program.dim} but the program has {len(zeros)} false inputs")
    report = VerificationReport("canonical", f"program on {program.n} bits")
    ones = np.ones(program.dim)
    dev = float(np.max(np.abs(program.target - ones)))
    report.add("target equals the sum of false-input basis vectors (deviation)",
               dev, 0.0, tol)
    A = program.matrix()
    for row, bits in enumerate(zeros):
        mask = program.available_mask(bits)
        e = np.zeros(program.dim)
        e[row] = 1.0
        feas = float(np.linalg.norm(A[:, mask].T @ e))
        report.add(f"x={_fmt(bits)}: basis witness orthogonal to available vectors",
                   feas, 0.0, tol)
        entries = program.index_entries()
        pen = sum((1.0 if s is None else float(s[entry.j - 1])) * float(A[:, i] @ e) ** 2
                  for i, (entry, keep) in enumerate(zip(entries, mask))
                  if not keep and entry.kind == "input")
        opt = witness_report(program, bits, s).size
        report.add(f"x={_fmt(bits)}: basis witness value matches the optimum",
                   abs(pen - opt), 0.0, tol)
    return report


def check_norm_lemma(program: SpanProgram,
                     s: Sequence[float] | None = None,
                     tol: float = DEFAULT_TOL) -> VerificationReport:
    """Norm bound for canonical programs:
    ||abs(adjacency)|| <= 2^k (1 + wsize/min_j s_j) + |I|."""
    premise = check_canonical_premise(program, s)
    report = VerificationReport("norm", f"program on {program.n} bits")
    if not premise.passed:
        report.notes.append("canonical premise failed; bound not applicable")
        report.items.extend(premise.items)
        return report
    costs = np.ones(program.n) if s is None else np.asarray(s, dtype=float)
    lhs = abs_norm(biadjacency(program).biadj).spectral
    wsize = max_witness_sizes(program, s)[0]
    rhs = 2 ** program.n * (1.0 + wsize / float(costs.min())) + program.num_inputs
    report.add("abs adjacency norm within the canonical bound", lhs, rhs, tol)
    return report


# ---------------------------------------------------------------------------
# composition


def _max_size_ratio(obj, limit: int = 14) -> tuple[float, float]:
    """(wsize, wsizef) maxima of an inner program, cached on composed objects."""
    if isinstance(obj, ComposedProgram):
        return obj.max_sizes(limit=limit)
    return max_witness_sizes(obj, limit=limit)


def check_compose_lemma(composed: ComposedProgram, x: Sequence[int] | str,
                        tol: float = DEFAULT_TOL) -> VerificationReport:
    """Full-witness growth bound of direct-sum composition at one input.

    With r_j the inner witness sizes, the composed full witness size divided
    by the outer witness size at the induced input is at most sigma + the
    normalized free/separator mass, where sigma is the worst inner ratio of
    full witness size to witness size (1 when nothing is substituted).
    """
    bits = tuple(int(b) for b in x)
    outer = composed.outer
    S = composed.subset
    report = VerificationReport("compose", f"{composed.path} x={_fmt(bits)}")

    y: list[int] = []
    inner_ratio: dict[int, float] = {}
    for j in range(1, outer.n + 1):
        block = composed.inner_bits(j, bits)
        if j not in S:
            y.append(block[0])
            continue
        inner = composed.inners[j][1]
        val = eval_span(flat_program(inner), block)
        y.append(val)
    r = np.array([1.0] * outer.n)
    for j in S:
        inner = composed.inners[j][1]
        w_max, wf_max = _max_size_ratio(inner)
        r[j - 1] = w_max
        inner_ratio[j] = wf_max / w_max

    outer_result = witness_report(outer, y, r)
    wsize_outer = outer_result.size
    comp_result = witness_report(composed.program, bits)
    report.add("composed witness size within the outer program's",
               comp_result.size, wsize_outer, tol)
    lhs = comp_result.full_size / wsize_outer

    entries = outer.index_entries()
    if outer_result.value == 1:
        mask = outer.available_mask(y)
        kept = [e for e, keep in zip(entries, mask) if keep]
        w = outer_result.witness
        scale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
        sigma = 1.0
        for e, wi in zip(kept, w):
            if e.kind == "input" and e.j in S and abs(wi) > AMP_ZERO * scale:
                sigma = max(sigma, inner_ratio[e.j])
        free_mass = sum(wi ** 2 for e, wi in zip(kept, w) if e.kind == "free")
        rhs = sigma + (1.0 + free_mass) / wsize_outer
        report.add("true case: composed full size over outer size", lhs, rhs, tol)
    else:
        wprime = outer_result.witness
        A = outer.matrix()
        overlaps = A.T @ wprime
        scale = max(1.0, float(np.max(np.abs(overlaps))) if overlaps.size else 1.0)
        sigma = 1.0
        for i, e in enumerate(entries):
            if (e.kind == "input" and e.j in S and e.b != y[e.j - 1]
                    and abs(overlaps[i]) > AMP_ZERO * scale):
                sigma = max(sigma, inner_ratio[e.j])
        rhs = sigma + float(wprime @ wprime) / wsize_outer
        report.add("false case: composed full size over outer size", lhs, rhs, tol)
    if not S:
        report.notes.append("empty substitution set; sigma taken to be 1")
    return report


def check_directsum_norm(composed: ComposedProgram,
                         tol: float = DEFAULT_TOL) -> VerificationReport:
    """Composed abs-adjacency norm is at most twice the worst gate program's."""
    report = VerificationReport("dsnorm", composed.path)
    lhs = abs_norm(biadjacency(composed.program).biadj).spectral
    gate_norms = {path: abs_norm(biadjacency(p).biadj).spectral
                  for path, p in composed.gate_programs().items()}
    rhs = 2.0 * max(gate_norms.values())
    item = report.add("composed norm within twice the worst gate norm", lhs, rhs, tol)
    item.note = "worst gate: " + max(gate_norms, key=gate_norms.get)
    return report


def check_witness_bounds(composed: ComposedProgram, x: Sequence[int] | str,
                         tol: float = DEFAULT_TOL) -> VerificationReport:
    """AND-OR full-witness bounds at every vertex of a composed formula.

    True case: wsizef <= sigma(v) sqrt(s_v); false case:
    wsizef <= 2 sigma(v) sqrt(s_v) - 1, with sigma the reciprocal path sum.
    """
    if composed.formula is None:
        raise SpanProgramError("witness bounds need formula provenance")
    bits = tuple(int(b) for b in x)
    report = VerificationReport("witness", f"{composed.path} x={_fmt(bits)}")
    for path, vertex in sorted(composed.vertex_programs().items()):
        sub = vertex.formula
        fm = metrics(sub)
        lo = _bit_offset_of(composed, path)
        block = bits[lo: lo + sub.n]
        result = witness_report(vertex.program, block)
        adv = fm.adv_root
        sig = fm.sigma_minus_root
        if result.value == 1:
            report.add(f"{path} x={_fmt(block)} true-case full witness bound",
                       result.full_size, sig * adv, tol)
        else:
            report.add(f"{path} x={_fmt(block)} false-case full witness bound",
                       result.full_size, 2.0 * sig * adv - 1.0, tol)
    return report


def _bit_offset_of(root: ComposedProgram, path: str) -> int:
    """Offset of a vertex's leaf block within the root program's input."""
    if path == root.path:
        return 0
    for j, child in root.children.items():
        prefix = root.bit_offset[j]
        if path == child.path or path.startswith(child.path + "/"):
            return prefix + _bit_offset_of(child, path)
    raise SpanProgramError(f"vertex {path} not found under {root.path}")


# ---------------------------------------------------------------------------
# formula-level inequalities


def check_balance_lemma(formula: Formula, fm: FormulaMetrics | None = None,
                        tol: float = DEFAULT_TOL) -> VerificationReport:
    """Child-growth and path-sum consequences of beta-balance:
    adv(v)/max_j adv(c_j) >= sqrt(1 + 1/beta^2) and
    sigma(root) <= (2 + sqrt(2)) beta^2."""
    fm = fm or metrics(formula)
    beta = fm.beta
    report = VerificationReport("balance", f"n={fm.n} beta={beta:.6g}")
    floor = math.sqrt(1.0 + 1.0 / beta ** 2)
    for path in sorted(fm.size):
        node = formula.node_at(path)
        if not hasattr(node, "children"):
            continue
        child_advs = [fm.adv[path + (j,)] for j in range(len(node.children))]
        ratio = fm.adv[path] / max(child_advs)
        report.add(f"{path_str(path)}: growth ratio at least sqrt(1+1/beta^2)",
                   floor, ratio, tol)
    report.add("path sum within (2+sqrt(2)) beta^2",
               fm.sigma_minus_root, (2.0 + math.sqrt(2.0)) * beta ** 2, tol)
    return report


def check_gap_lemma(formula: Formula, x: Sequence[int] | str,
                    w_out: float | None = None,
                    tol: float = DEFAULT_TOL,
                    amp_zero: float = AMP_ZERO) -> VerificationReport:
    """Sign and magnitude bounds on small-eigenvalue eigenvectors of the tree.

    For every eigenpair with eigenvalue E in (0, E_max], at every vertex v
    with parent p: either both amplitudes vanish, or for NAND value 0 the
    ratio h a_p / a_v lies in (0, y_v E], and for NAND value 1 the ratio
    a_v / (h a_p) lies in [-y_v E, 0).  Near-threshold amplitudes are logged
    rather than failed.
    """
    bits = tuple(int(b) for b in x)
    report = VerificationReport("gap", f"n={formula.n} x={_fmt(bits)}")
    if not ensure_calibrated(formula, w_out):
        report.notes.append(
            f"calibration skipped: n={formula.n} exceeds the exhaustive range")
    tree = build_nand_tree(formula, bits, w_out)
    e_max = tree.e_max()
    report.notes.append(
        f"window (0, {e_max:.6g}] from (8 sigma^3 n)^(-1/2) with n the leaf count")
    if abs(tree.sigma_root - tree.formula_sigma) > 1e-12:
        report.notes.append(
            "tree path sum exceeds the formula's (pass-through inversions "
            "present); bounds use the tree value")
    spec = spectral_report(tree.adjacency)
    in_range = [(float(ev), spec.eigenvectors[:, i])
                for i, ev in enumerate(spec.eigenvalues)
                if amp_zero < ev <= e_max]
    if not in_range:
        report.notes.append("no eigenvalues in range")
        report.add("vacuous: no eigenvalues in (0, E_max]", 0.0, 0.0, tol,
                   note=f"E_max={e_max:.6g}")
        return report
    for energy, vec in in_range:
        y = tree.y_values(energy)
        norm = float(np.linalg.norm(vec))
        for i, v in enumerate(tree.vertices):
            if v.kind == "aux_root":
                continue
            p = v.parent
            a_v = float(vec[i])
            a_p = float(vec[p])
            h = tree.edge_weight(i)
            both_zero = abs(a_v) <= amp_zero * norm and abs(a_p) <= amp_zero * norm
            if both_zero:
                continue
            if min(abs(a_v), abs(a_p)) <= amp_zero * norm:
                if max(abs(a_v), abs(a_p)) <= AMP_BORDERLINE * norm:
                    report.notes.append(
                        f"E={energy:.6g} {v.label}: near-threshold amplitudes "
                        f"logged ({a_v:.2e}, {a_p:.2e})")
                    continue
            if v.nand == 0:
                ratio = h * a_p / a_v if a_v != 0.0 else math.inf
                report.add(f"E={energy:.6g} {v.label}: ratio positive",
                           -ratio, 0.0, tol)
                report.add(f"E={energy:.6g} {v.label}: ratio within y_v E",
                           ratio, y[i] * energy, tol)
            else:
                ratio = a_v / (h * a_p) if a_p != 0.0 else math.inf
                report.add(f"E={energy:.6g} {v.label}: ratio negative",
                           ratio, 0.0, tol)
                report.add(f"E={energy:.6g} {v.label}: ratio within -y_v E",
                           -y[i] * energy, ratio, tol)
    return report


def _fmt(bits) -> str:
    return "".join(str(int(b)) for b in bits)


# ---------------------------------------------------------------------------
# suite runner

LEMMAS = ("canonical", "norm", "compose", "dsnorm", "witness", "balance", "gap")


def run_lemma(formula: Formula, lemma: str,
              inputs: str | Sequence[Sequence[int]] = "all",
              w_out: float | None = None,
              tol: float = DEFAULT_TOL) -> list[VerificationReport]:
    """Run one lemma checker (or all) over a formula and selected inputs."""
    from .compose import compose_formula

    if lemma == "all":
        out: list[VerificationReport] = []
        for name in LEMMAS:
            out.extend(run_lemma(formula, name, inputs, w_out, tol))
        return out
    if lemma not in LEMMAS:
        raise SpanProgramError(f"unknown lemma selector {lemma!r}")

    if inputs == "all":
        if formula.n > 14 and lemma in ("compose", "witness", "gap"):
            raise SpanProgramError(
                f"exhaustive check infeasible for n={formula.n}; pass inputs")
        xs = list(all_inputs(formula.n))
    else:
        xs = [tuple(int(b) for b in x) for x in inputs]

    reports: list[VerificationReport] = []
    if lemma == "balance":
        return [check_balance_lemma(formula, tol=tol)]
    if lemma == "gap":
        for x in xs:
            reports.append(check_gap_lemma(formula, x, w_out, tol))
        return reports

    composed = compose_formula(formula)
    if lemma in ("canonical", "norm"):
        checker = check_canonical_premise if lemma == "canonical" else check_norm_lemma
        for path, gate_prog in sorted(composed.gate_programs().items()):
            try:
                rep = checker(gate_prog)
                rep.instance = f"{path}: {rep.instance}"
                reports.append(rep)
            except NotCanonicalError as exc:
                skip = VerificationReport(lemma, path)
                skip.notes.append(f"skipped: {exc}")
                reports.append(skip)
        return reports
    if lemma == "dsnorm":
        return [check_directsum_norm(composed, tol)]
    for x in xs:
        if lemma == "compose":
            reports.append(check_compose_lemma(composed, x, tol))
        else:
            reports.append(check_witness_bounds(composed, x, tol))
    return reports
