"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 input error, 3 verification failure.
Identical inputs, seed and flags produce byte-identical outputs; the seed
comes from (in increasing precedence) a config file, --seed, and the
SPANFORGE_SEED environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .checks import LEMMAS, run_lemma
from .compose import compose_formula
from .corpus import family_formula
from .errors import ParseError, SpanforgeError
from .formula import Formula, all_inputs, metrics, parse
from .gates import DEFAULT_REGISTRY, GateRegistry
from .graphs import abs_norm, biadjacency, input_graph, to_dot
from .nandtree import build_nand_tree
from .oracles import max_witness_sizes_tree
from .spanprog import SpanProgram, witness_report

USAGE_EXIT = 1
INPUT_EXIT = 2
CHECK_EXIT = 3

CONFIG_KEYS = {"seed", "jobs", "tolerance"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _fail(code: int, message: str) -> "SystemExit":
    print(f"spanforge: {message}", file=sys.stderr)
    return SystemExit(code)


def _load_registry(path: str | None) -> GateRegistry:
    if path is None:
        return DEFAULT_REGISTRY
    registry = GateRegistry()
    try:
        registry.load_file(path)
    except (OSError, SpanforgeError) as exc:
        raise _fail(INPUT_EXIT, str(exc))
    return registry


def _read_formula(path: str, registry: GateRegistry) -> Formula:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _fail(INPUT_EXIT, str(exc))
    stripped = text.strip()
    try:
        return parse(stripped, registry)
    except ParseError as exc:
        head = stripped[: exc.pos]
        line = head.count("\n") + 1
        col = exc.pos - (head.rfind("\n") + 1) + 1
        raise _fail(INPUT_EXIT, f"{path}:{line}:{col}: {exc}")
    except SpanforgeError as exc:
        raise _fail(INPUT_EXIT, f"{path}: {exc}")


def _read_program(path: str) -> SpanProgram:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise _fail(INPUT_EXIT, str(exc))
    except json.JSONDecodeError as exc:
        raise _fail(INPUT_EXIT, f"{path}: schema error: not valid JSON ({exc})")
    try:
        return SpanProgram.from_json(data)
    except SpanforgeError as exc:
        raise _fail(INPUT_EXIT, f"{path}: schema error: {exc}")


def _dump_json(data, out: str | None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_bits(text: str, n: int) -> tuple[int, ...]:
    if len(text) != n or any(c not in "01" for c in text):
        raise _fail(INPUT_EXIT, f"--input must be {n} bits over 0/1")
    return tuple(int(c) for c in text)


def _inputs_for(args, n: int):
    if args.input is not None:
        return [_parse_bits(args.input, n)]
    if n > 16:
        raise _fail(INPUT_EXIT, f"--all infeasible for n={n}; pass --input")
    return list(all_inputs(n))


def _resolve_run_config(args) -> tuple[int, int, float]:
    """(seed, jobs, tolerance): config file < CLI flags < SPANFORGE_SEED."""
    seed, jobs, tolerance = 0, 1, 1e-8
    if getattr(args, "config", None):
        cfg = _read_config(args.config)
        try:
            seed = int(cfg.get("seed", seed))
            jobs = int(cfg.get("jobs", jobs))
            tolerance = float(cfg.get("tolerance", tolerance))
        except ValueError as exc:
            raise _fail(INPUT_EXIT, f"{args.config}: {exc}")
    if getattr(args, "seed", None) is not None:
        seed = args.seed
    if getattr(args, "jobs", None) is not None:
        jobs = args.jobs
    if getattr(args, "tolerance", None) is not None:
        tolerance = args.tolerance
    env = os.environ.get("SPANFORGE_SEED")
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            raise _fail(INPUT_EXIT, f"SPANFORGE_SEED must be an integer, got {env!r}")
    return seed, max(1, jobs), tolerance


def _resolve_seed(args) -> int:
    return _resolve_run_config(args)[0]


def _read_config(path: str) -> dict:
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise _fail(INPUT_EXIT, f"{path}:{lineno}: expected key=value")
                key, value = (part.strip() for part in line.split("=", 1))
                if key not in CONFIG_KEYS:
                    raise _fail(INPUT_EXIT, f"{path}:{lineno}: unknown key {key!r}")
                out[key] = value
    except OSError as exc:
        raise _fail(INPUT_EXIT, str(exc))
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_parse(args) -> int:
    registry = _load_registry(args.registry)
    formula = _read_formula(args.path, registry)
    _dump_json(formula.to_json(), args.out)
    return 0


def cmd_metrics(args) -> int:
    registry = _load_registry(args.registry)
    formula = _read_formula(args.path, registry)
    seed = _resolve_seed(args)
    try:
        fm = metrics(formula, seed=seed)
    except SpanforgeError as exc:
        raise _fail(INPUT_EXIT, str(exc))
    if args.json:
        _dump_json(fm.to_json(), args.out)
    else:
        lines = [f"n        {fm.n}",
                 f"depth    {fm.depth}",
                 f"adv      {fm.adv_root:.12g}",
                 f"sigma-   {fm.sigma_minus_root:.12g}",
                 f"sigma+   {fm.sigma_plus_root:.12g}",
                 f"beta     {fm.beta:.12g}",
                 f"k_max    {fm.k_max}"]
        if fm.methods_used():
            lines.append("methods  " + ",".join(fm.methods_used()))
        print("\n".join(lines))
    return 0


def cmd_compose(args) -> int:
    registry = _load_registry(args.registry)
    formula = _read_formula(args.path, registry)
    try:
        composed = compose_formula(formula)
    except SpanforgeError as exc:
        raise _fail(INPUT_EXIT, str(exc))
    _dump_json(composed.program.to_json(), args.out)
    return 0


def cmd_wsize(args) -> int:
    if args.path.endswith(".json"):
        program = _read_program(args.path)
    else:
        registry = _load_registry(args.registry)
        formula = _read_formula(args.path, registry)
        try:
            program = compose_formula(formula).program
        except SpanforgeError as exc:
            raise _fail(INPUT_EXIT, str(exc))
    costs = None
    if args.costs:
        costs = [float(c) for c in args.costs.split(",")]
        if len(costs) != program.n:
            raise _fail(INPUT_EXIT, f"--costs needs {program.n} values")
    reports = []
    for bits in _inputs_for(args, program.n):
        try:
            r = witness_report(program, bits, costs)
        except SpanforgeError as exc:
            raise _fail(INPUT_EXIT, str(exc))
        reports.append({"x": "".join(map(str, bits)), **r.to_json()})
    _dump_json(reports if args.input is None else reports[0], args.out)
    return 0


def cmd_graph(args) -> int:
    if args.path.endswith(".json"):
        program = _read_program(args.path)
    else:
        registry = _load_registry(args.registry)
        formula = _read_formula(args.path, registry)
        try:
            program = compose_formula(formula).program
        except SpanforgeError as exc:
            raise _fail(INPUT_EXIT, str(exc))
    if args.input is not None:
        graph = input_graph(program, _parse_bits(args.input, program.n))
    else:
        graph = biadjacency(program)
    dot = to_dot(graph)
    if args.dot is None or args.dot == "-":
        sys.stdout.write(dot)
    else:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(dot)
    return 0


def cmd_check(args) -> int:
    registry = _load_registry(args.registry)
    tolerance = _resolve_run_config(args)[2]
    if args.path.endswith(".json"):
        program = _read_program(args.path)
        from .checks import check_canonical_premise, check_norm_lemma
        from .errors import NotCanonicalError

        reports = []
        selectors = ("canonical", "norm") if args.lemma == "all" else (args.lemma,)
        for name in selectors:
            if name not in ("canonical", "norm"):
                raise _fail(INPUT_EXIT,
                            f"lemma {name} needs a formula, not a program file")
            checker = check_canonical_premise if name == "canonical" \
                else check_norm_lemma
            try:
                reports.append(checker(program, tol=tolerance))
            except NotCanonicalError as exc:
                raise _fail(INPUT_EXIT, str(exc))
    else:
        formula = _read_formula(args.path, registry)
        inputs = "all" if args.input is None \
            else [_parse_bits(args.input, formula.n)]
        try:
            reports = run_lemma(formula, args.lemma, inputs, tol=tolerance)
        except SpanforgeError as exc:
            raise _fail(INPUT_EXIT, str(exc))
    _dump_json([r.to_json() for r in reports], args.out)
    failed = [r for r in reports if not r.passed]
    if failed:
        print(f"spanforge: {len(failed)} of {len(reports)} checks failed",
              file=sys.stderr)
        return CHECK_EXIT
    return 0


def _sweep_row(family: str, n: int, seed: int, index: int) -> dict:
    formula = family_formula(family, n, seed + index)
    fm = metrics(formula)
    composed = compose_formula(formula)
    wsize, wsizef = max_witness_sizes_tree(formula)
    norm = abs_norm(biadjacency(composed.program).biadj).spectral
    rng = np.random.default_rng(seed + index)
    samples = [tuple([0] * n), tuple([1] * n)]
    samples += [tuple(int(b) for b in rng.integers(0, 2, size=n))
                for _ in range(min(30, 1 << min(n, 5)))]
    gap = min(_tree_gap(formula, x) for x in samples)
    return {"n": n, "adv": fm.adv_root, "sigma_minus": fm.sigma_minus_root,
            "wsize": wsize, "wsizef": wsizef, "abs_norm": norm,
            "t_est": wsizef * norm, "gap": gap, "_index": index}


def _tree_gap(formula: Formula, x) -> float:
    tree = build_nand_tree(formula, x)
    evals = np.linalg.eigvalsh(tree.adjacency)
    scale = float(np.max(np.abs(evals)))
    positive = evals[evals > 1e-10 * scale]
    return float(positive.min()) if positive.size else float("inf")


def _parse_sizes(spec: str) -> list[int]:
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError:
            raise _fail(INPUT_EXIT, f"bad size range {spec!r}")
    try:
        return [int(s) for s in spec.split(",") if s]
    except ValueError:
        raise _fail(INPUT_EXIT, f"bad size list {spec!r}")


def cmd_sweep(args) -> int:
    seed, jobs, _ = _resolve_run_config(args)
    sizes = _parse_sizes(args.sizes)
    if args.family == "balanced-andor":
        sizes = [n for n in sizes if n >= 1 and not (n & (n - 1))]
    if not sizes:
        rows: list[dict] = []
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(
                lambda pair: _sweep_row(args.family, pair[1], seed, pair[0]),
                enumerate(sizes)))
    rows.sort(key=lambda r: r["_index"])
    header = ["n", "adv", "sigma_minus", "wsize", "wsizef", "abs_norm",
              "t_est", "gap"]
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(
            str(r[h]) if h == "n" else format(r[h], ".12g") for h in header))
    text = "\n".join(lines) + "\n"
    if args.csv is None or args.csv == "-":
        sys.stdout.write(text)
    else:
        with open(args.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if args.fig:
        if not rows:
            raise _fail(INPUT_EXIT, "cannot render a figure from an empty sweep")
        from .plotting import render_sweep_figure

        render_sweep_figure(rows, args.fig)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="spanforge",
                     description="Span programs for read-once formulas")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, registry=True):
        p.add_argument("--out", "-o", default=None, help="output file (default stdout)")
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--seed", type=int, default=None)
        if registry:
            p.add_argument("--registry", default=None, help="gate registry file")

    p = sub.add_parser("parse", help="parse a formula file, print its JSON tree")
    p.add_argument("path")
    common(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("metrics", help="print n, depth, adv, sigma-, sigma+, beta, k_max")
    p.add_argument("path")
    p.add_argument("--json", action="store_true")
    common(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("compose", help="compose gate programs along the formula")
    p.add_argument("path")
    common(p)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("wsize", help="witness sizes of the composed program")
    p.add_argument("path", help="formula file or span-program .json")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--input", default=None, help="bit string")
    group.add_argument("--all", action="store_true", help="sweep every input")
    p.add_argument("--costs", default=None, help="comma-separated costs")
    common(p)
    p.set_defaults(func=cmd_wsize)

    p = sub.add_parser("graph", help="export the program graph as DOT")
    p.add_argument("path", help="formula file or span-program .json")
    p.add_argument("--dot", default=None, help="output DOT file (default stdout)")
    p.add_argument("--input", default=None,
                   help="bit string: export the dangling-edge variant")
    common(p)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("check", help="run verification lemmas")
    p.add_argument("path", help="formula file or span-program .json")
    p.add_argument("--lemma", default="all", choices=list(LEMMAS) + ["all"])
    p.add_argument("--input", default=None, help="bit string (default: all inputs)")
    p.add_argument("--tolerance", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="scaling sweep over a formula family")
    p.add_argument("--family", required=True,
                   choices=["balanced-andor", "skew-andor", "random-andor"])
    p.add_argument("--sizes", required=True, help="A..B or comma list")
    p.add_argument("--csv", default=None, help="output CSV (default stdout)")
    p.add_argument("--fig", default=None, help="also render a PNG figure")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except SpanforgeError as exc:
        print(f"spanforge: {exc}", file=sys.stderr)
        return INPUT_EXIT


if __name__ == "__main__":
    sys.exit(main())
