"""Read-once formulas: parsing, evaluation, normalization and metrics.

A formula is a rooted gate tree whose leaves carry distinct input indices
1..n.  Vertices are addressed by paths: the root is the empty tuple, the
j-th child of a vertex at path p is ``p + (j,)``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence, Union

from .errors import FormulaError, GateError, NormalizeError, ParseError
from .gates import (DEFAULT_REGISTRY, GateRegistry, GateSpec, spec_for_table,
                    tt_complement_input, tt_complement_output, tt_restrict,
                    tt_support)

Path = tuple[int, ...]


@dataclass(frozen=True)
class Leaf:
    index: int  # 1-based input position


@dataclass(frozen=True)
class GateNode:
    gate: GateSpec
    children: tuple["Node", ...]


Node = Union[Leaf, GateNode]


@dataclass(frozen=True)
class Constant:
    """Result of normalizing a formula that collapses to a constant."""

    value: int


@dataclass(frozen=True)
class Formula:
    """An immutable read-once formula on inputs x1..xn.

    ``var_map``, when set, records the original input index behind each
    (renumbered) leaf of a normalized formula: new index i reads original
    input ``var_map[i-1]``.
    """

    root: Node
    n: int
    var_map: tuple[int, ...] | None = None

    # -- traversal ---------------------------------------------------------

    def walk(self) -> Iterator[tuple[Path, Node]]:
        stack: list[tuple[Path, Node]] = [((), self.root)]
        while stack:
            path, node = stack.pop()
            yield path, node
            if isinstance(node, GateNode):
                for j in reversed(range(len(node.children))):
                    stack.append((path + (j,), node.children[j]))

    def node_at(self, path: Path) -> Node:
        node = self.root
        for j in path:
            if not isinstance(node, GateNode):
                raise FormulaError(f"no vertex at path {path}")
            node = node.children[j]
        return node

    def internal_paths(self) -> list[Path]:
        return [p for p, node in self.walk() if isinstance(node, GateNode)]

    def leaf_indices(self, path: Path = ()) -> list[int]:
        """Input indices under ``path``, in left-to-right order."""
        out: list[int] = []

        def rec(node: Node) -> None:
            if isinstance(node, Leaf):
                out.append(node.index)
            else:
                for c in node.children:
                    rec(c)

        rec(self.node_at(path))
        return out

    def subtree_sizes(self) -> dict[Path, int]:
        sizes: dict[Path, int] = {}

        def rec(path: Path, node: Node) -> int:
            if isinstance(node, Leaf):
                sizes[path] = 1
                return 1
            total = sum(rec(path + (j,), c) for j, c in enumerate(node.children))
            sizes[path] = total
            return total

        rec((), self.root)
        return sizes

    @property
    def depth(self) -> int:
        def rec(node: Node) -> int:
            if isinstance(node, Leaf):
                return 0
            return 1 + max(rec(c) for c in node.children)

        return rec(self.root)

    # -- evaluation --------------------------------------------------------

    def evaluate(self, x: Sequence[int] | str) -> int:
        bits = _as_bits(x)
        if len(bits) != self.n:
            raise FormulaError(f"input has {len(bits)} bits, formula reads {self.n}")

        def rec(node: Node) -> int:
            if isinstance(node, Leaf):
                return bits[node.index - 1]
            return node.gate.value([rec(c) for c in node.children])

        return rec(self.root)

    # -- rendering ---------------------------------------------------------

    def __str__(self) -> str:
        def rec(node: Node) -> str:
            if isinstance(node, Leaf):
                return f"x{node.index}"
            return node.gate.name + "(" + ",".join(rec(c) for c in node.children) + ")"

        return rec(self.root)

    def to_json(self) -> dict:
        def rec(node: Node) -> dict:
            if isinstance(node, Leaf):
                return {"var": node.index}
            return {"gate": node.gate.name,
                    "children": [rec(c) for c in node.children]}

        return rec(self.root)

    @staticmethod
    def from_json(data: dict | str, registry: GateRegistry | None = None) -> "Formula":
        if isinstance(data, str):
            data = json.loads(data)
        registry = registry or DEFAULT_REGISTRY

        def rec(obj: dict) -> Node:
            if "var" in obj:
                return Leaf(int(obj["var"]))
            children = tuple(rec(c) for c in obj.get("children", ()))
            gate = registry.resolve(obj["gate"], len(children))
            return GateNode(gate, children)

        root = rec(data)
        return _finish_formula(root)


def _as_bits(x: Sequence[int] | str) -> tuple[int, ...]:
    if isinstance(x, str):
        if not re.fullmatch(r"[01]*", x):
            raise FormulaError(f"input string must be over 0/1, got {x!r}")
        return tuple(int(c) for c in x)
    bits = tuple(int(b) for b in x)
    if any(b not in (0, 1) for b in bits):
        raise FormulaError("input bits must be 0/1")
    return bits


def all_inputs(n: int) -> Iterator[tuple[int, ...]]:
    if n > 20:
        raise FormulaError(f"refusing exhaustive sweep over 2^{n} inputs")
    for i in range(1 << n):
        yield tuple((i >> (n - 1 - j)) & 1 for j in range(n))


def _finish_formula(root: Node, var_map: tuple[int, ...] | None = None) -> Formula:
    """Validate read-once structure and contiguous indices, then freeze."""
    seen: list[int] = []

    def rec(node: Node) -> None:
        if isinstance(node, Leaf):
            seen.append(node.index)
        else:
            for c in node.children:
                rec(c)

    rec(root)
    dupes = {i for i in seen if seen.count(i) > 1}
    if dupes:
        raise FormulaError(
            f"read-once violation: x{sorted(dupes)[0]} appears more than once")
    if sorted(seen) != list(range(1, len(seen) + 1)):
        raise FormulaError(
            f"input indices must be exactly x1..x{len(seen)}, got {sorted(seen)}")
    return Formula(root, len(seen), var_map)


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"(?P<ws>\s+)|(?P<var>x[1-9][0-9]*)|(?P<ident>[A-Z][A-Z0-9_]*)"
                    r"|(?P<lp>\()|(?P<rp>\))|(?P<comma>,)")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


def parse(text: str, registry: GateRegistry | None = None) -> Formula:
    """Parse formula text like ``OR(AND(x1,x2),x3)`` against a gate registry."""
    registry = registry or DEFAULT_REGISTRY
    tokens = _tokenize(text)
    idx = 0

    def peek() -> tuple[str, str, int]:
        return tokens[idx]

    def take(kind: str) -> tuple[str, str, int]:
        nonlocal idx
        tok = tokens[idx]
        if tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1]!r}", tok[2])
        idx += 1
        return tok

    def expr() -> Node:
        kind, value, pos = peek()
        if kind == "var":
            take("var")
            return Leaf(int(value[1:]))
        if kind == "ident":
            take("ident")
            take("lp")
            args: list[Node] = []
            if peek()[0] != "rp":
                args.append(expr())
                while peek()[0] == "comma":
                    take("comma")
                    args.append(expr())
            take("rp")
            try:
                gate = registry.resolve(value, len(args))
            except GateError as exc:
                raise ParseError(str(exc), pos) from exc
            return GateNode(gate, tuple(args))
        raise ParseError(f"expected gate or variable, found {value!r}", pos)

    root = expr()
    take("eof")
    return _finish_formula(root)


def evaluate(formula: Formula, x: Sequence[int] | str) -> int:
    return formula.evaluate(x)


# ---------------------------------------------------------------------------
# normalization

def normalize(formula: Formula) -> Formula | Constant:
    """Eliminate constant gates, single-bit gates and NOT gates.

    Negations are absorbed by complementing truth tables toward the leaves;
    a negation that lands on a leaf is folded into the parent gate's table
    instead.  The result either collapses to a :class:`Constant`, or is a
    formula in which every gate depends on at least two inputs.  Surviving
    leaves are renumbered to x1..xm preserving numeric order; the mapping
    back to the original indices is stored in ``var_map``.
    """
    sim = _simplify(formula.root)
    if sim[0] == "const":
        return Constant(sim[1])
    if sim[0] == "leaf":
        _, index, negated = sim
        if negated:
            raise NormalizeError(
                "formula is the negation of a single variable; "
                "no gate-tree normal form exists")
        return Formula(Leaf(1), 1, var_map=None if index == 1 else (index,))
    root = _rebuild(sim)
    survivors = sorted(_collect_leaves(root))
    renumber = {orig: new + 1 for new, orig in enumerate(survivors)}
    root = _renumber(root, renumber)
    identity = survivors == list(range(1, len(survivors) + 1))
    return Formula(root, len(survivors),
                   var_map=None if identity else tuple(survivors))


def _simplify(node: Node):
    """Reduce to ('const', b) | ('leaf', index, negated) | ('node', table, children)."""
    if isinstance(node, Leaf):
        return ("leaf", node.index, False)

    table = node.gate.truth_table
    k = node.gate.arity
    kept = []  # list of simplified, non-constant children (negations absorbed)
    pos = 0  # position within the current (shrinking) table
    for child in node.children:
        sub = _simplify(child)
        if sub[0] == "const":
            table = tt_restrict(table, k, pos, sub[1])
            k -= 1
            continue
        if sub[0] == "leaf" and sub[2]:
            table = tt_complement_input(table, k, pos)
            sub = ("leaf", sub[1], False)
        kept.append(sub)
        pos += 1

    support = tt_support(table, k)
    if not support:
        return ("const", table[0])

    # drop children the restricted table no longer depends on
    if len(support) < k:
        for p in sorted(set(range(k)) - set(support), reverse=True):
            table = tt_restrict(table, k, p, 0)
            k -= 1
            del kept[p]

    if k == 1:
        child = kept[0]
        if table == (0, 1):
            return child
        # table == (1, 0): push the negation into the child
        if child[0] == "leaf":
            return ("leaf", child[1], True)
        return ("node", tt_complement_output(child[1]), child[2])

    return ("node", table, kept)


def _rebuild(sim) -> Node:
    if sim[0] == "leaf":
        return Leaf(sim[1])
    _, table, children = sim
    gate = spec_for_table(table, len(children))
    return GateNode(gate, tuple(_rebuild(c) for c in children))


def _collect_leaves(node: Node) -> list[int]:
    if isinstance(node, Leaf):
        return [node.index]
    out: list[int] = []
    for c in node.children:
        out.extend(_collect_leaves(c))
    return out


def _renumber(node: Node, mapping: dict[int, int]) -> Node:
    if isinstance(node, Leaf):
        return Leaf(mapping[node.index])
    return GateNode(node.gate, tuple(_renumber(c, mapping) for c in node.children))


# ---------------------------------------------------------------------------
# fan-in-2 expansion

def expand_fanin2(formula: Formula) -> Formula:
    """Replace each k-ary AND/OR by a balanced binary tree of the same gate."""

    def rec(node: Node) -> Node:
        if isinstance(node, Leaf):
            return node
        if not (node.gate.is_and or node.gate.is_or):
            raise FormulaError(
                f"expand_fanin2 requires AND/OR gates, found {node.gate.name}")
        children = [rec(c) for c in node.children]
        family = "AND" if node.gate.is_and else "OR"
        return _balanced(family, children)

    def _balanced(family: str, children: list[Node]) -> Node:
        if len(children) == 1:
            return children[0]
        half = (len(children) + 1) // 2
        left = _balanced(family, children[:half])
        right = _balanced(family, children[half:])
        gate = DEFAULT_REGISTRY.resolve(family, 2)
        return GateNode(gate, (left, right))

    return _finish_formula(rec(formula.root), formula.var_map)


# ---------------------------------------------------------------------------
# metrics

BoundFn = Callable[[GateSpec, Sequence[float]], object]


@dataclass
class FormulaMetrics:
    """Per-vertex complexity data plus the global balance/shape parameters.

    ``adv`` holds the composed adversary value of each subformula (leaves are
    1 by convention), ``sigma_minus``/``sigma_plus`` the maxima over
    root-to-leaf paths of the reciprocal values and squared values.  ``beta``
    is the worst ratio, over internal vertices, of the largest to smallest
    child adversary value.
    """

    n: int
    depth: int
    k_max: int
    beta: float
    size: dict[Path, int]
    adv: dict[Path, float]
    sigma_minus: dict[Path, float]
    sigma_plus: dict[Path, float]
    method: dict[Path, str] = field(default_factory=dict)

    @property
    def adv_root(self) -> float:
        return self.adv[()]

    @property
    def sigma_minus_root(self) -> float:
        return self.sigma_minus[()]

    @property
    def sigma_plus_root(self) -> float:
        return self.sigma_plus[()]

    def methods_used(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.method.values())))

    def to_json(self) -> dict:
        key = path_str
        return {
            "n": self.n,
            "depth": self.depth,
            "k_max": self.k_max,
            "beta": self.beta,
            "adv": self.adv_root,
            "sigma_minus": self.sigma_minus_root,
            "sigma_plus": self.sigma_plus_root,
            "methods": list(self.methods_used()),
            "per_vertex": {
                key(p): {
                    "size": self.size[p],
                    "adv": self.adv[p],
                    "sigma_minus": self.sigma_minus[p],
                    "sigma_plus": self.sigma_plus[p],
                }
                for p in sorted(self.size)
            },
        }


def path_str(path: Path) -> str:
    return "r" if not path else "r/" + "/".join(str(j) for j in path)


def metrics(formula: Formula, bound_fn: BoundFn | None = None,
            seed: int = 0) -> FormulaMetrics:
    """Compute subtree sizes, adversary values, path sums and balance.

    Adversary values compose bottom-up: the value at a vertex is its gate's
    cost bound evaluated at the children's values, with leaves contributing
    1.  ``bound_fn`` overrides the default resolver (gate closed form, then
    the minimax solver for gates without one).
    """
    if bound_fn is None:
        from .adversary import gate_cost_bound

        def bound_fn(gate, costs):
            return gate_cost_bound(gate, costs, seed=seed)

    size: dict[Path, int] = {}
    adv: dict[Path, float] = {}
    sminus: dict[Path, float] = {}
    splus: dict[Path, float] = {}
    method: dict[Path, str] = {}
    beta = 1.0
    k_max = 0

    def rec(path: Path, node: Node) -> None:
        nonlocal beta, k_max
        if isinstance(node, Leaf):
            size[path] = 1
            adv[path] = 1.0
            sminus[path] = 1.0
            splus[path] = 1.0
            return
        for j, c in enumerate(node.children):
            rec(path + (j,), c)
        child_paths = [path + (j,) for j in range(len(node.children))]
        costs = [adv[p] for p in child_paths]
        result = bound_fn(node.gate, costs)
        if isinstance(result, tuple):
            value, how = result
        else:
            value, how = float(result), "user"
        size[path] = sum(size[p] for p in child_paths)
        adv[path] = float(value)
        method[path] = how
        k_max = max(k_max, len(node.children))
        beta = max(beta, max(costs) / min(costs))
        sminus[path] = 1.0 / adv[path] + max(sminus[p] for p in child_paths)
        splus[path] = adv[path] ** 2 + max(splus[p] for p in child_paths)

    rec((), formula.root)
    return FormulaMetrics(n=formula.n, depth=formula.depth, k_max=k_max,
                          beta=beta, size=size, adv=adv, sigma_minus=sminus,
                          sigma_plus=splus, method=method)
