"""Gate specifications, truth-table utilities, and the gate registry.

A gate is a boolean function of k ordered inputs given by its full truth
table.  Tables are stored in lexicographic input order: entry ``i`` holds the
gate value on the bit string whose *first* input is the most significant bit
of ``i`` (so the all-zeros input comes first).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import GateError

MAX_ARITY = 8

CostFn = Callable[[Sequence[float]], float]


def euclidean_costs(costs: Sequence[float]) -> float:
    """Composed cost of AND/OR-type gates: the Euclidean norm of the costs."""
    return math.sqrt(sum(float(c) ** 2 for c in costs))


# ---------------------------------------------------------------------------
# truth-table helpers (tables are tuples of 0/1, length 2**k)

def table_index(bits: Sequence[int]) -> int:
    i = 0
    for b in bits:
        i = (i << 1) | int(b)
    return i


def tt_value(table: Sequence[int], bits: Sequence[int]) -> int:
    return table[table_index(bits)]


def tt_depends(table: Sequence[int], k: int, pos: int) -> bool:
    """Whether the table's value ever changes when input ``pos`` flips."""
    stride = 1 << (k - 1 - pos)
    for i in range(len(table)):
        if not (i & stride) and table[i] != table[i | stride]:
            return True
    return False


def tt_support(table: Sequence[int], k: int) -> tuple[int, ...]:
    return tuple(p for p in range(k) if tt_depends(table, k, p))


def tt_restrict(table: Sequence[int], k: int, pos: int, bit: int) -> tuple[int, ...]:
    """Table of the (k-1)-input function with input ``pos`` fixed to ``bit``."""
    stride = 1 << (k - 1 - pos)
    out = []
    for i in range(len(table)):
        if ((i >> (k - 1 - pos)) & 1) == bit:
            out.append(table[i])
    assert len(out) == len(table) // 2
    return tuple(out)


def tt_complement_output(table: Sequence[int]) -> tuple[int, ...]:
    return tuple(1 - b for b in table)


def tt_complement_input(table: Sequence[int], k: int, pos: int) -> tuple[int, ...]:
    stride = 1 << (k - 1 - pos)
    return tuple(table[i ^ stride] for i in range(len(table)))


def and_table(k: int) -> tuple[int, ...]:
    return tuple(1 if i == (1 << k) - 1 else 0 for i in range(1 << k))


def or_table(k: int) -> tuple[int, ...]:
    return tuple(0 if i == 0 else 1 for i in range(1 << k))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GateSpec:
    """A k-input boolean gate with an optional cost model.

    ``cost_bound`` maps a vector of per-input costs to the gate's composed
    complexity value (the adversary bound with those costs); gates without
    one fall back to the numeric minimax solver.  ``attached_programs``,
    when present, holds a pair of span programs computing the gate and its
    complement, used for formula composition of non-AND/OR gates.
    """

    name: str
    arity: int
    truth_table: tuple[int, ...]
    cost_bound: CostFn | None = None
    attached_programs: tuple[object, object] | None = None

    def __post_init__(self):
        if not 0 <= self.arity <= MAX_ARITY:
            raise GateError(f"gate {self.name}: arity {self.arity} outside 0..{MAX_ARITY}")
        if len(self.truth_table) != 1 << self.arity:
            raise GateError(
                f"gate {self.name}: truth table has {len(self.truth_table)} entries, "
                f"expected {1 << self.arity}")
        if any(b not in (0, 1) for b in self.truth_table):
            raise GateError(f"gate {self.name}: truth table entries must be 0/1")

    def value(self, bits: Sequence[int]) -> int:
        if len(bits) != self.arity:
            raise GateError(f"gate {self.name}: expected {self.arity} inputs, got {len(bits)}")
        return tt_value(self.truth_table, bits)

    def support(self) -> tuple[int, ...]:
        return tt_support(self.truth_table, self.arity)

    @property
    def is_constant(self) -> bool:
        return len(set(self.truth_table)) == 1

    @property
    def is_and(self) -> bool:
        return self.arity >= 2 and self.truth_table == and_table(self.arity)

    @property
    def is_or(self) -> bool:
        return self.arity >= 2 and self.truth_table == or_table(self.arity)

    def complemented(self, name: str | None = None) -> "GateSpec":
        table = tt_complement_output(self.truth_table)
        return GateSpec(name or _derived_name(table), self.arity, table,
                        cost_bound=self.cost_bound)


_NAMED_TABLES: dict[tuple[int, ...], str] = {}


def _register_named_table(name: str, table: tuple[int, ...]) -> None:
    _NAMED_TABLES.setdefault(table, name)


def _derived_name(table: tuple[int, ...]) -> str:
    known = _NAMED_TABLES.get(table)
    if known is not None:
        return known
    return "TT" + "".join(str(b) for b in table)


def _make_builtin(name: str, k: int) -> GateSpec:
    if name == "AND":
        return GateSpec("AND", k, and_table(k), cost_bound=euclidean_costs)
    if name == "OR":
        return GateSpec("OR", k, or_table(k), cost_bound=euclidean_costs)
    if name == "NAND":
        # complementing the output leaves the adversary bound unchanged
        return GateSpec("NAND", k, tt_complement_output(and_table(k)),
                        cost_bound=euclidean_costs)
    if name == "NOR":
        return GateSpec("NOR", k, tt_complement_output(or_table(k)),
                        cost_bound=euclidean_costs)
    raise GateError(f"unknown builtin family {name}")


_BUILTIN_FAMILIES = ("AND", "OR", "NAND", "NOR")

NOT_GATE = GateSpec("NOT", 1, (1, 0), cost_bound=lambda s: float(s[0]))
CONST0 = GateSpec("CONST0", 0, (0,), cost_bound=lambda s: 0.0)
CONST1 = GateSpec("CONST1", 0, (1,), cost_bound=lambda s: 0.0)
MAJ3 = GateSpec("MAJ3", 3, (0, 0, 0, 1, 0, 1, 1, 1))

_BUILTIN_CACHE: dict[tuple[str, int], GateSpec] = {
    ("NOT", 1): NOT_GATE,
    ("CONST0", 0): CONST0,
    ("CONST1", 0): CONST1,
    ("MAJ3", 3): MAJ3,
}

for _k in range(2, MAX_ARITY + 1):
    for _fam in _BUILTIN_FAMILIES:
        _spec = _make_builtin(_fam, _k)
        _BUILTIN_CACHE[(_fam, _k)] = _spec
        _register_named_table(_spec.name, _spec.truth_table)
_register_named_table("NOT", NOT_GATE.truth_table)
_register_named_table("MAJ3", MAJ3.truth_table)


_REGISTRY_LINE = re.compile(
    r"^gate\s+(?P<name>[A-Z][A-Z0-9_]*)\s+arity=(?P<arity>\d+)\s+tt=(?P<tt>[01]+)\s*$")


class GateRegistry:
    """Resolves gate names to :class:`GateSpec` instances.

    The builtin families AND/OR/NAND/NOR are available at every arity from 2
    to 8, plus NOT, CONST0, CONST1 and MAJ3.  User gates come from registry
    files with one line per gate::

        gate NAME arity=K tt=BITS

    where BITS has length 2**K in lexicographic input order.  User gates must
    depend on at least two inputs; degenerate gates only exist as builtins so
    that normalization can eliminate them.
    """

    def __init__(self, include_builtins: bool = True):
        self._gates: dict[tuple[str, int], GateSpec] = {}
        self._include_builtins = include_builtins

    def register(self, spec: GateSpec, replace: bool = False) -> GateSpec:
        key = (spec.name, spec.arity)
        if not replace and key in self._gates:
            raise GateError(f"gate {spec.name}/{spec.arity} already registered")
        self._gates[key] = spec
        _register_named_table(spec.name, spec.truth_table)
        return spec

    def resolve(self, name: str, arity: int) -> GateSpec:
        spec = self._gates.get((name, arity))
        if spec is not None:
            return spec
        if self._include_builtins:
            spec = _BUILTIN_CACHE.get((name, arity))
            if spec is not None:
                return spec
            if name in _BUILTIN_FAMILIES and not 2 <= arity <= MAX_ARITY:
                raise GateError(f"gate {name} needs 2..{MAX_ARITY} arguments, got {arity}")
        defined = sorted(k for n, k in set(self._gates) | set(_BUILTIN_CACHE) if n == name)
        if defined:
            raise GateError(
                f"gate {name} used with {arity} arguments; defined for arity {defined}")
        raise GateError(f"unknown gate {name}")

    def known_names(self) -> set[str]:
        names = {n for n, _ in self._gates}
        if self._include_builtins:
            names |= {n for n, _ in _BUILTIN_CACHE} | set(_BUILTIN_FAMILIES)
        return names

    def load_lines(self, lines: Iterable[str], source: str = "<registry>") -> int:
        count = 0
        for lineno, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            m = _REGISTRY_LINE.match(line)
            if m is None:
                raise GateError(f"{source}:{lineno}: malformed registry line: {line!r}")
            arity = int(m.group("arity"))
            bits = tuple(int(c) for c in m.group("tt"))
            spec = GateSpec(m.group("name"), arity, bits)
            if len(spec.support()) < 2:
                raise GateError(
                    f"{source}:{lineno}: gate {spec.name} depends on fewer than two inputs")
            self.register(spec, replace=True)
            count += 1
        return count

    def load_file(self, path) -> int:
        with open(path, "r", encoding="utf-8") as fh:
            return self.load_lines(fh, source=str(path))


DEFAULT_REGISTRY = GateRegistry()


def spec_for_table(table: Sequence[int], arity: int) -> GateSpec:
    """Build a GateSpec for a synthesized truth table, reusing known names."""
    table = tuple(int(b) for b in table)
    key = (_derived_name(table), arity)
    cached = _BUILTIN_CACHE.get(key)
    if cached is not None and cached.truth_table == table:
        return cached
    cost = euclidean_costs if (table == and_table(arity) or table == or_table(arity)
                               or (arity >= 2 and table in (tt_complement_output(and_table(arity)),
                                                            tt_complement_output(or_table(arity))))
                               ) else None
    return GateSpec(_derived_name(table), arity, table, cost_bound=cost)
