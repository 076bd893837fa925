"""Fault tree model: a DAG of basic events and gates, with failure-time semantics.

Nodes are basic events (component failures with a lifetime law) or gates.
Failure times are non-negative floats, with ``math.inf`` meaning "never
fails".  Gate outputs from input times z1..zq:

    or       min(z)
    and      max(z)
    vote(k)  k-th smallest z
    pand     z_q when z1 <= z2 <= ... <= z_q (ties pass), else inf
    seq      z1 + z2 + ... + z_q
    spare(a) z1 when z2 < a*z1, else (1-a)*z1 + z2   (two inputs, a in [0,1])

Child order is significant for pand, seq and spare.  Nodes may be shared
(one node feeding several gates); evaluation visits each node once per
sample.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import Lifetime

__all__ = [
    "GateKind",
    "BasicEvent",
    "Gate",
    "FaultTree",
    "ValidationError",
    "validate",
    "eval_gate",
    "top_time",
    "batch_top_times",
]


class ValidationError(ValueError):
    """Structural problem in a fault tree; the message names the node."""


class GateKind(enum.Enum):
    AND = "and"
    OR = "or"
    VOTING = "vote"
    PAND = "pand"
    SEQ = "seq"
    SPARE = "spare"


@dataclass(frozen=True)
class BasicEvent:
    name: str
    dist: Lifetime


@dataclass(frozen=True)
class Gate:
    name: str
    kind: GateKind
    children: tuple[str, ...]
    k: int | None = None  # voting threshold
    dormancy: float | None = None  # spare only

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


@dataclass
class FaultTree:
    """Ordered node set plus the name of the TOP node.

    Construct, then call :func:`validate` before evaluating.  Basic events
    keep their declaration order; sample vectors are indexed accordingly.
    """

    nodes: tuple[BasicEvent | Gate, ...]
    top: str
    _validated: bool = field(default=False, repr=False, compare=False)
    _by_name: dict = field(default_factory=dict, repr=False, compare=False)
    _order: tuple[str, ...] = field(default=(), repr=False, compare=False)
    _be_index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.nodes = tuple(self.nodes)

    @property
    def basic_events(self) -> tuple[BasicEvent, ...]:
        return tuple(n for n in self.nodes if isinstance(n, BasicEvent))

    @property
    def gates(self) -> tuple[Gate, ...]:
        return tuple(n for n in self.nodes if isinstance(n, Gate))

    @property
    def validated(self) -> bool:
        return self._validated

    def node(self, name: str) -> BasicEvent | Gate:
        return self._by_name[name]


def validate(tree: FaultTree) -> FaultTree:
    """Check all structural invariants and cache the evaluation order.

    Raises :class:`ValidationError` naming the offending node for: duplicate
    names, undeclared children, bad arity, voting threshold out of range,
    spare dormancy outside [0, 1], cycles, and nodes unreachable from TOP.
    """
    by_name: dict[str, BasicEvent | Gate] = {}
    for node in tree.nodes:
        if node.name in by_name:
            raise ValidationError(f"duplicate node name: {node.name}")
        by_name[node.name] = node

    if tree.top not in by_name:
        raise ValidationError(f"top node not declared: {tree.top}")

    for node in tree.nodes:
        if not isinstance(node, Gate):
            continue
        for child in node.children:
            if child not in by_name:
                raise ValidationError(f"gate {node.name}: undeclared child {child}")
        arity = len(node.children)
        if node.kind in (GateKind.AND, GateKind.OR, GateKind.PAND, GateKind.SEQ):
            if arity < 2:
                raise ValidationError(
                    f"gate {node.name}: {node.kind.value} needs at least 2 children, has {arity}"
                )
        elif node.kind is GateKind.VOTING:
            if arity < 1:
                raise ValidationError(f"gate {node.name}: vote needs at least 1 child")
            if node.k is None or not (1 <= node.k <= arity):
                raise ValidationError(
                    f"gate {node.name}: voting threshold {node.k} out of range 1..{arity}"
                )
        elif node.kind is GateKind.SPARE:
            if arity != 2:
                raise ValidationError(
                    f"gate {node.name}: spare takes exactly 2 children, has {arity}"
                )
            if node.dormancy is None or not (0.0 <= node.dormancy <= 1.0):
                raise ValidationError(
                    f"gate {node.name}: spare dormancy {node.dormancy} outside [0, 1]"
                )

    # Iterative DFS from TOP: detects cycles (naming the cycle) and yields a
    # children-first evaluation order.
    order: list[str] = []
    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    stack: list[tuple[str, int]] = [(tree.top, 0)]
    path: list[str] = []
    while stack:
        name, child_idx = stack.pop()
        node = by_name[name]
        if child_idx == 0:
            if state.get(name) == 2:
                continue
            if state.get(name) == 1:
                continue
            state[name] = 1
            path.append(name)
        children = node.children if isinstance(node, Gate) else ()
        if child_idx < len(children):
            stack.append((name, child_idx + 1))
            child = children[child_idx]
            if state.get(child) == 1:
                cycle_start = path.index(child)
                cycle = path[cycle_start:] + [child]
                raise ValidationError("cycle detected: " + " -> ".join(cycle))
            if state.get(child) != 2:
                stack.append((child, 0))
        else:
            state[name] = 2
            path.pop()
            order.append(name)

    unreachable = [n.name for n in tree.nodes if state.get(n.name) != 2]
    if unreachable:
        raise ValidationError("nodes unreachable from top: " + ", ".join(unreachable))

    tree._by_name = by_name
    tree._order = tuple(order)
    tree._be_index = {
        be.name: i for i, be in enumerate(tree.basic_events)
    }
    tree._validated = True
    return tree


def eval_gate(kind: GateKind, values, *, k: int | None = None, dormancy: float | None = None) -> float:
    """Output failure time of a single gate from its input times."""
    values = list(values)
    if kind is GateKind.OR:
        return min(values)
    if kind is GateKind.AND:
        return max(values)
    if kind is GateKind.VOTING:
        return sorted(values)[k - 1]
    if kind is GateKind.PAND:
        for a, b in zip(values, values[1:]):
            if a > b:
                return math.inf
        return values[-1]
    if kind is GateKind.SEQ:
        return sum(values)
    if kind is GateKind.SPARE:
        z1, z2 = values
        # endpoints are split out so 0 * inf never arises
        if dormancy == 0.0:
            return z1 + z2
        if dormancy == 1.0:
            return z1 if z2 < z1 else z2
        if z2 < dormancy * z1:
            return z1
        return (1.0 - dormancy) * z1 + z2
    raise ValueError(f"unknown gate kind: {kind}")


def top_time(tree: FaultTree, sample) -> float:
    """Failure time of TOP for one vector of basic-event times.

    ``sample`` is indexed like ``tree.basic_events``.  Shared subtrees are
    evaluated once.  Requires a validated tree.
    """
    if not tree._validated:
        raise ValidationError("tree must be validated before evaluation")
    if len(sample) != len(tree._be_index):
        raise ValueError(
            f"sample has {len(sample)} entries, tree has {len(tree._be_index)} basic events"
        )
    values: dict[str, float] = {}
    for name in tree._order:
        node = tree._by_name[name]
        if isinstance(node, BasicEvent):
            values[name] = float(sample[tree._be_index[name]])
        else:
            values[name] = eval_gate(
                node.kind,
                [values[c] for c in node.children],
                k=node.k,
                dormancy=node.dormancy,
            )
    return values[tree.top]


def batch_top_times(tree: FaultTree, times: np.ndarray) -> np.ndarray:
    """Vectorized TOP failure times for a (cycles, basic_events) matrix.

    Semantically identical to calling :func:`top_time` row by row; used by
    the simulation engine where per-sample Python dispatch would dominate.
    """
    if not tree._validated:
        raise ValidationError("tree must be validated before evaluation")
    times = np.asarray(times, dtype=float)
    if times.ndim != 2 or times.shape[1] != len(tree._be_index):
        raise ValueError("times must have one column per basic event")
    values: dict[str, np.ndarray] = {}
    for name in tree._order:
        node = tree._by_name[name]
        if isinstance(node, BasicEvent):
            values[name] = times[:, tree._be_index[name]]
            continue
        kids = [values[c] for c in node.children]
        if node.kind is GateKind.OR:
            out = np.minimum.reduce(kids)
        elif node.kind is GateKind.AND:
            out = np.maximum.reduce(kids)
        elif node.kind is GateKind.VOTING:
            out = np.sort(np.stack(kids, axis=0), axis=0)[node.k - 1]
        elif node.kind is GateKind.PAND:
            ordered = np.ones(times.shape[0], dtype=bool)
            for a, b in zip(kids, kids[1:]):
                ordered &= a <= b
            out = np.where(ordered, kids[-1], np.inf)
        elif node.kind is GateKind.SEQ:
            out = np.add.reduce(kids)
        elif node.kind is GateKind.SPARE:
            z1, z2 = kids
            a = node.dormancy
            if a == 0.0:
                out = z1 + z2
            elif a == 1.0:
                out = np.where(z2 < z1, z1, z2)
            else:
                out = np.where(z2 < a * z1, z1, (1.0 - a) * z1 + z2)
        else:
            raise ValueError(f"unknown gate kind: {node.kind}")
        values[name] = out
    return values[tree.top]
