"""Reader and writer for the line-oriented ``.dft`` fault-tree format.

Grammar (one statement per line, ``#`` starts a comment, blank lines are
ignored, identifiers are case-sensitive ``[A-Za-z_][A-Za-z0-9_]*``):

    dft 1
    mission_time <float>                         # optional
    be <name> exp mttf=<float>
    be <name> weibull scale=<float> shape=<float>
    be <name> lognormal mu=<float> sigma=<float>
    be <name> normal mean=<float> sd=<float>
    gate <name> (and|or|vote:<k>|pand|seq|spare:a=<float>) <child>...
    top <name>

The header line must come first.  Declarations may appear in any order;
forward references between gates are allowed.  Every reported error carries
a 1-based line (and column where meaningful).

Serialization is canonical: header, mission time, basic events in
declaration order, gates in a deterministic topological order, then the top
line, all floats printed with full round-trip precision.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .distributions import Exponential, LogNormal, Normal, Weibull
from .tree import BasicEvent, FaultTree, Gate, GateKind

__all__ = ["TreeDocument", "ParseError", "DocumentError", "parse", "serialize", "to_fault_tree"]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_TOKEN = re.compile(r"\S+")

_FAMILY_PARAMS = {
    "exp": ("mttf",),
    "weibull": ("scale", "shape"),
    "lognormal": ("mu", "sigma"),
    "normal": ("mean", "sd"),
}

_KIND_KEYWORDS = {
    "and": GateKind.AND,
    "or": GateKind.OR,
    "pand": GateKind.PAND,
    "seq": GateKind.SEQ,
}


class ParseError(ValueError):
    """Rejected input text; knows where the problem is."""

    def __init__(self, message: str, line: int, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")


class DocumentError(ValueError):
    """A TreeDocument that violates its own invariants (e.g. for serialization)."""


@dataclass
class TreeDocument:
    """Parsed form of a ``.dft`` file.

    Basic-event order is significant (it fixes sample-vector indexing);
    gates compare as an unordered collection since serialization reorders
    them topologically.
    """

    version: int = 1
    mission_time: float | None = None
    events: list[BasicEvent] = field(default_factory=list)
    gates: list[Gate] = field(default_factory=list)
    top: str = ""

    def __eq__(self, other):
        if not isinstance(other, TreeDocument):
            return NotImplemented
        return (
            self.version == other.version
            and self.mission_time == other.mission_time
            and self.events == other.events
            and {g.name: g for g in self.gates} == {g.name: g for g in other.gates}
            and self.top == other.top
        )


def _tokens(line: str):
    """(text, 1-based column) pairs for one line, comments stripped."""
    hash_at = line.find("#")
    if hash_at >= 0:
        line = line[:hash_at]
    return [(m.group(0), m.start() + 1) for m in _TOKEN.finditer(line)]


def _parse_float(text: str, lineno: int, col: int, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"{what}: not a number: {text!r}", lineno, col) from None


def _check_ident(name: str, lineno: int, col: int) -> str:
    if not _IDENT.match(name):
        raise ParseError(f"invalid identifier: {name!r}", lineno, col)
    return name


def parse(text: str) -> TreeDocument:
    """Parse ``.dft`` text into a :class:`TreeDocument`.

    Raises :class:`ParseError` at the first problem, with its location.
    """
    doc = TreeDocument()
    declared: dict[str, int] = {}  # name -> declaring line
    top_seen: int | None = None
    header_seen = False
    # child references checked after all declarations, so order is free
    pending_refs: list[tuple[str, str, int, int]] = []  # gate, child, line, col
    last_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        toks = _tokens(raw)
        if not toks:
            continue
        word, col = toks[0]

        if not header_seen:
            if word != "dft":
                raise ParseError("file must start with header 'dft 1'", lineno, col)
            if len(toks) != 2:
                raise ParseError("header takes exactly one version token", lineno, col)
            if toks[1][0] != "1":
                raise ParseError(f"unsupported format version {toks[1][0]!r}", lineno, toks[1][1])
            doc.version = 1
            header_seen = True
            continue

        if word == "mission_time":
            if len(toks) != 2:
                raise ParseError("mission_time takes exactly one value", lineno, col)
            if doc.mission_time is not None:
                raise ParseError("mission_time declared twice", lineno, col)
            value = _parse_float(toks[1][0], lineno, toks[1][1], "mission_time")
            if not (value > 0 and math.isfinite(value)):
                raise ParseError(f"mission_time must be positive, got {value}", lineno, toks[1][1])
            doc.mission_time = value

        elif word == "be":
            if len(toks) < 3:
                raise ParseError("be line needs a name and a family", lineno, col)
            name = _check_ident(toks[1][0], lineno, toks[1][1])
            if name in declared:
                raise ParseError(
                    f"duplicate declaration of {name} (first on line {declared[name]})",
                    lineno,
                    toks[1][1],
                )
            family, fam_col = toks[2]
            if family not in _FAMILY_PARAMS:
                raise ParseError(f"unknown distribution family {family!r}", lineno, fam_col)
            params = _parse_params(toks[3:], _FAMILY_PARAMS[family], lineno, family)
            try:
                if family == "exp":
                    dist = Exponential(params["mttf"])
                elif family == "weibull":
                    dist = Weibull(params["scale"], params["shape"])
                elif family == "lognormal":
                    dist = LogNormal(params["mu"], params["sigma"])
                else:
                    dist = Normal(params["mean"], params["sd"])
            except ValueError as exc:
                raise ParseError(f"invalid {family} parameters: {exc}", lineno, fam_col) from None
            doc.events.append(BasicEvent(name, dist))
            declared[name] = lineno

        elif word == "gate":
            if len(toks) < 4:
                raise ParseError("gate line needs a name, a kind and children", lineno, col)
            name = _check_ident(toks[1][0], lineno, toks[1][1])
            if name in declared:
                raise ParseError(
                    f"duplicate declaration of {name} (first on line {declared[name]})",
                    lineno,
                    toks[1][1],
                )
            kind, k, dormancy = _parse_kind(toks[2][0], lineno, toks[2][1])
            children = []
            for text_tok, tok_col in toks[3:]:
                child = _check_ident(text_tok, lineno, tok_col)
                children.append(child)
                pending_refs.append((name, child, lineno, tok_col))
            doc.gates.append(Gate(name, kind, tuple(children), k=k, dormancy=dormancy))
            declared[name] = lineno

        elif word == "top":
            if len(toks) != 2:
                raise ParseError("top takes exactly one name", lineno, col)
            if top_seen is not None:
                raise ParseError(f"top declared twice (first on line {top_seen})", lineno, col)
            doc.top = _check_ident(toks[1][0], lineno, toks[1][1])
            pending_refs.append(("<top>", doc.top, lineno, toks[1][1]))
            top_seen = lineno

        else:
            raise ParseError(f"unknown statement {word!r}", lineno, col)

    if not header_seen:
        raise ParseError("empty input: missing 'dft 1' header", max(last_line, 1))
    if top_seen is None:
        raise ParseError("missing top declaration", last_line + 1)
    for owner, child, lineno, tok_col in pending_refs:
        if child not in declared:
            what = "top" if owner == "<top>" else f"gate {owner}"
            raise ParseError(f"{what} references undeclared node {child}", lineno, tok_col)
    return doc


def _parse_params(toks, required, lineno, family):
    seen: dict[str, float] = {}
    for text_tok, tok_col in toks:
        key, eq, value = text_tok.partition("=")
        if not eq:
            raise ParseError(f"expected key=value, got {text_tok!r}", lineno, tok_col)
        if key not in required:
            raise ParseError(f"unknown {family} parameter {key!r}", lineno, tok_col)
        if key in seen:
            raise ParseError(f"parameter {key!r} given twice", lineno, tok_col)
        seen[key] = _parse_float(value, lineno, tok_col, f"parameter {key}")
    missing = [k for k in required if k not in seen]
    if missing:
        raise ParseError(f"{family} needs parameters: {', '.join(missing)}", lineno)
    return seen


def _parse_kind(token: str, lineno: int, col: int):
    if token in _KIND_KEYWORDS:
        return _KIND_KEYWORDS[token], None, None
    if token.startswith("vote:"):
        raw = token[len("vote:"):]
        try:
            k = int(raw)
        except ValueError:
            raise ParseError(f"vote threshold must be an integer: {raw!r}", lineno, col) from None
        if k < 1:
            raise ParseError(f"vote threshold must be positive, got {k}", lineno, col)
        return GateKind.VOTING, k, None
    if token.startswith("spare:"):
        raw = token[len("spare:"):]
        if not raw.startswith("a="):
            raise ParseError(f"spare expects a=<float>, got {raw!r}", lineno, col)
        a = _parse_float(raw[2:], lineno, col, "spare dormancy")
        if not (0.0 <= a <= 1.0):
            raise ParseError(f"spare dormancy {a} outside [0, 1]", lineno, col)
        return GateKind.SPARE, None, a
    raise ParseError(f"unknown gate kind {token!r}", lineno, col)


def _check_document(doc: TreeDocument) -> dict[str, object]:
    declared: dict[str, object] = {}
    for node in list(doc.events) + list(doc.gates):
        if node.name in declared:
            raise DocumentError(f"duplicate node name: {node.name}")
        declared[node.name] = node
    for gate in doc.gates:
        if not gate.children:
            raise DocumentError(f"gate {gate.name} has no children")
        for child in gate.children:
            if child not in declared:
                raise DocumentError(f"gate {gate.name} references undeclared node {child}")
    if not doc.top:
        raise DocumentError("document has no top")
    if doc.top not in declared:
        raise DocumentError(f"top references undeclared node {doc.top}")
    return declared


def _kind_token(gate: Gate) -> str:
    if gate.kind is GateKind.VOTING:
        return f"vote:{gate.k}"
    if gate.kind is GateKind.SPARE:
        return f"spare:a={gate.dormancy!r}"
    return gate.kind.value


def _be_line(be: BasicEvent) -> str:
    d = be.dist
    if isinstance(d, Exponential):
        params = f"exp mttf={d.mttf!r}"
    elif isinstance(d, Weibull):
        params = f"weibull scale={d.scale_param!r} shape={d.shape!r}"
    elif isinstance(d, LogNormal):
        params = f"lognormal mu={d.mu!r} sigma={d.sigma!r}"
    elif isinstance(d, Normal):
        params = f"normal mean={d.mean!r} sd={d.sd!r}"
    else:
        raise DocumentError(f"basic event {be.name}: unknown distribution {type(d).__name__}")
    return f"be {be.name} {params}"


def serialize(doc: TreeDocument) -> str:
    """Canonical text for a valid document.

    Raises :class:`DocumentError` on structural problems (empty gates,
    dangling references, gate cycles).
    """
    _check_document(doc)
    lines = ["dft 1"]
    if doc.mission_time is not None:
        lines.append(f"mission_time {doc.mission_time!r}")
    for be in doc.events:
        lines.append(_be_line(be))

    # children-first gate order; scanning in declaration order keeps it stable
    emitted: set[str] = set()
    remaining = list(doc.gates)
    gate_names = {g.name for g in doc.gates}
    while remaining:
        progressed = False
        still = []
        for gate in remaining:
            if all(c not in gate_names or c in emitted for c in gate.children):
                lines.append(
                    f"gate {gate.name} {_kind_token(gate)} " + " ".join(gate.children)
                )
                emitted.add(gate.name)
                progressed = True
            else:
                still.append(gate)
        if not progressed:
            raise DocumentError(
                "gate cycle prevents serialization: " + ", ".join(g.name for g in still)
            )
        remaining = still

    lines.append(f"top {doc.top}")
    return "\n".join(lines) + "\n"


def to_fault_tree(doc: TreeDocument) -> FaultTree:
    """Build the evaluable tree; call :func:`dftmc.tree.validate` on it next."""
    return FaultTree(nodes=tuple(doc.events) + tuple(doc.gates), top=doc.top)
