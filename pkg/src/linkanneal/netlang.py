"""Network text format, DIMACS CNF parsing, and CNF -> network compilation.

Network format (line oriented, ``#`` starts a comment)::

    nodes <id> <id> ...
    link <id> <id> [Echi] [Elambda]
    gate <name> <id...> : <row> <row> ... [dE=<x>]
    fix <id> <0|1> [dE=<x>]
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .network import (
    DEFAULT_DELTA_E,
    DEFAULT_E_CHI,
    DEFAULT_E_LAMBDA,
    BoundaryConstraint,
    Gate,
    Link,
    Network,
    Node,
    validate_network,
)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*\Z")
_ROW = re.compile(r"[01]*\Z")


class NetlangError(ValueError):
    """Parse or validation failure, with 1-based line/column when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + message)


class DimacsError(NetlangError):
    pass


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def satisfied_by(self, values) -> bool:
        """``values[i]`` is the truth value of variable ``i + 1``."""
        return all(any((lit > 0) == bool(values[abs(lit) - 1]) for lit in c) for c in self.clauses)


def _decode(text) -> str:
    if isinstance(text, (bytes, bytearray)):
        try:
            return bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise NetlangError(f"input is not UTF-8 ({exc.reason})") from None
    return text


def _tokens(line: str):
    """Yield (token, 1-based column) pairs, stopping at a comment."""
    for m in re.finditer(r"\S+", line):
        if m.group().startswith("#"):
            return
        yield m.group(), m.start() + 1


def _float(tok: str, lineno: int, col: int, what: str) -> float:
    try:
        value = float(tok)
    except ValueError:
        raise NetlangError(f"bad {what} {tok!r}", lineno, col) from None
    if not value > 0 or value == float("inf"):
        raise NetlangError(f"{what} must be a positive finite number", lineno, col)
    return value


def _delta_e(tok: str, lineno: int, col: int) -> float:
    if not tok.startswith("dE="):
        raise NetlangError(f"unexpected token {tok!r}", lineno, col)
    return _float(tok[3:], lineno, col + 3, "dE")


def parse_network(text, validate: bool = True) -> Network:
    text = _decode(text)
    ids: list[str] = []
    pos: dict[str, int] = {}
    links: list[Link] = []
    linked: dict[int, int] = {}
    gates: list[Gate] = []
    fixes: list[BoundaryConstraint] = []
    fixed: set[int] = set()

    def lookup(tok: str, col: int, lineno: int) -> int:
        if tok not in pos:
            raise NetlangError(f"unknown node {tok}", lineno, col)
        return pos[tok]

    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = list(_tokens(line))
        if not toks:
            continue
        (kw, kcol), args = toks[0], toks[1:]

        if kw == "nodes":
            if not args:
                raise NetlangError("nodes needs at least one id", lineno, kcol)
            for tok, col in args:
                if not _IDENT.match(tok):
                    raise NetlangError(f"bad node id {tok!r}", lineno, col)
                if tok in pos:
                    raise NetlangError(f"duplicate node {tok}", lineno, col)
                pos[tok] = len(ids)
                ids.append(tok)

        elif kw == "link":
            if not 2 <= len(args) <= 4:
                raise NetlangError("link takes two node ids and up to two energies", lineno, kcol)
            a = lookup(*args[0], lineno)
            b = lookup(*args[1], lineno)
            if a == b:
                raise NetlangError("link joins a node to itself", lineno, args[1][1])
            for idx, (tok, col) in ((a, args[0]), (b, args[1])):
                if idx in linked:
                    raise NetlangError(
                        f"node {tok} already in link on line {linked[idx]}", lineno, col
                    )
            e_chi = _float(args[2][0], lineno, args[2][1], "Echi") if len(args) > 2 else DEFAULT_E_CHI
            e_lam = _float(args[3][0], lineno, args[3][1], "Elambda") if len(args) > 3 else DEFAULT_E_LAMBDA
            linked[a] = linked[b] = lineno
            links.append(Link(a, b, e_chi, e_lam))

        elif kw == "gate":
            if not args:
                raise NetlangError("gate needs a name", lineno, kcol)
            name, ncol = args[0]
            if not _IDENT.match(name):
                raise NetlangError(f"bad gate name {name!r}", lineno, ncol)
            colon = [i for i, (tok, _) in enumerate(args) if tok == ":"]
            if len(colon) != 1:
                raise NetlangError("gate needs exactly one ':' separating support and rows", lineno, kcol)
            support_toks = args[1 : colon[0]]
            rest = args[colon[0] + 1 :]
            support = tuple(lookup(tok, col, lineno) for tok, col in support_toks)
            if len(set(support)) != len(support):
                raise NetlangError(f"gate {name} repeats a support node", lineno, ncol)
            delta_e = DEFAULT_DELTA_E
            if rest and rest[-1][0].startswith("dE="):
                delta_e = _delta_e(rest[-1][0], lineno, rest[-1][1])
                rest = rest[:-1]
            rows = []
            for tok, col in rest:
                if not _ROW.match(tok):
                    raise NetlangError(f"bad row {tok!r}", lineno, col)
                if len(tok) != len(support):
                    raise NetlangError(
                        f"row length mismatch: {tok!r} on {len(support)}-node support", lineno, col
                    )
                rows.append(tok)
            if not rows:
                raise NetlangError(f"gate {name} has no satisfying rows", lineno, kcol)
            gates.append(Gate(name, support, frozenset(rows), delta_e))

        elif kw == "fix":
            if len(args) not in (2, 3):
                raise NetlangError("fix takes a node id, a value and optional dE", lineno, kcol)
            node = lookup(*args[0], lineno)
            vtok, vcol = args[1]
            if vtok not in ("0", "1"):
                raise NetlangError(f"fix value must be 0 or 1, got {vtok!r}", lineno, vcol)
            if node in fixed:
                raise NetlangError(f"duplicate constraint on node {args[0][0]}", lineno, args[0][1])
            delta_e = _delta_e(args[2][0], lineno, args[2][1]) if len(args) == 3 else DEFAULT_DELTA_E
            fixed.add(node)
            fixes.append(BoundaryConstraint(node, int(vtok), delta_e))

        else:
            raise NetlangError(f"unknown keyword {kw!r}", lineno, kcol)

    net = Network(
        tuple(Node(nid, i) for i, nid in enumerate(ids)),
        tuple(links),
        tuple(gates),
        tuple(fixes),
    )
    if validate:
        report = validate_network(net)
        if not report.ok:
            raise NetlangError("; ".join(report.violations))
    return net


def _num(x: float) -> str:
    return repr(float(x))


def serialize_network(net: Network) -> str:
    ids = [node.id for node in net.nodes]
    lines = ["nodes " + " ".join(ids)] if ids else []
    for link in net.links:
        lines.append(
            f"link {ids[link.a]} {ids[link.b]} {_num(link.energy_chi)} {_num(link.energy_lambda)}"
        )
    for gate in net.gates:
        support = " ".join(ids[i] for i in gate.support)
        rows = " ".join(sorted(gate.satisfying_rows))
        lines.append(f"gate {gate.name} {support} : {rows} dE={_num(gate.delta_e)}")
    for c in net.constraints:
        lines.append(f"fix {ids[c.node]} {c.value} dE={_num(c.delta_e)}")
    return "".join(line + "\n" for line in lines)


def parse_dimacs(text) -> CnfFormula:
    text = _decode(text)
    header = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    last_pos = (1, 1)
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("%"):
            break
        if stripped.startswith("p"):
            if header is not None:
                raise DimacsError("second header line", lineno, 1)
            fields = stripped.split()
            if len(fields) != 4 or fields[0] != "p" or fields[1] != "cnf":
                raise DimacsError("header must read 'p cnf <vars> <clauses>'", lineno, 1)
            try:
                header = (int(fields[2]), int(fields[3]))
            except ValueError:
                raise DimacsError("header counts must be integers", lineno, 1) from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsError("header counts must be non-negative", lineno, 1)
            continue
        if header is None:
            raise DimacsError("clause before 'p cnf' header", lineno, 1)
        for m in re.finditer(r"\S+", line):
            tok, col = m.group(), m.start() + 1
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"bad literal {tok!r}", lineno, col) from None
            last_pos = (lineno, col)
            if lit == 0:
                if not current:
                    raise DimacsError("empty clause", lineno, col)
                clauses.append(tuple(current))
                current = []
            elif abs(lit) > header[0]:
                raise DimacsError(f"literal out of range: {lit}", lineno, col)
            else:
                current.append(lit)
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        raise DimacsError("missing terminator: last clause not ended by 0", *last_pos)
    if len(clauses) != header[1]:
        raise DimacsError(f"header mismatch: header says {header[1]} clauses, found {len(clauses)}")
    return CnfFormula(header[0], tuple(clauses))


def variable_nodes(f: CnfFormula) -> list[int]:
    """Node indices carrying variables 1..V in a compiled network."""
    return [2 * i for i in range(f.num_vars)]


def compile_cnf(f: CnfFormula, delta_e: float = DEFAULT_DELTA_E) -> Network:
    """Complement-pair encoding: node ``x<i>`` linked to ``nx<i>``, one gate per clause.

    A clause gate accepts every row over its literal nodes except all-zeros.
    """
    ids = []
    for v in range(1, f.num_vars + 1):
        ids += [f"x{v}", f"nx{v}"]
    nodes = tuple(Node(nid, i) for i, nid in enumerate(ids))
    links = tuple(Link(2 * i, 2 * i + 1) for i in range(f.num_vars))
    gates = []
    for j, clause in enumerate(f.clauses, start=1):
        support = []
        for lit in clause:
            node = 2 * (abs(lit) - 1) + (0 if lit > 0 else 1)
            if node not in support:
                support.append(node)
        m = len(support)
        rows = frozenset(format(i, f"0{m}b") for i in range(1, 2**m))
        gates.append(Gate(f"c{j}", tuple(support), rows, delta_e))
    net = Network(nodes, links, tuple(gates), ())
    report = validate_network(net)
    if not report.ok:
        raise NetlangError("; ".join(report.violations))
    return net
