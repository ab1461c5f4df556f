"""Reversible Boolean networks: nodes in linked pairs, truth-table gates, boundary constraints.

Basis convention used everywhere in the package: node index ``k`` of an
``N``-node network is bit ``N - 1 - k`` of a basis index, so the bitstring
``"10"`` (node 0 = 1, node 1 = 0) is basis index 2 and lexicographic order of
assignments equals numeric order of basis indices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_DELTA_E = 1.0
DEFAULT_E_CHI = 8.0
DEFAULT_E_LAMBDA = 8.0
MAX_ENUMERATION_NODES = 24


class SizeOverflow(ValueError):
    """Raised when an exhaustive routine is asked to scan too many nodes."""


@dataclass(frozen=True)
class Node:
    id: str
    index: int


@dataclass(frozen=True)
class Link:
    """A wire between two nodes; always encodes the NOT relation ``a != b``."""

    a: int
    b: int
    energy_chi: float = DEFAULT_E_CHI
    energy_lambda: float = DEFAULT_E_LAMBDA


@dataclass(frozen=True)
class Gate:
    """Truth-table gate. ``satisfying_rows`` are bitstrings over ``support``."""

    name: str
    support: tuple[int, ...]
    satisfying_rows: frozenset[str]
    delta_e: float = DEFAULT_DELTA_E

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "satisfying_rows", frozenset(self.satisfying_rows))

    def row_table(self) -> np.ndarray:
        """Boolean lookup table indexed by the support-local pattern integer."""
        m = len(self.support)
        table = np.zeros(2**m, dtype=bool)
        for row in self.satisfying_rows:
            if len(row) == m and set(row) <= {"0", "1"}:
                table[int(row, 2) if m else 0] = True
        return table


@dataclass(frozen=True)
class BoundaryConstraint:
    """One-qubit gate fixing ``node`` to ``value``."""

    node: int
    value: int
    delta_e: float = DEFAULT_DELTA_E


@dataclass(frozen=True)
class Network:
    nodes: tuple[Node, ...]
    links: tuple[Link, ...] = ()
    gates: tuple[Gate, ...] = ()
    constraints: tuple[BoundaryConstraint, ...] = ()

    def __post_init__(self):
        for name in ("nodes", "links", "gates", "constraints"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @property
    def n(self) -> int:
        return len(self.nodes)

    def index_of(self, node_id: str) -> int:
        for node in self.nodes:
            if node.id == node_id:
                return node.index
        raise KeyError(node_id)

    def partner(self, index: int) -> int:
        for link in self.links:
            if link.a == index:
                return link.b
            if link.b == index:
                return link.a
        raise KeyError(index)

    def link_of(self, index: int) -> Link:
        for link in self.links:
            if index in (link.a, link.b):
                return link
        raise KeyError(index)

    def elements(self) -> list[Gate]:
        """Gates followed by constraints rewritten as one-qubit gates."""
        out = list(self.gates)
        for c in self.constraints:
            out.append(
                Gate(
                    name=f"fix:{self.nodes[c.node].id}",
                    support=(c.node,),
                    satisfying_rows=frozenset({str(c.value)}),
                    delta_e=c.delta_e,
                )
            )
        return out


def make_network(
    node_ids: Sequence[str],
    links: Iterable[tuple] = (),
    gates: Iterable[Gate] = (),
    fixes: Iterable[tuple] = (),
) -> Network:
    """Convenience constructor working with node ids instead of indices.

    ``links`` holds ``(a_id, b_id[, e_chi[, e_lambda]])`` tuples, ``fixes``
    holds ``(node_id, value[, delta_e])`` tuples. Gates must already use
    indices.
    """
    nodes = tuple(Node(nid, i) for i, nid in enumerate(node_ids))
    pos = {nid: i for i, nid in enumerate(node_ids)}
    link_objs = []
    for spec in links:
        a, b, *energies = spec
        link_objs.append(Link(pos[a], pos[b], *energies))
    cons = []
    for spec in fixes:
        nid, value, *rest = spec
        cons.append(BoundaryConstraint(pos[nid], int(value), *rest))
    return Network(nodes, tuple(link_objs), tuple(gates), tuple(cons))


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "valid" if self.ok else "\n".join(self.violations)


def validate_network(net: Network) -> ValidationReport:
    report = ValidationReport()
    bad = report.violations
    n = net.n

    ids = [node.id for node in net.nodes]
    if len(set(ids)) != len(ids):
        bad.append("duplicate node id")
    if [node.index for node in net.nodes] != list(range(n)):
        bad.append("node indices not contiguous 0..N-1")

    membership = [0] * n
    for link in net.links:
        if not (0 <= link.a < n and 0 <= link.b < n):
            bad.append(f"link ({link.a}, {link.b}) references unknown node")
            continue
        if link.a == link.b:
            bad.append(f"link ({link.a}, {link.b}) joins a node to itself")
        if link.energy_chi <= 0 or link.energy_lambda <= 0:
            bad.append(f"link ({link.a}, {link.b}) has non-positive energy")
        membership[link.a] += 1
        if link.b != link.a:
            membership[link.b] += 1
    for i, count in enumerate(membership):
        label = ids[i] if i < len(ids) else str(i)
        if count == 0:
            bad.append(f"node {label} not in any link")
        elif count > 1:
            bad.append(f"node {label} in more than one link")

    for gate in net.gates:
        m = len(gate.support)
        if any(not 0 <= i < n for i in gate.support):
            bad.append(f"gate {gate.name} support references unknown node")
        if len(set(gate.support)) != m:
            bad.append(f"gate {gate.name} support has repeated nodes")
        if not gate.satisfying_rows:
            bad.append(f"gate {gate.name} has no satisfying rows")
        for row in sorted(gate.satisfying_rows):
            if len(row) != m:
                bad.append(f"gate {gate.name} row length mismatch: {row!r} on {m}-node support")
            elif set(row) - {"0", "1"}:
                bad.append(f"gate {gate.name} row {row!r} is not binary")
        if gate.delta_e <= 0:
            bad.append(f"gate {gate.name} has non-positive delta_e")

    seen = set()
    for c in net.constraints:
        if not 0 <= c.node < n:
            bad.append(f"constraint references unknown node {c.node}")
            continue
        if c.node in seen:
            bad.append(f"duplicate constraint on node {ids[c.node]}")
        seen.add(c.node)
        if c.value not in (0, 1):
            bad.append(f"constraint on node {ids[c.node]} has non-Boolean value")
        if c.delta_e <= 0:
            bad.append(f"constraint on node {ids[c.node]} has non-positive delta_e")
    return report


def as_bits(a, n: int | None = None) -> tuple[int, ...]:
    """Normalize an assignment given as bitstring, sequence, or basis index."""
    if isinstance(a, str):
        return tuple(int(ch) for ch in a)
    if isinstance(a, (int, np.integer)):
        if n is None:
            raise ValueError("basis index needs the node count")
        return tuple((int(a) >> (n - 1 - k)) & 1 for k in range(n))
    return tuple(int(b) for b in a)


def bitstring(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def basis_index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def _gate_satisfied(gate: Gate, bits: Sequence[int]) -> bool:
    return "".join(str(bits[i]) for i in gate.support) in gate.satisfying_rows


def classical_energy(net: Network, a) -> float:
    bits = as_bits(a, net.n)
    if len(bits) != net.n:
        raise ValueError(f"assignment has {len(bits)} bits, network has {net.n} nodes")
    energy = 0.0
    for gate in net.gates:
        if not _gate_satisfied(gate, bits):
            energy += gate.delta_e
    for c in net.constraints:
        if bits[c.node] != c.value:
            energy += c.delta_e
    for link in net.links:
        if bits[link.a] == bits[link.b]:
            energy += link.energy_chi
    return energy


def is_solution(net: Network, a) -> bool:
    return classical_energy(net, a) == 0.0


# -- vectorized views over the whole basis -------------------------------------------


def node_bits(indices: np.ndarray, n: int, node: int) -> np.ndarray:
    return (indices >> (n - 1 - node)) & 1


def local_patterns(indices: np.ndarray, n: int, support: Sequence[int]) -> np.ndarray:
    pat = np.zeros_like(indices)
    for node in support:
        pat = (pat << 1) | node_bits(indices, n, node)
    return pat


def element_energies(net: Network, indices: np.ndarray | None = None) -> np.ndarray:
    """Gate plus constraint energy of every basis index (links excluded)."""
    n = net.n
    if indices is None:
        indices = np.arange(2**n, dtype=np.int64)
    energy = np.zeros(indices.shape, dtype=float)
    for gate in net.elements():
        table = gate.row_table()
        energy += gate.delta_e * ~table[local_patterns(indices, n, gate.support)]
    return energy


def link_energies(net: Network, indices: np.ndarray | None = None) -> np.ndarray:
    n = net.n
    if indices is None:
        indices = np.arange(2**n, dtype=np.int64)
    energy = np.zeros(indices.shape, dtype=float)
    for link in net.links:
        same = node_bits(indices, n, link.a) == node_bits(indices, n, link.b)
        energy += link.energy_chi * same
    return energy


def energy_table(net: Network, indices: np.ndarray | None = None) -> np.ndarray:
    return element_energies(net, indices) + link_energies(net, indices)


def link_consistent_indices(net: Network) -> np.ndarray:
    """Basis indices satisfying every link, in increasing order.

    Built link by link so it never materializes the full ``2**N`` basis.
    """
    n = net.n
    idx = np.zeros(1, dtype=np.int64)
    for link in net.links:
        wa = np.int64(1) << (n - 1 - link.a)
        wb = np.int64(1) << (n - 1 - link.b)
        idx = np.concatenate([idx + wa, idx + wb])
    return np.sort(idx)


def enumerate_solutions(net: Network, limit: int | None = None) -> list[tuple[int, ...]]:
    """All zero-energy assignments in lexicographic order (brute force)."""
    n = net.n
    if n > MAX_ENUMERATION_NODES:
        raise SizeOverflow(f"{n} nodes exceeds enumeration limit {MAX_ENUMERATION_NODES}")
    out: list[tuple[int, ...]] = []
    chunk = 1 << 20
    for start in range(0, 2**n, chunk):
        idx = np.arange(start, min(start + chunk, 2**n), dtype=np.int64)
        hits = idx[energy_table(net, idx) == 0.0]
        for h in hits:
            out.append(as_bits(int(h), n))
            if limit is not None and len(out) >= limit:
                return out
    return out


def permute_network(net: Network, perm: Sequence[int]) -> Network:
    """Relabel node ``i`` as ``perm[i]``; used to check labelling invariance."""
    inv_nodes = sorted(((perm[node.index], node.id) for node in net.nodes))
    nodes = tuple(Node(nid, i) for i, nid in inv_nodes)
    links = tuple(Link(perm[l.a], perm[l.b], l.energy_chi, l.energy_lambda) for l in net.links)
    gates = tuple(
        Gate(g.name, tuple(perm[i] for i in g.support), g.satisfying_rows, g.delta_e)
        for g in net.gates
    )
    cons = tuple(BoundaryConstraint(perm[c.node], c.value, c.delta_e) for c in net.constraints)
    return Network(nodes, links, gates, cons)
