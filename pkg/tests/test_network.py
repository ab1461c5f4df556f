import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from linkanneal.network import (
    BoundaryConstraint,
    Gate,
    Link,
    Network,
    Node,
    SizeOverflow,
    as_bits,
    basis_index,
    bitstring,
    classical_energy,
    energy_table,
    enumerate_solutions,
    is_solution,
    link_consistent_indices,
    make_network,
    permute_network,
    validate_network,
)


def test_minimal_net_is_valid(link_only):
    assert validate_network(link_only).ok


def test_unpaired_node_reported():
    net = make_network(["r", "s", "t"], [("r", "s")])
    report = validate_network(net)
    assert not report.ok
    assert any("not in any link" in v for v in report.violations)


def test_row_length_mismatch_reported():
    gate = Gate("g", (0, 1, 2), frozenset({"01"}))
    net = Network((Node("a", 0), Node("b", 1), Node("c", 2), Node("d", 3)),
                  (Link(0, 1), Link(2, 3)), (gate,), ())
    assert any("row length mismatch" in v for v in validate_network(net).violations)


def test_duplicate_constraint_reported():
    net = Network((Node("r", 0), Node("s", 1)), (Link(0, 1),), (),
                  (BoundaryConstraint(0, 1), BoundaryConstraint(0, 0)))
    assert any("duplicate constraint" in v for v in validate_network(net).violations)


def test_node_in_two_links_reported():
    net = Network((Node("a", 0), Node("b", 1), Node("c", 2)), (Link(0, 1), Link(1, 2)), (), ())
    assert not validate_network(net).ok


@pytest.mark.parametrize("bad", [dict(energy_chi=0.0), dict(energy_lambda=-1.0)])
def test_link_energies_positive(bad):
    net = Network((Node("r", 0), Node("s", 1)), (Link(0, 1, **bad),), (), ())
    assert any("non-positive energy" in v for v in validate_network(net).violations)


@pytest.mark.parametrize(
    "gate, message",
    [
        (Gate("g", (0, 0), frozenset({"01"})), "repeated nodes"),
        (Gate("g", (0, 1), frozenset()), "no satisfying rows"),
        (Gate("g", (0, 1), frozenset({"01"}), delta_e=0.0), "non-positive delta_e"),
    ],
)
def test_gate_invariants(gate, message):
    net = Network((Node("r", 0), Node("s", 1)), (Link(0, 1),), (gate,), ())
    assert any(message in v for v in validate_network(net).violations)


def test_classical_energy_examples(link_only):
    assert classical_energy(link_only, (0, 1)) == 0.0
    heavy = make_network(["r", "s"], [("r", "s", 2.0)])
    assert classical_energy(heavy, (1, 1)) == 2.0
    fixed = make_network(["r", "s"], [("r", "s")], fixes=[("r", 1)])
    assert classical_energy(fixed, (0, 1)) == 1.0


def test_is_solution_examples(link_only):
    heavy = make_network(["r", "s"], [("r", "s", 2.0)])
    fixed = make_network(["r", "s"], [("r", "s")], fixes=[("r", 1)])
    assert is_solution(link_only, (0, 1))
    assert not is_solution(heavy, (1, 1))
    assert not is_solution(fixed, (0, 1))


def test_enumerate_examples(link_only, fixnet, contradiction):
    assert enumerate_solutions(link_only) == [(0, 1), (1, 0)]
    assert enumerate_solutions(fixnet) == [(1, 0)]
    assert enumerate_solutions(contradiction) == []


def test_enumerate_limit_and_overflow():
    ids = [f"n{i}" for i in range(26)]
    big = make_network(ids, [(ids[i], ids[i + 1]) for i in range(0, 26, 2)])
    with pytest.raises(SizeOverflow):
        enumerate_solutions(big)
    small = make_network(ids[:8], [(ids[i], ids[i + 1]) for i in range(0, 8, 2)])
    assert len(enumerate_solutions(small)) == 16
    assert enumerate_solutions(small, limit=3) == enumerate_solutions(small)[:3]


def test_basis_convention():
    # node 0 is the most significant bit
    assert basis_index((1, 0)) == 2
    assert as_bits(2, 2) == (1, 0)
    assert bitstring((1, 0, 1)) == "101"


@st.composite
def random_nets(draw, max_pairs=4):
    pairs = draw(st.integers(1, max_pairs))
    n = 2 * pairs
    perm = draw(st.permutations(range(n)))
    links = [Link(perm[2 * i], perm[2 * i + 1], draw(st.sampled_from([1.0, 8.0]))) for i in range(pairs)]
    gates = []
    for g in range(draw(st.integers(0, 3))):
        k = draw(st.integers(1, min(3, n)))
        support = tuple(draw(st.permutations(range(n)))[:k])
        rows = draw(st.sets(st.sampled_from(["".join(r) for r in itertools.product("01", repeat=k)]), min_size=1))
        gates.append(Gate(f"g{g}", support, frozenset(rows), draw(st.sampled_from([1.0, 2.0]))))
    fixed = draw(st.sets(st.integers(0, n - 1), max_size=2))
    cons = [BoundaryConstraint(i, draw(st.integers(0, 1))) for i in sorted(fixed)]
    return Network(tuple(Node(f"n{i}", i) for i in range(n)), tuple(links), tuple(gates), tuple(cons))


@given(random_nets())
def test_partition_property(net):
    assert validate_network(net).ok
    assert 2 * len(net.links) == net.n


@given(random_nets())
def test_zero_energy_iff_enumerated(net):
    sols = set(enumerate_solutions(net))
    for idx in range(2**net.n):
        bits = as_bits(idx, net.n)
        assert (classical_energy(net, bits) == 0.0) == (bits in sols)


@given(random_nets(), st.data())
def test_energy_invariant_under_relabeling(net, data):
    perm = data.draw(st.permutations(range(net.n)))
    moved = permute_network(net, perm)
    for idx in range(2**net.n):
        bits = as_bits(idx, net.n)
        new_bits = [0] * net.n
        for old, b in enumerate(bits):
            new_bits[perm[old]] = b
        assert classical_energy(moved, new_bits) == classical_energy(net, bits)


@given(random_nets())
def test_vectorized_energy_matches_scalar(net):
    table = energy_table(net)
    for idx in range(2**net.n):
        assert table[idx] == pytest.approx(classical_energy(net, as_bits(idx, net.n)))


@given(random_nets())
def test_link_consistent_indices(net):
    expected = [i for i in range(2**net.n)
                if all(as_bits(i, net.n)[l.a] != as_bits(i, net.n)[l.b] for l in net.links)]
    assert list(link_consistent_indices(net)) == expected
    assert len(expected) == 2 ** len(net.links)


def test_elements_include_constraints(fixnet):
    names = [el.name for el in fixnet.elements()]
    assert names == ["fix:r", "fix:s"]
    assert np.all([len(el.support) == 1 for el in fixnet.elements()])
