import numpy as np
import pytest

from linkanneal.classical import anneal
from linkanneal.config import BUDGET_EXHAUSTED, SOLVED, EngineConfig
from linkanneal.hilbert import apply_projector, basis_state, link_projector, link_state
from linkanneal.netlang import compile_cnf, parse_dimacs
from linkanneal.network import classical_energy
from linkanneal.oneway import (
    RotationStep,
    anneal_one_way,
    bath_perturb_step,
    gate_angle,
    gate_relax_step,
    link_angle,
    pair_step_one_way,
    relaxation_probability,
    rotate_factorized,
    zeno_iterate,
    zeno_scan,
)


def oracle_step(psi, eps):
    """Exact 4x4 arithmetic: kron of 2x2 rotations, zero 00/11, renormalize."""
    c, s = np.cos(eps), np.sin(eps)
    r = np.array([[c, -s], [s, c]])
    out = np.kron(r, r) @ psi
    out[[0, 3]] = 0
    return out / np.linalg.norm(out)


def test_rotation_step_invariants():
    with pytest.raises(ValueError):
        RotationStep(-0.1, (0,))
    with pytest.raises(ValueError):
        RotationStep(0.1, (0, 0))


def test_rotate_identity_at_zero(rng):
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert np.allclose(rotate_factorized(psi, 0, 1, 0.0), psi)


def test_rotation_leaks_out_of_link_subspace():
    out = rotate_factorized(link_state(0.0), 0, 1, np.pi / 2)
    # |01> -> R|0> (x) R|1> = (|1>)(-|0>)
    assert np.allclose(out, [0, 0, -1, 0])
    small = rotate_factorized(link_state(0.0), 0, 1, 0.3)
    assert abs(small[0]) > 0 and abs(small[3]) > 0


def test_rotation_preserves_norm(rng):
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    assert np.linalg.norm(rotate_factorized(psi, 0, 2, 1.234)) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("eps", [1e-3, 1e-2, 0.05])
def test_diagonal_element_small_angle(eps):
    assert rotate_factorized(link_state(0.0), 0, 1, eps)[1].real == pytest.approx(np.cos(eps) ** 2)


def test_zeno_single_step_matches_oracle():
    final, dev = zeno_iterate(0.0, np.pi / 4, 1)
    expected = oracle_step(link_state(0.0).real, np.pi / 4)
    assert np.allclose(final, expected, atol=1e-14)
    assert dev == pytest.approx(np.linalg.norm(expected - link_state(0.0)))


@pytest.mark.parametrize("n", [3, 40, 500])
def test_zeno_iterate_matches_oracle(n):
    psi = link_state(0.2).real
    for _ in range(n):
        psi = oracle_step(psi, 0.5 / n)
    final, _ = zeno_iterate(0.2, 0.5, n)
    assert np.allclose(final, psi, atol=1e-12)


def test_zeno_zero_angle():
    for n in (1, 10, 1000):
        assert zeno_iterate(0.3, 0.0, n)[1] == 0.0


def test_zeno_large_n():
    rows = zeno_scan(0.0, np.pi / 4, [10_000])
    n, dev, scaled = rows[0]
    assert dev <= 1e-3
    assert scaled == pytest.approx((np.pi / 4) ** 2, rel=0.05)


def test_zeno_scaling_halves():
    rows = zeno_scan(0.0, np.pi / 4, [1000, 2000])
    assert rows[1][1] == pytest.approx(rows[0][1] / 2, rel=0.1)


def test_zeno_deviation_nonincreasing():
    devs = [dev for _, dev, _ in zeno_scan(0.1, 0.6, [1, 2, 5, 10, 100, 1000])]
    assert all(b <= a for a, b in zip(devs, devs[1:]))


def test_zeno_domain():
    with pytest.raises(ValueError):
        zeno_iterate(1.0, 1.0, 5)
    with pytest.raises(ValueError):
        zeno_iterate(0.0, 0.1, 0)


def test_gate_relax_step(rng):
    one = np.array([0, 1], dtype=complex)
    out, _ = gate_relax_step(one, 0.0, rng)
    assert np.allclose(out, one)
    out, delta = gate_relax_step(one, np.pi / 2, rng)
    assert np.allclose(out, [np.exp(1j * delta), 0])


def test_bath_step_draws_uniform_angle():
    rng = np.random.default_rng(1)
    angles = [bath_perturb_step(np.array([1, 0]), rng)[1] for _ in range(4000)]
    assert 0 <= min(angles) and max(angles) < 2 * np.pi
    assert np.mean(angles) == pytest.approx(np.pi, abs=0.1)


def test_pair_step_frozen_without_bath(rng):
    start = basis_state((0, 1))
    for dphi in (0.1, 0.7, 1.5):
        out, rec = pair_step_one_way(start, dphi, rng, bath=False)
        assert np.array_equal(out, start.astype(complex))
        assert rec.delta_theta == 0.0


def test_pair_step_equal_quarter_angles(rng):
    out, rec = pair_step_one_way(basis_state((0, 1)), np.pi / 4, rng, delta_theta=np.pi / 4)
    expected = np.array([0, 1, np.exp(1j * rec.delta_pp), 0]) / np.sqrt(2)
    assert abs(abs(np.vdot(out, expected)) - 1) < 1e-12
    assert abs(out[1]) == pytest.approx(abs(out[2]))


def test_pair_step_endpoints(rng):
    out, _ = pair_step_one_way(basis_state((0, 1)), np.pi / 2, rng, delta_theta=np.pi / 2)
    assert abs(out[2]) == pytest.approx(1.0)


def test_pair_step_matches_product_form(rng):
    for _ in range(20):
        dphi, dth = rng.uniform(0, np.pi / 2, size=2)
        out, rec = pair_step_one_way(basis_state((0, 1)), dphi, rng, delta_theta=dth)
        raw = np.array([0, np.cos(dphi) * np.cos(dth), np.exp(1j * rec.delta_pp) * np.sin(dphi) * np.sin(dth), 0])
        raw /= np.linalg.norm(raw)
        assert abs(abs(np.vdot(raw, out)) - 1) < 1e-12


def test_pair_step_stays_antisymmetric(rng):
    for _ in range(20):
        out, _ = pair_step_one_way(basis_state((1, 0)), rng.uniform(0, 1.5), rng)
        assert np.allclose(apply_projector(link_projector(0, 1), out), out)


def test_relaxation_law():
    assert relaxation_probability(0.0, 2.0) == 0.0
    t = np.linspace(0, 50, 200)
    p = relaxation_probability(t, 0.7)
    assert np.all(np.diff(p) >= 0) and p[-1] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        relaxation_probability(1.0, 0.0)


def test_gate_angle_tracks_law():
    assert np.sin(gate_angle(1.3, 0.2)) ** 2 == pytest.approx(1 - np.exp(-0.26))


def test_link_angle_signed():
    assert link_angle(np.array([0, np.cos(0.3), -np.sin(0.3), 0])) == pytest.approx(-0.3)
    assert link_angle(1j * link_state(0.4)) == pytest.approx(0.4)


def test_anneal_fixnet_solves(fixnet, rng):
    trace, out = anneal_one_way(fixnet, EngineConfig(), rng)
    assert out.verdict == SOLVED and out.assignment == (1, 0)
    assert trace.column("total_energy")[0] == 2.0


def test_anneal_contradiction_exhausts(contradiction, rng):
    trace, out = anneal_one_way(contradiction, EngineConfig(max_steps=200), rng)
    assert out.verdict == BUDGET_EXHAUSTED and out.final_energy > 0


def test_anneal_frozen_without_bath(fixnet, rng):
    cfg = EngineConfig(bath=False, max_steps=500)
    seen = []
    trace, out = anneal_one_way(fixnet, cfg, rng, on_step=lambda k, s: seen.append(s))
    assert out.verdict == BUDGET_EXHAUSTED
    assert all(np.array_equal(s, seen[0]) for s in seen)
    assert out.assignment == (0, 1)


def test_anneal_cnf_solution_checked(rng):
    net = compile_cnf(parse_dimacs("p cnf 3 3\n1 2 0\n-1 3 0\n-2 -3 0\n"))
    _, out = anneal_one_way(net, EngineConfig(max_steps=5000), rng)
    assert out.verdict == SOLVED and classical_energy(net, out.assignment) == 0


def test_anneal_deterministic(fixnet):
    a, _ = anneal_one_way(fixnet, EngineConfig(), np.random.default_rng(7))
    b, _ = anneal_one_way(fixnet, EngineConfig(), np.random.default_rng(7))
    assert a.to_csv() == b.to_csv()


# hitting time counted in moves between link-consistent assignments, the unit both
# engines share; classical Metropolis needs an uphill intermediate per move


def _start(net):
    bits = [0] * net.n
    for link in net.links:
        bits[link.b] = 1
    return bits


def _classical_moves(net, seed):
    last, moves = [tuple(_start(net))], [0]

    def count(_, bits):
        if all(bits[l.a] != bits[l.b] for l in net.links) and tuple(bits) != last[0]:
            moves[0] += 1
            last[0] = tuple(bits)

    cfg = EngineConfig(restarts=1, max_iters=10**6)
    out, _ = anneal(net, cfg, np.random.default_rng(seed), initial=_start(net), on_step=count)
    assert out.verdict == SOLVED
    return moves[0]


def _oneway_moves(net, seed):
    last, moves = [None], [0]

    def count(_, psi):
        k = int(np.argmax(np.abs(psi)))
        moves[0] += last[0] is not None and k != last[0]
        last[0] = k

    _, out = anneal_one_way(net, EngineConfig(max_steps=10**5), np.random.default_rng(seed), on_step=count)
    assert out.verdict == SOLVED
    return moves[0]


CHAIN5 = "p cnf 5 5\n1 2 0\n-1 3 0\n-3 4 0\n-4 5 0\n-5 -2 0\n"


@pytest.mark.parametrize("net_src", ["fixnet", "p cnf 3 3\n1 2 0\n-1 3 0\n-2 -3 0\n"])
def test_hitting_moves_within_factor_two(net_src, request):
    net = request.getfixturevalue("fixnet") if net_src == "fixnet" else compile_cnf(parse_dimacs(net_src))
    c = np.median([_classical_moves(net, s) for s in range(200)])
    o = np.median([_oneway_moves(net, s) for s in range(200)])
    assert 0.5 <= max(o, 1) / max(c, 1) <= 2.0


def test_focused_relaxation_outpaces_metropolis_on_chain():
    # one-way only relaxes violated elements; Metropolis proposes anywhere, so
    # on this 10-node chain the factor-2 equivalence does not hold
    net = compile_cnf(parse_dimacs(CHAIN5))
    c = np.median([_classical_moves(net, s) for s in range(200)])
    o = np.median([_oneway_moves(net, s) for s in range(200)])
    assert o < c / 2
