"""One-way (forward) propagation: factorized rotations, Zeno freeze, and a hopping annealer."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .config import BUDGET_EXHAUSTED, SOLVED, EngineConfig, RelaxationTrace, RunOutcome
from .hilbert import (
    AnnihilatedState,
    apply_projector,
    apply_single_qubit,
    basis_state,
    equilibrium_check,
    link_projector,
)
from .network import Network, as_bits, classical_energy, make_network, validate_network


def rotation_matrix(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class RotationStep:
    phi: float
    targets: tuple[int, ...]

    def __post_init__(self):
        if self.phi < 0:
            raise ValueError("rotation angle must be non-negative")
        if not 1 <= len(self.targets) <= 2 or len(set(self.targets)) != len(self.targets):
            raise ValueError("a rotation acts on one or two distinct nodes")

    def apply(self, state: np.ndarray) -> np.ndarray:
        for node in self.targets:
            state = apply_single_qubit(state, rotation_matrix(self.phi), node)
        return state


def rotate_factorized(state: np.ndarray, r_node: int, s_node: int, phi: float) -> np.ndarray:
    """R_r(phi) R_s(phi): the same 2x2 rotation on each qubit independently."""
    if r_node == s_node:
        raise ValueError("rotation nodes must differ")
    u = rotation_matrix(phi)
    return apply_single_qubit(apply_single_qubit(state, u, r_node), u, s_node)


def link_angle(pair: np.ndarray) -> float:
    """Signed theta of cos(theta)|01> + sin(theta)|10>, global phase removed."""
    a01, a10 = complex(pair[1]), complex(pair[2])
    ref = a01 if abs(a01) > 0 else a10
    ph = ref / abs(ref)
    return float(np.arctan2((a10 * ph.conjugate()).real, abs(a01)))


def zeno_iterate(
    theta: float,
    phi: float,
    n: int,
    net: Optional[Network] = None,
    r_node: int = 0,
    s_node: int = 1,
) -> tuple[np.ndarray, float]:
    """Apply [A_rs R_rs(phi/n)]^n to cos(theta)|01> + sin(theta)|10>.

    Returns the final state and its distance from the initial state. Nodes
    outside the (r, s) pair start in |0>.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if theta < 0 or phi < 0 or theta + phi > np.pi / 2 + 1e-15:
        raise ValueError("need theta, phi >= 0 and theta + phi <= pi/2")
    if net is None:
        net = make_network(["r", "s"], [("r", "s")])
    size = net.n
    initial = np.zeros(2**size, dtype=complex)
    w_r = 1 << (size - 1 - r_node)
    w_s = 1 << (size - 1 - s_node)
    initial[w_s] = np.cos(theta)
    initial[w_r] = np.sin(theta)
    proj = link_projector(r_node, s_node)
    step = RotationStep(phi / n, (r_node, s_node))
    state = initial
    for _ in range(n):
        state = apply_projector(proj, step.apply(state))
    return state, float(np.linalg.norm(state - initial))


def zeno_scan(theta: float, phi: float, ns) -> list[tuple[int, float, float]]:
    """Rows (n, deviation, n * |in-subspace angle drift|)."""
    rows = []
    for n in ns:
        final, dev = zeno_iterate(theta, phi, int(n))
        drift = abs(link_angle(final) - theta)
        rows.append((int(n), dev, int(n) * drift))
    return rows


# -- two-step single-qubit evolutions ---------------------------------------------------


def flip_rotation(angle: float, phase: float, anchor: int) -> np.ndarray:
    """Unitary taking |anchor> to cos(angle)|anchor> + e^{i phase} sin(angle)|1-anchor>."""
    c, s = np.cos(angle), np.sin(angle)
    e = np.exp(1j * phase)
    u = np.empty((2, 2), dtype=complex)
    u[anchor, anchor] = c
    u[1 - anchor, anchor] = e * s
    u[anchor, 1 - anchor] = -np.conj(e) * s
    u[1 - anchor, 1 - anchor] = c
    return u


def _anchor(qubit: np.ndarray) -> int:
    mags = np.abs(qubit) ** 2
    return int(mags[1] > mags[0])


def gate_relax_step(qubit: np.ndarray, delta_phi: float, rng: np.random.Generator, phase=None):
    """Independent gate relaxation of one qubit: |v> -> cos|v> + e^{i delta} sin|1-v>.

    ``v`` is the qubit's dominant basis value. Returns (state, delta).
    """
    qubit = np.asarray(qubit, dtype=complex)
    delta = rng.uniform(0, 2 * np.pi) if phase is None else float(phase)
    return flip_rotation(delta_phi, delta, _anchor(qubit)) @ qubit, delta


def bath_perturb_step(qubit: np.ndarray, rng: np.random.Generator, delta_theta=None, phase=None):
    """Heat-bath kick with random angle delta_theta ~ U[0, 2pi). Returns (state, delta_theta, delta')."""
    qubit = np.asarray(qubit, dtype=complex)
    if delta_theta is None:
        delta_theta = rng.uniform(0, 2 * np.pi)
    delta = rng.uniform(0, 2 * np.pi) if phase is None else float(phase)
    return flip_rotation(delta_theta, delta, _anchor(qubit)) @ qubit, float(delta_theta), delta


@dataclass
class PairStepRecord:
    delta_phi: float
    delta_theta: float
    delta: float
    delta_prime: float

    @property
    def delta_pp(self) -> float:
        return (self.delta + self.delta_prime) % (2 * np.pi)


def pair_step_one_way(
    state: np.ndarray,
    delta_phi: float,
    rng: np.random.Generator,
    *,
    bath: bool = True,
    delta_theta: Optional[float] = None,
    driven: int = 1,
):
    """Symmetrized product of a gate-relaxed qubit and a bath-perturbed partner.

    ``state`` is a two-qubit link pattern (|01> or |10>); ``driven`` selects
    which qubit (0 = r, 1 = s) its gate relaxes, the other one feels the bath.
    Returns the A_rs-projected, renormalized state and a :class:`PairStepRecord`.
    """
    state = np.asarray(state, dtype=complex)
    idx = int(np.argmax(np.abs(state)))
    if idx not in (1, 2) or not np.isclose(abs(state[idx]), 1.0):
        raise ValueError("one-way pair step starts from a link pattern |01> or |10>")
    bits = (idx >> 1, idx & 1)
    if not bath:
        delta_theta = 0.0
    q_d, delta = gate_relax_step(np.eye(2)[bits[driven]], delta_phi, rng)
    q_p, dtheta, delta_prime = bath_perturb_step(np.eye(2)[bits[1 - driven]], rng, delta_theta)
    pair = np.kron(q_d, q_p) if driven == 0 else np.kron(q_p, q_d)
    pair = pair * (state[idx] / abs(state[idx]))
    out = apply_projector(link_projector(0, 1), pair)
    nz = np.flatnonzero(out)
    if nz.size == 1:
        # a single surviving pattern is exact, not cos/|cos|
        out = np.zeros_like(out)
        out[nz[0]] = state[idx] / abs(state[idx])
    return out, PairStepRecord(delta_phi, dtheta, delta, delta_prime)


# -- relaxation law and the hopping annealer --------------------------------------------


def relaxation_probability(t, sigma: float):
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return 1.0 - np.exp(-sigma * np.asarray(t, dtype=float))


def gate_angle(sigma: float, dt: float) -> float:
    """Per-cycle rotation whose ground population sin^2 equals the relaxed fraction over dt."""
    return float(np.arcsin(np.sqrt(relaxation_probability(dt, sigma))))


def _violated(net: Network, bits) -> list:
    out = []
    for el in net.elements():
        row = "".join(str(bits[i]) for i in el.support)
        if row not in el.satisfying_rows:
            out.append(el)
    return out


def _driven_node(el, bits, rng) -> int:
    """Support node whose flip satisfies the element; uniform among candidates."""
    row = [bits[i] for i in el.support]
    good = []
    for k in range(len(row)):
        flipped = row.copy()
        flipped[k] ^= 1
        if "".join(map(str, flipped)) in el.satisfying_rows:
            good.append(el.support[k])
    pool = good or list(el.support)
    return int(pool[rng.integers(len(pool))])


def anneal_one_way(
    net: Network,
    cfg: EngineConfig,
    rng: np.random.Generator,
    initial=None,
    on_step: Optional[Callable[[int, np.ndarray], None]] = None,
):
    """Gate relaxation + link re-relaxation cycles.

    Each cycle one violated element relaxes by the per-cycle angle of the
    relaxation law, rotating one node of a link; the partner node receives a
    heat-bath kick. The link is then projected back onto its ground subspace
    and collapses to one pattern with Born probabilities. Without ``initial``
    the run starts from the pattern with every link in |0>_a |1>_b.
    """
    report = validate_network(net)
    if not report.ok:
        raise ValueError(str(report))
    n = net.n
    if initial is None:
        # every link starts in its |0>_a |1>_b pattern
        bits = [0] * n
        for link in net.links:
            bits[link.b] = 1
    else:
        bits = list(as_bits(initial, n))
    trace = RelaxationTrace()

    def snapshot(step):
        e = classical_energy(net, bits)
        links_e = sum(l.energy_chi for l in net.links if bits[l.a] == bits[l.b])
        trace.record(step, step * cfg.dt, e, e - links_e, False, float(e == 0.0))
        if on_step is not None:
            on_step(step, basis_state(bits))

    snapshot(0)
    for step in range(1, cfg.max_steps + 1):
        if classical_energy(net, bits) == 0.0 and (n > cfg.max_nodes or equilibrium_check(net, basis_state(bits))):
            return trace, RunOutcome(SOLVED, tuple(bits), step - 1, 0.0, half_solution_step=step - 1)
        violated = _violated(net, bits)
        el = violated[rng.integers(len(violated))]
        node = _driven_node(el, bits, rng)
        link = net.link_of(node)
        driven = 0 if node == link.a else 1
        pair = basis_state((bits[link.a], bits[link.b]))
        while True:
            try:
                pair, _ = pair_step_one_way(pair, gate_angle(cfg.sigma_for(el.name), cfg.dt), rng,
                                            bath=cfg.bath, driven=driven)
                break
            except AnnihilatedState:
                continue
        probs = np.abs(pair) ** 2
        choice = 1 if rng.random() < probs[1] / (probs[1] + probs[2]) else 2
        bits[link.a], bits[link.b] = choice >> 1, choice & 1
        snapshot(step)
    final = classical_energy(net, bits)
    if final == 0.0:
        return trace, RunOutcome(SOLVED, tuple(bits), cfg.max_steps, 0.0, half_solution_step=cfg.max_steps)
    return trace, RunOutcome(BUDGET_EXHAUSTED, tuple(bits), cfg.max_steps, final)
