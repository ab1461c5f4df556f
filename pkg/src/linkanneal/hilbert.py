"""Dense state vectors over the qubit basis of a network, and pattern projectors.

State vectors are plain complex ``numpy`` arrays of length ``2**N`` using the
big-endian node order of :mod:`linkanneal.network`. Every projector here is a
pattern projector: diagonal in the computational basis, keeping the basis
states whose support-local bit pattern is accepted.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .network import Network, as_bits, basis_index, local_patterns

NORM_TOL = 1e-12
ANNIHILATION_TOL = 1e-14
HERMITIAN_TOL = 1e-10


class AnnihilatedState(ArithmeticError):
    """A projection left (numerically) nothing to renormalize."""


@dataclass(frozen=True)
class ProjectorSpec:
    kind: str  # "link" (antisymmetry A_rs) or "gate" (ground-state projector)
    support: tuple[int, ...]
    accepted: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "accepted", frozenset(self.accepted))
        if self.kind not in ("link", "gate"):
            raise ValueError(f"unknown projector kind {self.kind!r}")
        if self.kind == "link" and self.accepted != {"01", "10"}:
            raise ValueError("link antisymmetry projector accepts exactly {01, 10}")
        if not self.accepted:
            raise ValueError("projector accepts no pattern")


def link_projector(a: int, b: int) -> ProjectorSpec:
    return ProjectorSpec("link", (a, b), frozenset({"01", "10"}))


def network_link_projectors(net: Network) -> list[ProjectorSpec]:
    return [link_projector(l.a, l.b) for l in net.links]


def network_gate_projectors(net: Network) -> list[ProjectorSpec]:
    return [ProjectorSpec("gate", g.support, g.satisfying_rows) for g in net.elements()]


@lru_cache(maxsize=256)
def _mask(spec: ProjectorSpec, n: int) -> np.ndarray:
    m = len(spec.support)
    table = np.zeros(2**m, dtype=bool)
    for row in spec.accepted:
        table[int(row, 2) if m else 0] = True
    idx = np.arange(2**n, dtype=np.int64)
    mask = table[local_patterns(idx, n, spec.support)]
    mask.setflags(write=False)
    return mask


def projector_mask(spec: ProjectorSpec, n: int) -> np.ndarray:
    return _mask(spec, n)


def combined_mask(specs: Iterable[ProjectorSpec], n: int) -> np.ndarray:
    mask = np.ones(2**n, dtype=bool)
    for spec in specs:
        mask &= _mask(spec, n)
    return mask


def num_qubits(state: np.ndarray) -> int:
    n = int(np.log2(state.size))
    if 2**n != state.size:
        raise ValueError(f"state length {state.size} is not a power of two")
    return n


def normalize(state: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(state)
    if norm < ANNIHILATION_TOL:
        raise AnnihilatedState(f"norm {norm:.3e} below {ANNIHILATION_TOL}")
    return state / norm


def basis_state(bits, n: int | None = None) -> np.ndarray:
    bits = as_bits(bits, n)
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[basis_index(bits)] = 1.0
    return psi


def uniform_state(n: int) -> np.ndarray:
    return np.full(2**n, 2 ** (-n / 2), dtype=complex)


def link_state(theta: float) -> np.ndarray:
    """cos(theta)|01> + sin(theta)|10> on a single link."""
    return np.array([0.0, np.cos(theta), np.sin(theta), 0.0], dtype=complex)


def _project(masks: Iterable[np.ndarray], state: np.ndarray) -> np.ndarray:
    out = np.array(state, dtype=complex, copy=True)
    for mask in masks:
        out[~mask] = 0.0
    return normalize(out)


def apply_projector(p: ProjectorSpec, state: np.ndarray) -> np.ndarray:
    n = num_qubits(state)
    if any(not 0 <= i < n for i in p.support):
        raise ValueError("projector support outside the state")
    return _project([_mask(p, n)], state)


def apply_all_links(net: Network, state: np.ndarray) -> np.ndarray:
    """Tilde-A: product of every link antisymmetry projector, one renormalization."""
    return _project([_mask(p, net.n) for p in network_link_projectors(net)], state)


def apply_all_gates(net: Network, state: np.ndarray) -> np.ndarray:
    """P: product of every gate and boundary-constraint ground projector."""
    return _project([_mask(p, net.n) for p in network_gate_projectors(net)], state)


def equilibrium_check(net: Network, state: np.ndarray, tol: float = 1e-8) -> bool:
    try:
        projected = apply_all_links(net, apply_all_gates(net, state))
    except AnnihilatedState:
        return False
    return float(np.linalg.norm(projected - state)) <= tol


def apply_single_qubit(state: np.ndarray, u: np.ndarray, node: int) -> np.ndarray:
    n = num_qubits(state)
    psi = np.moveaxis(state.reshape((2,) * n), node, 0)
    psi = np.tensordot(u, psi, axes=([1], [0]))
    return np.moveaxis(psi, 0, node).reshape(-1)


def partial_trace(state: np.ndarray, node: int) -> np.ndarray:
    """Reduced density matrix of one qubit (all other qubits traced out)."""
    n = num_qubits(state)
    psi = np.moveaxis(np.asarray(state).reshape((2,) * n), node, 0).reshape(2, -1)
    return psi @ psi.conj().T


def is_density(rho: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    if not np.allclose(rho, rho.conj().T, atol=tol):
        return False
    if abs(np.trace(rho) - 1.0) > NORM_TOL * 10:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -tol)


def random_phase_average(
    family: Callable[[np.ndarray], np.ndarray],
    samples: int,
    rng: np.random.Generator,
    return_stderr: bool = False,
):
    """Monte Carlo mean of |psi(delta)><psi(delta)| with delta ~ U[0, 2pi).

    ``family`` maps an array of phases of shape ``(M,)`` to states of shape
    ``(M, d)``.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    deltas = rng.uniform(0.0, 2 * np.pi, size=samples)
    psis = np.asarray(family(deltas))
    outer = psis[:, :, None] * psis[:, None, :].conj()
    rho = outer.mean(axis=0)
    if not return_stderr:
        return rho
    if samples == 1:
        return rho, np.zeros_like(rho, dtype=float)
    stderr = np.sqrt(outer.real.var(axis=0, ddof=1) + outer.imag.var(axis=0, ddof=1))
    return rho, stderr / np.sqrt(samples)


def measure_assignment(state: np.ndarray, rng: np.random.Generator) -> tuple[int, ...]:
    """Born-rule sample of a computational basis state."""
    n = num_qubits(state)
    probs = np.abs(state) ** 2
    probs = probs / probs.sum()
    return as_bits(int(rng.choice(probs.size, p=probs)), n)


def solution_overlap(net: Network, state: np.ndarray) -> float:
    """Total probability on zero-energy (solution) basis states."""
    mask = combined_mask(network_link_projectors(net) + network_gate_projectors(net), net.n)
    return float(np.sum(np.abs(state[mask]) ** 2))
