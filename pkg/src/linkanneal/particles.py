"""Two labelled fermions on one link: spin (chi) and site (lambda) attributes.

Amplitudes live in spin (4) x site (4) = 16 dimensions, flat index
``8*chi1 + 4*chi2 + 2*lam1 + lam2`` with site ``r`` = 0 and ``s`` = 1.
Qubit states of the link are the two-qubit vectors of :mod:`hilbert`,
ordered ``|chi_r chi_s>`` = 00, 01, 10, 11. Phase convention delta = 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .hilbert import ANNIHILATION_TOL, AnnihilatedState
from .network import DEFAULT_E_CHI, DEFAULT_E_LAMBDA

R, S = 0, 1


class NotMappable(ValueError):
    """Particle state has weight outside the qubit-representable span."""


def _idx(chi1: int, chi2: int, lam1: int, lam2: int) -> int:
    return 8 * chi1 + 4 * chi2 + 2 * lam1 + lam2


def _ket(*terms) -> np.ndarray:
    v = np.zeros(16, dtype=complex)
    for coeff, labels in terms:
        v[_idx(*labels)] += coeff
    return v


_SWAP = np.zeros((16, 16))
for _c1, _c2, _l1, _l2 in product((0, 1), repeat=4):
    _SWAP[_idx(_c2, _c1, _l2, _l1), _idx(_c1, _c2, _l1, _l2)] = 1.0


def swap_particles(v: np.ndarray) -> np.ndarray:
    return _SWAP @ v


def link_hamiltonian(e_chi: float = DEFAULT_E_CHI, e_lambda: float = DEFAULT_E_LAMBDA):
    """(H_chi, H_lambda) as 16x16 matrices.

    H_lambda penalizes double occupancy of a site (rr, ss); H_chi penalizes
    parallel spins (00, 11). They commute.
    """
    h_chi = np.zeros((16, 16))
    h_lam = np.zeros((16, 16))
    for c1, c2, l1, l2 in product((0, 1), repeat=4):
        i = _idx(c1, c2, l1, l2)
        if c1 == c2:
            h_chi[i, i] = e_chi
        if l1 == l2:
            h_lam[i, i] = e_lambda
    return h_chi, h_lam


@dataclass
class ParticleLinkState:
    amplitudes: np.ndarray
    e_chi: float = DEFAULT_E_CHI
    e_lambda: float = DEFAULT_E_LAMBDA

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(16)

    def normalized(self) -> "ParticleLinkState":
        norm = np.linalg.norm(self.amplitudes)
        return ParticleLinkState(self.amplitudes / norm, self.e_chi, self.e_lambda)


def slater(chi_r: int, chi_s: int) -> np.ndarray:
    """Antisymmetrized state with spin chi_r at site r and chi_s at site s."""
    return _ket((1, (chi_r, chi_s, R, S)), (-1, (chi_s, chi_r, S, R))) / np.sqrt(2)


def symmetric_pair(chi_r: int, chi_s: int) -> np.ndarray:
    return _ket((1, (chi_r, chi_s, R, S)), (1, (chi_s, chi_r, S, R))) / np.sqrt(2)


def psi_prime() -> np.ndarray:
    return slater(0, 1)


def psi_double_prime() -> np.ndarray:
    return slater(1, 0)


def psi_mp(sign: int) -> np.ndarray:
    """Singlet (sign=-1) or antiparallel triplet (sign=+1) link ground state.

    Built from the spin x site product form, not from psi' and psi''.
    """
    spin = np.zeros(4, dtype=complex)
    spin[0b01] = 1
    spin[0b10] = sign
    site = np.zeros(4, dtype=complex)
    site[0b01] = 1
    site[0b10] = -sign
    return np.kron(spin, site) / 2


def zero_eigenstates_of_h_lambda() -> list[np.ndarray]:
    """The four antisymmetric states annihilated by H_lambda (before the H_chi lift)."""
    anti_site = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    sym_site = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
    up_up = np.array([0, 0, 0, 1], dtype=complex)
    down_down = np.array([1, 0, 0, 0], dtype=complex)
    sym_spin = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
    anti_spin = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    return [
        np.kron(down_down, anti_site),
        np.kron(up_up, anti_site),
        np.kron(sym_spin, anti_site),
        np.kron(anti_spin, sym_site),
    ]


def build_link_ground_basis(
    e_chi: float = DEFAULT_E_CHI, e_lambda: float = DEFAULT_E_LAMBDA, tol: float = 1e-12
) -> list[ParticleLinkState]:
    if e_chi <= 0 or e_lambda <= 0:
        raise ValueError("link energies must be positive")
    h_chi, h_lam = link_hamiltonian(e_chi, e_lambda)
    for v in zero_eigenstates_of_h_lambda():
        if np.linalg.norm(h_lam @ v) > tol:
            raise AssertionError("listed state is not a zero eigenstate of H_lambda")
        if np.linalg.norm(swap_particles(v) + v) > tol:
            raise AssertionError("listed state is not antisymmetric")
    lifted = [np.vdot(v, h_chi @ v).real for v in zero_eigenstates_of_h_lambda()]
    if not np.allclose(lifted, [e_chi, e_chi, 0.0, 0.0], atol=tol):
        raise AssertionError(f"H_chi lift gave {lifted}")
    return [ParticleLinkState(psi_mp(-1), e_chi, e_lambda), ParticleLinkState(psi_mp(+1), e_chi, e_lambda)]


def antisymmetrize_particles(p: ParticleLinkState) -> ParticleLinkState:
    """A_12 = (1 - P_12)/2 followed by renormalization."""
    anti = (p.amplitudes - swap_particles(p.amplitudes)) / 2
    norm = np.linalg.norm(anti)
    if norm < ANNIHILATION_TOL:
        raise AnnihilatedState("state has no antisymmetric component")
    return ParticleLinkState(anti / norm, p.e_chi, p.e_lambda)


def link_energy_expect(p: ParticleLinkState) -> float:
    h_chi, h_lam = link_hamiltonian(p.e_chi, p.e_lambda)
    v = p.amplitudes / np.linalg.norm(p.amplitudes)
    return float(np.vdot(v, (h_chi + h_lam) @ v).real)


def embed_qubit_state(q: np.ndarray, e_chi: float = DEFAULT_E_CHI, e_lambda: float = DEFAULT_E_LAMBDA):
    """Qubit-representation link state -> antisymmetric particle state.

    |01> -> psi', |10> -> psi'', |00>/|11> -> the E_chi-excited antisymmetric states.
    """
    q = np.asarray(q, dtype=complex).reshape(4)
    v = sum(q[2 * cr + cs] * slater(cr, cs) for cr, cs in product((0, 1), repeat=2))
    return ParticleLinkState(v, e_chi, e_lambda)


def map_particle_to_qubit(p: ParticleLinkState, tol: float = 1e-12) -> np.ndarray:
    """Particle state -> two-qubit vector over (r, s).

    Mappable span: the four Slater states plus the symmetric parallel-spin
    ("bad") products, which share qubit labels |00>, |11> with the excited
    antisymmetric states.
    """
    v = p.amplitudes
    anti = (v - swap_particles(v)) / 2
    sym = (v + swap_particles(v)) / 2
    q = np.zeros(4, dtype=complex)
    captured = np.zeros(16, dtype=complex)
    for cr, cs in product((0, 1), repeat=2):
        a = np.vdot(slater(cr, cs), anti)
        captured += a * slater(cr, cs)
        b = 0.0
        if cr == cs:
            b = np.vdot(symmetric_pair(cr, cs), sym)
            captured += b * symmetric_pair(cr, cs)
        if abs(a) > tol and abs(b) > tol:
            raise NotMappable(f"pattern {cr}{cs} mixes symmetric and antisymmetric parts")
        q[2 * cr + cs] = a + b
    if np.linalg.norm(v - captured) > tol * max(1.0, np.linalg.norm(v)):
        raise NotMappable("state has weight outside the one-particle-per-site span")
    return q
