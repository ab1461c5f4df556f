"""Two-way (retarded/advanced) propagation.

A reduction step maps the usual state ``before`` to the free normalized state
that satisfies a set of final conditions and has maximal overlap with
``before``. With only pattern projectors and a diagonal energy operator the
maximization runs over non-negative magnitudes on the accepted patterns
(phases are copied from ``before``), which is what :func:`tw_reduce` and
:func:`solve_density_conditions` exploit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize, nnls

from .config import BUDGET_EXHAUSTED, SOLVED, UNSAT_EVIDENCE, EngineConfig, RelaxationTrace, RunOutcome
from .hilbert import (
    ANNIHILATION_TOL,
    AnnihilatedState,
    ProjectorSpec,
    combined_mask,
    equilibrium_check,
    link_projector,
    link_state,
    measure_assignment,
    network_link_projectors,
    num_qubits,
    partial_trace,
)
from .network import Network, element_energies, is_solution, link_consistent_indices, validate_network
from .oneway import link_angle


class NoSolution(ValueError):
    """Final conditions cannot be met simultaneously."""


class DomainError(ValueError):
    """Energy-balance inputs put cos^2 of the root outside [0, 1]."""


@dataclass
class FinalConditions:
    required_projectors: list
    target_energy: float
    hamiltonian: np.ndarray  # diagonal energy operator over the full basis
    tolerance: float = 1e-8
    density_targets: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("energy tolerance must be positive")


@dataclass
class TwStepReport:
    before: np.ndarray
    after: np.ndarray
    overlap: float
    achieved_energy: float
    clamped: bool = False


def network_conditions(net: Network, target_energy: float, tolerance: Optional[float] = None) -> FinalConditions:
    """All links as required projectors, gate+constraint energy as the operator."""
    gaps = sum(el.delta_e for el in net.elements()) or 1.0
    return FinalConditions(
        network_link_projectors(net),
        target_energy,
        element_energies(net),
        tolerance if tolerance is not None else 1e-8 * gaps,
    )


# -- maximal overlap on a diagonal energy shell ---------------------------------------


def _resolvent_energy(w, g, m):
    r = w / (1.0 + m * g)
    r2 = r * r
    return float(np.dot(g, r2) / r2.sum()), r


def _resolvent_branch(w, h, target, snap):
    """Magnitudes w/(1 + m (h - h_min)) with m chosen to hit ``target``."""
    lo = h.min()
    g = h - lo
    G = g.max()
    goal = target - lo
    if G <= snap:
        return (w / np.linalg.norm(w)) if abs(goal) <= snap else None
    if goal < -snap or goal > G + snap:
        return None
    if abs(goal) <= snap:
        r = np.where(g <= snap, w, 0.0)
        return r / np.linalg.norm(r)
    if abs(goal - G) <= snap:
        r = np.where(g >= G - snap, w, 0.0)
        return r / np.linalg.norm(r)
    e0, _ = _resolvent_energy(w, g, 0.0)
    if abs(goal - e0) <= snap * 1e-3:
        return w / np.linalg.norm(w)
    if goal < e0:
        f = lambda u: _resolvent_energy(w, g, np.exp(u))[0] - goal
        lo_u, hi_u = -60.0, 0.0
        while f(hi_u) > 0:
            hi_u += 20.0
            if hi_u > 700:
                return None
        if f(lo_u) < 0:
            return None
        u = brentq(f, lo_u, hi_u, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        _, r = _resolvent_energy(w, g, np.exp(u))
    else:
        # approach the pole 1 + m G = 0 through denom_G = e^{-u}
        def energy_at(u):
            frac = g / G
            denom = (1.0 - frac) + frac * np.exp(-u)
            r = w / denom
            return float(np.dot(g, r * r) / np.dot(r, r)), r

        f = lambda u: energy_at(u)[0] - goal
        lo_u, hi_u = 1e-300, 1.0
        while f(hi_u) < 0:
            hi_u *= 2.0
            if hi_u > 1400:
                return None
        if f(lo_u) > 0:
            return None
        u = brentq(f, lo_u, hi_u, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        _, r = energy_at(u)
    return r / np.linalg.norm(r)


def max_overlap_magnitudes(w: np.ndarray, h: np.ndarray, target: float, snap: float):
    """Non-negative unit vector rho maximizing w.rho subject to sum h rho^2 = target.

    ``w`` are |before| amplitudes on the accepted patterns (unit norm). Every
    stationary point either keeps all weight on supp(w) (resolvent branch) or
    adds one absorbing energy level outside supp(w); the best candidate wins.
    """
    support = w > ANNIHILATION_TOL * 1e-2
    candidates = []
    r = _resolvent_branch(w[support], h[support], target, snap)
    if r is not None:
        rho = np.zeros_like(w)
        rho[support] = r
        candidates.append(rho)
    zero = ~support
    if zero.any():
        hk, wk = h[support], w[support]
        for level in np.unique(h[zero]):
            if hk.min() > level + snap or hk.max() < level - snap:
                u = wk / np.abs(hk - level)
                u /= np.linalg.norm(u)
                e_k = float(np.dot(hk, u * u))
                if abs(e_k - level) <= snap:
                    continue
                t = (e_k - target) / (e_k - level)
                if -snap <= t <= 1 + snap:
                    t = min(max(t, 0.0), 1.0)
                    at_level = zero & (np.abs(h - level) <= snap)
                    rho = np.zeros_like(w)
                    rho[support] = np.sqrt(1 - t) * u
                    rho[at_level] = np.sqrt(t / at_level.sum())
                    candidates.append(rho)
    if not candidates:
        raise NoSolution(f"no state on the accepted patterns has energy {target}")
    return max(candidates, key=lambda rho: float(np.dot(w, rho)))


def tw_reduce(before: np.ndarray, fc: FinalConditions) -> TwStepReport:
    n = num_qubits(before)
    before = np.asarray(before, dtype=complex)
    before = before / np.linalg.norm(before)
    mask = combined_mask(fc.required_projectors, n)
    b = before[mask]
    if np.linalg.norm(b) < ANNIHILATION_TOL:
        raise AnnihilatedState("before-state has no component satisfying the final conditions")
    h = np.asarray(fc.hamiltonian, dtype=float)[mask]
    target = float(fc.target_energy)
    clamped = False
    if target < h.min() - fc.tolerance:
        target, clamped = float(h.min()), True
    elif target > h.max() + fc.tolerance:
        target, clamped = float(h.max()), True
    target = min(max(target, float(h.min())), float(h.max()))
    w = np.abs(b) / np.linalg.norm(b)
    phases = np.where(np.abs(b) > 0, b / np.where(np.abs(b) > 0, np.abs(b), 1.0), 1.0)
    snap = 1e-13 * (float(np.abs(h).max()) + 1.0)
    rho = max_overlap_magnitudes(w, h, target, snap)
    after = np.zeros_like(before)
    after[mask] = rho * phases
    achieved = float(np.dot(h, rho * rho))
    if abs(achieved - target) > fc.tolerance:
        raise NoSolution(f"reached energy {achieved}, wanted {target}")
    return TwStepReport(before, after, float(abs(np.vdot(before, after))), achieved, clamped)


# -- density-driven link solver ---------------------------------------------------------


def solve_density_conditions(
    before: np.ndarray,
    projectors: Sequence[ProjectorSpec],
    density_targets: dict,
    tol: float = 1e-9,
) -> np.ndarray:
    """Free normalized state fixed by ``projectors`` with given one-qubit reduced densities,
    maximal overlap with ``before``.
    """
    n = num_qubits(before)
    mask = combined_mask(projectors, n)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise NoSolution("projectors accept no basis state")
    b = np.asarray(before, dtype=complex)[idx]

    # density rows first: they pin probabilities directly, which keeps
    # near-zero probabilities (and hence their square roots) exact
    rows, rhs = [], []
    for node, rho in density_targets.items():
        rho = np.asarray(rho, dtype=complex)
        bit = (idx >> (n - 1 - node)) & 1
        for v in (0, 1):
            rows.append((bit == v).astype(float))
            rhs.append(float(rho[v, v].real))
    rows.append(np.ones(idx.size))
    rhs.append(1.0)
    a = np.array(rows)
    t = np.array(rhs)

    keep = []
    for i in range(len(rows)):
        if np.linalg.matrix_rank(a[keep + [i]]) > len(keep):
            keep.append(i)
    if len(keep) == idx.size:
        p = np.linalg.solve(a[keep], t[keep])
    else:
        p0, _ = nnls(a, t)
        wts = np.abs(b)
        res = minimize(
            lambda p: -np.dot(wts, np.sqrt(np.clip(p, 0, None) + 1e-300)),
            p0,
            method="SLSQP",
            bounds=[(0, 1)] * idx.size,
            constraints=[{"type": "eq", "fun": lambda p: a @ p - t}],
            options={"ftol": 1e-14, "maxiter": 500},
        )
        p = res.x
    if np.linalg.norm(a @ p - t) > tol or p.min() < -tol:
        raise NoSolution("reduced-density targets are inconsistent with the projectors")
    mags = np.sqrt(np.clip(p, 0.0, None))
    phases = np.where(np.abs(b) > 0, b / np.where(np.abs(b) > 0, np.abs(b), 1.0), 1.0)
    out = np.zeros(2**n, dtype=complex)
    out[idx] = mags * phases
    out /= np.linalg.norm(out)
    for node, rho in density_targets.items():
        if np.abs(partial_trace(out, node) - np.asarray(rho)).max() > tol:
            raise NoSolution(f"reduced density of node {node} cannot be matched")
    return out


def link_density_targets(angle: float) -> dict:
    c2, s2 = np.cos(angle) ** 2, np.sin(angle) ** 2
    return {0: np.diag([c2, s2]).astype(complex), 1: np.diag([s2, c2]).astype(complex)}


def solve_link_system(theta: float, phi: float, conditions: Sequence[str] = ("r", "s")) -> np.ndarray:
    """Link state that never leaves the antisymmetric subspace while each qubit's
    density rotates by ``phi``; starting from cos(theta)|01> + sin(theta)|10>.
    """
    if theta < 0 or phi < 0 or theta + phi > np.pi / 2 + 1e-12:
        raise ValueError("need theta, phi >= 0 and theta + phi <= pi/2")
    targets = link_density_targets(theta + phi)
    chosen = {{"r": 0, "s": 1}[c]: targets[{"r": 0, "s": 1}[c]] for c in conditions}
    return solve_density_conditions(link_state(theta), [link_projector(0, 1)], chosen)


def single_link_energies(e_r: float, e_s: float) -> np.ndarray:
    """One-qubit gates diag(E_r, 0) on r and diag(0, E_s) on s over |00>,|01>,|10>,|11>."""
    return np.array([e_r, e_r + e_s, 0.0, e_s])


# -- energy balance ---------------------------------------------------------------------


def energy_balance_closed_form(e_s: float, e_r: float, delta_phi: float, delta_theta: float) -> float:
    total = e_s + 2 * e_r
    sin_part = e_s * np.sin(delta_phi) ** 2 + 2 * e_r * np.sin(delta_theta) ** 2
    cos_part = e_s * np.cos(delta_phi) ** 2 + 2 * e_r * np.cos(delta_theta) ** 2
    c2 = cos_part / total
    if not (-1e-15 <= c2 <= 1 + 1e-15) or sin_part < -1e-15 or cos_part < -1e-15:
        raise DomainError(f"cos^2 of the root would be {c2}")
    return float(np.arctan2(np.sqrt(max(sin_part, 0.0)), np.sqrt(max(cos_part, 0.0))))


def energy_balance_residual(x, e_s, e_r, delta_phi, delta_theta):
    """LHS - RHS of E_s cos^2 x + E_r cos 2x = E_s cos^2 dphi + E_r cos 2 dtheta."""
    return (e_s * np.cos(x) ** 2 + e_r * np.cos(2 * x)) - (
        e_s * np.cos(delta_phi) ** 2 + e_r * np.cos(2 * delta_theta)
    )


def energy_balance_root(e_s: float, e_r: float, delta_phi: float, delta_theta: float) -> float:
    """Unique root in [0, pi/2] by bisection.

    The residual is bisected in whichever of the equivalent forms
    ``T sin^2 x - A`` or ``B - T cos^2 x`` is well conditioned at the root.
    """
    if e_s <= 0:
        raise ValueError("E_s must be positive")
    if not 0 <= delta_phi <= np.pi / 2 + 1e-15:
        raise ValueError("delta_phi must lie in [0, pi/2]")
    if e_r == 0:
        # cos^2 x = cos^2 dphi has the single root dphi on [0, pi/2]
        return float(delta_phi)
    total = e_s + 2 * e_r
    a = e_s * np.sin(delta_phi) ** 2 + 2 * e_r * np.sin(delta_theta) ** 2
    b = e_s * np.cos(delta_phi) ** 2 + 2 * e_r * np.cos(delta_theta) ** 2
    if total <= 0 or a < 0 or b < 0 or a > total * (1 + 1e-15):
        raise DomainError(f"cos^2 of the root would be {b / total if total else float('nan')}")
    if a <= total / 2:
        g = lambda x: total * np.sin(x) ** 2 - a
    else:
        g = lambda x: b - total * np.cos(x) ** 2
    lo, hi = 0.0, np.pi / 2
    if g(lo) >= 0:
        return lo
    if g(hi) <= 0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pair_step_two_way(
    state: np.ndarray,
    delta_phi: float,
    rng: np.random.Generator,
    *,
    e_s: float = 1.0,
    e_r: float = 0.1,
    pure_rotation: bool = False,
    delta_theta: Optional[float] = None,
):
    """Gate relaxation on s plus bath on r under two-way reduction.

    The link angle advances by the energy-balance root; ``pure_rotation``
    fixes delta'' = 0. Returns (state, TwStepReport).
    """
    state = np.asarray(state, dtype=complex)
    if abs(state[0]) ** 2 + abs(state[3]) ** 2 > 1e-20:
        raise ValueError("two-way pair step needs a state satisfying A_rs")
    if delta_theta is None:
        delta_theta = rng.uniform(0, 2 * np.pi)
    dphi_prime = energy_balance_root(e_s, e_r, delta_phi, delta_theta)
    angle = min(link_angle(state) + dphi_prime, np.pi / 2)
    delta_pp = 0.0 if pure_rotation else rng.uniform(0, 2 * np.pi)
    ref = state[1] if abs(state[1]) > 0 else state[2]
    glob = ref / abs(ref)
    after = glob * np.array([0.0, np.cos(angle), np.exp(1j * delta_pp) * np.sin(angle), 0.0])
    energy = e_s * np.cos(angle) ** 2 + e_r * np.cos(2 * angle)
    report = TwStepReport(state, after, float(abs(np.vdot(state, after))), float(energy), False)
    return after, report


# -- network relaxation -----------------------------------------------------------------


def relax_two_way(net: Network, cfg: EngineConfig, rng: np.random.Generator, on_step=None):
    """Frustration-free relaxation: every element's energy decays independently,
    the network state follows by two-way reduction inside the link subspace.
    """
    report = validate_network(net)
    if not report.ok:
        raise ValueError(str(report))
    n = net.n
    if n > cfg.max_nodes:
        raise ValueError(f"{n} nodes exceeds the state-vector limit {cfg.max_nodes}")
    elements = net.elements()
    sub = link_consistent_indices(net)
    per_element = np.array([element_energies(Network(net.nodes, (), (el,), ()), sub) for el in elements]) \
        if elements else np.zeros((0, sub.size))
    h = per_element.sum(axis=0) if elements else np.zeros(sub.size)
    sigmas = np.array([cfg.sigma_for(el.name) for el in elements])
    floor = float(h.min())
    tol = cfg.energy_tol_rel * (sum(el.delta_e for el in elements) or 1.0)
    snap = 1e-13 * (float(np.abs(h).max()) + 1.0)
    solution = h == 0.0

    amp = np.full(sub.size, 1 / np.sqrt(sub.size), dtype=complex)
    if np.linalg.norm(amp) < ANNIHILATION_TOL:
        raise AnnihilatedState("link constraints are contradictory")
    start = per_element @ (np.abs(amp) ** 2) if elements else np.zeros(0)

    def full(a):
        psi = np.zeros(2**n, dtype=complex)
        psi[sub] = a
        return psi

    trace = RelaxationTrace()
    half = None
    streak = 0

    def log(step, energy, clamped):
        nonlocal half
        overlap = float(np.sum(np.abs(amp[solution]) ** 2))
        if half is None and overlap >= 0.5 - 1e-12:
            half = step
        trace.record(step, step * cfg.dt, energy, energy, clamped, overlap)
        if on_step is not None:
            on_step(step, full(amp))

    energy = float(np.dot(h, np.abs(amp) ** 2))
    log(0, energy, False)
    for step in range(0, cfg.max_steps + 1):
        psi = full(amp)
        if equilibrium_check(net, psi, cfg.equilibrium_tol):
            bits = measure_assignment(psi, rng)
            while not is_solution(net, bits):
                bits = measure_assignment(psi, rng)
            return trace, RunOutcome(SOLVED, bits, step, energy, floor, half)
        if streak >= cfg.plateau_steps and floor > 0:
            return trace, RunOutcome(UNSAT_EVIDENCE, None, step, energy, floor, half)
        if step == cfg.max_steps:
            break
        t = (step + 1) * cfg.dt
        target = float(np.dot(start, np.exp(-sigmas * t)))
        clamped = target < floor - tol
        goal = min(max(target, floor), float(h.max()))
        w = np.abs(amp)
        w = w / np.linalg.norm(w)
        phases = np.where(np.abs(amp) > 0, amp / np.where(np.abs(amp) > 0, np.abs(amp), 1.0), 1.0)
        rho = max_overlap_magnitudes(w, h, goal, snap)
        amp = rho * phases
        energy = float(np.dot(h, rho * rho))
        streak = streak + 1 if clamped else 0
        log(step + 1, energy, clamped)
    return trace, RunOutcome(BUDGET_EXHAUSTED, None, cfg.max_steps, energy, floor, half)
