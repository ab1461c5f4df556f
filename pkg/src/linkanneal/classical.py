"""Classical shake-and-check annealing (Metropolis on the element energy landscape)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import BUDGET_EXHAUSTED, SOLVED, EngineConfig, RelaxationTrace
from .network import (
    MAX_ENUMERATION_NODES,
    Network,
    SizeOverflow,
    as_bits,
    classical_energy,
    energy_table,
    is_solution,
    validate_network,
)

UNSAT_WITH_CONFIDENCE = "unsat_with_confidence"


@dataclass
class AnnealOutcome:
    verdict: str
    assignment: Optional[tuple] = None
    confidence: float = 0.0
    iterations: int = 0
    final_energy: float = float("nan")

    def __post_init__(self):
        if not 0.0 <= self.confidence < 1.0:
            raise ValueError("confidence must lie in [0, 1)")


class _Landscape:
    """Incremental energy bookkeeping for single-bit flips."""

    def __init__(self, net: Network):
        self.n = net.n
        self.terms = []  # (support, accepted pattern ints, penalty)
        for el in net.elements():
            accepted = {int(row, 2) for row in el.satisfying_rows}
            self.terms.append((tuple(el.support), accepted, el.delta_e))
        for link in net.links:
            self.terms.append(((link.a, link.b), {1, 2}, link.energy_chi))
        self.link_terms = frozenset(range(len(self.terms) - len(net.links), len(self.terms)))
        self.touching = [[] for _ in range(self.n)]
        for t, (support, _, _) in enumerate(self.terms):
            for node in support:
                self.touching[node].append(t)

    def term_energy(self, t: int, bits) -> float:
        support, accepted, penalty = self.terms[t]
        pat = 0
        for node in support:
            pat = (pat << 1) | bits[node]
        return 0.0 if pat in accepted else penalty

    def energy(self, bits) -> float:
        return sum(self.term_energy(t, bits) for t in range(len(self.terms)))

    def link_energy(self, bits) -> float:
        return sum(self.term_energy(t, bits) for t in self.link_terms)

    def flip_delta(self, bits, node: int) -> tuple[float, float]:
        """(total energy change, link energy change) of flipping ``node``."""
        de = dl = 0.0
        for t in self.touching[node]:
            before = self.term_energy(t, bits)
            bits[node] ^= 1
            change = self.term_energy(t, bits) - before
            bits[node] ^= 1
            de += change
            if t in self.link_terms:
                dl += change
        return de, dl


def _temperature(cfg: EngineConfig, it: int) -> float:
    if cfg.cooling == "geometric":
        return max(cfg.temperature * cfg.cooling_rate**it, cfg.min_temperature)
    return cfg.temperature


def anneal(net: Network, cfg: EngineConfig, rng: np.random.Generator, initial=None, on_step=None):
    """Shake (single random flip, Metropolis acceptance) until every element is satisfied.

    After ``cfg.restarts`` fruitless restarts the network is declared
    unsatisfiable with confidence ``1 - (1 - p)^restarts``, ``p`` being the
    assumed per-restart success probability (a heuristic, not a bound).
    ``on_step(total, bits)`` is called after every proposal.
    """
    report = validate_network(net)
    if not report.ok:
        raise ValueError(str(report))
    if cfg.temperature <= 0 or cfg.max_iters <= 0:
        raise ValueError("temperature and max_iters must be positive")
    if cfg.cooling not in ("fixed", "geometric"):
        raise ValueError(f"unknown cooling schedule {cfg.cooling!r}")
    land = _Landscape(net)
    n = net.n
    trace = RelaxationTrace()
    total = 0
    energy = float("nan")
    bits: list[int] = []
    for restart in range(max(cfg.restarts, 1)):
        if initial is not None and restart == 0:
            bits = list(as_bits(initial, n))
        else:
            bits = [int(b) for b in rng.integers(0, 2, size=n)]
        energy = land.energy(bits)
        link_e = land.link_energy(bits)
        trace.record(total, total, energy, energy - link_e, False, float(energy == 0))
        if energy == 0.0:
            break
        nodes = rng.integers(0, n, size=cfg.max_iters)
        coins = rng.random(cfg.max_iters)
        for it in range(cfg.max_iters):
            node = int(nodes[it])
            de, dl = land.flip_delta(bits, node)
            if de <= 0 or coins[it] < math.exp(-de / _temperature(cfg, it)):
                bits[node] ^= 1
                energy += de
                link_e += dl
                if abs(energy) < 1e-9:
                    energy, link_e = land.energy(bits), land.link_energy(bits)
            total += 1
            if on_step is not None:
                on_step(total, bits)
            trace.record(total, total, energy, energy - link_e, False, float(energy == 0))
            if energy == 0.0:
                break
        if energy == 0.0:
            break
    if energy == 0.0:
        assert is_solution(net, bits)
        return AnnealOutcome(SOLVED, tuple(bits), 0.0, total, 0.0), trace
    restarts = max(cfg.restarts, 1)
    confidence = 1.0 - (1.0 - cfg.assumed_per_restart_success) ** restarts
    confidence = min(confidence, math.nextafter(1.0, 0.0))
    verdict = UNSAT_WITH_CONFIDENCE if confidence >= cfg.confidence_threshold else BUDGET_EXHAUSTED
    return AnnealOutcome(verdict, None, confidence, total, classical_energy(net, bits)), trace


@dataclass
class FrustrationReport:
    n_local_minima: int
    global_min_energy: float
    n_global_minima: int
    local_minima: list = field(default_factory=list)  # assignments, strict local minima
    nonglobal_local_minima: list = field(default_factory=list)


def frustration_profile(net: Network, limit: int = 20) -> FrustrationReport:
    """Exhaustive census of strict local minima under single-bit flips."""
    n = net.n
    if n > min(limit, MAX_ENUMERATION_NODES):
        raise SizeOverflow(f"{n} nodes exceeds frustration scan limit {limit}")
    idx = np.arange(2**n, dtype=np.int64)
    e = energy_table(net, idx)
    strict = np.ones(idx.size, dtype=bool)
    for k in range(n):
        strict &= e < e[idx ^ (1 << k)]
    gmin = float(e.min())
    minima = np.flatnonzero(strict)
    return FrustrationReport(
        n_local_minima=int(minima.size),
        global_min_energy=gmin,
        n_global_minima=int(np.sum(e == gmin)),
        local_minima=[as_bits(int(i), n) for i in minima],
        nonglobal_local_minima=[as_bits(int(i), n) for i in minima if e[i] > gmin],
    )
