"""Engine configuration, relaxation traces, and run outcomes."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

TRACE_COLUMNS = ("step", "time", "total_energy", "gate_energy", "clamped", "overlap_solution")

SOLVED = "solved"
UNSAT_EVIDENCE = "unsat_evidence"
BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass
class EngineConfig:
    # Relaxation law p = 1 - exp(-sigma t) per element; sigma may be overridden per
    # element name ("fix:<id>" for boundary constraints).
    sigma: float = 1.0
    sigma_overrides: dict = field(default_factory=dict)
    dt: float = 0.1
    max_steps: int = 1000
    seed: int = 0

    # Heat bath. The bath temperature only justifies the regime (0 < kT << dE);
    # it is not simulated by the quantum engines.
    bath: bool = True
    bath_energy: float = 0.1  # E_r, qubit/bath coupling in the two-way pair step
    pure_rotation: bool = False  # delta'' = 0 instead of a random phase

    equilibrium_tol: float = 1e-8
    energy_tol_rel: float = 1e-8  # tolerance = energy_tol_rel * sum of element gaps
    plateau_steps: int = 50
    max_nodes: int = 16

    # Classical Metropolis baseline.
    temperature: float = 1.5
    max_iters: int = 20000
    restarts: int = 20
    assumed_per_restart_success: float = 0.5
    confidence_threshold: float = 0.99
    cooling: str = "fixed"  # or "geometric"
    cooling_rate: float = 0.999
    min_temperature: float = 1e-3

    def sigma_for(self, name: str) -> float:
        return float(self.sigma_overrides.get(name, self.sigma))

    def replace(self, **changes) -> "EngineConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return EngineConfig(**values)


@dataclass
class RunOutcome:
    verdict: str
    assignment: Optional[tuple] = None
    steps: int = 0
    final_energy: float = float("nan")
    floor: Optional[float] = None
    # first step at which a Born measurement would return a solution with p >= 1/2
    half_solution_step: Optional[int] = None


@dataclass
class RelaxationTrace:
    rows: list = field(default_factory=list)

    def record(self, step, time, total_energy, gate_energy, clamped=False, overlap_solution=0.0):
        self.rows.append(
            (int(step), float(time), float(total_energy), float(gate_energy), bool(clamped), float(overlap_solution))
        )

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([row[TRACE_COLUMNS.index(name)] for row in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for step, time, total, gate, clamped, overlap in self.rows:
            writer.writerow([step, repr(time), repr(total), repr(gate), int(clamped), repr(overlap)])
        return buf.getvalue()
