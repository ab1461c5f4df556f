"""Annealing over reversible Boolean networks whose wires are enforced by projectors."""
from .config import EngineConfig, RelaxationTrace, RunOutcome
from .netlang import compile_cnf, parse_dimacs, parse_network, serialize_network
from .network import Network, classical_energy, enumerate_solutions, is_solution, make_network, validate_network

__version__ = "0.1.0"

__all__ = [
    "EngineConfig",
    "Network",
    "RelaxationTrace",
    "RunOutcome",
    "classical_energy",
    "compile_cnf",
    "enumerate_solutions",
    "is_solution",
    "make_network",
    "parse_dimacs",
    "parse_network",
    "serialize_network",
    "validate_network",
]
