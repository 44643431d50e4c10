"""Solve, build, simulate and score in one call; plus sweep helpers used by the CLI."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bethe import (BetheError, BetheSolution, ModelParams, eigen_residual, exact_state,
                    sector_basis, solve_bethe)
from .builder import BuildOptions, build_circuit
from .simulator import DEFAULT_QUBIT_CAP, SimulationOutcome, project_success, run

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ("L", "M", "j_xy", "j_z", "quantum_numbers", "energy", "success_probability",
                 "fidelity", "residual", "amplification_rounds", "status")


def ground_quantum_numbers(M: int) -> tuple[Fraction, ...]:
    """Symmetric consecutive I-set, -(M-1)/2 ... (M-1)/2."""
    return tuple(Fraction(2 * j - (M - 1), 2) for j in range(M))


def representative_solution(L: int, M: int, j_xy: float = 1.0, j_z: float = -0.5) -> BetheSolution:
    """A converged solution used when only gate counts matter."""
    return solve_bethe(ModelParams(L, M, j_xy, j_z), ground_quantum_numbers(M))


def evaluate(solution: BetheSolution, rounds: int = 0, cap: int = DEFAULT_QUBIT_CAP,
             reflection: str = "mcx", method: str = "sparse") -> SimulationOutcome:
    """Simulate the preparation circuit and score the heralded state.

    Fills in fidelity against the exact superposition, plus energy and the
    eigen-residual ``||H psi - E psi||`` of the post-selected system state.
    """
    opts = BuildOptions(amplification_rounds=rounds, reflection=reflection)
    circ = build_circuit(solution, opts)
    exact = exact_state(solution)
    outcome = project_success(run(circ, cap=cap, method=method), circ.layout, exact)
    if outcome.failed:
        return outcome
    params = solution.params
    basis = sector_basis(params.L, params.M)
    sector = outcome.post_state[basis]
    leak = 1 - float(np.vdot(sector, sector).real)
    if leak > 1e-8:
        raise BetheError(f"post-selected state leaks {leak:.3g} outside the M={params.M} sector")
    outcome.energy, outcome.residual = eigen_residual(params, sector / np.linalg.norm(sector))
    return outcome


@dataclass
class SweepRow:
    solution: BetheSolution
    rounds: int
    outcome: SimulationOutcome | None
    error: str | None = None

    def csv_row(self) -> dict:
        p = self.solution.params
        qs = " ".join(str(q) for q in self.solution.quantum_numbers)
        row = {"L": p.L, "M": p.M, "j_xy": p.j_xy, "j_z": p.j_z, "quantum_numbers": qs,
               "amplification_rounds": self.rounds}
        o = self.outcome
        if o is None or o.failed:
            row.update(energy="", success_probability="" if o is None else f"{o.success_probability:.12g}",
                       fidelity="", residual="", status=self.error or "zero-success")
        else:
            row.update(energy=f"{o.energy:.12g}", success_probability=f"{o.success_probability:.12g}",
                       fidelity=f"{o.fidelity:.12g}", residual=f"{o.residual:.3g}", status="ok")
        return row


def evaluate_row(solution: BetheSolution, rounds: int = 0, cap: int = DEFAULT_QUBIT_CAP) -> SweepRow:
    """Like :func:`evaluate` but never raises; failures land in ``error``."""
    try:
        return SweepRow(solution, rounds, evaluate(solution, rounds, cap))
    except Exception as exc:  # sweep keeps going, row records why
        log.warning("row %s failed: %s", solution.quantum_numbers, exc)
        return SweepRow(solution, rounds, None, f"{type(exc).__name__}: {exc}")
