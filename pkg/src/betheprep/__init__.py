"""Quantum-circuit preparation of Bethe eigenstates of the periodic XXZ chain."""
from .bethe import (BetheError, BetheSolution, DegenerateSolutionError, ExactBetheState,
                    ModelParams, SingularPairError, VanishingStateError, ap_coefficient,
                    apply_hamiltonian, dense_hamiltonian, eigen_residual, energy_of,
                    enumerate_quantum_numbers, enumerate_solutions, exact_state,
                    scan_quantum_numbers, scattering_phase, sector_basis, solve_bethe,
                    theta_matrix)
from .builder import (BuildOptions, build_algorithm1, build_amplified, build_circuit,
                      build_dicke, build_faucet, build_perm_label, layout_for)
from .circuit import (Circuit, CircuitError, Gate, QubitLayout, count_by_tag, count_gates,
                      depth, from_text, to_text, unitary_of)
from .pipeline import evaluate, ground_quantum_numbers, representative_solution
from .resources import (ResourceModel, ResourceReport, alternative_costs, estimate,
                        formula_counts)
from .simulator import (QubitCapError, SimulationError, SimulationOutcome, StateVector,
                        project_success, run, sample_counts, sample_measurement)

__version__ = "0.1.0"
