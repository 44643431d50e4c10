# Solve a small chain, build the preparation circuit, simulate it and check
# the heralded state against the exact Bethe wavefunction.
import math

import numpy as np

from betheprep import (ModelParams, build_algorithm1, count_by_tag, count_gates, depth,
                       enumerate_solutions, evaluate, exact_state, project_success, run,
                       solve_bethe)
from betheprep.bethe import dense_sector_hamiltonian

params = ModelParams(L=4, M=2, j_xy=1.0, j_z=-0.5)
sol = solve_bethe(params, ["-3/2", "1/2"])
print("momenta", np.round(np.mod(sol.momenta, 2 * math.pi), 8), "residual", sol.residual)

circ = build_algorithm1(sol)
print(circ.layout.header())
print("gates", dict(count_gates(circ)), "depth", depth(circ))
print("by stage", dict(count_by_tag(circ)))

exact = exact_state(sol)
out = project_success(run(circ), circ.layout, exact)
print(f"p = {out.success_probability:.6f} (exact {exact.success_probability:.6f}), "
      f"fidelity {out.fidelity:.12f}")

# every converged solution in the sector, next to exact diagonalization
spectrum = np.linalg.eigvalsh(dense_sector_hamiltonian(params))
for s in enumerate_solutions(params):
    o = evaluate(s)
    print([str(q) for q in s.quantum_numbers], f"E={o.energy:+.6f}",
          f"p={o.success_probability:.4f}", f"fid={o.fidelity:.10f}", f"res={o.residual:.1e}")
print("sector spectrum", np.round(spectrum, 6))
