# Amplitude amplification on top of the heralded circuit: the success
# probability follows sin^2((2r+1) asin sqrt(p)) round by round.
import math

from betheprep import (BuildOptions, build_amplified, exact_state, project_success, run,
                       solve_bethe, ModelParams)

sol = solve_bethe(ModelParams(6, 2, 1.0, -0.5), ["-1/2", "1/2"])
p0 = exact_state(sol).success_probability
print(f"single-shot p = {p0:.6f}")

for reflection in ("mcx", "tree"):
    for rounds in (1, 2):
        c = build_amplified(sol, rounds, BuildOptions(reflection=reflection))
        out = project_success(run(c), c.layout, exact_state(sol))
        want = math.sin((2 * rounds + 1) * math.asin(math.sqrt(p0))) ** 2
        print(f"{reflection:4s} r={rounds}: qubits {c.layout.total:3d}  p {out.success_probability:.6f}"
              f"  predicted {want:.6f}  fidelity {out.fidelity:.10f}")
