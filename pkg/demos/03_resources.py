# Gate counts and T estimates as the chain grows, and the gap to a direct
# permutation-by-configuration phasing scheme.
import numpy as np

from betheprep import (ResourceModel, alternative_costs, build_algorithm1, count_gates, depth,
                       estimate, formula_counts)
from betheprep.pipeline import representative_solution

Ls = np.arange(40, 101, 10)
depths, toffolis = [], []
for L in Ls:
    c = build_algorithm1(representative_solution(int(L), 5))
    depths.append(depth(c))
    toffolis.append(count_gates(c)["TOFFOLI"])
print("M=5 depth      ", depths, "slope", round(np.polyfit(Ls, depths, 1)[0], 2))
print("M=5 Toffolis   ", toffolis, "slope", round(np.polyfit(Ls, toffolis, 1)[0], 2))

c = build_algorithm1(representative_solution(100, 5))
for policy in ("worst_case_factorial", "amplified_sqrt"):
    rep = estimate(c, ResourceModel(epsilon=1e-10, repetitions=policy))
    print(f"{policy:22s} qubits {rep.qubits} T/run {rep.t_single_run:.3g} reps {rep.repetitions} "
          f"total {rep.t_total:.3g}")
print("closed-form counts", formula_counts(100, 5))

for L in (20, 50, 100):
    alt = alternative_costs(L, 5)
    print(L, {k: f"{v:.3g}" for k, v in alt.items()})
