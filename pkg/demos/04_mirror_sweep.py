# On an even ring, flipping the sign of J_z maps every eigenstate energy E to -E
# while the heralding probability stays put.
from betheprep import ModelParams, enumerate_solutions, evaluate

for jz in (-0.5, 0.5):
    outs = [evaluate(s) for s in enumerate_solutions(ModelParams(8, 2, 1.0, jz))]
    rows = sorted((jz / abs(jz) * -o.energy, o.success_probability) for o in outs)
    print(f"J_z={jz:+.1f}: {len(rows)} states (energies shown as sign(-J_z)*E)")
    for e, p in rows[:5]:
        print(f"   {e:+.6f}  p={p:.6f}")
