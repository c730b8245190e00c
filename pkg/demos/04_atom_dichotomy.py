"""P(R_t = 0) is zero without a clock drift and gamma u(t) with one."""

import numpy as np

from ctrwlimit import ModelSpec, atom_mass_R0, batch_sample

for m in (ModelSpec("levy-walk", beta=0.5),
          ModelSpec("drifted-subordinator", beta=0.5, gamma=1.0)):
    exact = atom_mass_R0(m, 1.0)
    for du in (1e-3, 1e-4):
        frac = np.mean(batch_sample(m, 1.0, du, 20_000, master_seed=3).on_M)
        print(f"{m.kind:22s} du={du:g}: on-M fraction {frac:.4f}  (exact atom {exact:.4f})")
