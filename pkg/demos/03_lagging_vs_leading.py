"""Lagging X_t and leading Y_t differ for a coupled walk and agree for an uncoupled one."""

from ctrwlimit import ModelSpec, batch_sample, ks_distance

for m in (ModelSpec("levy-walk", beta=0.7), ModelSpec("uncoupled-gaussian", beta=0.7)):
    b = batch_sample(m, 1.0, 1e-3, 20_000, master_seed=11)
    print(f"{m.kind:20s} KS(X, Y) = {ks_distance(b.X[:, 0], b.Y[:, 0]):.4f}  "
          f"mean X = {b.X[:, 0].mean():+.3f}  mean Y = {b.Y[:, 0].mean():+.3f}")
