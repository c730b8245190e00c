"""Psi is not continuous: paths that converge in J1 can have images that do not.

The position is 1 on [1, 2) and 0 elsewhere. The clock of the n-th path
sits at 2 - 1/n before time 1 and jumps to 2 + 1/n there, so it passes
t = 2 while the position is 1. In the limit the clock stays at 2 up to
time 2, and Psi reads the position after it has dropped back to 0.
"""

from ctrwlimit import remark_paths

for n in (1, 2, 4, 8, 16, 64):
    x, d = remark_paths(n).psi_at(2.0)
    print(f"n={n:3d}  Psi(x_n)(2) = ({x[0]:.0f}, {d:.3f})")
x, d = remark_paths(None).psi_at(2.0)
print(f"limit  Psi(x)(2)   = ({x[0]:.0f}, {d:.3f})")
