"""Tour of the scalar shrinkage family behind every solver step.

For a weight w and exponent p in [1, 2] the penalized problem
min_x (x - y)^2 + w |x|^p has a unique solution S_{w,p}(y). At p = 1
this is soft thresholding with a dead zone, at p = 2 plain linear
damping, and in between a smooth pull toward zero that inverts
F(x) = x + (w p / 2) sign(x) |x|^(p-1) exactly.
"""

import numpy as np

from sparseland import shrink_p, soft_threshold

w = 1.0
ys = np.array([-3.0, -1.0, -0.4, 0.0, 0.4, 1.0, 3.0])

print("input     p=1.0     p=1.3     p=1.5     p=2.0")
for y in ys:
    row = [shrink_p(y, w, p) for p in (1.0, 1.3, 1.5, 2.0)]
    print(f"{y:+.2f}   " + "   ".join(f"{v:+.4f}" for v in row))

print()
print("p = 1 has a dead zone of half width w/2 =", w / 2)
print("  soft_threshold(0.49, w) =", soft_threshold(0.49, w))
print("  soft_threshold(0.51, w) =", soft_threshold(0.51, w))

# the defining property: applying F to the output recovers the input
p = 1.5
y = np.linspace(-5, 5, 11)
x = shrink_p(y, w, p)
back = x + 0.5 * w * p * np.sign(x) * np.abs(x) ** (p - 1.0)
print()
print(f"p = {p}: max |F(S(y)) - y| over a grid:", np.abs(back - y).max())

# shrinkage never moves a point past another: differences only contract
ya, yb = 2.0, 2.5
print("non-expansive pair:",
      abs(shrink_p(ya, w, p) - shrink_p(yb, w, p)), "<=", abs(ya - yb))
