"""Jets, moving frames and curvature at a single point."""
import math

import numpy as np

from spheremin import jets as J
from spheremin.catalog import VERONESE, evaluate
from spheremin.engine import analyze_point

# a jet carries every partial derivative up to its order
u, v = J.seed_pair(0.8, 0.3, 3)
f = J.sin(u) * J.cos(v)
print("f        =", f.value)
print("f_uv     =", f.coeff(1, 1), " expected", -math.cos(0.8) * math.sin(0.3))
print("f_uuv    =", f.coeff(2, 1))

# vector-valued jets: the Veronese chart lands on the unit sphere as a jet identity
phi = evaluate(VERONESE, 0.8, 0.3, 3)
norm2 = (phi * phi).sum(0)
print("|phi|^2 coefficients:", np.round(norm2.coeffs, 14))

# adapted frame, shape operators and curvature scalars
g = analyze_point(VERONESE, 0.8, 0.3, 3)
print("frame orthonormality residual:", g.frame.gram_residual())
print("normal pivots chosen:", g.frame.pivots)
print("shape operators L3, L4:\n", np.round(g.shape.h, 6))
print(f"K = {g.curvature.K:.12f} (intrinsic {g.K_intrinsic:.12f}), S = {g.shape.S:.12f}, KN = {g.curvature.KN:.12f}")
print("mean curvature vector:", g.shape.mean_vector)
