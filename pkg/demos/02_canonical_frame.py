"""Normalizing the normal frame of a nowhere-flat minimal surface."""
import numpy as np

from spheremin.catalog import GENERALIZED_VERONESE
from spheremin.engine import analyze_point
from spheremin.identities import random_rotation
from spheremin.normalize import canonical_derivatives, canonicalize, normalize_star, rotate_normal

g = analyze_point(GENERALIZED_VERONESE, 1.1, 2.0, 4)
h = g.shape.h
S = g.shape.S

# step 1: e3 along the off-diagonal vector (h^a_12)
star = normalize_star(h)
print("after the first rotation, h^a_12 =", np.round(star.h[:, 0, 1], 12))

# step 2: e4 along (h^b_11) for b >= 4; all other operators vanish
c = canonicalize(h)
print("branch:", c.branch, " residual:", c.residual)
print(f"b^2 = {c.b**2:.12f}   S/4 = {S / 4:.12f}")
print("canonical L3, L4:\n", np.round(c.h[:2], 10))
print("L5, L6 max entry:", np.abs(c.h[2:]).max())

# the result does not depend on the frame we started from
rng = np.random.default_rng(0)
for _ in range(3):
    c2 = canonicalize(rotate_normal(random_rotation(rng, h.shape[0]), h))
    print(f"  random start: residual {c2.residual:.1e}, b = {c2.b:.12f}")

# derivative relations in the canonical frame
rel = canonical_derivatives(g.shape, c)
for name, (lhs, rhs) in {**rel.first, **rel.second}.items():
    print(f"  {name:<10} {lhs: .3e}  vs  {rhs: .3e}")
L = rel.lam_kl
print("lambda3_12 - lambda3_21 =", L[0, 0, 1] - L[0, 1, 0], " closed form", 0.25 * np.sqrt(S) * (3 * S - 4))
