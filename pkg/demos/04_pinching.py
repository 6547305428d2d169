"""Curvature windows and classification."""
from spheremin.catalog import build_calabi, catalog_list, sample_grid
from spheremin.engine import analyze_point
from spheremin.pinching import classify, curvature_of_degree, simon_window, summarize, summarize_operators

# the discrete values of S for the standard immersions, and the windows between them
for s in range(1, 7):
    k, lo, hi = simon_window(2 - 2 * curvature_of_degree(s))
    print(f"s={s}: K={curvature_of_degree(s)}, S={2 - 2 * curvature_of_degree(s)} lies in window {k} = [{lo}, {hi})")

# catalog surfaces classify as themselves
for spec in catalog_list() + [build_calabi(4), build_calabi(5)]:
    c = classify(summarize(spec, 6, 6))
    print(f"{spec.name:<22} -> {c.label:<22} {c.theorem_used}")

# scaling the shape operators breaks every hypothesis
spec = catalog_list()[2]
hs = [1.1 * analyze_point(spec, u, v, 2).shape.h for _, _, u, v in sample_grid(spec, 4, 4)]
sm = summarize_operators(hs)
print("scaled veronese:", classify(sm).label, f"(S = {sm.S_min:.4f}, KN = {sm.KN_min:.4f})")
