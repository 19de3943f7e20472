"""A lacunary cosine graph: dimension drop between metrics, no tangent
planes, and differential fits that refuse to converge.

The series f(t) = c0 * sum 2^(-k/2) cos(2^k t) is exactly sqrt-Holder:
its graph over the t axis is parabolically 2-dimensional but Euclidean
~1.5-dimensional, and at c0 = 1 the oscillation defeats every cone, so
no point admits an approximate tangent plane.
"""

import numpy as np

from parabgmt.generators import gen_weierstrass_graph, holder_lower, holder_upper
from parabgmt.geometry import GraphSamples, HomPlane
from parabgmt.measure import dimension_fit
from parabgmt.rectify import FitConfig, TangentConfig, classify_points, fit_differential

mu, info = gen_weierstrass_graph(n=1, c0=1.0, K=50, resolution=1e-4)
print(f"cloud: {mu.natoms} atoms, sqrt-Holder constant in "
      f"[{info['c']:.3f}, {info['holder_upper']:.3f}]")

print()
print("== the two box-counting dimensions disagree ==")
rep = dimension_fit(mu, (0.12, 0.085, 0.06, 0.0425, 0.03))
print(f"parabolic dimension: {rep.fitted_dim:.3f}   (a full 2, like a vertical plane)")
rep = dimension_fit(mu, (0.03, 0.021, 0.015, 0.0105, 0.0075), metric="euclidean")
print(f"euclidean dimension: {rep.fitted_dim:.3f}   (strictly below 1.6)")

print()
print("== no approximate tangent planes ==")
rep = classify_points(mu, TangentConfig(m=2, r_list=(0.1, 0.05, 0.02), sample_size=40))
print("fractions:", rep.fractions)
print("min cone defect over sampled points:",
      round(min(r.min_defect for r in rep.results), 3))

print()
print("== differential fits stall ==")
g = GraphSamples.from_points(mu.points, HomPlane.t_axis(1))
fit = fit_differential(g, mu.natoms // 2, FitConfig(scales=(0.1, 0.05, 0.02, 0.01)))
print("residuals per scale:", [(r, round(v, 3)) for r, v in fit.residual_curve])
print("verdict:", fit.verdict)
