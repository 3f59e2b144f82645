"""Two Grim Reaper cylinders and where they meet.

The translating Grim Reaper cylinder L_0 and its image under a rigid motion
P_(phi, lambda) intersect in a single point when sum(phi) = pi. The angles
between the two tangent planes there equal phi for every shift lambda, and
that is what lets a Lawlor neck with the same angles be glued in.
"""
import numpy as np

from lagglue.ambient import KahlerBackground, translator_residual
from lagglue.grim import GrimChart, RigidMotionSpec, build_configuration, chart_eval, intersect

phi = (np.pi / 4, np.pi / 4, np.pi / 2)

# Both cylinders are exact translators: the residual vanishes at every frame.
rng = np.random.default_rng(0)
params = np.column_stack([rng.uniform(-3, 3, (500, 2)), rng.uniform(-1.5, 1.5, 500)])
bg = KahlerBackground(3)
for name, chart in [("L_0", GrimChart(3)), ("P(L_0)", GrimChart(3).moved(RigidMotionSpec(phi, 0.0)))]:
    fr = chart_eval(chart, params)
    print(f"{name:7s} max |Theta| = {np.abs(translator_residual(fr.point, fr.jacobian, bg)).max():.1e}")

# The intersection moves with lambda, the angles do not.
print("\nlambda      s0        cone angles")
for lam in (-2.0, -1.0, 0.0, 1.0, 2.0):
    rec = intersect(RigidMotionSpec(phi, lam))
    print(f"{lam:5.1f}  {rec.s0:+.6f}   {np.round(rec.cone_angles, 12)}")

cfg = build_configuration([RigidMotionSpec(phi, 0.0)])
print("\nsingular point:", np.round(cfg.records[0].point, 12))
print("f bounded above on every chart (T-finite):", cfg.t_finite())
