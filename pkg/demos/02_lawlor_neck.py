"""The Lawlor neck that replaces the intersection.

Parameters a_j > 0 determine the neck's angles phi_j and area constant A.
The map is inverted by Newton's method, normalised so that the waist sits
inside a fixed ball, and the neck is checked to be special Lagrangian.
"""
import numpy as np

from lagglue.ambient import normalized_defect
from lagglue.lawlor import (AngleData, LawlorParams, angles_from_params, neck_eval, params_for_angles,
                            params_from_angles, psi_profile)

ad = angles_from_params(LawlorParams((1.0, 2.0, 3.0)))
print("a = (1, 2, 3):  phi =", np.round(ad.phi, 12), " A =", round(ad.A, 12))
print("sum(phi) - pi =", f"{ad.sum_defect:.1e}")

back = params_from_angles(AngleData(ad.phi, ad.A))
print("inverted a  =", np.round(back.a, 10))

# Scaling a -> a / t^2 shrinks the neck by t and the area constant by t^2.
for t in (0.5, 0.1):
    print(f"t = {t}:  A(a / t^2) / A(a) = {angles_from_params(LawlorParams((1, 2, 3)).scaled(t)).A / ad.A:.6f}")

# The neck used for gluing the equal-angle motion.
par = params_for_angles((np.pi / 4, np.pi / 4, np.pi / 2), a_min=4.0)
prof = psi_profile(par)
print("\nequal-angle neck a =", np.round(par.a, 6))
x = np.array([[0.6, 0.0, 0.8], [0.0, 1.0, 0.0], [0.48, 0.6, 0.64]])
y = np.linspace(-6, 6, 25)
X, Y = np.repeat(x, y.size, axis=0), np.tile(y, x.shape[0])
fr = neck_eval(prof, X, Y)
theta = np.unwrap(np.angle(np.linalg.det(fr.jacobian)))
print(f"Lagrangian angle spread {np.ptp(theta):.1e}, symplectic defect {normalized_defect(fr.jacobian).max():.1e}")
