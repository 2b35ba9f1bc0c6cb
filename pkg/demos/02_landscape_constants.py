"""Energy-landscape geometry: where the ball, the ridge, and the pass sit.

On the mass sphere the constrained energy of a profile u is controlled
through t = ||grad u||_2^2 by a one-variable comparison function
f_z(t) = t - a z^s t^(1-alpha) - b z t^(1+beta), where z collects the mass
and the potential norm.  Its tangency point (z*, t*) is explicit, and from
it the toolkit derives every radius and threshold the solvers use: the
gradient ball radius R* that confines the local minimizer, the mass bound
rho*, and the admissibility product that certifies the geometry.
"""

import numpy as np

from nlsmass import (
    elem_lemma_f,
    elem_lemma_star,
    make_grid,
    mp_geometry,
    solve_ground_state,
    structural_constants,
    tilde_thresholds,
)
from nlsmass.grid import GridFunction, lp_norm

print("== 1. Structural constants for (N, p) = (3, 4) ==")
g = make_grid(3, "radial", 25.0, 2048)
gs = solve_ground_state(3, 4.0, g)
sc = structural_constants(3, 4.0, 0.5, gs)
for name in ("gamma", "A", "B", "D", "s", "M"):
    print(f"   {name:5s} = {getattr(sc, name):.6f}")

print("\n== 2. Tangency of the comparison function ==")
z_star, t_star = elem_lemma_star(1.3, 0.7, sc.s, 0.25, 0.5)
print(f"   z* = {z_star:.8f}, t* = {t_star:.8f}")
print(f"   f_(z*)(t*)      = {elem_lemma_f(1.3, 0.7, sc.s, 0.25, 0.5, z_star, t_star):+.2e}")
print(f"   f_(0.9 z*)(t*)  = {elem_lemma_f(1.3, 0.7, sc.s, 0.25, 0.5, 0.9 * z_star, t_star):+.2e}")
print("   below z* the function is strictly positive at t*: the two")
print("   energy wells separate and a ridge must stand between them")

print("\n== 3. Landscape radii for an indicator-well potential ==")
V = GridFunction(g, (np.abs(g.nodes) <= 2.0).astype(float))
geo = mp_geometry(3, 4.0, 2.0, lp_norm(V, 2.0), gs)
print(f"   ||V||_2      = {geo.V_norm:.6f}")
print(f"   rho*         = {geo.rho_star:.6f}   (masses below this admit the geometry)")
print(f"   R*           = {geo.R_star:.6f}   (gradient-ball radius of the minimizer)")
print(f"   sigma        = {geo.sigma:.6f}")
print(f"   K            = {geo.K:.6f}   (admissibility: ||V|| rho^sigma < K)")
print(f"   Theta        = {geo.Theta:.6f}, Upsilon = {geo.Upsilon:.6f}"
      "   (R* ~ Theta ||V||^Upsilon)")

print("\n== 4. Level thresholds entering the saddle-search window ==")
for rho in (1.0, 2.0, 4.0):
    tilde_R, tilde_M = tilde_thresholds(3, 4.0, rho, gs)
    print(f"   rho = {rho:3.1f}: gradient threshold {tilde_R:10.4f}, "
          f"level retention factor {tilde_M:.6f}")
print("   a saddle run in the certified regime must land its level in")
print("   [tilde_M * m_rho, m_rho): above the retained fraction of the")
print("   reference level, strictly below the level itself")
