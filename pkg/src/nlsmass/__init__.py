"""Solver and certifier for mass-constrained NLS bound states.

The package targets the model equation

    -Laplace(u) - V(x) u + lam * u = u^(p-1),   ||u||_2 = rho,

with a nonnegative trapping/defect potential V on R^N, in the regime where
the nonlinearity is strong enough that the unconstrained energy is
unbounded below on the mass sphere.  It provides

* grids and quadrature for radial/line discretizations (`grid`),
* the V = 0 reference soliton, its mass scalings, and the sharp
  interpolation constant (`limit_problem`),
* the structural constants and pass geometry that control existence
  (`constants`),
* energies, multipliers, and identity residuals (`functionals`),
* hypothesis certificates and spectral/decay diagnostics (`certify`),
* constrained minimization and path (saddle) solvers (`solvers`),
* a batch command-line front end (`cli`).
"""

from .certify import (
    CertEntry,
    Certificate,
    check_T1,
    check_Tmin_min,
    check_Tmin_mp,
    check_TNE,
    cnc_residual,
    explicit_witness_profile,
    neg_spectrum_witness,
    potential_norms,
    rayleigh_minimize,
    spectral_form_value,
)
from .constants import (
    MpGeometry,
    StructuralConstants,
    elem_lemma_f,
    elem_lemma_star,
    mp_geometry,
    sobolev_constant,
    structural_constants,
    tilde_thresholds,
)
from .functionals import (
    EnergyBreakdown,
    Problem,
    action_I,
    energy_F,
    energy_breakdown,
    grad_F,
    kinetic_operator,
    lagrange_multiplier,
    make_problem,
    pohozaev_residual,
)
from .grid import (
    Grid,
    GridFunction,
    dilate,
    edge_weights,
    first_derivative,
    grad_norm_sq,
    integrate,
    laplacian,
    lp_norm,
    make_grid,
    read_csv,
    resample,
    write_csv,
)
from .limit_problem import (
    GroundStateData,
    ScaledSoliton,
    closed_form_soliton,
    gn_constant,
    lambda_rho,
    m_rho,
    scale_soliton,
    solve_ground_state,
)
from .solvers import (
    CertificateError,
    Path,
    SolutionReport,
    SolverConfig,
    SplittingReport,
    init_path,
    mass_escape,
    outer_mass_fraction,
    refine_critical_point,
    solve_local_min,
    solve_mountain_pass,
)

__all__ = [
    "CertEntry",
    "Certificate",
    "CertificateError",
    "EnergyBreakdown",
    "Grid",
    "GridFunction",
    "GroundStateData",
    "MpGeometry",
    "Path",
    "Problem",
    "ScaledSoliton",
    "SolutionReport",
    "SolverConfig",
    "SplittingReport",
    "StructuralConstants",
    "action_I",
    "check_T1",
    "check_TNE",
    "check_Tmin_min",
    "check_Tmin_mp",
    "closed_form_soliton",
    "cnc_residual",
    "dilate",
    "edge_weights",
    "elem_lemma_f",
    "elem_lemma_star",
    "energy_F",
    "energy_breakdown",
    "explicit_witness_profile",
    "first_derivative",
    "gn_constant",
    "grad_F",
    "grad_norm_sq",
    "init_path",
    "integrate",
    "kinetic_operator",
    "lagrange_multiplier",
    "lambda_rho",
    "laplacian",
    "lp_norm",
    "m_rho",
    "make_grid",
    "make_problem",
    "mass_escape",
    "mp_geometry",
    "neg_spectrum_witness",
    "outer_mass_fraction",
    "pohozaev_residual",
    "potential_norms",
    "rayleigh_minimize",
    "read_csv",
    "refine_critical_point",
    "resample",
    "scale_soliton",
    "sobolev_constant",
    "solve_ground_state",
    "solve_local_min",
    "solve_mountain_pass",
    "spectral_form_value",
    "structural_constants",
    "tilde_thresholds",
    "write_csv",
]

__version__ = "0.1.0"
