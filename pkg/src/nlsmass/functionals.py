"""Constrained energy, its gradient, and the identities critical points satisfy.

The energy on the mass sphere ||u||_2 = rho is

    F(u) = 1/2 * int(|grad u|^2 - V u^2) - 1/p * int |u|^p,

and every reported diagnostic is a combination of the four quadratures

    a = int |grad u|^2,    b = int |u|^p,
    c = int V u^2,         d = int V u (x . grad u).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .grid import (
    Grid,
    GridFunction,
    edge_weights,
    first_derivative,
    grad_norm_sq,
    integrate,
    lp_norm,
)

__all__ = [
    "Problem",
    "EnergyBreakdown",
    "make_problem",
    "energy_F",
    "energy_breakdown",
    "action_I",
    "grad_F",
    "kinetic_operator",
    "lagrange_multiplier",
    "pohozaev_residual",
]

#: relative slack on the mass constraint accepted by multiplier evaluation
MASS_TOL = 0.01


@dataclass
class Problem:
    """Mass-constrained problem instance: grid, power, mass, and potential.

    The potential V is sampled on the grid nodes and must be nonnegative;
    an identically zero V is allowed but downgraded to a warning since the
    toolkit then reduces to the potential-free reference problem.  The
    companion weight W = V(x)|x| is filled automatically.
    """

    grid: Grid
    p: float
    rho: float
    V: GridFunction
    W: GridFunction = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not isinstance(self.V, GridFunction):
            self.V = GridFunction(self.grid, np.asarray(self.V, dtype=float))
        if not self.V.grid.same_layout(self.grid):
            raise ValueError("potential does not live on the problem grid")
        v = self.V.values
        if not np.all(np.isfinite(v)):
            raise ValueError("potential must be finite")
        vmax = float(np.max(np.abs(v))) if self.grid.n else 0.0
        if np.min(v) < -1e-12 * max(1.0, vmax):
            raise ValueError("potential must be nonnegative nodewise")
        N = self.grid.N
        upper = 2.0 * N / (N - 2.0) if N >= 3 else np.inf
        if not 2.0 + 4.0 / N < self.p < upper:
            raise ValueError(
                f"power p={self.p} outside the mass-supercritical range "
                f"(2 + 4/{N}, {upper}) for N={N}"
            )
        if not self.rho > 0:
            raise ValueError("mass rho must be positive")
        if vmax == 0.0:
            warnings.warn(
                "potential is identically zero; running in the potential-free "
                "limit mode",
                stacklevel=2,
            )
        self.W = GridFunction(self.grid, v * np.abs(self.grid.nodes))

    @property
    def N(self) -> int:
        return self.grid.N


def make_problem(grid: Grid, p: float, rho: float,
                 V: GridFunction | NDArray[np.float64]) -> Problem:
    """Convenience constructor; V may be a GridFunction or a plain array."""
    return Problem(grid=grid, p=p, rho=rho, V=V)


@dataclass(frozen=True)
class EnergyBreakdown:
    """The four quadratures entering every identity, plus both energies.

    a : kinetic term int |grad u|^2
    b : nonlinear term int |u|^p
    c : potential term int V u^2
    d : coupling int V u (x . grad u)
    F : full energy
    F_inf : energy with V dropped
    lam : multiplier estimate (b + c - a)/rho^2, present only when the mass
        of u is within 1% of rho
    """

    a: float
    b: float
    c: float
    d: float
    F: float
    F_inf: float
    lam: float | None


def _check_u(prob: Problem, u: GridFunction) -> None:
    if not u.grid.same_layout(prob.grid):
        raise ValueError("grid mismatch between problem and function")


def energy_breakdown(prob: Problem, u: GridFunction) -> EnergyBreakdown:
    """Compute a, b, c, d, both energies, and the multiplier when on-sphere."""
    _check_u(prob, u)
    g = prob.grid
    V = prob.V.values
    a = grad_norm_sq(u)
    b = integrate(g, np.abs(u.values) ** prob.p)
    c = integrate(g, V * u.values ** 2)
    du = first_derivative(u)
    d = integrate(g, V * u.values * du.values * g.nodes)
    f_inf = 0.5 * a - b / prob.p
    mass = lp_norm(u, 2.0)
    lam = None
    if abs(mass - prob.rho) <= MASS_TOL * prob.rho:
        lam = (b + c - a) / prob.rho ** 2
    return EnergyBreakdown(a=a, b=b, c=c, d=d,
                           F=f_inf - 0.5 * c,
                           F_inf=f_inf,
                           lam=lam)


def energy_F(prob: Problem, u: GridFunction) -> float:
    """Constrained energy F(u) = (a - c)/2 - b/p."""
    return energy_breakdown(prob, u).F


def action_I(prob: Problem, u: GridFunction, lam: float) -> float:
    """Action at multiplier lam: F(u) + lam/2 * ||u||_2^2."""
    _check_u(prob, u)
    return energy_F(prob, u) + 0.5 * lam * lp_norm(u, 2.0) ** 2


def kinetic_operator(grid: Grid, values: NDArray[np.float64]) -> NDArray[np.float64]:
    """Apply the kinetic operator matched to the quadrature of grad_norm_sq.

    Returns the array k with sum(w * k * phi) equal to the exact directional
    derivative of u -> 1/2 * grad_norm_sq(u) along phi, for every phi.  This
    is the conservative (flux-difference) form of -Laplace(u): second-order
    consistent at every node, symmetric and positive semi-definite for the
    weighted inner product, and at a radial origin it reduces to the
    regularized stencil -2N(u_1 - u_0)/h^2.
    """
    flux = edge_weights(grid) * np.diff(values) / grid.h
    s = np.zeros_like(values)
    s[1:] += flux / grid.h
    s[:-1] -= flux / grid.h
    return s / grid.weights


def grad_F(prob: Problem, u: GridFunction) -> GridFunction:
    """Unconstrained L^2 gradient of F: -Laplace(u) - V u - |u|^(p-2) u.

    The kinetic part uses kinetic_operator, the exact adjoint of the
    quadrature in energy_F, so centered finite differences of the energy
    reproduce the pairing <grad_F(u), phi> to roundoff.
    """
    _check_u(prob, u)
    vals = (kinetic_operator(prob.grid, u.values)
            - prob.V.values * u.values
            - np.abs(u.values) ** (prob.p - 2.0) * u.values)
    return GridFunction(prob.grid, vals)


def lagrange_multiplier(prob: Problem, u: GridFunction) -> float:
    """Multiplier of the mass constraint: (b + c - a)/rho^2.

    Equals -<DF(u), u>/rho^2 with the kinetic pairing integrated by parts.
    Requires ||u||_2 within 1% of rho.
    """
    _check_u(prob, u)
    mass = lp_norm(u, 2.0)
    if abs(mass - prob.rho) > MASS_TOL * prob.rho:
        raise ValueError(
            f"mass constraint violated: ||u||_2 = {mass:.6g}, rho = {prob.rho:.6g}"
        )
    eb = energy_breakdown(prob, u)
    return (eb.b + eb.c - eb.a) / prob.rho ** 2


def pohozaev_residual(prob: Problem, u: GridFunction) -> float:
    """Residual of the multiplier-free dilation identity.

    At a constrained critical point,
        a - N(p-2)/(2p) * b - N/2 * c - d = 0;
    the returned value is the left side evaluated by quadrature.
    """
    eb = energy_breakdown(prob, u)
    N, p = prob.N, prob.p
    return eb.a - N * (p - 2.0) / (2.0 * p) * eb.b - 0.5 * N * eb.c - eb.d
