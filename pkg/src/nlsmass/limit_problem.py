"""Reference soliton of the potential-free problem and its mass rescalings.

With the potential switched off, the positive radial ground state U of

    -Laplace(U) + U = U^(q-1),    U(0) = max U,    U -> 0 at infinity,

generates every constrained solution of the limit problem by scaling.  This
module computes U, the sharp interpolation constant it encodes, and the
one-parameter family of mass-rho solitons obtained by dilation.

In one dimension U has the closed form

    U(x) = ((q/2) * sech((q-2) x / 2)^2)^(1/(q-2)),

used directly as the Newton seed; higher dimensions shoot on U(0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded

from .grid import (
    Grid,
    GridFunction,
    grad_norm_sq,
    integrate,
    lp_norm,
    make_grid,
)

__all__ = [
    "GroundStateData",
    "ScaledSoliton",
    "closed_form_soliton",
    "solve_ground_state",
    "scale_soliton",
    "m_rho",
    "lambda_rho",
    "gn_constant",
    "critical_exponent",
]

DEFAULT_RMAX = 20.0
DEFAULT_N = 4096
TOL_GS = 1e-8


def critical_exponent(N: int) -> float:
    """Upper end of the admissible power range: 2N/(N-2), or inf if N <= 2."""
    return 2.0 * N / (N - 2.0) if N >= 3 else math.inf


def _check_exponent(N: int, q: float) -> None:
    if not 2.0 < q < critical_exponent(N):
        raise ValueError(
            f"exponent q={q} outside the open range (2, {critical_exponent(N)}) for N={N}"
        )


@dataclass
class GroundStateData:
    """Positive radial ground state of the potential-free problem.

    Attributes
    ----------
    N, q : int, float
        Dimension and nonlinearity power.
    U : GridFunction
        The profile on a radial grid.
    rho0 : float
        Its L^2 norm; masses below/above rho0 map to multipliers above/below 1.
    m_rho0 : float
        Energy of U without potential term.
    gn_const : float
        Sharp constant of the L^q interpolation inequality, realized by U.
    residual : float
        Weighted L^2 norm of the discrete equation residual.
    """

    N: int
    q: float
    U: GridFunction
    rho0: float
    m_rho0: float
    gn_const: float
    residual: float

    def __post_init__(self) -> None:
        if np.min(self.U.values) < -1e-10 * max(1.0, float(np.max(self.U.values))):
            raise ValueError("ground state must be nonnegative")
        if int(np.argmax(self.U.values)) != 0 and self.U.grid.kind == "radial":
            raise ValueError("ground state must peak at the origin")
        if not self.rho0 > 0:
            raise ValueError("ground state has zero mass")


@dataclass
class ScaledSoliton:
    """Mass-rho member of the dilation family generated by the ground state.

    Z(x) = mu^(-2/(q-2)) U(x/mu) with mu fixed by the mass; lam is the
    accompanying multiplier and m_rho the energy level.
    """

    Z: GridFunction
    rho: float
    mu: float
    lam: float
    m_rho: float


def closed_form_soliton(q: float, x: NDArray[np.float64]) -> NDArray[np.float64]:
    """One-dimensional soliton ((q/2) sech((q-2)x/2)^2)^(1/(q-2))."""
    return (q / 2.0 / np.cosh((q - 2.0) * np.asarray(x) / 2.0) ** 2) ** (1.0 / (q - 2.0))


# ---------------------------------------------------------------------------
# fourth-order radial operator (internal to the ground-state solve)
# ---------------------------------------------------------------------------


def _lap4_diagonals(N: int, grid: Grid) -> dict[int, NDArray[np.float64]]:
    """Five diagonals of the 4th-order radial Laplacian with even-origin closure."""
    n, h, r = grid.n, grid.h, grid.nodes
    c2 = 1.0 / (12.0 * h * h)
    c1 = 1.0 / (12.0 * h)
    d = {k: np.zeros(n) for k in (-2, -1, 0, 1, 2)}
    # origin: Laplacian of a smooth radial profile is N * u''(0)
    d[0][0] = -30.0 * N * c2
    d[1][0] = 32.0 * N * c2
    d[2][0] = -2.0 * N * c2
    # r = h: stencil folded by the even extension u(-r) = u(r)
    fac = (N - 1.0) / r[1]
    d[-1][1] = 16.0 * c2 - 8.0 * fac * c1
    d[0][1] = -31.0 * c2 + 1.0 * fac * c1
    d[1][1] = 16.0 * c2 + 8.0 * fac * c1
    d[2][1] = -1.0 * c2 - 1.0 * fac * c1
    i = np.arange(2, n - 2)
    fac = (N - 1.0) / r[i]
    d[-2][i] = -c2 + fac * c1
    d[-1][i] = 16.0 * c2 - 8.0 * fac * c1
    d[0][i] = -30.0 * c2
    d[1][i] = 16.0 * c2 + 8.0 * fac * c1
    d[2][i] = -c2 - fac * c1
    # next-to-last row: zero ghost past the Dirichlet wall
    i = n - 2
    fac = (N - 1.0) / r[i]
    d[-2][i] = -c2 + fac * c1
    d[-1][i] = 16.0 * c2 - 8.0 * fac * c1
    d[0][i] = -30.0 * c2
    d[1][i] = 16.0 * c2 + 8.0 * fac * c1
    return d


def _apply_diagonals(d: dict[int, NDArray[np.float64]], u: NDArray[np.float64]) -> NDArray[np.float64]:
    n = len(u)
    out = d[0] * u
    for k in (1, 2):
        out[: n - k] += d[k][: n - k] * u[k:]
    for k in (-1, -2):
        out[-k:] += d[k][-k:] * u[:k]
    return out


def _gs_residual(d, u, q):
    R = -_apply_diagonals(d, u) + u - np.abs(u) ** (q - 2.0) * u
    R[-1] = u[-1]
    return R


def _newton_polish(grid: Grid, q: float, seed: NDArray[np.float64],
                   tol: float = 1e-11, max_iter: int = 40) -> tuple[NDArray[np.float64], float]:
    """Damped Newton on the discretized equation; returns profile and residual norm."""
    d = _lap4_diagonals(grid.N, grid)
    w = grid.weights
    u = seed.copy()
    u[-1] = 0.0

    def rnorm(v):
        return math.sqrt(float(np.dot(w, v * v)))

    rn = rnorm(_gs_residual(d, u, q))
    for _ in range(max_iter):
        if rn < tol:
            break
        R = _gs_residual(d, u, q)
        ab = np.zeros((5, grid.n))
        nl = 1.0 - (q - 1.0) * np.abs(u) ** (q - 2.0)
        for k in (-2, -1, 0, 1, 2):
            arr = -d[k].copy()
            if k == 0:
                arr += nl
                arr[-1] = 1.0  # Dirichlet row
            else:
                arr[-1] = 0.0
            row = 2 - k
            if k > 0:
                ab[row, k:] = arr[: grid.n - k]
            elif k < 0:
                ab[row, : grid.n + k] = arr[-k:]
            else:
                ab[row, :] = arr
        du = solve_banded((2, 2), ab, -R)
        alpha, accepted = 1.0, False
        for _ in range(40):
            trial = u + alpha * du
            rn_trial = rnorm(_gs_residual(d, trial, q))
            if rn_trial < (1.0 - 0.25 * alpha) * rn or rn_trial < tol:
                u, rn, accepted = trial, rn_trial, True
                break
            alpha *= 0.5
        if not accepted:
            break
    return u, rn


# ---------------------------------------------------------------------------
# shooting (N >= 2)
# ---------------------------------------------------------------------------


def _shoot_once(N: int, q: float, a0: float, rspan: float):
    """Integrate outward from the origin; classify overshoot (sign crossing)."""

    def rhs(r, y):
        u, v = y
        f = u - np.abs(u) ** (q - 2.0) * u
        if r < 1e-12:
            return [v, f / N]
        return [v, f - (N - 1.0) / r * v]

    def crossing(r, y):
        return y[0]

    crossing.terminal = True
    crossing.direction = -1

    def turning(r, y):
        return y[1] - 1e-14

    turning.terminal = True
    turning.direction = 1

    sol = solve_ivp(rhs, (1e-10, rspan), [a0, 0.0], method="DOP853",
                    rtol=1e-12, atol=1e-14, events=[crossing, turning],
                    dense_output=True)
    crossed = len(sol.t_events[0]) > 0
    return sol, crossed


def _shooting_seed(N: int, q: float, grid: Grid) -> NDArray[np.float64]:
    """Bisection on U(0) between sign-crossing and turning back upward."""
    lo = 1.0
    hi = 10.0 * (q / 2.0) ** (1.0 / (q - 2.0))
    rspan = min(grid.rmax, 40.0)
    _, crossed_lo = _shoot_once(N, q, lo, rspan)
    _, crossed_hi = _shoot_once(N, q, hi, rspan)
    if crossed_lo or not crossed_hi:
        raise RuntimeError(
            "shooting bracket does not straddle the ground state; "
            f"tried U(0) in [{lo}, {hi}]"
        )
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        _, crossed = _shoot_once(N, q, mid, rspan)
        if crossed:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-12:
            break
    a0 = 0.5 * (lo + hi)
    sol, _ = _shoot_once(N, q, a0, rspan)
    rend = sol.t[-1]
    seed = np.zeros(grid.n)
    r = grid.nodes
    inner = (r > 0) & (r < rend)
    seed[0] = a0
    seed[inner] = sol.sol(r[inner])[0]
    # continue the tail at the linear decay rate exp(-r)
    tail = r >= rend
    u_end = max(float(sol.sol(rend)[0]), 0.0)
    seed[tail] = u_end * np.exp(-(r[tail] - rend))
    return np.maximum(seed, 0.0)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def solve_ground_state(N: int, q: float, grid: Grid | None = None) -> GroundStateData:
    """Compute the positive radial ground state of the potential-free problem.

    Parameters
    ----------
    N : int
        Dimension (>= 1).
    q : float
        Power in (2, 2N/(N-2)) (upper end inf for N <= 2).
    grid : Grid, optional
        Radial grid; defaults to rmax=20, n=4096.

    Returns
    -------
    GroundStateData

    Raises
    ------
    RuntimeError
        If the shooting bracket fails or Newton stalls above tolerance.
    """
    _check_exponent(N, q)
    if grid is None:
        grid = make_grid(N, "radial", DEFAULT_RMAX, DEFAULT_N)
    if grid.kind != "radial" or grid.N != N:
        raise ValueError("ground state solve needs a radial grid of matching dimension")
    if N == 1:
        seed = closed_form_soliton(q, grid.nodes)
    else:
        seed = _shooting_seed(N, q, grid)
    u, rn = _newton_polish(grid, q, seed)
    if rn > TOL_GS:
        raise RuntimeError(f"ground-state Newton stalled at residual {rn:.3e}")
    u = np.maximum(u, 0.0)
    U = GridFunction(grid, u)
    rho0 = lp_norm(U, 2.0)
    # kinetic term by the pairing -int(u * Lap u): the high-order stencil keeps
    # the reported level and sharp constant at the accuracy of the solve itself
    d = _lap4_diagonals(N, grid)
    kinetic = -integrate(grid, u * _apply_diagonals(d, u))
    m0 = 0.5 * kinetic - integrate(grid, np.abs(u) ** q) / q
    gamma_q = N * (q - 2.0) / 2.0
    gn = lp_norm(U, q) / (rho0 ** (1.0 - gamma_q / q) * kinetic ** (gamma_q / (2.0 * q)))
    return GroundStateData(N=N, q=q, U=U, rho0=rho0, m_rho0=m0,
                           gn_const=gn, residual=rn)


def _structural_AB(N: int, q: float) -> tuple[float, float]:
    return 2.0 * N - (N - 2.0) * q, N * (q - 2.0) - 4.0


def _check_scaling_args(gs: GroundStateData, p: float, rho: float) -> None:
    if p != gs.q:
        raise ValueError("power p does not match the ground-state data")
    _, B = _structural_AB(gs.N, gs.q)
    if B <= 0:
        raise ValueError("mass scaling needs N(p-2) - 4 > 0")
    if not rho > 0:
        raise ValueError("rho must be positive")


def m_rho(gs: GroundStateData, p: float, rho: float) -> float:
    """Level of the mass-rho soliton: m_rho0 * (rho0/rho)^(2A/B).

    Decreasing in rho; requires the mass-supercritical regime B > 0.
    """
    _check_scaling_args(gs, p, rho)
    A, B = _structural_AB(gs.N, gs.q)
    return gs.m_rho0 * (gs.rho0 / rho) ** (2.0 * A / B)


def lambda_rho(gs: GroundStateData, p: float, rho: float) -> float:
    """Multiplier of the mass-rho soliton: (rho0/rho)^(4(p-2)/B)."""
    _check_scaling_args(gs, p, rho)
    _, B = _structural_AB(gs.N, gs.q)
    return (gs.rho0 / rho) ** (4.0 * (gs.q - 2.0) / B)


def scale_soliton(gs: GroundStateData, p: float, rho: float,
                  grid: Grid | None = None) -> ScaledSoliton:
    """Dilate the ground state to prescribed mass rho (p must equal gs.q).

    Z(x) = mu^(-2/(p-2)) U(x/mu) with mu = (rho/rho0)^(2(p-2)/B).  With no
    target grid the profile is placed on the exactly dilated copy of the
    ground-state grid (nodes map one to one); passing a grid resamples by
    cubic interpolation instead.
    """
    _check_scaling_args(gs, p, rho)
    q = gs.q
    _, B = _structural_AB(gs.N, q)
    mu = (rho / gs.rho0) ** (2.0 * (q - 2.0) / B)
    amp = mu ** (-2.0 / (q - 2.0))
    if grid is None:
        src = gs.U.grid
        target = make_grid(gs.N, "radial", src.rmax * mu, src.n)
        values = amp * gs.U.values
    else:
        if grid.N != gs.N:
            raise ValueError("target grid dimension mismatch")
        target = grid
        from .grid import _cubic_eval

        values = amp * _cubic_eval(gs.U, np.abs(target.nodes) / mu)
    Z = GridFunction(target, values)
    return ScaledSoliton(Z=Z, rho=rho, mu=mu, lam=mu ** (-2.0),
                         m_rho=m_rho(gs, p, rho))


@lru_cache(maxsize=64)
def _gn_cached(N: int, q: float, rmax: float, n: int) -> float:
    gs = solve_ground_state(N, q, make_grid(N, "radial", rmax, n))
    return gs.gn_const


def gn_constant(N: int, q: float, grid: Grid | None = None) -> float:
    """Sharp constant G_q of ||u||_q <= G_q ||u||_2^(1-theta) ||grad u||_2^theta.

    Here theta = N(q-2)/(2q).  Endpoints: G_2 = 1; for N >= 3 and q equal to
    the critical power, G = S^(-1/2) with S the critical embedding constant.
    Interior values come from the ground state at power q and are cached.
    """
    if q == 2.0:
        return 1.0
    two_star = critical_exponent(N)
    if N >= 3 and q == two_star:
        from .constants import sobolev_constant

        return sobolev_constant(N) ** -0.5
    _check_exponent(N, q)
    if grid is not None:
        return solve_ground_state(N, q, grid).gn_const
    return _gn_cached(N, float(q), DEFAULT_RMAX, DEFAULT_N)
