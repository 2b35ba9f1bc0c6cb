"""Structural constants and pass geometry for the mass-supercritical regime.

Everything here is scalar bookkeeping: the exponent combinations that the
existence analysis keeps reusing, the critical embedding constant, the
tangency point of the one-dimensional comparison function, and the radii
and mass thresholds that shape the constrained energy landscape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .limit_problem import GroundStateData, gn_constant, m_rho

__all__ = [
    "StructuralConstants",
    "MpGeometry",
    "structural_constants",
    "sobolev_constant",
    "elem_lemma_star",
    "elem_lemma_f",
    "mp_geometry",
    "tilde_thresholds",
]


@dataclass(frozen=True)
class StructuralConstants:
    """Exponent combinations and the level constant M for dimension/power (N, p).

    gamma = N(p-2)/2 exceeds 2 exactly in the mass-supercritical regime.
    A = 2N - (N-2)p and B = N(p-2) - 4 are both positive there, with
    A + B = 2(p-2); D = N(p-2)^2; s = 2A/B is the mass-scaling exponent of
    the soliton level and theta = A/B its multiplier-to-level ratio.  M is
    the delta-dependent fraction of the soliton level that survives as a
    lower bound for the constrained minimax level.
    """

    N: int
    p: float
    delta: float
    gamma: float
    A: float
    B: float
    D: float
    s: float
    theta: float
    M: float
    gn_const: float


def sobolev_constant(N: int) -> float:
    """Best constant S in ||grad u||_2^2 >= S ||u||_{2N/(N-2)}^2 (N >= 3).

    Closed form pi*N*(N-2)*(Gamma(N/2)/Gamma(N))^(2/N), attained by the
    bubble profile (1 + r^2)^(-(N-2)/2).
    """
    if N < 3:
        raise ValueError("critical embedding constant requires N >= 3")
    return math.pi * N * (N - 2.0) * (math.gamma(N / 2.0) / math.gamma(float(N))) ** (2.0 / N)


def structural_constants(N: int, p: float, delta: float,
                         gs: GroundStateData) -> StructuralConstants:
    """Assemble the scalar constants attached to (N, p) and the soliton data.

    Parameters
    ----------
    N, p : int, float
        Dimension and power, with 2 + 4/N < p < 2N/(N-2) (inf for N <= 2).
    delta : float
        Kinetic retention fraction in (0, 1) used by the lower bound.
    gs : GroundStateData
        Ground state at the same (N, p); supplies the sharp constant and level.
    """
    if gs.N != N or gs.q != p:
        raise ValueError("ground-state data does not match (N, p)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    gamma = N * (p - 2.0) / 2.0
    B = N * (p - 2.0) - 4.0
    if B <= 0:
        raise ValueError("need the mass-supercritical range p > 2 + 4/N")
    A = 2.0 * N - (N - 2.0) * p
    if A <= 0:
        raise ValueError("need p below the critical power 2N/(N-2)")
    D = N * (p - 2.0) ** 2
    s = 2.0 * A / B
    G = gs.gn_const
    M = ((delta / gamma) ** (gamma / (gamma - 2.0))
         * (gamma / 2.0 - 1.0)
         * (p / G ** p) ** (2.0 / (gamma - 2.0))
         / (gs.m_rho0 * gs.rho0 ** s))
    return StructuralConstants(N=N, p=p, delta=delta, gamma=gamma, A=A, B=B,
                               D=D, s=s, theta=A / B, M=M, gn_const=G)


def elem_lemma_f(A: float, B: float, s: float, alpha: float, beta: float,
                 z: float, t: float) -> float:
    """The comparison function f_z(t) = t - A z^s t^(1-alpha) - B z t^(1+beta)."""
    return t - A * z ** s * t ** (1.0 - alpha) - B * z * t ** (1.0 + beta)


def elem_lemma_star(A: float, B: float, s: float, alpha: float,
                    beta: float) -> tuple[float, float]:
    """Tangency point of f_z(t) = t - A z^s t^(1-alpha) - B z t^(1+beta).

    Returns (z_star, t_star) with f_{z_star}(t_star) = 0 and
    d/dt f_{z_star}(t_star) = 0: the largest z whose comparison function
    still touches zero from above.  Requires A, B, s, beta > 0 and
    alpha in (0, 1].
    """
    if min(A, B, s, beta) <= 0 or not 0.0 < alpha <= 1.0:
        raise ValueError("need A, B, s, beta > 0 and alpha in (0, 1]")
    denom = alpha + s * beta
    z_star = ((alpha / B) ** (alpha / denom)
              * (beta / A) ** (beta / denom)
              * (alpha + beta) ** (-(alpha + beta) / denom))
    t_star = ((alpha / B) ** (s / denom)
              * (A / beta) ** (1.0 / denom)
              * (alpha + beta) ** ((1.0 - s) / denom))
    return z_star, t_star


@dataclass(frozen=True)
class MpGeometry:
    """Radii and smallness thresholds for the constrained energy landscape.

    For masses below rho_star the energy on the sphere is positive on the
    gradient-norm annulus around R_star, which pins a local minimizer
    inside the ball and a mountain ridge outside it.  The admissibility
    condition reads V_norm * rho^sigma < K; R_star grows like
    Theta * V_norm^Upsilon.
    """

    N: int
    p: float
    r: float
    q: float
    V_norm: float
    alpha: float
    beta: float
    s: float
    a_coef: float
    b_coef: float
    z_star: float
    t_star: float
    R_star: float
    rho_star: float
    sigma: float
    K: float
    Theta: float
    Upsilon: float

    def lower_bound(self, rho: float, R: float) -> float:
        """Two-sided bound: 2 F(u) >= this value whenever ||u||_2 = rho,
        ||grad u||_2 = R, for admissible potentials of the stored norm."""
        A_struct = 2.0 * self.N - (self.N - 2.0) * self.p
        z = rho ** (A_struct / 2.0)
        return elem_lemma_f(self.a_coef, self.b_coef, self.s,
                            self.alpha, self.beta, z, R * R)


def mp_geometry(N: int, p: float, r: float, V_norm: float,
                gs: GroundStateData) -> MpGeometry:
    """Geometry of the constrained landscape for a potential of L^r norm V_norm.

    Parameters
    ----------
    N, p : int, float
        Dimension and power in the mass-supercritical range.
    r : float
        Lebesgue exponent of the potential bound, r > max(1, N/2);
        r = inf is allowed and pairs with the plain L^2 interpolation.
    V_norm : float
        ||V||_r > 0.
    gs : GroundStateData
        Ground state at (N, p).
    """
    if gs.N != N or gs.q != p:
        raise ValueError("ground-state data does not match (N, p)")
    if not r > max(1.0, N / 2.0):
        raise ValueError("need r > max(1, N/2)")
    if not V_norm > 0:
        raise ValueError("V_norm must be positive (V identically zero has no geometry)")
    q = 2.0 if math.isinf(r) else 2.0 * r / (r - 1.0)
    two_star = 2.0 * N / (N - 2.0) if N >= 3 else math.inf
    if not 2.0 <= q < two_star:
        raise ValueError(f"conjugate exponent q={q} falls outside [2, {two_star})")
    A_struct = 2.0 * N - (N - 2.0) * p
    B_struct = N * (p - 2.0) - 4.0
    if B_struct <= 0 or A_struct <= 0:
        raise ValueError("need 2 + 4/N < p < 2N/(N-2)")
    G_q = gn_constant(N, q)
    G_p = gs.gn_const
    alpha = (2.0 * N - q * (N - 2.0)) / (2.0 * q)
    beta = B_struct / 4.0
    s_lem = (2.0 / q) * (2.0 * N - q * (N - 2.0)) / A_struct
    a_coef = G_q ** 2 * V_norm
    b_coef = (2.0 / p) * G_p ** p
    z_star, t_star = elem_lemma_star(a_coef, b_coef, s_lem, alpha, beta)
    z_unit, t_unit = elem_lemma_star(G_q ** 2, b_coef, s_lem, alpha, beta)
    denom = alpha + s_lem * beta
    sigma = A_struct * denom / (2.0 * beta)
    K = z_unit ** (denom / beta)
    return MpGeometry(N=N, p=p, r=r, q=q, V_norm=V_norm,
                      alpha=alpha, beta=beta, s=s_lem,
                      a_coef=a_coef, b_coef=b_coef,
                      z_star=z_star, t_star=t_star,
                      R_star=math.sqrt(t_star),
                      rho_star=z_star ** (2.0 / A_struct),
                      sigma=sigma, K=K,
                      Theta=math.sqrt(t_unit),
                      Upsilon=1.0 / (2.0 * denom))


def tilde_thresholds(N: int, p: float, rho: float,
                     gs: GroundStateData) -> tuple[float, float]:
    """Potential-free ridge radius and retained level fraction at mass rho.

    Returns (tilde_R, tilde_M): tilde_R maximizes t^2/2 - (G^p/p) rho^(p-gamma) t^gamma
    over t > 0, and tilde_M is half that maximum divided by the soliton level
    m_rho.  tilde_M does not depend on rho.
    """
    if gs.N != N or gs.q != p:
        raise ValueError("ground-state data does not match (N, p)")
    gamma = N * (p - 2.0) / 2.0
    if gamma <= 2.0:
        raise ValueError("need the mass-supercritical range")
    if not rho > 0:
        raise ValueError("rho must be positive")
    G = gs.gn_const
    c_rho = (G ** p / p) * rho ** (p - gamma)
    tilde_R = (p / (gamma * G ** p)) ** (1.0 / (gamma - 2.0)) * rho ** (-(p - gamma) / (gamma - 2.0))
    peak = tilde_R ** 2 / 2.0 - c_rho * tilde_R ** gamma
    return tilde_R, peak / (2.0 * m_rho(gs, p, rho))
