"""Certificates, the spectral witness search, and nonexistence diagnostics."""

import json
import math
import warnings

import numpy as np
import pytest
import scipy.linalg
from conftest import random_radial_profile

from nlsmass.certify import (
    DECAY_TOL,
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
from nlsmass.constants import (
    mp_geometry,
    sobolev_constant,
    structural_constants,
    tilde_thresholds,
)
from nlsmass.functionals import make_problem
from nlsmass.grid import (
    GridFunction,
    edge_weights,
    grad_norm_sq,
    integrate,
    lp_norm,
    make_grid,
)
from nlsmass.limit_problem import m_rho, solve_ground_state


def indicator(grid, lo, hi, height=1.0):
    r = np.abs(grid.nodes)
    return np.where((r >= lo) & (r <= hi), height, 0.0)


def lowest_eigenvalue(prob):
    """Independent spectral oracle: smallest eigenvalue of the quadratic form.

    Assembles the weighted stiffness/potential pencil as a symmetric
    tridiagonal matrix (similarity-transformed by sqrt of the quadrature
    weights) with a homogeneous outer boundary, and solves it directly.
    Shares no code with the package's descent-based witness search.
    """
    g = prob.grid
    n = g.n
    ew = edge_weights(g)
    main = np.zeros(n)
    main[:-1] += ew / g.h**2
    main[1:] += ew / g.h**2
    off = -ew / g.h**2
    main_s = (main - g.weights * prob.V.values) / g.weights
    off_s = off / np.sqrt(g.weights[:-1] * g.weights[1:])
    lo = 1 if g.kind == "line" else 0
    vals = scipy.linalg.eigh_tridiagonal(
        main_s[lo : n - 1], off_s[lo : n - 2], select="i",
        select_range=(0, 0))[0]
    return float(vals[0])


@pytest.fixture(scope="module")
def g3(gs_3d_p4):
    return gs_3d_p4.U.grid


@pytest.fixture(scope="module")
def sc3(gs_3d_p4):
    return structural_constants(3, 4.0, 0.5, gs_3d_p4)


@pytest.fixture(scope="module")
def gs_4d():
    return solve_ground_state(4, 3.5)


# ---------------------------------------------------------------------------
# entry / certificate data contracts
# ---------------------------------------------------------------------------


def test_entry_and_certificate_contract(g3, sc3):
    V = indicator(g3, 0.0, 1.0, 1e-6)
    cert = check_T1(make_problem(g3, p=4.0, rho=1.0, V=V), sc3)
    for e in cert.entries:
        assert e.margin == e.rhs - e.lhs
        assert e.passed == (e.margin > 0.0)
    assert cert.passed == all(e.passed for e in cert.entries)
    name = cert.entries[0].name
    assert cert.entry(name) is cert.entries[0]
    with pytest.raises(KeyError):
        cert.entry("no-such-entry")
    # the dict view must be JSON-serializable as-is
    json.dumps(cert.as_dict())

    with pytest.raises(ValueError):
        CertEntry(name="bad", lhs=1.0, rhs=2.0, margin=0.5, passed=True)
    with pytest.raises(ValueError):
        CertEntry(name="bad", lhs=1.0, rhs=2.0, margin=1.0, passed=False)
    with pytest.raises(ValueError):
        CertEntry(name="bad", lhs=math.nan, rhs=2.0, margin=math.nan,
                  passed=False)
    good = CertEntry(name="ok", lhs=1.0, rhs=2.0, margin=1.0, passed=True)
    with pytest.raises(ValueError):
        Certificate(theorem="T1", entries=(good,), passed=False)
    with pytest.raises(ValueError):
        Certificate(theorem="T9", entries=(good,), passed=True)


# ---------------------------------------------------------------------------
# potential norms
# ---------------------------------------------------------------------------


def test_potential_norms_match_continuum():
    # mid-cell node placement: the indicator edge r = 1 falls halfway
    # between nodes, so the trapezoid jump error cancels to O(h^2)
    g = make_grid(3, "radial", 20.0, 16011)
    prob = make_problem(g, p=4.0, rho=1.0, V=indicator(g, 0.0, 1.0))
    nv, nw = potential_norms(prob, 2.0, 4.0)
    # ||1_B1||_2^2 = |B1| = 4 pi / 3;  ||r 1_B1||_4^4 = 4 pi / 7
    assert nv == pytest.approx(math.sqrt(4.0 * math.pi / 3.0), rel=1e-3)
    assert nw == pytest.approx((4.0 * math.pi / 7.0) ** 0.25, rel=1e-3)
    nv_inf, _ = potential_norms(prob, math.inf, math.inf)
    assert nv_inf == 1.0


def test_potential_norms_zero_and_validation(g3):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        prob = make_problem(g3, p=4.0, rho=1.0, V=np.zeros(g3.n))
    with pytest.warns(UserWarning):
        nv, nw = potential_norms(prob, 2.0, 4.0)
    assert (nv, nw) == (0.0, 0.0)
    live = make_problem(g3, p=4.0, rho=1.0, V=indicator(g3, 0.0, 1.0))
    with pytest.raises(ValueError):
        potential_norms(live, 0.5, 4.0)
    with pytest.raises(ValueError):
        potential_norms(live, 2.0, 0.0)


def test_potential_norms_scale_linearly(g3):
    rng = np.random.default_rng(7)
    base = random_radial_profile(g3, rng).values ** 2
    prob = make_problem(g3, p=4.0, rho=1.0, V=base)
    nv, nw = potential_norms(prob, 2.5, 6.0)
    for t in (1e-3, 0.37, 42.0):
        tv, tw = potential_norms(
            make_problem(g3, p=4.0, rho=1.0, V=t * base), 2.5, 6.0)
        assert tv == pytest.approx(t * nv, rel=1e-12)
        assert tw == pytest.approx(t * nw, rel=1e-12)


# ---------------------------------------------------------------------------
# energy-sign certificate
# ---------------------------------------------------------------------------


def test_check_t1_small_potential_passes(g3, sc3):
    prob = make_problem(g3, p=4.0, rho=1.0, V=indicator(g3, 0.0, 1.0, 1e-6))
    cert = check_T1(prob, sc3)
    assert cert.theorem == "T1"
    assert [e.name for e in cert.entries] == [
        "potential-smallness", "multiplier-positivity",
        "level-comparison", "energy-sign"]
    assert cert.passed
    assert all(e.margin > 0 for e in cert.entries)
    assert cert.metadata["embedding_constant"] == sobolev_constant(3)


def test_check_t1_boundary_scaling_is_strict(g3, sc3):
    base = indicator(g3, 0.0, 1.0)
    nv0, _ = potential_norms(make_problem(g3, p=4.0, rho=1.0, V=base),
                             1.5, 3.0)
    S = sobolev_constant(3)
    kappa = (1.0 - sc3.delta) * S / nv0  # puts ||V||_{3/2} on the threshold
    over = check_T1(make_problem(g3, p=4.0, rho=1.0,
                                 V=kappa * (1.0 + 1e-12) * base), sc3)
    e_over = over.entry("potential-smallness")
    assert not e_over.passed
    assert abs(e_over.margin) <= 1e-10 * e_over.rhs
    assert not over.passed
    under = check_T1(make_problem(g3, p=4.0, rho=1.0,
                                  V=kappa * (1.0 - 1e-12) * base), sc3)
    assert under.entry("potential-smallness").passed


def test_check_t1_alternative_branch_and_preconditions(g3, sc3, gs_4d):
    # p < 4: the energy-sign entry loses its ||V|| term entirely
    sc4 = structural_constants(4, 3.5, 0.5, gs_4d)
    g4 = make_grid(4, "radial", 20.0, 2048)
    prob4 = make_problem(g4, p=3.5, rho=1.0, V=indicator(g4, 0.0, 1.0, 1e-3))
    cert4 = check_T1(prob4, sc4)
    _, nw = potential_norms(prob4, 2.0, 4.0)
    e = cert4.entry("energy-sign")
    assert e.lhs == pytest.approx(4.0 * nw / math.sqrt(sobolev_constant(4)),
                                  rel=1e-12)
    assert cert4.passed

    g1 = make_grid(1, "radial", 20.0, 256)
    prob1 = make_problem(g1, p=8.0, rho=1.0, V=indicator(g1, 0.0, 1.0))
    with pytest.raises(ValueError):
        check_T1(prob1, sc3)  # N < 3

    prob_p = make_problem(g3, p=3.5, rho=1.0, V=indicator(g3, 0.0, 1.0))
    with pytest.raises(ValueError):
        check_T1(prob_p, sc3)  # constants record solved for p = 4


# ---------------------------------------------------------------------------
# explicit witness profiles
# ---------------------------------------------------------------------------


def test_witness_profile_families():
    cases = [
        (1, 1.0, 2.0, 2.0),    # linear decay, zero at k R
        (2, 2.0, 3.0, 4.0),    # log decay, zero at (k-1) R
        (3, 2.0, 0.25, 10.0),  # harmonic pedestal, zero at R (1+d)/d
    ]
    for N, R, tail, support in cases:
        g = make_grid(N, "radial", 25.0, 2048)
        phi = explicit_witness_profile(g, R, tail)
        core = g.nodes <= R + 1e-12
        assert np.all(phi.values[core] == 1.0)
        assert np.all((phi.values >= 0.0) & (phi.values <= 1.0))
        beyond = g.nodes > support + g.h
        assert np.all(phi.values[beyond] == 0.0)

    g = make_grid(1, "radial", 25.0, 256)
    with pytest.raises(ValueError):
        explicit_witness_profile(g, 1.0, 1.0)  # N = 1 needs k > 1
    with pytest.raises(ValueError):
        explicit_witness_profile(g, 0.0, 2.0)
    g2 = make_grid(2, "radial", 25.0, 256)
    with pytest.raises(ValueError):
        explicit_witness_profile(g2, 1.0, 2.0)  # N = 2 needs k > 2
    g3_ = make_grid(3, "radial", 25.0, 256)
    with pytest.raises(ValueError):
        explicit_witness_profile(g3_, 1.0, 0.0)  # N >= 3 needs delta > 0


def test_witness_profile_matches_closed_form_value():
    # fine grid: both the core edge R and the support edge R (1+d)/d fall
    # on nodes, and the potential jump sits a half cell past its true edge
    R, delta, eta = 2.0, 0.0025, 1.0
    g = make_grid(3, "radial", 804.0, 402001)
    prob = make_problem(g, p=4.0, rho=1.0, V=indicator(g, 0.0, R, eta))
    phi = explicit_witness_profile(g, R, delta)
    assert phi.values[-1] == 0.0
    fv = spectral_form_value(prob, phi)
    # exact continuum value: kinetic tail integral omega (N-2)(1+d) R^{N-2}
    # minus the harvested well eta omega R^N / N
    omega = 4.0 * math.pi
    expected = omega * (1.0 + delta) * R - eta * omega * R**3 / 3.0
    assert expected < 0
    assert fv == pytest.approx(expected, rel=0.02)


# ---------------------------------------------------------------------------
# witness search vs the tridiagonal oracle
# ---------------------------------------------------------------------------


def test_witness_found_for_wide_well(g3):
    prob = make_problem(g3, p=4.0, rho=1.0, V=indicator(g3, 0.0, 2.0))
    w = neg_spectrum_witness(prob)
    assert w is not None
    assert integrate(g3, w.values**2) == pytest.approx(prob.rho**2, rel=1e-12)
    oracle = lowest_eigenvalue(prob)
    assert -0.103 < oracle < -0.100
    quotient = spectral_form_value(prob, w) / prob.rho**2
    assert quotient >= oracle - 1e-10          # variational upper bound
    assert quotient <= 0.3 * oracle            # and a genuinely deep one


def test_witness_none_for_narrow_well(g3):
    prob = make_problem(g3, p=4.0, rho=1.0, V=indicator(g3, 0.0, 1.0))
    assert neg_spectrum_witness(prob) is None
    oracle = lowest_eigenvalue(prob)
    assert 0.014 < oracle < 0.017  # the well really is spectrally trivial


def test_witness_one_dimensional_and_shell_wells(gs_1d_p8, g3):
    g1 = gs_1d_p8.U.grid
    prob1 = make_problem(g1, p=8.0, rho=1.0, V=indicator(g1, 0.0, 1.0))
    w1 = neg_spectrum_witness(prob1)
    assert w1 is not None
    oracle1 = lowest_eigenvalue(prob1)
    assert -0.46 < oracle1 < -0.44
    q1 = spectral_form_value(prob1, w1) / prob1.rho**2
    assert oracle1 - 1e-10 <= q1 <= 0.5 * oracle1

    shell = make_problem(g3, p=4.0, rho=1.0, V=indicator(g3, 3.0, 3.5))
    ws = neg_spectrum_witness(shell)
    assert ws is not None
    oracle_s = lowest_eigenvalue(shell)
    assert -0.023 < oracle_s < -0.021
    qs = spectral_form_value(shell, ws) / shell.rho**2
    assert oracle_s - 1e-10 <= qs <= 0.5 * oracle_s


def test_witness_none_for_vanishing_potential(g3):
    prob = make_problem(g3, p=4.0, rho=1.0, V=np.full(g3.n, 1e-15))
    assert neg_spectrum_witness(prob) is None


def test_rayleigh_descent_matches_oracle(g3):
    # line grid: descent reproduces the direct eigenvalue to high accuracy
    gl = make_grid(1, "line", 20.0, 4096)
    probl = make_problem(gl, p=8.0, rho=1.0, V=indicator(gl, 0.0, 1.0))
    phi_l, rq_l = rayleigh_minimize(probl)
    oracle_l = lowest_eigenvalue(probl)
    assert -0.453 < oracle_l < -0.452
    assert rq_l == pytest.approx(oracle_l, rel=1e-6)
    assert phi_l.values[0] == 0.0 and phi_l.values[-1] == 0.0
    assert integrate(gl, phi_l.values**2) == pytest.approx(1.0, rel=1e-12)

    # radial grid with negative spectrum
    prob_n = make_problem(g3, p=4.0, rho=1.0, V=indicator(g3, 0.0, 2.0))
    _, rq_n = rayleigh_minimize(prob_n)
    oracle_n = lowest_eigenvalue(prob_n)
    assert rq_n == pytest.approx(oracle_n, rel=1e-2)
    assert rq_n >= oracle_n - 1e-10

    # radial grid with positive spectrum: descent stays above the oracle
    prob_p = make_problem(g3, p=4.0, rho=1.0, V=indicator(g3, 0.0, 1.0))
    phi_p, rq_p = rayleigh_minimize(prob_p)
    oracle_p = lowest_eigenvalue(prob_p)
    assert rq_p > 0.0
    assert rq_p >= oracle_p - 1e-10
    assert phi_p.values[-1] == 0.0


# ---------------------------------------------------------------------------
# local-minimum certificate
# ---------------------------------------------------------------------------


def test_check_tmin_min_wide_well_certifies(g3, gs_3d_p4):
    V = indicator(g3, 0.0, 2.0)
    nv = lp_norm(GridFunction(g3, V), 2.0)
    geo = mp_geometry(3, 4.0, 2.0, nv, gs_3d_p4)
    assert geo.V_norm * geo.rho_star**geo.sigma == pytest.approx(geo.K,
                                                                 rel=1e-10)
    prob = make_problem(g3, p=4.0, rho=0.5 * geo.rho_star, V=V)
    cert = check_Tmin_min(prob, 2.0, geo)
    assert cert.theorem == "Tmin-min"
    assert [e.name for e in cert.entries] == [
        "mass-smallness", "negative-spectral-direction"]
    assert cert.passed
    e_mass = cert.entry("mass-smallness")
    assert e_mass.lhs == pytest.approx(geo.K * 0.5**geo.sigma, rel=1e-12)
    assert cert.metadata["rho_star"] == geo.rho_star
    assert cert.metadata["R_star"] == geo.R_star
    assert cert.metadata["witness_found"]

    with pytest.raises(ValueError):
        check_Tmin_min(prob, 1.2, geo)  # needs r > max(1, N/2)
    geo3 = mp_geometry(3, 4.0, 3.0, nv, gs_3d_p4)
    with pytest.raises(ValueError):
        check_Tmin_min(prob, 2.0, geo3)  # geometry solved for r = 3


def test_check_tmin_min_narrow_well_fails_spectrally(g3, gs_3d_p4):
    V = indicator(g3, 0.0, 1.0)
    nv = lp_norm(GridFunction(g3, V), 2.0)
    geo = mp_geometry(3, 4.0, 2.0, nv, gs_3d_p4)
    cert = check_Tmin_min(
        make_problem(g3, p=4.0, rho=0.5 * geo.rho_star, V=V), 2.0, geo)
    assert not cert.entry("negative-spectral-direction").passed
    assert not cert.passed
    assert not cert.metadata["witness_found"]


def test_check_tmin_min_sup_exponent_adds_decay_entry(g3, gs_3d_p4):
    V = 3.0 * np.exp(-g3.nodes)
    nv = lp_norm(GridFunction(g3, V), math.inf)
    geo = mp_geometry(3, 4.0, math.inf, nv, gs_3d_p4)
    prob = make_problem(g3, p=4.0, rho=0.05, V=V)
    cert = check_Tmin_min(prob, math.inf, geo)
    assert [e.name for e in cert.entries] == [
        "mass-smallness", "negative-spectral-direction", "boundary-decay"]
    assert cert.passed
    decay = cert.entry("boundary-decay")
    assert decay.lhs == pytest.approx(3.0 * math.exp(-g3.rmax), rel=1e-12)
    assert decay.rhs == pytest.approx(DECAY_TOL * nv, rel=1e-12)


def test_check_tmin_min_one_dimensional_small_mass(gs_1d_p8):
    g1 = gs_1d_p8.U.grid
    V = indicator(g1, 0.0, 1.0)
    nv = lp_norm(GridFunction(g1, V), 2.0)
    geo = mp_geometry(1, 8.0, 2.0, nv, gs_1d_p8)
    cert = check_Tmin_min(
        make_problem(g1, p=8.0, rho=0.3 * geo.rho_star, V=V), 2.0, geo)
    assert cert.passed
    assert cert.entry("negative-spectral-direction").lhs < 0


# ---------------------------------------------------------------------------
# mountain-pass certificate
# ---------------------------------------------------------------------------


def test_check_tmin_mp_canonical_thresholds(g3, sc3, gs_3d_p4):
    prob = make_problem(g3, p=4.0, rho=1.0, V=indicator(g3, 0.0, 2.0, 1e-3))
    cert = check_Tmin_mp(prob, 2.0, 4.0, sc3, gs_3d_p4)
    assert cert.theorem == "Tmin-mp"
    assert [e.name for e in cert.entries] == [
        "ridge-potential", "ridge-coupling",
        "boundedness-potential", "boundedness-coupling",
        "multiplier-potential", "multiplier-coupling"]
    assert cert.passed
    md = cert.metadata
    assert md["L1"] == pytest.approx(4.7243148028547814, rel=1e-10)
    assert md["L2"] == pytest.approx(0.3709829178820313, rel=1e-10)
    assert md["L3"] == pytest.approx(0.45440260498749213, rel=1e-10)
    assert md["C1"] == 1.0
    assert md["C2"] == pytest.approx(0.2018318373420924, rel=1e-10)
    assert md["C3"] == pytest.approx(0.8985139672639316, rel=1e-10)
    assert md["tilde_M"] == pytest.approx(0.5, abs=1e-10)
    assert md["kappa_potential"] == 4.0
    assert md["kappa_coupling"] == 8.0
    assert md["tilde_M"] == tilde_thresholds(3, 4.0, 1.0, gs_3d_p4)[1]

    # back-solve contracts behind each threshold
    N, p = 3, 4.0
    bracket = N * abs(4.0 - p) * md["G_q"] ** 2 + 4.0 * md["G_q1"]
    assert 3.0 * md["L2"] * bracket == pytest.approx(sc3.B, rel=1e-12)
    lhs = md["C1"] * 2.0 * md["tilde_M"] - (md["C2"] + md["C3"]) * md["L3"]
    assert lhs == pytest.approx(md["C1"] * md["tilde_M"], rel=1e-12)


def test_check_tmin_mp_ridge_threshold_interpolation_identity(g3, sc3,
                                                              gs_3d_p4):
    # a potential scaled exactly onto the ridge threshold makes the
    # interpolation bound of its quadratic term meet half the retained
    # level: (G_q^2/2) ||V||_r rho^{2-N/r} Rtilde^{N/r} = Mtilde m_rho
    from nlsmass.limit_problem import gn_constant

    base = np.exp(-(g3.nodes**2))
    e = 2.0 * (4.0 - 2.0) / sc3.B
    for r, rho in [(2.0, 0.7), (4.0, 1.3), (math.inf, 0.9), (1.6, 2.0)]:
        nr = 0.0 if math.isinf(r) else 3.0 / r
        nv0 = lp_norm(GridFunction(g3, base), r)
        cert = check_Tmin_mp(make_problem(g3, p=4.0, rho=rho, V=base),
                             r, 4.0, sc3, gs_3d_p4)
        L1 = cert.metadata["L1"]
        nv = L1 / rho ** ((2.0 - nr) * e)  # puts the ridge lhs exactly at L1
        q = 2.0 if math.isinf(r) else 2.0 * r / (r - 1.0)
        G_q = gn_constant(3, q)
        tilde_R, tilde_M = tilde_thresholds(3, 4.0, rho, gs_3d_p4)
        lhs = 0.5 * G_q**2 * nv * rho ** (2.0 - nr) * tilde_R**nr
        rhs = tilde_M * m_rho(gs_3d_p4, 4.0, rho)
        assert lhs == pytest.approx(rhs, rel=1e-12)
        del nv0


def test_check_tmin_mp_squared_norm_equivalence(g3, sc3, gs_3d_p4):
    # the ridge pair, raised to the metadata kappa powers, is the
    # squared-norm form ||V||^kappa <= L1' m_rho / rho^2; verdicts agree
    base = indicator(g3, 0.0, 2.0)
    rng = np.random.default_rng(11)
    seen = {True: 0, False: 0}
    for _ in range(20):
        t = 10.0 ** rng.uniform(-3.0, 3.0)
        rho = 10.0 ** rng.uniform(-1.5, 1.5)
        prob = make_problem(g3, p=4.0, rho=rho, V=t * base)
        cert = check_Tmin_mp(prob, 2.0, 4.0, sc3, gs_3d_p4)
        md = cert.metadata
        ratio = md["m_rho"] / rho**2
        alt_v = md["norm_V"] ** md["kappa_potential"] \
            < md["L1_prime_potential"] * ratio
        alt_w = md["norm_W"] ** md["kappa_coupling"] \
            < md["L1_prime_coupling"] * ratio
        assert cert.entry("ridge-potential").passed == alt_v
        assert cert.entry("ridge-coupling").passed == alt_w
        seen[alt_v] += 1
    assert seen[True] >= 3 and seen[False] >= 3


def test_check_tmin_mp_homogeneity_and_small_mass(g3, sc3, gs_3d_p4):
    base = indicator(g3, 0.0, 2.0, 1e-3)
    cert1 = check_Tmin_mp(make_problem(g3, p=4.0, rho=1.0, V=base),
                          2.0, 4.0, sc3, gs_3d_p4)
    t = 7.3
    cert_t = check_Tmin_mp(make_problem(g3, p=4.0, rho=1.0, V=t * base),
                           2.0, 4.0, sc3, gs_3d_p4)
    for e1, et in zip(cert1.entries, cert_t.entries):
        assert et.lhs == pytest.approx(t * e1.lhs, rel=1e-12)
        assert et.rhs == e1.rhs

    # shrinking the mass only helps: margins grow monotonically and the
    # certificate passes outright once rho is small enough
    V = indicator(g3, 0.0, 2.0)
    worst = []
    for rho in (1.0, 1e-2, 1e-4, 1e-6):
        cert = check_Tmin_mp(make_problem(g3, p=4.0, rho=rho, V=V),
                             2.0, 4.0, sc3, gs_3d_p4)
        worst.append(min(e.margin for e in cert.entries))
    assert worst == sorted(worst)
    assert worst[-1] > 0.0


def test_check_tmin_mp_preconditions(g3, sc3, gs_3d_p4, gs_3d_q3):
    prob = make_problem(g3, p=4.0, rho=1.0, V=indicator(g3, 0.0, 2.0))
    with pytest.raises(ValueError):
        check_Tmin_mp(prob, 1.4, 4.0, sc3, gs_3d_p4)  # r <= N/2
    with pytest.raises(ValueError):
        check_Tmin_mp(prob, 2.0, 2.9, sc3, gs_3d_p4)  # s <= max(2, N)
    with pytest.raises(ValueError):
        check_Tmin_mp(prob, 2.0, 4.0, sc3, gs_3d_q3)  # ground state q != p


# ---------------------------------------------------------------------------
# scaling monotonicity of the smallness entries
# ---------------------------------------------------------------------------


def test_certificate_smallness_entries_monotone_in_scaling(g3, sc3,
                                                           gs_3d_p4):
    # scaling the potential down never flips a smallness entry from pass
    # to fail; the spectral-direction entry is excluded by design (it is a
    # largeness condition, weakening V can only destroy a witness)
    rng = np.random.default_rng(23)
    for _ in range(40):
        base = random_radial_profile(g3, rng).values ** 2
        if float(np.max(base)) == 0.0:
            continue
        t_hi = 10.0 ** rng.uniform(-2.0, 2.0)
        frac = rng.uniform(0.01, 0.99)
        rho = 10.0 ** rng.uniform(-1.0, 1.0)
        hi = make_problem(g3, p=4.0, rho=rho, V=t_hi * base)
        lo = make_problem(g3, p=4.0, rho=rho, V=frac * t_hi * base)
        for cert_hi, cert_lo in [
            (check_T1(hi, sc3), check_T1(lo, sc3)),
            (check_Tmin_mp(hi, 2.0, 4.0, sc3, gs_3d_p4),
             check_Tmin_mp(lo, 2.0, 4.0, sc3, gs_3d_p4)),
        ]:
            for e_hi, e_lo in zip(cert_hi.entries, cert_lo.entries):
                assert not (e_hi.passed and not e_lo.passed), e_hi.name


# ---------------------------------------------------------------------------
# nonexistence diagnostics
# ---------------------------------------------------------------------------


def test_check_tne_flags(g3):
    inc = make_problem(g3, p=4.0, rho=1.0, V=1.0 - np.exp(-g3.nodes))
    flag, dmin = check_TNE(inc)
    assert flag
    assert dmin >= -1e-9

    well = make_problem(g3, p=4.0, rho=1.0, V=indicator(g3, 0.0, 2.0))
    flag_w, dmin_w = check_TNE(well)
    assert not flag_w
    assert dmin_w < -1.0  # the downward jump at the well edge

    const = make_problem(g3, p=4.0, rho=1.0, V=np.full(g3.n, 0.7))
    flag_c, dmin_c = check_TNE(const)
    assert not flag_c
    assert dmin_c == 0.0

    gl = make_grid(1, "line", 20.0, 2048)
    ramp = make_problem(gl, p=8.0, rho=1.0, V=1.0 + np.tanh(gl.nodes))
    assert check_TNE(ramp, 1.0)[0]
    assert not check_TNE(ramp, -1.0)[0]
    with pytest.raises(ValueError):
        check_TNE(ramp, 0.5)
    with pytest.raises(ValueError):
        check_TNE(inc, -1.0)  # radial grids only carry the outward direction


def test_cnc_residual_cases(g3):
    # disjoint supports: the coupling vanishes to rounding
    Vd = indicator(g3, 0.0, 2.0)
    ud = GridFunction(g3, np.exp(-((g3.nodes - 10.0) ** 2)))
    probd = make_problem(g3, p=4.0, rho=1.0, V=Vd)
    scale_d = (lp_norm(probd.V, math.inf) * lp_norm(ud, 2.0)
               * math.sqrt(grad_norm_sq(ud)))
    assert abs(cnc_residual(probd, ud)) <= 1e-16 * scale_d

    # generic overlap on a line grid: the residual is order one, flips
    # sign exactly with the direction, and cancels for even profiles
    gl = make_grid(1, "line", 20.0, 4097)
    Vl = np.exp(-(gl.nodes**2))
    probl = make_problem(gl, p=8.0, rho=1.0, V=Vl)
    ua = GridFunction(gl, np.exp(-0.5 * (gl.nodes - 1.0) ** 2))
    scale_a = (lp_norm(probl.V, math.inf) * lp_norm(ua, 2.0)
               * math.sqrt(grad_norm_sq(ua)))
    res_a = cnc_residual(probl, ua, 1.0)
    assert abs(res_a) >= 1e-2 * scale_a
    assert cnc_residual(probl, ua, -1.0) == -res_a
    ue = GridFunction(gl, np.exp(-0.5 * gl.nodes**2) * (1.0 + gl.nodes**2))
    scale_e = (lp_norm(probl.V, math.inf) * lp_norm(ue, 2.0)
               * math.sqrt(grad_norm_sq(ue)))
    assert abs(cnc_residual(probl, ue, 1.0)) <= 1e-14 * scale_e

    # radial coupling is substantive: generically nonzero
    ur = GridFunction(g3, np.exp(-0.5 * g3.nodes**2))
    scale_r = (lp_norm(probd.V, math.inf) * lp_norm(ur, 2.0)
               * math.sqrt(grad_norm_sq(ur)))
    assert abs(cnc_residual(probd, ur)) >= 1e-2 * scale_r

    other = make_grid(3, "radial", 25.0, 512)
    with pytest.raises(ValueError):
        cnc_residual(probd, GridFunction(other, np.zeros(512)))
