"""Configuration-driven command line emitting reproducible JSON reports.

Every command reads a strict INI config (unknown sections or keys are
errors — typos in hypothesis-critical parameters must not pass silently),
resolves it to explicit values, and writes reports that embed the resolved
config and the constants record, so a report is a complete recipe for its
own reproduction.  Nothing time- or host-dependent enters the output:
identical configs produce byte-identical reports.

Exit codes: 0 success, 2 certificate failed, 3 numerical failure
(non-converged solve, ground-state or path-search breakdown), 4 config
error (unparseable file, unknown key, missing file, inconsistent values).
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import multiprocessing
import os
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .certify import (check_T1, check_Tmin_min, check_Tmin_mp, cnc_residual)
from .constants import mp_geometry, structural_constants, tilde_thresholds
from .functionals import (energy_breakdown, lagrange_multiplier,
                          make_problem, pohozaev_residual)
from .grid import GridFunction, lp_norm, make_grid, read_csv, write_csv
from .limit_problem import m_rho, solve_ground_state
from .solvers import (CertificateError, SolverConfig, solve_local_min,
                      solve_mountain_pass)

__all__ = [
    "ConfigError", "RunConfig", "parse_config", "main",
    "cmd_groundstate", "cmd_constants", "cmd_certify", "cmd_solve",
    "cmd_diagnose", "cmd_sweep",
]

EXIT_OK = 0
EXIT_CERTIFICATE = 2
EXIT_NUMERICAL = 3
EXIT_CONFIG = 4

_SECTIONS = {
    "problem": {"n", "p", "rho"},
    "potential": {"kind", "height", "radius", "amplitude", "width", "path"},
    "norms": {"r", "s"},
    "grid": {"kind", "rmax", "n"},
    "solver": {"tol_crit", "tol_mass", "max_iter", "max_sweeps", "n_path",
               "handoff", "split_frac", "force", "mode", "delta",
               "h_search_max", "kind"},
    "output": {"directory", "trace"},
}
_POTENTIAL_KEYS = {
    "ball": {"kind", "height", "radius"},
    "gaussian": {"kind", "amplitude", "width"},
    "tabulated-file": {"kind", "path"},
}


class ConfigError(ValueError):
    """A config file could not be turned into a consistent run."""


@dataclass
class RunConfig:
    """Fully resolved run parameters plus their JSON-ready echo."""

    N: int
    p: float
    rho: float
    potential: dict | None
    r: float
    s: float
    grid_kind: str
    rmax: float
    n: int
    solver: SolverConfig
    solver_kind: str
    out_dir: str
    trace: bool
    resolved: dict


def _get(parser_section, caster, key, default=None, required=False):
    if key not in parser_section:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    raw = parser_section[key]
    try:
        return caster(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value {raw!r} for key {key!r}") from exc


def _float(raw: str) -> float:
    return float(raw)  # accepts "inf"


def _bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def parse_config(path: str, out_override: str | None = None,
                 trace_override: bool = False) -> RunConfig:
    """Read and validate a strict INI run config.

    Raises
    ------
    ConfigError
        Missing file, unknown section or key, missing required key, or a
        value that fails its range check.
    """
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from exc

    for sect in cp.sections():
        if sect not in _SECTIONS:
            raise ConfigError(f"unknown section [{sect}]")
        for key in cp[sect]:
            if key not in _SECTIONS[sect]:
                raise ConfigError(f"unknown key {key!r} in section [{sect}]")
    for req in ("problem", "grid"):
        if req not in cp:
            raise ConfigError(f"missing required section [{req}]")

    prob_s = cp["problem"]
    N = _get(prob_s, int, "n", required=True)
    p = _get(prob_s, _float, "p", required=True)
    rho = _get(prob_s, _float, "rho", required=True)
    if rho <= 0:
        raise ConfigError("rho must be positive")

    grid_s = cp["grid"]
    grid_kind = _get(grid_s, str, "kind", default="radial")
    rmax = _get(grid_s, _float, "rmax", required=True)
    n = _get(grid_s, int, "n", required=True)

    potential = None
    if "potential" in cp:
        pot_s = cp["potential"]
        kind = _get(pot_s, str, "kind", required=True)
        if kind not in _POTENTIAL_KEYS:
            raise ConfigError(f"unknown potential kind {kind!r}")
        extra = set(pot_s) - _POTENTIAL_KEYS[kind]
        if extra:
            raise ConfigError(
                f"keys {sorted(extra)} do not belong to potential kind {kind!r}")
        if kind == "ball":
            potential = {"kind": kind,
                         "height": _get(pot_s, _float, "height", required=True),
                         "radius": _get(pot_s, _float, "radius", required=True)}
        elif kind == "gaussian":
            potential = {"kind": kind,
                         "amplitude": _get(pot_s, _float, "amplitude",
                                           required=True),
                         "width": _get(pot_s, _float, "width", required=True)}
        else:
            vpath = _get(pot_s, str, "path", required=True)
            if not os.path.isfile(vpath):
                raise ConfigError(f"tabulated potential file not found: {vpath}")
            potential = {"kind": kind, "path": vpath}

    norms_s = cp["norms"] if "norms" in cp else {}
    r = _get(norms_s, _float, "r", default=2.0)
    s = _get(norms_s, _float, "s", default=4.0)

    solver_s = cp["solver"] if "solver" in cp else {}
    solver_kind = _get(solver_s, str, "kind", default="mp")
    if solver_kind not in ("min", "mp"):
        raise ConfigError(f"solver kind must be 'min' or 'mp', got {solver_kind!r}")
    out_s = cp["output"] if "output" in cp else {}
    out_dir = out_override or _get(out_s, str, "directory", default="out")
    trace = trace_override or _get(out_s, _bool, "trace", default=False)

    kwargs = dict(
        tol_crit=_get(solver_s, _float, "tol_crit", default=1e-8),
        tol_mass=_get(solver_s, _float, "tol_mass", default=1e-10),
        max_iter=_get(solver_s, int, "max_iter", default=50_000),
        max_sweeps=_get(solver_s, int, "max_sweeps", default=2_000),
        n_path=_get(solver_s, int, "n_path", default=64),
        handoff=_get(solver_s, _float, "handoff", default=1e-3),
        split_frac=_get(solver_s, _float, "split_frac", default=0.2),
        force=_get(solver_s, _bool, "force", default=False),
        mode=_get(solver_s, str, "mode", default="auto"),
        delta=_get(solver_s, _float, "delta", default=0.5),
        h_search_max=_get(solver_s, int, "h_search_max", default=60),
    )
    try:
        solver = SolverConfig(r=r, s=s, trace=trace, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    resolved = {
        "problem": {"N": N, "p": p, "rho": rho},
        "potential": dict(potential) if potential else {"kind": "none"},
        "norms": {"r": r, "s": s},
        "grid": {"kind": grid_kind, "rmax": rmax, "n": n},
        "solver": {**kwargs, "kind": solver_kind},
        "output": {"directory": out_dir, "trace": trace},
    }
    return RunConfig(N=N, p=p, rho=rho, potential=potential, r=r, s=s,
                     grid_kind=grid_kind, rmax=rmax, n=n, solver=solver,
                     solver_kind=solver_kind, out_dir=out_dir, trace=trace,
                     resolved=resolved)


# --------------------------------------------------------------- realization

def _realize(cfg: RunConfig):
    """Build (grid, problem); every inconsistency is a config error."""
    try:
        grid = make_grid(cfg.N, cfg.grid_kind, cfg.rmax, cfg.n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    pot = cfg.potential
    if pot is None:
        vals = np.zeros(grid.n)
    elif pot["kind"] == "ball":
        vals = pot["height"] * (np.abs(grid.nodes) < pot["radius"]).astype(float)
    elif pot["kind"] == "gaussian":
        vals = pot["amplitude"] * np.exp(-(grid.nodes / pot["width"]) ** 2)
    else:
        tab = read_csv(pot["path"])
        if not tab.grid.same_layout(grid):
            raise ConfigError(
                "tabulated potential does not live on the configured grid")
        vals = tab.values
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            prob = make_problem(grid, p=cfg.p, rho=cfg.rho, V=vals)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return grid, prob


def _ground_state(cfg: RunConfig, grid):
    """Ground state on the problem grid, or a radial twin for line grids."""
    gs_grid = grid if grid.kind == "radial" else make_grid(
        cfg.N, "radial", cfg.rmax, cfg.n)
    return solve_ground_state(cfg.N, cfg.p, gs_grid)


def _constants_record(cfg: RunConfig, gs, prob) -> dict:
    """Every scalar constant of the run with its defining formula."""
    sc = structural_constants(cfg.N, cfg.p, cfg.solver.delta, gs)
    tilde_R, tilde_M = tilde_thresholds(cfg.N, cfg.p, cfg.rho, gs)
    rec = {
        "gamma": {"value": sc.gamma, "formula": "N*(p - 2)/2"},
        "A": {"value": sc.A, "formula": "2*N - (N - 2)*p"},
        "B": {"value": sc.B, "formula": "N*(p - 2) - 4"},
        "D": {"value": sc.D, "formula": "N*(p - 2)**2"},
        "s": {"value": sc.s, "formula": "2*A/B"},
        "theta": {"value": sc.theta, "formula": "A/B"},
        "M": {"value": sc.M,
              "formula": "(delta/gamma)**(gamma/(gamma - 2)) * (gamma/2 - 1)"
                         " * (p/G**p)**(2/(gamma - 2)) / (m_rho0 * rho0**s)"},
        "gn_const": {"value": sc.gn_const,
                     "formula": "||U||_p^p / (||grad U||_2^gamma"
                                " * ||U||_2^(p - gamma))"},
        "rho0": {"value": gs.rho0, "formula": "||U||_2"},
        "m_rho0": {"value": gs.m_rho0, "formula": "F_inf(U)"},
        "m_rho": {"value": m_rho(gs, cfg.p, cfg.rho),
                  "formula": "m_rho0 * (rho0/rho)**s"},
        "tilde_R": {"value": tilde_R,
                    "formula": "gradient-norm radius of the positive ridge"},
        "tilde_M": {"value": tilde_M,
                    "formula": "ridge peak energy / (2 * m_rho)"},
        "delta": {"value": cfg.solver.delta, "formula": "config [solver] delta"},
    }
    vnorm = lp_norm(prob.V, cfg.r) if float(np.max(prob.V.values)) > 0 else 0.0
    if vnorm > 0:
        try:
            geo = mp_geometry(cfg.N, cfg.p, cfg.r, vnorm, gs)
        except ValueError:
            geo = None
        if geo is not None:
            rec.update({
                "V_norm": {"value": geo.V_norm, "formula": "||V||_r"},
                "q": {"value": geo.q, "formula": "2*r/(r - 1), or 2 at r = inf"},
                "alpha": {"value": geo.alpha, "formula": "(2*N - q*(N - 2))/(2*q)"},
                "beta": {"value": geo.beta, "formula": "B/4"},
                "z_star": {"value": geo.z_star,
                           "formula": "tangency mass parameter of"
                                      " t - a*z**s*t**(1-alpha) - b*z*t**(1+beta)"},
                "t_star": {"value": geo.t_star,
                           "formula": "tangency point of the comparison function"},
                "R_star": {"value": geo.R_star, "formula": "sqrt(t_star)"},
                "rho_star": {"value": geo.rho_star,
                             "formula": "z_star**(2/A)"},
                "sigma": {"value": geo.sigma,
                          "formula": "A*(alpha + s*beta)/(2*beta)"},
                "K": {"value": geo.K,
                      "formula": "unit-norm tangency mass to the power"
                                 " (alpha + s*beta)/beta"},
                "Theta": {"value": geo.Theta,
                          "formula": "sqrt of the unit-norm tangency point"},
                "Upsilon": {"value": geo.Upsilon,
                            "formula": "1/(2*(alpha + s*beta))"},
            })
    return rec


def _write_json(out_dir: str, name: str, payload: dict) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_trace(out_dir: str, rows) -> str:
    path = os.path.join(out_dir, "trace.csv")
    with open(path, "w") as fh:
        fh.write("iteration,F,projected_grad_norm,outer_mass_fraction\n")
        for row in rows:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
    return path


# ------------------------------------------------------------------ commands

def cmd_groundstate(cfg: RunConfig) -> int:
    grid, prob = _realize(cfg)
    gs = _ground_state(cfg, grid)
    payload = {
        "command": "groundstate",
        "N": gs.N, "q": gs.q, "rho0": gs.rho0, "m_rho0": gs.m_rho0,
        "G_q": gs.gn_const, "residual": gs.residual,
        "config": cfg.resolved,
    }
    _write_json(cfg.out_dir, "report.json", payload)
    write_csv(gs.U, os.path.join(cfg.out_dir, "profile.csv"))
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_constants(cfg: RunConfig) -> int:
    grid, prob = _realize(cfg)
    gs = _ground_state(cfg, grid)
    payload = {
        "command": "constants",
        "constants": _constants_record(cfg, gs, prob),
        "config": cfg.resolved,
    }
    _write_json(cfg.out_dir, "report.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_certify(cfg: RunConfig, theorem: str) -> int:
    grid, prob = _realize(cfg)
    gs = _ground_state(cfg, grid)
    try:
        if theorem == "t1":
            sc = structural_constants(cfg.N, cfg.p, cfg.solver.delta, gs)
            cert = check_T1(prob, sc)
        elif theorem == "tmin-min":
            vnorm = lp_norm(prob.V, cfg.r)
            geo = mp_geometry(cfg.N, cfg.p, cfg.r, vnorm, gs)
            cert = check_Tmin_min(prob, cfg.r, geo)
        elif theorem == "tmin-mp":
            sc = structural_constants(cfg.N, cfg.p, cfg.solver.delta, gs)
            cert = check_Tmin_mp(prob, cfg.r, cfg.s, sc, gs)
        else:
            raise ConfigError(f"unknown theorem tag {theorem!r}")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    payload = {
        "command": "certify",
        "theorem": theorem,
        "certificate": cert.as_dict(),
        "constants": _constants_record(cfg, gs, prob),
        "config": cfg.resolved,
    }
    _write_json(cfg.out_dir, "report.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK if cert.passed else EXIT_CERTIFICATE


def cmd_solve(cfg: RunConfig, kind: str) -> int:
    grid, prob = _realize(cfg)
    gs = _ground_state(cfg, grid)
    level = None
    try:
        if kind == "min":
            vnorm = lp_norm(prob.V, cfg.r)
            try:
                geo = mp_geometry(cfg.N, cfg.p, cfg.r, vnorm, gs)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            report = solve_local_min(prob, geo, cfg=cfg.solver)
        elif kind == "mp":
            report, level = solve_mountain_pass(prob, gs, cfg.solver)
        else:
            raise ConfigError(f"unknown solve kind {kind!r}")
    except CertificateError as err:
        payload = {
            "command": "solve", "kind": kind,
            "error": "certificate-failed", "message": str(err),
            "certificate": err.certificate.as_dict()
            if err.certificate is not None else None,
            "constants": _constants_record(cfg, gs, prob),
            "config": cfg.resolved,
        }
        _write_json(cfg.out_dir, "report.json", payload)
        print(json.dumps(payload, indent=2, sort_keys=True))
        return EXIT_CERTIFICATE

    payload = {
        "command": "solve", "kind": kind,
        "report": report.as_dict(),
        "constants": _constants_record(cfg, gs, prob),
        "config": cfg.resolved,
    }
    if level is not None:
        payload["level"] = level
    _write_json(cfg.out_dir, "report.json", payload)
    write_csv(report.u, os.path.join(cfg.out_dir, "profile.csv"))
    if report.trace is not None:
        _write_trace(cfg.out_dir, report.trace)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK if report.status == "converged" else EXIT_NUMERICAL


def cmd_diagnose(cfg: RunConfig, solution_file: str) -> int:
    grid, prob = _realize(cfg)
    if not os.path.isfile(solution_file):
        raise ConfigError(f"solution file not found: {solution_file}")
    try:
        u = read_csv(solution_file)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not u.grid.same_layout(grid):
        raise ConfigError("solution does not live on the configured grid")
    eb = energy_breakdown(prob, u)
    try:
        multiplier = lagrange_multiplier(prob, u)
    except ValueError:
        multiplier = None  # profile off the mass sphere: no multiplier
    payload = {
        "command": "diagnose",
        "breakdown": {"a": eb.a, "b": eb.b, "c": eb.c, "d": eb.d,
                      "F": eb.F, "F_inf": eb.F_inf, "lam": eb.lam},
        "multiplier": multiplier,
        "pohozaev": pohozaev_residual(prob, u),
        "cnc": cnc_residual(prob, u),
        "config": cfg.resolved,
    }
    _write_json(cfg.out_dir, "report.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _sweep_worker(args: tuple[str, str | None, bool]) -> int:
    path, out_override, trace = args
    try:
        cfg = parse_config(path, out_override, trace)
        return cmd_solve(cfg, cfg.solver_kind)
    except ConfigError as exc:
        print(f"config error in {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, RuntimeError) as exc:
        print(f"numerical failure in {path}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def cmd_sweep(config_paths: list[str], jobs: int, trace: bool) -> int:
    """Run each config's solve in its own worker with its own output dir."""
    cfgs = [parse_config(p, None, trace) for p in config_paths]
    dirs = [os.path.abspath(c.out_dir) for c in cfgs]
    if len(set(dirs)) != len(dirs):
        raise ConfigError("sweep configs must use distinct output directories")
    work = [(p, None, trace) for p in config_paths]
    if jobs <= 1 or len(work) == 1:
        codes = [_sweep_worker(w) for w in work]
    else:
        with multiprocessing.Pool(min(jobs, len(work))) as pool:
            codes = pool.map(_sweep_worker, work)
    for path, code in zip(config_paths, codes):
        print(f"{path}: exit {code}")
    return max(codes) if codes else EXIT_OK


# ---------------------------------------------------------------- entrypoint

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nlsmass",
        description="Certified solvers for mass-constrained bound states")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", required=True, help="INI run config")
        sp.add_argument("--out", default=None,
                        help="output directory (overrides [output] directory)")

    sp = sub.add_parser("groundstate", help="solve the potential-free profile")
    add_common(sp)
    sp = sub.add_parser("constants", help="emit the constants record")
    add_common(sp)
    sp = sub.add_parser("certify", help="evaluate a hypothesis certificate")
    add_common(sp)
    sp.add_argument("--theorem", required=True,
                    choices=("t1", "tmin-min", "tmin-mp"))
    sp = sub.add_parser("solve", help="run a constrained solver")
    sp.add_argument("kind", choices=("min", "mp"))
    add_common(sp)
    sp.add_argument("--trace", action="store_true",
                    help="write per-iteration trace.csv")
    sp = sub.add_parser("diagnose", help="residuals of a stored profile")
    add_common(sp)
    sp.add_argument("solution", help="profile CSV written by solve")
    sp = sub.add_parser("sweep", help="fan out solves over many configs")
    sp.add_argument("configs", nargs="+", help="one INI config per run")
    sp.add_argument("--jobs", type=int, default=min(4, os.cpu_count() or 1))
    sp.add_argument("--trace", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            return cmd_sweep(args.configs, args.jobs, args.trace)
        trace = getattr(args, "trace", False)
        cfg = parse_config(args.config, args.out, trace)
        if args.command == "groundstate":
            return cmd_groundstate(cfg)
        if args.command == "constants":
            return cmd_constants(cfg)
        if args.command == "certify":
            return cmd_certify(cfg, args.theorem)
        if args.command == "solve":
            return cmd_solve(cfg, args.kind)
        if args.command == "diagnose":
            return cmd_diagnose(cfg, args.solution)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CertificateError as exc:
        print(f"certificate failed: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
