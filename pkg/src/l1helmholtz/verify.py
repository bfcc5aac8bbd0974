"""Pass/fail battery over one profile against the explicit minimiser."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import closed_form as cf
from .analysis import nash_family, nash_ratio, virial_check
from .grid import RadialProfile, l2_norm
from .rearrangement import check_rearrangement, rearrange


@dataclass
class Tolerances:
    norm: float = 1e-6
    phi_R: float = 1e-10
    dphi_R: float = 1e-8
    virial: float = 1e-6
    helmholtz: float = 1e-5
    equimeasure: float = 1e-8
    rearrange_slack: float = 1e-6
    nash: float = 1e-9


def _check(value, tol, passed, **extra) -> dict:
    d = {"value": value, "tol": tol, "passed": bool(passed)}
    d.update(extra)
    return d


def verify(beta: float, profile: RadialProfile | None = None, n: int = 4096,
           tol: Tolerances | None = None) -> dict:
    """Run every check for ``beta``.

    Without ``profile`` the explicit minimiser is sampled on ``n`` nodes.
    The Helmholtz residual is reported relative to ``beta * sqrt(|B_R|)``.
    """
    tol = tol or Tolerances()
    params = cf.solve_parameters(beta)
    if profile is None:
        profile = cf.sample(params, cf.default_grid(params, n))
    checks = {}

    l2 = l2_norm(profile)
    checks["unit_norm"] = _check(abs(l2 - 1.0), tol.norm, abs(l2 - 1.0) <= tol.norm)

    bnd = cf.boundary_report(params)
    checks["dirichlet_at_R"] = _check(abs(bnd["phi_R"]), tol.phi_R, abs(bnd["phi_R"]) <= tol.phi_R)
    checks["neumann_at_R"] = _check(abs(bnd["dphi_R"]), tol.dphi_R, abs(bnd["dphi_R"]) <= tol.dphi_R)
    checks["lambda_negative"] = _check(params.lambda_, 0.0, params.lambda_ < 0)

    vir = virial_check(profile, beta)
    checks["virial"] = _check(vir["relerr"], tol.virial, vir["relerr"] <= tol.virial,
                              lhs=vir["lhs"], rhs=vir["rhs"])

    scale = beta * math.sqrt(4.0 / 3.0 * math.pi * params.R ** 3)
    res = cf.helmholtz_residual(profile, params) / scale
    checks["helmholtz_residual"] = _check(res, tol.helmholtz, res <= tol.helmholtz)

    rr = check_rearrangement(profile, beta)
    eq = max(abs(rr.l1_after_shells / rr.l1_before - 1.0), abs(rr.l2_after_shells / rr.l2_before - 1.0))
    checks["equimeasurability"] = _check(eq, tol.equimeasure, eq <= tol.equimeasure)
    slack = tol.rearrange_slack * rr.F_before
    rise = rr.F_after - rr.F_before
    monotone = bool(np.all(np.diff(rearrange(profile).values) <= 0))
    checks["rearrangement_decreases_F"] = _check(rise, slack, rise <= slack and monotone,
                                                 F_before=rr.F_before, F_after=rr.F_after)

    ratio = nash_ratio(profile)
    family = {k: nash_ratio(p) for k, p in nash_family(n).items() if k != "minimizer"}
    best = max(family.values())
    checks["nash_saturation"] = _check(ratio, best, ratio + tol.nash >= best, best_family_ratio=best)

    return {
        "beta": beta,
        "params": params.as_dict(),
        "n": profile.grid.n,
        "tolerances": asdict(tol),
        "checks": checks,
        "all_passed": all(c["passed"] for c in checks.values()),
    }
