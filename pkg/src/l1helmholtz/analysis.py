"""Virial identity, beta-scaling laws and the Nash ratio."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import closed_form as cf
from .direct import SolverOptions, minimize
from .exceptions import DegenerateProfileError
from .grid import RadialGrid, RadialProfile, evaluate_functional, kinetic_energy, l1_norm, l2_norm
from .rearrangement import rearrange

EXPECTED_EXPONENTS = {"a": 3 / 7, "mu": 2 / 7, "R": -2 / 7, "F": 4 / 7}


def virial_check(p: RadialProfile, beta: float) -> dict:
    """Compare ``||grad phi||_2^2`` with ``3/2 beta ||phi||_1``."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    lhs = 2.0 * kinetic_energy(p)
    rhs = 1.5 * beta * l1_norm(p)
    scale = max(lhs, rhs)
    return {"lhs": lhs, "rhs": rhs, "relerr": abs(lhs - rhs) / scale if scale > 0 else 0.0}


def rescale_unitary(p: RadialProfile, nu: float) -> RadialProfile:
    """``nu^{-3/2} phi(r / nu)`` on the grid dilated by ``nu``."""
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu!r}")
    grid = RadialGrid(p.grid.n, p.grid.r_max * nu)
    return RadialProfile(grid, p.values * nu ** -1.5)


def nash_ratio(p: RadialProfile) -> float:
    """``||phi||_2^{10/3} / (||grad phi||_2^2 ||phi||_1^{4/3})``.

    Invariant under ``phi -> c phi`` and under dilations; its supremum is the
    sharp three-dimensional Nash constant.
    """
    l2 = l2_norm(p)
    if l2 == 0.0:
        raise DegenerateProfileError("Nash ratio of the zero profile is undefined")
    grad_sq = 2.0 * kinetic_energy(p)
    if grad_sq == 0.0:
        raise DegenerateProfileError("profile has zero Dirichlet energy")
    return l2 ** (10.0 / 3.0) / (grad_sq * l1_norm(p) ** (4.0 / 3.0))


def nash_family(n: int = 4096, seed: int = 0, n_random: int = 8) -> dict[str, RadialProfile]:
    """Fixed comparison family for the Nash ratio.

    Every member vanishes at the edge of its grid (Gaussians are cut at six
    widths, where they are below 1e-15).
    """
    fam = {}
    for s in (0.5, 1.0, 2.0):
        g = RadialGrid(n, 6.0 * s * math.sqrt(2.0))
        fam[f"gaussian_{s:g}"] = RadialProfile(g, np.exp(-g.nodes ** 2 / (2 * s * s)))
    g = RadialGrid(n, 1.5)
    x = g.nodes
    fam["truncated_quadratic"] = RadialProfile(g, np.clip(1.0 - x ** 2, 0.0, None))
    fam["cone"] = RadialProfile(g, np.clip(1.0 - x, 0.0, None))
    fam["cosine_bump"] = RadialProfile(g, np.where(x < 1.0, np.cos(0.5 * np.pi * np.minimum(x, 1.0)) ** 2, 0.0))
    fam["quartic_bump"] = RadialProfile(g, np.clip(1.0 - x ** 2, 0.0, None) ** 2)
    g = RadialGrid(n, 30.0)
    fam["exponential"] = RadialProfile(g, np.exp(-g.nodes) * (g.nodes < 30.0))
    rng = np.random.default_rng(seed)
    g = RadialGrid(n, 1.0)
    for k in range(n_random):
        knots = np.sort(np.concatenate(([0.0, 1.0], rng.uniform(0.0, 1.0, 6))))
        vals = rng.uniform(0.0, 1.0, knots.size)
        vals[-1] = 0.0
        fam[f"random_rearranged_{k}"] = rearrange(RadialProfile(g, np.interp(g.nodes, knots, vals)))
    params = cf.solve_parameters(1.0)
    fam["minimizer"] = cf.sample(params, cf.default_grid(params, n))
    return fam


def nash_summary(n: int = 4096, seed: int = 0) -> dict:
    ratios = [{"name": k, "ratio": nash_ratio(p)} for k, p in nash_family(n, seed).items()]
    best = max(ratios, key=lambda d: d["ratio"])
    return {"C3_estimate": best["ratio"], "argmax": best["name"], "family_ratios": ratios}


def fit_power_law(x, y) -> tuple[float, float, float]:
    """Least-squares fit of ``log y = e log x + log c``.

    Returns ``(e, c, rms)`` with ``rms`` the root-mean-square log residual.
    """
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    (e, b), res, *_ = np.polyfit(lx, ly, 1, full=True)
    rms = math.sqrt(float(res[0]) / lx.size) if res.size else 0.0
    return float(e), math.exp(b), rms


@dataclass
class ScalingReport:
    betas: list[float]
    source: str
    records: list[dict]
    exponents: dict = field(default_factory=dict)
    prefactors: dict = field(default_factory=dict)
    fit_residuals: dict = field(default_factory=dict)
    mu_R_spread: float = float("nan")
    nash: dict | None = None

    @property
    def failures(self) -> list[dict]:
        return [r for r in self.records if "error" in r]

    def as_dict(self) -> dict:
        d = {
            "source": self.source,
            "betas": list(self.betas),
            "records": self.records,
            "exponents": self.exponents,
            "expected_exponents": dict(EXPECTED_EXPONENTS),
            "prefactors": self.prefactors,
            "fit_residuals": self.fit_residuals,
            "mu_R_spread": self.mu_R_spread,
        }
        if self.nash is not None:
            d["nash"] = self.nash
        return d


def _closed_form_record(beta: float, n: int) -> dict:
    params, prof, rep = cf.solve_report(beta, n)
    return {"beta": beta, "a": params.a, "mu": params.mu, "R": params.R, "F": rep["F_total"],
            "virial_relerr": rep["virial_relerr"]}


def _direct_record(beta: float, n: int, opts: SolverOptions | None, box_factor: float) -> dict:
    """Run the iterative solver and read (a, mu, R) off its output.

    Integrating ``(-Delta + mu^2) phi = -beta`` against ``phi`` gives
    ``mu^2 = ||grad phi||^2 + beta ||phi||_1`` on the unit sphere; then
    ``a = phi(0) - beta / mu^2`` and ``R`` is the first node where the
    solver's output is exactly zero.
    """
    r_expected = cf.solve_parameters(1.0).R * beta ** (-2.0 / 7.0)
    grid = RadialGrid(n, box_factor * r_expected)
    prof, e, trace = minimize(beta, grid, opts)
    mu = math.sqrt(2.0 * e.kinetic + beta * e.l1)
    zeros = np.flatnonzero(prof.values == 0.0)
    R = float(grid.nodes[zeros[0]]) if zeros.size else float("nan")
    v = virial_check(prof, beta)
    return {"beta": beta, "a": float(prof.values[0]) - beta / mu ** 2, "mu": mu, "R": R,
            "F": e.total, "virial_relerr": v["relerr"], "converged": trace.converged}


def _scan_one(args) -> dict:
    beta, source, n, opts, box_factor = args
    try:
        if source == "closed_form":
            return _closed_form_record(beta, n)
        return _direct_record(beta, n, opts, box_factor)
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        return {"beta": beta, "error": f"{type(exc).__name__}: {exc}"}


def scaling_scan(betas, source: str = "closed_form", n: int | None = None,
                 opts: SolverOptions | None = None, box_factor: float = 2.0,
                 max_workers: int | None = None, with_nash: bool = False) -> ScalingReport:
    """Per-beta parameters and log-log exponent fits.

    ``source`` is ``"closed_form"`` or ``"direct"``.  Failed betas are kept
    in ``records`` with an ``error`` entry and left out of the fits.
    ``max_workers > 1`` runs the betas in separate processes.
    """
    betas = [float(b) for b in betas]
    if len(betas) < 3:
        raise ValueError("scaling scan needs at least 3 betas")
    if any(not (b > 0 and math.isfinite(b)) for b in betas):
        raise ValueError("betas must be positive")
    if any(b1 <= b0 for b0, b1 in zip(betas, betas[1:])):
        raise ValueError("betas must be strictly increasing")
    if betas[-1] / betas[0] < 10.0 * (1 - 1e-12):
        raise ValueError("betas must span at least one decade")
    if source not in ("closed_form", "direct"):
        raise ValueError(f"unknown source {source!r}")
    if n is None:
        n = 4096 if source == "closed_form" else 512

    jobs = [(b, source, n, opts, box_factor) for b in betas]
    if max_workers and max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as ex:
            records = list(ex.map(_scan_one, jobs))
    else:
        records = [_scan_one(j) for j in jobs]

    report = ScalingReport(betas=betas, source=source, records=records)
    ok = [r for r in records if "error" not in r]
    if len(ok) >= 2:
        bs = [r["beta"] for r in ok]
        for key in ("a", "mu", "R", "F"):
            ys = [r[key] for r in ok]
            if all(y > 0 and math.isfinite(y) for y in ys):
                e, c, rms = fit_power_law(bs, ys)
                report.exponents[key] = e
                report.prefactors[key + "1"] = c
                report.fit_residuals[key] = rms
        prods = np.array([r["mu"] * r["R"] for r in ok])
        report.mu_R_spread = float(prods.max() - prods.min())
    if with_nash:
        report.nash = nash_summary()
    return report
