"""Iterative minimisation of ``F_beta`` on the discrete unit sphere.

Each step is a forward-backward update followed by a radial rescaling::

    phi <- project_sphere(prox_l1(phi - tau * smooth_gradient(phi), tau * beta))

Fixed points satisfy ``-Delta phi + beta = mu^2 phi`` on the support of
``phi`` for some ``mu``, i.e. the discrete Euler-Lagrange equation, whatever
the value of ``tau``.  The search runs in the cone ``phi >= 0``; a
rearrangement never raises the energy, so nothing is lost.

Plain explicit steps are limited to ``tau ~ h^2``, so reaching the minimiser
from a generic start takes ``O(h^-2)`` iterations.  By default the run is
warm-started: it first converges on grids with 2, 4, 8, ... times fewer
cells and interpolates each result onto the next grid.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import DegenerateProfileError, StepSizeError
from .grid import EnergyBreakdown, RadialGrid, RadialProfile, evaluate_functional, l2_norm, radial_laplacian
from .rearrangement import rearrange

log = logging.getLogger(__name__)

# tau * lambda_max of the radial Laplacian is 6.367 * tau / h^2; 0.15 keeps
# tau below 1/lambda_max, where forward-backward steps cannot raise energy.
DEFAULT_STEP_FACTOR = 0.15
COARSEST_CELLS = 128
TAIL_FRACTION = 0.9


def smooth_gradient(p: RadialProfile) -> RadialProfile:
    """``-Delta p`` in radial form; at ``r = 0`` this is ``-3 p''(0)``."""
    if p.grid.n < 3:
        raise ValueError("smooth_gradient needs at least 3 nodes")
    return RadialProfile(p.grid, -radial_laplacian(p))


def prox_l1(p: RadialProfile, threshold: float) -> RadialProfile:
    """Proximal map of ``threshold * ||.||_1`` restricted to ``y >= 0``."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    return RadialProfile(p.grid, np.maximum(p.values - threshold, 0.0))


def project_sphere(p: RadialProfile) -> RadialProfile:
    nrm = l2_norm(p)
    if nrm == 0.0:
        raise DegenerateProfileError("cannot normalise the zero profile")
    return RadialProfile(p.grid, p.values / nrm)


@dataclass
class SolverOptions:
    """Settings for :func:`minimize`.

    ``step`` of ``None`` means ``DEFAULT_STEP_FACTOR * h^2`` on each grid.
    ``energy_tol`` is compared against the relative energy drop across a
    window of ``check_every`` iterations.  ``max_iters`` caps each grid
    level separately.  ``warm_start`` enables the coarse-to-fine schedule.
    """

    step: float | None = None
    max_iters: int = 200_000
    energy_tol: float = 1e-12
    rearrange_every: int = 0
    seed: int | None = None
    check_every: int = 1000
    record_every: int = 1000
    warm_start: bool = True
    ascent_tol: float = 1e-6

    def __post_init__(self):
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError("max_iters must be a positive integer")
        if not self.energy_tol > 0:
            raise ValueError("energy_tol must be positive")
        if self.rearrange_every < 0:
            raise ValueError("rearrange_every must be nonnegative")
        if self.check_every < 1 or self.record_every < 1:
            raise ValueError("check_every and record_every must be positive")


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    n: int
    energy: EnergyBreakdown
    l2err: float
    tailmass: float


@dataclass
class SolverTrace:
    records: list[TraceRecord] = field(default_factory=list)
    ascents: int = 0
    max_ascent: float = 0.0
    levels: list[int] = field(default_factory=list)
    converged: bool = False

    def __len__(self):
        return len(self.records)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "total", "kinetic", "l1", "l2err", "tailmass"])
            for rec in self.records:
                e = rec.energy
                w.writerow([rec.iter, repr(e.total), repr(e.kinetic), repr(e.l1), repr(rec.l2err), repr(rec.tailmass)])


class MinimizeResult(NamedTuple):
    profile: RadialProfile
    energy: EnergyBreakdown
    trace: SolverTrace


def tail_mass(p: RadialProfile, fraction: float = TAIL_FRACTION) -> float:
    """``||phi 1_{r > fraction * r_max}||_1``."""
    mask = p.grid.nodes > fraction * p.grid.r_max
    return float(p.grid.weights[mask] @ np.abs(p.values[mask]))


def initial_profile(grid: RadialGrid, seed: int | None = None) -> RadialProfile:
    """Normalised ``exp(-r^2)``, optionally with a seeded multiplicative
    perturbation."""
    v = np.exp(-grid.nodes ** 2)
    if seed is not None:
        rng = np.random.default_rng(seed)
        v = v * (1.0 + 0.1 * rng.uniform(-1.0, 1.0, grid.n))
    return project_sphere(RadialProfile(grid, v))


def _level_grids(grid: RadialGrid) -> list[RadialGrid]:
    grids = [grid]
    cells = grid.n - 1
    while cells // 2 >= COARSEST_CELLS:
        cells //= 2
        grids.append(RadialGrid(cells + 1, grid.r_max))
    return grids[::-1]


def _run_level(v: np.ndarray, grid: RadialGrid, beta: float, opts: SolverOptions,
               trace: SolverTrace, it0: int, record: bool) -> tuple[np.ndarray, float, int, bool]:
    """Iterate on one grid; returns the best iterate, its energy, the
    global iteration counter and whether the energy test was met."""
    tau = opts.step if opts.step is not None else DEFAULT_STEP_FACTOR * grid.h ** 2
    w, fw = grid.weights, grid.face_weights
    shrink = tau * beta
    g = np.empty(grid.n)

    def energy(x):
        d = np.diff(x)
        return 0.5 * float(fw @ (d * d)) + beta * float(w @ np.abs(x))

    best_v, best_e = v.copy(), energy(v)
    window_e = best_e
    last_rec = best_e
    for k in range(1, opts.max_iters + 1):
        # g = -Delta v, inlined for speed (see radial_laplacian)
        flux = fw * np.diff(v)
        g[:] = 0.0
        g[:-1] -= flux
        g[1:] += flux
        g /= w
        v = v - tau * g
        v -= shrink
        np.maximum(v, 0.0, out=v)
        if opts.rearrange_every and k % opts.rearrange_every == 0:
            v = np.array(rearrange(RadialProfile(grid, v)).values)
        nrm2 = float(w @ (v * v))
        if not math.isfinite(nrm2):
            raise StepSizeError(
                f"iterate diverged at iteration {it0 + k} (tau={tau:.3g}); reduce the step"
            )
        if nrm2 == 0.0:
            raise DegenerateProfileError(
                f"prox threshold tau*beta={shrink:.3g} zeroed the profile; reduce the step"
            )
        v /= math.sqrt(nrm2)

        on_check = k % opts.check_every == 0
        on_record = record and k % opts.record_every == 0
        if on_check or on_record or k == opts.max_iters:
            e = energy(v)
            if not math.isfinite(e):
                raise StepSizeError(f"energy is {e} at iteration {it0 + k}; reduce the step")
            if e < best_e:
                best_v, best_e = v.copy(), e
            if on_record:
                rel = (e - last_rec) / abs(last_rec)
                if rel > 0:
                    trace.ascents += 1
                    trace.max_ascent = max(trace.max_ascent, rel)
                last_rec = e
                prof = RadialProfile(grid, v)
                trace.records.append(
                    TraceRecord(
                        iter=it0 + k,
                        n=grid.n,
                        energy=evaluate_functional(prof, beta),
                        l2err=abs(math.sqrt(float(w @ (v * v))) - 1.0),
                        tailmass=tail_mass(prof),
                    )
                )
            if on_check:
                if window_e - e < opts.energy_tol * abs(e):
                    return best_v, best_e, it0 + k, True
                window_e = e
    return best_v, best_e, it0 + opts.max_iters, False


def minimize(beta: float, grid: RadialGrid, opts: SolverOptions | None = None,
             init: RadialProfile | None = None) -> MinimizeResult:
    """Discrete minimiser of ``F_beta`` over ``phi >= 0`` with ``||phi||_2 = 1``.

    Returns the lowest-energy iterate seen on ``grid``.  ``init`` replaces
    the Gaussian start and disables the warm start.  Raises
    :class:`StepSizeError` on divergence or when the energy keeps rising
    (more than ``opts.ascent_tol`` relative) between recorded iterates.
    """
    if not (beta > 0 and math.isfinite(beta)):
        raise ValueError(f"beta must be positive, got {beta!r}")
    if grid.n < 3:
        raise ValueError("grid needs at least 3 nodes")
    opts = opts or SolverOptions()
    trace = SolverTrace()

    if init is not None:
        if init.grid != grid:
            raise ValueError("init must live on the solver grid")
        grids = [grid]
        v = np.array(project_sphere(prox_l1(init, 0.0)).values)
    else:
        grids = _level_grids(grid) if opts.warm_start else [grid]
        v = np.array(initial_profile(grids[0], opts.seed).values)

    it = 0
    for i, g in enumerate(grids):
        if i > 0:
            v = np.interp(g.nodes, grids[i - 1].nodes, v)
            v /= math.sqrt(float(g.weights @ (v * v)))
        fine = i == len(grids) - 1
        v, e, it, trace.converged = _run_level(v, g, beta, opts, trace, it, record=fine)
        trace.levels.append(g.n)
        log.debug("level n=%d done at iteration %d, F=%.12g", g.n, it, e)

    if trace.max_ascent > opts.ascent_tol:
        raise StepSizeError(
            f"energy rose by {trace.max_ascent:.3g} (relative) between recorded iterates; reduce the step"
        )
    prof = RadialProfile(grid, v)
    energy = evaluate_functional(prof, beta)
    return MinimizeResult(prof, energy, trace)
