"""Explicit minimiser ``phi(r) = a sinc(mu r) + beta / mu^2`` on ``r <= R``.

Writing ``s = mu r`` the profile is ``phi = beta/mu^2 * g(s)`` with the
universal shape ``g(s) = 1 - sinc(s) / sinc(t*)``:

* ``phi'(R) = 0`` puts ``mu R`` at a stationary point of ``sinc``, i.e.
  ``tan(mu R) = mu R``; the first one, ``t* ~= 4.4934``, is the only choice
  for which ``R`` is the first zero of ``phi``.
* ``phi(R) = 0`` then forces ``a = -beta / (mu^2 sinc(t*))``, positive
  because ``sinc(t*) = cos(t*) < 0``.
* ``||phi||_2^2 = 4 pi beta^2 mu^-7 I`` with ``I = int_0^t* g^2 s^2 ds``,
  which pins ``mu = (4 pi beta^2 I)^(1/7)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import (
    RadialGrid,
    RadialProfile,
    evaluate_functional,
    find_root,
    l2_norm,
    radial_laplacian,
)

SHAPE_QUADRATURE_NODES = 8192
DEFAULT_BOX_FACTOR = 1.5


@lru_cache(maxsize=None)
def geometry_constant() -> float:
    """Smallest positive root of ``tan t = t``."""
    delta = 1e-2
    return find_root(lambda t: math.tan(t) - t, math.pi + delta, 1.5 * math.pi - delta, tol=1e-15)


def sinc(x):
    """Unnormalised ``sin(x)/x`` with the removable singularity filled in."""
    return np.sinc(np.asarray(x, dtype=float) / math.pi)


def shape_function(s):
    """``g(s) = 1 - sinc(s)/sinc(t*)`` for ``0 <= s <= t*``, zero beyond."""
    t = geometry_constant()
    s = np.asarray(s, dtype=float)
    return np.where(s <= t, 1.0 - sinc(s) / math.cos(t), 0.0)


@lru_cache(maxsize=None)
def shape_integral(n: int = SHAPE_QUADRATURE_NODES) -> float:
    """``int_0^t* g(s)^2 s^2 ds`` by the profile quadrature."""
    grid = RadialGrid(n, geometry_constant())
    return l2_norm(RadialProfile(grid, shape_function(grid.nodes))) ** 2 / (4.0 * math.pi)


@dataclass(frozen=True)
class MinimizerParams:
    """Parameters of the explicit minimiser for one ``beta``."""

    beta: float
    a: float
    mu: float
    R: float

    @property
    def lambda_(self) -> float:
        """Lagrange multiplier of the norm constraint, ``-mu^2``."""
        return -self.mu ** 2

    @property
    def t_star(self) -> float:
        return self.mu * self.R

    @property
    def phi0(self) -> float:
        """Peak value ``phi(0) = a + beta / mu^2``."""
        return self.a + self.beta / self.mu ** 2

    def as_dict(self) -> dict:
        return {
            "beta": self.beta,
            "a": self.a,
            "mu": self.mu,
            "R": self.R,
            "lambda": self.lambda_,
            "t_star": self.t_star,
        }


def normalization(mu: float, beta: float) -> float:
    """``||phi||_2^2`` of the explicit profile with wavenumber ``mu``."""
    return 4.0 * math.pi * beta ** 2 * shape_integral() / mu ** 7


def solve_parameters(beta: float, tol: float = 1e-12, bracket: tuple[float, float] | None = None) -> MinimizerParams:
    """``(a, mu, R)`` for the minimiser of ``F_beta`` on the unit sphere.

    ``mu`` is the root of ``normalization(mu) = 1``.  The map is a pure
    power of ``mu`` so the root is taken in closed form unless ``bracket``
    is given, in which case it is found by :func:`find_root` on
    ``log normalization`` (used to check that the answer does not depend on
    how the root is located).
    """
    if not (beta > 0 and math.isfinite(beta)):
        raise ValueError(f"beta must be positive, got {beta!r}")
    t = geometry_constant()
    if bracket is None:
        mu = (4.0 * math.pi * beta ** 2 * shape_integral()) ** (1.0 / 7.0)
    else:
        lo, hi = bracket
        mu = find_root(lambda m: math.log(normalization(m, beta)), lo, hi, tol=tol * max(1.0, hi))
    a = -beta / (mu ** 2 * math.cos(t))
    return MinimizerParams(beta=float(beta), a=a, mu=mu, R=t / mu)


def eval_minimizer(params: MinimizerParams, r):
    """``phi(r)``; zero for ``r > R``.  Works on scalars and arrays."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be nonnegative")
    inside = params.a * sinc(params.mu * r) + params.beta / params.mu ** 2
    out = np.where(r <= params.R, inside, 0.0)
    return float(out) if out.ndim == 0 else out


def eval_derivative(params: MinimizerParams, r):
    """Analytic ``phi'(r)`` (zero outside the support)."""
    r = np.asarray(r, dtype=float)
    x = params.mu * r
    with np.errstate(invalid="ignore", divide="ignore"):
        dsinc = np.where(x > 1e-4, (x * np.cos(x) - np.sin(x)) / (x * x), -x / 3.0)
    out = np.where(r <= params.R, params.a * params.mu * dsinc, 0.0)
    return float(out) if out.ndim == 0 else out


def default_grid(params: MinimizerParams, n: int = 4096, factor: float = DEFAULT_BOX_FACTOR) -> RadialGrid:
    return RadialGrid(n, factor * params.R)


def sample(params: MinimizerParams, grid: RadialGrid) -> RadialProfile:
    if grid.r_max < params.R:
        warnings.warn(
            f"grid r_max={grid.r_max:g} truncates the support R={params.R:g}",
            RuntimeWarning,
            stacklevel=2,
        )
    return RadialProfile(grid, eval_minimizer(params, grid.nodes))


def helmholtz_residual(p: RadialProfile, params: MinimizerParams) -> float:
    """``L^2`` norm of ``p'' + 2p'/r + mu^2 p - beta`` over ``0 < r < R - h``."""
    r = p.grid.nodes
    res = radial_laplacian(p) + params.mu ** 2 * p.values - params.beta
    mask = (r > 0) & (r < params.R - p.grid.h)
    return math.sqrt(float(p.grid.weights[mask] @ (res[mask] ** 2)))


def boundary_report(params: MinimizerParams) -> dict:
    lam = params.lambda_
    return {
        "phi_R": eval_minimizer(params, params.R),
        "dphi_R": eval_derivative(params, params.R),
        "lambda": lam,
        "lambda_sign": "negative" if lam < 0 else ("zero" if lam == 0 else "positive"),
    }


def solve_report(beta: float, n: int = 4096, box_factor: float = DEFAULT_BOX_FACTOR) -> tuple[MinimizerParams, RadialProfile, dict]:
    """Parameters, sampled profile and the flat JSON-ready summary."""
    params = solve_parameters(beta)
    prof = sample(params, default_grid(params, n, box_factor))
    e = evaluate_functional(prof, beta)
    lhs, rhs = 2.0 * e.kinetic, 1.5 * beta * e.l1
    bnd = boundary_report(params)
    report = params.as_dict()
    report.update(
        n=n,
        r_max=prof.grid.r_max,
        F_total=e.total,
        kinetic=e.kinetic,
        l1=e.l1,
        l2=e.l2,
        virial_relerr=abs(lhs - rhs) / max(lhs, rhs),
        helmholtz_residual=helmholtz_residual(prof, params),
        phi_R=bnd["phi_R"],
        dphi_R=bnd["dphi_R"],
    )
    return params, prof, report
