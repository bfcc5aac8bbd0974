"""Radial grids, quadrature and energy evaluation for radial fields on R^3.

A profile ``v`` on a uniform grid ``0 = r_0 < ... < r_{n-1} = r_max`` is read
as the piecewise-constant field that takes the value ``v_i`` on the *dual
cell* ``[r_i - h/2, r_i + h/2]`` (clipped to ``[0, r_max]``).  Norms are
integrals of that field, with the ``r^2`` weight integrated exactly, so every
weight is a true shell volume::

    int f(|x|) d^3x  ~=  sum_i f(v_i) * w_i,   w_i = 4 pi / 3 (hi_i^3 - lo_i^3)

The Dirichlet energy is the flux form on the primal cells, with the face
weight ``r_{i+1/2}^2`` taken at the cell midpoint.  Paired with the dual-cell
weights this gives the conservative radial Laplacian, which is exact on
``r^2`` at every node (including ``Delta = 3 p''(0)`` at the origin) and is
the exact discrete gradient of :func:`kinetic_energy`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .exceptions import BracketError, EvaluationError

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid on ``[0, r_max]`` with ``n`` nodes."""

    n: int
    r_max: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"grid needs at least 2 nodes, got n={self.n!r}")
        if not (math.isfinite(self.r_max) and self.r_max > 0):
            raise ValueError(f"r_max must be positive and finite, got {self.r_max!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "r_max", float(self.r_max))

    @cached_property
    def h(self) -> float:
        return self.r_max / (self.n - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        r = np.arange(self.n) * self.h
        r[-1] = self.r_max
        r.flags.writeable = False
        return r

    @cached_property
    def cell_edges(self) -> np.ndarray:
        """Dual-cell boundaries ``0, h/2, 3h/2, ..., r_max`` (length n+1)."""
        e = np.empty(self.n + 1)
        e[0] = 0.0
        e[1:-1] = (np.arange(self.n - 1) + 0.5) * self.h
        e[-1] = self.r_max
        e.flags.writeable = False
        return e

    @cached_property
    def weights(self) -> np.ndarray:
        """Dual-cell volumes; they sum to the ball volume exactly."""
        e3 = self.cell_edges ** 3
        w = (FOUR_PI / 3.0) * np.diff(e3)
        w.flags.writeable = False
        return w

    @cached_property
    def face_weights(self) -> np.ndarray:
        """``4 pi r_{i+1/2}^2 / h`` for each primal cell (length n-1)."""
        f = FOUR_PI * ((np.arange(self.n - 1) + 0.5) * self.h) ** 2 / self.h
        f.flags.writeable = False
        return f

    @property
    def volume(self) -> float:
        return FOUR_PI / 3.0 * self.r_max ** 3

    def refine(self, factor: int = 2) -> "RadialGrid":
        """Grid with ``factor`` times as many cells on the same interval."""
        return RadialGrid(factor * (self.n - 1) + 1, self.r_max)


@dataclass(frozen=True)
class RadialProfile:
    """Samples ``v_i ~= phi(r_i)`` of a spherically symmetric field."""

    grid: RadialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(
                f"expected {self.grid.n} values for this grid, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    @classmethod
    def from_function(cls, grid: RadialGrid, fn: Callable) -> "RadialProfile":
        return cls(grid, np.broadcast_to(fn(grid.nodes), (grid.n,)))

    def with_values(self, values) -> "RadialProfile":
        return RadialProfile(self.grid, values)

    def __mul__(self, c: float) -> "RadialProfile":
        return RadialProfile(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class EnergyBreakdown:
    """Norms of a profile and the value of ``F_beta`` built from them."""

    kinetic: float
    l1: float
    l2: float
    beta: float
    total: float
    h1: float
    composite: float

    @property
    def dirichlet(self) -> float:
        """``||grad phi||_2^2``, i.e. twice the kinetic term."""
        return 2.0 * self.kinetic

    @property
    def auxiliary(self) -> float:
        """``1/2 ||phi||_{H^1}^2 + beta ||phi||_1``; differs from ``total`` by
        ``l2^2 / 2`` and so has the same minimisers on the unit sphere."""
        return 0.5 * self.h1 ** 2 + self.beta * self.l1

    def as_dict(self) -> dict:
        return {
            "beta": self.beta,
            "total": self.total,
            "kinetic": self.kinetic,
            "l1": self.l1,
            "l2": self.l2,
            "h1": self.h1,
            "composite": self.composite,
        }


def integrate(p: RadialProfile, fn: Callable[[np.ndarray], np.ndarray] | None = None) -> float:
    """``int fn(phi(|x|)) d^3x`` over the ball of radius ``r_max``."""
    v = p.values if fn is None else fn(p.values)
    return float(p.grid.weights @ v)


def l2_norm(p: RadialProfile) -> float:
    v = p.values
    return math.sqrt(float(p.grid.weights @ (v * v)))


def l1_norm(p: RadialProfile) -> float:
    return float(p.grid.weights @ np.abs(p.values))


def kinetic_energy(p: RadialProfile) -> float:
    """``1/2 ||grad phi||_2^2`` from cell differences."""
    if p.grid.n < 3:
        raise ValueError("kinetic energy needs at least 3 nodes")
    d = np.diff(p.values)
    return 0.5 * float(p.grid.face_weights @ (d * d))


def radial_laplacian(p: RadialProfile) -> np.ndarray:
    """Conservative ``p'' + 2 p' / r`` at every node.

    The outer node uses a zero-flux closure, so ``-radial_laplacian`` is the
    gradient of :func:`kinetic_energy` in the inner product
    ``<u, v> = sum_i w_i u_i v_i``.
    """
    flux = p.grid.face_weights * np.diff(p.values)
    div = np.zeros(p.grid.n)
    div[:-1] += flux
    div[1:] -= flux
    return div / p.grid.weights


def inner(p: RadialProfile, q: RadialProfile | np.ndarray) -> float:
    """Discrete ``L^2(R^3)`` inner product matching the norms above."""
    qv = q.values if isinstance(q, RadialProfile) else np.asarray(q)
    return float(p.grid.weights @ (p.values * qv))


def evaluate_functional(p: RadialProfile, beta: float) -> EnergyBreakdown:
    """All norms of ``p`` and ``F_beta(p) = kinetic + beta * ||p||_1``."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    kin = kinetic_energy(p)
    l1 = l1_norm(p)
    l2 = l2_norm(p)
    h1_sq = l2 * l2 + 2.0 * kin
    return EnergyBreakdown(
        kinetic=kin,
        l1=l1,
        l2=l2,
        beta=float(beta),
        total=kin + beta * l1,
        h1=math.sqrt(h1_sq),
        composite=math.sqrt(h1_sq + l1 * l1),
    )


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Root of ``f`` in a sign-changing bracket ``[lo, hi]``.

    Brent's method (bisection safeguarded inverse-quadratic/secant steps);
    the returned point lies within ``tol`` of a sign change of ``f``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")

    def checked(x):
        y = f(x)
        if not math.isfinite(y):
            raise EvaluationError(f"f({x!r}) = {y!r}")
        return y

    flo, fhi = checked(lo), checked(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if (flo > 0) == (fhi > 0):
        raise BracketError(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={flo!r}, f(hi)={fhi!r}"
        )
    return float(brentq(checked, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500))
