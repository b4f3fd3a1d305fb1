"""Uniform space-time meshes, discrete difference operators and norms.

Grid functions are plain float arrays of length ``M + 1`` aligned to the
nodes ``x_j = L0 + j*h``.  All norms and inner products restrict to the
interior index set ``j = 2..M-2``; boundary values live on the field
itself.  Time levels step by half-steps ``k/2`` and are identified by the
integer half-step index ``m = 2*l`` so that level identity never depends
on floating-point comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, IndexRangeError, ParameterError

__all__ = [
    "Grid1D",
    "TimeMesh",
    "discrete_l2_norm",
    "inner_product",
    "delta_t",
    "delta_x_centered_half",
    "delta_x_halfnodes",
    "delta_x_norm",
    "sup_l2_over_time",
    "convergence_rate",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform mesh of ``M`` intervals on ``[L0, L]``.

    ``M >= 5`` so that the interior stencil nodes ``j = 2..M-2`` exist
    (the five-point stencils reach two nodes to each side).
    """

    L0: float
    L: float
    M: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.M < 5:
            raise ParameterError(f"M must be >= 5, got {self.M}")
        if not self.L > self.L0:
            raise ParameterError(f"need L > L0, got L0={self.L0}, L={self.L}")
        h = (self.L - self.L0) / self.M
        object.__setattr__(self, "h", h)
        nodes = self.L0 + h * np.arange(self.M + 1)
        nodes[-1] = self.L
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)

    @property
    def interior(self) -> slice:
        """Slice selecting the interior nodes ``j = 2..M-2``."""
        return slice(2, self.M - 1)

    @property
    def n_interior(self) -> int:
        return self.M - 3

    def check_field(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.M + 1,):
            raise DimensionError(
                f"field length {u.shape} does not match grid with M={self.M}"
            )
        return u


@dataclass(frozen=True)
class TimeMesh:
    """Half-step time axis on ``[0, T]`` with shift parameter ``alpha``.

    ``N`` full steps of size ``k = T/N``; the half-step index ``m`` labels
    the time ``m*k/2``.  The scheme evaluates coefficients at the shifted
    points ``t_{n+s+alpha} = (n+s+alpha)*k`` for ``s in {0, 1/2, 1}``;
    the shift must satisfy ``0 < alpha < 1/2`` strictly.
    """

    T: float
    N: int
    alpha: float
    k: float = field(init=False)

    def __post_init__(self):
        if self.N < 1:
            raise ParameterError(f"N must be >= 1, got {self.N}")
        if not self.T > 0:
            raise ParameterError(f"T must be positive, got {self.T}")
        if not 0.0 < self.alpha < 0.5:
            raise ParameterError(
                f"alpha must lie strictly in (0, 1/2), got {self.alpha}"
            )
        object.__setattr__(self, "k", self.T / self.N)

    def half_time(self, m: int) -> float:
        """Time of half-step index ``m`` (level ``l = m/2``)."""
        return 0.5 * m * self.k

    def shifted_time(self, n: int, s: float) -> float:
        """Shifted evaluation point ``t_{n+s+alpha}``.

        May exceed ``T`` by ``alpha*k`` at the final step; callers
        evaluate data functions there without clamping.
        """
        return (n + s + self.alpha) * self.k


def discrete_l2_norm(u: np.ndarray, grid: Grid1D) -> float:
    """Interior discrete L2 norm ``(h * sum_{j=2}^{M-2} u_j^2)^(1/2)``."""
    u = grid.check_field(u)
    core = u[grid.interior]
    return math.sqrt(grid.h * float(np.dot(core, core)))


def inner_product(u: np.ndarray, v: np.ndarray, grid: Grid1D) -> float:
    """Interior scalar product ``h * sum_{j=2}^{M-2} u_j v_j``."""
    u = grid.check_field(u)
    v = grid.check_field(v)
    return grid.h * float(np.dot(u[grid.interior], v[grid.interior]))


def delta_t(u_next: np.ndarray, u_curr: np.ndarray, k: float) -> np.ndarray:
    """Half-step forward difference ``(u^{l+1/2} - u^l) / (k/2)``."""
    if k <= 0:
        raise ParameterError(f"time step k must be positive, got {k}")
    u_next = np.asarray(u_next, dtype=float)
    u_curr = np.asarray(u_curr, dtype=float)
    if u_next.shape != u_curr.shape:
        raise DimensionError(
            f"level fields differ in shape: {u_next.shape} vs {u_curr.shape}"
        )
    return (u_next - u_curr) / (0.5 * k)


def delta_x_centered_half(u: np.ndarray, j_half: float, h: float) -> float:
    """One-sided difference at a half node, ``(u_{j+1} - u_j)/h``.

    ``j_half`` must be a half-integer ``j + 1/2``; the value is the
    difference across the two neighbouring nodes.
    """
    u = np.asarray(u, dtype=float)
    two = 2.0 * j_half
    if abs(two - round(two)) > 1e-12 or round(two) % 2 == 0:
        raise IndexRangeError(f"j_half={j_half} is not a half-integer index")
    lo = int(round(j_half - 0.5))
    hi = lo + 1
    if lo < 0 or hi >= u.size:
        raise IndexRangeError(f"half node {j_half} outside field of size {u.size}")
    return (u[hi] - u[lo]) / h


def delta_x_halfnodes(u: np.ndarray, h: float) -> np.ndarray:
    """All half-node differences ``delta_x u_{j+1/2}`` for ``j = 0..M-1``."""
    u = np.asarray(u, dtype=float)
    return np.diff(u) / h


def delta_x_norm(u: np.ndarray, grid: Grid1D) -> float:
    """Norm ``(h * sum_{j=1}^{M-2} (delta_x u_{j+1/2})^2)^(1/2)``.

    The half-node range matches the discrete inner products used by the
    operator bounds (the outermost differences are excluded).
    """
    u = grid.check_field(u)
    d = delta_x_halfnodes(u, grid.h)[1 : grid.M - 1]
    return math.sqrt(grid.h * float(np.dot(d, d)))


def sup_l2_over_time(fields, grid: Grid1D) -> float:
    """Maximum of the interior L2 norm over the supplied levels."""
    norms = [discrete_l2_norm(u, grid) for u in fields]
    if not norms:
        raise ParameterError("sup norm of an empty sequence of levels")
    return max(norms)


def convergence_rate(err_coarse: float, err_fine: float) -> float:
    """Observed order ``log2(err_coarse / err_fine)`` between two levels.

    Nonpositive errors signal exact coincidence or an invalid run and are
    rejected rather than silently producing infinities.
    """
    if err_coarse <= 0 or err_fine <= 0:
        raise ParameterError(
            f"convergence rate needs positive errors, got ({err_coarse}, {err_fine})"
        )
    return math.log2(err_coarse / err_fine)
