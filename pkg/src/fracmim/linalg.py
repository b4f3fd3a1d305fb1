"""Direct banded LU and restarted preconditioned GMRES for the step systems.

The march factors each pentadiagonal operator once and reuses the factors
(LAPACK ``gbtrf``/``gbtrs`` with partial pivoting; the upper bandwidth
grows from 2 to at most 4).  GMRES is provided for the nonsymmetric
systems as an alternative path, with Jacobi and ILU(0) preconditioners on
the unmodified pentadiagonal sparsity pattern.  All solves are
deterministic: the initial GMRES guess is always zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .errors import (
    DimensionError,
    IterationLimitError,
    ParameterError,
    SingularMatrixError,
)
from .spatial import Pentadiagonal

__all__ = [
    "BandedLU",
    "lu_factor",
    "GmresConfig",
    "gmres_solve",
    "JacobiPreconditioner",
    "ILU0Preconditioner",
    "make_preconditioner",
]

_KL = _KU = 2


class BandedLU:
    """Pivoted LU factors of a pentadiagonal matrix.

    Immutable after construction; concurrent solves against one
    factorization are safe.
    """

    def __init__(self, P: Pentadiagonal):
        self.n = P.n
        ab = P.lapack_banded()
        row_scale = np.abs(P.to_dense()).sum(axis=1).max() if self.n else 1.0
        gbtrf, = lapack.get_lapack_funcs(("gbtrf",), (ab,))
        lu, piv, info = gbtrf(ab, _KL, _KU)
        if info > 0:
            raise SingularMatrixError(
                f"exact zero pivot at row {info} during banded factorization"
            )
        if info < 0:
            raise SingularMatrixError(f"illegal argument {-info} to gbtrf")
        # partial pivoting keeps |L| <= 1, so a pivot far below the matrix
        # scale flags effective singularity
        upper_diag = lu[_KL + _KU, :]
        if np.any(np.abs(upper_diag) <= 1e-14 * max(row_scale, 1e-300)):
            raise SingularMatrixError(
                "pivot below singularity tolerance 1e-14 * row scale"
            )
        self._lu = lu
        self._piv = piv
        self._gbtrs, = lapack.get_lapack_funcs(("gbtrs",), (lu,))

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape != (self.n,):
            raise DimensionError(f"rhs shape {b.shape} vs system size {self.n}")
        x, info = self._gbtrs(self._lu, _KL, _KU, b, self._piv)
        if info != 0:
            raise SingularMatrixError(f"gbtrs failed with info={info}")
        return x


def lu_factor(P: Pentadiagonal) -> BandedLU:
    """Factor a pentadiagonal operator with partial pivoting."""
    return BandedLU(P)


@dataclass(frozen=True)
class GmresConfig:
    restart: int = 30
    rel_tol: float = 1e-10
    max_iters: int = 2000
    preconditioner: str = "none"  # none | jacobi | ilu0

    def __post_init__(self):
        if self.restart < 1:
            raise ParameterError(f"restart must be >= 1, got {self.restart}")
        if not 0.0 < self.rel_tol < 1.0:
            raise ParameterError(f"rel_tol must lie in (0,1), got {self.rel_tol}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.preconditioner not in ("none", "jacobi", "ilu0"):
            raise ParameterError(
                f"unknown preconditioner {self.preconditioner!r}"
            )


class JacobiPreconditioner:
    """Diagonal scaling ``M^-1 v = v / diag``."""

    def __init__(self, P: Pentadiagonal):
        d = P.diag(0)
        if np.any(d == 0.0):
            raise SingularMatrixError("zero diagonal entry in Jacobi preconditioner")
        self._inv = 1.0 / d

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self._inv * v


class ILU0Preconditioner:
    """Incomplete LU on the unmodified pentadiagonal sparsity pattern.

    Fill outside the five bands is dropped; forward/backward solves run
    over the retained bands only.
    """

    def __init__(self, P: Pentadiagonal):
        n = P.n
        a = {
            off: P.bands.get(off, np.zeros(0)).astype(float).copy()
            for off in (-2, -1, 0, 1, 2)
        }

        def get(i, j):
            band = a.get(j - i)
            if band is None:
                return 0.0
            idx = min(i, j)
            return band[idx] if 0 <= idx < band.size else 0.0

        def put(i, j, val):
            a[j - i][min(i, j)] = val

        for i in range(1, n):
            for p in range(max(0, i - 2), i):
                piv = get(p, p)
                if piv == 0.0:
                    raise SingularMatrixError(f"ILU(0) zero pivot at row {p}")
                factor = get(i, p) / piv
                put(i, p, factor)
                if factor == 0.0:
                    continue
                # update retained entries of row i right of column p; values
                # of row p outside the pattern read as zero (dropped fill)
                for j in range(p + 1, min(i + 3, n)):
                    put(i, j, get(i, j) - factor * get(p, j))
        if np.any(a[0] == 0.0):
            raise SingularMatrixError("ILU(0) produced a zero diagonal")
        self.n = n
        self._a = a

    def apply(self, v: np.ndarray) -> np.ndarray:
        n, a = self.n, self._a
        y = v.astype(float).copy()
        for i in range(n):  # unit lower solve
            if i >= 1 and a[-1].size > i - 1:
                y[i] -= a[-1][i - 1] * y[i - 1]
            if i >= 2 and a[-2].size > i - 2:
                y[i] -= a[-2][i - 2] * y[i - 2]
        x = y
        for i in range(n - 1, -1, -1):  # upper solve
            if i + 1 < n and a[1].size > i:
                x[i] -= a[1][i] * x[i + 1]
            if i + 2 < n and a[2].size > i:
                x[i] -= a[2][i] * x[i + 2]
            x[i] /= a[0][i]
        return x


def make_preconditioner(P: Pentadiagonal, kind: str):
    if kind == "none":
        return None
    if kind == "jacobi":
        return JacobiPreconditioner(P)
    if kind == "ilu0":
        return ILU0Preconditioner(P)
    raise ParameterError(f"unknown preconditioner {kind!r}")


def gmres_solve(
    P: Pentadiagonal, b: np.ndarray, cfg: GmresConfig | None = None
) -> tuple[np.ndarray, int, float]:
    """Restarted GMRES with right preconditioning, starting from zero.

    Returns ``(x, iterations, relative_residual)`` where the residual is
    the true ``||P x - b|| / ||b||``.  Happy breakdown returns the exact
    solution; exceeding ``max_iters`` raises :class:`IterationLimitError`
    carrying the best iterate.
    """
    cfg = cfg or GmresConfig()
    b = np.asarray(b, dtype=float)
    if b.shape != (P.n,):
        raise DimensionError(f"rhs shape {b.shape} vs system size {P.n}")
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(P.n), 0, 0.0

    M = make_preconditioner(P, cfg.preconditioner)
    apply_M = (lambda v: v) if M is None else M.apply

    x = np.zeros(P.n)
    total_iters = 0
    m = min(cfg.restart, P.n)

    while True:
        r = b - P.matvec(x)
        beta = float(np.linalg.norm(r))
        if beta / bnorm <= cfg.rel_tol:
            return x, total_iters, beta / bnorm
        V = np.zeros((m + 1, P.n))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        V[0] = r / beta
        g[0] = beta
        k_used = 0
        for k in range(m):
            if total_iters >= cfg.max_iters:
                resid = float(np.linalg.norm(b - P.matvec(x))) / bnorm
                raise IterationLimitError(
                    f"GMRES hit the {cfg.max_iters}-iteration limit "
                    f"(relative residual {resid:.3e})",
                    best_x=x,
                    residual=resid,
                    iterations=total_iters,
                )
            w = P.matvec(apply_M(V[k]))
            for i in range(k + 1):  # modified Gram-Schmidt
                H[i, k] = float(np.dot(w, V[i]))
                w -= H[i, k] * V[i]
            H[k + 1, k] = float(np.linalg.norm(w))
            total_iters += 1
            k_used = k + 1
            happy = H[k + 1, k] <= 1e-14 * max(beta, 1.0)
            if not happy:
                V[k + 1] = w / H[k + 1, k]
            for i in range(k):  # apply stored Givens rotations
                t = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
                H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
                H[i, k] = t
            denom = np.hypot(H[k, k], H[k + 1, k])
            cs[k] = H[k, k] / denom if denom else 1.0
            sn[k] = H[k + 1, k] / denom if denom else 0.0
            H[k, k] = denom
            H[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]
            if abs(g[k + 1]) / bnorm <= cfg.rel_tol or happy:
                break
        y = np.linalg.solve(np.triu(H[:k_used, :k_used]), g[:k_used]) if k_used else \
            np.zeros(0)
        x = x + apply_M(V[:k_used].T @ y)
        resid = float(np.linalg.norm(b - P.matvec(x))) / bnorm
        if resid <= cfg.rel_tol:
            return x, total_iters, resid
        if total_iters >= cfg.max_iters:
            raise IterationLimitError(
                f"GMRES stagnated after {total_iters} iterations "
                f"(relative residual {resid:.3e})",
                best_x=x,
                residual=resid,
                iterations=total_iters,
            )
