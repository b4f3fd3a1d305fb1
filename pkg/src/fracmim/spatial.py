"""Fourth-order spatial stencils and pentadiagonal operator assembly.

The combined operator ``L_h = delta2x4 - deltax4`` (diffusion minus
advection) acts on interior nodes ``j = 2..M-2``.  The step matrices are
all of the form ``I - sign * c * L_h`` restricted to those nodes; their
five bands come straight from the stencil weights, which is the assembly
source of truth (the printed first-row entries exist only as a
cross-check, provenance ``PAPER_PRINTED``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, IndexRangeError, ParameterError
from .grid import Grid1D

__all__ = [
    "Provenance",
    "Pentadiagonal",
    "stencil_second",
    "stencil_first",
    "apply_Lh",
    "lh_band_weights",
    "assemble_operator_matrix",
    "matrix_A0",
    "matrix_A1",
    "matrix_A",
    "matrix_A2",
    "apply_A1",
    "apply_A2",
    "edge_moves",
    "printed_first_row",
]

_OFFSETS = (-2, -1, 0, 1, 2)


class Provenance(enum.Enum):
    STENCIL_DERIVED = "stencil"
    PAPER_PRINTED = "printed"


def _check_stencil_index(j: int, M: int) -> None:
    if not 2 <= j <= M - 2:
        raise IndexRangeError(f"stencil node j={j} outside interior 2..{M - 2}")


def stencil_second(u: np.ndarray, j: int, h: float) -> float:
    """Fourth-order second derivative at node ``j``.

    ``(1/12h^2) [-u_{j+2} + 16 u_{j+1} - 30 u_j + 16 u_{j-1} - u_{j-2}]``;
    exact for polynomials through degree 5.
    """
    u = np.asarray(u, dtype=float)
    _check_stencil_index(j, u.size - 1)
    return (
        -u[j + 2] + 16 * u[j + 1] - 30 * u[j] + 16 * u[j - 1] - u[j - 2]
    ) / (12 * h * h)


def stencil_first(u: np.ndarray, j: int, h: float) -> float:
    """Fourth-order first derivative at node ``j``.

    ``(1/12h) [-u_{j+2} + 8 u_{j+1} - 8 u_{j-1} + u_{j-2}]``; exact for
    polynomials through degree 4.
    """
    u = np.asarray(u, dtype=float)
    _check_stencil_index(j, u.size - 1)
    return (-u[j + 2] + 8 * u[j + 1] - 8 * u[j - 1] + u[j - 2]) / (12 * h)


def apply_Lh(u: np.ndarray, h: float) -> np.ndarray:
    """``(delta2x4 - deltax4) u`` on the interior nodes ``j = 2..M-2``.

    Takes the full node-aligned field and returns an array of length
    ``M - 3``.
    """
    u = np.asarray(u, dtype=float)
    if u.size < 5:
        raise DimensionError(f"field of length {u.size} has no interior stencil nodes")
    second = (
        -u[4:] + 16 * u[3:-1] - 30 * u[2:-2] + 16 * u[1:-3] - u[:-4]
    ) / (12 * h * h)
    first = (-u[4:] + 8 * u[3:-1] - 8 * u[1:-3] + u[:-4]) / (12 * h)
    return second - first


def lh_band_weights(h: float) -> dict[int, float]:
    """Constant band weights of ``L_h`` by column offset."""
    c2 = 1.0 / (12 * h * h)
    c1 = 1.0 / (12 * h)
    return {
        -2: -c2 - c1,
        -1: 16 * c2 + 8 * c1,
        0: -30 * c2,
        1: 16 * c2 - 8 * c1,
        2: -c2 + c1,
    }


@dataclass
class Pentadiagonal:
    """Five-band operator on the interior nodes, stored by diagonal.

    ``diag(off)`` holds the band at column offset ``off`` with its natural
    length ``n - |off|``.  Values are immutable after construction by
    convention (shared across threads by the march).
    """

    n: int
    bands: dict
    provenance: Provenance = Provenance.STENCIL_DERIVED

    @classmethod
    def identity(cls, n: int) -> "Pentadiagonal":
        bands = {off: np.zeros(n - abs(off)) for off in _OFFSETS if n - abs(off) > 0}
        bands[0] = np.ones(n)
        return cls(n=n, bands=bands)

    def diag(self, off: int) -> np.ndarray:
        return self.bands[off]

    def with_diagonal_shift(self, shift: np.ndarray) -> "Pentadiagonal":
        """New operator with ``shift`` added to the main diagonal."""
        shift = np.broadcast_to(np.asarray(shift, dtype=float), (self.n,))
        bands = {off: band.copy() for off, band in self.bands.items()}
        bands[0] = bands[0] + shift
        return Pentadiagonal(n=self.n, bands=bands, provenance=self.provenance)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise DimensionError(f"vector of shape {v.shape} vs matrix size {self.n}")
        out = self.bands[0] * v
        for off in (-2, -1, 1, 2):
            band = self.bands.get(off)
            if band is None or band.size == 0:
                continue
            if off > 0:
                out[: self.n - off] += band * v[off:]
            else:
                out[-off:] += band * v[: self.n + off]
        return out

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for off, band in self.bands.items():
            if band.size:
                idx = np.arange(band.size)
                rows = idx if off >= 0 else idx - off
                cols = idx + off if off >= 0 else idx
                a[rows, cols] = band
        return a

    def lapack_banded(self) -> np.ndarray:
        """LAPACK general-band storage with room for pivoting fill."""
        kl, ku = 2, 2
        ab = np.zeros((2 * kl + ku + 1, self.n))
        for off, band in self.bands.items():
            if band.size:
                cols = np.arange(band.size) + max(off, 0)
                ab[kl + ku - off, cols] = band
        return ab


def assemble_operator_matrix(grid: Grid1D, c: float, sign: int) -> Pentadiagonal:
    """Interior matrix of ``I - sign * c * L_h``.

    ``c >= 0`` is the full coefficient multiplying ``L_h`` and ``sign``
    selects whether the operator is subtracted (+1) or added (-1).
    """
    if c < 0:
        raise ParameterError(f"operator coefficient c must be >= 0, got {c}")
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign}")
    n = grid.n_interior
    w = lh_band_weights(grid.h)
    bands = {}
    for off in _OFFSETS:
        size = n - abs(off)
        if size <= 0:
            continue
        val = (1.0 if off == 0 else 0.0) - sign * c * w[off]
        bands[off] = np.full(size, val)
    return Pentadiagonal(n=n, bands=bands)


def matrix_A0(grid: Grid1D, k: float, alpha: float) -> Pentadiagonal:
    """``A0 = I - alpha*k*L_h`` (implicit half-step operator)."""
    return assemble_operator_matrix(grid, alpha * k, +1)


def matrix_A1(grid: Grid1D, k: float, alpha: float) -> Pentadiagonal:
    """``A1 = I + (1/2-alpha)*k*L_h`` (explicit half-step operator)."""
    return assemble_operator_matrix(grid, (0.5 - alpha) * k, -1)


def matrix_A(grid: Grid1D, k: float, alpha: float) -> Pentadiagonal:
    """``A = I - (1+4alpha)/4*k*L_h`` (implicit full-step operator)."""
    return assemble_operator_matrix(grid, 0.25 * (1 + 4 * alpha) * k, +1)


def matrix_A2(grid: Grid1D, k: float, alpha: float) -> Pentadiagonal:
    """``A2 = I + (1-4alpha)/4*k*L_h`` (explicit full-step operator).

    For ``alpha > 1/4`` the printed coefficient is negative; the sign is
    folded so the assembly contract ``c >= 0`` still holds.
    """
    coef = 0.25 * (1 - 4 * alpha) * k
    return assemble_operator_matrix(grid, abs(coef), -1 if coef >= 0 else +1)


def apply_A1(u_full: np.ndarray, grid: Grid1D, k: float, alpha: float) -> np.ndarray:
    """``(I + (1/2-alpha) k L_h) u`` on the interior, from the full field."""
    u_full = grid.check_field(u_full)
    return u_full[grid.interior] + (0.5 - alpha) * k * apply_Lh(u_full, grid.h)


def apply_A2(u_full: np.ndarray, grid: Grid1D, k: float, alpha: float) -> np.ndarray:
    """``(I + (1-4alpha)/4 k L_h) u`` on the interior, from the full field."""
    u_full = grid.check_field(u_full)
    return u_full[grid.interior] + 0.25 * (1 - 4 * alpha) * k * apply_Lh(
        u_full, grid.h
    )


def edge_moves(
    grid: Grid1D, c: float, sign: int, edge_values: tuple[float, float, float, float]
) -> np.ndarray:
    """Right-hand-side contribution of the known edge columns.

    For the system ``(I - sign*c*L_h) x = b`` whose unknowns are the
    interior nodes, the stencil rows at ``j = 2, 3, M-3, M-2`` touch the
    known nodes ``0, 1, M-1, M``.  Moving those columns to the right gives
    ``b += sign*c * L_h(edge-only field)`` on the interior; the identity
    part never reaches an edge column.
    """
    ef = np.zeros(grid.M + 1)
    ef[0], ef[1], ef[grid.M - 1], ef[grid.M] = edge_values
    return sign * c * apply_Lh(ef, grid.h)


EXTRAP_BOUNDARY_W = 0.25
EXTRAP_INTERIOR_W = (1.5, -1.0, 0.25)


def fold_extrapolation(P: Pentadiagonal, grid: Grid1D, c: float, sign: int) -> Pentadiagonal:
    """Eliminate the near-boundary nodes by cubic extrapolation.

    The nodes ``j = 1`` and ``j = M-1`` are expressed through the degree-3
    Lagrange polynomial over ``{0, 2, 3, 4}`` (mirrored on the right):
    ``u_1 = u_0/4 + 3/2 u_2 - u_3 + u_4/4``.  Substituting into the rows
    of ``I - sign*c*L_h`` that touch them keeps the matrix pentadiagonal;
    the boundary-value quarter stays with the right-hand side.  Needs
    ``M >= 6`` so the two closures draw on disjoint nodes.
    """
    if grid.M < 6:
        raise ParameterError(
            f"extrapolation closure needs M >= 6, got M={grid.M}"
        )
    w = lh_band_weights(grid.h)
    n = P.n
    bands = {off: band.copy() for off, band in P.bands.items()}

    def add(row: int, col: int, val: float) -> None:
        off = col - row
        idx = min(row, col)
        bands[off][idx] += val

    # row j=2 sees node 1 at stencil offset -1; row j=3 at offset -2
    for row, off in ((0, -1), (1, -2)):
        coef = -sign * c * w[off]
        for shift, wgt in enumerate(EXTRAP_INTERIOR_W):
            add(row, shift, coef * wgt)  # interior columns for nodes 2,3,4
    for row, off in ((n - 1, 1), (n - 2, 2)):
        coef = -sign * c * w[off]
        for shift, wgt in enumerate(EXTRAP_INTERIOR_W):
            add(row, n - 1 - shift, coef * wgt)  # nodes M-2, M-3, M-4
    return Pentadiagonal(n=n, bands=bands, provenance=P.provenance)


def printed_first_row(name: str, k: float, h: float, alpha: float) -> dict[int, float]:
    """First-row entries exactly as printed, for the cross-check tests.

    ``name`` selects the matrix (``A0``, ``A1``, ``A``, ``A2``); keys are
    column offsets.  Provenance ``PAPER_PRINTED``: used only to confirm the
    stencil-derived assembly, never to build operators.
    """
    hi = 1.0 / h
    if name == "A0":
        ak = alpha * k
        return {
            0: 1 + 2.5 * ak / h**2,
            1: 2 * ak / (3 * h) * (1 - 2 * hi),
            2: ak / (12 * h) * (-1 + hi),
            -1: -2 * ak / (3 * h) * (1 + 2 * hi),
            -2: ak / (12 * h) * (1 + hi),
        }
    if name == "A1":
        ck = (1 - 2 * alpha) * k
        return {
            0: 1 - 1.25 * ck / h**2,
            1: ck / (3 * h) * (-1 + 2 * hi),
            2: ck / (24 * h) * (1 - hi),
            -1: ck / (3 * h) * (1 + 2 * hi),
            -2: -ck / (24 * h) * (1 + hi),
        }
    if name == "A":
        ck = (1 + 4 * alpha) * k
        return {
            0: 1 + 0.625 * ck / h**2,
            1: ck / (6 * h) * (1 - 2 * hi),
            2: ck / (48 * h) * (-1 + hi),
            -1: -ck / (6 * h) * (1 + 2 * hi),
            -2: ck / (48 * h) * (1 + hi),
        }
    if name == "A2":
        ck = (1 - 4 * alpha) * k
        return {
            0: 1 - 0.625 * ck / h**2,
            1: ck / (6 * h) * (-1 + 2 * hi),
            2: ck / (48 * h) * (1 - hi),
            -1: ck / (6 * h) * (1 + 2 * hi),
            -2: -ck / (48 * h) * (1 + hi),
        }
    raise ParameterError(f"unknown matrix name {name!r}")
