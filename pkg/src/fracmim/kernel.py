"""Generalized coefficient sequences and discrete variable-order Caputo sums.

Two families of quadrature weights drive the non-local part of the march:

* ``Family.HALF`` -- leading printed index ``n + 1/2``; weights the sum
  approximating the Caputo derivative at ``t_{n+1/2+alpha}`` over the
  half-step differences ``l = 0, 1/2, ..., n``.
* ``Family.INT`` -- leading printed index ``n + 1``; weights the sum at
  ``t_{n+1+alpha}`` over ``l = 0, 1/2, ..., n+1/2``.

Both families reduce to power differences of the two building blocks
``dtilde`` and ``ftilde``.  Coefficients accept a scalar order ``beta``
or an array of per-node orders ``beta(x_j, t)`` evaluated at the shifted
time the superscripts prescribe.

Entries are addressed two ways: ``a_coeff`` takes the printed second
subscript (``1/2, 1, ..., n+s``), while the arrays returned by
``coeff_family`` are positional with ``position p = 2*l_subscript - 1``,
which equals the half-step lag index of the difference it multiplies.
"""

from __future__ import annotations

import enum

import numpy as np
from scipy.special import gamma

from .errors import (
    DimensionError,
    DomainError,
    HistoryError,
    IndexRangeError,
    ParameterError,
    QuadratureError,
)

__all__ = [
    "Family",
    "dtilde",
    "ftilde",
    "ftilde_last",
    "fdot_first",
    "ftilde_first_half",
    "coeff_family",
    "a_coeff",
    "theta_weights",
    "theta0",
    "HistoryBuffer",
    "discrete_caputo",
    "caputo_quadrature_oracle",
    "caputo_linear_in_time",
    "gamma",
]


class Family(enum.Enum):
    """Which generalized sequence a coefficient belongs to."""

    HALF = "half"  # leading index n + 1/2
    INT = "int"  # leading index n + 1


def _as_beta(beta):
    b = np.asarray(beta, dtype=float)
    if np.any(b >= 2.0) or np.any(b <= 0.0):
        raise DomainError(f"order beta must lie in (0, 2), got {beta}")
    return b


def dtilde(n_eff: float, i: int, alpha: float, beta) -> np.ndarray | float:
    """Power difference ``(n_eff+a-i)^(1-b) - (n_eff+a-i-1)^(1-b)``.

    ``n_eff`` is the family's leading printed index (``n`` for the HALF
    forms, ``n+1`` for the INT forms).
    """
    beta = _as_beta(beta)
    b1 = n_eff + alpha - i
    b0 = b1 - 1.0
    if b0 < 0:
        raise DomainError(f"negative power base {b0} in dtilde(n_eff={n_eff}, i={i})")
    e = 1.0 - beta
    return b1**e - b0**e


def ftilde(n_eff: float, i: int, alpha: float, beta) -> np.ndarray | float:
    """The interior quadratic-interpolation weight.

    ``2/(2-b) * [(n_eff+a-i)^(2-b) - (n_eff+a-i-1)^(2-b)]
    - 1/2 * [(n_eff+a-i)^(1-b) + 3*(n_eff+a-i-1)^(1-b)]``.
    """
    beta = _as_beta(beta)
    b1 = n_eff + alpha - i
    b0 = b1 - 1.0
    if b0 < 0:
        raise DomainError(f"negative power base {b0} in ftilde(n_eff={n_eff}, i={i})")
    e1 = 1.0 - beta
    p1a, p0a = b1**e1, b0**e1
    return (2.0 / (2.0 - beta)) * (b1 * p1a - b0 * p0a) - 0.5 * (p1a + 3.0 * p0a)


def ftilde_last(alpha: float, beta) -> np.ndarray | float:
    """Endpoint weight ``alpha^(1-beta)`` (printed second index = leading index)."""
    beta = _as_beta(beta)
    return alpha ** (1.0 - beta)


def fdot_first(n: int, alpha: float, beta) -> np.ndarray | float:
    """Leading HALF-family weight ``(n+1/2+a)^(1-b) - (n+a)^(1-b)`` for n >= 1.

    This is the "f-dot" form; it differs from :func:`ftilde_first_half`
    and the two are selected by the family case tables, never conflated.
    """
    beta = _as_beta(beta)
    e = 1.0 - beta
    return (n + 0.5 + alpha) ** e - (n + alpha) ** e


def ftilde_first_half(alpha: float, beta) -> np.ndarray | float:
    """The ``(1/2+alpha)^(1-beta)`` seed printed alongside the f-dot form."""
    beta = _as_beta(beta)
    return (0.5 + alpha) ** (1.0 - beta)


def _power_pair(bases: np.ndarray, one_minus_beta: np.ndarray):
    """``bases**(1-b)`` and ``bases**(2-b)`` for every (base, node) pair.

    ``bases`` has shape (L,); ``one_minus_beta`` is scalar or (J,).  The
    second power reuses the first (``b**(2-beta) = b * b**(1-beta)``) to
    halve the transcendental work on the O(N^2 M) march path.
    """
    log_b = np.log(bases)
    if one_minus_beta.ndim == 0:
        pa = np.exp(log_b * float(one_minus_beta))
        return pa, bases * pa
    pa = np.exp(np.multiply.outer(log_b, one_minus_beta))
    return pa, bases[:, None] * pa


def coeff_family(family: Family, n: int, alpha: float, beta) -> np.ndarray:
    """Full coefficient sequence of one family at level ``n``.

    Returns positions ``p = 0 .. count-1`` where position ``p`` weights the
    half-step difference of lag index ``p`` (sum index ``l = p/2``):
    ``count = 2n+1`` for HALF, ``2n+2`` for INT.  ``beta`` may be a scalar
    or a per-node array, giving shape ``(count,)`` or ``(count, J)``.
    """
    if n < 0:
        raise IndexRangeError(f"family level n must be >= 0, got {n}")
    if not 0.0 < alpha < 0.5:
        raise ParameterError(f"alpha must lie in (0, 1/2), got {alpha}")
    beta = _as_beta(beta)
    e1 = 1.0 - beta
    tail = alpha**e1  # endpoint weight alpha^(1-beta)

    if family is Family.HALF:
        if n == 0:
            seed = 0.5 * alpha ** (-beta)
            return seed[None, ...].copy() if beta.ndim else np.array([seed])
        lags = np.arange(n, dtype=float)  # generic i = 0..n-1
        b1 = n + alpha - lags
        first = fdot_first(n, alpha, beta)
    elif family is Family.INT:
        lags = np.arange(n + 1, dtype=float)  # generic i = 0..n
        b1 = n + 1 + alpha - lags
        first = None
    else:
        raise ParameterError(f"unknown family {family!r}")

    p1a, p1b = _power_pair(b1, e1)
    p0a, p0b = _power_pair(b1 - 1.0, e1)
    d = p1a - p0a
    f = (2.0 / (2.0 - beta)) * (p1b - p0b) - 0.5 * (p1a + 3.0 * p0a)

    count = 2 * n + 1 if family is Family.HALF else 2 * n + 2
    out = np.empty((count,) + beta.shape, dtype=float)
    if family is Family.HALF:
        # panel [t_{i+1/2}, t_{i+3/2}]: left difference gets d-f, right
        # difference gets f; the leading half panel [0, t_{1/2}] weights
        # delta_t u^0 alone.  Assigning the cases the other way around
        # breaks the telescoping sum the consistency order rests on.
        out[0] = first
        out[1 : 2 * n : 2] = d - f  # subscript l = 1, 2, ..., n
        out[2 : 2 * n - 1 : 2] = f[:-1]  # subscript l = 3/2, ..., n-1/2
        out[2 * n] = f[-1] + tail  # endpoint subscript l = n+1/2
    else:
        out[0 : 2 * n + 1 : 2] = d - f  # subscript l = 1/2, 3/2, ..., n+1/2
        out[1 : 2 * n : 2] = f[:-1]  # subscript l = 1, 2, ..., n
        out[2 * n + 1] = f[-1] + tail  # endpoint subscript l = n+1
    return out


def _subscript_position(l) -> int:
    """Printed second subscript (1/2, 1, 3/2, ...) -> array position."""
    two_l = 2.0 * float(l)
    if abs(two_l - round(two_l)) > 1e-12:
        raise IndexRangeError(f"coefficient subscript {l} is not a half-integer")
    p = int(round(two_l)) - 1
    if p < 0:
        raise IndexRangeError(f"coefficient subscript {l} below 1/2")
    return p


def a_coeff(family: Family, n: int, l, alpha: float, beta) -> float:
    """Single coefficient ``a_{n+s, l}``, addressed by printed subscript.

    ``l`` runs over ``1/2, 1, ..., n+1/2`` (HALF) or ``1/2, ..., n+1``
    (INT); out-of-range subscripts raise :class:`IndexRangeError`.
    """
    p = _subscript_position(l)
    seq = coeff_family(family, n, alpha, beta)
    if p >= seq.shape[0]:
        raise IndexRangeError(
            f"subscript {l} outside family range (max {(seq.shape[0]) / 2})"
        )
    return seq[p]


def theta_weights(family: Family, n: int, k: float, alpha: float, beta) -> np.ndarray:
    """Scaled weights ``theta = k^(1-beta) Gamma(2-beta)^(-1) * a``.

    Shape matches :func:`coeff_family`; a per-node ``beta`` yields one
    weight column per node, evaluated at the shifted time the caller
    sampled ``beta`` at.
    """
    if k <= 0:
        raise ParameterError(f"time step k must be positive, got {k}")
    beta = _as_beta(beta)
    scale = k ** (1.0 - beta) / gamma(2.0 - beta)
    return coeff_family(family, n, alpha, beta) * scale


def theta0(k: float, alpha: float, beta) -> np.ndarray | float:
    """Starting weight ``k^(1-b) Gamma(2-b)^(-1) * (1/2) alpha^(-b)``."""
    if k <= 0:
        raise ParameterError(f"time step k must be positive, got {k}")
    beta = _as_beta(beta)
    return k ** (1.0 - beta) / gamma(2.0 - beta) * 0.5 * alpha ** (-beta)


class HistoryBuffer:
    """Append-only store of the half-step differences ``delta_t U^l``.

    Entry ``p`` is the difference between the fields at half-step indices
    ``p+1`` and ``p``; the march appends one entry per solve and never
    mutates past entries.  Single writer; reads between steps are safe.
    """

    def __init__(self, width: int, capacity: int = 16):
        self._width = int(width)
        self._buf = np.empty((max(capacity, 1), self._width), dtype=float)
        self._count = 0

    def __len__(self) -> int:
        return self._count

    @property
    def width(self) -> int:
        return self._width

    def append(self, delta: np.ndarray) -> None:
        delta = np.asarray(delta, dtype=float)
        if delta.shape != (self._width,):
            raise DimensionError(
                f"delta of shape {delta.shape} does not fit buffer width {self._width}"
            )
        if self._count == self._buf.shape[0]:
            grown = np.empty((2 * self._buf.shape[0], self._width), dtype=float)
            grown[: self._count] = self._buf[: self._count]
            self._buf = grown
        self._buf[self._count] = delta
        self._count += 1

    def view(self, p: int | None = None) -> np.ndarray:
        """Read-only matrix of the first ``p`` differences (rows = lags)."""
        p = self._count if p is None else int(p)
        if p > self._count:
            raise HistoryError(
                f"history holds {self._count} half-step differences, need {p}"
            )
        out = self._buf[:p]
        out.flags.writeable = False
        return out


def discrete_caputo(history: HistoryBuffer, theta: np.ndarray, node: int | None = None):
    """Caputo sum ``sum_p theta_p * delta_t u^p`` over the stored history.

    ``theta`` is a weight vector ``(P,)`` applied at a single ``node``
    column, or a matrix ``(P, width)`` applied columnwise (``node=None``).
    Requires at least ``P`` stored differences.
    """
    theta = np.asarray(theta, dtype=float)
    deltas = history.view(theta.shape[0])
    if theta.ndim == 1:
        if node is None:
            raise ParameterError("scalar theta weights need a node index")
        return float(np.dot(theta, deltas[:, node]))
    if theta.shape != deltas.shape:
        raise DimensionError(
            f"theta matrix {theta.shape} does not match history {deltas.shape}"
        )
    return np.einsum("pj,pj->j", theta, deltas)


def _central_derivative(u, t: float, step: float = 1e-3):
    """Fourth-order five-point derivative of a callable."""
    d = step * max(1.0, abs(t))
    return (-u(t + 2 * d) + 8 * u(t + d) - 8 * u(t - d) + u(t - 2 * d)) / (12 * d)


def caputo_quadrature_oracle(
    u,
    beta: float,
    t_target: float,
    subdivisions: int = 400,
    du=None,
) -> float:
    """Reference value of the Caputo derivative by deterministic quadrature.

    Integrates ``Gamma(1-b)^(-1) * int_0^t u'(s) (t-s)^(-b) ds`` after the
    substitution ``w = (t-s)^(1-b)``, which removes the endpoint
    singularity exactly:

        value = Gamma(2-b)^(-1) * int_0^(t^(1-b)) u'(t - w^(1/(1-b))) dw

    Composite 8-point Gauss-Legendre on panels graded toward ``w = 0``;
    the result is accepted only if doubling the panel count moves it by
    less than ``1e-8`` relative.  ``du`` may supply the exact derivative;
    otherwise a high-order difference of ``u`` is used (``u`` must then be
    evaluable slightly outside ``[0, t_target]``).
    """
    if not 0.0 < beta < 1.0:
        raise DomainError(f"quadrature oracle needs beta in (0,1), got {beta}")
    if subdivisions < 100:
        raise ParameterError(f"subdivisions must be >= 100, got {subdivisions}")
    if t_target < 0:
        raise DomainError(f"t_target must be >= 0, got {t_target}")
    if t_target == 0.0:
        return 0.0

    uprime = du if du is not None else (lambda s: _central_derivative(u, s))
    q = 1.0 / (1.0 - beta)
    w_max = t_target ** (1.0 - beta)
    gl_x, gl_w = np.polynomial.legendre.leggauss(8)

    def integrate(n_panels: int) -> float:
        # quadratic grading clusters panels at w=0 where smoothness is lowest
        edges = w_max * (np.arange(n_panels + 1) / n_panels) ** 2
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        w = mid[:, None] + half[:, None] * gl_x[None, :]
        s = t_target - w**q
        vals = np.array([uprime(si) for si in s.ravel()]).reshape(s.shape)
        return float(np.sum(vals * gl_w[None, :] * half[:, None])) / gamma(2.0 - beta)

    coarse = integrate(subdivisions)
    fine = integrate(2 * subdivisions)
    resid = abs(fine - coarse) / max(abs(fine), 1e-300)
    if resid > 1e-8 and abs(fine - coarse) > 1e-14:
        raise QuadratureError(
            f"Caputo quadrature did not converge (relative change {resid:.3e})",
            residual=resid,
        )
    return fine


def caputo_linear_in_time(g_value, beta, t):
    """Closed-form Caputo derivative of ``u = (1+t) g(x)``.

    ``cD u = g(x) * t^(1-beta) / Gamma(2-beta)`` with the order frozen at
    the evaluation point.  Valid for ``beta < 1``; for the experiment-mode
    orders ``beta >= 1`` the same formula is returned for ``t > 0`` (it
    diverges as ``t -> 0`` and the limit value at ``t = 0`` is infinite).
    """
    g_value = np.asarray(g_value, dtype=float)
    beta = np.asarray(beta, dtype=float)
    t = np.asarray(t, dtype=float)
    e = 1.0 - beta
    pos = t > 0
    tpow = np.empty(np.broadcast(t, e).shape, dtype=float)
    tpow[...] = np.where(np.broadcast_to(e > 0, tpow.shape), 0.0, np.inf)
    if np.any(pos):
        tb, eb = np.broadcast_arrays(t, e)
        mask = np.broadcast_to(pos, tpow.shape)
        tpow[mask] = tb[mask] ** eb[mask]
    return g_value * tpow / gamma(2.0 - beta)
