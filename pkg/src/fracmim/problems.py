"""Problem registry: the two published experiments plus manufactured cases.

Each :class:`ProblemSpec` bundles the domain, the order function
``beta(x, t)``, source, initial and boundary data, and optionally the
exact solution.  All registered problems have exact solutions of the
separated form ``u = (1 + t) g(x)``, whose variable-order Caputo
derivative is available in closed form; construction verifies that the
source is consistent with the exact solution by evaluating the PDE
residual at sample points.

The second experiment is printed inconsistently (its exact solution
contradicts its initial data and its source carries a sign slip on the
advection term), so its source is regenerated from the initial-data
consistent solution ``5 (1+t) sin(pi x)``; the printed source is kept
available for comparison.  Its order function exceeds 1, which violates
the stated order bounds; the problem carries a violation flag and is run
with the formulas as printed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .kernel import caputo_linear_in_time, gamma

__all__ = [
    "ProblemSpec",
    "example1",
    "example2",
    "example2_printed_f",
    "manufactured",
    "zero_problem",
    "resolve",
    "pde_residual",
    "registered_names",
]


@dataclass(frozen=True)
class ProblemSpec:
    """One initial-boundary value problem instance."""

    name: str
    L0: float
    L: float
    T: float
    beta: object  # callable (x, t) -> order
    f: object  # callable (x, t) -> source
    u0: object  # callable (x) -> initial data
    g1: object  # callable (t) -> left boundary value
    g2: object  # callable (t) -> right boundary value
    exact: object = None  # callable (x, t) -> exact solution, optional
    caputo_of_exact: object = None  # callable (x, t), closed form when known
    beta_violation: bool = False

    def __post_init__(self):
        c0 = float(self.u0(self.L0)) - float(self.g1(0.0))
        c1 = float(self.u0(self.L)) - float(self.g2(0.0))
        if abs(c0) > 1e-12 or abs(c1) > 1e-12:
            raise ParameterError(
                f"initial and boundary data disagree at the corners "
                f"({c0:.2e}, {c1:.2e})"
            )
        if self.exact is not None:
            xs = np.linspace(self.L0, self.L, 101)
            gap = np.max(np.abs(np.asarray(self.exact(xs, 0.0)) - self.u0(xs)))
            if gap > 1e-12:
                raise ParameterError(
                    f"exact solution at t=0 deviates from u0 by {gap:.2e}"
                )


def _d1(fun, x, step=1e-3):
    d = step * max(1.0, abs(x))
    return (-fun(x + 2 * d) + 8 * fun(x + d) - 8 * fun(x - d) + fun(x - 2 * d)) / (
        12 * d
    )


def _d2(fun, x, step=1e-3):
    d = step * max(1.0, abs(x))
    return (
        -fun(x + 2 * d)
        + 16 * fun(x + d)
        - 30 * fun(x)
        + 16 * fun(x - d)
        - fun(x - 2 * d)
    ) / (12 * d * d)


def pde_residual(problem: ProblemSpec, x: float, t: float) -> float:
    """Residual ``u_t + cD u + u_x - u_xx - f`` of the exact solution.

    Space and time derivatives of the exact solution are formed by
    high-order differences; the Caputo term uses the problem's closed
    form.  A consistent manufactured pair drives this to roundoff.
    """
    if problem.exact is None or problem.caputo_of_exact is None:
        raise ParameterError(f"problem {problem.name!r} has no exact/Caputo pair")
    u = problem.exact
    ut = _d1(lambda s: u(x, s), t)
    ux = _d1(lambda s: u(s, t), x)
    uxx = _d2(lambda s: u(s, t), x)
    return float(ut + problem.caputo_of_exact(x, t) + ux - uxx - problem.f(x, t))


def _verify_consistency(problem: ProblemSpec, tol: float = 1e-8) -> ProblemSpec:
    xs = np.linspace(problem.L0, problem.L, 9)[1:-1]
    ts = np.linspace(0.1, 0.9 * problem.T, 7)
    worst = max(abs(pde_residual(problem, x, t)) for x in xs for t in ts)
    if worst > tol:
        raise ParameterError(
            f"problem {problem.name!r} is inconsistent: PDE residual {worst:.3e}"
        )
    return problem


def manufactured(
    g,
    g_prime,
    g_second,
    beta,
    domain: tuple[float, float, float] = (0.0, 1.0, 1.0),
    name: str = "manufactured",
) -> ProblemSpec:
    """Problem with exact solution ``u = (1+t) g(x)`` and derived source.

    ``f = g + g * t^(1-beta)/Gamma(2-beta) + (1+t) g' - (1+t) g''``.
    ``g`` must vanish at both endpoints (homogeneous boundaries) and both
    derivative callables are required.
    """
    if g_prime is None or g_second is None:
        raise ParameterError("manufactured problems need g' and g'' callables")
    L0, L, T = domain
    if abs(float(g(L0))) > 1e-12 or abs(float(g(L))) > 1e-12:
        raise ParameterError("manufactured g(x) must vanish at both endpoints")

    def exact(x, t):
        return (1.0 + t) * g(x)

    def caputo_exact(x, t):
        return caputo_linear_in_time(g(x), beta(x, t), t)

    def f(x, t):
        return (
            g(x)
            + caputo_linear_in_time(g(x), beta(x, t), t)
            + (1.0 + t) * g_prime(x)
            - (1.0 + t) * g_second(x)
        )

    spec = ProblemSpec(
        name=name,
        L0=L0,
        L=L,
        T=T,
        beta=beta,
        f=f,
        u0=lambda x: g(x) * 1.0,
        g1=lambda t: 0.0,
        g2=lambda t: 0.0,
        exact=exact,
        caputo_of_exact=caputo_exact,
        beta_violation=bool(np.any(np.asarray(beta(np.linspace(L0, L, 33), T)) >= 1)),
    )
    return _verify_consistency(spec)


def _beta_exp(x, t):
    return 1.0 - 0.5 * np.exp(-x * t)


def _beta_trig(x, t):
    return 4.0 / 3.0 - 5e-3 * np.cos(x * t) * np.sin(x * t)


def example1() -> ProblemSpec:
    """First published experiment: ``u = 10 (1+t) x^2 (1-x)^2`` on [0,1]^2.

    Order function ``beta = 1 - e^(-xt)/2``; the source is coded exactly
    as printed and agrees with the manufactured generator.
    """

    def u0(x):
        return 10.0 * x**2 * (1.0 - x) ** 2

    def exact(x, t):
        return 10.0 * (1.0 + t) * x**2 * (1.0 - x) ** 2

    def f(x, t):
        b = _beta_exp(x, t)
        return (
            10.0 * x**2 * (1.0 - x) ** 2
            + caputo_linear_in_time(10.0 * x**2 * (1.0 - x) ** 2, b, t)
            + 10.0 * (1.0 + t) * (2.0 * x - 6.0 * x**2 + 4.0 * x**3)
            - 10.0 * (1.0 + t) * (2.0 - 12.0 * x + 12.0 * x**2)
        )

    spec = ProblemSpec(
        name="example1",
        L0=0.0,
        L=1.0,
        T=1.0,
        beta=_beta_exp,
        f=f,
        u0=u0,
        g1=lambda t: 0.0,
        g2=lambda t: 0.0,
        exact=exact,
        caputo_of_exact=lambda x, t: caputo_linear_in_time(u0(x), _beta_exp(x, t), t),
    )
    return _verify_consistency(spec)


def example2() -> ProblemSpec:
    """Second published experiment with the repaired source.

    ``u = 5 (1+t) sin(pi x)`` (consistent with the printed initial data);
    the source is regenerated from it.  ``beta = 4/3 - 0.005 cos(xt)
    sin(xt)`` exceeds 1 everywhere, so the order-bound violation flag is
    set and the formulas run as printed (experiment mode).
    """
    pi = math.pi
    spec = manufactured(
        g=lambda x: 5.0 * np.sin(pi * x),
        g_prime=lambda x: 5.0 * pi * np.cos(pi * x),
        g_second=lambda x: -5.0 * pi**2 * np.sin(pi * x),
        beta=_beta_trig,
        domain=(0.0, 1.0, 1.0),
        name="example2",
    )
    assert spec.beta_violation
    return spec


def example2_printed_f(x, t):
    """The second experiment's source exactly as printed.

    Kept for the recorded comparison with the regenerated source: its
    advection term ``-5 pi (1+t) cos(pi x)`` carries the opposite sign
    from what either printed solution candidate implies.
    """
    pi = math.pi
    b = _beta_trig(x, t)
    return (
        5.0 * (1.0 + pi**2 * (1.0 + t)) * np.sin(pi * x)
        + caputo_linear_in_time(5.0 * np.sin(pi * x), b, t)
        - 5.0 * pi * (1.0 + t) * np.cos(pi * x)
    )


def zero_problem(domain: tuple[float, float, float] = (0.0, 1.0, 1.0)) -> ProblemSpec:
    """Homogeneous problem: zero data, zero exact solution."""
    L0, L, T = domain

    def zero2(x, t):
        return np.zeros_like(np.asarray(x, dtype=float))

    return ProblemSpec(
        name="zero",
        L0=L0,
        L=L,
        T=T,
        beta=lambda x, t: np.full_like(np.asarray(x, dtype=float), 0.5),
        f=zero2,
        u0=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        g1=lambda t: 0.0,
        g2=lambda t: 0.0,
        exact=zero2,
        caputo_of_exact=zero2,
    )


def _manufactured_quartic() -> ProblemSpec:
    return manufactured(
        g=lambda x: 10.0 * x**2 * (1.0 - x) ** 2,
        g_prime=lambda x: 10.0 * (2.0 * x - 6.0 * x**2 + 4.0 * x**3),
        g_second=lambda x: 10.0 * (2.0 - 12.0 * x + 12.0 * x**2),
        beta=lambda x, t: np.full_like(np.asarray(x, dtype=float), 0.5),
        name="manufactured:quartic",
    )


def _manufactured_sine() -> ProblemSpec:
    pi = math.pi
    return manufactured(
        g=lambda x: 5.0 * np.sin(pi * x),
        g_prime=lambda x: 5.0 * pi * np.cos(pi * x),
        g_second=lambda x: -5.0 * pi**2 * np.sin(pi * x),
        beta=lambda x, t: np.full_like(np.asarray(x, dtype=float), 0.5),
        name="manufactured:sine",
    )


_REGISTRY = {
    "example1": example1,
    "example2": example2,
    "zero": zero_problem,
    "manufactured:quartic": _manufactured_quartic,
    "manufactured:sine": _manufactured_sine,
}


def registered_names() -> list[str]:
    return sorted(_REGISTRY)


def resolve(name: str) -> ProblemSpec:
    """Look a problem up by its registry name."""
    try:
        maker = _REGISTRY[name]
    except KeyError:
        raise ParameterError(
            f"unknown problem {name!r}; known: {', '.join(registered_names())}"
        ) from None
    return maker()
