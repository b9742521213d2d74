"""Shared numerical kernels.

Complex cubic roots, adaptive complex-valued initial-value integration,
quadrature with square-root endpoint singularities, and complex Newton
iteration. Everything here is a pure function of its inputs.
"""

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import complex_ode, quad

from .errors import (
    DegeneratePolynomial,
    IntegrationFailed,
    NoConvergence,
    NonConvergent,
    RhsNonFinite,
    StepLimitExceeded,
)

__all__ = [
    "ToleranceConfig",
    "OdeSpec",
    "solve_cubic_complex",
    "integrate_complex_ivp",
    "singular_quadrature",
    "newton_complex",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Error-control knobs used by the iterative kernels."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be > 0")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass
class OdeSpec:
    """First-order complex IVP: state' = rhs(t, state), state(t0) given.

    ``max_step`` caps the internal step size; useful when the accepted
    steps feed an interpolant and must stay dense.
    """

    dimension: int
    rhs: Callable[[float, np.ndarray], Sequence[complex]]
    initial_state: Sequence[complex]
    t0: float
    t1: float
    tolerance: float = 1e-12
    max_steps: int = 1_000_000
    max_step: Optional[float] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.t1 == self.t0:
            raise ValueError("t1 must differ from t0")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError("max_step must be > 0 when given")
        state = np.asarray(self.initial_state, dtype=complex)
        if state.shape != (self.dimension,):
            raise ValueError(
                f"initial_state has shape {state.shape}, expected ({self.dimension},)"
            )
        self.initial_state = state


def solve_cubic_complex(c3: complex, c2: complex, c1: complex, c0: complex):
    """Roots of c3 z^3 + c2 z^2 + c1 z + c0, sorted by (Re, Im) ascending.

    Companion-matrix roots polished by a few Newton steps so that the
    residual satisfies |P(r)| <= 1e-12 * max(1, |r|^3) for each root.

    Returns
    -------
    (r1, r2, r3) : tuple of complex
    """
    if c3 == 0:
        raise DegeneratePolynomial("leading cubic coefficient c3 is zero")
    coeffs = np.array([c3, c2, c1, c0], dtype=complex)
    roots = np.roots(coeffs)

    dcoeffs = np.array([3 * c3, 2 * c2, c1], dtype=complex)
    for _ in range(3):
        p = np.polyval(coeffs, roots)
        dp = np.polyval(dcoeffs, roots)
        # skip polishing where the derivative is tiny (multiple roots):
        # the residual there is already quadratically small
        safe = np.abs(dp) > 1e3 * np.abs(p)
        step = np.zeros_like(roots)
        step[safe] = p[safe] / dp[safe]
        roots = roots - step

    ordered = sorted(roots, key=lambda z: (z.real, z.imag))
    return tuple(complex(z) for z in ordered)


def integrate_complex_ivp(spec: OdeSpec, observer: Optional[Callable] = None):
    """Adaptive integration of a complex-valued IVP.

    Uses an embedded Runge-Kutta pair of order 8(5,3) with the complex
    state carried as paired reals. Returns the accepted-step sequence
    ``[(t, state), ...]`` with strictly monotone t (increasing when
    t1 > t0, decreasing otherwise); ``observer(t, state)`` is invoked
    once per accepted step.

    Raises
    ------
    StepLimitExceeded
        Step budget exhausted before reaching t1.
    RhsNonFinite
        The right-hand side produced a non-finite value.
    """
    nonfinite = []

    def wrapped(t, y):
        dy = np.asarray(spec.rhs(t, y), dtype=complex)
        if not np.all(np.isfinite(dy.view(float))):
            nonfinite.append(t)
            return np.zeros_like(dy)
        return dy

    records = []

    def solout(t, y):
        state = y.copy()
        records.append((t, state))
        if observer is not None:
            observer(t, state)

    solver = complex_ode(wrapped)
    options = dict(rtol=spec.tolerance, atol=spec.tolerance, nsteps=spec.max_steps)
    if spec.max_step is not None:
        options["max_step"] = spec.max_step
    solver.set_integrator("dop853", **options)
    solver.set_solout(solout)
    solver.set_initial_value(spec.initial_state, spec.t0)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        solver.integrate(spec.t1)

    if nonfinite:
        raise RhsNonFinite(f"rhs returned non-finite values near t={nonfinite[0]!r}")
    if not solver.successful():
        messages = "; ".join(str(w.message) for w in caught)
        if "nsteps" in messages:
            raise StepLimitExceeded(
                f"step budget {spec.max_steps} exhausted at t={solver.t!r} ({messages})"
            )
        raise IntegrationFailed(messages or "integration failed")
    return records


def singular_quadrature(
    f: Callable[[float], float],
    a: float,
    b: float,
    endpoint_exponent: float = 0.5,
    rel_tol: float = 1e-10,
) -> float:
    """Integrate f over [a, b] allowing (x-a)^p / (b-x)^p endpoint behavior.

    The interval is split at the midpoint and each half is mapped by the
    power substitution x = a + u^(1/p) (mirrored on the right), which turns
    an endpoint factor (x-a)^p into a smooth integrand. The default
    p = 1/2 handles the square-root vanishing of classical momenta at
    turning points; integrable inverse square roots are healed as well.

    Raises
    ------
    NonConvergent
        If the quadrature error estimate exceeds ``rel_tol`` relative to
        the result.
    """
    if not a < b:
        raise ValueError("require a < b")
    p = endpoint_exponent
    if not 0 < p <= 1:
        raise ValueError("endpoint_exponent must lie in (0, 1]")
    inv = 1.0 / p
    mid = 0.5 * (a + b)
    half = mid - a

    def left(u):
        x = a + u**inv
        return f(x) * inv * u ** (inv - 1.0)

    def right(u):
        x = b - u**inv
        return f(x) * inv * u ** (inv - 1.0)

    u_max = half**p
    val = 0.0
    err = 0.0
    for g in (left, right):
        v, e = quad(g, 0.0, u_max, epsabs=1e-300, epsrel=0.1 * rel_tol, limit=200)
        val += v
        err += e
    if err > rel_tol * max(1e-300, abs(val)) and err > 1e-15:
        raise NonConvergent(
            f"quadrature error estimate {err:.3e} exceeds rel_tol={rel_tol:.1e} "
            f"(value {val!r})"
        )
    return val


def newton_complex(
    f: Callable[[complex], complex],
    guess: complex,
    tol: float = 1e-12,
    df: Optional[Callable[[complex], complex]] = None,
    max_steps: int = 60,
) -> complex:
    """Newton iteration for an analytic f, derivative by central difference.

    Returns z with |f(z)| < tol. On failure raises :class:`NoConvergence`
    carrying the best iterate seen and its residual.
    """
    z = complex(guess)
    best = z
    best_res = abs(f(z))
    for it in range(max_steps):
        fz = f(z)
        res = abs(fz)
        if res < best_res:
            best, best_res = z, res
        if res < tol:
            return z
        if df is not None:
            d = df(z)
        else:
            h = 1e-7 * max(1.0, abs(z))
            d = (f(z + h) - f(z - h)) / (2.0 * h)
        if d == 0 or not np.isfinite(abs(d)):
            break
        z = z - fz / d
        if not np.isfinite(abs(z)):
            break
    raise NoConvergence(
        f"no root with |f| < {tol:.1e} after {max_steps} steps "
        f"(best residual {best_res:.3e} at {best!r})",
        best=best,
        residual=best_res,
        iterations=max_steps,
    )
