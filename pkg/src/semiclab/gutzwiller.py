"""Periodic-orbit response function and its complex-energy poles.

The repetition sum over one unstable periodic orbit,

    g(E) ~ -i T(E)/(2 hbar) * sum_{n>=1} exp{i n [S(E)/hbar - lam pi/2]}
                                         / sinh[n w(E)/2],

can be resummed with 1/sinh(x) = 2 e^-x sum_k e^-2kx into a double
geometric series, which exposes simple poles at every complex energy
satisfying

    S(E) = hbar lam pi/2 - i hbar w(E) (k + 1/2) + 2 pi s hbar,
    k, s = 0, 1, 2, ...

For w > 0 every pole sits strictly below the real axis, so none of them
is a bound-state energy. Orbit data (action, instability exponent,
period) are supplied as closed-form maps; two model families with exactly
solvable pole grids are provided for verification.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import TruncationNotConverged
from .numerics import newton_complex

__all__ = [
    "GutzwillerOrbit",
    "PoleIndex",
    "ResponseValue",
    "linear_orbit",
    "affine_orbit",
    "response_function",
    "pole_condition_residual",
    "find_pole",
]


@dataclass(frozen=True)
class GutzwillerOrbit:
    """Closed-form orbit data entering the repetition sum.

    ``action``, ``instability`` and ``period`` must accept complex energy.
    Consistency T = dS/dE is checked by :meth:`check_period_consistency`
    rather than at construction (the maps are opaque callables).
    """

    action: Callable[[complex], complex]
    instability: Callable[[complex], complex]
    period: Callable[[complex], complex]
    focal_count: int = 0
    hbar: float = 1.0

    def __post_init__(self):
        if self.focal_count < 0:
            raise ValueError("focal_count must be >= 0")
        if not self.hbar > 0:
            raise ValueError("hbar must be > 0")

    def check_period_consistency(self, energy: complex, tol: float = 1e-6) -> float:
        """|T(E) - dS/dE| by central finite difference; raises above tol."""
        h = 1e-6 * max(1.0, abs(energy))
        ds = (self.action(energy + h) - self.action(energy - h)) / (2.0 * h)
        err = abs(ds - self.period(energy))
        if err > tol:
            raise ValueError(
                f"period inconsistent with action derivative at E={energy!r}: "
                f"|T - dS/dE| = {err:.3e}"
            )
        return err


@dataclass(frozen=True)
class PoleIndex:
    """Indices (k, s) of one pole of the resummed double series."""

    k: int
    s: int

    def __post_init__(self):
        if self.k < 0 or self.s < 0:
            raise ValueError("pole indices must be non-negative")


def linear_orbit(slope: float = 1.0, offset: float = 0.0, w: float = 2.0,
                 focal_count: int = 0, hbar: float = 1.0) -> GutzwillerOrbit:
    """S(E) = slope*E + offset with constant instability exponent.

    Poles in closed form:
    E_ks = [hbar lam pi/2 + 2 pi s hbar - offset - i hbar w (k+1/2)] / slope.
    """
    return GutzwillerOrbit(
        action=lambda E: slope * E + offset,
        instability=lambda E: w + 0.0 * E,
        period=lambda E: slope + 0.0 * E,
        focal_count=focal_count,
        hbar=hbar,
    )


def affine_orbit(slope: float = 1.0, offset: float = 0.0,
                 w0: float = 2.0, w1: float = 0.0,
                 focal_count: int = 0, hbar: float = 1.0) -> GutzwillerOrbit:
    """S affine in E, instability exponent w(E) = w0 + w1*E.

    The pole condition stays linear in E, so the closed form
    E_ks = [hbar lam pi/2 + 2 pi s hbar - offset - i hbar w0 (k+1/2)]
           / [slope + i hbar w1 (k+1/2)]
    remains available as an oracle.
    """
    return GutzwillerOrbit(
        action=lambda E: slope * E + offset,
        instability=lambda E: w0 + w1 * E,
        period=lambda E: slope + 0.0 * E,
        focal_count=focal_count,
        hbar=hbar,
    )


def closed_form_pole(orbit_kind: str, idx: PoleIndex, *, slope=1.0, offset=0.0,
                     w=2.0, w0=2.0, w1=0.0, focal_count=0, hbar=1.0) -> complex:
    """Exact pole location for the two bundled model families."""
    lam_term = hbar * focal_count * math.pi / 2.0 + 2.0 * math.pi * idx.s * hbar
    if orbit_kind == "linear":
        return (lam_term - offset - 1j * hbar * w * (idx.k + 0.5)) / slope
    if orbit_kind == "affine":
        return (lam_term - offset - 1j * hbar * w0 * (idx.k + 0.5)) / (
            slope + 1j * hbar * w1 * (idx.k + 0.5)
        )
    raise ValueError(f"unknown orbit kind {orbit_kind!r}")


@dataclass(frozen=True)
class ResponseValue:
    """Partial sum of the repetition series with diagnostics."""

    value: complex
    remainder_bound: float
    n_terms: int
    diverging: bool


def response_function(
    orbit: GutzwillerOrbit,
    energy: complex,
    n_max: int = 10_000,
    tol: float = 1e-12,
    method: str = "auto",
) -> ResponseValue:
    """Evaluate the repetition sum at a (complex) energy.

    ``method="direct"`` adds the n-terms until the geometric remainder
    bound drops below ``tol`` (relative); near a pole the term ratio
    approaches 1 and the value is flagged ``diverging`` instead.
    ``method="resummed"`` evaluates the equivalent double-series closed
    form sum_k 2 q_k / (1 - q_k), which stays accurate arbitrarily close
    to poles. ``"auto"`` switches to the resummed form when the direct
    ratio exceeds 0.999.

    Raises
    ------
    TruncationNotConverged
        Direct method only: n_max reached while the remainder bound is
        still above tolerance although the series is contracting.
    """
    hbar = orbit.hbar
    S = complex(orbit.action(energy))
    w = complex(orbit.instability(energy))
    T = complex(orbit.period(energy))
    theta = S / hbar - orbit.focal_count * math.pi / 2.0
    pref = -1j * T / (2.0 * hbar)
    # asymptotic ratio of consecutive terms
    ratio = abs(cmath.exp(1j * theta)) * math.exp(-w.real / 2.0)

    if method not in ("auto", "direct", "resummed"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "resummed" if ratio > 0.999 else "direct"

    if method == "resummed":
        total = 0.0 + 0.0j
        k = 0
        while True:
            q_k = cmath.exp(1j * theta - w * (k + 0.5))
            if q_k == 1.0:
                return ResponseValue(complex(math.inf, math.inf), math.inf, k, True)
            term = 2.0 * q_k / (1.0 - q_k)
            total += term
            if abs(term) < tol * max(1.0, abs(total)) or k >= n_max:
                break
            k += 1
        return ResponseValue(pref * total, abs(term), k + 1, False)

    total = 0.0 + 0.0j
    n = 0
    term = 0.0 + 0.0j
    while n < n_max:
        n += 1
        term = cmath.exp(1j * n * theta) / cmath.sinh(n * w / 2.0)
        total += term
        if ratio < 1.0:
            bound = abs(term) * ratio / (1.0 - ratio)
            if bound < tol * max(1.0, abs(total)):
                return ResponseValue(pref * total, abs(pref) * bound, n, False)
        elif abs(total) > 1e12:
            return ResponseValue(pref * total, math.inf, n, True)
    if ratio >= 1.0:
        return ResponseValue(pref * total, math.inf, n, True)
    raise TruncationNotConverged(
        f"remainder bound still {abs(term) * ratio / (1.0 - ratio):.3e} "
        f"after n_max = {n_max} terms (ratio {ratio:.6f})"
    )


def pole_condition_residual(orbit: GutzwillerOrbit, energy: complex,
                            idx: PoleIndex) -> complex:
    """S(E) - [hbar lam pi/2 - i hbar w(E)(k + 1/2) + 2 pi s hbar]."""
    hbar = orbit.hbar
    return complex(orbit.action(energy)) - (
        hbar * orbit.focal_count * math.pi / 2.0
        - 1j * hbar * complex(orbit.instability(energy)) * (idx.k + 0.5)
        + 2.0 * math.pi * idx.s * hbar
    )


def find_pole(
    orbit: GutzwillerOrbit,
    idx: PoleIndex,
    guess: complex,
    tol: float = 1e-10,
    max_steps: int = 60,
) -> complex:
    """Newton-solve the pole condition for E_ks from a starting guess.

    Returns the converged complex energy with |residual| < tol; the
    imaginary part is strictly negative whenever w > 0 and the action
    grows with energy.
    """
    return newton_complex(
        lambda E: pole_condition_residual(orbit, E, idx),
        guess,
        tol=tol,
        max_steps=max_steps,
    )
