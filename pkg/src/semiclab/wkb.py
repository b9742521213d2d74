"""Action integrals and Bohr-Sommerfeld quantization.

The quantization rule used here is

    integral of p dq over the allowed region = pi * hbar * (n + a1 + a2)

where a1, a2 are the phase shifts contributed by the two turning points
(1/4 each for soft walls). Setting them to zero reproduces the classic
action-angle mistake: every level of the harmonic oscillator comes out
exactly hbar*omega/2 too low, because the caustic information is gone.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import MoreThanTwoTurningPoints, NoAllowedRegion, RootNotBracketed
from .numerics import singular_quadrature, solve_cubic_complex

__all__ = [
    "PotentialModel",
    "QuantizationSpec",
    "cubic_potential",
    "harmonic_potential",
    "find_turning_points",
    "action_between_turning_points",
    "bohr_sommerfeld_levels",
    "barrier_exponent",
]


@dataclass(frozen=True)
class PotentialModel:
    """A one-dimensional potential V(x) with a human-readable label.

    ``kind`` and ``params`` are set on the bundled potentials so model
    files can round-trip exactly; hand-built potentials may leave them
    unset.
    """

    evaluator: Callable[[float], float]
    label: str = "potential"
    kind: Optional[str] = None
    params: Optional[dict] = None

    def __call__(self, x: float) -> float:
        return self.evaluator(x)


def harmonic_potential(omega: float = 1.0) -> PotentialModel:
    return PotentialModel(lambda x: 0.5 * omega * omega * x * x,
                          f"harmonic(omega={omega:g})",
                          kind="harmonic", params={"omega": omega})


def cubic_potential(g: float) -> PotentialModel:
    return PotentialModel(lambda x: 0.5 * x * x - g * x**3, f"cubic(g={g:g})",
                          kind="cubic", params={"g": g})


@dataclass(frozen=True)
class QuantizationSpec:
    """Turning-point phase shifts, hbar, and the quantum-number range."""

    alpha1: float = 0.25
    alpha2: float = 0.25
    hbar: float = 1.0
    n_range: Tuple[int, int] = (0, 4)  # inclusive

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError("hbar must be > 0")
        lo, hi = self.n_range
        if lo < 0 or hi < lo:
            raise ValueError("n_range must satisfy 0 <= lo <= hi")


def find_turning_points(
    V: PotentialModel,
    energy: float,
    x_range: Tuple[float, float],
    n_scan: int = 4096,
    xtol: float = 1e-12,
):
    """All roots of V(x) = E inside x_range, by sign-change scan + brentq."""
    a, b = x_range
    xs = np.linspace(a, b, n_scan)
    vals = np.array([energy - V(float(x)) for x in xs])
    roots = []
    for i in range(len(xs) - 1):
        va, vb = vals[i], vals[i + 1]
        if va == 0.0:
            roots.append(float(xs[i]))
        elif va * vb < 0.0:
            roots.append(float(brentq(lambda x: energy - V(x),
                                      xs[i], xs[i + 1], xtol=xtol)))
    if vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    return roots


def action_between_turning_points(
    V: PotentialModel,
    energy: float,
    x_range: Tuple[float, float] = (-50.0, 50.0),
    n_scan: int = 4096,
    rel_tol: float = 1e-11,
) -> float:
    """Action integral of sqrt(2(E - V)) across a single allowed region.

    The search range must isolate one well: exactly two turning points,
    classically allowed in between. The integrand vanishes like a square
    root at both ends, which the quadrature removes by substitution.

    Raises
    ------
    NoAllowedRegion
        No turning points / no allowed region at this energy.
    MoreThanTwoTurningPoints
        The range straddles several wells or a barrier; narrow it.
    """
    tps = find_turning_points(V, energy, x_range, n_scan=n_scan)
    if len(tps) > 2:
        raise MoreThanTwoTurningPoints(
            f"{len(tps)} turning points in {x_range}; isolate a single well"
        )
    if len(tps) < 2:
        raise NoAllowedRegion(
            f"found {len(tps)} turning point(s) in {x_range} at E={energy:g}"
        )
    x_lo, x_hi = sorted(tps)
    mid = 0.5 * (x_lo + x_hi)
    if energy - V(mid) <= 0:
        raise NoAllowedRegion(
            f"region between turning points is classically forbidden at E={energy:g}"
        )

    def integrand(x):
        rad = 2.0 * (energy - V(x))
        return math.sqrt(rad) if rad > 0.0 else 0.0

    return singular_quadrature(integrand, x_lo, x_hi, rel_tol=rel_tol)


def bohr_sommerfeld_levels(
    V: PotentialModel,
    spec: QuantizationSpec,
    x_range: Tuple[float, float] = (-50.0, 50.0),
    e_max: Optional[float] = None,
    n_scan: int = 4096,
) -> np.ndarray:
    """Semiclassical levels E_n solving action(E) = pi hbar (n + a1 + a2).

    The energy bracket grows upward from just above the well minimum; the
    action is strictly increasing in E on a single well, so each level is
    found by bracketed root-finding and the sequence is increasing in n.

    Raises
    ------
    RootNotBracketed
        If a requested n lies outside the well's capacity (the action
        never reaches the target below ``e_max``).
    """
    a, b = x_range
    xs = np.linspace(a, b, n_scan)
    vmin = min(V(float(x)) for x in xs)

    def act(E):
        return action_between_turning_points(V, E, x_range, n_scan=n_scan)

    lo, hi = spec.n_range
    levels = []
    for n in range(lo, hi + 1):
        target = math.pi * spec.hbar * (n + spec.alpha1 + spec.alpha2)
        if target <= 0:
            raise RootNotBracketed(
                f"quantization target {target:g} for n={n} is not positive; "
                "no level below the well minimum"
            )
        # bracket from just above the minimum upward
        e_lo = vmin + 1e-9 * max(1.0, abs(vmin))
        e_hi = e_lo + 0.5
        cap = e_max if e_max is not None else vmin + 1e6
        while True:
            try:
                if act(e_hi) >= target:
                    break
            except (NoAllowedRegion, MoreThanTwoTurningPoints) as exc:
                # grew past the top of the well: the level does not fit
                raise RootNotBracketed(
                    f"well holds no level n={n}: {exc}"
                ) from exc
            e_hi = vmin + 2.0 * (e_hi - vmin)
            if e_hi > cap:
                raise RootNotBracketed(
                    f"action never reaches the n={n} target below E={cap:g}"
                )
        E_n = brentq(lambda E: act(E) - target, e_lo, e_hi, xtol=1e-13, rtol=1e-14)
        levels.append(E_n)
    return np.array(levels)


def barrier_exponent(g: float, rel_tol: float = 1e-11) -> float:
    """Twice the barrier action of the cubic well at E = 0.

    2 * integral from x2=0 to x3=1/(2g) of sqrt(2 V(x)) dx, which equals
    2/(15 g^2) exactly; this is the exponent in the lifetime formula.
    """
    if g <= 0:
        raise ValueError("coupling g must be > 0")
    roots = solve_cubic_complex(-g, 0.5, 0.0, 0.0)
    x3 = max(r.real for r in roots)  # roots are {0, 0, 1/(2g)}

    def integrand(x):
        rad = x * x - 2.0 * g * x**3
        return math.sqrt(rad) if rad > 0.0 else 0.0

    return 2.0 * singular_quadrature(integrand, 0.0, x3, rel_tol=rel_tol)
