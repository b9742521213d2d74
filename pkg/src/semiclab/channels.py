"""Two solvers for inelastic transitions in a slow-atom collision model.

The stationary solver integrates the first-order semiclassical system in
the internuclear distance R along the doubled classical contour (inbound
branch, momentum sign flip at closest approach, outbound branch), with
channel-dependent radial momenta

    P_n(R) = sqrt(2M [ E_total - L-term - Z1 Z2 / R - E_n(R) ])

and phase factors exp(i (S_n - S_n') / hbar) accumulated from those
momenta.

The time-dependent solver replaces every P_n by the channel-independent
momentum of a single classical trajectory R(t), which turns M dR / P into
dt and the action differences into integrals of the energy splittings
over time. The two agree only when the channel momenta are close, i.e. at
high collision energy; :func:`emergence_of_time_sweep` measures exactly
that approach.

Channel amplitudes are the smooth envelopes left after extracting the
rapidly oscillating action exponential from the radial wave functions.
"""

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import ChannelClosedInRange, TrappedOrbit, UnitarityLoss
from .numerics import OdeSpec, integrate_complex_ivp, singular_quadrature

__all__ = [
    "CLOSED",
    "ChannelSystem",
    "AmplitudeState",
    "TransitionResult",
    "EmergenceRow",
    "CommonTrajectory",
    "LinearTrajectory",
    "landau_zener_system",
    "constant_gap_system",
    "radial_momentum",
    "common_trajectory",
    "solve_time_dependent",
    "solve_stationary_semiclassical",
    "emergence_of_time_sweep",
]


class _Closed:
    """Marker for a classically closed channel (negative radicand)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Closed"


CLOSED = _Closed()


@dataclass
class ChannelSystem:
    """Adiabatic curves, couplings and collision parameters.

    ``curves[n]`` maps R to the channel energy E_n(R) (hartree vs bohr);
    ``radial_coupling(R)`` returns the antisymmetric matrix of
    <n | d/dR | n'> elements, ``rotational_coupling(R)`` the
    <n | d/dtheta | n'> matrix (None means exactly zero). ``energy`` is
    the total collision energy, ``L`` the nuclear angular momentum
    quantum number, and ``r_max`` the radius where the collision starts
    and ends (couplings should be negligible there).
    """

    curves: Tuple[Callable[[float], float], ...]
    radial_coupling: Callable[[float], np.ndarray]
    mass: float
    energy: float
    rotational_coupling: Optional[Callable[[float], np.ndarray]] = None
    z1z2: float = 0.0
    L: int = 0
    hbar: float = 1.0
    r_max: float = 12.0
    kind: Optional[str] = None
    params: Optional[dict] = None

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("M > 0 required")
        if not self.hbar > 0:
            raise ValueError("hbar > 0 required")
        if self.L < 0 or int(self.L) != self.L:
            raise ValueError("L must be a non-negative integer")
        if not self.r_max > 0:
            raise ValueError("r_max > 0 required")
        if len(self.curves) < 2:
            raise ValueError("need at least two channels")
        for R in (0.25 * self.r_max, self.r_max):
            if not all(np.isfinite(c(R)) for c in self.curves):
                raise ValueError("channel curves must be finite")
            d = np.asarray(self.radial_coupling(R), dtype=float)
            if d.shape != (len(self.curves),) * 2:
                raise ValueError("radial_coupling must return an n x n matrix")
            if np.abs(d + d.T).max() > 1e-10 * max(1.0, np.abs(d).max()):
                raise ValueError("radial coupling matrix must be antisymmetric")

    @property
    def n_channels(self) -> int:
        return len(self.curves)

    @property
    def l_squared(self) -> float:
        return self.hbar**2 * self.L * (self.L + 1)

    def common_potential(self, R: float) -> float:
        """Channel-independent part: Coulomb plus centrifugal term."""
        if R <= 0.0:
            # only the free head-on case ever reaches the origin
            return 0.0 if (self.z1z2 == 0.0 and self.l_squared == 0.0) else math.inf
        return self.z1z2 / R + self.l_squared / (2.0 * self.mass * R * R)

    def with_energy(self, energy: float) -> "ChannelSystem":
        return replace(self, energy=energy)


def _tanh_gap(delta, slope, r_cross, saturation):
    """Diabatic gap saturating at +-saturation so curves level off at large R."""

    def beta(R):
        return saturation * math.tanh(slope * (R - r_cross) / saturation)

    def dbeta(R):
        return slope / math.cosh(slope * (R - r_cross) / saturation) ** 2

    return beta, dbeta


def landau_zener_system(
    delta: float = 0.2,
    slope: float = 1.0,
    r_cross: float = 3.0,
    saturation: float = 1.0,
    mass: float = 1.0,
    energy: float = 10.0,
    z1z2: float = 0.0,
    L: int = 0,
    hbar: float = 1.0,
    r_max: float = 12.0,
) -> ChannelSystem:
    """Two-channel avoided crossing with a bounded diabatic gap.

    Diabatic picture: energies -+ beta(R)/2 with beta saturating at
    +-saturation away from the crossing radius, constant coupling delta/2.
    The adiabatic curves are -+ sqrt(delta^2 + beta^2)/2 and the radial
    coupling between them is the mixing-angle derivative, a bump of height
    slope/(2 delta) and width ~delta/slope centered at r_cross.
    """
    if delta <= 0 or slope <= 0 or saturation <= 0:
        raise ValueError("delta, slope and saturation must be > 0")
    beta, dbeta = _tanh_gap(delta, slope, r_cross, saturation)

    def gap(R):
        return math.sqrt(delta * delta + beta(R) ** 2)

    def d12(R):
        return 0.5 * delta * dbeta(R) / (delta * delta + beta(R) ** 2)

    def coupling(R):
        d = d12(R)
        return np.array([[0.0, d], [-d, 0.0]])

    return ChannelSystem(
        curves=(lambda R: -0.5 * gap(R), lambda R: +0.5 * gap(R)),
        radial_coupling=coupling,
        mass=mass,
        energy=energy,
        z1z2=z1z2,
        L=L,
        hbar=hbar,
        r_max=r_max,
        kind="landau_zener",
        params={
            "delta": delta,
            "slope": slope,
            "r_cross": r_cross,
            "saturation": saturation,
            "mass": mass,
            "energy": energy,
            "z1z2": z1z2,
            "L": L,
            "hbar": hbar,
            "r_max": r_max,
        },
    )


def constant_gap_system(
    gap: float = 0.0,
    amplitude: float = 0.3,
    width: float = 1.0,
    r_cross: float = 3.0,
    mass: float = 1.0,
    energy: float = 10.0,
    z1z2: float = 0.0,
    L: int = 0,
    hbar: float = 1.0,
    r_max: float = 12.0,
) -> ChannelSystem:
    """Two flat channels gap apart with a Gaussian coupling bump.

    With ``gap=0`` the channels are identical and the two solvers must
    agree exactly: this is the control model. The degenerate case also has
    the closed-form single-passage solution P2 = sin^2(coupling area).
    """
    if width <= 0:
        raise ValueError("width must be > 0")

    def d12(R):
        return amplitude * math.exp(-(((R - r_cross) / width) ** 2))

    def coupling(R):
        d = d12(R)
        return np.array([[0.0, d], [-d, 0.0]])

    return ChannelSystem(
        curves=(lambda R: -0.5 * gap, lambda R: +0.5 * gap),
        radial_coupling=coupling,
        mass=mass,
        energy=energy,
        z1z2=z1z2,
        L=L,
        hbar=hbar,
        r_max=r_max,
        kind="constant_gap",
        params={
            "gap": gap,
            "amplitude": amplitude,
            "width": width,
            "r_cross": r_cross,
            "mass": mass,
            "energy": energy,
            "z1z2": z1z2,
            "L": L,
            "hbar": hbar,
            "r_max": r_max,
        },
    )


def radial_momentum(sys: ChannelSystem, n: int, R: float):
    """Channel radial momentum P_n(R), or CLOSED where the radicand < 0."""
    if R <= 0:
        raise ValueError("R must be > 0")
    radicand = 2.0 * sys.mass * (
        sys.energy - sys.common_potential(R) - sys.curves[n](R)
    )
    if radicand < 0.0:
        return CLOSED
    return math.sqrt(radicand)


# ---------------------------------------------------------------------------
# common classical trajectory
# ---------------------------------------------------------------------------


@dataclass
class CommonTrajectory:
    """Classical collision path R(t), theta(t) in the common potential.

    Time zero is at closest approach; the trajectory covers
    [t_start, t_end] = [-T/2, +T/2]. Positions and velocities come from
    splines through the accepted integrator steps of the planar motion, so
    R and its rate are smooth on each branch (R has a kink at t = 0 for
    head-on free passage through the origin).
    """

    t_start: float
    t_end: float
    closest_approach: float
    r_start: float
    _sz: CubicSpline
    _sx: CubicSpline
    _svz: CubicSpline
    _svx: CubicSpline

    def _zx(self, t):
        return self._sz(t), self._sx(t), self._svz(t), self._svx(t)

    def radius(self, t):
        z, x, _, _ = self._zx(t)
        return np.hypot(z, x)

    def radial_velocity(self, t):
        z, x, vz, vx = self._zx(t)
        r = np.hypot(z, x)
        return (z * vz + x * vx) / np.where(r > 1e-14, r, 1.0)

    def angle(self, t):
        """Polar angle of the internuclear vector, measured from +z."""
        z, x, _, _ = self._zx(t)
        return np.arctan2(x, z)

    def angular_velocity(self, t):
        z, x, vz, vx = self._zx(t)
        r2 = z * z + x * x
        return (z * vx - x * vz) / np.where(r2 > 1e-28, r2, 1.0)


@dataclass(frozen=True)
class LinearTrajectory:
    """Analytic free path R(t) = speed * |t|; zero charge and L only.

    Useful for single-passage oracles: a span that ends at (or before)
    t = 0 covers just the inbound branch.
    """

    speed: float
    t_start: float
    t_end: float

    def radius(self, t):
        return self.speed * np.abs(t)

    def radial_velocity(self, t):
        return self.speed * np.sign(t)

    def angle(self, t):
        return np.where(np.asarray(t) < 0, np.pi, 0.0)

    def angular_velocity(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))


def common_trajectory(
    sys: ChannelSystem,
    rtol: float = 1e-12,
    max_steps: int = 1_000_000,
) -> CommonTrajectory:
    """Integrate the classical nuclear motion in the common potential.

    The motion is planar; it is integrated in Cartesian coordinates so the
    pass through (or turn near) closest approach needs no branch handling.
    The half-period is computed first from the radial quadrature
    T/2 = M * integral dR / P(R), which also pins t = 0 to closest
    approach.

    Raises
    ------
    TrappedOrbit
        If the energy is below the potential at r_max, if a head-on
        attractive collision would collapse onto the origin, or if the
        integrated path fails to return to the start radius.
    """
    M, E = sys.mass, sys.energy
    r_max = sys.r_max
    l2 = sys.l_squared

    def radicand(R):
        return 2.0 * M * (E - sys.common_potential(R))

    if radicand(r_max) <= 0.0:
        raise TrappedOrbit(f"E = {E:g} does not reach the start radius {r_max:g}")
    if sys.z1z2 < 0.0 and l2 == 0.0:
        raise TrappedOrbit("head-on attractive collision collapses onto the origin")

    # outermost classical turning point of the common motion
    r0 = 0.0
    scan = np.geomspace(1e-9 * r_max, r_max, 400)
    vals = np.array([radicand(float(R)) for R in scan])
    neg = np.nonzero(vals <= 0.0)[0]
    if neg.size:
        i = neg[-1]
        r0 = brentq(radicand, scan[i], scan[i + 1], xtol=1e-14)

    # half collision time from the radial quadrature (heals 1/sqrt at r0)
    def inv_speed(R):
        rad = radicand(R)
        return M / math.sqrt(rad) if rad > 0.0 else 0.0

    t_half = singular_quadrature(inv_speed, r0, r_max, rel_tol=1e-10)

    # planar initial state at R = r_max, inbound
    v_t = math.sqrt(l2) / (M * r_max)
    v_r = math.sqrt(radicand(r_max)) / M
    state0 = np.array([-r_max, 0.0, v_r, v_t], dtype=complex)
    z1z2 = sys.z1z2

    def rhs(t, y):
        z, x, vz, vx = y.real
        if z1z2 == 0.0:
            return [vz, vx, 0.0, 0.0]
        r3 = (z * z + x * x) ** 1.5
        a = z1z2 / (M * r3) if r3 > 0.0 else 0.0
        return [vz, vx, a * z, a * x]

    spec = OdeSpec(
        dimension=4,
        rhs=rhs,
        initial_state=state0,
        t0=0.0,
        t1=2.0 * t_half,
        tolerance=rtol,
        max_steps=max_steps,
        # keep nodes dense enough that the spline interpolant preserves
        # conservation laws to ~1e-11 at arbitrary query times
        max_step=2.0 * t_half / 1500.0,
    )
    records = integrate_complex_ivp(spec)
    ts = np.array([t for t, _ in records]) - t_half
    ys = np.array([y.real for _, y in records])
    if ts.size < 4:
        # pad degenerate (straight-line) output so splines are well posed
        extra = np.linspace(-t_half, t_half, 9)
        ys = np.array([
            state0.real + np.array([v_r * (t + t_half), v_t * (t + t_half), 0, 0])
            for t in extra
        ])
        ts = extra

    r_end = math.hypot(ys[-1, 0], ys[-1, 1])
    if abs(r_end - r_max) > 1e-6 * r_max:
        raise TrappedOrbit(
            f"collision did not return to the start radius "
            f"(R(end) = {r_end:.6g} vs {r_max:.6g})"
        )

    return CommonTrajectory(
        t_start=-t_half,
        t_end=t_half,
        closest_approach=r0,
        r_start=r_max,
        _sz=CubicSpline(ts, ys[:, 0]),
        _sx=CubicSpline(ts, ys[:, 1]),
        _svz=CubicSpline(ts, ys[:, 2]),
        _svx=CubicSpline(ts, ys[:, 3]),
    )


# ---------------------------------------------------------------------------
# amplitude evolutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AmplitudeState:
    """Channel amplitudes at one point of a solver's sweep variable."""

    amplitudes: np.ndarray
    variable: str          # "t" or "R"
    value: float
    branch: Optional[str] = None  # "inbound"/"outbound" for the R solver


@dataclass(frozen=True)
class TransitionResult:
    """Final channel probabilities of one solver run."""

    probabilities: np.ndarray
    method: str            # "time-dependent" or "stationary"
    energy: float
    unitarity_defect: float
    amplitudes: np.ndarray
    history: Optional[list] = None
    actions: Optional[np.ndarray] = None  # stationary solver: final S_n


def solve_time_dependent(
    sys: ChannelSystem,
    trajectory,
    initial_channel: int = 0,
    rtol: float = 1e-11,
    unitarity_tol: float = 1e-8,
    keep_history: bool = False,
) -> TransitionResult:
    """Evolve channel amplitudes along a given classical trajectory.

    i hbar dF_n/dt = i hbar sum_n' <n|d/dt|n'> F_n'
                     * exp(-i/hbar * int (E_n - E_n') dt'),

    with <n|d/dt|n'> = dR/dt <n|d/dR|n'> + dtheta/dt <n|d/dtheta|n'>.
    The energy-difference phases are integrated alongside the amplitudes,
    so no quadrature grid is needed. The span is split at t = 0 where the
    trajectory has its closest-approach kink.

    Raises
    ------
    UnitarityLoss
        If the total probability drifts from 1 beyond ``unitarity_tol``.
    """
    n = sys.n_channels
    hbar = sys.hbar
    has_rot = sys.rotational_coupling is not None and sys.l_squared > 0.0
    history = [] if keep_history else None

    def rhs(t, y):
        F = y[:n]
        phi = y[n:]
        R = float(trajectory.radius(t))
        rdot = float(trajectory.radial_velocity(t))
        C = rdot * np.asarray(sys.radial_coupling(R), dtype=float)
        if has_rot:
            C = C + float(trajectory.angular_velocity(t)) * np.asarray(
                sys.rotational_coupling(R), dtype=float
            )
        phase = np.exp(-1j * (phi[:, None] - phi[None, :]) / hbar)
        dF = (C * phase) @ F
        dphi = np.array([c(R) for c in sys.curves], dtype=complex)
        return np.concatenate([dF, dphi])

    y = np.zeros(2 * n, dtype=complex)
    y[initial_channel] = 1.0

    t0, t1 = trajectory.t_start, trajectory.t_end
    legs = [(t0, t1)] if not (t0 < 0.0 < t1) else [(t0, 0.0), (0.0, t1)]
    observer = None
    if keep_history:
        observer = lambda t, state: history.append(
            AmplitudeState(state[:n].copy(), "t", t)
        )
    for a, b in legs:
        spec = OdeSpec(2 * n, rhs, y, a, b, tolerance=rtol)
        records = integrate_complex_ivp(spec, observer=observer)
        y = records[-1][1]

    F = y[:n]
    probs = np.abs(F) ** 2
    defect = abs(probs.sum() - 1.0)
    if defect > unitarity_tol:
        raise UnitarityLoss(
            f"probability sum drifted by {defect:.3e} (> {unitarity_tol:.1e}) "
            f"at E = {sys.energy:g}"
        )
    return TransitionResult(
        probabilities=probs,
        method="time-dependent",
        energy=sys.energy,
        unitarity_defect=defect,
        amplitudes=F,
        history=history,
    )


def _momentum_table(sys: ChannelSystem, r_lo: float, r_hi: float, n_check: int = 800):
    """Verify every channel is open on [r_lo, r_hi]; raise otherwise."""
    Rs = np.linspace(r_lo, r_hi, n_check)
    if r_lo == 0.0:
        Rs = Rs[1:]
    for idx in range(sys.n_channels):
        for R in Rs:
            if radial_momentum(sys, idx, float(R)) is CLOSED:
                raise ChannelClosedInRange(
                    f"channel {idx} is classically closed at R = {R:.6g} "
                    f"(E = {sys.energy:g}); the stationary form assumes "
                    "allowed motion in every channel"
                )


def solve_stationary_semiclassical(
    sys: ChannelSystem,
    initial_channel: int = 0,
    rtol: float = 1e-11,
    initial_actions: Optional[Sequence[float]] = None,
    keep_history: bool = False,
) -> TransitionResult:
    """Integrate the stationary first-order system along the R contour.

    Inbound branch from r_max down to the common turning point, momentum
    sign flip, outbound branch back out. The channel actions S_n are
    carried as extra state so the phase differences exp(i dS_nn'/hbar)
    are exact to integrator tolerance; the coupling of channel n' into n
    carries the velocity factor P_n'(R)/P_n(R).

    Only the action *differences* matter: ``initial_actions`` offsets
    (default zero) cancel from the probabilities, which tests assert.

    The probability sum is not exactly conserved by this form unless the
    channel momenta coincide; the defect is reported, not raised - it is
    part of what the high-energy comparison measures.

    Raises
    ------
    ChannelClosedInRange
        If any P_n(R) turns imaginary inside the integration range.
    """
    n = sys.n_channels
    hbar = sys.hbar
    M = sys.mass
    r_hi = sys.r_max

    def radicand(R):
        return 2.0 * M * (sys.energy - sys.common_potential(R))

    r_lo = 0.0
    scan = np.geomspace(1e-9 * r_hi, r_hi, 400)
    vals = np.array([radicand(float(R)) for R in scan])
    neg = np.nonzero(vals <= 0.0)[0]
    if neg.size:
        i = neg[-1]
        if i + 1 >= scan.size:
            raise ChannelClosedInRange(f"E = {sys.energy:g} below the potential at r_max")
        r_lo = brentq(radicand, scan[i], scan[i + 1], xtol=1e-14)

    _momentum_table(sys, r_lo, r_hi)
    has_rot = sys.rotational_coupling is not None and sys.l_squared > 0.0
    l_abs = math.sqrt(sys.l_squared)
    history = [] if keep_history else None

    def momenta(R):
        return np.array(
            [2.0 * M * (sys.energy - sys.common_potential(R) - c(R)) for c in sys.curves]
        ) ** 0.5

    def make_rhs(direction):
        def rhs(R, y):
            F = y[:n]
            S = y[n:]
            P = momenta(float(R))
            C = np.asarray(sys.radial_coupling(float(R)), dtype=float) * (
                P[None, :] / P[:, None]
            )
            if has_rot:
                C = C + direction * (l_abs / (R * R)) * np.asarray(
                    sys.rotational_coupling(float(R)), dtype=float
                ) / P[:, None]
            phase = np.exp(1j * (S[:, None] - S[None, :]) / hbar)
            dF = (C * phase) @ F
            dS = direction * P.astype(complex)
            return np.concatenate([dF, dS])

        return rhs

    y = np.zeros(2 * n, dtype=complex)
    y[initial_channel] = 1.0
    if initial_actions is not None:
        y[n:] = np.asarray(initial_actions, dtype=complex)

    legs = [(r_hi, r_lo, -1.0, "inbound"), (r_lo, r_hi, +1.0, "outbound")]
    for a, b, direction, branch in legs:
        observer = None
        if keep_history:
            observer = lambda R, state, _br=branch: history.append(
                AmplitudeState(state[:n].copy(), "R", R, branch=_br)
            )
        spec = OdeSpec(2 * n, make_rhs(direction), y, a, b, tolerance=rtol)
        records = integrate_complex_ivp(spec, observer=observer)
        y = records[-1][1]

    F = y[:n]
    probs = np.abs(F) ** 2
    return TransitionResult(
        probabilities=probs,
        method="stationary",
        energy=sys.energy,
        unitarity_defect=abs(probs.sum() - 1.0),
        amplitudes=F,
        history=history,
        actions=y[n:].real.copy(),
    )


@dataclass
class EmergenceRow:
    """One energy of the stationary-versus-time-dependent comparison."""

    energy: float
    p_stationary: float = math.nan
    p_timedependent: float = math.nan
    discrepancy: float = math.nan
    error: Optional[str] = None


def emergence_of_time_sweep(
    sys: ChannelSystem,
    energies: Sequence[float],
    initial_channel: int = 0,
    rtol: float = 1e-11,
) -> list:
    """Discrepancy between the two solvers as the collision energy grows.

    For each energy: run both solvers on the same system, report the
    transition probability out of the initial channel for each, and the
    max-norm discrepancy over all channels. Per-row failures are recorded
    on the row rather than raised.
    """
    rows = []
    for E in energies:
        row = EmergenceRow(energy=float(E))
        try:
            s = sys.with_energy(float(E))
            traj = common_trajectory(s, rtol=min(rtol, 1e-12))
            td = solve_time_dependent(s, traj, initial_channel, rtol=rtol)
            st = solve_stationary_semiclassical(s, initial_channel, rtol=rtol)
            row.p_timedependent = float(1.0 - td.probabilities[initial_channel])
            row.p_stationary = float(1.0 - st.probabilities[initial_channel])
            row.discrepancy = float(
                np.max(np.abs(st.probabilities - td.probabilities))
            )
        except Exception as exc:  # per-row, not fatal to the sweep
            row.error = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows
