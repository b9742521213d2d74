"""Coupled-channel solver tests: trajectory, TD and stationary evolutions."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from semiclab.channels import (
    CLOSED,
    ChannelSystem,
    LinearTrajectory,
    common_trajectory,
    constant_gap_system,
    emergence_of_time_sweep,
    landau_zener_system,
    radial_momentum,
    solve_stationary_semiclassical,
    solve_time_dependent,
)
from semiclab.errors import ChannelClosedInRange, TrappedOrbit, UnitarityLoss
from semiclab.numerics import singular_quadrature


# --- system validation ------------------------------------------------------------

def test_mass_invariant():
    with pytest.raises(ValueError, match="M > 0"):
        landau_zener_system(mass=-1.0)


def test_coupling_antisymmetry_enforced():
    bad = lambda R: np.array([[0.0, 1.0], [1.0, 0.0]])  # symmetric: rejected
    with pytest.raises(ValueError, match="antisymmetric"):
        ChannelSystem(curves=(lambda R: 0.0, lambda R: 0.1),
                      radial_coupling=bad, mass=1.0, energy=5.0)


# --- channel momenta ---------------------------------------------------------------

def test_momentum_dominant_energy_limit():
    sys_ = landau_zener_system(energy=1e6)
    expect = math.sqrt(2.0 * 1e6)
    for n in (0, 1):
        for R in (0.5, 3.0, 10.0):
            assert radial_momentum(sys_, n, R) == pytest.approx(expect, rel=1e-3)


def test_momentum_closed_below_threshold():
    # the upper adiabatic curve saturates near 0.51 away from the crossing
    sys_ = landau_zener_system(energy=0.3)
    assert radial_momentum(sys_, 1, 8.0) is CLOSED
    assert radial_momentum(sys_, 0, 8.0) is not CLOSED


def test_momentum_free_case_exact():
    sys_ = constant_gap_system(gap=0.0, amplitude=0.0, energy=7.0)
    for R in (0.1, 1.0, 20.0):
        assert radial_momentum(sys_, 0, R) == pytest.approx(math.sqrt(14.0), rel=1e-14)


# --- common trajectory ----------------------------------------------------------------

def test_free_head_on_trajectory():
    sys_ = landau_zener_system(energy=8.0)
    traj = common_trajectory(sys_)
    v = math.sqrt(2.0 * 8.0)
    assert traj.closest_approach == 0.0
    for t in (-2.0, -0.5, 0.7, 1.9):
        assert traj.radius(t) == pytest.approx(v * abs(t), abs=1e-9)
    # polar angle flips by pi through the origin
    sweep = abs(float(traj.angle(traj.t_end)) - float(traj.angle(traj.t_start)))
    assert sweep == pytest.approx(math.pi, abs=1e-9)


def test_trajectory_energy_conservation():
    sys_ = landau_zener_system(energy=6.0, z1z2=1.5, L=4)
    traj = common_trajectory(sys_)
    ts = np.linspace(traj.t_start, traj.t_end, 501)
    R = traj.radius(ts)
    vr = traj.radial_velocity(ts)
    vt = traj.angular_velocity(ts) * R
    E = 0.5 * sys_.mass * (vr**2 + vt**2) + sys_.z1z2 / R
    assert np.abs(E - 6.0).max() < 1e-10 * 6.0


def test_trajectory_turning_point_with_charge():
    sys_ = landau_zener_system(energy=5.0, z1z2=2.0)
    traj = common_trajectory(sys_)
    # closest approach solves E = Z1 Z2 / R for L = 0
    assert traj.closest_approach == pytest.approx(2.0 / 5.0, rel=1e-10)
    assert float(traj.radius(0.0)) == pytest.approx(traj.closest_approach, rel=1e-7)


def test_trapped_orbit_detected():
    with pytest.raises(TrappedOrbit):
        common_trajectory(landau_zener_system(energy=0.05, z1z2=2.0))
    with pytest.raises(TrappedOrbit):
        common_trajectory(landau_zener_system(energy=5.0, z1z2=-2.0))


# --- time-dependent solver ---------------------------------------------------------------

def test_zero_coupling_keeps_indicator():
    sys_ = constant_gap_system(gap=0.4, amplitude=0.0, energy=9.0)
    traj = common_trajectory(sys_)
    res = solve_time_dependent(sys_, traj, initial_channel=0)
    assert res.probabilities[0] == pytest.approx(1.0, abs=1e-12)
    assert res.probabilities[1] == pytest.approx(0.0, abs=1e-12)


def test_degenerate_rotation_oracle():
    # single inbound passage of a coupling pulse between identical channels:
    # P2 = sin^2(integral of the pulse)
    amp, width, rc = 0.3, 1.0, 3.0
    sys_ = constant_gap_system(gap=0.0, amplitude=amp, width=width,
                               r_cross=rc, energy=8.0)
    v = math.sqrt(2.0 * 8.0)
    traj = LinearTrajectory(speed=v, t_start=-12.0 / v, t_end=0.0)
    res = solve_time_dependent(sys_, traj)
    area = quad(lambda R: amp * math.exp(-(((R - rc) / width) ** 2)), 0.0, 12.0)[0]
    assert res.probabilities[1] == pytest.approx(math.sin(area) ** 2, abs=1e-9)


def test_round_trip_rotation_cancels():
    # identical channels retrace the coupling on the way out: no net transfer
    sys_ = constant_gap_system(gap=0.0, amplitude=0.3, energy=8.0)
    traj = common_trajectory(sys_)
    res = solve_time_dependent(sys_, traj)
    assert res.probabilities[1] < 1e-12


def test_landau_zener_velocity_trend():
    # single-passage transition follows the closed-form trend in velocity;
    # the fine-tolerance run is the oracle, the formula is a trend check
    delta, slope = 0.5, 1.0
    vs = np.linspace(0.5, 2.5, 6)
    measured, exponents = [], []
    for v in vs:
        sys_ = landau_zener_system(delta=delta, slope=slope, energy=0.5 * v * v)
        traj = LinearTrajectory(speed=v, t_start=-12.0 / v, t_end=0.0)
        p2 = solve_time_dependent(sys_, traj).probabilities[1]
        ref = solve_time_dependent(sys_, traj, rtol=1e-13).probabilities[1]
        assert p2 == pytest.approx(ref, abs=1e-8)
        measured.append(math.log(p2))
        exponents.append(-math.pi * delta**2 / (2.0 * v * slope))
    assert all(a < b for a, b in zip(measured, measured[1:]))
    r = np.corrcoef(measured, exponents)[0, 1]
    assert r > 0.98
    # slow passages sit close to the closed form itself
    assert measured[0] == pytest.approx(exponents[0], abs=0.05)


def test_unitarity_maintained_and_loss_detected():
    sys_ = landau_zener_system(energy=5.0)
    traj = common_trajectory(sys_)
    res = solve_time_dependent(sys_, traj)
    assert res.unitarity_defect < 1e-8
    with pytest.raises(UnitarityLoss):
        solve_time_dependent(sys_, traj, unitarity_tol=1e-17)


def test_time_reversal_composition():
    # traversing the collision forward and then backward along the reversed
    # trajectory restores the initial indicator state
    from semiclab.numerics import OdeSpec, integrate_complex_ivp

    sys_ = landau_zener_system(energy=5.0)
    traj = common_trajectory(sys_)
    n = sys_.n_channels
    hbar = sys_.hbar

    def rhs(t, yv):
        F, phi = yv[:n], yv[n:]
        R = float(traj.radius(t))
        C = float(traj.radial_velocity(t)) * np.asarray(sys_.radial_coupling(R))
        phase = np.exp(-1j * (phi[:, None] - phi[None, :]) / hbar)
        dF = (C * phase) @ F
        dphi = np.array([c(R) for c in sys_.curves], dtype=complex)
        return np.concatenate([dF, dphi])

    y = np.zeros(2 * n, dtype=complex)
    y[0] = 1.0
    legs = [(traj.t_start, 0.0), (0.0, traj.t_end)]
    for a, b in legs:
        y = integrate_complex_ivp(OdeSpec(2 * n, rhs, y, a, b, tolerance=1e-11))[-1][1]
    assert abs(y[0]) ** 2 < 0.999  # something actually happened
    for a, b in [(b, a) for a, b in reversed(legs)]:
        y = integrate_complex_ivp(OdeSpec(2 * n, rhs, y, a, b, tolerance=1e-11))[-1][1]
    probs = np.abs(y[:n]) ** 2
    assert probs[0] == pytest.approx(1.0, abs=1e-6)
    assert probs[1] == pytest.approx(0.0, abs=1e-6)


# --- stationary solver ----------------------------------------------------------------------

def test_stationary_zero_coupling_accumulates_actions():
    sys_ = constant_gap_system(gap=0.4, amplitude=0.0, energy=9.0)
    res = solve_stationary_semiclassical(sys_)
    assert res.probabilities[0] == pytest.approx(1.0, abs=1e-12)
    # with no coupling the solver only accumulates the channel actions:
    # S_n equals the doubled contour integral of P_n
    for n in (0, 1):
        expected = 2.0 * singular_quadrature(
            lambda R, n=n: radial_momentum(sys_, n, R), 1e-12, sys_.r_max)
        assert res.actions[n] == pytest.approx(expected, rel=1e-9)
    hist = solve_stationary_semiclassical(sys_, keep_history=True)
    assert hist.history[-1].variable == "R"
    assert hist.history[-1].branch == "outbound"


def test_stationary_identical_curves_agree_with_td_exactly():
    sys_ = constant_gap_system(gap=0.0, amplitude=0.25, energy=4.0)
    traj = common_trajectory(sys_)
    td = solve_time_dependent(sys_, traj)
    st = solve_stationary_semiclassical(sys_)
    assert np.abs(st.probabilities - td.probabilities).max() < 1e-9


def test_stationary_initial_action_offsets_cancel():
    sys_ = landau_zener_system(energy=6.0)
    a = solve_stationary_semiclassical(sys_)
    b = solve_stationary_semiclassical(sys_, initial_actions=[12.34, -7.0])
    assert np.abs(a.probabilities - b.probabilities).max() < 1e-11


def test_stationary_refuses_closed_channels():
    with pytest.raises(ChannelClosedInRange):
        solve_stationary_semiclassical(landau_zener_system(energy=0.4))


def test_stationary_approaches_td_at_high_energy():
    sys_ = landau_zener_system()
    lo = emergence_of_time_sweep(sys_, [3.0])[0]
    hi = emergence_of_time_sweep(sys_, [300.0])[0]
    assert hi.discrepancy < lo.discrepancy / 50.0


def test_momenta_differ_at_low_energy():
    # the superposition picture: >10% momentum mismatch at the lowest energy
    sys_ = landau_zener_system(energy=3.0)
    p1 = radial_momentum(sys_, 0, 0.5)
    p2 = radial_momentum(sys_, 1, 0.5)
    assert abs(p1 - p2) / min(p1, p2) > 0.10


# --- sweep -------------------------------------------------------------------------------------

def test_sweep_rows_collect_errors():
    sys_ = landau_zener_system()
    rows = emergence_of_time_sweep(sys_, [0.4, 5.0])
    assert rows[0].error is not None and "ChannelClosed" in rows[0].error
    assert rows[1].error is None
    assert math.isfinite(rows[1].discrepancy)


def test_sweep_discrepancy_decreases_over_decade():
    rows = emergence_of_time_sweep(landau_zener_system(),
                                   list(np.geomspace(3.0, 30.0, 6)))
    ds = [r.discrepancy for r in rows]
    assert all(a > b for a, b in zip(ds, ds[1:]))
    assert ds[0] >= 10.0 * ds[-1]
