"""Numerical kernel tests: cubic roots, complex IVP, quadrature, Newton."""

import math

import numpy as np
import pytest

from semiclab.errors import (
    DegeneratePolynomial,
    NoConvergence,
    RhsNonFinite,
    StepLimitExceeded,
)
from semiclab.numerics import (
    OdeSpec,
    ToleranceConfig,
    integrate_complex_ivp,
    newton_complex,
    singular_quadrature,
    solve_cubic_complex,
)


# --- cubic roots -------------------------------------------------------------

def test_cubic_factorized_double_root():
    # E = 0 slice of the cubic well: x^2 (1/2 - g x) = 0
    r = solve_cubic_complex(-0.1, 0.5, 0.0, 0.0)
    assert abs(r[0]) < 1e-10 and abs(r[1]) < 1e-10
    assert r[2] == pytest.approx(5.0, abs=1e-12)


def test_cubic_roots_of_unity():
    r = solve_cubic_complex(1.0, 0.0, 0.0, -1.0)
    expected = sorted(
        (np.exp(2j * np.pi * k / 3) for k in range(3)),
        key=lambda z: (z.real, z.imag),
    )
    for got, want in zip(r, expected):
        assert got == pytest.approx(want, abs=1e-12)


def test_cubic_random_residual_bound():
    rng = np.random.default_rng(20240917)
    coeffs = rng.standard_normal((10_000, 8))
    for row in coeffs:
        c3, c2, c1, c0 = (complex(a, b) for a, b in row.reshape(4, 2))
        if abs(c3) < 1e-3:
            c3 += 1.0
        roots = solve_cubic_complex(c3, c2, c1, c0)
        assert len(roots) == 3
        for r in roots:
            res = abs(((c3 * r + c2) * r + c1) * r + c0)
            assert res <= 1e-12 * max(1.0, abs(r) ** 3)


def test_cubic_sorted_and_deterministic():
    args = (2.0 - 1.0j, 0.3, -1.2 + 0.4j, 0.9)
    a = solve_cubic_complex(*args)
    b = solve_cubic_complex(*args)
    assert a == b
    assert sorted(a, key=lambda z: (z.real, z.imag)) == list(a)


def test_cubic_degenerate_leading_coefficient():
    with pytest.raises(DegeneratePolynomial):
        solve_cubic_complex(0.0, 1.0, 1.0, 1.0)


# --- complex IVP --------------------------------------------------------------

def _harmonic_spec(t1=2 * np.pi, tol=1e-12):
    return OdeSpec(
        dimension=2,
        rhs=lambda t, y: [y[1], -y[0]],
        initial_state=[0.0, 1.0],
        t0=0.0,
        t1=t1,
        tolerance=tol,
    )


def test_harmonic_period():
    records = integrate_complex_ivp(_harmonic_spec())
    t, y = records[-1]
    assert t == pytest.approx(2 * np.pi, abs=1e-12)
    assert abs(y[0]) < 1e-9
    assert abs(y[1] - 1.0) < 1e-9


def test_harmonic_energy_drift_ten_periods():
    drift = []

    def observer(t, y):
        H = 0.5 * (abs(y[1]) ** 2 + abs(y[0]) ** 2)
        drift.append(abs(H - 0.5))

    integrate_complex_ivp(_harmonic_spec(t1=20 * np.pi), observer=observer)
    assert max(drift) < 1e-10


def test_tolerance_halving_reduces_error():
    # order sanity: final-state error shrinks with the tolerance
    errs = []
    for tol in (1e-6, 1e-8, 1e-10):
        _, y = integrate_complex_ivp(_harmonic_spec(t1=20 * np.pi, tol=tol))[-1]
        errs.append(abs(y[0]))
    assert errs[0] > errs[1] > errs[2]


def test_zero_rhs_constant_state():
    spec = OdeSpec(3, lambda t, y: [0.0, 0.0, 0.0], [1 + 2j, -3.0, 0.5j], 0.0, 7.0)
    records = integrate_complex_ivp(spec)
    for _t, y in records:
        assert np.array_equal(y, np.array([1 + 2j, -3.0, 0.5j]))


def test_backward_integration():
    spec = OdeSpec(1, lambda t, y: [1j * y[0]], [1.0 + 0j], 2.0, 0.0)
    _, y = integrate_complex_ivp(spec)[-1]
    assert y[0] == pytest.approx(np.exp(-2j), abs=1e-10)


def test_observer_sees_every_accepted_step():
    seen = []
    records = integrate_complex_ivp(_harmonic_spec(), observer=lambda t, y: seen.append(t))
    assert seen == [t for t, _ in records]
    assert all(b > a for a, b in zip(seen, seen[1:]))


def test_step_limit_exceeded():
    spec = OdeSpec(2, lambda t, y: [y[1], -y[0]], [0.0, 1.0], 0.0, 1000.0,
                   tolerance=1e-12, max_steps=5)
    with pytest.raises(StepLimitExceeded):
        integrate_complex_ivp(spec)


def test_rhs_non_finite():
    spec = OdeSpec(1, lambda t, y: [float("nan")], [1.0 + 0j], 0.0, 1.0)
    with pytest.raises(RhsNonFinite):
        integrate_complex_ivp(spec)


def test_ode_spec_validation():
    with pytest.raises(ValueError):
        OdeSpec(0, lambda t, y: [], [], 0.0, 1.0)
    with pytest.raises(ValueError):
        OdeSpec(1, lambda t, y: [0], [1.0], 0.0, 0.0)
    with pytest.raises(ValueError):
        OdeSpec(1, lambda t, y: [0], [1.0], 0.0, 1.0, tolerance=0.0)
    with pytest.raises(ValueError):
        ToleranceConfig(max_steps=0)


# --- quadrature ----------------------------------------------------------------

def test_barrier_style_integrand():
    # integral of x sqrt(1 - 2 g x) from 0 to 1/(2g) equals 1/(15 g^2)
    g = 0.1
    val = singular_quadrature(lambda x: x * math.sqrt(max(1.0 - 2 * g * x, 0.0)),
                              0.0, 1.0 / (2 * g))
    assert val == pytest.approx(1.0 / (15 * g * g), rel=1e-10)


def test_semicircle():
    val = singular_quadrature(lambda x: math.sqrt(max(1.0 - x * x, 0.0)), -1.0, 1.0)
    assert val == pytest.approx(np.pi / 2, rel=1e-11)


def test_smooth_linear():
    assert singular_quadrature(lambda x: x, 0.0, 1.0) == pytest.approx(0.5, rel=1e-12)


@pytest.mark.parametrize("m,exact", [(0, 2.0 / 3.0), (1, 4.0 / 15.0), (2, 16.0 / 105.0)])
def test_moment_family(m, exact):
    # x^m sqrt(1-x) on [0, 1], analytic antiderivative oracle
    val = singular_quadrature(lambda x, m=m: x**m * math.sqrt(max(1.0 - x, 0.0)),
                              0.0, 1.0)
    assert val == pytest.approx(exact, rel=1e-11)


def test_inverse_sqrt_is_healed():
    # the substitution also integrates 1/sqrt(x - a)
    val = singular_quadrature(lambda x: 1.0 / math.sqrt(x), 0.0, 1.0)
    assert val == pytest.approx(2.0, rel=1e-9)


def test_quadrature_interval_validation():
    with pytest.raises(ValueError):
        singular_quadrature(lambda x: x, 1.0, 0.0)


# --- Newton --------------------------------------------------------------------

def test_newton_quadratic():
    z = newton_complex(lambda z: z * z + 1.0, 0.5 + 0.8j, tol=1e-12)
    assert z == pytest.approx(1j, abs=1e-12)


def test_newton_exponential():
    z = newton_complex(lambda z: np.exp(z) - 1.0, 0.1, tol=1e-13)
    assert abs(z) < 1e-13


def test_newton_supplied_derivative():
    z = newton_complex(lambda z: z**3 - 2.0, 1.0, tol=1e-13, df=lambda z: 3 * z * z)
    assert z == pytest.approx(2.0 ** (1.0 / 3.0), abs=1e-12)


def test_newton_failure_carries_best_iterate():
    # derivative vanishes at the start: no progress possible
    with pytest.raises(NoConvergence) as err:
        newton_complex(lambda z: z * z + 1.0, 0.0 + 0.0j, tol=1e-12, max_steps=5)
    assert err.value.best is not None
    assert err.value.residual >= 0.0
