"""Grid checks of momentum and kinetic operators in spherical coordinates.

Two facts are demonstrated numerically:

* the Hermitian radial momentum is the Jacobian-dressed derivative
  p_r = -i hbar (1/r) d/dr r, and the bare -i hbar d/dr is *not*
  Hermitian under the r^2-weighted inner product;

* assembling a kinetic operator from the "canonically conjugated"
  spherical momenta p_r, p_theta, p_phi does not give -hbar^2/(2m) times
  the Laplacian: the difference is multiplication by

      -(hbar^2 / 2m) (cos^2 theta - 2) / (4 r^2 sin^2 theta),

  independent of the test function.

The correct Cartesian-defined operator is validated separately through the
hydrogen s-spectrum of the radial problem.

Grids are uniform and offset (first node at h/2) so the axis and origin,
where the spurious multiplier is singular, carry no nodes. Derivatives are
central differences with zero extension beyond the grid, which is accurate
for test functions that decay inside the boundaries.
"""

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, DivisionNearZero, GridTooCoarse

__all__ = [
    "RadialGrid",
    "SphericalGrid",
    "GridFunction",
    "apply_radial_momentum",
    "hermiticity_residual",
    "kinetic_discrepancy",
    "DiscrepancyResult",
    "hydrogen_radial_levels",
]

_STENCILS_D1 = {
    2: (np.array([-0.5, 0.0, 0.5]), 1),
    4: (np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0, 2),
    6: (np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0, 3),
}
_STENCILS_D2 = {
    2: (np.array([1.0, -2.0, 1.0]), 1),
    4: (np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0, 2),
    6: (np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0, 3),
}


def _diff(values: np.ndarray, h: float, axis: int, order: int = 4, deriv: int = 1):
    """Central finite difference with zero extension beyond both ends."""
    table = _STENCILS_D1 if deriv == 1 else _STENCILS_D2
    if order not in table:
        raise ValueError(f"unsupported stencil order {order}")
    coeffs, half = table[order]
    n = values.shape[axis]
    if n < 2 * half + 1:
        raise GridTooCoarse(f"axis length {n} < stencil width {2 * half + 1}")
    pad_shape = list(values.shape)
    pad_shape[axis] = half
    pad = np.zeros(pad_shape, dtype=values.dtype)
    ext = np.concatenate([pad, values, pad], axis=axis)
    out = np.zeros_like(values)
    for k, c in enumerate(coeffs):
        if c == 0.0:
            continue
        out = out + c * np.take(ext, np.arange(k, k + n), axis=axis)
    return out / h**deriv


@dataclass(frozen=True)
class RadialGrid:
    """Uniform offset radial grid r_i = (i + 1/2) h with Jacobian r^2."""

    r: np.ndarray
    h: float

    @classmethod
    def offset(cls, n_points: int, r_max: float) -> "RadialGrid":
        h = r_max / n_points
        return cls(r=(np.arange(n_points) + 0.5) * h, h=h)

    def __post_init__(self):
        if np.any(self.r <= 0):
            raise ValueError("radial nodes must be strictly positive")

    @property
    def weights(self) -> np.ndarray:
        return self.r**2 * self.h


@dataclass(frozen=True)
class SphericalGrid:
    """Uniform offset (r, theta) product grid with Jacobian r^2 sin(theta).

    phi-independent test functions are sufficient for the operator checks:
    the azimuthal momentum term is identical in both kinetic assemblies.
    """

    r: np.ndarray
    theta: np.ndarray
    h_r: float
    h_theta: float

    @classmethod
    def offset(cls, n_r: int, n_theta: int, r_max: float) -> "SphericalGrid":
        h_r = r_max / n_r
        h_t = np.pi / n_theta
        return cls(
            r=(np.arange(n_r) + 0.5) * h_r,
            theta=(np.arange(n_theta) + 0.5) * h_t,
            h_r=h_r,
            h_theta=h_t,
        )

    def __post_init__(self):
        if np.any(self.r <= 0):
            raise ValueError("radial nodes must be strictly positive")
        if np.any(self.theta <= 0) or np.any(self.theta >= np.pi):
            raise ValueError("polar nodes must lie strictly inside (0, pi)")

    @property
    def mesh(self):
        return np.meshgrid(self.r, self.theta, indexing="ij")

    @property
    def weights(self) -> np.ndarray:
        R, TH = self.mesh
        return R**2 * np.sin(TH) * self.h_r * self.h_theta


@dataclass(frozen=True)
class GridFunction:
    """Complex samples on a radial or spherical grid."""

    values: np.ndarray
    grid: Union[RadialGrid, SphericalGrid]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        expected = (
            self.grid.r.shape
            if isinstance(self.grid, RadialGrid)
            else (self.grid.r.size, self.grid.theta.size)
        )
        if vals.shape != tuple(np.atleast_1d(expected)):
            raise ValueError(f"values shape {vals.shape} does not match grid {expected}")
        if not np.all(np.isfinite(vals.view(float))):
            raise ValueError("grid function must be finite")
        object.__setattr__(self, "values", vals)

    def norm(self) -> float:
        w = self.grid.weights
        return float(np.sqrt(np.sum(w * np.abs(self.values) ** 2).real))

    @classmethod
    def sample(cls, fn: Callable, grid) -> "GridFunction":
        if isinstance(grid, RadialGrid):
            return cls(np.asarray([fn(float(r)) for r in grid.r], dtype=complex), grid)
        R, TH = grid.mesh
        return cls(np.asarray(fn(R, TH), dtype=complex), grid)


def apply_radial_momentum(
    f: GridFunction,
    hbar: float = 1.0,
    order: int = 4,
    form: str = "dressed",
) -> GridFunction:
    """Radial momentum acting on a radial grid function.

    ``form`` selects the discretization:

    * ``"dressed"``  : -i hbar (1/r) D(r f), the Hermitian operator as
      written. With midpoint weights this discretization is exactly
      anti-symmetric, so its Hermiticity residual sits at rounding level.
    * ``"expanded"`` : -i hbar (D f + f / r), the same operator after the
      product rule. Analytically identical, but discretely the summation
      by parts is inexact, so the Hermiticity residual decays at the
      stencil order. Used for the convergence study.
    * ``"naive"``    : -i hbar D f with the Jacobian dressing dropped; not
      Hermitian, and its residual does not vanish under refinement.
    """
    if not isinstance(f.grid, RadialGrid):
        raise ValueError("radial momentum needs a RadialGrid function")
    r, h = f.grid.r, f.grid.h
    if form == "dressed":
        out = -1j * hbar * _diff(r * f.values, h, axis=0, order=order) / r
    elif form == "expanded":
        out = -1j * hbar * (_diff(f.values, h, axis=0, order=order) + f.values / r)
    elif form == "naive":
        out = -1j * hbar * _diff(f.values, h, axis=0, order=order)
    else:
        raise ValueError(f"unknown form {form!r}")
    return GridFunction(out, f.grid)


def hermiticity_residual(op: Callable[[GridFunction], GridFunction],
                         f: GridFunction, g: GridFunction) -> float:
    """|<f, op g>_J - <op f, g>_J| with the Jacobian-weighted inner product."""
    if f.grid is not g.grid and f.grid != g.grid:
        raise ValueError("f and g must live on the same grid")
    w = f.grid.weights
    lhs = np.sum(w * np.conj(f.values) * op(g).values)
    rhs = np.sum(w * np.conj(op(f).values) * g.values)
    return float(abs(lhs - rhs))


@dataclass(frozen=True)
class DiscrepancyResult:
    """Pointwise ratio of the kinetic-operator mismatch to the test function."""

    ratio: np.ndarray        # (T_wrong - T_correct) f / f, NaN where masked
    multiplier: np.ndarray   # analytic multiplier field
    mask: np.ndarray         # True where the ratio is meaningful
    max_rel_error: float     # max |ratio - multiplier| / |multiplier| on mask
    masked_fraction: float


def kinetic_multiplier(grid: SphericalGrid, hbar: float = 1.0, mass: float = 1.0):
    """The spurious multiplicative term of the spherical-momentum assembly."""
    R, TH = grid.mesh
    return -(hbar**2 / (2.0 * mass)) * (np.cos(TH) ** 2 - 2.0) / (
        4.0 * R**2 * np.sin(TH) ** 2
    )


def kinetic_discrepancy(
    f: GridFunction,
    hbar: float = 1.0,
    mass: float = 1.0,
    order: int = 4,
    mask_rel: float = 1e-3,
) -> DiscrepancyResult:
    """Apply both kinetic assemblies to f and form their difference ratio.

    T_wrong is built from the squared dressed momenta,

        p_r^2 f     = -hbar^2 (1/r) d^2/dr^2 (r f)
        p_theta^2 f = -hbar^2 (1/sqrt(sin)) d^2/dtheta^2 (sqrt(sin) f)

    (these identities hold exactly at operator level), T_correct is
    -hbar^2/(2m) times the Laplacian. The pointwise ratio
    (T_wrong f - T_correct f) / f is compared with the analytic
    multiplier; points with |f| < mask_rel * max|f| are masked.

    Raises
    ------
    DivisionNearZero
        If the mask removes every grid point.
    """
    if not isinstance(f.grid, SphericalGrid):
        raise ValueError("kinetic discrepancy needs a SphericalGrid function")
    grid = f.grid
    R, TH = grid.mesh
    S = np.sin(TH)
    F = f.values

    pr2 = -_diff(R * F, grid.h_r, axis=0, order=order, deriv=2) / R
    pth2 = -_diff(np.sqrt(S) * F, grid.h_theta, axis=1, order=order, deriv=2) / np.sqrt(S)
    t_wrong = (hbar**2 / (2.0 * mass)) * (pr2 + pth2 / R**2)

    lap = (
        _diff(F, grid.h_r, axis=0, order=order, deriv=2)
        + 2.0 * _diff(F, grid.h_r, axis=0, order=order) / R
        + (
            _diff(F, grid.h_theta, axis=1, order=order, deriv=2)
            + (np.cos(TH) / S) * _diff(F, grid.h_theta, axis=1, order=order)
        )
        / R**2
    )
    t_correct = -(hbar**2 / (2.0 * mass)) * lap

    mask = np.abs(F) > mask_rel * np.abs(F).max()
    if not mask.any():
        raise DivisionNearZero(
            f"all {F.size} points fall below the ratio threshold {mask_rel:g}"
        )
    ratio = np.full(F.shape, np.nan, dtype=complex)
    ratio[mask] = (t_wrong[mask] - t_correct[mask]) / F[mask]

    mult = kinetic_multiplier(grid, hbar=hbar, mass=mass)
    rel = np.abs(ratio[mask] - mult[mask]) / np.abs(mult[mask])
    return DiscrepancyResult(
        ratio=ratio,
        multiplier=mult,
        mask=mask,
        max_rel_error=float(rel.max()),
        masked_fraction=float(1.0 - mask.sum() / mask.size),
    )


def hydrogen_radial_levels(
    n_levels: int = 3,
    r_max: float = 120.0,
    n_points: int = 6000,
) -> np.ndarray:
    """Lowest s-wave eigenvalues of -1/2 u'' - u/r with u(0) = u(r_max) = 0.

    Symmetric tridiagonal finite-difference discretization on r_i = i h,
    atomic units. Exact values are -1/(2 n^2) hartree; the discretization
    error scales as h^2.
    """
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    if n_points < n_levels + 2:
        raise GridTooCoarse(f"{n_points} points cannot hold {n_levels} levels")
    h = r_max / (n_points + 1)
    r = h * np.arange(1, n_points + 1)
    diag = 1.0 / h**2 - 1.0 / r
    off = np.full(n_points - 1, -0.5 / h**2)
    try:
        vals = scipy.linalg.eigh_tridiagonal(
            diag, off, select="i", select_range=(0, n_levels - 1)
        )[0]
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ConvergenceFailure(f"tridiagonal eigensolver failed: {exc}") from exc
    return vals
