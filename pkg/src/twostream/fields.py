"""Channel grid, periodic fields, stencils, quadrature, Sobolev norms and smoothing.

The channel cell is ``(0, L) x (0, P1) x (0, P2)``.  The x direction is
sampled at ``Nx`` nodes including both walls; y and z are periodic and
sampled without a duplicated seam point.  Derivatives in y and z are
Fourier-collocation derivatives; derivatives in x are second-order finite
differences.

Two x discretizations are provided:

* :meth:`GridSpec.dx` -- centered interior, second-order one-sided rows at
  the walls.  Used by the public :func:`gradient` family and every
  verification metric.
* :meth:`GridSpec.grad_mid` and :meth:`GridSpec.div_mid` -- a staggered
  pair for the variational operators.  Gradients live at the ``Nx - 1``
  cell midpoints (x by a compact difference, y and z by averaging the two
  neighbouring nodes); ``div_mid`` is minus their adjoint, so a residual
  ``-div_mid(q(grad_mid u))`` is exactly the gradient of a midpoint-rule
  energy and is consistent at second order on every interior node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Sequence

import numpy as np
import scipy.fft as sfft

__all__ = [
    "GridSpec",
    "ScalarField3",
    "VectorField3",
    "StreamPair",
    "SmoothingParams",
    "GridMismatchError",
    "gradient",
    "cross",
    "divergence",
    "curl",
    "integrate",
    "sobolev_norm",
    "sobolev_norms",
    "smooth",
    "MAX_SOBOLEV_ORDER",
]

MAX_SOBOLEV_ORDER = 6


class GridMismatchError(ValueError):
    """Raised when fields living on different grids are combined."""


@dataclass(frozen=True)
class GridSpec:
    """Discrete channel cell.

    ``L`` is the channel length, ``P1`` and ``P2`` the periods in y and z.
    """

    L: float
    P1: float
    P2: float
    Nx: int
    Ny: int
    Nz: int
    x_scheme: str = "centered-second-order"

    def __post_init__(self):
        for name in ("L", "P1", "P2"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive, got {val}")
        if self.Nx < 4:
            raise ValueError(f"Nx must be >= 4, got {self.Nx}")
        for name in ("Ny", "Nz"):
            n = getattr(self, name)
            if n < 4 or n % 2:
                raise ValueError(f"{name} must be even and >= 4, got {n}")
        if self.x_scheme != "centered-second-order":
            raise ValueError(f"unknown x_scheme {self.x_scheme!r}")

    @classmethod
    def cube(cls, n: int, L: float = 1.0, P1: float = 1.0, P2: float = 1.0) -> "GridSpec":
        return cls(L, P1, P2, n, n, n)

    # -- geometry -------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.Nx, self.Ny, self.Nz)

    @property
    def hx(self) -> float:
        return self.L / (self.Nx - 1)

    @property
    def hy(self) -> float:
        return self.P1 / self.Ny

    @property
    def hz(self) -> float:
        return self.P2 / self.Nz

    @property
    def volume(self) -> float:
        return self.L * self.P1 * self.P2

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.Nx)

    @cached_property
    def y(self) -> np.ndarray:
        return np.arange(self.Ny) * self.hy

    @cached_property
    def z(self) -> np.ndarray:
        return np.arange(self.Nz) * self.hz

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable coordinate arrays ``(X, Y, Z)``."""
        return (
            self.x[:, None, None],
            self.y[None, :, None],
            self.z[None, None, :],
        )

    def full_mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        X, Y, Z = np.meshgrid(self.x, self.y, self.z, indexing="ij")
        return X, Y, Z

    @cached_property
    def wx(self) -> np.ndarray:
        """Trapezoid weights in x."""
        w = np.full(self.Nx, self.hx)
        w[0] = w[-1] = 0.5 * self.hx
        return w

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights, shape (Nx, 1, 1); multiply by a field and sum."""
        return (self.wx * self.hy * self.hz)[:, None, None]

    @cached_property
    def ky(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.Ny, d=self.hy)

    @cached_property
    def kz(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.Nz, d=self.hz)

    @cached_property
    def _iky(self) -> np.ndarray:
        k = 1j * self.ky.copy()
        k[self.Ny // 2] = 0.0  # Nyquist mode has no odd derivative
        return k[None, :, None]

    @cached_property
    def _ikz(self) -> np.ndarray:
        k = 1j * np.fft.rfftfreq(self.Nz, d=self.hz) * 2 * np.pi
        k[-1] = 0.0
        return k[None, None, :]

    # -- array-level derivatives --------------------------------------
    def dx(self, u: np.ndarray) -> np.ndarray:
        """Second-order x derivative with one-sided second-order wall rows."""
        h = self.hx
        d = np.empty_like(u)
        d[1:-1] = (u[2:] - u[:-2]) / (2 * h)
        d[0] = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h)
        d[-1] = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * h)
        return d

    def dy(self, u: np.ndarray) -> np.ndarray:
        uh = np.fft.fft(u, axis=1)
        return np.fft.ifft(uh * self._iky, axis=1).real

    def dz(self, u: np.ndarray) -> np.ndarray:
        uh = np.fft.rfft(u, axis=2)
        return np.fft.irfft(uh * self._ikz, n=self.Nz, axis=2)

    def d(self, u: np.ndarray, axis: int) -> np.ndarray:
        if axis == 0:
            return self.dx(u)
        if axis == 1:
            return self.dy(u)
        return self.dz(u)

    def grad(self, u: np.ndarray) -> np.ndarray:
        return np.stack([self.d(u, a) for a in range(3)])

    def div(self, V: np.ndarray) -> np.ndarray:
        return self.dx(V[0]) + self.dy(V[1]) + self.dz(V[2])

    # -- staggered pair for the variational operators ------------------
    @property
    def midpoint_weight(self) -> float:
        """Quadrature weight of one midpoint sample."""
        return self.hx * self.hy * self.hz

    def grad_mid(self, u: np.ndarray) -> np.ndarray:
        """Gradient at the x-midpoints, shape ``(3, Nx - 1, Ny, Nz)``."""
        return np.stack(
            [
                (u[1:] - u[:-1]) / self.hx,
                _avg(self.dy(u)),
                _avg(self.dz(u)),
            ]
        )

    def div_mid(self, Q: np.ndarray) -> np.ndarray:
        """Divergence of a midpoint field at the nodes; wall rows are zero."""
        out = np.zeros((self.Nx,) + Q.shape[2:])
        out[1:-1] = (Q[0][1:] - Q[0][:-1]) / self.hx + self.dy(_avg(Q[1])) + self.dz(_avg(Q[2]))
        return out

    def integrate(self, u: np.ndarray) -> float:
        return float(np.sum(self.weights * u))

    def inner(self, u: np.ndarray, w: np.ndarray) -> float:
        return float(np.sum(self.weights * u * w))

    def field(self, values: np.ndarray, name: str = "") -> "ScalarField3":
        return ScalarField3(self, np.asarray(values, dtype=float), name)

    def zeros(self, name: str = "") -> "ScalarField3":
        return ScalarField3(self, np.zeros(self.shape), name)

    def sample(self, fn, name: str = "") -> "ScalarField3":
        """Sample ``fn(X, Y, Z)`` on the grid (broadcast to full shape)."""
        X, Y, Z = self.mesh()
        vals = np.broadcast_to(np.asarray(fn(X, Y, Z), dtype=float), self.shape).copy()
        return ScalarField3(self, vals, name)


def _avg(u: np.ndarray) -> np.ndarray:
    """Mean of neighbouring x samples."""
    return 0.5 * (u[1:] + u[:-1])


def _check_finite(values: np.ndarray, what: str = "field"):
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{what} contains non-finite values")


@dataclass(frozen=True, eq=False)
class ScalarField3:
    """A real scalar sampled on the grid, periodic in y and z."""

    grid: GridSpec
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise GridMismatchError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def _other(self, other):
        if isinstance(other, ScalarField3):
            if other.grid != self.grid:
                raise GridMismatchError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return ScalarField3(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarField3(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return ScalarField3(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return ScalarField3(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ScalarField3(self.grid, self.values / self._other(other))

    def __neg__(self):
        return ScalarField3(self.grid, -self.values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class VectorField3:
    """Three components on one grid; ``values`` has shape (3, Nx, Ny, Nz)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (3,) + self.grid.shape:
            raise GridMismatchError(
                f"vector values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @classmethod
    def from_components(cls, comps: Sequence[ScalarField3]) -> "VectorField3":
        grid = comps[0].grid
        for c in comps[1:]:
            if c.grid != grid:
                raise GridMismatchError("components live on different grids")
        return cls(grid, np.stack([c.values for c in comps]))

    @classmethod
    def constant(cls, grid: GridSpec, vec) -> "VectorField3":
        vals = np.empty((3,) + grid.shape)
        vals[:] = np.asarray(vec, dtype=float)[:, None, None, None]
        return cls(grid, vals)

    def component(self, i: int) -> ScalarField3:
        return ScalarField3(self.grid, self.values[i])

    @property
    def x(self) -> ScalarField3:
        return self.component(0)

    @property
    def y(self) -> ScalarField3:
        return self.component(1)

    @property
    def z(self) -> ScalarField3:
        return self.component(2)

    def norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.values**2, axis=0))

    def max_norm(self) -> float:
        return float(np.max(self.norm()))

    def __sub__(self, other: "VectorField3") -> "VectorField3":
        if other.grid != self.grid:
            raise GridMismatchError("fields live on different grids")
        return VectorField3(self.grid, self.values - other.values)

    def __add__(self, other: "VectorField3") -> "VectorField3":
        if other.grid != self.grid:
            raise GridMismatchError("fields live on different grids")
        return VectorField3(self.grid, self.values + other.values)


@dataclass(frozen=True, eq=False)
class StreamPair:
    """An admissible pair (f, g) stored as linear part plus periodic correction.

    ``f(x, y, z) = linear_f . (x, y, z) + periodic_f`` and likewise for g.
    """

    grid: GridSpec
    linear_f: np.ndarray = field(default_factory=lambda: np.zeros(3))
    linear_g: np.ndarray = field(default_factory=lambda: np.zeros(3))
    periodic_f: np.ndarray | None = None
    periodic_g: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "linear_f", np.asarray(self.linear_f, dtype=float).reshape(3))
        object.__setattr__(self, "linear_g", np.asarray(self.linear_g, dtype=float).reshape(3))
        for name in ("periodic_f", "periodic_g"):
            val = getattr(self, name)
            if val is None:
                val = np.zeros(self.grid.shape)
            elif isinstance(val, ScalarField3):
                if val.grid != self.grid:
                    raise GridMismatchError(f"{name} lives on a different grid")
                val = val.values
            val = np.asarray(val, dtype=float)
            if val.shape != self.grid.shape:
                raise GridMismatchError(f"{name} has shape {val.shape}, grid is {self.grid.shape}")
            object.__setattr__(self, name, val)

    @classmethod
    def linear(cls, grid: GridSpec, grad_f, grad_g) -> "StreamPair":
        return cls(grid, grad_f, grad_g)

    @classmethod
    def periodic(cls, grid: GridSpec, F, G) -> "StreamPair":
        return cls(grid, np.zeros(3), np.zeros(3), F, G)

    def __add__(self, other: "StreamPair") -> "StreamPair":
        if other.grid != self.grid:
            raise GridMismatchError("pairs live on different grids")
        return StreamPair(
            self.grid,
            self.linear_f + other.linear_f,
            self.linear_g + other.linear_g,
            self.periodic_f + other.periodic_f,
            self.periodic_g + other.periodic_g,
        )

    def scaled(self, lam: float) -> "StreamPair":
        return StreamPair(
            self.grid,
            lam * self.linear_f,
            lam * self.linear_g,
            lam * self.periodic_f,
            lam * self.periodic_g,
        )

    def swapped(self) -> "StreamPair":
        return StreamPair(self.grid, self.linear_g, self.linear_f, self.periodic_g, self.periodic_f)

    def _linear_values(self, lin: np.ndarray) -> np.ndarray:
        X, Y, Z = self.grid.mesh()
        return lin[0] * X + lin[1] * Y + lin[2] * Z

    def f_values(self) -> np.ndarray:
        return self._linear_values(self.linear_f) + self.periodic_f

    def g_values(self) -> np.ndarray:
        return self._linear_values(self.linear_g) + self.periodic_g

    def grad_f(self) -> np.ndarray:
        return self.grid.grad(self.periodic_f) + self.linear_f[:, None, None, None]

    def grad_g(self) -> np.ndarray:
        return self.grid.grad(self.periodic_g) + self.linear_g[:, None, None, None]

    def grad_f_mid(self) -> np.ndarray:
        return self.grid.grad_mid(self.periodic_f) + self.linear_f[:, None, None, None]

    def grad_g_mid(self) -> np.ndarray:
        return self.grid.grad_mid(self.periodic_g) + self.linear_g[:, None, None, None]

    @property
    def R(self) -> np.ndarray:
        """Jacobian of the linear parts with respect to (y, z)."""
        return np.array([self.linear_f[1:], self.linear_g[1:]])

    def boundary_max(self) -> float:
        """Largest periodic-part magnitude on the walls x=0 and x=L."""
        vals = [
            np.abs(self.periodic_f[[0, -1]]).max(),
            np.abs(self.periodic_g[[0, -1]]).max(),
        ]
        return float(max(vals))


@dataclass(frozen=True)
class SmoothingParams:
    """Sharp spectral cutoff: modes with wavenumber magnitude above ``theta`` are removed."""

    theta: float
    x_mode_basis: str = "sine"

    def __post_init__(self):
        if not self.theta > 1:
            raise ValueError(f"theta must exceed 1, got {self.theta}")
        if self.x_mode_basis != "sine":
            raise ValueError("only the sine basis is supported in x")


# -- public field-level operations -----------------------------------


def _values(f) -> tuple[GridSpec, np.ndarray]:
    if isinstance(f, ScalarField3):
        return f.grid, f.values
    raise TypeError(f"expected ScalarField3, got {type(f).__name__}")


def gradient(field: ScalarField3) -> VectorField3:
    grid, u = _values(field)
    _check_finite(u)
    return VectorField3(grid, grid.grad(u))


def cross(u: VectorField3, v: VectorField3) -> VectorField3:
    if u.grid != v.grid:
        raise GridMismatchError("cross product of fields on different grids")
    return VectorField3(u.grid, np.cross(u.values, v.values, axis=0))


def divergence(v: VectorField3) -> ScalarField3:
    _check_finite(v.values)
    return ScalarField3(v.grid, v.grid.div(v.values))


def curl(v: VectorField3) -> VectorField3:
    _check_finite(v.values)
    return VectorField3(v.grid, curl_array(v.grid, v.values))


def curl_array(grid: GridSpec, V: np.ndarray) -> np.ndarray:
    d = grid.d
    return np.stack(
        [
            d(V[2], 1) - d(V[1], 2),
            d(V[0], 2) - d(V[2], 0),
            d(V[1], 0) - d(V[0], 1),
        ]
    )


def integrate(field: ScalarField3) -> float:
    """Trapezoid rule in x, rectangle rule in y and z."""
    grid, u = _values(field)
    return grid.integrate(u)


def _pair_arrays(pair) -> tuple[GridSpec | None, list[np.ndarray]]:
    grid = None
    arrays = []
    for item in pair:
        if isinstance(item, ScalarField3):
            if grid is not None and item.grid != grid:
                raise GridMismatchError("pair components on different grids")
            grid = item.grid
            arrays.append(item.values)
        else:
            arrays.append(np.asarray(item, dtype=float))
    return grid, arrays


def multi_indices(k: int) -> list[tuple[int, int, int]]:
    return [a for a in product(range(k + 1), repeat=3) if sum(a) <= k]


def sobolev_norm(pair, k: int, grid: GridSpec | None = None) -> float:
    """H^k norm of a pair of fields over one period cell.

    Sums ``||d^a F||^2 + ||d^a G||^2`` over all multi-indices ``|a| <= k``;
    derivatives are repeated :func:`gradient` stencils.  ``pair`` may hold
    :class:`ScalarField3` objects or raw arrays (then ``grid`` is required).
    """
    if not (0 <= k <= MAX_SOBOLEV_ORDER) or int(k) != k:
        raise ValueError(f"Sobolev order must be an integer in [0, {MAX_SOBOLEV_ORDER}], got {k}")
    g2, arrays = _pair_arrays(pair)
    grid = grid or g2
    if grid is None:
        raise ValueError("a grid is required for raw arrays")
    total = 0.0
    for u in arrays:
        total += sum(grid.integrate(d * d) for d in _all_derivatives(grid, u, k).values())
    return float(np.sqrt(total))


def sobolev_norms(pair, orders, grid: GridSpec | None = None) -> dict[int, float]:
    """:func:`sobolev_norm` at several orders sharing one derivative tree."""
    orders = sorted(set(int(k) for k in orders))
    if orders and not (0 <= orders[0] and orders[-1] <= MAX_SOBOLEV_ORDER):
        raise ValueError(f"Sobolev orders must lie in [0, {MAX_SOBOLEV_ORDER}], got {orders}")
    g2, arrays = _pair_arrays(pair)
    grid = grid or g2
    if grid is None:
        raise ValueError("a grid is required for raw arrays")
    by_order = np.zeros(orders[-1] + 1)
    for u in arrays:
        for a, d in _all_derivatives(grid, u, orders[-1]).items():
            by_order[sum(a)] += grid.integrate(d * d)
    cum = np.cumsum(by_order)
    return {k: float(np.sqrt(cum[k])) for k in orders}


def _all_derivatives(grid: GridSpec, u: np.ndarray, k: int) -> dict:
    """Map multi-index -> derivative array for every ``|a| <= k``."""
    out = {(0, 0, 0): u}
    frontier = [(0, 0, 0)]
    for _ in range(k):
        nxt = []
        for a in frontier:
            base = out[a]
            # extend only along the last non-zero axis or later, so each
            # multi-index is reached exactly once
            last = max((i for i in range(3) if a[i]), default=0)
            for ax in range(last, 3):
                b = list(a)
                b[ax] += 1
                b = tuple(b)
                out[b] = grid.d(base, ax)
                nxt.append(b)
        frontier = nxt
    return out


def max_derivative_norm(grid: GridSpec, u: np.ndarray, k: int) -> float:
    """Grid max-norm surrogate for the C^k norm (max over |a| <= k of max |d^a u|)."""
    return float(max(np.max(np.abs(d)) for d in _all_derivatives(grid, u, k).values()))


def _cutoff_mask(grid: GridSpec, theta: float) -> np.ndarray:
    n = np.arange(1, grid.Nx - 1)
    kx = n * np.pi / grid.L
    k2 = kx[:, None, None] ** 2 + grid.ky[None, :, None] ** 2 + grid.kz[None, None, :] ** 2
    return k2 <= theta**2


def max_wavenumber(grid: GridSpec) -> float:
    kx = (grid.Nx - 2) * np.pi / grid.L
    return float(np.sqrt(kx**2 + np.max(grid.ky**2) + np.max(grid.kz**2)))


def smooth_array(grid: GridSpec, u: np.ndarray, theta: float) -> np.ndarray:
    """Sharp cutoff in the sine(x) x Fourier(y, z) basis; walls set to zero."""
    if theta >= max_wavenumber(grid):
        out = u.copy()
        out[0] = out[-1] = 0.0
        return out
    c = sfft.dst(u[1:-1], type=1, axis=0)
    c = np.fft.fft2(c, axes=(1, 2))
    c *= _cutoff_mask(grid, theta)
    c = np.fft.ifft2(c, axes=(1, 2)).real
    out = np.zeros_like(u)
    out[1:-1] = sfft.idst(c, type=1, axis=0)
    return out


def smooth(pair, params: SmoothingParams, grid: GridSpec | None = None):
    """Apply the smoothing projection to both members of ``pair``."""
    g2, arrays = _pair_arrays(pair)
    grid = grid or g2
    if grid is None:
        raise ValueError("a grid is required for raw arrays")
    out = [smooth_array(grid, u, params.theta) for u in arrays]
    if g2 is not None:
        return tuple(ScalarField3(grid, o) for o in out)
    return tuple(out)
