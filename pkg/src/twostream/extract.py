"""Global stream functions for a given velocity field, and gauge maps.

For a divergence-free periodic field with ``v1`` of one sign, every point is
traced backward along its streamline to the inflow plane ``x = 0``.  The
landing coordinates ``(Y, Z)`` are flow invariants, and

    f = F(Y),   g = G(Y, Z),   F' (Y) = a(Y),   dG/dZ = b(Y, Z),

with ``v1(0, Y, Z) = a(Y) b(Y, Z)``, satisfy ``grad f x grad g = v``.  The
antiderivatives are taken spectrally on the inflow slice and evaluated at the
traced points by trigonometric interpolation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.ndimage import map_coordinates, spline_filter

from .euler import DegenerateVelocityError, velocity
from .fields import GridSpec, StreamPair, VectorField3

__all__ = [
    "CharacteristicTrace",
    "FluxFactorization",
    "VelocityInterpolator",
    "GaugeMap",
    "TransportedBernoulli",
    "GaugeError",
    "trace_invariants",
    "trace_grid",
    "factorize_flux",
    "extract_streams",
    "gauge_transform",
    "verify_representation",
]

V1_THRESHOLD = 1e-8
PAD = 8


class GaugeError(ValueError):
    """The gauge map is not unimodular (or not invertible) to tolerance."""


@dataclass(frozen=True)
class CharacteristicTrace:
    origin: tuple[float, float, float]
    T: float
    Y: float
    Z: float


@dataclass(frozen=True, eq=False)
class FluxFactorization:
    alpha: float
    a: np.ndarray  # (Ny,)
    b: np.ndarray  # (Ny, Nz)


class VelocityInterpolator:
    """Cubic-spline interpolation of a periodic velocity on the channel.

    The samples are padded periodically in y and z; in x they are extended
    past the walls by odd reflection about the wall value so the spline is
    well defined up to and including the walls.
    """

    def __init__(self, v: VectorField3, order: int = 3):
        self.grid = v.grid
        self.order = order
        self.flagged = order < 3
        p = PAD
        self._coeffs = []
        for comp in v.values:
            a = np.pad(comp, ((0, 0), (p, p), (p, p)), mode="wrap")
            lo = 2 * a[0] - a[1 : p + 1][::-1]
            hi = 2 * a[-1] - a[-p - 1 : -1][::-1]
            a = np.concatenate([lo, a, hi], axis=0)
            if order > 1:
                a = spline_filter(a, order=order, mode="nearest")
            self._coeffs.append(a)

    def __call__(self, x, y, z) -> np.ndarray:
        g = self.grid
        coords = np.stack(
            [
                np.asarray(x, dtype=float) / g.hx + PAD,
                np.mod(y, g.P1) / g.hy + PAD,
                np.mod(z, g.P2) / g.hz + PAD,
            ]
        )
        return np.stack(
            [
                map_coordinates(c, coords, order=self.order, mode="nearest", prefilter=False)
                for c in self._coeffs
            ]
        )


def _trace(interp: VelocityInterpolator, x0, y0, z0, rtol, atol):
    """Backward trace of many points at once in the x-parametrized form."""
    x0, y0, z0 = (np.atleast_1d(np.asarray(a, dtype=float)).ravel() for a in (x0, y0, z0))
    n = x0.size
    sign = np.sign(interp(np.zeros(1), np.zeros(1), np.zeros(1))[0, 0])
    bad = {"flip": False}

    def rhs(s, u):
        y, z = u[:n], u[n : 2 * n]
        x = x0 * (1.0 - s)
        vel = interp(x, y, z)
        v1 = vel[0]
        if np.any(np.sign(v1) != sign) or np.any(np.abs(v1) < V1_THRESHOLD):
            bad["flip"] = True
            v1 = np.where(np.abs(v1) < V1_THRESHOLD, sign * V1_THRESHOLD, v1)
        return np.concatenate([-x0 * vel[1] / v1, -x0 * vel[2] / v1, x0 / v1])

    u0 = np.concatenate([y0, z0, np.zeros(n)])
    sol = solve_ivp(rhs, (0.0, 1.0), u0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"characteristic integration failed: {sol.message}")
    if bad["flip"]:
        raise DegenerateVelocityError("v1 changes sign or vanishes along a traced path")
    u = sol.y[:, -1]
    return u[2 * n :], u[:n], u[n : 2 * n]


def _check_v1(v: VectorField3):
    v1 = v.values[0]
    if np.min(np.abs(v1)) < V1_THRESHOLD or not (np.all(v1 > 0) or np.all(v1 < 0)):
        raise DegenerateVelocityError("v1 must be one-signed and bounded away from zero")


def trace_invariants(v: VectorField3, point, rtol: float = 1e-11, atol: float = 1e-13, interp=None) -> CharacteristicTrace:
    """Trace the streamline through ``point`` back to ``x = 0``.

    Integrates ``d(y, z)/dx = (v2, v3)/v1`` and ``dT/dx = 1/v1`` with an
    adaptive Runge-Kutta scheme; ``T`` is signed (negative when v1 < 0).
    """
    _check_v1(v)
    x, y, z = (float(c) for c in point)
    if not (0.0 <= x <= v.grid.L):
        raise ValueError(f"x={x} lies outside the channel")
    interp = interp or VelocityInterpolator(v)
    T, Y, Z = _trace(interp, x, y, z, rtol, atol)
    return CharacteristicTrace((x, y, z), float(T[0]), float(Y[0]), float(Z[0]))


def trace_grid(v: VectorField3, rtol: float = 1e-11, atol: float = 1e-13):
    """``(T, Y, Z)`` arrays for every grid node."""
    _check_v1(v)
    g = v.grid
    X, Y, Z = g.full_mesh()
    T, Yl, Zl = _trace(VelocityInterpolator(v), X, Y, Z, rtol, atol)
    return T.reshape(g.shape), Yl.reshape(g.shape), Zl.reshape(g.shape)


def factorize_flux(v1_slice: np.ndarray) -> FluxFactorization:
    """``v1(0, Y, Z) = a(Y) b(Y, Z)`` with ``a`` the Z-average and ``alpha`` the mean of ``a``."""
    s = np.asarray(v1_slice, dtype=float)
    if s.ndim != 2:
        raise ValueError("expected a 2-D slice (Ny, Nz)")
    if not (np.all(s > 0) or np.all(s < 0)):
        raise DegenerateVelocityError("inflow flux changes sign")
    a = s.mean(axis=1)
    b = s / a[:, None]
    return FluxFactorization(float(a.mean()), a, b)


def _antiderivative_1d(vals: np.ndarray, period: float):
    """Mean and Fourier coefficients of the periodic part of an antiderivative."""
    n = vals.size
    c = np.fft.fft(vals) / n
    k = 2 * np.pi * np.fft.fftfreq(n, d=period / n)
    mean = c[0].real
    out = np.zeros_like(c)
    nz = k != 0
    out[nz] = c[nz] / (1j * k[nz])
    out[n // 2] = 0.0
    return mean, out, k


def _eval_1d(coef, k, pts):
    return np.real(np.exp(1j * np.multiply.outer(pts, k)) @ coef)


def _stream_evaluators(fact: FluxFactorization, grid: GridSpec):
    """Callables ``F(Y)`` and ``G(Y, Z)`` normalized by ``F(0) = G(Y, 0) = 0``."""
    alpha, cF, kF = _antiderivative_1d(fact.a, grid.P1)
    F0 = _eval_1d(cF, kF, np.zeros(1))[0]

    def F(Y):
        Y = np.asarray(Y, dtype=float)
        return alpha * Y + _eval_1d(cF, kF, Y.ravel()).reshape(Y.shape) - F0

    Ny, Nz = fact.b.shape
    bh = np.fft.fft(fact.b, axis=1) / Nz
    kz = 2 * np.pi * np.fft.fftfreq(Nz, d=grid.P2 / Nz)
    Gz = np.zeros_like(bh)
    nz = kz != 0
    Gz[:, nz] = bh[:, nz] / (1j * kz[nz])
    Gz[:, Nz // 2] = 0.0
    # G(Y, Z) = Z + sum_k Gz[Y, k] (e^{ikZ} - 1); means of b over Z are 1 by construction
    Gz0 = Gz.copy()
    Gz0[:, 0] = -Gz[:, 1:].sum(axis=1)
    C = np.fft.fft(Gz0, axis=0) / Ny  # modes in Y
    ky = 2 * np.pi * np.fft.fftfreq(Ny, d=grid.P1 / Ny)
    C[Ny // 2, :] = 0.0

    def G(Y, Z, chunk: int = 4096):
        Y = np.asarray(Y, dtype=float)
        Z = np.asarray(Z, dtype=float)
        shape = np.broadcast(Y, Z).shape
        Yf = np.broadcast_to(Y, shape).ravel()
        Zf = np.broadcast_to(Z, shape).ravel()
        out = np.empty(Yf.size)
        for s in range(0, Yf.size, chunk):
            ey = np.exp(1j * np.multiply.outer(Yf[s : s + chunk], ky))
            ez = np.exp(1j * np.multiply.outer(Zf[s : s + chunk], kz))
            out[s : s + chunk] = np.real(np.sum((ey @ C) * ez, axis=1))
        return Zf.reshape(shape) + out.reshape(shape)

    return alpha, F, G


def extract_streams(
    v: VectorField3,
    rtol: float = 1e-11,
    atol: float = 1e-13,
    div_tol: float = 1e-6,
    return_info: bool = False,
):
    """Build a pair with linear parts ``(0, alpha, 0)``, ``(0, 0, 1)`` and ``grad f x grad g = v``."""
    grid = v.grid
    _check_v1(v)
    div = np.max(np.abs(grid.div(v.values)))
    if div > div_tol * max(1.0, v.max_norm()):
        warnings.warn(f"velocity divergence {div:.3e} exceeds {div_tol:g}", RuntimeWarning, stacklevel=2)
    fact = factorize_flux(v.values[0][0])
    alpha, F, G = _stream_evaluators(fact, grid)
    T, Y, Z = trace_grid(v, rtol, atol)
    f = F(Y)
    g = G(Y, Z)
    Xm, Ym, Zm = grid.mesh()
    pair = StreamPair(grid, (0.0, alpha, 0.0), (0.0, 0.0, 1.0), f - alpha * Ym, g - Zm + 0 * Xm)
    if not return_info:
        return pair
    info = {
        "alpha": alpha,
        "min_abs_v1": float(np.min(np.abs(v.values[0]))),
        "max_divergence": float(div),
        "roundtrip_error": verify_representation(pair, v),
        "T": T,
        "Y": Y,
        "Z": Z,
        "factorization": fact,
    }
    return pair, info


def verify_representation(pair: StreamPair, v: VectorField3) -> float:
    """``max |grad f x grad g - v| / max(1, max |v|)`` with the public stencils."""
    diff = velocity(pair).values - v.values
    return float(np.max(np.sqrt(np.sum(diff**2, axis=0))) / max(1.0, v.max_norm()))


# -- gauge maps -----------------------------------------------------------------------------


@dataclass(frozen=True)
class GaugeMap:
    """``Phi(f, g) = T (f, g) + Phi0(f, g)``, ``Phi0`` a Fourier series on the lattice ``periods``.

    ``modes`` maps ``(m1, m2)`` to the complex pair of coefficients of the two
    components of ``Phi0``; wavevector ``2 pi (m1 / periods[0], m2 / periods[1])``.
    """

    T: np.ndarray = field(default_factory=lambda: np.eye(2))
    modes: dict = field(default_factory=dict)
    periods: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "T", np.asarray(self.T, dtype=float).reshape(2, 2))
        modes = {(int(m[0]), int(m[1])): np.asarray(c, dtype=complex).reshape(2) for m, c in dict(self.modes).items()}
        for m, c in modes.items():
            partner = modes.get((-m[0], -m[1]))
            if partner is None or np.max(np.abs(partner - np.conj(c))) > 1e-12:
                raise GaugeError(f"Phi0 coefficients not conjugate symmetric at mode {m}")
        object.__setattr__(self, "modes", modes)

    @classmethod
    def identity(cls, periods=(1.0, 1.0)) -> "GaugeMap":
        return cls(np.eye(2), {}, periods)

    def _kappa(self, m):
        return 2 * np.pi * np.array([m[0] / self.periods[0], m[1] / self.periods[1]])

    def __call__(self, f, g) -> tuple[np.ndarray, np.ndarray]:
        f = np.asarray(f, dtype=float)
        g = np.asarray(g, dtype=float)
        u = self.T[0, 0] * f + self.T[0, 1] * g
        w = self.T[1, 0] * f + self.T[1, 1] * g
        for m, c in self.modes.items():
            k = self._kappa(m)
            e = np.exp(1j * (k[0] * f + k[1] * g))
            u = u + (c[0] * e).real
            w = w + (c[1] * e).real
        return u, w

    def jacobian(self, f, g) -> np.ndarray:
        """Array of shape (2, 2, ...) holding ``Phi'(f, g)``."""
        f = np.asarray(f, dtype=float)
        g = np.asarray(g, dtype=float)
        shape = np.broadcast(f, g).shape
        J = np.empty((2, 2) + shape)
        J[:] = self.T.reshape(2, 2, *([1] * len(shape)))
        for m, c in self.modes.items():
            k = self._kappa(m)
            e = 1j * np.exp(1j * (k[0] * f + k[1] * g))
            for i in range(2):
                for j in range(2):
                    J[i, j] = J[i, j] + (c[i] * k[j] * e).real
        return J

    def det_error(self, n: int = 32) -> float:
        """``max |det Phi' - 1|`` on an ``n x n`` sample of one lattice cell."""
        s = np.linspace(0, self.periods[0], n, endpoint=False)
        t = np.linspace(0, self.periods[1], n, endpoint=False)
        F, G = np.meshgrid(s, t, indexing="ij")
        J = self.jacobian(F, G)
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        return float(np.max(np.abs(det - 1.0)))

    def inverse(self, u, w, tol: float = 1e-14, maxiter: int = 50):
        """Solve ``Phi(f, g) = (u, w)`` by Newton's method from ``T^{-1}(u, w)``."""
        u = np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        Ti = np.linalg.inv(self.T)
        f = Ti[0, 0] * u + Ti[0, 1] * w
        g = Ti[1, 0] * u + Ti[1, 1] * w
        for _ in range(maxiter):
            pu, pw = self(f, g)
            ru, rw = pu - u, pw - w
            if max(np.max(np.abs(ru)), np.max(np.abs(rw))) <= tol * max(1.0, np.max(np.abs(u)), np.max(np.abs(w))):
                return f, g
            J = self.jacobian(f, g)
            det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
            f = f - (J[1, 1] * ru - J[0, 1] * rw) / det
            g = g - (-J[1, 0] * ru + J[0, 0] * rw) / det
        raise GaugeError("inverse of the gauge map did not converge")


class TransportedBernoulli:
    """``H o Phi^{-1}``, evaluated by inverting the gauge map pointwise."""

    is_zero = False
    coeffs: dict = {}

    def __init__(self, bernoulli, phi: GaugeMap):
        self.base = bernoulli
        self.phi = phi

    def value(self, f, g):
        a, b = self.phi.inverse(f, g)
        return self.base.value(a, b)

    def first(self, f, g):
        a, b = self.phi.inverse(f, g)
        Hf, Hg = self.base.first(a, b)
        J = self.phi.jacobian(a, b)
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        # grad(H o Phi^{-1}) = Phi'^{-T} grad H
        return (J[1, 1] * Hf - J[1, 0] * Hg) / det, (-J[0, 1] * Hf + J[0, 0] * Hg) / det


def gauge_transform(pair: StreamPair, phi: GaugeMap, det_tol: float = 1e-8) -> StreamPair:
    """Compose ``(f, g)`` with a unimodular map; the velocity is unchanged."""
    err = phi.det_error()
    if err > det_tol:
        raise GaugeError(f"det Phi' deviates from 1 by {err:.3e}")
    fv, gv = phi(pair.f_values(), pair.g_values())
    T = phi.T
    lin_f = T[0, 0] * pair.linear_f + T[0, 1] * pair.linear_g
    lin_g = T[1, 0] * pair.linear_f + T[1, 1] * pair.linear_g
    Xm, Ym, Zm = pair.grid.mesh()

    def lin(c):
        return c[0] * Xm + c[1] * Ym + c[2] * Zm

    return StreamPair(pair.grid, lin_f, lin_g, fv - lin(lin_f), gv - lin(lin_g))
