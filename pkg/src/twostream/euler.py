"""The nonlinear Euler-Lagrange map, the energy, and physical verification residuals.

All variational quantities (energy, nonlinear residual) use the
summation-by-parts x derivative, so the residual is the exact discrete
gradient of the discrete energy with respect to interior unknowns.  The
verification metrics (Euler momentum residual, divergence, Bernoulli
transport) use the public second-order stencils of :mod:`twostream.fields`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .fields import (
    GridMismatchError,
    GridSpec,
    ScalarField3,
    StreamPair,
    VectorField3,
    curl_array,
)

NONDEGENERACY = 1e-6


class AdmissibilityError(ValueError):
    """An iterate or problem violates an admissibility condition."""


class DegenerateVelocityError(ValueError):
    """Velocity (or its first component) vanishes somewhere on the grid."""


@dataclass(frozen=True)
class BernoulliSpec:
    """``H(f, g) = c1 f + c2 g + H0(f, g)``.

    ``H0`` is a finite Fourier series on the lattice generated by
    ``R P1 e1`` and ``R P2 e2``::

        H0(f, g) = sum_m coeffs[m] * exp(i kappa_m . (f, g))

    with ``kappa_m = 2 pi R^{-T} (m1 / P1, m2 / P2)``.  Coefficients must be
    conjugate symmetric so that H0 is real.
    """

    c1: float = 0.0
    c2: float = 0.0
    coeffs: Mapping[tuple[int, int], complex] = field(default_factory=dict)
    R: np.ndarray = field(default_factory=lambda: np.eye(2))
    P1: float = 1.0
    P2: float = 1.0

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float).reshape(2, 2)
        object.__setattr__(self, "R", R)
        coeffs = {(int(m[0]), int(m[1])): complex(c) for m, c in dict(self.coeffs).items()}
        object.__setattr__(self, "coeffs", coeffs)
        if coeffs and abs(np.linalg.det(R)) < 1e-14:
            raise ValueError("H0 needs a non-singular lattice matrix R")
        for m, c in coeffs.items():
            partner = coeffs.get((-m[0], -m[1]))
            if partner is None or abs(partner - np.conj(c)) > 1e-12 * max(1.0, abs(c)):
                raise ValueError(f"H0 coefficients not conjugate symmetric at mode {m}")

    @classmethod
    def linear(cls, c1: float, c2: float) -> "BernoulliSpec":
        return cls(c1=c1, c2=c2)

    @classmethod
    def from_modes(cls, modes, c1=0.0, c2=0.0, R=None, P1=1.0, P2=1.0) -> "BernoulliSpec":
        """Build from ``(m1, m2, coefficient)`` triples, adding conjugate partners."""
        coeffs: dict[tuple[int, int], complex] = {}
        for m1, m2, c in modes:
            c = complex(c)
            if (m1, m2) == (0, 0):
                coeffs[(0, 0)] = coeffs.get((0, 0), 0) + c.real
                continue
            coeffs[(m1, m2)] = coeffs.get((m1, m2), 0) + c
            coeffs[(-m1, -m2)] = coeffs.get((-m1, -m2), 0) + np.conj(c)
        return cls(c1, c2, coeffs, np.eye(2) if R is None else R, P1, P2)

    @property
    def is_zero(self) -> bool:
        return self.c1 == 0 and self.c2 == 0 and not any(abs(c) > 0 for c in self.coeffs.values())

    def wavevectors(self) -> tuple[list[tuple[int, int]], np.ndarray, np.ndarray]:
        modes = sorted(self.coeffs)
        if not modes:
            return [], np.zeros((0, 2)), np.zeros(0, dtype=complex)
        m = np.array(modes, dtype=float)
        scaled = np.stack([m[:, 0] / self.P1, m[:, 1] / self.P2], axis=1)
        kappa = 2 * np.pi * np.linalg.solve(self.R.T, scaled.T).T
        c = np.array([self.coeffs[k] for k in modes])
        return modes, kappa, c

    def _phases(self, f, g):
        _, kappa, c = self.wavevectors()
        f = np.asarray(f, dtype=float)
        g = np.asarray(g, dtype=float)
        for kap, cm in zip(kappa, c):
            yield kap, cm * np.exp(1j * (kap[0] * f + kap[1] * g))

    def value(self, f, g) -> np.ndarray:
        out = self.c1 * np.asarray(f, dtype=float) + self.c2 * np.asarray(g, dtype=float)
        for _, term in self._phases(f, g):
            out = out + term.real
        return out

    def first(self, f, g) -> tuple[np.ndarray, np.ndarray]:
        """``(dH/df, dH/dg)``."""
        shape = np.broadcast(np.asarray(f), np.asarray(g)).shape
        Hf = np.full(shape, float(self.c1))
        Hg = np.full(shape, float(self.c2))
        for kap, term in self._phases(f, g):
            Hf = Hf + (1j * kap[0] * term).real
            Hg = Hg + (1j * kap[1] * term).real
        return Hf, Hg

    def second(self, f, g) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(H_ff, H_fg, H_gg)``."""
        shape = np.broadcast(np.asarray(f), np.asarray(g)).shape
        Hff = np.zeros(shape)
        Hfg = np.zeros(shape)
        Hgg = np.zeros(shape)
        for kap, term in self._phases(f, g):
            Hff = Hff - kap[0] * kap[0] * term.real
            Hfg = Hfg - kap[0] * kap[1] * term.real
            Hgg = Hgg - kap[1] * kap[1] * term.real
        return Hff, Hfg, Hgg

    def second_sup(self) -> float:
        """Upper bound of |H''| entries from the coefficient moduli."""
        _, kappa, c = self.wavevectors()
        if len(c) == 0:
            return 0.0
        return float(np.sum(np.abs(c) * np.sum(kappa**2, axis=1)))

    def sample_periodicity_error(self, n: int = 7, seed: int = 0) -> float:
        """Check H0 is periodic with respect to the lattice of R."""
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-3, 3, size=(n, 2))
        w1 = self.R @ np.array([self.P1, 0.0])
        w2 = self.R @ np.array([0.0, self.P2])
        h = lambda p: self.value(p[:, 0], p[:, 1]) - self.c1 * p[:, 0] - self.c2 * p[:, 1]
        base = h(pts)
        return float(max(np.abs(h(pts + w1) - base).max(), np.abs(h(pts + w2) - base).max()))


def simplicity_value(grad_f, grad_g) -> float:
    """``|a|^2 + |b|^2 + sqrt((|a|^2 + |b|^2)^2 - 4 |a x b|^2)`` for constant gradients."""
    a = np.asarray(grad_f, dtype=float)
    b = np.asarray(grad_g, dtype=float)
    s = a @ a + b @ b
    v2 = float(np.sum(np.cross(a, b) ** 2))
    return float(s + np.sqrt(max(s * s - 4 * v2, 0.0)))


@dataclass(frozen=True)
class ProblemData:
    """Data of the nonlinear problem: base pair, boundary perturbation, Bernoulli function."""

    grid: GridSpec
    base: StreamPair
    boundary_perturbation: StreamPair
    bernoulli: BernoulliSpec = field(default_factory=BernoulliSpec)
    check_simplicity: bool = True

    def __post_init__(self):
        if self.base.grid != self.grid or self.boundary_perturbation.grid != self.grid:
            raise GridMismatchError("problem pieces live on different grids")
        if np.any(self.base.periodic_f) or np.any(self.base.periodic_g):
            raise AdmissibilityError("base pair must be purely linear (constant gradients)")
        vbar = np.cross(self.base.linear_f, self.base.linear_g)
        if abs(vbar[0]) < 1e-12:
            raise AdmissibilityError("base velocity first component vanishes (v1 != 0 required)")
        if self.check_simplicity:
            s = simplicity_value(self.base.linear_f, self.base.linear_g)
            if s > 2 + 1e-12:
                raise AdmissibilityError(
                    f"scaling normalization violated: value {s:.6g} > 2 (rescale the base pair)"
                )

    @classmethod
    def from_arrays(cls, grid, grad_f=(0, 1, 0), grad_g=(0, 0, 1), f0=None, g0=None, bernoulli=None):
        base = StreamPair.linear(grid, grad_f, grad_g)
        pert = StreamPair.periodic(grid, f0, g0)
        b = bernoulli if bernoulli is not None else BernoulliSpec(R=base.R, P1=grid.P1, P2=grid.P2)
        return cls(grid, base, pert, b)

    @property
    def vbar(self) -> np.ndarray:
        return np.cross(self.base.linear_f, self.base.linear_g)

    def total(self, f1=None, g1=None) -> StreamPair:
        """``base + boundary_perturbation + (f1, g1)``."""
        tot = self.base + self.boundary_perturbation
        if f1 is None:
            return tot
        return tot + StreamPair.periodic(self.grid, f1, g1)


def _check_iterate(grid: GridSpec, f1: np.ndarray, g1: np.ndarray, tol: float = 1e-12):
    for name, u in (("f1", f1), ("g1", g1)):
        if u.shape != grid.shape:
            raise GridMismatchError(f"{name} has shape {u.shape}, grid is {grid.shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError(f"{name} contains non-finite values")
        wall = max(np.abs(u[0]).max(), np.abs(u[-1]).max())
        scale = max(1.0, float(np.abs(u).max()))
        if wall > tol * scale:
            raise AdmissibilityError(f"{name} does not vanish on the walls (max {wall:.3g})")


# -- array-level kernels ------------------------------------------------


def _cross(a, b):
    return np.stack(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def residual_arrays(pair: StreamPair, bernoulli: BernoulliSpec) -> tuple[np.ndarray, np.ndarray]:
    """Strong-form residual in conservative form at interior nodes (walls set to zero).

    The fields ``grad g x v`` and ``v x grad f`` are formed with the public
    stencils and then differenced by the public divergence.
    """
    grid = pair.grid
    gf = pair.grad_f()
    gg = pair.grad_g()
    v = _cross(gf, gg)
    mu = -grid.div(_cross(gg, v))
    nu = -grid.div(_cross(v, gf))
    if not bernoulli.is_zero:
        Hf, Hg = bernoulli.first(pair.f_values(), pair.g_values())
        mu = mu + Hf
        nu = nu + Hg
    mu[0] = mu[-1] = 0.0
    nu[0] = nu[-1] = 0.0
    return mu, nu


def energy_gradient(pair: StreamPair, bernoulli: BernoulliSpec) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of :func:`discrete_energy` divided by the nodal weights (walls zero).

    Agrees with :func:`residual_arrays` to second order at interior nodes;
    its Jacobian is the symmetric operator of the linearized solver.
    """
    grid = pair.grid
    gf = pair.grad_f_mid()
    gg = pair.grad_g_mid()
    v = _cross(gf, gg)
    mu = -grid.div_mid(_cross(gg, v))
    nu = -grid.div_mid(_cross(v, gf))
    if not bernoulli.is_zero:
        Hf, Hg = bernoulli.first(pair.f_values(), pair.g_values())
        mu[1:-1] += Hf[1:-1]
        nu[1:-1] += Hg[1:-1]
    return mu, nu


def discrete_energy(pair: StreamPair, bernoulli: BernoulliSpec) -> float:
    """Midpoint rule for ``|v|^2 / 2`` plus trapezoid rule for ``H``."""
    grid = pair.grid
    v = _cross(pair.grad_f_mid(), pair.grad_g_mid())
    e = 0.5 * grid.midpoint_weight * float(np.sum(v * v))
    if not bernoulli.is_zero:
        e += grid.integrate(bernoulli.value(pair.f_values(), pair.g_values()))
    return e


# -- public operations ----------------------------------------------------


def velocity(pair: StreamPair) -> VectorField3:
    """``grad f x grad g`` with the public second-order stencils."""
    return VectorField3(pair.grid, _cross(pair.grad_f(), pair.grad_g()))


def nonlinear_residual(iterate, data: ProblemData) -> tuple[ScalarField3, ScalarField3]:
    """The map from the wall-vanishing iterate ``(f1, g1)`` to ``(mu, nu)``."""
    f1, g1 = (u.values if isinstance(u, ScalarField3) else np.asarray(u, dtype=float) for u in iterate)
    _check_iterate(data.grid, f1, g1)
    mu, nu = residual_arrays(data.total(f1, g1), data.bernoulli)
    return ScalarField3(data.grid, mu, "mu"), ScalarField3(data.grid, nu, "nu")


def energy(state, data: ProblemData) -> float:
    """Discrete ``int (|grad f x grad g|^2 / 2 + H(f, g))`` over the period cell.

    ``state`` is a total :class:`StreamPair` or a :class:`FlowState`.
    """
    pair = state.pair if isinstance(state, FlowState) else state
    return discrete_energy(pair, data.bernoulli)


@dataclass(frozen=True, eq=False)
class FlowState:
    """A total pair with its velocity, pressure and Bernoulli function."""

    pair: StreamPair
    v: VectorField3
    p: ScalarField3
    bernoulli: object

    @classmethod
    def from_pair(cls, pair: StreamPair, bernoulli) -> "FlowState":
        v = velocity(pair)
        p = ScalarField3(pair.grid, _pressure_values(v, pair, bernoulli), "p")
        return cls(pair, v, p, bernoulli)

    @property
    def grid(self) -> GridSpec:
        return self.pair.grid


def _pressure_values(v: VectorField3, pair: StreamPair, bernoulli) -> np.ndarray:
    p = -0.5 * np.sum(v.values**2, axis=0)
    return p + bernoulli.value(pair.f_values(), pair.g_values())


def pressure(state: FlowState, bernoulli=None) -> ScalarField3:
    """``p = -|v|^2 / 2 + H(f, g)``."""
    b = state.bernoulli if bernoulli is None else bernoulli
    return ScalarField3(state.grid, _pressure_values(state.v, state.pair, b), "p")


def euler_residual(state: FlowState) -> VectorField3:
    """``(v . grad) v + grad p`` with the public stencils."""
    grid = state.grid
    V = state.v.values
    conv = np.stack([sum(V[j] * grid.d(V[i], j) for j in range(3)) for i in range(3)])
    gp = _pressure_gradient(state)
    return VectorField3(grid, conv + gp)


def _pressure_gradient(state: FlowState) -> np.ndarray:
    """Gradient of the pressure.

    ``H(f, g)`` is not periodic when H has a linear part, so its gradient is
    taken through the chain rule ``H_f grad f + H_g grad g``; the kinetic part
    is periodic and differentiated directly.
    """
    grid = state.grid
    V = state.v.values
    kin = -0.5 * np.sum(V * V, axis=0)
    gp = grid.grad(kin)
    gp = gp + _grad_H(state.pair, state.bernoulli)
    return gp


def _grad_H(pair: StreamPair, bernoulli) -> np.ndarray:
    f = pair.f_values()
    g = pair.g_values()
    if hasattr(bernoulli, "first"):
        Hf, Hg = bernoulli.first(f, g)
    else:
        Hf, Hg = _numeric_first(bernoulli, f, g)
    return Hf * pair.grad_f() + Hg * pair.grad_g()


def _numeric_first(bernoulli, f, g, h=1e-6):
    Hf = (bernoulli.value(f + h, g) - bernoulli.value(f - h, g)) / (2 * h)
    Hg = (bernoulli.value(f, g + h) - bernoulli.value(f, g - h)) / (2 * h)
    return Hf, Hg


def bernoulli_drift(state: FlowState) -> float:
    """``max |v . grad H(f, g)|`` over the grid."""
    gH = _grad_H(state.pair, state.bernoulli)
    return float(np.max(np.abs(np.sum(state.v.values * gH, axis=0))))


def lamb_vector(state: FlowState) -> VectorField3:
    """``v x rot v``."""
    V = state.v.values
    return VectorField3(state.grid, _cross(V, curl_array(state.grid, V)))


def vorticity_decomposition(state: FlowState) -> tuple[ScalarField3, ScalarField3, ScalarField3]:
    """Coefficients of ``rot v = alpha v + beta v x grad f + gamma grad g x v``."""
    grid = state.grid
    V = state.v.values
    speed2 = np.sum(V * V, axis=0)
    if np.sqrt(speed2.min()) < NONDEGENERACY * np.sqrt(speed2.max()) or speed2.max() == 0:
        raise DegenerateVelocityError("|v| vanishes somewhere on the grid")
    W = curl_array(grid, V)
    alpha = np.sum(W * V, axis=0) / speed2
    beta = np.sum(W * state.pair.grad_g(), axis=0) / speed2
    gamma = np.sum(W * state.pair.grad_f(), axis=0) / speed2
    return (
        ScalarField3(grid, alpha, "alpha"),
        ScalarField3(grid, beta, "beta"),
        ScalarField3(grid, gamma, "gamma"),
    )


def reconstruct_vorticity(state: FlowState, alpha, beta, gamma) -> VectorField3:
    V = state.v.values
    gf = state.pair.grad_f()
    gg = state.pair.grad_g()
    W = alpha.values * V + beta.values * _cross(V, gf) + gamma.values * _cross(gg, V)
    return VectorField3(state.grid, W)


def check_v1_nondegenerate(v: VectorField3):
    v1 = np.abs(v.values[0])
    if v1.max() == 0 or v1.min() < NONDEGENERACY * v1.max():
        raise DegenerateVelocityError("first velocity component vanishes somewhere on the grid")
    if not (np.all(v.values[0] > 0) or np.all(v.values[0] < 0)):
        raise DegenerateVelocityError("first velocity component changes sign")


def verification_metrics(state: FlowState, vbar1: float | None = None) -> dict[str, float]:
    """Physical checks of a solved state with the public stencils.

    The Euler equations hold in the open channel, so the momentum, Lamb
    vector and divergence maxima are taken over interior nodes; the wall
    values, where one-sided stencils apply, are reported under ``*_wall``.
    ``wall_flux_error`` is ``max |v1 - vbar1|`` over both walls when the base
    flux ``vbar1`` is given.
    """
    grid = state.grid
    V = state.v.values
    vmax2 = float(np.max(np.sum(V * V, axis=0)))
    W = curl_array(grid, V)
    mom = np.sqrt(np.sum(euler_residual(state).values ** 2, axis=0))
    lamb = np.sqrt(np.sum(_cross(V, W) ** 2, axis=0))
    div = np.abs(grid.div(V))
    out = {
        "euler_residual": float(mom[1:-1].max()),
        "euler_residual_wall": float(mom[[0, -1]].max()),
        "max_speed_squared": vmax2,
        "divergence": float(div[1:-1].max()),
        "divergence_wall": float(div[[0, -1]].max()),
        "bernoulli_drift": bernoulli_drift(state),
        "lamb_vector": float(lamb[1:-1].max()),
        "lamb_vector_wall": float(lamb[[0, -1]].max()),
        "vorticity": float(np.max(np.sqrt(np.sum(W * W, axis=0)))),
        "min_abs_v1": float(np.min(np.abs(V[0]))),
    }
    out["euler_residual_relative"] = out["euler_residual"] / vmax2 if vmax2 > 0 else 0.0
    if vbar1 is not None:
        out["wall_flux_error"] = float(np.max(np.abs(V[0][[0, -1]] - vbar1)))
    return out
