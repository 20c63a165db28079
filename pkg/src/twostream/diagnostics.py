"""Spectral and energy diagnostics of the linearized operator.

Quotients are reported for the quadratic part of the energy, that is
``B^eps(u, u) / 2`` divided by ``||u||^2`` in L2 (``rayleigh_min``) or by
``||u||^2`` in H1 (``noncoercive_probe`` reports ``B(u, u)`` itself).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.sparse.linalg import LinearOperator, lobpcg

from .euler import BernoulliSpec, ProblemData, _cross, simplicity_value
from .fields import GridSpec, StreamPair, max_derivative_norm, sobolev_norm, sobolev_norms
from .linearized import LinearizedOperator, solve_linearized

__all__ = [
    "RayleighResult",
    "ProbeRow",
    "TameProbeResult",
    "rayleigh_min",
    "noncoercive_probe",
    "plateau_bump",
    "simplicity_check",
    "convexity_witness",
    "second_differences",
    "tame_probe",
    "random_smooth_field",
    "COERCIVITY_CONSTANT",
]

#: lower bound factor of the L2 coercivity estimate: B >= c * pi^2 min v1^2 / L^2 * ||.||^2
COERCIVITY_CONSTANT = 1.0 / 32.0


def _operator(background, eps, bernoulli) -> LinearizedOperator:
    if isinstance(background, LinearizedOperator):
        return background.with_eps(eps) if eps is not None else background
    return LinearizedOperator(background, bernoulli, 0.0 if eps is None else eps)


@dataclass
class RayleighResult:
    min_quotient: float
    eigenpair: tuple  # (value, (F, G))
    iterations: int
    epsilon: float
    converged: bool = True

    @property
    def negative(self) -> bool:
        return self.min_quotient < 0


def rayleigh_min(
    background,
    eps: float = 0.0,
    bernoulli: BernoulliSpec | None = None,
    tol: float = 1e-8,
    maxiter: int = 300,
    seed: int = 0,
    block: int = 3,
) -> RayleighResult:
    """Smallest value of ``B^eps(u, u) / (2 ||u||^2)`` over wall-vanishing pairs.

    Block LOBPCG on the generalized problem ``(W A) u = lambda W u`` with the
    base-state inverse as preconditioner; the quotient is ``lambda / 2``.
    """
    op = _operator(background, eps, bernoulli)
    n = op.n_interior
    wv = op.weight_vector()
    A = op.as_linear_operator()
    B = LinearOperator((n, n), matvec=lambda x: wv * np.asarray(x).ravel(), dtype=float)
    M = op.preconditioner().as_linear_operator()
    rng = np.random.default_rng(seed)
    X0 = rng.standard_normal((n, block))
    lam, vecs, hist = lobpcg(
        A, X0, B=B, M=M, largest=False, tol=tol, maxiter=maxiter, retResidualNormsHistory=True
    )
    i = int(np.argmin(lam))
    u = vecs[:, i]
    F, G = op.unpack(u)
    grid = op.grid
    norm2 = grid.inner(F, F) + grid.inner(G, G)
    scale = 1.0 / np.sqrt(norm2)
    F, G = F * scale, G * scale
    q = 0.5 * op.quadratic_form(F, G)
    resid = op.matvec(u) - lam[i] * wv * u
    converged = bool(np.linalg.norm(resid) <= max(tol, 1e-6) * max(1.0, abs(lam[i])) * np.linalg.norm(wv * u) * 10)
    return RayleighResult(float(q), (float(q), (F, G)), len(hist), float(op.eps), converged)


def plateau_bump(x: np.ndarray, L: float) -> np.ndarray:
    """Smooth bump equal to 1 on ``[L/4, 3L/4]`` and vanishing outside ``(0, L)``."""

    def step(t):
        t = np.clip(t, 0.0, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
            b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
        return a / (a + b)

    x = np.asarray(x, dtype=float)
    return step(4 * x / L) * step(4 * (L - x) / L)


@dataclass
class ProbeRow:
    n: int
    B: float
    h1_squared: float
    quotient: float


def noncoercive_probe(background, n_list, eps: float = 0.0, bernoulli=None) -> list[ProbeRow]:
    """``B(F_n, F_n) / ||(F_n, 0)||^2_{H1}`` for ``F_n = phi(x) cos(2 pi n z / P2)``, G = 0."""
    op = _operator(background, eps, bernoulli)
    grid = op.grid
    X, _, Z = grid.mesh()
    rows = []
    for n in n_list:
        n = int(n)
        if n < 1 or 2 * n >= grid.Nz:
            raise ValueError(f"n={n} is beyond the resolvable range (Nz={grid.Nz})")
        F = np.broadcast_to(plateau_bump(X, grid.L) * np.cos(2 * np.pi * n * Z / grid.P2), grid.shape).copy()
        G = np.zeros(grid.shape)
        Bn = op.quadratic_form(F, G)
        h1 = sobolev_norm((F, G), 1, grid) ** 2
        rows.append(ProbeRow(n, Bn, h1, Bn / h1))
    return rows


def probe_slope(rows: list[ProbeRow]) -> float:
    """Least-squares slope of log(quotient) against log(n)."""
    n = np.log([r.n for r in rows])
    q = np.log([r.quotient for r in rows])
    return float(np.polyfit(n, q, 1)[0])


def simplicity_check(base: StreamPair, safety: float = 1e-9) -> tuple[bool, float]:
    """Check the scaling normalization of a constant-gradient base pair.

    Returns ``(True, 1.0)`` when it holds, otherwise ``(False, lam)`` with
    ``lam < 1`` the largest factor (minus a relative ``safety`` margin) for
    which the rescaled pair passes.
    """
    if np.any(base.periodic_f) or np.any(base.periodic_g):
        raise ValueError("simplicity check needs constant gradients")
    a, b = base.linear_f, base.linear_g
    if np.allclose(np.cross(a, b), 0.0):
        raise ValueError("base velocity vanishes")
    value = simplicity_value(a, b)
    if value <= 2.0:
        return True, 1.0
    lam = brentq(lambda s: simplicity_value(s * a, s * b) - 2.0, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
    return False, float(lam * (1.0 - safety))


def second_differences(pair_a: StreamPair, pair_b: StreamPair, data: ProblemData, n_points: int = 11) -> np.ndarray:
    """Second differences of the discrete energy along the segment from ``pair_a`` to ``pair_b``.

    Evaluated from the polynomial structure of ``|v|^2`` in the segment
    parameter and the exact second difference of each Fourier term of H, so
    identical pairs give exactly zero.
    """
    grid = data.grid
    for name in ("linear_f", "linear_g"):
        if not np.array_equal(getattr(pair_a, name), getattr(pair_b, name)):
            raise ValueError("pairs have different linear parts")
    for fa, fb in ((pair_a.periodic_f, pair_b.periodic_f), (pair_a.periodic_g, pair_b.periodic_g)):
        if np.max(np.abs(fa[[0, -1]] - fb[[0, -1]])) > 1e-12 * max(1.0, np.max(np.abs(fa))):
            raise ValueError("pairs have different boundary values")
    h = 1.0 / (n_points - 1)
    theta = np.arange(1, n_points - 1) * h
    A, Bg = pair_a.grad_f_mid(), pair_a.grad_g_mid()
    Df = grid.grad_mid(pair_b.periodic_f - pair_a.periodic_f)
    Dg = grid.grad_mid(pair_b.periodic_g - pair_a.periodic_g)
    v0 = _cross(A, Bg)
    v1 = _cross(Df, Bg) + _cross(A, Dg)
    v2 = _cross(Df, Dg)
    wm = grid.midpoint_weight
    C2 = wm * float(np.sum(v1 * v1 + 2 * v0 * v2))
    C3 = wm * float(np.sum(2 * v1 * v2))
    C4 = wm * float(np.sum(v2 * v2))
    h2 = h * h
    out = 0.5 * (2 * h2 * C2 + 6 * h2 * theta * C3 + (12 * h2 * theta**2 + 2 * h2 * h2) * C4)
    bern = data.bernoulli
    if bern.coeffs:
        _, kappa, coef = bern.wavevectors()
        f0, g0 = pair_a.f_values(), pair_a.g_values()
        df = pair_b.periodic_f - pair_a.periodic_f
        dg = pair_b.periodic_g - pair_a.periodic_g
        for j, t in enumerate(theta):
            acc = 0.0
            for kap, c in zip(kappa, coef):
                phase = kap[0] * (f0 + t * df) + kap[1] * (g0 + t * dg)
                step = kap[0] * df + kap[1] * dg
                term = c * np.exp(1j * phase) * (-4.0 * np.sin(0.5 * h * step) ** 2)
                acc += grid.integrate(term.real)
            out[j] += acc
    return out


def convexity_witness(pair_a: StreamPair, pair_b: StreamPair, data: ProblemData, n_points: int = 11) -> float:
    """Minimum second difference of the energy on the segment (11 samples by default)."""
    return float(np.min(second_differences(pair_a, pair_b, data, n_points)))


# -- tame probe -------------------------------------------------------------------------


def random_smooth_field(grid: GridSpec, rng: np.random.Generator, nmax: int = 4, mmax: int = 3, decay: float = 1.0) -> np.ndarray:
    """Random wall-vanishing field from low sine(x) x Fourier(y, z) modes."""
    X, Y, Z = grid.mesh()
    out = np.zeros(grid.shape)
    for n in range(1, nmax + 1):
        sx = np.sin(n * np.pi * X / grid.L)
        for my in range(-mmax, mmax + 1):
            for mz in range(0, mmax + 1):
                amp = (1.0 + n * n + my * my + mz * mz) ** (-decay)
                a, b = rng.standard_normal(2) * amp
                ph = 2 * np.pi * (my * Y / grid.P1 + mz * Z / grid.P2)
                out = out + sx * (a * np.cos(ph) + b * np.sin(ph))
    out[0] = out[-1] = 0.0
    return out


@dataclass
class TameProbeResult:
    r: int
    C: float
    ratios: list = field(default_factory=list)  # (sample, lhs, bound_unit, ratio)
    background_norm: float = 0.0
    h2_norm: float = 0.0
    excluded: int = 0

    def table(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("sample", "ratio"))
        for s, _, _, q in self.ratios:
            w.writerow((s, repr(q)))
        return buf.getvalue()


def tame_probe(
    background: StreamPair,
    r: int,
    sample_count: int,
    seed: int = 0,
    bernoulli: BernoulliSpec | None = None,
    eps: float = 0.0,
    tol: float = 1e-10,
    rhs_list=None,
) -> TameProbeResult:
    """Smallest C with ``||u||_r <= C (||rhs||_r + ||rhs||_1 (||bg||_{r+4} + ||H''||_{C^r} + 1))``."""
    if r not in (1, 2):
        raise ValueError("r must be 1 or 2")
    grid = background.grid
    op = LinearizedOperator(background, bernoulli, eps)
    bg_norm = sobolev_norm((background.periodic_f, background.periodic_g), r + 4, grid)
    h2 = 0.0
    if op.H2 is not None:
        h2 = max(max_derivative_norm(grid, u, r) for u in op.H2)
    rng = np.random.default_rng(seed)
    ratios, excluded = [], 0
    for s in range(sample_count):
        if rhs_list is not None:
            mu, nu = rhs_list[s]
        else:
            mu, nu = random_smooth_field(grid, rng), random_smooth_field(grid, rng)
        rn = sobolev_norms((mu, nu), {1, r}, grid)
        if rn[1] == 0.0:
            excluded += 1
            continue
        res = solve_linearized(op, (mu, nu), tol=tol)
        lhs = sobolev_norm((res.F.values, res.G.values), r, grid)
        bound = rn[r] + rn[1] * (bg_norm + h2 + 1.0)
        ratios.append((s, lhs, bound, lhs / bound))
    C = max((q for *_, q in ratios), default=float("nan"))
    return TameProbeResult(r, C, ratios, bg_norm, h2, excluded)
