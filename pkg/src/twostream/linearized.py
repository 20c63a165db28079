"""Linearized operator at a frozen background, Krylov solves, eps continuation.

The strong operator ``A`` maps interior unknowns ``(F, G)`` (zero on the
walls) to ``(mu, nu)``.  It is assembled from the staggered midpoint
gradient and its adjoint divergence, so ``W A`` is exactly symmetric for the
nodal weights ``W`` and equals the Hessian of the discrete energy plus
``eps`` times the discrete Dirichlet energy.  Linear systems are solved in the Euclidean form
``(W A) u = W r`` by preconditioned conjugate gradients.

The preconditioner is the same operator at the constant base gradients with
``H = 0``: it is block diagonal in the (y, z) Fourier modes and banded in x,
so it is factored once per mode by a banded Cholesky decomposition.

Newton steps instead invert the Jacobian of the collocated strong residual
(:meth:`LinearizedOperator.apply_strong`), which agrees with ``A`` to second
order but is not symmetric.  They use GMRES, preconditioned by the exact
inverse of that Jacobian at the base gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, gmres, minres

from . import _xx_coefficients as xxc
from .euler import AdmissibilityError, BernoulliSpec, _cross
from .fields import GridMismatchError, GridSpec, ScalarField3, StreamPair

__all__ = [
    "LinearizedOperator",
    "ContinuationSchedule",
    "LinearSolveResult",
    "ContinuationResult",
    "NegativeCurvatureError",
    "LinearSolveError",
    "ContinuationDivergenceError",
    "apply_linearized",
    "weak_residual",
    "solve_linearized",
    "solve_jacobian",
    "continuation_solve",
    "reconstruct_xx",
    "BasePreconditioner",
    "StrongBasePreconditioner",
]

DEFAULT_EPS = (1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 0.0)


class LinearSolveError(RuntimeError):
    """The Krylov iteration did not reach the requested tolerance."""


class NegativeCurvatureError(LinearSolveError):
    """Conjugate gradients met a direction with non-positive curvature."""

    def __init__(self, msg, direction=None, curvature=None):
        super().__init__(msg)
        self.direction = direction
        self.curvature = curvature


class ContinuationDivergenceError(RuntimeError):
    pass


def _as_array(u, grid: GridSpec) -> np.ndarray:
    if isinstance(u, ScalarField3):
        if u.grid != grid:
            raise GridMismatchError("field lives on a different grid than the operator")
        return u.values
    a = np.asarray(u, dtype=float)
    if a.shape != grid.shape:
        raise GridMismatchError(f"array shape {a.shape} does not match grid {grid.shape}")
    return a


def _check_walls(F: np.ndarray, G: np.ndarray, tol: float = 1e-12):
    for name, u in (("F", F), ("G", G)):
        wall = max(np.abs(u[0]).max(), np.abs(u[-1]).max())
        if wall > tol * max(1.0, float(np.abs(u).max())):
            raise AdmissibilityError(f"{name} does not vanish on the walls (max {wall:.3g})")


class LinearizedOperator:
    """Linearization of the Euler-Lagrange map at the total pair ``background``."""

    def __init__(self, background: StreamPair, bernoulli: BernoulliSpec | None = None, eps: float = 0.0):
        if not (0.0 <= eps <= 1.0):
            raise ValueError(f"eps must lie in [0, 1], got {eps}")
        self.background = background
        self.grid = background.grid
        self.bernoulli = bernoulli if bernoulli is not None else BernoulliSpec()
        self.eps = float(eps)
        self.gf = background.grad_f_mid()
        self.gg = background.grad_g_mid()
        self.v = _cross(self.gf, self.gg)
        if self.bernoulli.is_zero or not self.bernoulli.coeffs:
            self.H2 = None
        else:
            self.H2 = self.bernoulli.second(background.f_values(), background.g_values())

    def with_eps(self, eps: float) -> "LinearizedOperator":
        new = object.__new__(LinearizedOperator)
        new.__dict__.update(self.__dict__)
        if not (0.0 <= eps <= 1.0):
            raise ValueError(f"eps must lie in [0, 1], got {eps}")
        new.eps = float(eps)
        return new

    # -- strong action -------------------------------------------------------
    def apply_arrays(self, F: np.ndarray, G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        grid = self.grid
        gF = grid.grad_mid(F)
        gG = grid.grad_mid(G)
        dv = _cross(gF, self.gg) + _cross(self.gf, gG)
        qF = _cross(self.gg, dv) + _cross(gG, self.v)
        qG = _cross(dv, self.gf) + _cross(self.v, gF)
        if self.eps:
            qF += self.eps * gF
            qG += self.eps * gG
        mu = -grid.div_mid(qF)
        nu = -grid.div_mid(qG)
        if self.H2 is not None:
            Hff, Hfg, Hgg = self.H2
            mu[1:-1] += (Hff * F + Hfg * G)[1:-1]
            nu[1:-1] += (Hfg * F + Hgg * G)[1:-1]
        return mu, nu

    def apply_strong(self, F: np.ndarray, G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Jacobian of the public-stencil strong residual, plus ``eps`` times ``-Laplacian``.

        Equals :meth:`apply_arrays` up to second-order terms at interior
        nodes but is not symmetric; it is what Newton steps invert.
        """
        grid = self.grid
        if not hasattr(self, "_pub"):
            gf, gg = self.background.grad_f(), self.background.grad_g()
            self._pub = (gf, gg, _cross(gf, gg))
        gf, gg, v = self._pub
        gF = grid.grad(F)
        gG = grid.grad(G)
        dv = _cross(gF, gg) + _cross(gf, gG)
        qF = _cross(gg, dv) + _cross(gG, v)
        qG = _cross(dv, gf) + _cross(v, gF)
        if self.eps:
            qF += self.eps * gF
            qG += self.eps * gG
        mu = -grid.div(qF)
        nu = -grid.div(qG)
        if self.H2 is not None:
            Hff, Hfg, Hgg = self.H2
            mu += Hff * F + Hfg * G
            nu += Hfg * F + Hgg * G
        mu[0] = mu[-1] = 0.0
        nu[0] = nu[-1] = 0.0
        return mu, nu

    # -- Euclidean form on interior unknowns ------------------------------------
    @property
    def n_interior(self) -> int:
        g = self.grid
        return 2 * (g.Nx - 2) * g.Ny * g.Nz

    @property
    def _w(self) -> np.ndarray:
        return self.grid.wx[1:-1, None, None]

    def unpack(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g = self.grid
        u = u.reshape(2, g.Nx - 2, g.Ny, g.Nz)
        F = np.zeros(g.shape)
        G = np.zeros(g.shape)
        F[1:-1] = u[0]
        G[1:-1] = u[1]
        return F, G

    def pack(self, F: np.ndarray, G: np.ndarray) -> np.ndarray:
        return np.stack([F[1:-1], G[1:-1]]).ravel()

    def matvec(self, u: np.ndarray) -> np.ndarray:
        """``(W A) u`` with ``W`` the x-trapezoid weights."""
        mu, nu = self.apply_arrays(*self.unpack(u))
        w = self._w
        return np.stack([w * mu[1:-1], w * nu[1:-1]]).ravel()

    def weight_vector(self) -> np.ndarray:
        g = self.grid
        w = np.broadcast_to(self._w, (g.Nx - 2, g.Ny, g.Nz))
        return np.concatenate([w.ravel(), w.ravel()])

    def as_linear_operator(self) -> LinearOperator:
        n = self.n_interior
        return LinearOperator((n, n), matvec=self.matvec, dtype=float)

    def preconditioner(self) -> "BasePreconditioner":
        b = self.background
        return BasePreconditioner.get(self.grid, tuple(b.linear_f), tuple(b.linear_g), self.eps)

    def quadratic_form(self, F: np.ndarray, G: np.ndarray) -> float:
        """``B^eps((F, G), (F, G)) = <A (F, G), (F, G)>_W``."""
        mu, nu = self.apply_arrays(F, G)
        return self.grid.inner(mu, F) + self.grid.inner(nu, G)


# -- preconditioner -------------------------------------------------------------


def _skew(a) -> np.ndarray:
    a1, a2, a3 = a
    return np.array([[0.0, -a3, a2], [a3, 0.0, -a1], [-a2, a1, 0.0]])


class BasePreconditioner:
    """Exact inverse of the constant-coefficient operator at linear gradients ``(a, b)``.

    Per Fourier mode ``(ky, kz)`` the operator ``W A`` is a Hermitian
    matrix acting on the x-profiles of ``(F, G)``.  The staggered stencils
    make it tridiagonal per unknown, so with interleaved unknowns it has
    bandwidth 3 and is factored by :func:`scipy.linalg.cholesky_banded`.
    """

    BANDWIDTH = 3

    def __init__(self, grid: GridSpec, grad_f, grad_g, eps: float):
        self.grid = grid
        self.eps = float(eps)
        a = np.asarray(grad_f, dtype=float)
        b = np.asarray(grad_g, dtype=float)
        n = grid.Nx - 2
        h = grid.hx
        # midpoint difference and average restricted to interior columns
        Dm = np.zeros((grid.Nx - 1, grid.Nx))
        Am = np.zeros((grid.Nx - 1, grid.Nx))
        for m in range(grid.Nx - 1):
            Dm[m, m], Dm[m, m + 1] = -1.0 / h, 1.0 / h
            Am[m, m] = Am[m, m + 1] = 0.5
        Dm, Am = Dm[:, 1:-1], Am[:, 1:-1]
        # Q_j^T Q_k weighted by the midpoint spacing
        DD, DA, AA = h * Dm.T @ Dm, h * Dm.T @ Am, h * Am.T @ Am
        Cb = -_skew(b)
        Ca = _skew(a)
        X = -_skew(np.cross(a, b))
        eye = np.eye(3)
        coeff = {
            "FF": Cb.T @ Cb + self.eps * eye,
            "GG": Ca.T @ Ca + self.eps * eye,
            "FG": Cb.T @ Ca + X,
        }
        ky = grid.ky.copy()
        ky[grid.Ny // 2] = 0.0
        kz = 2 * np.pi * np.fft.rfftfreq(grid.Nz, d=grid.hz)
        kz[-1] = 0.0
        self.shape_modes = (grid.Ny, kz.size)
        u = self.BANDWIDTH
        factors = np.empty((grid.Ny, kz.size, u + 1, 2 * n), dtype=complex)
        for iy, ky_ in enumerate(ky):
            for iz, kz_ in enumerate(kz):
                k = np.array([ky_, kz_])
                blocks = {}
                for key, C in coeff.items():
                    B = C[0, 0] * DD.astype(complex)
                    for j in range(2):
                        B = B + 1j * k[j] * (C[0, j + 1] * DA - C[j + 1, 0] * DA.T)
                    B = B + float(k @ C[1:, 1:] @ k) * AA
                    blocks[key] = B
                M = np.empty((2 * n, 2 * n), dtype=complex)
                M[0::2, 0::2] = blocks["FF"]
                M[1::2, 1::2] = blocks["GG"]
                M[0::2, 1::2] = blocks["FG"]
                M[1::2, 0::2] = blocks["FG"].conj().T
                ab = np.zeros((u + 1, 2 * n), dtype=complex)
                for d in range(u + 1):
                    ab[u - d, d:] = np.diagonal(M, offset=d)
                factors[iy, iz] = sla.cholesky_banded(ab, lower=False, check_finite=False)
        self.factors = factors

    @staticmethod
    @lru_cache(maxsize=8)
    def get(grid: GridSpec, grad_f: tuple, grad_g: tuple, eps: float) -> "BasePreconditioner":
        return BasePreconditioner(grid, grad_f, grad_g, eps)

    def solve_modes(self, rhs_hat: np.ndarray) -> np.ndarray:
        """Solve per mode; ``rhs_hat`` has shape (2, n, Ny, Nz//2+1)."""
        n = rhs_hat.shape[1]
        out = np.empty_like(rhs_hat)
        for iy in range(self.shape_modes[0]):
            for iz in range(self.shape_modes[1]):
                r = np.empty(2 * n, dtype=complex)
                r[0::2] = rhs_hat[0, :, iy, iz]
                r[1::2] = rhs_hat[1, :, iy, iz]
                s = sla.cho_solve_banded((self.factors[iy, iz], False), r, check_finite=False)
                out[0, :, iy, iz] = s[0::2]
                out[1, :, iy, iz] = s[1::2]
        return out

    def apply(self, r: np.ndarray) -> np.ndarray:
        """Inverse of ``W A_base`` applied to a packed Euclidean residual."""
        g = self.grid
        r = r.reshape(2, g.Nx - 2, g.Ny, g.Nz)
        rh = np.fft.fft(np.fft.rfft(r, axis=3), axis=2)
        sh = self.solve_modes(rh)
        s = np.fft.irfft(np.fft.ifft(sh, axis=2), n=g.Nz, axis=3)
        return s.ravel()

    def as_linear_operator(self) -> LinearOperator:
        g = self.grid
        n = 2 * (g.Nx - 2) * g.Ny * g.Nz
        return LinearOperator((n, n), matvec=self.apply, dtype=float)


class StrongBasePreconditioner:
    """Exact inverse of the strong Jacobian at linear gradients ``(a, b)`` with ``H = 0``.

    Per Fourier mode the public-stencil Jacobian is a small dense
    non-symmetric matrix on the interleaved x-profiles; its inverses are
    stored and applied as one batched product.
    """

    def __init__(self, grid: GridSpec, grad_f, grad_g, eps: float):
        self.grid = grid
        a = np.asarray(grad_f, dtype=float)
        b = np.asarray(grad_g, dtype=float)
        n = grid.Nx - 2
        unit = np.eye(grid.Nx)
        Dx = grid.dx(unit)  # column j is the derivative of the j-th unit profile
        Q0 = Dx[:, 1:-1]
        E = unit[:, 1:-1]
        R0 = -Dx[1:-1, :]
        ET = -E.T
        Cb = -_skew(b)
        Ca = _skew(a)
        X = -_skew(np.cross(a, b))
        eye = np.eye(3)
        CFF = Cb.T @ Cb + eps * eye
        CGG = Ca.T @ Ca + eps * eye
        CFG = Cb.T @ Ca + X
        ky = grid.ky.copy()
        ky[grid.Ny // 2] = 0.0
        kz = 2 * np.pi * np.fft.rfftfreq(grid.Nz, d=grid.hz)
        kz[-1] = 0.0
        K = np.stack(np.meshgrid(ky, kz, indexing="ij"), axis=-1)  # (Ny, nz, 2)
        # products R_a Q_b for the x-x, x-k and k-x, k-k couplings
        RQ00 = R0 @ Q0
        RQ0E = R0 @ E
        REQ0 = ET @ Q0
        REE = ET @ E

        def block(C):
            out = C[0, 0] * RQ00[None, None].astype(complex)
            for j in range(2):
                kj = 1j * K[..., j][..., None, None]
                out = out + kj * (C[0, j + 1] * RQ0E + C[j + 1, 0] * REQ0)
            quad = sum(C[j + 1, l + 1] * (1j * K[..., j]) * (1j * K[..., l]) for j in range(2) for l in range(2))
            return out + quad[..., None, None] * REE

        M = np.empty(K.shape[:2] + (2 * n, 2 * n), dtype=complex)
        M[..., 0::2, 0::2] = block(CFF)
        M[..., 0::2, 1::2] = block(CFG)
        M[..., 1::2, 0::2] = block(CFG.T)
        M[..., 1::2, 1::2] = block(CGG)
        self.inverse = np.linalg.inv(M)

    @staticmethod
    @lru_cache(maxsize=4)
    def get(grid: GridSpec, grad_f: tuple, grad_g: tuple, eps: float) -> "StrongBasePreconditioner":
        return StrongBasePreconditioner(grid, grad_f, grad_g, eps)

    def apply(self, r: np.ndarray) -> np.ndarray:
        g = self.grid
        n = g.Nx - 2
        r = r.reshape(2, n, g.Ny, g.Nz)
        rh = np.fft.fft(np.fft.rfft(r, axis=3), axis=2)  # (2, n, Ny, nz)
        v = np.moveaxis(rh, (0, 1), (-1, -2)).reshape(g.Ny, -1, 2 * n)  # interleaved (F, G) per node
        s = np.einsum("yzij,yzj->yzi", self.inverse, v)
        sh = np.moveaxis(s.reshape(g.Ny, -1, n, 2), (-1, -2), (0, 1))
        out = np.fft.irfft(np.fft.ifft(sh, axis=2), n=g.Nz, axis=3)
        return out.ravel()


# -- public operations ----------------------------------------------------------


def apply_linearized(op: LinearizedOperator, pair) -> tuple[ScalarField3, ScalarField3]:
    """Strong action ``(mu, nu) = A (F, G)``; walls of the output are zero."""
    F, G = (_as_array(u, op.grid) for u in pair)
    _check_walls(F, G)
    mu, nu = op.apply_arrays(F, G)
    return ScalarField3(op.grid, mu, "mu"), ScalarField3(op.grid, nu, "nu")


def weak_residual(op: LinearizedOperator, pair, test_pair) -> float:
    """``B^eps(pair, test_pair)`` by quadrature of the first-derivative integrand.

    Uses the public gradient stencils for the background and both pairs, so
    it is an independent route to the same bilinear form.
    """
    grid = op.grid
    F, G = (_as_array(u, grid) for u in pair)
    P, Q = (_as_array(u, grid) for u in test_pair)
    gf = op.background.grad_f()
    gg = op.background.grad_g()
    v = _cross(gf, gg)
    gF, gG, gP, gQ = (grid.grad(u) for u in (F, G, P, Q))
    d1 = _cross(gF, gg) + _cross(gf, gG)
    d2 = _cross(gP, gg) + _cross(gf, gQ)
    integrand = np.sum(d1 * d2, axis=0)
    integrand += np.sum(v * (_cross(gF, gQ) + _cross(gP, gG)), axis=0)
    if op.eps:
        integrand += op.eps * np.sum(gF * gP + gG * gQ, axis=0)
    if op.H2 is not None:
        Hff, Hfg, Hgg = op.H2
        integrand += Hff * F * P + Hfg * (F * Q + G * P) + Hgg * G * Q
    return grid.integrate(integrand)


@dataclass
class LinearSolveResult:
    F: ScalarField3
    G: ScalarField3
    iterations: int
    residual: float
    converged: bool
    method: str = "pcg"
    flagged: bool = False
    log: list[str] = field(default_factory=list)

    def __iter__(self):
        yield self.F
        yield self.G


def _pcg(op, b, x0, prec, tol, maxiter, log, wvec):
    """Preconditioned CG on ``(W A) u = b``; residual measured in the W^{-1} norm."""
    hyz = op.grid.hy * op.grid.hz

    def rnorm(r):
        return float(np.sqrt(hyz * np.sum(r * r / wvec)))

    x = x0.copy()
    r = b - op.matvec(x) if np.any(x) else b.copy()
    bnorm = rnorm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0
    z = prec(r)
    p = z.copy()
    rz = float(r @ z)
    res = rnorm(r) / bnorm
    for it in range(1, maxiter + 1):
        if res <= tol:
            return x, it - 1, res
        Ap = op.matvec(p)
        curv = float(p @ Ap)
        pw = float(p @ (wvec * p))
        if curv <= 0.0:
            raise NegativeCurvatureError(
                f"non-positive curvature {curv:.3e} at iteration {it}",
                direction=op.unpack(p),
                curvature=0.5 * curv / pw,
            )
        alpha = rz / curv
        x += alpha * p
        r -= alpha * Ap
        res = rnorm(r) / bnorm
        log.append(f"{it} {res:.6e} {op.eps:.3e} {0.5 * curv / pw:.6e}")
        z = prec(r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, maxiter, res


def solve_linearized(
    op: LinearizedOperator,
    rhs,
    tol: float = 1e-10,
    x0=None,
    maxiter: int = 500,
    allow_indefinite: bool = False,
) -> LinearSolveResult:
    """Solve ``A (F, G) = (mu, nu)`` for wall-vanishing ``(F, G)``.

    ``tol`` bounds ``||A u - rhs||_W / ||rhs||_W``.  On negative curvature the
    error is raised unless ``allow_indefinite``, in which case MINRES with
    the same preconditioner is used and the result is flagged.
    Log lines are ``iteration residual eps rayleigh-estimate``.
    """
    mu, nu = (_as_array(u, op.grid) for u in rhs)
    w = op._w
    b = np.stack([w * mu[1:-1], w * nu[1:-1]]).ravel()
    u0 = np.zeros_like(b) if x0 is None else op.pack(*(_as_array(u, op.grid) for u in x0))
    prec = op.preconditioner()
    wvec = op.weight_vector()
    log = ["# iteration residual eps rayleigh"]
    method, flagged = "pcg", False
    try:
        u, its, res = _pcg(op, b, u0, prec.apply, tol, maxiter, log, wvec)
    except NegativeCurvatureError as exc:
        if not allow_indefinite:
            raise
        log.append(f"# negative curvature ({exc.curvature:.3e}); switching to MINRES")
        method, flagged = "minres", True
        counter = []
        hyz = op.grid.hy * op.grid.hz
        bnorm = max(np.sqrt(hyz * np.sum(b * b / wvec)), 1e-300)
        u = u0
        # MINRES stops on the preconditioned residual; restart until the
        # W^{-1} residual is small as well
        for _ in range(5):
            u, info = minres(
                op.as_linear_operator(),
                b,
                x0=u,
                M=prec.as_linear_operator(),
                rtol=tol,
                maxiter=maxiter,
                callback=lambda xk: counter.append(1),
            )
            r = b - op.matvec(u)
            res = float(np.sqrt(hyz * np.sum(r * r / wvec)) / bnorm)
            if res <= tol or len(counter) >= maxiter:
                break
        its = len(counter)
    converged = res <= tol * 10 if method == "minres" else res <= tol
    F, G = op.unpack(u)
    result = LinearSolveResult(
        ScalarField3(op.grid, F, "F"),
        ScalarField3(op.grid, G, "G"),
        its,
        res,
        converged,
        method,
        flagged,
        log,
    )
    if not converged:
        raise LinearSolveError(f"{method} stopped at relative residual {res:.3e} after {its} iterations")
    return result


def solve_jacobian(op: LinearizedOperator, rhs, tol: float = 1e-10, x0=None, maxiter: int = 200) -> LinearSolveResult:
    """Solve the strong Jacobian system ``J (F, G) = (mu, nu)`` by GMRES.

    Preconditioned by the exact inverse of the same Jacobian at the linear
    part of the background (see :class:`StrongBasePreconditioner`).
    ``tol`` bounds the relative residual in the W norm; ``maxiter`` counts
    inner iterations.
    """
    grid = op.grid
    mu, nu = (_as_array(u, grid) for u in rhs)
    b = op.pack(mu, nu)
    wvec = op.weight_vector()
    hyz = grid.hy * grid.hz

    def wnorm(r):
        return float(np.sqrt(hyz * np.sum(wvec * r * r)))

    bnorm = wnorm(b)
    zero = ScalarField3(grid, np.zeros(grid.shape), "F")
    if bnorm == 0.0:
        return LinearSolveResult(zero, ScalarField3(grid, np.zeros(grid.shape), "G"), 0, 0.0, True, "gmres")
    n = op.n_interior
    J = LinearOperator((n, n), matvec=lambda u: op.pack(*op.apply_strong(*op.unpack(u))), dtype=float)
    b0 = op.background
    prec = StrongBasePreconditioner.get(grid, tuple(b0.linear_f), tuple(b0.linear_g), op.eps)
    M = LinearOperator((n, n), matvec=prec.apply, dtype=float)
    u0 = None if x0 is None else op.pack(*(_as_array(u, grid) for u in x0))
    log = ["# iteration residual eps"]
    counter = []

    def cb(res):
        counter.append(1)
        log.append(f"{len(counter)} {float(res):.6e} {op.eps:.3e}")

    restart = min(60, maxiter)
    u, _ = gmres(J, b, x0=u0, M=M, rtol=tol * 0.1, atol=0.0, restart=restart, maxiter=-(-maxiter // restart),
                 callback=cb, callback_type="pr_norm")
    res = wnorm(b - J.matvec(u)) / bnorm
    F, G = op.unpack(u)
    result = LinearSolveResult(
        ScalarField3(grid, F, "F"), ScalarField3(grid, G, "G"), len(counter), res, res <= tol, "gmres", False, log
    )
    if not result.converged:
        raise LinearSolveError(f"gmres stopped at relative residual {res:.3e} after {len(counter)} iterations")
    return result


@dataclass(frozen=True)
class ContinuationSchedule:
    """Decreasing eps values in [0, 1] with the inner solver tolerance."""

    eps_list: tuple = DEFAULT_EPS
    tol: float = 1e-10
    safeguard_ratio: float = 100.0

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_list)
        object.__setattr__(self, "eps_list", eps)
        if not eps:
            raise ValueError("empty eps schedule")
        if eps[0] > 1.0:
            raise ValueError("first eps must be <= 1")
        if any(e < 0 for e in eps):
            raise ValueError("eps must be non-negative")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps schedule must be strictly decreasing")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")


@dataclass
class ContinuationResult:
    F: ScalarField3
    G: ScalarField3
    trace: list  # (eps, iterations, residual, relative change)
    log: list[str] = field(default_factory=list)

    def __iter__(self):
        yield self.F
        yield self.G


def continuation_solve(
    background,
    rhs,
    schedule: ContinuationSchedule | None = None,
    bernoulli: BernoulliSpec | None = None,
) -> ContinuationResult:
    """Solve along the eps schedule, warm-starting each step from the previous one."""
    schedule = schedule or ContinuationSchedule()
    if isinstance(background, LinearizedOperator):
        base_op = background
    else:
        base_op = LinearizedOperator(background, bernoulli, schedule.eps_list[0])
    grid = base_op.grid
    prev = None
    trace, log = [], []
    for eps in schedule.eps_list:
        op = base_op.with_eps(eps)
        res = solve_linearized(op, rhs, tol=schedule.tol, x0=prev)
        log.extend(res.log)
        cur = (res.F.values, res.G.values)
        change = 0.0
        if prev is not None:
            pn = np.sqrt(grid.inner(prev[0], prev[0]) + grid.inner(prev[1], prev[1]))
            dn = np.sqrt(sum(grid.inner(c - p, c - p) for c, p in zip(cur, prev)))
            change = dn / pn if pn > 0 else (0.0 if dn == 0 else np.inf)
            if change > schedule.safeguard_ratio:
                raise ContinuationDivergenceError(
                    f"solution changed by factor {change:.3g} between consecutive eps (at eps={eps:g})"
                )
        trace.append((eps, res.iterations, res.residual, change))
        prev = cur
    return ContinuationResult(ScalarField3(grid, prev[0], "F"), ScalarField3(grid, prev[1], "G"), trace, log)


# -- second x-derivatives from the strong system --------------------------------------

DENOMINATOR_THRESHOLD = 1e-10


def _jets(grid: GridSpec, u: np.ndarray, prefix: str, out: dict, lin=None):
    d1 = grid.grad(u)
    if lin is not None:
        d1 = d1 + np.asarray(lin, dtype=float)[:, None, None, None]
    for i in range(3):
        out[f"{prefix}{i + 1}"] = d1[i]
    for i in range(3):
        for j in range(i, 3):
            out[f"{prefix}{i + 1}{j + 1}"] = grid.d(d1[i], j)


def reconstruct_xx(background: StreamPair, F, G, mu, nu, eps: float, bernoulli: BernoulliSpec | None = None):
    """Evaluate ``(F_xx, G_xx)`` from the strong linearized system.

    Every other derivative of ``F``, ``G`` and of the background enters
    through the generated coefficients; ``F_xx`` and ``G_xx`` themselves are
    never differenced.
    """
    grid = background.grid
    F, G, mu, nu = (_as_array(u, grid) for u in (F, G, mu, nu))
    j: dict[str, np.ndarray] = {}
    _jets(grid, background.periodic_f, "f", j, background.linear_f)
    _jets(grid, background.periodic_g, "g", j, background.linear_g)
    bern = bernoulli if bernoulli is not None else BernoulliSpec()
    if bern.coeffs:
        Hff, Hfg, Hgg = bern.second(background.f_values(), background.g_values())
    else:
        Hff = Hfg = Hgg = np.zeros(grid.shape)
    j.update(Hff=Hff, Hfg=Hfg, Hgg=Hgg)
    den = xxc.denominator(j["f2"], j["f3"], j["g2"], j["g3"], eps)
    if np.min(den) <= DENOMINATOR_THRESHOLD:
        raise ZeroDivisionError(f"reconstruction denominator {np.min(den):.3e} too small")
    t: dict[str, np.ndarray] = {"mu": mu, "nu": nu, "F": F, "G": G}
    for name, u in (("F", F), ("G", G)):
        d1 = grid.grad(u)
        for i in range(3):
            t[f"{name}{i + 1}"] = d1[i]
        for a, b in ((0, 1), (0, 2), (1, 1), (1, 2), (2, 2)):
            t[f"{name}{a + 1}{b + 1}"] = grid.d(d1[a], b)
    out = []
    for num in (xxc.numerators_F(j, eps), xxc.numerators_G(j, eps)):
        acc = np.zeros(grid.shape)
        for term in xxc.TERMS:
            c = num[term]
            if isinstance(c, (int, float)) and c == 0:
                continue
            acc = acc + c * t[term]
        out.append(ScalarField3(grid, acc / den))
    return tuple(out)
