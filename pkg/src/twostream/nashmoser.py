"""Outer nonlinear iterations: Newton and a smoothed Nash-Moser scheme.

The unknown is the wall-vanishing periodic correction ``w = (f1, g1)``; the
total pair is ``base + boundary perturbation + w``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .euler import ProblemData, _cross, residual_arrays
from .fields import ScalarField3, StreamPair, max_wavenumber, smooth_array, sobolev_norms
from .linearized import ContinuationSchedule, LinearizedOperator, LinearSolveError, solve_jacobian

__all__ = [
    "NashMoserParams",
    "IterationRecord",
    "SolveReport",
    "GateRejectedError",
    "newton_solve",
    "nash_moser_solve",
    "residual_gate",
    "residual_field",
    "VERDICTS",
]

VERDICTS = ("converged", "trust-radius-exceeded", "max-iterations", "linear-failure")
TABLE_HEADER = ("iter", "eps", "theta", "res_l2", "res_h1", "norm_h5")
NORM_CAP = 6


class GateRejectedError(ValueError):
    """The initial residual exceeds the configured admission threshold."""


@dataclass(frozen=True)
class NashMoserParams:
    m: int = 2
    n: int = 3
    d0: int = 5
    d1: int = 0
    d2: int = 4
    d3: int = 1
    s0: int = 1
    d_star: int = 0
    s_tilde: int = 9
    theta0: float = 4.0
    sigma: float = 2.0
    r0: float = 1.0
    max_outer: int = 30
    gate: float = 1.0e4
    max_halvings: int = 5
    eps_schedule: tuple = (0.0,)
    linear_tol: float = 1e-11
    linear_maxiter: int = 200

    def __post_init__(self):
        object.__setattr__(self, "eps_schedule", tuple(float(e) for e in self.eps_schedule))
        if self.d0 < self.m + self.n // 2 + 1:
            raise ValueError(f"d0={self.d0} must be >= m + floor(n/2) + 1 = {self.m + self.n // 2 + 1}")
        lower = max(
            3 * self.m + 2 * self.d_star + self.n // 2 + 2,
            self.m + self.d_star + self.d0 + 1,
            self.m + self.d2 + self.d3 + 1,
        )
        if self.s_tilde < lower:
            raise ValueError(f"s_tilde={self.s_tilde} must be >= {lower}")
        if not self.theta0 > 1:
            raise ValueError("theta0 must exceed 1")
        if not self.sigma > 1:
            raise ValueError("sigma must exceed 1")
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if self.max_halvings < 0:
            raise ValueError("max_halvings must be >= 0")
        ContinuationSchedule(self.eps_schedule)  # validates the schedule

    @property
    def residual_order(self) -> int:
        """Order of the residual norm, ``s_tilde - m`` capped at the supported maximum."""
        return min(self.s_tilde - self.m, NORM_CAP)

    @property
    def iterate_order(self) -> int:
        return min(self.d0, NORM_CAP)


@dataclass
class IterationRecord:
    iter: int
    eps: float
    theta: float  # nan for Newton
    res_l2: float
    res_h1: float
    res_top: float
    norm_l2: float
    norm_h1: float
    norm_h5: float
    norm_top: float
    halvings: int = 0
    linear_iterations: int = 0
    linear_method: str = ""
    note: str = ""


@dataclass
class SolveReport:
    method: str
    params: NashMoserParams
    tol: float
    records: list[IterationRecord] = field(default_factory=list)
    verdict: str | None = None
    message: str = ""

    def append(self, rec: IterationRecord):
        if self.records and rec.iter <= self.records[-1].iter:
            raise ValueError("records must be appended in iteration order")
        self.records.append(rec)

    def finish(self, verdict: str, message: str = ""):
        if self.verdict is not None:
            raise RuntimeError(f"verdict already set to {self.verdict!r}")
        if verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {verdict!r}")
        self.verdict = verdict
        self.message = message

    @property
    def converged(self) -> bool:
        return self.verdict == "converged"

    @property
    def residuals(self) -> list[float]:
        return [r.res_l2 for r in self.records]

    @property
    def iterations(self) -> int:
        """Number of accepted updates."""
        return sum(1 for r in self.records[1:] if "empty" not in r.note)

    def table(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_HEADER)
        for r in self.records:
            w.writerow([r.iter, repr(r.eps), repr(r.theta), repr(r.res_l2), repr(r.res_h1), repr(r.norm_h5)])
        return buf.getvalue()

    def text(self) -> str:
        p = self.params
        lines = [
            f"# method {self.method} tol {self.tol:g} residual order {p.residual_order} iterate order {p.iterate_order}",
            "# iter eps theta res_l2 res_h1 res_top norm_l2 norm_h1 norm_h5 norm_top halvings lin_its lin_method note",
        ]
        for r in self.records:
            lines.append(
                f"{r.iter} {r.eps:g} {r.theta:g} {r.res_l2:.6e} {r.res_h1:.6e} {r.res_top:.6e} "
                f"{r.norm_l2:.6e} {r.norm_h1:.6e} {r.norm_h5:.6e} {r.norm_top:.6e} "
                f"{r.halvings} {r.linear_iterations} {r.linear_method or '-'} {r.note or '-'}"
            )
        lines.append(f"verdict {self.verdict} {self.message}".rstrip())
        return "\n".join(lines) + "\n"


# -- residual helpers ---------------------------------------------------------------


def _residual(data: ProblemData, w) -> tuple[np.ndarray, np.ndarray]:
    return residual_arrays(data.total(*w), data.bernoulli)


def _l2(grid, pair) -> float:
    return float(np.sqrt(sum(grid.integrate(u * u) for u in pair)))


def residual_field(data: ProblemData, w=None) -> tuple[np.ndarray, np.ndarray]:
    """Strong residual at every node (walls included) with the public stencils."""
    pair = data.total(*w) if w is not None else data.total()
    grid = data.grid
    gf, gg = pair.grad_f(), pair.grad_g()
    v = _cross(gf, gg)
    mu = -grid.div(_cross(gg, v))
    nu = -grid.div(_cross(v, gf))
    if not data.bernoulli.is_zero:
        Hf, Hg = data.bernoulli.first(pair.f_values(), pair.g_values())
        mu, nu = mu + Hf, nu + Hg
    return mu, nu


def residual_gate(data: ProblemData, params: NashMoserParams | None = None, order: int | None = None) -> float:
    """Norm of the residual at ``w = 0`` in the highest supported order (admission metric)."""
    params = params or NashMoserParams()
    k = params.residual_order if order is None else order
    return sobolev_norms(residual_field(data), [k], data.grid)[k]


def _record(data, params, it, w, r, eps, theta, **kw) -> IterationRecord:
    grid = data.grid
    rk = sobolev_norms(r, {0, 1, params.residual_order}, grid)
    wk = sobolev_norms(w, {0, 1, params.iterate_order, params.residual_order}, grid)
    return IterationRecord(
        it,
        eps,
        theta,
        rk[0],
        rk[1],
        rk[params.residual_order],
        wk[0],
        wk[1],
        wk[params.iterate_order],
        wk[params.residual_order],
        **kw,
    )


def _initial(data, initial):
    g = data.grid
    if initial is None:
        return np.zeros(g.shape), np.zeros(g.shape)
    w = []
    for u in initial:
        a = np.array(u.values if isinstance(u, ScalarField3) else u, dtype=float)
        if a.shape != g.shape:
            raise ValueError(f"initial iterate has shape {a.shape}, grid is {g.shape}")
        if max(np.abs(a[0]).max(), np.abs(a[-1]).max()) > 0:
            raise ValueError("initial iterate must vanish on the walls")
        w.append(a)
    return tuple(w)


def _linear_step(data, params, background_w, rhs):
    """Newton correction at the background; warm-started through the eps schedule."""
    op = LinearizedOperator(data.total(*background_w), data.bernoulli)
    x0, its = None, 0
    for eps in params.eps_schedule:
        res = solve_jacobian(op.with_eps(eps), rhs, tol=params.linear_tol, x0=x0, maxiter=params.linear_maxiter)
        x0, its = (res.F, res.G), its + res.iterations
    return (res.F.values, res.G.values), its, res.method


def _iterate(data, initial, tol, params, smoothing: bool) -> tuple[StreamPair, SolveReport]:
    grid = data.grid
    report = SolveReport("nash-moser" if smoothing else "newton", params, tol)
    w = _initial(data, initial)
    r = _residual(data, w)
    rnorm = _l2(grid, r)
    kmax = max_wavenumber(grid)
    eps_final = params.eps_schedule[-1]
    report.append(_record(data, params, 0, w, r, eps_final, np.nan, note="initial"))
    accepted = 0
    for it in range(1, params.max_outer + 1):
        if rnorm < tol:
            report.finish("converged", f"residual {rnorm:.3e} after {accepted} updates")
            break
        wk = sobolev_norms(w, [params.iterate_order], grid)[params.iterate_order]
        if wk > params.r0:
            report.finish("trust-radius-exceeded", f"||w||_H{params.iterate_order} = {wk:.3e} > r0 = {params.r0:g}")
            break
        theta = np.nan
        note = ""
        if smoothing:
            theta = params.theta0 * params.sigma ** (it - 1)
            if theta >= kmax:
                note = "newton-limit"
                S = lambda u: u
            else:
                S = lambda u, t=theta: smooth_array(grid, u, t)
        else:
            S = lambda u: u
        try:
            rho, lin_its, lin_method = _linear_step(data, params, tuple(S(u) for u in w), (-r[0], -r[1]))
        except LinearSolveError as exc:
            report.finish("linear-failure", str(exc))
            break
        step = tuple(S(u) for u in rho)
        if not any(np.any(s) for s in step):
            report.append(
                _record(data, params, it, w, r, eps_final, theta, linear_iterations=lin_its,
                        linear_method=lin_method, note="empty-step")
            )
            continue
        lam, halvings = 1.0, 0
        while True:
            w_new = (w[0] + lam * step[0], w[1] + lam * step[1])
            r_new = _residual(data, w_new)
            rn_new = _l2(grid, r_new)
            if rn_new < rnorm or halvings >= params.max_halvings:
                break
            lam *= 0.5
            halvings += 1
        if not rn_new < rnorm:
            # below the Newton limit a smoothed step need not be a descent
            # direction; keep w and move on to the next cutoff
            skip = smoothing and note != "newton-limit"
            report.append(
                _record(data, params, it, w, r, eps_final, theta, halvings=halvings,
                        linear_iterations=lin_its, linear_method=lin_method,
                        note="empty-step" if skip else "step-rejected")
            )
            if skip:
                continue
            report.finish("linear-failure", f"no decrease after {halvings} step halvings")
            break
        w, r, rnorm = w_new, r_new, rn_new
        accepted += 1
        report.append(
            _record(data, params, it, w, r, eps_final, theta, halvings=halvings,
                    linear_iterations=lin_its, linear_method=lin_method, note=note)
        )
    else:
        if rnorm < tol:
            report.finish("converged", f"residual {rnorm:.3e} after {accepted} updates")
        else:
            report.finish("max-iterations", f"residual {rnorm:.3e} after {params.max_outer} iterations")
    return data.total(*w), report


def newton_solve(data: ProblemData, initial=None, tol: float = 1e-10, params: NashMoserParams | None = None):
    """Newton iteration ``w <- w + rho`` with ``A(w) rho = -F(w)``.

    Returns the total pair and a :class:`SolveReport`; the verdict says
    whether the residual dropped below ``tol`` (L2 norm).
    """
    return _iterate(data, initial, tol, params or NashMoserParams(), smoothing=False)


def nash_moser_solve(
    data: ProblemData,
    params: NashMoserParams | None = None,
    tol: float = 1e-10,
    initial=None,
    check_gate: bool = True,
):
    """Smoothed iteration ``w <- w + S(rho)`` with ``rho`` solving the linearization at ``S(w)``.

    ``S`` is the spectral cutoff at ``theta0 * sigma**l``; once the cutoff
    passes the largest grid wavenumber the step is a plain Newton step and
    is marked ``newton-limit`` in the report.
    """
    params = params or NashMoserParams()
    if check_gate:
        gate = residual_gate(data, params)
        if gate > params.gate:
            raise GateRejectedError(
                f"initial residual H{params.residual_order} norm {gate:.3e} exceeds gate {params.gate:.3e}"
            )
    return _iterate(data, initial, tol, params, smoothing=True)


def iterate_of(pair: StreamPair, data: ProblemData) -> tuple[np.ndarray, np.ndarray]:
    """The correction ``(f1, g1)`` carried by a total pair."""
    ref = data.total()
    return pair.periodic_f - ref.periodic_f, pair.periodic_g - ref.periodic_g
