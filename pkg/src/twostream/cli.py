"""Command-line front end.

Every subcommand writes into ``--out`` a copy of the resolved scenario (when
one is given), a ``VERSION`` stamp and a ``MANIFEST`` of sha256 digests, and
prints ``STATUS: <verdict>`` as its last line.  Exit codes: 0 success,
2 validation failure, 3 solver failure.
"""

from __future__ import annotations

import argparse
import hashlib
import re
import sys
import warnings
from pathlib import Path

import numpy as np
import scipy

from . import __version__, dump
from .diagnostics import COERCIVITY_CONSTANT, noncoercive_probe, probe_slope, rayleigh_min, tame_probe
from .euler import BernoulliSpec, DegenerateVelocityError, FlowState, pressure, verification_metrics
from .extract import extract_streams
from .fields import ScalarField3, StreamPair
from .linearized import LinearSolveError
from .nashmoser import GateRejectedError, nash_moser_solve, newton_solve, residual_field
from .scenario import Scenario, ScenarioError, parse_scenario

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER = 0, 2, 3

#: thresholds used by ``verify`` to call a state a solution (relative to max |v|^2)
VERIFY_EULER_REL = 1e-5
VERIFY_DIVERGENCE = 1e-6
#: roundtrip representation error accepted by ``extract``
EXTRACT_ROUNDTRIP = 1e-4


class ValidationError(ValueError):
    pass


class SolverError(RuntimeError):
    def __init__(self, verdict: str, message: str):
        super().__init__(message)
        self.verdict = verdict


def parse_grid(text: str) -> tuple[int, int, int]:
    """``32x32x32`` or a single ``32`` for a cube."""
    parts = re.split(r"[x,]", text.strip().lower())
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; expected NxNyNz") from None
    if len(vals) == 1:
        vals = vals * 3
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; expected NxNyNz")
    return tuple(vals)


class Output:
    """An output directory that records what was written to it."""

    def __init__(self, directory: Path):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def path(self, name: str) -> Path:
        if name not in self.files:
            self.files.append(name)
        return self.dir / name

    def text(self, name: str, content: str):
        self.path(name).write_text(content, encoding="utf-8")

    def finish(self):
        self.text("VERSION", f"twostream {__version__}\nnumpy {np.__version__}\nscipy {scipy.__version__}\n")
        lines = []
        for name in sorted(self.files):
            digest = hashlib.sha256((self.dir / name).read_bytes()).hexdigest()
            lines.append(f"{digest}  {name}")
        (self.dir / "MANIFEST").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _metrics_text(metrics: dict) -> str:
    return "".join(f"{k} {float(v)!r}\n" for k, v in sorted(metrics.items()))


def _load(args) -> Scenario | None:
    if args.scenario is None:
        return None
    sc = parse_scenario(args.scenario)
    if args.grid or args.tol is not None or args.method:
        sc = sc.with_overrides(args.grid, args.tol, args.method)
    return sc


def _require(sc, cmd):
    if sc is None:
        raise ValidationError(f"{cmd} needs --scenario")
    return sc


def _out_dir(args, sc, cmd) -> Output:
    if args.out is not None:
        return Output(args.out)
    if sc is not None and sc.raw["outputs"]["directory"]:
        return Output(sc.raw["outputs"]["directory"])
    return Output(Path("out") / (f"{sc.name}-{cmd}" if sc is not None else cmd))


def _read_pair(state: Path) -> StreamPair:
    state = Path(state)
    if state.is_dir():
        return dump.read_stream_pair(state / "f.dsf", state / "g.dsf")
    raise ValidationError(f"state {state} must be a directory holding f.dsf and g.dsf")


def cmd_solve(args, sc, out: Output, log) -> str:
    sc = _require(sc, "solve")
    data = sc.problem
    try:
        if sc.method == "newton":
            pair, report = newton_solve(data, tol=sc.tol, params=sc.params)
        else:
            pair, report = nash_moser_solve(data, sc.params, tol=sc.tol)
    except GateRejectedError as exc:
        raise ValidationError(str(exc)) from None
    except LinearSolveError as exc:
        raise SolverError("linear-failure", str(exc)) from None
    wanted = set(sc.raw["outputs"]["dumps"])
    state = FlowState.from_pair(pair, data.bernoulli)
    mu, nu = residual_field(data, _correction(pair, data))
    fields = {
        "f": lambda p: dump.write_stream(p, pair, "f"),
        "g": lambda p: dump.write_stream(p, pair, "g"),
        "v": lambda p: dump.write_vector(p, state.v),
        "p": lambda p: dump.write_scalar(p, pressure(state, data.bernoulli), "p"),
        "mu": lambda p: dump.write_scalar(p, ScalarField3(data.grid, mu), "mu"),
        "nu": lambda p: dump.write_scalar(p, ScalarField3(data.grid, nu), "nu"),
    }
    for key in ("f", "g", "v", "p", "mu", "nu"):
        if key in wanted:
            fields[key](out.path(f"{key}.dsf"))
    if sc.raw["outputs"]["tables"]:
        out.text("report.txt", report.text())
        out.text("report.csv", report.table())
    metrics = verification_metrics(state, float(data.vbar[0]))
    out.text("verify.txt", _metrics_text(metrics))
    log(report.text().rstrip())
    log(f"euler_residual_relative {metrics['euler_residual_relative']:.3e} vorticity {metrics['vorticity']:.3e}")
    if not report.converged:
        raise SolverError(report.verdict, report.message)
    return report.verdict


def _correction(pair, data):
    ref = data.total()
    return pair.periodic_f - ref.periodic_f, pair.periodic_g - ref.periodic_g


def cmd_extract(args, sc, out: Output, log) -> str:
    if args.field is None:
        raise ValidationError("extract needs --field <velocity dump>")
    v = dump.read_vector(args.field)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            pair, info = extract_streams(v, return_info=True)
    except DegenerateVelocityError as exc:
        raise ValidationError(str(exc)) from None
    dump.write_stream(out.path("f.dsf"), pair, "f")
    dump.write_stream(out.path("g.dsf"), pair, "g")
    summary = {k: info[k] for k in ("alpha", "roundtrip_error", "min_abs_v1", "max_divergence")}
    out.text("extract.txt", _metrics_text(summary))
    log(f"alpha {info['alpha']!r} roundtrip {info['roundtrip_error']:.3e} min|v1| {info['min_abs_v1']:.3e}")
    if not info["roundtrip_error"] < EXTRACT_ROUNDTRIP:
        raise SolverError("roundtrip-failed", f"roundtrip error {info['roundtrip_error']:.3e}")
    return "ok"


def cmd_verify(args, sc, out: Output, log) -> str:
    if args.state is None:
        raise ValidationError("verify needs --state <directory with f.dsf, g.dsf>")
    pair = _read_pair(args.state)
    bern = sc.problem.bernoulli if sc is not None else BernoulliSpec()
    if sc is not None and sc.grid != pair.grid:
        raise ValidationError(f"state grid {pair.grid} differs from scenario grid {sc.grid}")
    state = FlowState.from_pair(pair, bern)
    vbar1 = float(sc.problem.vbar[0]) if sc is not None else None
    metrics = verification_metrics(state, vbar1)
    out.text("verify.txt", _metrics_text(metrics))
    for k, val in sorted(metrics.items()):
        log(f"{k} {val:.6e}")
    if metrics["euler_residual_relative"] > VERIFY_EULER_REL or metrics["divergence"] > VERIFY_DIVERGENCE:
        raise SolverError("not-a-solution", "state fails the Euler or divergence threshold")
    return "verified"


def cmd_spectrum(args, sc, out: Output, log) -> str:
    sc = _require(sc, "spectrum")
    data = sc.problem
    grid = data.grid
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        res = rayleigh_min(data.total(), 0.0, data.bernoulli, seed=args.seed)
    vmin = abs(float(data.vbar[0]))
    bound = COERCIVITY_CONSTANT * np.pi**2 * vmin**2 / grid.L**2
    n_list = [n for n in (1, 2, 4, 8, 16, 32) if 2 * n < grid.Nz]
    rows = noncoercive_probe(data.base, n_list)
    lines = [
        "n,B,h1_squared,quotient",
        *(f"{r.n},{r.B!r},{r.h1_squared!r},{r.quotient!r}" for r in rows),
    ]
    out.text("probe.csv", "\n".join(lines) + "\n")
    slope = probe_slope([r for r in rows if r.n >= 2]) if len([r for r in rows if r.n >= 2]) >= 2 else float("nan")
    summary = {
        "rayleigh_min": res.min_quotient,
        "rayleigh_converged": float(res.converged),
        "rayleigh_iterations": float(res.iterations),
        "coercivity_bound": bound,
        "coercivity_margin": res.min_quotient / bound,
        "probe_slope": slope,
    }
    out.text("spectrum.txt", _metrics_text(summary))
    log(f"rayleigh_min {res.min_quotient:.6e} (bound pi^2 min v1^2 / (32 L^2) = {bound:.6e})")
    log(f"probe slope {slope:.4f} over n = {[r.n for r in rows if r.n >= 2]}")
    if not res.converged:
        raise SolverError("eigen-stagnation", "eigen-iteration did not converge")
    return "negative-quotient" if res.negative else "ok"


def cmd_probe_tame(args, sc, out: Output, log) -> str:
    sc = _require(sc, "probe-tame")
    data = sc.problem
    lines = []
    for r in (1, 2):
        try:
            res = tame_probe(data.total(), r, args.samples, seed=args.seed, bernoulli=data.bernoulli)
        except LinearSolveError as exc:
            raise SolverError("linear-failure", str(exc)) from None
        out.text(f"tame_r{r}.csv", res.table())
        lines.append(f"r {r} C {res.C!r} samples {len(res.ratios)} excluded {res.excluded} background_norm {res.background_norm!r}")
        log(lines[-1])
    out.text("tame.txt", "\n".join(lines) + "\n")
    return "ok"


COMMANDS = {
    "solve": cmd_solve,
    "extract": cmd_extract,
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "probe-tame": cmd_probe_tame,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twostream", description="Two-stream-function steady Euler solver")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("solve", "nonlinear solve with dumps and iteration tables"),
        ("extract", "recover stream functions from a velocity dump"),
        ("verify", "Euler residual, divergence and Bernoulli drift of a state"),
        ("spectrum", "smallest Rayleigh quotient and non-coercivity probe"),
        ("probe-tame", "empirical constants of the tame inverse estimate"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--scenario", type=Path, help="scenario YAML file")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--grid", type=parse_grid, help="grid override NxNyNz")
        p.add_argument("--tol", type=float, help="tolerance override")
        p.add_argument("--method", choices=("newton", "nash-moser"), help="solver override")
        p.add_argument("--seed", type=int, default=0, help="random seed")
        if name == "extract":
            p.add_argument("--field", type=Path, help="three-component velocity dump")
        if name == "verify":
            p.add_argument("--state", type=Path, help="directory with f.dsf and g.dsf")
        if name == "probe-tame":
            p.add_argument("--samples", type=int, default=20, help="number of random right-hand sides")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    log = lambda msg: print(msg, flush=True)
    out = None
    try:
        sc = _load(args)
        out = _out_dir(args, sc, args.command)
        if sc is not None:
            out.text("scenario.resolved.yaml", sc.resolved_text())
        verdict = COMMANDS[args.command](args, sc, out, log)
        code = EXIT_OK
    except (ScenarioError, ValidationError, dump.DumpFormatError, FileNotFoundError) as exc:
        log(f"error: {exc}")
        verdict, code = "validation-failed", EXIT_VALIDATION
    except SolverError as exc:
        log(f"error: {exc}")
        verdict, code = exc.verdict, EXIT_SOLVER
    if out is not None:
        out.text("status.txt", f"{verdict}\n")
        out.finish()
    print(f"STATUS: {verdict}", flush=True)
    return code


if __name__ == "__main__":
    sys.exit(main())
