"""Scenario files (YAML) describing a problem, its solver settings and outputs."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from . import dump
from .euler import AdmissibilityError, BernoulliSpec, ProblemData
from .expr import ExpressionError, parse_expression
from .fields import GridSpec, StreamPair
from .nashmoser import NashMoserParams

__all__ = ["Scenario", "ScenarioError", "parse_scenario", "load_scenario_text", "build_scenario", "shipped_scenarios", "DEFAULTS"]

DEFAULTS = {
    "name": "scenario",
    "parameters": {},
    "grid": {"L": 1.0, "P1": 1.0, "P2": 1.0, "Nx": 32, "Ny": 32, "Nz": 32},
    "base": {"grad_f": [0.0, 1.0, 0.0], "grad_g": [0.0, 0.0, 1.0]},
    "boundary": {"f0": "0", "g0": "0"},
    "bernoulli": {"c1": 0.0, "c2": 0.0, "modes": []},
    "solver": {"method": "newton", "tol": 1e-10, "eps_schedule": [0.0], "nash_moser": {}},
    "outputs": {"directory": None, "dumps": ["f", "g", "v", "p", "mu", "nu"], "tables": True},
}

_NM_FIELDS = {f.name for f in fields(NashMoserParams)}


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


def _merge(defaults: dict, given: dict, path: str = "") -> dict:
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        if key not in defaults:
            raise ScenarioError(f"unknown key {path + key!r}")
        if isinstance(defaults[key], dict) and key not in ("parameters", "nash_moser"):
            if not isinstance(val, dict):
                raise ScenarioError(f"{path + key!r} must be a mapping")
            out[key] = _merge(defaults[key], val, path + key + ".")
        else:
            out[key] = val
    return out


def _marks(node, prefix=()) -> dict:
    """Map key paths to YAML start marks for error positions."""
    out = {}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = prefix + (k.value,)
            out[path] = (v.start_mark, getattr(v, "style", None) in ("'", '"'))
            out.update(_marks(v, path))
    return out


@dataclass
class Scenario:
    """A validated scenario; ``raw`` is the resolved mapping echoed to output directories."""

    raw: dict
    grid: GridSpec
    problem: ProblemData
    params: NashMoserParams
    source: Path | None = None
    marks: dict = field(default_factory=dict, repr=False)

    @property
    def name(self) -> str:
        return self.raw["name"]

    @property
    def method(self) -> str:
        return self.raw["solver"]["method"]

    @property
    def tol(self) -> float:
        return float(self.raw["solver"]["tol"])

    def resolved_text(self) -> str:
        return yaml.safe_dump(self.raw, sort_keys=True, default_flow_style=None)

    def with_overrides(self, grid=None, tol=None, method=None) -> "Scenario":
        raw = copy.deepcopy(self.raw)
        if grid is not None:
            raw["grid"].update(Nx=int(grid[0]), Ny=int(grid[1]), Nz=int(grid[2]))
        if tol is not None:
            raw["solver"]["tol"] = float(tol)
        if method is not None:
            raw["solver"]["method"] = method
        return build_scenario(raw, self.source, self.marks)


def _pos(marks, path):
    m = marks.get(path)
    return (m[0].line + 1, m[0].column + 1) if m is not None else (None, None)


def _field_from_block(raw, key, grid, params, base_dir, marks):
    spec = raw["boundary"][key]
    path = ("boundary", key)
    if isinstance(spec, dict):
        if set(spec) != {"dump"}:
            raise ScenarioError(f"boundary.{key} mapping must have the single key 'dump'", *_pos(marks, path))
        p = Path(spec["dump"])
        if not p.is_absolute() and base_dir is not None:
            p = base_dir / p
        g2, values, _ = dump.read_records(p)[0]
        if g2 != grid:
            raise ScenarioError(f"boundary.{key} dump grid {g2} does not match scenario grid", *_pos(marks, path))
        return values
    try:
        expr = parse_expression(str(spec), params.keys())
    except ExpressionError as exc:
        line, col = _pos(marks, path)
        if line is not None:
            quoted = 1 if marks[path][1] else 0  # the mark points at the opening quote
            col = col + exc.column - 1 + quoted
            line = line + exc.line - 1
        raise ScenarioError(f"boundary.{key}: {exc.message}", line, col) from None
    vals = expr.sample(grid, params)
    for shift in ((0.0, grid.P1, 0.0), (0.0, 0.0, grid.P2)):
        other = expr.sample(grid, params, shift)
        if np.max(np.abs(other - vals)) > 1e-9 * max(1.0, np.max(np.abs(vals))):
            axis = "y" if shift[1] else "z"
            raise ScenarioError(f"boundary.{key} is not periodic in {axis}", *_pos(marks, path))
    return vals


def build_scenario(raw: dict, source: Path | None = None, marks: dict | None = None) -> Scenario:
    marks = marks or {}
    raw = _merge(DEFAULTS, raw)
    params = raw["parameters"] or {}
    if not isinstance(params, dict) or not all(isinstance(v, (int, float)) for v in params.values()):
        raise ScenarioError("parameters must map names to numbers", *_pos(marks, ("parameters",)))
    raw["parameters"] = {str(k): float(v) for k, v in params.items()}
    params = raw["parameters"]
    g = raw["grid"]
    try:
        grid = GridSpec(float(g["L"]), float(g["P1"]), float(g["P2"]), int(g["Nx"]), int(g["Ny"]), int(g["Nz"]))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"grid: {exc}", *_pos(marks, ("grid",))) from None
    raw["grid"] = {"L": grid.L, "P1": grid.P1, "P2": grid.P2, "Nx": grid.Nx, "Ny": grid.Ny, "Nz": grid.Nz}
    try:
        gf = [float(t) for t in raw["base"]["grad_f"]]
        gg = [float(t) for t in raw["base"]["grad_g"]]
        if len(gf) != 3 or len(gg) != 3:
            raise ValueError("gradients need three components")
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"base: {exc}", *_pos(marks, ("base",))) from None
    raw["base"] = {"grad_f": gf, "grad_g": gg}
    base_dir = source.parent if source is not None else None
    f0 = _field_from_block(raw, "f0", grid, params, base_dir, marks)
    g0 = _field_from_block(raw, "g0", grid, params, base_dir, marks)
    b = raw["bernoulli"]
    base = StreamPair.linear(grid, gf, gg)
    try:
        modes = [(int(m[0]), int(m[1]), complex(float(m[2]), float(m[3]) if len(m) > 3 else 0.0)) for m in b["modes"]]
        bern = BernoulliSpec.from_modes(modes, float(b["c1"]), float(b["c2"]), base.R, grid.P1, grid.P2)
    except (TypeError, ValueError, IndexError) as exc:
        raise ScenarioError(f"bernoulli: {exc}", *_pos(marks, ("bernoulli",))) from None
    raw["bernoulli"] = {
        "c1": float(b["c1"]),
        "c2": float(b["c2"]),
        "modes": [[m1, m2, c.real, c.imag] for m1, m2, c in modes],
    }
    try:
        problem = ProblemData(grid, base, StreamPair.periodic(grid, f0, g0), bern)
    except AdmissibilityError as exc:
        raise ScenarioError(f"invariant violated: {exc}", *_pos(marks, ("base",))) from None
    s = raw["solver"]
    if s["method"] not in ("newton", "nash-moser"):
        raise ScenarioError(f"solver.method must be newton or nash-moser, got {s['method']!r}", *_pos(marks, ("solver", "method")))
    nm = dict(s.get("nash_moser") or {})
    unknown = set(nm) - _NM_FIELDS
    if unknown:
        raise ScenarioError(f"unknown solver.nash_moser keys {sorted(unknown)}", *_pos(marks, ("solver", "nash_moser")))
    nm.setdefault("eps_schedule", tuple(s["eps_schedule"]))
    try:
        params_nm = NashMoserParams(**nm)
        tol = float(s["tol"])
        if not tol > 0:
            raise ValueError("tol must be positive")
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"solver: {exc}", *_pos(marks, ("solver",))) from None
    s["tol"] = tol
    s["eps_schedule"] = list(params_nm.eps_schedule)
    s["nash_moser"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(params_nm).items()}
    return Scenario(raw, grid, problem, params_nm, source, marks)


def load_scenario_text(text: str, source: Path | None = None) -> Scenario:
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            raise ScenarioError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", mark.line + 1, mark.column + 1) from None
        raise ScenarioError(f"YAML error: {exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping at top level", 1, 1)
    return build_scenario(data, source, _marks(node) if node is not None else {})


def parse_scenario(path) -> Scenario:
    """Read, fill defaults and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except FileNotFoundError:
        raise ScenarioError(f"scenario file {path} not found") from None
    except UnicodeDecodeError as exc:
        raise ScenarioError(f"scenario file is not UTF-8: {exc}") from None
    return load_scenario_text(text, path)


def shipped_scenarios() -> dict[str, Path]:
    """Scenario files distributed with the package."""
    here = Path(__file__).parent / "scenarios"
    return {p.stem: p for p in sorted(here.glob("*.yaml"))}

