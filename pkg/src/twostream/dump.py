"""Field dump files.

A dump record is a four-line text header::

    DSF1
    <L> <P1> <P2>
    <Nx> <Ny> <Nz>
    <name>

followed by ``Nx*Ny*Nz`` little-endian float64 values, x varying slowest.
A file may hold several records back to back (vector fields are three
records named ``<name>.x``, ``<name>.y``, ``<name>.z``).  Stream functions
are dumped as their total sampled values with the linear part appended to
the name line as ``<name> linear <a> <b> <c>`` so the periodic correction
can be recovered on read.
"""

from __future__ import annotations

import io
import numpy as np

from .fields import GridSpec, ScalarField3, StreamPair, VectorField3

MAGIC = "DSF1"


class DumpFormatError(ValueError):
    pass


def _header(grid: GridSpec, name: str) -> bytes:
    if "\n" in name:
        raise ValueError("field name must be a single line")
    lines = [
        MAGIC,
        f"{float(grid.L)!r} {float(grid.P1)!r} {float(grid.P2)!r}",
        f"{grid.Nx} {grid.Ny} {grid.Nz}",
        name,
    ]
    return ("\n".join(lines) + "\n").encode("ascii")


def write_record(fh, grid: GridSpec, values: np.ndarray, name: str):
    fh.write(_header(grid, name))
    fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes(order="C"))


def _readline(fh) -> str:
    line = fh.readline()
    if not line:
        raise EOFError
    return line.decode("ascii").rstrip("\n")


def read_record(fh) -> tuple[GridSpec, np.ndarray, str]:
    magic = _readline(fh)
    if magic != MAGIC:
        raise DumpFormatError(f"bad magic {magic!r}")
    try:
        L, P1, P2 = (float(t) for t in _readline(fh).split())
        Nx, Ny, Nz = (int(t) for t in _readline(fh).split())
        name = _readline(fh)
        grid = GridSpec(L, P1, P2, Nx, Ny, Nz)
    except ValueError as exc:
        raise DumpFormatError(f"malformed header: {exc}") from exc
    except EOFError:
        raise DumpFormatError("truncated header") from None
    nbytes = 8 * Nx * Ny * Nz
    raw = fh.read(nbytes)
    if len(raw) != nbytes:
        raise DumpFormatError("truncated payload")
    values = np.frombuffer(raw, dtype="<f8").astype(float).reshape(grid.shape)
    return grid, values, name


def read_records(path) -> list[tuple[GridSpec, np.ndarray, str]]:
    out = []
    with open(path, "rb") as fh:
        while True:
            try:
                out.append(read_record(fh))
            except EOFError:
                break
    if not out:
        raise DumpFormatError(f"{path}: no records")
    return out


def write_scalar(path, field: ScalarField3, name: str | None = None):
    with open(path, "wb") as fh:
        write_record(fh, field.grid, field.values, name if name is not None else (field.name or "field"))


def read_scalar(path) -> ScalarField3:
    grid, values, name = read_records(path)[0]
    return ScalarField3(grid, values, name)


def write_vector(path, v: VectorField3, name: str = "v"):
    with open(path, "wb") as fh:
        for i, c in enumerate("xyz"):
            write_record(fh, v.grid, v.values[i], f"{name}.{c}")


def read_vector(path) -> VectorField3:
    recs = read_records(path)
    if len(recs) != 3:
        raise DumpFormatError(f"{path}: expected 3 records, found {len(recs)}")
    grid = recs[0][0]
    if any(r[0] != grid for r in recs):
        raise DumpFormatError("vector components on different grids")
    return VectorField3(grid, np.stack([r[1] for r in recs]))


def _stream_name(name: str, lin: np.ndarray) -> str:
    return f"{name} linear {float(lin[0])!r} {float(lin[1])!r} {float(lin[2])!r}"


def _parse_stream_name(line: str) -> tuple[str, np.ndarray]:
    parts = line.split()
    if len(parts) == 5 and parts[1] == "linear":
        return parts[0], np.array([float(t) for t in parts[2:]])
    return line, np.zeros(3)


def write_stream(path, pair: StreamPair, which: str):
    """Dump the total values of ``f`` or ``g`` from ``pair``."""
    if which == "f":
        vals, lin = pair.f_values(), pair.linear_f
    elif which == "g":
        vals, lin = pair.g_values(), pair.linear_g
    else:
        raise ValueError("which must be 'f' or 'g'")
    with open(path, "wb") as fh:
        write_record(fh, pair.grid, vals, _stream_name(which, lin))


def read_stream(path) -> tuple[GridSpec, np.ndarray, np.ndarray]:
    """Return ``(grid, linear_part, periodic_part)`` from a stream dump."""
    grid, values, name = read_records(path)[0]
    _, lin = _parse_stream_name(name)
    X, Y, Z = grid.mesh()
    periodic = values - (lin[0] * X + lin[1] * Y + lin[2] * Z)
    return grid, lin, periodic


def read_stream_pair(path_f, path_g) -> StreamPair:
    grid_f, lf, pf = read_stream(path_f)
    grid_g, lg, pg = read_stream(path_g)
    if grid_f != grid_g:
        raise DumpFormatError("f and g dumps use different grids")
    return StreamPair(grid_f, lf, lg, pf, pg)


def to_bytes(field: ScalarField3, name: str = "field") -> bytes:
    buf = io.BytesIO()
    write_record(buf, field.grid, field.values, name)
    return buf.getvalue()


__all__ = [
    "DumpFormatError",
    "write_scalar",
    "read_scalar",
    "write_vector",
    "read_vector",
    "write_stream",
    "read_stream",
    "read_stream_pair",
    "read_records",
    "to_bytes",
]
