import io
import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twostream import dump
from twostream.fields import GridSpec, ScalarField3, StreamPair, VectorField3

from .conftest import perturbed_pair


def test_header_layout():
    grid = GridSpec(2.0, 1.0, 0.5, 4, 4, 4)
    vals = np.arange(64, dtype=float).reshape(grid.shape)
    blob = dump.to_bytes(ScalarField3(grid, vals), "u")
    lines = blob.split(b"\n", 4)
    assert lines[:4] == [b"DSF1", b"2.0 1.0 0.5", b"4 4 4", b"u"]
    payload = lines[4]
    assert len(payload) == 512
    # x-major, then y, then z, little-endian float64
    assert struct.unpack("<64d", payload) == tuple(vals.ravel(order="C"))
    assert struct.unpack("<d", payload[8:16])[0] == vals[0, 0, 1]


@given(seed=st.integers(0, 2**32 - 1))
def test_scalar_roundtrip_bit_exact(tmp_path_factory, seed):
    grid = GridSpec(1.0, 3.0, 0.7, 5, 4, 4)
    vals = np.random.default_rng(seed).standard_normal(grid.shape) * 10.0 ** np.random.default_rng(seed).integers(-300, 300)
    path = tmp_path_factory.mktemp("d") / "u.dsf"
    dump.write_scalar(path, ScalarField3(grid, vals, "u"))
    back = dump.read_scalar(path)
    assert back.grid == grid and back.name == "u"
    assert back.values.tobytes() == vals.tobytes()


def test_grid_floats_roundtrip_exactly(tmp_path):
    grid = GridSpec(0.1, 1 / 3, np.pi, 4, 4, 4)
    dump.write_scalar(tmp_path / "u.dsf", grid.zeros("u"))
    assert dump.read_scalar(tmp_path / "u.dsf").grid == grid


def test_vector_roundtrip(tmp_path, small_grid, rng):
    v = VectorField3(small_grid, rng.standard_normal((3,) + small_grid.shape))
    dump.write_vector(tmp_path / "v.dsf", v)
    names = [r[2] for r in dump.read_records(tmp_path / "v.dsf")]
    assert names == ["v.x", "v.y", "v.z"]
    assert np.array_equal(dump.read_vector(tmp_path / "v.dsf").values, v.values)


def test_stream_pair_roundtrip(tmp_path, small_grid, rng):
    pair = perturbed_pair(small_grid, rng)
    dump.write_stream(tmp_path / "f.dsf", pair, "f")
    dump.write_stream(tmp_path / "g.dsf", pair, "g")
    back = dump.read_stream_pair(tmp_path / "f.dsf", tmp_path / "g.dsf")
    assert np.array_equal(back.linear_f, pair.linear_f)
    assert np.allclose(back.periodic_f, pair.periodic_f, atol=1e-15)
    assert np.array_equal(back.f_values(), pair.f_values())
    assert np.array_equal(back.g_values(), pair.g_values())


def test_plain_scalar_reads_as_periodic_stream(tmp_path, small_grid):
    dump.write_scalar(tmp_path / "u.dsf", small_grid.zeros("u"))
    _, lin, per = dump.read_stream(tmp_path / "u.dsf")
    assert np.all(lin == 0) and np.all(per == 0)


@pytest.mark.parametrize(
    "blob",
    [
        b"DSF2\n1 1 1\n4 4 4\nu\n" + b"\0" * 512,
        b"DSF1\n1 1\n4 4 4\nu\n" + b"\0" * 512,
        b"DSF1\n1 1 1\n4 4 4\nu\n" + b"\0" * 511,
        b"DSF1\n1 1 1\n1 1 1\nu\n" + b"\0" * 8,
        b"DSF1\n1 1 1\n",
    ],
)
def test_malformed_dumps(blob, tmp_path):
    path = tmp_path / "bad.dsf"
    path.write_bytes(blob)
    with pytest.raises(dump.DumpFormatError):
        dump.read_records(path)


def test_empty_file_rejected(tmp_path):
    (tmp_path / "e.dsf").write_bytes(b"")
    with pytest.raises(dump.DumpFormatError):
        dump.read_records(tmp_path / "e.dsf")


def test_vector_needs_three_records(tmp_path, small_grid):
    dump.write_scalar(tmp_path / "u.dsf", small_grid.zeros("u"))
    with pytest.raises(dump.DumpFormatError):
        dump.read_vector(tmp_path / "u.dsf")


def test_mismatched_stream_grids(tmp_path):
    a = StreamPair.linear(GridSpec.cube(4), (0, 1, 0), (0, 0, 1))
    b = StreamPair.linear(GridSpec.cube(6), (0, 1, 0), (0, 0, 1))
    dump.write_stream(tmp_path / "f.dsf", a, "f")
    dump.write_stream(tmp_path / "g.dsf", b, "g")
    with pytest.raises(dump.DumpFormatError):
        dump.read_stream_pair(tmp_path / "f.dsf", tmp_path / "g.dsf")


def test_multiline_name_rejected(small_grid):
    with pytest.raises(ValueError):
        dump.write_record(io.BytesIO(), small_grid, np.zeros(small_grid.shape), "a\nb")
