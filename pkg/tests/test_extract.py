import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twostream.diagnostics import random_smooth_field
from twostream.euler import BernoulliSpec, DegenerateVelocityError, FlowState, euler_residual, pressure, velocity
from twostream.extract import (
    GaugeError,
    GaugeMap,
    TransportedBernoulli,
    extract_streams,
    factorize_flux,
    gauge_transform,
    trace_grid,
    trace_invariants,
    verify_representation,
)
from twostream.fields import GridSpec, StreamPair, VectorField3

from .conftest import perturbed_pair

SHEAR_AMP = 0.3


def shear_field(grid):
    _, Y, _ = grid.full_mesh()
    vals = np.zeros((3,) + grid.shape)
    vals[0] = 1.0 + SHEAR_AMP * np.cos(2 * np.pi * Y / grid.P1)
    return VectorField3(grid, vals)


def shear_f(grid):
    _, Y, _ = grid.full_mesh()
    k = 2 * np.pi / grid.P1
    return Y + SHEAR_AMP / k * np.sin(k * Y)


def gentle_pair(grid, seed, amp=0.02):
    """Base pair plus a single-mode-scale smooth correction."""
    r = np.random.default_rng(seed)
    f = amp * random_smooth_field(grid, r, nmax=1, mmax=1)
    g = amp * random_smooth_field(grid, r, nmax=1, mmax=1)
    return StreamPair(grid, (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), f, g)


def shear_map(c=1.0):
    return GaugeMap(np.array([[1.0, c], [0.0, 1.0]]))


def wave_map(amp=0.05):
    # (f, g) -> (f + amp sin(2 pi g), g) is unimodular for every amp
    return GaugeMap(np.eye(2), {(0, 1): (-0.5j * amp, 0.0), (0, -1): (0.5j * amp, 0.0)})


# -- tracing --------------------------------------------------------------------


def test_trace_uniform_flow():
    grid = GridSpec.cube(8)
    v = VectorField3.constant(grid, (1.0, 0.0, 0.0))
    tr = trace_invariants(v, (0.6, 0.3, 0.7))
    assert tr.T == pytest.approx(0.6, abs=1e-12)
    assert (tr.Y, tr.Z) == pytest.approx((0.3, 0.7), abs=1e-12)


def test_trace_constant_tilted_flow():
    grid = GridSpec.cube(8)
    c = 0.4
    v = VectorField3.constant(grid, (1.0, c, 0.0))
    tr = trace_invariants(v, (0.5, 0.2, 0.9))
    assert tr.Y == pytest.approx(0.2 - c * 0.5, abs=1e-12)
    assert tr.Z == pytest.approx(0.9, abs=1e-12)


def test_trace_shear_flow():
    grid = GridSpec.cube(16)
    v = shear_field(grid)
    y0 = grid.y[3]
    tr = trace_invariants(v, (0.75, y0, 0.1))
    w = 1.0 + SHEAR_AMP * math.cos(2 * math.pi * y0)
    assert tr.T == pytest.approx(0.75 / w, rel=1e-10)
    assert (tr.Y, tr.Z) == pytest.approx((y0, 0.1), abs=1e-12)


def test_trace_negative_flux_gives_negative_time():
    grid = GridSpec.cube(8)
    v = VectorField3.constant(grid, (-2.0, 0.0, 0.0))
    assert trace_invariants(v, (0.5, 0.0, 0.0)).T == pytest.approx(-0.25, abs=1e-12)


def test_trace_rejects_sign_change():
    grid = GridSpec.cube(8)
    X, _, _ = grid.full_mesh()
    vals = np.zeros((3,) + grid.shape)
    vals[0] = X - 0.5
    with pytest.raises(DegenerateVelocityError):
        trace_invariants(VectorField3(grid, vals), (0.9, 0.0, 0.0))


def test_trace_rejects_point_outside():
    grid = GridSpec.cube(8)
    v = VectorField3.constant(grid, (1.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        trace_invariants(v, (1.5, 0.0, 0.0))


def transport_defect(n):
    grid = GridSpec(1.0, 1.0, 1.0, n, 16, 16)
    v = velocity(gentle_pair(grid, 11))
    _, Y, Z = trace_grid(v)
    V = v.values
    _, yy, zz = grid.full_mesh()
    out = 0.0
    # Y - y and Z - z are periodic in (y, z), so the spectral stencils apply
    for per, lin in ((Y - yy, V[1]), (Z - zz, V[2])):
        dv = sum(V[j] * grid.d(per, j) for j in range(3)) + lin
        out = max(out, float(np.max(np.abs(dv[2:-2]))))
    return out


def test_traced_coordinates_are_invariants():
    e1, e2 = transport_defect(16), transport_defect(32)
    assert e2 < 1e-3
    assert e1 / e2 > 3.0


# -- flux factorization ---------------------------------------------------------


def test_factorize_unit_flux():
    fact = factorize_flux(np.ones((8, 6)))
    assert fact.alpha == 1.0
    assert np.all(fact.a == 1.0) and np.all(fact.b == 1.0)


def test_factorize_y_modulation():
    y = np.arange(16) / 16
    eps = 0.2
    s = np.repeat((1 + eps * np.cos(2 * np.pi * y))[:, None], 8, axis=1)
    fact = factorize_flux(s)
    assert fact.alpha == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(fact.a, 1 + eps * np.cos(2 * np.pi * y), atol=1e-14)
    assert np.allclose(fact.b, 1.0, atol=1e-14)


def test_factorize_separable():
    y = np.arange(16) / 16
    z = np.arange(12) / 12
    w1 = 2.0 + np.sin(2 * np.pi * y)
    w2 = 1.0 + 0.5 * np.cos(4 * np.pi * z)
    fact = factorize_flux(np.outer(w1, w2))
    assert np.allclose(fact.a, w1, atol=1e-14)
    assert np.allclose(fact.b, w2[None, :], atol=1e-14)


def test_factorize_rejects_sign_change():
    s = np.ones((4, 4))
    s[1, 2] = -1.0
    with pytest.raises(DegenerateVelocityError):
        factorize_flux(s)


@given(st.integers(0, 2**32 - 1))
def test_factorize_reconstructs(seed):
    r = np.random.default_rng(seed)
    s = 1.0 + 0.5 * r.random((10, 7))
    fact = factorize_flux(s)
    assert np.allclose(fact.a[:, None] * fact.b, s, rtol=1e-14)
    assert np.allclose(fact.b.mean(axis=1), 1.0, atol=1e-14)
    assert fact.alpha == pytest.approx(fact.a.mean(), rel=1e-14)


# -- extraction -----------------------------------------------------------------


def test_extract_base_flow():
    grid = GridSpec.cube(12)
    v = VectorField3.constant(grid, (1.0, 0.0, 0.0))
    pair = extract_streams(v)
    _, Y, Z = grid.full_mesh()
    assert np.allclose(pair.linear_f, (0, 1, 0)) and np.allclose(pair.linear_g, (0, 0, 1))
    assert np.max(np.abs(pair.f_values() - Y)) < 1e-12
    assert np.max(np.abs(pair.g_values() - Z)) < 1e-12


def test_extract_shear_flow():
    grid = GridSpec.cube(16)
    v = shear_field(grid)
    pair, info = extract_streams(v, return_info=True)
    _, _, Z = grid.full_mesh()
    assert info["alpha"] == pytest.approx(1.0, abs=1e-14)
    assert np.max(np.abs(pair.f_values() - shear_f(grid))) < 1e-10
    assert np.max(np.abs(pair.g_values() - Z)) < 1e-10
    assert info["roundtrip_error"] < 1e-8


@pytest.mark.filterwarnings("ignore:velocity divergence")
def test_extract_roundtrip_converges():
    errs = []
    for n in (16, 32):
        grid = GridSpec(1.0, 1.0, 1.0, n, 16, 16)
        v = velocity(gentle_pair(grid, 5))
        errs.append(verify_representation(extract_streams(v), v))
    assert errs[1] < 1e-3
    assert errs[0] / errs[1] > 3.0


@pytest.mark.filterwarnings("ignore:velocity divergence")
def test_extract_output_has_periodic_corrections():
    grid = GridSpec(1.0, 1.0, 1.0, 16, 16, 16)
    v = velocity(gentle_pair(grid, 2))
    pair = extract_streams(v)
    assert pair.linear_f[0] == 0 and pair.linear_f[2] == 0
    assert np.allclose(pair.linear_g, (0, 0, 1))
    assert np.all(np.isfinite(pair.periodic_f)) and np.all(np.isfinite(pair.periodic_g))


def test_extract_warns_on_divergence():
    grid = GridSpec.cube(12)
    X, _, _ = grid.full_mesh()
    vals = np.zeros((3,) + grid.shape)
    vals[0] = 1.0 + 0.1 * X
    with pytest.warns(RuntimeWarning):
        extract_streams(VectorField3(grid, vals))


# -- representation check -------------------------------------------------------


def test_verify_base_pair(base_pair):
    v = VectorField3.constant(base_pair.grid, (1.0, 0.0, 0.0))
    assert verify_representation(base_pair, v) < 1e-14


def corrupt_g(pair, values):
    return StreamPair(pair.grid, pair.linear_f, pair.linear_g, pair.periodic_f, pair.periodic_g + values)


def test_verify_detects_corruption():
    grid = GridSpec.cube(16)
    v = shear_field(grid)
    pair = extract_streams(v)
    _, _, Z = grid.full_mesh()
    assert verify_representation(corrupt_g(pair, 0.1 * np.sin(2 * np.pi * Z)), v) >= 0.05


def test_corruption_along_f_level_sets_is_a_gauge():
    # f depends on y alone here, so adding a function of y to g is the
    # unimodular map (f, g) -> (f, g + phi(f)) and leaves v unchanged
    grid = GridSpec.cube(16)
    v = VectorField3.constant(grid, (1.0, 0.0, 0.0))
    pair = extract_streams(v)
    _, Y, _ = grid.full_mesh()
    assert verify_representation(corrupt_g(pair, 0.1 * np.sin(2 * np.pi * Y)), v) < 1e-12


# -- gauge maps -----------------------------------------------------------------


def test_gauge_identity(rng):
    grid = GridSpec.cube(12)
    pair = perturbed_pair(grid, rng)
    out = gauge_transform(pair, GaugeMap.identity())
    assert np.array_equal(out.f_values(), pair.f_values())
    assert np.array_equal(out.g_values(), pair.g_values())


def test_gauge_linear_shear_preserves_velocity(rng):
    grid = GridSpec.cube(16)
    pair = perturbed_pair(grid, rng, amp=0.05)
    out = gauge_transform(pair, shear_map())
    assert np.allclose(out.linear_f, pair.linear_f + pair.linear_g)
    assert np.max(np.abs(velocity(out).values - velocity(pair).values)) < 1e-12


def test_gauge_nonlinear_map_preserves_velocity_to_grid_order():
    errs = []
    for n in (16, 32):
        grid = GridSpec(1.0, 1.0, 1.0, n, 16, 16)
        pair = gentle_pair(grid, 3)
        out = gauge_transform(pair, wave_map())
        errs.append(np.max(np.abs(velocity(out).values - velocity(pair).values)))
    assert errs[1] < 1e-2
    assert errs[0] / errs[1] > 3.0


def test_gauge_rejects_non_unimodular(base_pair):
    with pytest.raises(GaugeError):
        gauge_transform(base_pair, GaugeMap(np.diag([2.0, 1.0])))


def test_gauge_rejects_asymmetric_modes():
    with pytest.raises(GaugeError):
        GaugeMap(np.eye(2), {(1, 0): (0.1, 0.0)})


def test_gauge_det_error_of_wave_map():
    assert wave_map(0.3).det_error() < 1e-14


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 0.1))
def test_gauge_inverse_roundtrip(f, g, amp):
    phi = GaugeMap(np.array([[1.0, 0.5], [0.0, 1.0]]), wave_map(amp).modes)
    u, w = phi(f, g)
    fi, gi = phi.inverse(u, w)
    assert abs(fi - f) < 1e-12 and abs(gi - g) < 1e-12


def transport_case(rng):
    grid = GridSpec.cube(12)
    pair = perturbed_pair(grid, rng, amp=0.02)
    H = BernoulliSpec.from_modes([(1, 0, 0.01), (0, 1, 0.02j)], c1=0.1, c2=-0.05)
    return pair, H


def test_bernoulli_transport_composition(rng):
    pair, H = transport_case(rng)
    phi = GaugeMap(np.array([[1.0, 1.0], [0.0, 1.0]]), wave_map(0.05).modes)
    out = gauge_transform(pair, phi)
    before = H.value(pair.f_values(), pair.g_values())
    after = TransportedBernoulli(H, phi).value(out.f_values(), out.g_values())
    assert np.max(np.abs(after - before)) < 1e-12


def test_bernoulli_transport_preserves_pressure(rng):
    pair, H = transport_case(rng)
    phi = shear_map()
    st0 = FlowState.from_pair(pair, H)
    st1 = FlowState.from_pair(gauge_transform(pair, phi), TransportedBernoulli(H, phi))
    assert np.max(np.abs(pressure(st1).values - pressure(st0).values)) < 1e-12


def test_gauge_keeps_solved_state_solved(beltrami_solution):
    pair, _ = beltrami_solution
    H = BernoulliSpec()
    before = np.max(np.abs(euler_residual(FlowState.from_pair(pair, H)).values[:, 1:-1]))
    out = gauge_transform(pair, shear_map())
    after = np.max(np.abs(euler_residual(FlowState.from_pair(out, TransportedBernoulli(H, shear_map()))).values[:, 1:-1]))
    assert after < 10 * before + 1e-12
