import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twostream.diagnostics import random_smooth_field
from twostream.fields import (
    GridMismatchError,
    GridSpec,
    ScalarField3,
    SmoothingParams,
    StreamPair,
    VectorField3,
    cross,
    curl,
    divergence,
    gradient,
    integrate,
    smooth,
    sobolev_norm,
    sobolev_norms,
)

seeds = st.integers(0, 2**31 - 1)


def sample(grid, fn):
    X, Y, Z = grid.full_mesh()
    return ScalarField3(grid, np.asarray(fn(X, Y, Z), dtype=float) + np.zeros(grid.shape))


# -- grid ---------------------------------------------------------------------


def test_grid_spacings(small_grid):
    g = small_grid
    assert g.hx == pytest.approx(1.0 / 11)
    assert g.hy == pytest.approx(1.0 / 8)
    assert g.volume == pytest.approx(1.0)
    assert g.x[0] == 0.0 and g.x[-1] == pytest.approx(g.L)
    assert g.y[-1] < g.P1


@pytest.mark.parametrize(
    "args",
    [(0.0, 1, 1, 8, 8, 8), (1, -1, 1, 8, 8, 8), (1, 1, 1, 3, 8, 8), (1, 1, 1, 8, 7, 8), (1, 1, 1, 8, 8, 2)],
)
def test_grid_rejects_bad_parameters(args):
    with pytest.raises(ValueError):
        GridSpec(*args)


# -- gradient -----------------------------------------------------------------


def test_gradient_of_constant_vanishes(small_grid):
    grad = gradient(sample(small_grid, lambda X, Y, Z: 3.5 + 0 * X))
    assert np.max(np.abs(grad.values)) < 1e-13


def test_gradient_of_x_is_exact(small_grid):
    grad = gradient(sample(small_grid, lambda X, Y, Z: X))
    assert np.allclose(grad.values[0], 1.0, atol=1e-12)
    assert np.max(np.abs(grad.values[1:])) < 1e-12


def test_gradient_of_trig_mode_matches_analytic():
    g = GridSpec.cube(16)
    u = sample(g, lambda X, Y, Z: np.sin(2 * np.pi * Z / g.P2))
    grad = gradient(u)
    _, _, Z = g.full_mesh()
    exact = 2 * np.pi / g.P2 * np.cos(2 * np.pi * Z / g.P2)
    assert np.max(np.abs(grad.values[2] - exact)) < 1e-10
    assert np.max(np.abs(grad.values[:2])) < 1e-10


def test_gradient_x_is_second_order():
    errs = []
    for n in (17, 33, 65):
        g = GridSpec(1.0, 1.0, 1.0, n, 4, 4)
        u = sample(g, lambda X, Y, Z: np.exp(X) * np.cos(2 * np.pi * Y))
        X, Y, _ = g.full_mesh()
        exact = np.exp(X) * np.cos(2 * np.pi * Y)
        errs.append(np.max(np.abs(gradient(u).values[0] - exact)))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.8)


def test_gradient_rejects_non_finite(small_grid):
    vals = np.zeros(small_grid.shape)
    vals[2, 1, 1] = np.nan
    with pytest.raises(ValueError):
        gradient(ScalarField3(small_grid, vals))


# -- cross, divergence, curl -----------------------------------------------------


def test_cross_basis(small_grid):
    e1 = VectorField3.constant(small_grid, (1, 0, 0))
    e2 = VectorField3.constant(small_grid, (0, 1, 0))
    assert np.allclose(cross(e1, e2).values[2], 1.0)
    assert np.max(np.abs(cross(e1, e1).values)) == 0.0


def test_cross_of_base_gradients(small_grid):
    gy = gradient(sample(small_grid, lambda X, Y, Z: Y + 0 * X))
    gz = gradient(sample(small_grid, lambda X, Y, Z: Z + 0 * X))
    # the linear field is not periodic, so use the pair's linear parts instead
    base = StreamPair.linear(small_grid, (0, 1, 0), (0, 0, 1))
    v = cross(VectorField3(small_grid, base.grad_f()), VectorField3(small_grid, base.grad_g()))
    assert np.allclose(v.values[0], 1.0) and np.allclose(v.values[1:], 0.0)
    assert gy.values.shape == gz.values.shape


def test_cross_grid_mismatch(small_grid):
    other = GridSpec.cube(8)
    with pytest.raises(GridMismatchError):
        cross(VectorField3.constant(small_grid, (1, 0, 0)), VectorField3.constant(other, (1, 0, 0)))


def test_divergence_examples(small_grid):
    assert np.max(np.abs(divergence(VectorField3.constant(small_grid, (1, 2, 3))).values)) < 1e-13
    X, _, _ = small_grid.full_mesh()
    v = np.zeros((3,) + small_grid.shape)
    v[0] = 3 * X
    assert np.allclose(divergence(VectorField3(small_grid, v)).values, 3.0)


def test_curl_examples(small_grid):
    assert np.max(np.abs(curl(VectorField3.constant(small_grid, (1, 2, 3))).values)) < 1e-13
    X, _, _ = small_grid.full_mesh()
    v = np.zeros((3,) + small_grid.shape)
    v[2] = X
    c = curl(VectorField3(small_grid, v)).values
    assert np.allclose(c[1], -1.0) and np.allclose(c[[0, 2]], 0.0)


def _div_cross_error(n, seed):
    g = GridSpec(1.0, 1.0, 1.0, n, 16, 16)
    rng = np.random.default_rng(seed)
    f = StreamPair(g, (0, 1, 0), (0, 0, 1), 0.1 * random_smooth_field(g, rng), 0.1 * random_smooth_field(g, rng))
    v = cross(VectorField3(g, f.grad_f()), VectorField3(g, f.grad_g()))
    return np.max(np.abs(divergence(v).values[2:-2]))


def test_divergence_of_cross_gradients_is_second_order():
    errs = [_div_cross_error(n, 3) for n in (17, 33, 65)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.7), (errs, rates)


def test_curl_of_gradient_vanishes():
    # the directional stencils commute, so the identity holds to round-off
    for n in (17, 33):
        g = GridSpec(1.0, 1.0, 1.0, n, 8, 8)
        phi = sample(g, lambda X, Y, Z: np.sin(2 * X) * np.cos(2 * np.pi * Y) * np.sin(2 * np.pi * Z))
        assert np.max(np.abs(curl(gradient(phi)).values)) < 1e-10


# -- integrate --------------------------------------------------------------------


def test_integrate_examples():
    g = GridSpec(2.0, 1.5, 0.5, 33, 8, 8)
    assert integrate(sample(g, lambda X, Y, Z: 1 + 0 * X)) == pytest.approx(g.L * g.P1 * g.P2)
    assert abs(integrate(sample(g, lambda X, Y, Z: np.sin(2 * np.pi * Y / g.P1) + 0 * X))) < 1e-14
    val = integrate(sample(g, lambda X, Y, Z: np.sin(np.pi * X / g.L) ** 2 + 0 * Y))
    assert val == pytest.approx(0.5 * g.L * g.P1 * g.P2, rel=1e-12)


@given(my=st.integers(-3, 3), mz=st.integers(-3, 3), phase=st.floats(0, 6.28))
def test_integrate_exact_for_trig_polynomials(my, mz, phase):
    g = GridSpec(1.0, 1.0, 2.0, 5, 8, 8)
    u = sample(g, lambda X, Y, Z: np.cos(2 * np.pi * (my * Y / g.P1 + mz * Z / g.P2) + phase) + 0 * X)
    exact = g.volume * np.cos(phase) if my == mz == 0 else 0.0
    assert integrate(u) == pytest.approx(exact, abs=1e-13)


# -- Sobolev norms ------------------------------------------------------------------


def test_sobolev_examples():
    g = GridSpec.cube(16)
    one = np.ones(g.shape)
    zero = np.zeros(g.shape)
    assert sobolev_norm((one, zero), 0, g) == pytest.approx(1.0)
    assert sobolev_norm((zero, zero), 4, g) == 0.0
    s = sample(g, lambda X, Y, Z: np.sin(2 * np.pi * Y) + 0 * X).values
    assert sobolev_norm((s, zero), 1, g) == pytest.approx(np.sqrt((1 + 4 * np.pi**2) / 2), rel=1e-12)


def test_sobolev_rejects_bad_order(small_grid):
    z = np.zeros(small_grid.shape)
    for k in (-1, 7, 1.5):
        with pytest.raises(ValueError):
            sobolev_norm((z, z), k, small_grid)


@given(seed=seeds)
def test_sobolev_monotone_in_order(seed):
    g = GridSpec(1.0, 1.0, 1.0, 10, 8, 8)
    rng = np.random.default_rng(seed)
    pair = (random_smooth_field(g, rng), random_smooth_field(g, rng))
    norms = sobolev_norms(pair, range(7), g)
    vals = [norms[k] for k in range(7)]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
    assert sobolev_norm(pair, 3, g) == pytest.approx(norms[3], rel=1e-12)


# -- smoothing -------------------------------------------------------------------------


def test_smooth_keeps_low_mode():
    g = GridSpec.cube(16)
    u = sample(g, lambda X, Y, Z: np.sin(np.pi * X) * np.cos(2 * np.pi * Y)).values
    out, _ = smooth((u, np.zeros(g.shape)), SmoothingParams(8.0), g)
    assert np.max(np.abs(out - u)) < 1e-12


def test_smooth_with_huge_theta_is_identity(small_grid, rng):
    u = random_smooth_field(small_grid, rng) + 0.1 * rng.standard_normal(small_grid.shape)
    u[0] = u[-1] = 0.0
    out, _ = smooth((u, u), SmoothingParams(1e9), small_grid)
    assert np.array_equal(out, u)


def test_smoothing_params_validation():
    with pytest.raises(ValueError):
        SmoothingParams(1.0)
    with pytest.raises(ValueError):
        SmoothingParams(4.0, "chebyshev")


@given(seed=seeds, theta=st.floats(2.0, 40.0))
def test_smooth_is_idempotent_and_contracts(seed, theta):
    g = GridSpec(1.0, 1.0, 1.0, 12, 8, 8)
    rng = np.random.default_rng(seed)
    noise = [rng.standard_normal(g.shape) for _ in range(2)]
    for u in noise:
        u[0] = u[-1] = 0.0
    p = SmoothingParams(theta)
    once = smooth(noise, p, g)
    twice = smooth(once, p, g)
    assert max(np.max(np.abs(a - b)) for a, b in zip(once, twice)) < 1e-12
    for u in once:
        assert np.all(u[[0, -1]] == 0.0)
    assert sobolev_norm(once, 0, g) <= sobolev_norm(noise, 0, g) * (1 + 1e-12)


@given(seed=seeds)
def test_smooth_contracts_h1_on_white_noise(seed):
    g = GridSpec(1.0, 1.0, 1.0, 16, 8, 8)
    rng = np.random.default_rng(seed)
    noise = [rng.standard_normal(g.shape) for _ in range(2)]
    for u in noise:
        u[0] = u[-1] = 0.0
    out = smooth(noise, SmoothingParams(8.0), g)
    for k in (0, 1, 2):
        assert sobolev_norm(out, k, g) <= sobolev_norm(noise, k, g) * (1 + 1e-12)


# -- stream pairs ----------------------------------------------------------------------


def test_stream_pair_values_and_shapes(small_grid):
    p = StreamPair.linear(small_grid, (0, 1, 0), (0, 0, 1))
    X, Y, Z = small_grid.full_mesh()
    assert np.allclose(p.f_values(), Y) and np.allclose(p.g_values(), Z)
    assert np.allclose(p.R, np.eye(2))
    with pytest.raises(GridMismatchError):
        StreamPair(small_grid, (0, 1, 0), (0, 0, 1), np.zeros((3, 3, 3)))


def test_stream_pair_addition(small_grid, rng):
    a = StreamPair(small_grid, (0, 1, 0), (0, 0, 1), random_smooth_field(small_grid, rng))
    b = StreamPair.periodic(small_grid, np.ones(small_grid.shape), None)
    s = a + b
    assert np.allclose(s.periodic_f, a.periodic_f + 1.0)
    assert np.allclose(s.linear_f, a.linear_f)
