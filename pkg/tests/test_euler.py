import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tests.conftest import perturbed_pair
from twostream.euler import (
    AdmissibilityError,
    BernoulliSpec,
    DegenerateVelocityError,
    FlowState,
    ProblemData,
    bernoulli_drift,
    check_v1_nondegenerate,
    discrete_energy,
    energy,
    energy_gradient,
    euler_residual,
    lamb_vector,
    nonlinear_residual,
    pressure,
    reconstruct_vorticity,
    residual_arrays,
    simplicity_value,
    velocity,
    verification_metrics,
    vorticity_decomposition,
)
from twostream.fields import GridSpec, StreamPair, VectorField3, divergence

seeds = st.integers(0, 2**31 - 1)


def zero_data(grid, bernoulli=None):
    return ProblemData.from_arrays(grid, bernoulli=bernoulli)


# -- Bernoulli function ----------------------------------------------------------


def test_bernoulli_values_and_derivatives():
    b = BernoulliSpec.from_modes([(1, 0, 0.3 + 0.1j), (0, 2, 0.05)], c1=0.5, c2=-0.25)
    rng = np.random.default_rng(0)
    f, g = rng.uniform(-2, 2, (2, 50))
    h = 1e-6
    Hf, Hg = b.first(f, g)
    assert np.allclose(Hf, (b.value(f + h, g) - b.value(f - h, g)) / (2 * h), atol=1e-8)
    assert np.allclose(Hg, (b.value(f, g + h) - b.value(f, g - h)) / (2 * h), atol=1e-8)
    Hff, Hfg, Hgg = b.second(f, g)
    assert np.allclose(Hff, (b.first(f + h, g)[0] - b.first(f - h, g)[0]) / (2 * h), atol=1e-7)
    assert np.allclose(Hfg, (b.first(f, g + h)[0] - b.first(f, g - h)[0]) / (2 * h), atol=1e-7)
    assert np.allclose(Hgg, (b.first(f, g + h)[1] - b.first(f, g - h)[1]) / (2 * h), atol=1e-7)


def test_bernoulli_periodic_on_lattice():
    R = np.array([[1.0, 0.3], [0.0, 1.0]])
    b = BernoulliSpec.from_modes([(1, 1, 0.2), (2, -1, 0.1j)], R=R, P1=1.5, P2=0.5)
    assert b.sample_periodicity_error() < 1e-12


def test_bernoulli_rejects_non_conjugate_coefficients():
    with pytest.raises(ValueError):
        BernoulliSpec(coeffs={(1, 0): 1.0})
    with pytest.raises(ValueError):
        BernoulliSpec(coeffs={(1, 0): 1.0, (-1, 0): 1.0j})


# -- problem data ------------------------------------------------------------------


def test_problem_rejects_vanishing_flux(small_grid):
    with pytest.raises(AdmissibilityError):
        ProblemData.from_arrays(small_grid, grad_f=(1, 0, 0), grad_g=(0, 0, 1))


def test_problem_rejects_unnormalized_base(small_grid):
    with pytest.raises(AdmissibilityError):
        ProblemData.from_arrays(small_grid, grad_f=(0, 2, 0), grad_g=(0, 0, 1))


def test_simplicity_value_examples():
    assert simplicity_value((0, 1, 0), (0, 0, 1)) == pytest.approx(2.0)
    assert simplicity_value((0, 2, 0), (0, 0, 1)) == pytest.approx(8.0)


# -- velocity -------------------------------------------------------------------------


def test_velocity_of_base_pair(base_pair):
    v = velocity(base_pair).values
    assert np.allclose(v[0], 1.0) and np.allclose(v[1:], 0.0)


def test_velocity_of_beltrami_boundary_data():
    g = GridSpec.cube(16)
    X, _, Z = g.mesh()
    f0 = np.broadcast_to(0.01 * X * np.sin(2 * np.pi * Z / g.P2), g.shape)
    pair = StreamPair(g, (0, 1, 0), (0, 0, 1), f0)
    v = velocity(pair).values
    assert np.max(np.abs(v[0] - 1.0)) < 1e-12


def test_velocity_antisymmetric(small_grid, rng):
    pair = perturbed_pair(small_grid, rng, 0.1)
    assert np.allclose(velocity(pair.swapped()).values, -velocity(pair).values)


@given(seed=seeds)
def test_streams_are_invariants(seed):
    g = GridSpec(1.0, 1.0, 1.0, 10, 8, 8)
    pair = perturbed_pair(g, np.random.default_rng(seed), 0.05)
    v = velocity(pair).values
    assert np.max(np.abs(np.sum(v * pair.grad_f(), axis=0))) < 1e-12
    assert np.max(np.abs(np.sum(v * pair.grad_g(), axis=0))) < 1e-12


def test_velocity_divergence_second_order():
    errs = []
    for n in (33, 65, 129):
        g = GridSpec(1.0, 1.0, 1.0, n, 16, 16)
        pair = perturbed_pair(g, np.random.default_rng(5), 0.1)
        errs.append(np.max(np.abs(divergence(velocity(pair)).values[2:-2])))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.7), (errs, rates)


# -- nonlinear residual ----------------------------------------------------------------


def test_residual_zero_at_base(small_grid):
    data = zero_data(small_grid)
    z = np.zeros(small_grid.shape)
    mu, nu = nonlinear_residual((z, z), data)
    assert np.all(mu.values == 0.0) and np.all(nu.values == 0.0)


def test_residual_linear_bernoulli(small_grid):
    data = zero_data(small_grid, BernoulliSpec.linear(0.3, -0.7))
    z = np.zeros(small_grid.shape)
    mu, nu = nonlinear_residual((z, z), data)
    assert np.allclose(mu.values[1:-1], 0.3, atol=1e-13)
    assert np.allclose(nu.values[1:-1], -0.7, atol=1e-13)


def test_residual_single_x_mode():
    errs = []
    for n in (17, 33, 65):
        g = GridSpec(1.0, 1.0, 1.0, n, 4, 4)
        data = zero_data(g)
        X, _, _ = g.full_mesh()
        f1 = np.sin(np.pi * X)
        mu, nu = nonlinear_residual((f1, np.zeros(g.shape)), data)
        # next to the walls the one-sided rows reduce the order; compare inside
        errs.append(np.max(np.abs(mu.values[2:-2] - np.pi**2 * f1[2:-2])))
        assert np.max(np.abs(nu.values)) < 1e-10
    assert errs[-1] < 1e-2 and errs[0] / errs[-1] > 12


def test_residual_rejects_wall_values(small_grid):
    data = zero_data(small_grid)
    f1 = np.ones(small_grid.shape)
    with pytest.raises(AdmissibilityError):
        nonlinear_residual((f1, np.zeros(small_grid.shape)), data)


def test_residual_scaling_covariance():
    # (f, g, H) -> (lam f, lam g, lam^4 H(. / lam)) multiplies the residual by lam^3
    g = GridSpec(1.0, 1.0, 1.0, 12, 8, 8)
    rng = np.random.default_rng(2)
    pair = perturbed_pair(g, rng, 0.05)
    H = BernoulliSpec.from_modes([(1, 0, 0.01), (1, 1, 0.02j)], c1=0.1, c2=0.05)
    lam = 1.1
    Hs = BernoulliSpec(lam**3 * H.c1, lam**3 * H.c2, {m: lam**4 * c for m, c in H.coeffs.items()}, lam * H.R)
    mu, nu = residual_arrays(pair, H)
    mus, nus = residual_arrays(pair.scaled(lam), Hs)
    assert np.allclose(mus, lam**3 * mu, atol=1e-12)
    assert np.allclose(nus, lam**3 * nu, atol=1e-12)


def test_energy_gradient_is_derivative_of_discrete_energy(small_grid, rng):
    pair = perturbed_pair(small_grid, rng, 0.05)
    H = BernoulliSpec.from_modes([(1, 0, 0.01)], c1=0.02)
    gf, gg = energy_gradient(pair, H)
    for _ in range(3):
        i, j, k = rng.integers(1, small_grid.Nx - 1), rng.integers(small_grid.Ny), rng.integers(small_grid.Nz)
        e = np.zeros(small_grid.shape)
        e[i, j, k] = 1.0
        h = 1e-6
        plus = discrete_energy(pair + StreamPair.periodic(small_grid, h * e, None), H)
        minus = discrete_energy(pair + StreamPair.periodic(small_grid, -h * e, None), H)
        w = small_grid.wx[i] * small_grid.hy * small_grid.hz
        assert (plus - minus) / (2 * h) == pytest.approx(w * gf[i, j, k], rel=1e-6, abs=1e-12)


def test_energy_gradient_close_to_strong_residual():
    errs = []
    for n in (17, 33):
        g = GridSpec(1.0, 1.0, 1.0, n, 8, 8)
        pair = perturbed_pair(g, np.random.default_rng(8), 0.1)
        a = energy_gradient(pair, BernoulliSpec())[0]
        b = residual_arrays(pair, BernoulliSpec())[0]
        errs.append(np.max(np.abs(a - b)[2:-2]))
    assert errs[1] < errs[0] / 3


# -- energy and pressure ---------------------------------------------------------------------


def test_energy_examples(small_grid, base_pair):
    data = zero_data(small_grid)
    assert energy(base_pair, data) == pytest.approx(0.5 * small_grid.volume)
    H = BernoulliSpec.linear(0.3, 0.2)
    data_h = zero_data(small_grid, H)
    _, Y, Z = small_grid.full_mesh()
    expected = 0.5 * small_grid.volume + small_grid.integrate(0.3 * Y + 0.2 * Z)
    assert energy(base_pair, data_h) == pytest.approx(expected)


def test_pressure_examples(small_grid, base_pair):
    p = pressure(FlowState.from_pair(base_pair, BernoulliSpec()))
    assert np.allclose(p.values, -0.5)
    p = pressure(FlowState.from_pair(base_pair, BernoulliSpec.linear(0.4, 0.0)))
    _, Y, _ = small_grid.full_mesh()
    assert np.allclose(p.values, -0.5 + 0.4 * Y)


# -- verification quantities -------------------------------------------------------------------


def test_euler_residual_constant_flow(base_pair):
    res = euler_residual(FlowState.from_pair(base_pair, BernoulliSpec()))
    assert np.max(np.abs(res.values)) < 1e-13


def test_euler_residual_shear_by_hand():
    # f = z, g = x^2 / 2 gives v = (0, x, 0): no convection, p = -x^2 / 2
    g = GridSpec(1.0, 1.0, 1.0, 9, 4, 4)
    X, _, _ = g.full_mesh()
    pair = StreamPair(g, (0, 0, 1), (0, 0, 0), None, 0.5 * X**2)
    state = FlowState.from_pair(pair, BernoulliSpec())
    assert np.allclose(state.v.values[1], X)
    res = euler_residual(state).values
    assert np.allclose(res[0], -X) and np.allclose(res[1:], 0.0, atol=1e-12)


@given(seed=seeds)
def test_bernoulli_drift_vanishes_for_linear_h(seed):
    g = GridSpec(1.0, 1.0, 1.0, 10, 8, 8)
    pair = perturbed_pair(g, np.random.default_rng(seed), 0.05)
    assert bernoulli_drift(FlowState.from_pair(pair, BernoulliSpec())) == 0.0
    assert bernoulli_drift(FlowState.from_pair(pair, BernoulliSpec.linear(0.7, -0.2))) < 1e-12


def test_vorticity_decomposition_constant_flow(base_pair):
    a, b, c = vorticity_decomposition(FlowState.from_pair(base_pair, BernoulliSpec()))
    for u in (a, b, c):
        assert np.max(np.abs(u.values)) < 1e-13


@given(seed=seeds)
def test_vorticity_reconstruction(seed):
    g = GridSpec(1.0, 1.0, 1.0, 10, 8, 8)
    pair = perturbed_pair(g, np.random.default_rng(seed), 0.05)
    state = FlowState.from_pair(pair, BernoulliSpec())
    a, b, c = vorticity_decomposition(state)
    from twostream.fields import curl_array

    W = curl_array(g, state.v.values)
    assert np.max(np.abs(reconstruct_vorticity(state, a, b, c).values - W)) < 1e-10 * max(1.0, np.max(np.abs(W)))


def test_degenerate_velocity_rejected(small_grid):
    v = VectorField3.constant(small_grid, (0.0, 1.0, 0.0))
    with pytest.raises(DegenerateVelocityError):
        check_v1_nondegenerate(v)
    pair = StreamPair.linear(small_grid, (0, 0, 0), (0, 0, 1))
    with pytest.raises(DegenerateVelocityError):
        vorticity_decomposition(FlowState.from_pair(pair, BernoulliSpec()))


def test_solved_beltrami_state(beltrami_solution):
    pair, _ = beltrami_solution
    state = FlowState.from_pair(pair, BernoulliSpec())
    m = verification_metrics(state, vbar1=1.0)
    assert m["euler_residual_relative"] < 1e-6
    assert m["lamb_vector"] < 1e-6
    assert m["vorticity"] > 1e-3
    assert m["wall_flux_error"] < 1e-8
    a, b, c = vorticity_decomposition(state)
    assert np.max(np.abs(a.values[1:-1])) > 1e-2
    assert np.max(np.abs(b.values[1:-1])) < 1e-6 and np.max(np.abs(c.values[1:-1])) < 1e-6
    p = pressure(state)
    assert np.max(np.abs(p.values + 0.5)) < 0.05
    assert np.max(np.abs(lamb_vector(state).values[:, 1:-1])) < 1e-6
