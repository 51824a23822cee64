import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from robin_ssn.mesh import build_unit_cube_mesh
from robin_ssn.objective import (
    evaluate,
    gradient_representative,
    hessvec,
    inner_w,
    objective_value,
    projection_residual,
    reduced_objective,
    second_derivative_form,
)
from robin_ssn.pde import discretize
from robin_ssn.problems import ProblemSpec, paper_example

ZERO = lambda x, y: np.zeros_like(y)  # noqa: E731


@pytest.fixture(scope="module")
def paper4():
    return discretize(paper_example(), build_unit_cube_mesh(4))


def test_tichonov_only_value(mesh2):
    spec = ProblemSpec(a_eval=lambda x, y: y, da_eval=lambda x, y: np.ones_like(y), d2a_eval=ZERO,
                       L_eval=ZERO, dL_eval=ZERO, d2L_eval=ZERO, nu=0.03, alpha=0.0, beta=2.0)
    disc = discretize(spec, mesh2)
    u = np.ones(mesh2.n_boundary)
    y = np.zeros(mesh2.n_vertices)
    assert objective_value(disc, u, y) == pytest.approx(3 * 0.03, rel=1e-14)


def test_tracking_vanishes_on_target(paper2):
    u = np.zeros(paper2.mesh.n_boundary)
    assert objective_value(paper2, u, paper2.target.copy()) == 0.0


def test_initial_value_n16():
    disc = discretize(paper_example(), build_unit_cube_mesh(16))
    J0 = reduced_objective(disc, np.zeros(disc.mesh.n_boundary))
    assert abs(J0 - 4.7607853276096295) / 4.7607853276096295 < 0.01


def test_gradient_trivial_cases(paper2):
    rng = np.random.default_rng(0)
    nb = paper2.mesh.n_boundary
    u, y, phi = rng.uniform(0, 1, nb), rng.standard_normal(nb), rng.standard_normal(nb)
    p = paper2.problem
    np.testing.assert_allclose(gradient_representative(p, y * phi / p.nu, y, phi), 0.0, atol=1e-15)
    np.testing.assert_array_equal(gradient_representative(p, u, y, np.zeros(nb)), p.nu * u)


def test_gradient_taylor(paper4):
    rng = np.random.default_rng(1)
    nb = paper4.mesh.n_boundary
    u = rng.uniform(0.2, 0.8, nb)
    v = rng.uniform(-1, 1, nb)
    pt = evaluate(paper4, u)
    d = gradient_representative(paper4.problem, u, pt.y_b, pt.phi_b)
    J = objective_value(paper4, u, pt.y)
    dv = inner_w(paper4, d, v)
    rem = np.array([abs(reduced_objective(paper4, u + t * v, pt.y) - J - t * dv) for t in (1e-2, 5e-3, 2.5e-3, 1.25e-3)])
    ratios = rem[:-1] / rem[1:]
    assert np.all((ratios > 3.5) & (ratios < 4.5)), ratios
    # |rem| / t^2 bounded over four decades
    quot = [abs(reduced_objective(paper4, u + t * v, pt.y) - J - t * dv) / t**2 for t in (1e-2, 1e-3, 1e-4)]
    assert max(quot) < 2 * min(quot) + 1e-8


def _triples(disc, k, seed):
    rng = np.random.default_rng(seed)
    nb = disc.mesh.n_boundary
    for _ in range(k):
        yield rng.uniform(0.2, 1.5, nb), rng.standard_normal(nb), rng.standard_normal(nb)


@pytest.mark.parametrize("which", ["manuf", "paper3"])
def test_two_hessian_representations_agree(which, manuf2):
    disc = manuf2 if which == "manuf" else discretize(paper_example(), build_unit_cube_mesh(3))
    for u, v1, v2 in _triples(disc, 20, 2):
        pt = evaluate(disc, u)
        a = inner_w(disc, hessvec(pt, v1), v2)
        b = second_derivative_form(pt, v1, v2)
        assert abs(a - b) <= 1e-10 * abs(b)


def test_hessvec_symmetric_linear_and_trivial(manuf2):
    for u, v1, v2 in _triples(manuf2, 5, 3):
        pt = evaluate(manuf2, u)
        h1, h2 = hessvec(pt, v1), hessvec(pt, v2)
        a, b = inner_w(manuf2, h1, v2), inner_w(manuf2, h2, v1)
        assert abs(a - b) <= 1e-10 * abs(a)
        h = hessvec(pt, 2.0 * v1 - 3.0 * v2)
        np.testing.assert_allclose(h, 2.0 * h1 - 3.0 * h2, rtol=0, atol=1e-12 * np.abs(h).max())
        assert np.all(hessvec(pt, 0 * v1) == 0)
        assert second_derivative_form(pt, 0 * v1, v2) == 0


def test_second_form_matches_central_difference(manuf2):
    rng = np.random.default_rng(4)
    nb = manuf2.mesh.n_boundary
    u = rng.uniform(0.5, 1.5, nb)
    v = rng.uniform(-1, 1, nb)
    pt = evaluate(manuf2, u)
    J = objective_value(manuf2, u, pt.y)
    exact = second_derivative_form(pt, v, v)
    errs = []
    for t in (2e-2, 1e-2, 5e-3):
        fd = (reduced_objective(manuf2, u + t * v, pt.y) - 2 * J + reduced_objective(manuf2, u - t * v, pt.y)) / t**2
        errs.append(abs(fd - exact))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.0) & (ratios < 5.0)), ratios  # O(t^2)


def test_second_order_taylor_remainder(manuf2):
    rng = np.random.default_rng(5)
    nb = manuf2.mesh.n_boundary
    u = rng.uniform(0.5, 1.5, nb)
    v = rng.uniform(-1, 1, nb)
    pt = evaluate(manuf2, u)
    J = objective_value(manuf2, u, pt.y)
    d = gradient_representative(manuf2.problem, u, pt.y_b, pt.phi_b)
    dv, hvv = inner_w(manuf2, d, v), inner_w(manuf2, hessvec(pt, v), v)
    ts = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3])
    rem = np.array([abs(reduced_objective(manuf2, u + t * v, pt.y) - J - t * dv - 0.5 * t * t * hvv) for t in ts])
    orders = np.log(rem[:-1] / rem[1:]) / np.log(2.0)
    assert np.all(np.abs(orders - 3.0) < 0.2), orders


def test_projection_fixed_point_and_upper_bound(paper2):
    p = paper2.problem
    rng = np.random.default_rng(6)
    nb = paper2.mesh.n_boundary
    y, phi = rng.standard_normal(nb), rng.standard_normal(nb)
    u = np.clip(y * phi / p.nu, p.alpha, p.beta)
    assert np.all(projection_residual(p, u, y, phi) == 0)
    y = np.full(nb, 1.0)
    phi = np.full(nb, 2 * p.nu * p.beta)
    assert np.all(projection_residual(p, np.full(nb, p.beta), y, phi) == 0)


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(arrays(float, 26, elements=finite), arrays(float, 26, elements=finite), arrays(float, 26, elements=finite))
def test_projection_matches_scalar_clamp(u, y, phi):
    p = paper_example()
    F = projection_residual(p, u, y, phi)
    for i in range(len(u)):
        s = y[i] * phi[i] / p.nu
        ref = u[i] - (p.alpha if s < p.alpha else p.beta if s > p.beta else s)
        assert F[i] == ref
