import math

import numpy as np
import pytest

from piegalerkin.errors import InputError
from piegalerkin.harness.examples import EXAMPLE_IDS, WAVE_VARIANTS, beam_eigen, build_example, exact_solutions

CASES = (
    [("heat_dn", {}), ("heat_varvisc", {}), ("parabolic_forced", {})]
    + [("euler_bernoulli", {"mode": m}) for m in (1, 2, 4)]
    + [("transport", {"variant": v}) for v in ("gaussian", "sine")]
    + [("wave", {"variant": v}) for v in WAVE_VARIANTS]
)
IDS = [f"{e}-{'-'.join(map(str, p.values()))}" for e, p in CASES]


def physical_grid(ex, n=9):
    a, b = ex.model.domain
    return np.linspace(a, b, n)


@pytest.mark.parametrize("example, params", CASES, ids=IDS)
def test_initial_condition_satisfies_boundary_conditions(example, params):
    assert build_example(example, **params).ic_boundary_residual() < 1e-10


@pytest.mark.parametrize("example, params", CASES, ids=IDS)
def test_boundary_data_match_exact_solution(example, params):
    ex = build_example(example, **params)
    for t in (0.0, 0.03, 0.1):
        ubf = ex.model.boundary_vector(lambda x: ex.exact(np.array([x]), t)[:, 0],
                                       lambda x: ex.exact_dx(np.array([x]), t)[:, 0])
        np.testing.assert_allclose(ex.model.B @ ubf, ex.model.h_values(t), atol=1e-10)


@pytest.mark.parametrize("example, params", CASES, ids=IDS)
def test_derivative_of_exact_state(example, params):
    ex = build_example(example, **params)
    x, d = physical_grid(ex), 1e-6
    fd = (ex.exact(x + d, 0.05) - ex.exact(x - d, 0.05)) / (2 * d)
    scale = max(1.0, np.max(np.abs(fd)))
    np.testing.assert_allclose(ex.exact_dx(x, 0.05), fd, atol=1e-7 * scale)


@pytest.mark.parametrize("example, params", CASES, ids=IDS)
def test_initial_data_match_exact_solution(example, params):
    ex = build_example(example, **params)
    x = physical_grid(ex)
    got = np.array([f(x) for f in ex.model.primary_ic])
    np.testing.assert_allclose(got, ex.exact(x, 0.0), atol=1e-12)


def _time_derivative(f, x, t, d=1e-5):
    return (f(x, t + d) - f(x, t - d)) / (2 * d)


def _second_x(f, x, t, d=1e-4):
    return (f(x + d, t) - 2 * f(x, t) + f(x - d, t)) / d**2


def test_heat_exact_solution_solves_the_equation():
    ex = build_example("heat_dn", nu=0.5)
    x = np.linspace(-0.9, 0.9, 7)
    u = lambda x, t: ex.exact(x, t)[0]  # noqa: E731
    np.testing.assert_allclose(_time_derivative(u, x, 0.05), 0.5 * _second_x(u, x, 0.05), atol=1e-5)


def test_forced_exact_solution_solves_the_equation():
    ex = build_example("parabolic_forced")
    x = np.linspace(1.3, 2.4, 5)
    t = 0.05
    u = lambda x, t: ex.exact(x, t)[0]  # noqa: E731
    ux = ex.exact_dx(x, t)[0]
    f = sum(term.profile(x)[0] * term.signal(t) for term in ex.model.forcing)
    rhs = 4 * u(x, t) + 2 * ux + 0.5 * _second_x(u, x, t) + f
    np.testing.assert_allclose(_time_derivative(u, x, t), rhs, atol=1e-5)


def test_beam_exact_solution_solves_the_equation():
    ex = build_example("euler_bernoulli", mode=2, c=2.0, L=2.0)
    x = np.linspace(0.2, 1.8, 5)
    t = 0.04
    v1 = lambda x, t: ex.exact(x, t)[0]  # noqa: E731
    v2 = lambda x, t: ex.exact(x, t)[1]  # noqa: E731
    # v1_t = -c (v2)_xx and v2_t = (v1)_xx
    np.testing.assert_allclose(_time_derivative(v1, x, t), -2.0 * _second_x(v2, x, t), rtol=1e-4)
    np.testing.assert_allclose(_time_derivative(v2, x, t), _second_x(v1, x, t), rtol=1e-4, atol=1e-6)


@pytest.mark.parametrize("variant", WAVE_VARIANTS)
def test_wave_states_are_consistent(variant):
    ex = build_example("wave", variant=variant, c=4.0)
    x = np.linspace(-0.8, 0.8, 5)
    t = 0.07
    d = 1e-5
    u_t = (ex.exact_u(x, t + d) - ex.exact_u(x, t - d)) / (2 * d)
    u_x = (ex.exact_u(x + d, t) - ex.exact_u(x - d, t)) / (2 * d)
    np.testing.assert_allclose(ex.exact(x, t), [u_t, u_x], atol=1e-6)


def test_exact_solution_point_values():
    assert exact_solutions("heat_varvisc")(1.0, 0.1) == pytest.approx(-1.2)
    split = build_example("wave", variant="split")
    x = np.linspace(-1, 1, 7)
    sigma = 0.2
    gauss = np.exp(-0.5 * (x / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
    np.testing.assert_allclose(split.exact_u(x, 0.0), gauss)
    c, mu, t = 4.0, 0.0, 0.1
    peak = exact_solutions("transport", {"c": c, "mu": mu})(c * t + mu, t)
    assert peak == pytest.approx(1 / (sigma * math.sqrt(2 * math.pi)))


def test_beam_eigenvalues():
    first = beam_eigen(1, 1.0)
    assert first["betaL"] == pytest.approx(1.8751040687, abs=1e-9)
    assert first["residual"] < 1e-12
    z = beam_eigen(10, 1.0)["betaL"]
    assert abs(z - 19 * math.pi / 2) < 1e-4
    e = beam_eigen(2, 2.0, c=2.0)
    assert e["omega"] == pytest.approx(e["beta"] ** 2 * math.sqrt(2.0))
    for n in range(1, 15):
        r = beam_eigen(n, 2.0)
        assert abs(math.cosh(r["betaL"]) * math.cos(r["betaL"]) + 1) < 1e-12 * math.cosh(r["betaL"])


@pytest.mark.parametrize("n, L, tol", [(0, 1.0, 1e-16), (1.5, 1.0, 1e-16), (1, -1.0, 1e-16), (1, 1.0, 0.0)])
def test_beam_eigen_rejects_bad_input(n, L, tol):
    with pytest.raises(InputError):
        beam_eigen(n, L, tol)


def test_unknown_examples_and_parameters():
    assert set(EXAMPLE_IDS) == {"heat_dn", "heat_varvisc", "parabolic_forced", "euler_bernoulli", "transport", "wave"}
    with pytest.raises(InputError):
        build_example("burgers")
    with pytest.raises(InputError):
        build_example("heat_dn", viscosity=1.0)
    with pytest.raises(InputError):
        build_example("wave", variant="standing")
    with pytest.raises(InputError):
        build_example("transport", variant="square")
    with pytest.raises(InputError):
        exact_solutions("nope")
