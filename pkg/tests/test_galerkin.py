import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import chebyshev as npcheb
from systems import random_model

from piegalerkin import chebyshev as cb
from piegalerkin.errors import InputError
from piegalerkin.galerkin import (
    Layout,
    assemble,
    assemble_b,
    discrete_energy_form,
    initial_coefficients,
    recover_primary_coeffs,
    sparsity_pattern,
    split_primary,
    stencil_coefficients,
)
from piegalerkin.harness.examples import build_example
from piegalerkin.pi_operator import pi_apply
from piegalerkin.pie_conversion import PdeModel, convert, reconstruct_primary


def gauss_chebyshev_projection(op, layout, nq=64):
    """Galerkin matrix of ``op`` from weighted inner products on Gauss-Chebyshev nodes."""
    theta = (np.arange(nq) + 0.5) * np.pi / nq
    x = np.cos(theta)
    w = np.full(nq, np.pi / nq)
    out = np.zeros((layout.Nd, layout.Nd))
    for i in range(len(layout.p)):
        for k in range(int(layout.sizes[i])):
            u = [np.zeros(1) for _ in layout.p]
            u[i] = np.eye(k + 1)[k]
            img = pi_apply(op, u)
            col = layout.offsets[i] + k
            for m, c in enumerate(img):
                vals = cb.cheb_eval(c, x)
                for n in range(int(layout.sizes[m])):
                    Tn = np.cos(n * theta)
                    norm = np.pi if n == 0 else np.pi / 2
                    out[layout.offsets[m] + n, col] = np.sum(w * vals * Tn) / norm
    return out


@pytest.mark.parametrize("seed", range(5))
def test_matrices_match_weighted_projection(seed):
    model = random_model(np.random.default_rng(seed))
    sys = convert(model)
    gs = assemble(sys, 7)
    np.testing.assert_allclose(gs.M, gauss_chebyshev_projection(sys.T_op, gs.layout), atol=1e-12)
    np.testing.assert_allclose(gs.A, gauss_chebyshev_projection(sys.A_op, gs.layout), atol=1e-11)


def test_heat_matrices():
    gs = assemble(convert(build_example("heat_dn").model), 10)
    assert gs.Nd == 9
    np.testing.assert_allclose(gs.A, 0.5 * np.eye(9), atol=1e-15)
    mask = sparsity_pattern(gs.layout)
    assert np.all(gs.M[~mask] == 0.0)
    for n in range(2, 9):
        for col, val in stencil_coefficients(2, n).items():
            if col < 9:
                assert gs.M[n, col] == pytest.approx(val, rel=1e-14)


def test_first_order_stencil():
    gs = assemble(convert(build_example("transport", variant="sine").model), 10)
    for n in range(2, gs.Nd):
        for col, val in stencil_coefficients(1, n).items():
            if col < gs.Nd:
                assert gs.M[n, col] == pytest.approx(val, rel=1e-14)


def test_stencil_values():
    assert stencil_coefficients(1, 3) == {2: 1 / 6, 4: -1 / 6}
    assert stencil_coefficients(2, 2) == {0: 0.25, 2: -1 / 6, 4: 1 / 24}
    assert stencil_coefficients(2, 5) == {3: 1 / 80, 5: -1 / 48, 7: 1 / 120}
    with pytest.raises(InputError):
        stencil_coefficients(3, 4)


def test_layout_sizes_and_round_trip():
    lay = Layout(8, np.array([0, 1, 2]))
    assert lay.sizes.tolist() == [9, 8, 7] and lay.Nd == 24
    v = np.arange(24.0)
    np.testing.assert_array_equal(lay.pack(lay.unpack(v)), v)
    packed = lay.pack([np.ones(20), np.ones(2), np.ones(7)])
    assert packed[:9].sum() == 9 and packed[9:17].sum() == 2
    with pytest.raises(InputError):
        lay.pack([np.ones(2)])
    with pytest.raises(InputError):
        lay.unpack(np.ones(5))


@pytest.mark.parametrize("N", [1, 2.5, -3])
def test_assemble_rejects_bad_order(N):
    with pytest.raises(InputError):
        assemble(convert(build_example("heat_dn").model), N)


def test_forcing_vector():
    gs = assemble(convert(build_example("heat_dn").model), 8)
    t = 0.05
    ref = sum(al * float(sig(t)) for al, sig in gs.b_terms)
    np.testing.assert_allclose(assemble_b(gs, t), ref)
    with pytest.raises(InputError):
        assemble_b(gs, -1.0)


@given(st.integers(0, 2**32 - 1), st.integers(3, 10))
@settings(max_examples=25, deadline=None)
def test_primary_recovery_matches_exact_reconstruction(seed, N):
    rng = np.random.default_rng(seed)
    model = random_model(rng)
    sys = convert(model)
    gs = assemble(sys, N)
    a = rng.standard_normal(gs.Nd)
    h = rng.standard_normal(model.nb)
    exact = reconstruct_primary(sys, gs.layout.unpack(a), h)
    got = split_primary(gs, recover_primary_coeffs(gs, a, h))
    for e, g in zip(exact, got):
        np.testing.assert_allclose(cb.pad(e, N + 1)[: N + 1], g, atol=1e-12)
        assert np.all(np.abs(e[N + 1 :]) < 1e-12)


def test_recovery_is_batched():
    gs = assemble(convert(build_example("heat_dn").model), 8)
    a = np.random.default_rng(0).standard_normal((3, gs.Nd))
    h = np.ones((3, 2))
    batched = recover_primary_coeffs(gs, a, h)
    np.testing.assert_allclose(batched[1], recover_primary_coeffs(gs, a[1], h[1]))
    with pytest.raises(InputError):
        recover_primary_coeffs(gs, np.ones(3), h[0])


@pytest.mark.parametrize("mode", ["galerkin", "interpolate"])
def test_initial_coefficients_reproduce_the_initial_state(mode):
    ex = build_example("heat_dn")
    gs = assemble(convert(ex.model), 20)
    a0 = initial_coefficients(gs, mode)
    u = split_primary(gs, recover_primary_coeffs(gs, a0, gs.h_values(0.0)))[0]
    x = np.linspace(-1, 1, 21)
    np.testing.assert_allclose(npcheb.chebval(x, u), ex.exact(x, 0.0)[0], atol=1e-9)


def test_initial_coefficient_mode_checked():
    gs = assemble(convert(build_example("heat_dn").model), 8)
    with pytest.raises(InputError):
        initial_coefficients(gs, "bogus")


def _energy_bound(gs):
    """Largest value of the energy form on the unit sphere (symmetric part eigenvalue)."""
    w = np.concatenate([cb.cheb_inner_product_weights(int(n) - 1) for n in gs.layout.sizes])
    S = gs.A.T @ (w[:, None] * gs.M)
    return float(np.linalg.eigvalsh(0.5 * (S + S.T)).max())


@given(st.integers(4, 24), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_dirichlet_diffusion_energy_form_is_non_positive(N, seed):
    model = PdeModel(0, 0, 1, A2=[[0.5]], B=[[1, 0, 0, 0], [0, 1, 0, 0]])
    gs = assemble(convert(model), N)
    a = np.random.default_rng(seed).standard_normal(gs.Nd)
    assert discrete_energy_form(gs, a) <= 1e-10 * np.dot(a, a)
    assert _energy_bound(gs) <= 1e-10


def test_energy_form_equals_weighted_continuous_form(rng):
    """``(R A u, R T u)_N = nu (uf, T uf)_w`` for constant-coefficient diffusion."""
    sys = convert(build_example("heat_dn").model)
    gs = assemble(sys, 12)
    a = rng.standard_normal(gs.Nd)
    u = pi_apply(sys.T_op, gs.layout.unpack(a))[0]
    nq = 200
    theta = (np.arange(nq) + 0.5) * np.pi / nq
    x = np.cos(theta)
    ref = 0.5 * np.pi / nq * np.sum(cb.cheb_eval(a, x) * cb.cheb_eval(u, x))
    assert discrete_energy_form(gs, a) == pytest.approx(ref, rel=1e-12)


def test_dirichlet_neumann_energy_form_is_indefinite():
    """With the Chebyshev weight the Dirichlet-Neumann form is positive on some smooth states."""
    gs = assemble(convert(build_example("heat_dn").model), 16)
    assert _energy_bound(gs) > 0.01
    a = np.random.default_rng(3).standard_normal((100, gs.Nd))
    assert max(discrete_energy_form(gs, v) for v in a) < 0


def test_energy_form_checks_length():
    gs = assemble(convert(build_example("heat_dn").model), 8)
    with pytest.raises(InputError):
        discrete_energy_form(gs, np.ones(3))
