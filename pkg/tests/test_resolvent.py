from dataclasses import replace

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from sizepop.discretization import assemble_generator, build_grid, weighted_norm
from sizepop.errors import ArgumentError
from sizepop.evolution import step_implicit_euler
from sizepop.model import Constant, ConstantKernel, Polynomial, make_model
from sizepop.resolvent import (
    DEFAULT_LAMBDAS,
    dissipativity_check,
    omega_min,
    solve_resolvent,
)
from sizepop.samples import pure_diffusion, random_model, reference_model


def _noncons():
    # c1 = 0.25 / (1 - 0.5) = 0.5, c2 = 0.25 / (0.5 + 0.25) = 1/3
    return make_model(1.0, gamma=0.5, d=0.25, bc=(1.0, 0.25, 0.0, 0.0))


def test_omega_min_conservative_symbolic():
    g0, g1, d0, mu0 = sp.symbols("gamma0 gamma0p d0 mu0", real=True)
    b0, c0 = d0 + g0, g0 - g1
    c1 = sp.simplify(d0 / (b0 - g0))
    assert c1 == 1
    assert sp.simplify(g0 / c1 - (g1 + mu0 + c0)) == -mu0
    gm, gmp, dm, mum = sp.symbols("gammam gammamp dm mum", real=True)
    bm, cm = dm - gm, -gm - gmp
    c2 = sp.simplify(dm / (gm + bm))
    assert c2 == 1
    assert sp.simplify(-gm / c2 - (gmp + mum + cm)) == -mum


def test_omega_min_examples():
    assert omega_min(reference_model()) == 0.0
    assert omega_min(_noncons()) == 1.0
    assert omega_min(make_model(1.0, mu=50.0, gamma=Polynomial([0.5, -0.5]), d=0.2)) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_omega_min_zero_for_conservative(seed):
    assert omega_min(random_model(np.random.default_rng(seed), conservative=True)) == 0.0


def _tilde(model, N):
    return assemble_generator(model, build_grid(model.m, N), recruitment=False)


def test_solve_resolvent_trivial():
    G = _tilde(reference_model(), 10)
    np.testing.assert_array_equal(solve_resolvent(G, 1.0, 0.0, np.zeros(11)), 0.0)
    G = _tilde(pure_diffusion(d=0.3), 10)
    for lam, om in [(0.01, 0.0), (1.0, 1.0), (100.0, 2.5)]:
        np.testing.assert_allclose(solve_resolvent(G, lam, om, np.ones(11)), 1 / (1 + lam * om), rtol=1e-13)


def test_solve_resolvent_n2_dense():
    G = _tilde(pure_diffusion(), 2)
    A = np.array([[-2.0, 2.0, 0.0], [4.0, -8.0, 4.0], [0.0, 2.0, -2.0]])
    expected = np.linalg.solve(np.eye(3) - (A - np.eye(3)), [1.0, 0.0, 0.0])
    np.testing.assert_allclose(solve_resolvent(G, 1.0, 1.0, [1.0, 0.0, 0.0]), expected, rtol=1e-14)
    # (2I - A) u = e0 by back substitution: u1 = u0/2, u2 = u1/2, 3 u0 = 1
    np.testing.assert_allclose(expected, [4 / 12, 2 / 12, 1 / 12], rtol=1e-14)


def test_solve_resolvent_errors():
    with pytest.raises(ArgumentError):
        solve_resolvent(_tilde(reference_model(), 4), 0.0, 0.0, np.ones(5))
    G_full = assemble_generator(reference_model(), build_grid(1.0, 4))
    with pytest.raises(ArgumentError):
        solve_resolvent(G_full, 1.0, 0.0, np.ones(5))


def test_matrix_right_hand_side():
    G = _tilde(reference_model(), 12)
    H = np.random.default_rng(0).normal(size=(13, 4))
    U = solve_resolvent(G, 0.7, 0.2, H)
    for k in range(4):
        np.testing.assert_allclose(U[:, k], solve_resolvent(G, 0.7, 0.2, H[:, k]), rtol=1e-13)


def test_reference_dissipativity_report():
    rep = dissipativity_check(reference_model(), build_grid(1.0, 64), (0.1, 1.0, 10.0), 0.0, 100, seed=5)
    assert rep.max_ratio <= 1 + 1e-10
    assert rep.positivity_violations == 0
    assert rep.passed() and not rep.below_omega_min
    assert rep.seed == 5 and rep.samples == 100 and rep.omega_min == 0.0


def test_pure_diffusion_ratio_half():
    G = _tilde(pure_diffusion(), 16)
    u = solve_resolvent(G, 1.0, 1.0, np.ones(17))
    assert weighted_norm(u, G) / weighted_norm(np.ones(17), G) == pytest.approx(0.5, rel=1e-14)


def test_below_omega_min_is_flagged():
    model = _noncons()
    grid = build_grid(1.0, 32)
    rep = dissipativity_check(model, grid, DEFAULT_LAMBDAS, omega_min(model) - 0.5, 20)
    assert rep.below_omega_min
    # mass injected at the left compartment outgrows the shift for small lambda
    G = _tilde(model, 32)
    h = np.zeros(33)
    h[0] = 1.0
    u = solve_resolvent(G, 0.01, 0.5, h)
    assert weighted_norm(u, G) > weighted_norm(h, G)


def test_nonconservative_at_omega_min():
    rep = dissipativity_check(_noncons(), build_grid(1.0, 64), DEFAULT_LAMBDAS, None, 100)
    assert rep.omega == 1.0
    assert rep.passed()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans(), st.integers(2, 80))
def test_dissipativity_random_models(seed, conservative, N):
    model = random_model(np.random.default_rng(seed), conservative=conservative)
    rep = dissipativity_check(model, build_grid(model.m, N), DEFAULT_LAMBDAS, None, 20, seed)
    assert rep.max_ratio <= 1 + 1e-10
    assert rep.positivity_violations == 0


@pytest.mark.parametrize("dt", [1e-3, 0.1, 5.0])
def test_agrees_with_implicit_euler(dt):
    model = replace(reference_model(), beta=ConstantKernel(0.0))
    G = _tilde(model, 24)
    h = np.random.default_rng(1).uniform(-1, 1, 25)
    np.testing.assert_allclose(solve_resolvent(G, dt, 0.0, h), step_implicit_euler(G, h, dt),
                               rtol=1e-12, atol=1e-12)


def test_dissipativity_argument_errors():
    with pytest.raises(ArgumentError):
        dissipativity_check(reference_model(), build_grid(1.0, 4), n_samples=0)


def test_mortality_shift():
    # constant mortality mu shifts the recruitment-free generator by -mu
    base = _tilde(pure_diffusion(), 8)
    shifted = _tilde(replace(pure_diffusion(), mu=Constant(0.4)), 8)
    h = np.linspace(0, 1, 9)
    np.testing.assert_allclose(solve_resolvent(shifted, 2.0, 0.0, h), solve_resolvent(base, 2.0, 0.4, h),
                               rtol=1e-13)
