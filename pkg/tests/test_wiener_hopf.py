import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import sojourn as sj
from sojourn._ratfun import alternant_sum
from sojourn.errors import NearMultipleRoots

from conftest import random_model


def test_bm_roots(bm_exponent):
    rs = sj.solve_roots(bm_exponent, 2.0)
    assert np.allclose(rs.betas, [2.0]) and np.allclose(rs.gammas, [2.0])


def test_drifted_bm_roots(drifted_bm_model):
    e = sj.build_exponent(drifted_bm_model)
    rs = sj.solve_roots(e, 2.0)  # s^2 + s - 2 = (s - 1)(s + 2)
    assert np.allclose(rs.betas, [1.0]) and np.allclose(rs.gammas, [2.0])


def test_kou_roots_interlace(kou_exponent):
    rs = sj.solve_roots(kou_exponent, 1.0)
    assert rs.m_up == 2 and rs.n_down == 2
    assert 0 < rs.betas[0].real < 10.0 < rs.betas[1].real
    assert 0 < rs.gammas[0].real < 5.0 < rs.gammas[1].real
    assert np.max(np.abs(kou_exponent(rs.betas) - 1.0)) <= 1e-10 * 2
    assert np.max(np.abs(kou_exponent(-rs.gammas) - 1.0)) <= 1e-10 * 2


@pytest.mark.parametrize("q", [0.1, 1.0, 10.0])
def test_root_counts_random_models(q):
    rng = np.random.default_rng(42)
    for _ in range(100):
        model = random_model(rng)
        e = sj.build_exponent(model)
        rs = sj.solve_roots(e, q)
        assert rs.m_up == model.total_multiplicity_up + 1
        assert rs.n_down == model.total_multiplicity_down + 1
        # leading root real, strictly smallest real part
        assert rs.betas[0].imag == 0.0 and rs.betas[0].real > 0
        if rs.m_up > 1:
            assert rs.betas[0].real < np.min(rs.betas[1:].real) + 1e-12
        assert rs.gammas[0].imag == 0.0
        if rs.n_down > 1:
            assert rs.gammas[0].real < np.min(rs.gammas[1:].real) + 1e-12
        resid = np.abs(e(rs.betas) - rs.q)
        assert np.max(resid) <= 1e-10 * (1.0 + rs.q)


def test_near_multiple_roots_strict_vs_perturb(bm_exponent, monkeypatch):
    import sojourn.wiener_hopf as wh

    calls = []
    original = wh._solve_once

    def flaky(exponent, q):
        calls.append(q)
        if len(calls) == 1:
            raise NearMultipleRoots("synthetic")
        return original(exponent, q)

    monkeypatch.setattr(wh, "_solve_once", flaky)
    rs = sj.solve_roots(bm_exponent, 1.0)
    assert rs.q == pytest.approx(1.0 + 1e-6 * 2.0)
    calls.clear()
    with pytest.raises(NearMultipleRoots):
        sj.solve_roots(bm_exponent, 1.0, strict=True)


def test_factor_coefficients_bm(bm_exponent):
    f = sj.solve_factors(bm_exponent, 2.0)
    assert np.allclose(f.C, [2.0])
    s = np.linspace(0.0, 5, 11)
    assert np.allclose([f.psi_plus(x) for x in s], 2.0 / (s + 2.0))


def test_factor_normalization_and_masses(erlang_exponent):
    f = sj.solve_factors(erlang_exponent, 1.3)
    assert abs(np.sum(f.C / f.roots.betas) - 1.0) < 1e-12
    assert abs(np.sum(f.D / f.roots.gammas) - 1.0) < 1e-12
    assert abs(f.sup_density.total_mass() - 1.0) < 1e-10
    assert abs(f.inf_density.total_mass() - 1.0) < 1e-10


def test_partial_fraction_equals_product_form(kou_exponent, erlang_exponent):
    for e in (kou_exponent, erlang_exponent):
        f = sj.solve_factors(e, 0.8)
        s = np.linspace(0.05, 8.0, 9)
        pf = np.array([f.psi_plus(x) for x in s])
        pr = np.array([f.psi_plus_product(x) for x in s])
        assert np.max(np.abs(pf - pr)) <= 1e-10 * np.max(np.abs(pr))
        pf = np.array([f.psi_minus(x) for x in s])
        pr = np.array([f.psi_minus_product(x) for x in s])
        assert np.max(np.abs(pf - pr)) <= 1e-10 * np.max(np.abs(pr))


@pytest.mark.parametrize("q", [0.1, 1.0, 10.0])
def test_wh_product_identity_kou(kou_exponent, q):
    f = sj.solve_factors(kou_exponent, q)
    phi = np.linspace(-50, 50, 101)
    assert np.max(sj.wh_product_residual(f, phi)) <= 1e-9 * q


def test_first_passage_up_brownian(bm_exponent):
    f = sj.solve_factors(bm_exponent, 1.0)
    for x in (0.0, 0.3, 1.7):
        atom, overshoot = sj.first_passage_up(f, x)
        assert abs(atom - math.exp(-math.sqrt(2.0) * x)) < 1e-12
        assert overshoot.terms == ()


def test_first_passage_mass_at_zero(kou_exponent, erlang_exponent):
    for e in (kou_exponent, erlang_exponent):
        f = sj.solve_factors(e, 1.0)
        atom, overshoot = sj.first_passage_up(f, 0.0)
        assert abs(atom + overshoot.total_mass() - 1.0) < 1e-10
        atom, undershoot = sj.first_passage_down(f, 0.0)
        assert abs(atom + undershoot.total_mass() - 1.0) < 1e-10


def test_first_passage_mass_decreasing(kou_exponent):
    f = sj.solve_factors(kou_exponent, 1.0)
    masses = []
    for x in (0.0, 0.2, 0.5, 1.0, 2.0):
        atom, overshoot = sj.first_passage_up(f, x)
        m = atom + overshoot.total_mass()
        assert -1e-12 <= m <= 1.0 + 1e-12
        masses.append(m)
    assert all(np.diff(masses) < 0)


def test_kou_overshoot_is_exponential(kou_exponent):
    # single-rate upward jumps: overshoot conditional on a jump crossing is
    # memoryless with the jump rate
    f = sj.solve_factors(kou_exponent, 1.0)
    _, overshoot = sj.first_passage_up(f, 0.5)
    assert len(overshoot.terms) == 1
    a, rho, k = overshoot.terms[0]
    assert k == 0 and abs(rho - 10.0) < 1e-12
    mass = overshoot.total_mass()
    ys = np.linspace(0.05, 1.0, 7)
    assert np.allclose(overshoot(ys) / mass, 10.0 * np.exp(-10.0 * ys), rtol=1e-10)


def test_first_passage_duality(kou_exponent):
    dual = sj.build_exponent(sj.dual_model(kou_exponent.model))
    f = sj.solve_factors(kou_exponent, 1.0)
    fd = sj.solve_factors(dual, 1.0)
    for x in (-0.4, -1.1):
        a1, d1 = sj.first_passage_down(f, x)
        a2, d2 = sj.first_passage_up(fd, -x)
        assert abs(a1 - a2) < 1e-12
        u = np.linspace(0.01, 2.0, 9)
        assert np.allclose(d1(u), d2(u), atol=1e-12)


def test_passage_transform_identity(erlang_exponent):
    # atom + ladder transform must reproduce the generating ratio
    f = sj.solve_factors(erlang_exponent, 0.7)
    x = 0.6
    atom, overshoot = sj.first_passage_up(f, x)
    betas, C = f.roots.betas, f.C
    for s in (0.4, 1.3, 5.0):
        rhs = np.sum(C * np.exp(-betas * x) / (s + betas)) / f.psi_plus(s)
        lhs = atom + overshoot.laplace(s)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 8), st.integers(0, 6), st.integers(0, 10**6))
def test_alternant_identity(n, m, seed):
    # vanishing alternant sums underlie the partial-fraction reductions
    if m >= n - 1:
        m = n - 2
    rng = np.random.default_rng(seed)
    nodes = rng.uniform(-3, 3, n) + 1j * rng.uniform(-1, 1, n)
    while np.min(np.abs(nodes[:, None] - nodes[None, :]) + np.eye(n)) < 1e-3:
        nodes = rng.uniform(-3, 3, n) + 1j * rng.uniform(-1, 1, n)
    shifts = rng.uniform(-3, 3, m)
    val = alternant_sum(nodes, shifts)
    scale = max(1.0, float(np.max(np.abs(nodes))) ** max(m, 1))
    assert abs(val) <= 1e-9 * scale
