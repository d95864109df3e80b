import math

import numpy as np
import pytest
from scipy.integrate import quad

import sojourn as sj
from sojourn.occupation import convolution_density_below

from conftest import random_model


def occupation_configs(rng, count):
    """Random (model, q, p, b, y) blocks spanning the supported weight range."""
    out = []
    while len(out) < count:
        model = random_model(rng)
        q = float(rng.uniform(0.3, 3.0))
        p = [-0.4 * q, 0.5, 2.0][len(out) % 3]
        b = float(rng.uniform(-1.0, 1.0))
        y = b + float(rng.uniform(0.0, 1.5))
        out.append((model, q, p, b, y))
    return out


def test_hq_identity_brownian(bm_exponent):
    f = sj.solve_factors(bm_exponent, 1.7)
    H, Q, _ = sj.hq_coefficients(f)
    assert np.allclose(H, [0.5]) and np.allclose(Q, [-0.5])
    assert abs(np.sum(H) - np.sum(Q) - 1.0) < 1e-14


@pytest.mark.parametrize("seed", range(8))
def test_hq_mass_identity_random(seed):
    rng = np.random.default_rng(7000 + seed)
    model = random_model(rng)
    f = sj.solve_factors(sj.build_exponent(model), float(rng.uniform(0.2, 4.0)))
    H, Q, _ = sj.hq_coefficients(f)
    assert abs(np.sum(H) - np.sum(Q) - 1.0) < 1e-9


def test_hq_quadrature_oracle(kou_exponent):
    # recompute the tail coefficients by integrating the supremum tail
    # against the infimum law: H_k carries exp(beta_k (x - y)) for x <= y
    f = sj.solve_factors(kou_exponent, 1.0)
    H, _, _ = sj.hq_coefficients(f)
    betas, gammas = f.roots.betas, f.roots.gammas
    C, D = f.C, f.D

    def tail_via_quadrature(x, y):
        def integrand(z):
            sup_tail = np.sum(C / betas * np.exp(-betas * (y - x - z))).real
            inf_density = np.sum(D * np.exp(gammas * z)).real
            return sup_tail * inf_density

        val, _ = quad(integrand, -40.0, 0.0, limit=200)
        return val

    for x, y in [(-0.2, 0.4), (0.0, 0.8), (0.3, 0.5)]:
        direct = float(np.real(np.sum(H * np.exp(betas * (x - y)))))
        oracle = tail_via_quadrature(x, y)
        assert abs(direct - oracle) <= 1e-6 * abs(oracle)


def test_residue_expansion_brownian_example(bm_exponent):
    sol = sj.solve_occupation(bm_exponent, 0.0, 0.0, 1.5, 0.5)
    assert np.allclose(sol.U, [1.0 / 3.0])
    assert np.allclose(sol.P, [-1.0 / 6.0])
    # level match: U_1 = H_1 + P_1 at b = y
    assert abs(sol.U[0] - sol.H[0] - sol.P[0]) < 1e-14


def test_residue_expansion_p_zero_recovers_tail(kou_exponent):
    sol = sj.solve_occupation(kou_exponent, -0.3, 0.4, 0.0, 1.0)
    f = sol.factors_q
    assert np.allclose(sol.P, 0.0)
    for x in (-1.0, -0.3, 0.1, 0.4, 1.2):
        assert abs(sj.v_q(x, sol) - sj.killed_tail(f, x, 0.4)) < 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_matching_constraints_random(seed):
    rng = np.random.default_rng(31000 + seed)
    for model, q, p, b, y in occupation_configs(rng, 3):
        sol = sj.solve_occupation(sj.build_exponent(model), b, y, p, q)
        value_fit, slope_fit, mass_fit = sol.continuity_residuals()
        assert value_fit <= 1e-9
        assert slope_fit <= 1e-9
        assert mass_fit <= 1e-9


def test_weighted_tail_bounds(kou_exponent):
    xs = np.linspace(-3.0, 3.0, 100)
    # p >= 0: values in [0, 1]
    for p in (0.0, 0.5, 2.0):
        sol = sj.solve_occupation(kou_exponent, 0.0, 0.3, p, 1.0)
        vals = sj.v_q(xs, sol)
        assert np.all(vals >= -1e-12) and np.all(vals <= 1.0 + 1e-12)
    # -q < p < 0: bounded by q/(p+q)
    sol = sj.solve_occupation(kou_exponent, 0.0, 0.3, -0.4, 1.0)
    vals = sj.v_q(xs, sol)
    assert np.all(vals <= 1.0 / 0.6 + 1e-12)


def test_weighted_tail_branch_continuity(kou_exponent):
    sol = sj.solve_occupation(kou_exponent, 0.0, 0.3, 0.5, 1.0)
    # evaluate each closed-form branch exactly at the joins
    eps = 1e-5
    for point in (0.0, 0.3):
        jump = sj.v_q(point + eps, sol) + sj.v_q(point - eps, sol) - 2 * sj.v_q(point, sol)
        assert abs(jump) <= 1e-6
    # limits: -> 0 far below (p > 0 branch), -> 1 far above
    assert sj.v_q(-40.0, sol) == pytest.approx(0.0, abs=1e-12)
    assert sj.v_q(40.0, sol) == pytest.approx(1.0, abs=1e-12)


def test_f_kernel_brownian(bm_exponent):
    fq = sj.solve_factors(bm_exponent, 0.5)
    fxi = sj.solve_factors(bm_exponent, 2.0)
    ker = sj.f_kernel(fq, fxi, "F1")
    assert ker.atom_mass == pytest.approx(0.5, abs=1e-14)
    xs = np.linspace(0.01, 4, 9)
    assert np.allclose(ker.density(xs), 0.5 * np.exp(-xs), atol=1e-13)
    # the underlying bounded function: F(x) = -exp(-x)/2
    assert ker.shifted_cdf(1.0) == pytest.approx(-0.5 * math.exp(-1.0), abs=1e-14)


def test_f_kernel_identity_at_p_zero(kou_exponent):
    fq = sj.solve_factors(kou_exponent, 1.0)
    ker = sj.f_kernel(fq, fq, "F1")
    assert ker.atom_mass == 1.0 and ker.density.terms == ()


@pytest.mark.parametrize("tag", ["F1", "F2", "F1hat", "F2hat"])
def test_f_kernel_transform_identity(kou_exponent, erlang_exponent, tag):
    for e in (kou_exponent, erlang_exponent):
        fq = sj.solve_factors(e, 1.0)
        fxi = sj.solve_factors(e, 1.5)
        ker = sj.f_kernel(fq, fxi, tag)
        ratio = {
            "F1": lambda s: fq.psi_plus(s) / fxi.psi_plus(s),
            "F1hat": lambda s: fxi.psi_plus(s) / fq.psi_plus(s),
            "F2": lambda s: fq.psi_minus(s) / fxi.psi_minus(s),
            "F2hat": lambda s: fxi.psi_minus(s) / fq.psi_minus(s),
        }[tag]
        for s in (0.5, 1.0, 5.0):
            lhs = ker.transform(s)
            rhs = ratio(s)
            assert abs(lhs - rhs) <= 1e-10 * abs(rhs)
        # signed total mass is one
        assert abs(ker.atom_mass + ker.density.total_mass() - 1.0) < 1e-10


def test_f_kernel_atom_in_unit_interval(kou_exponent):
    # positive-weight orientation: atom in (0, 1], function bounded in [-1, 0]
    fq = sj.solve_factors(kou_exponent, 1.0)
    fxi = sj.solve_factors(kou_exponent, 2.2)
    for tag in ("F1", "F2"):
        ker = sj.f_kernel(fq, fxi, tag)
        assert 0.0 < ker.atom_mass <= 1.0
        xs = np.linspace(0.0, 6.0, 25)
        fvals = np.array([ker.shifted_cdf(x) for x in xs])
        assert np.all(fvals <= 1e-12) and np.all(fvals >= -1.0 - 1e-12)


def test_kq_density_brownian(bm_exponent):
    fq = sj.solve_factors(bm_exponent, 0.5)
    kq = sj.kq_density(fq, fq)
    for u in (-1.3, -0.2, 0.4, 2.0):
        assert kq.density(u) == pytest.approx(0.5 * math.exp(-abs(u)), abs=1e-14)


def test_kq_mass_and_transform(kou_exponent, erlang_exponent):
    for e in (kou_exponent, erlang_exponent):
        fq = sj.solve_factors(e, 1.0)
        fxi = sj.solve_factors(e, 1.5)
        kq = sj.kq_density(fq, fxi)
        assert abs(kq.total_mass() - 1.0) <= 1e-10
        for phi in np.linspace(-20, 20, 9):
            lhs = kq.char_function(phi)
            rhs = fxi.psi_plus(-1j * phi) * fq.psi_minus(1j * phi)
            assert abs(lhs - rhs) <= 1e-10


def test_killed_marginal_is_factorized_law(kou_exponent):
    # equal rates: the sum law is the killed process itself
    fq = sj.solve_factors(kou_exponent, 1.0)
    kq = sj.kq_density(fq, fq)
    for phi in (0.5, 3.0, 17.0):
        lhs = kq.char_function(phi)
        rhs = 1.0 / (1.0 - kou_exponent(1j * phi))
        assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_joint_density_p_to_zero_limit(kou_exponent):
    ker = sj.occupation_kernels(kou_exponent, 1e-8, 1.0)
    fq = sj.solve_factors(kou_exponent, 1.0)
    for x, y in [(0.0, 0.4), (0.2, -0.3), (-0.5, 0.0)]:
        lhs = ker.density_below(x, 0.0, y)
        rhs = sj.marginal_density(fq, y - x)
        assert abs(lhs - rhs) <= 1e-5 * abs(rhs)


def test_joint_density_brownian_arcsine_mass(bm_exponent):
    # x = b = 0, q = 1, p = 3: total weighted mass is sqrt(q/(p+q)) = 1/2
    ker = sj.occupation_kernels(bm_exponent, 3.0, 1.0)
    val, _ = quad(lambda y: ker.density_below(0.0, 0.0, y), -60.0, 40.0,
                  limit=400, points=[0.0])
    assert abs(val - 0.5) <= 1e-8
    assert abs(sj.occupation_lt(bm_exponent, 0.0, 0.0, 3.0, 1.0) - 0.5) <= 1e-8


def test_joint_density_nonnegative_and_continuous_at_b(kou_exponent):
    ker = sj.occupation_kernels(kou_exponent, 0.5, 1.0)
    for x in (-0.5, 0.0, 0.7):
        ys = np.linspace(-3, 3, 61)
        vals = [ker.density_below(x, 0.0, y) for y in ys]
        assert min(vals) >= -1e-12
        gap = abs(ker.density_below(x, 0.0, 1e-11) - ker.density_below(x, 0.0, -1e-11))
        assert gap <= 1e-9


def test_joint_density_rejects_nonpositive_p(kou_exponent):
    with pytest.raises(ValueError):
        sj.joint_density(kou_exponent, 0.0, 0.0, 0.3, 0.0, 1.0)
    with pytest.raises(ValueError):
        sj.occupation_kernels(kou_exponent, -0.2, 1.0)


def test_side_duality(kou_exponent):
    # above-weighting on the model equals below-weighting on the reflection
    dual = sj.build_exponent(sj.dual_model(kou_exponent.model))
    ker_dual = sj.occupation_kernels(dual, 0.5, 1.0)
    for x, b, y in [(0.1, -0.2, 0.6), (0.0, 0.0, -0.4), (-0.3, 0.2, 0.2)]:
        above = sj.joint_density(kou_exponent, x, b, y, 0.5, 1.0, side="above")
        below_reflected = ker_dual.density_below(-x, -b, -y)
        assert abs(above - below_reflected) <= 1e-10 * max(1.0, abs(above))


def test_occupation_lt_limits_and_monotonicity(kou_exponent):
    p, q = 0.5, 1.0
    xs = np.linspace(-6, 6, 31)
    vals = [sj.occupation_lt(kou_exponent, x, 0.0, p, q) for x in xs]
    assert all(np.diff(vals) > -1e-13)
    assert vals[0] == pytest.approx(q / (p + q), abs=1e-3)
    assert vals[-1] == pytest.approx(1.0, abs=1e-3)
    assert all(q / (p + q) < v < 1.0 for v in vals)


def test_occupation_lt_matches_density_integral(kou_exponent):
    ker = sj.occupation_kernels(kou_exponent, 0.5, 1.0)
    for x in (-0.4, 0.0, 0.6):
        val, _ = quad(lambda y: ker.density_below(x, 0.0, y), -60.0, 60.0,
                      limit=400, points=[0.0, x])
        closed = ker.occupation_transform(x, 0.0)
        assert abs(val - closed) <= 1e-9


def theorem_correction_quadrature(ker, b, y, x):
    """Independent evaluation of the correction term: the kernel's bounded
    function integrated against the sum-law density."""
    f1 = ker.f1

    def integrand(z):
        return f1.shifted_cdf(b - x - z + y - b) * ker.kq.density(z)

    lim = b - x
    val, _ = quad(integrand, lim - 50.0, lim, limit=300, points=[0.0] if lim > 0 else None)
    return val


@pytest.mark.parametrize("config", [
    (1.0, 0.5, 0.0, 0.3),
    (0.7, 2.0, -0.2, 0.5),
])
def test_theorem_equivalence_kou(kou_exponent, config):
    q, p, b, y = config
    ker = sj.occupation_kernels(kou_exponent, p, q)
    sol = sj.solve_occupation(kou_exponent, b, y, p, q)
    for x in np.linspace(b - 1.5, y + 1.5, 8):
        lhs = sj.v_q(x, sol) - sj.killed_tail(sol.factors_q, x, y)
        rhs = theorem_correction_quadrature(ker, b, y, x)
        assert abs(lhs - rhs) <= 1e-6


def test_kernel_convolution_reproduces_killed_marginal(kou_exponent):
    # convolving the correction kernel against the sum law recovers the
    # killed marginal minus the atom part, as densities on a grid
    p, q = 0.5, 1.0
    ker = sj.occupation_kernels(kou_exponent, p, q)
    fq = sj.solve_factors(kou_exponent, q)
    for u in np.linspace(-2.0, 2.0, 9):
        conv = ker.kq.segment_convolve(ker.f1.density, u, math.inf)
        marg = sj.marginal_density(fq, u)
        assert abs(conv - (marg - ker.f1.atom_mass * ker.kq.density(u))) <= 1e-8


def test_occupation_solution_vs_mc_light(kou_exponent, kou_model):
    import sojourn.mc as mc

    sol = sj.solve_occupation(kou_exponent, 0.0, 0.3, 0.5, 1.0)
    cfg = mc.SimConfig(n_paths=60_000, dt=5e-3, seed=2718, horizon_q=1.0)
    for x in (-0.5, 0.2):
        est = mc.simulate_functional(kou_model, x, 0.0, 0.3, 0.5, cfg)
        want = sj.v_q(x, sol)
        assert abs(est.mean - want) <= 4.0 * est.stderr
