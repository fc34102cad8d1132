"""Peng-Robinson thermodynamics: oracles, identities, and sign structure."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from difflow import eos

import oracles

R = eos.GAS_CONSTANT


@pytest.fixture(scope="module")
def nc4():
    return eos.n_butane()


@pytest.fixture(scope="module")
def pr(nc4):
    return eos.PengRobinson(nc4)


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def central_diff(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)


# frozen from tests/oracles.py (mpmath, 50 digits)
F_BULK_5000_345 = 28509090.739920797
F_IDEAL_5000_345 = 55087639.44192693
F_REP_5000_345 = 6443583.1167910063
F_ATTR_5000_345 = -33022131.818797139
THETA_B_NL_345 = -131758045.84814824
MU_B_5000_345 = 4826.9566582978232
S_B_5000_345 = -203232.31595566583
GRAD_345_1E18 = (0.10399979966602782, 6.1155459631335127e-5,
                 0.082901166093217202, 0.000129051277826372)

N_G = 358.2996
N_L = 9058.3724


def valid_points(pr_obj, count, seed=0):
    rng = np.random.default_rng(seed)
    n = rng.uniform(0.02, 0.95, count) / pr_obj.coeffs.b
    T = rng.uniform(250.0, 500.0, count)
    return n, T


class TestCoefficients:
    def test_nc4_values(self, pr):
        co = pr.coeffs
        w = 0.199
        assert rel(co.m, 0.37464 + 1.54226 * w - 0.26992 * w**2) < 1e-14
        assert rel(co.m, 0.67086063808) < 1e-9
        assert rel(co.b, 0.07780 * R * 425.2 / 38.0e5) < 1e-14
        assert rel(co.b, 7.23808103954e-5) < 1e-9
        assert rel(co.beta1, -6.63850039463e-17) < 1e-9
        assert rel(co.beta2, 8.25246604317e-17) < 1e-9
        assert co.b > 0 and co.beta1 < 0 < co.beta2 and co.m > 0

    def test_high_acentric_branch(self):
        sub = eos.Substance(
            molar_weight=0.1, T_crit=500.0, P_crit=30e5, acentric=0.6,
            cp_coeffs=(30.0, 0.0, 0.0, 0.0), theta0=0.0)
        co = eos.derive_coefficients(sub)
        w = 0.6
        expect = 0.379642 + 1.485030 * w - 0.164423 * w**2 + 0.016666 * w**3
        assert rel(co.m, expect) < 1e-14

    def test_rejects_bad_critical_constants(self):
        with pytest.raises(ValueError):
            eos.Substance(molar_weight=0.1, T_crit=-1.0, P_crit=30e5,
                          acentric=0.2, cp_coeffs=(30, 0, 0, 0), theta0=0.0)
        with pytest.raises(ValueError):
            eos.Substance(molar_weight=0.1, T_crit=400.0, P_crit=0.0,
                          acentric=0.2, cp_coeffs=(30, 0, 0, 0), theta0=0.0)

    def test_rejects_nonpositive_psi_v(self):
        with pytest.raises(ValueError, match="psi_v"):
            eos.Substance(molar_weight=0.1, T_crit=400.0, P_crit=30e5,
                          acentric=0.2, cp_coeffs=(1.0, 0, 0, 0), theta0=0.0)


class TestEnergyParam:
    def test_value_at_tc(self, pr):
        a, _, _ = pr.energy_param(425.2)
        assert rel(a, 0.45724 * R**2 * 425.2**2 / 38.0e5) < 1e-14
        assert rel(a, 1.50388802529) < 1e-9

    def test_signs(self, pr):
        _, a1, a2 = pr.energy_param(345.0)
        assert a1 < 0 and a2 > 0

    def test_a2_nonnegative_everywhere(self, pr):
        for T in np.linspace(5.0, 5000.0, 200):
            assert pr.energy_param(T)[2] >= 0.0

    def test_derivatives_vs_finite_difference(self, pr):
        for T in np.linspace(100.0, 600.0, 23):
            a, a1, a2 = pr.energy_param(T)
            fd1 = central_diff(lambda x: pr.energy_param(x)[0], T, 1e-3)
            fd2 = central_diff(lambda x: pr.energy_param(x)[1], T, 1e-3)
            assert rel(a1, fd1) < 1e-6
            assert rel(a2, fd2) < 1e-6

    def test_rejects_nonpositive_temperature(self, pr):
        with pytest.raises(eos.ThermoDomainError):
            pr.energy_param(0.0)


class TestHeatCapacity:
    def test_reference_value(self, pr):
        psi_p, _ = pr.ideal_heat_capacity(298.15)
        assert rel(psi_p, 98.3399107014) < 1e-10

    def test_relation_exact(self, pr):
        T = np.linspace(210.0, 590.0, 50)
        psi_p, psi_v = pr.ideal_heat_capacity(T)
        assert np.all(psi_v == psi_p - R)
        assert np.max(np.abs((psi_p - psi_v) - R)) < 1e-13 * R
        assert np.all(psi_v > 0.0)

    def test_rejects_nonpositive_temperature(self, pr):
        with pytest.raises(eos.ThermoDomainError):
            pr.ideal_heat_capacity(-10.0)


class TestFreeEnergy:
    def test_small_density_limits(self, pr):
        n = 1e-4 / pr.coeffs.b
        _, f_rep, f_attr, _ = pr.f_bulk(n, 345.0)
        scale = n * R * 345.0
        assert abs(f_rep) < 1e-3 * scale
        assert abs(f_attr) < 1.0 * scale

    def test_reference_temperature_reduction(self, pr):
        # At T = T0 the heat-capacity integral and (T - T0) terms vanish.
        n, T0 = 5000.0, pr.substance.T0
        f_ideal = pr.f_bulk(n, T0)[0]
        expect = n * pr.substance.theta0 - n * R * T0 * np.log(
            pr.substance.P0 / (n * R * T0))
        assert rel(f_ideal, expect) < 1e-13

    def test_against_frozen_oracle(self, pr):
        f_ideal, f_rep, f_attr, f_b = pr.f_bulk(5000.0, 345.0)
        assert rel(f_ideal, F_IDEAL_5000_345) < 1e-10
        assert rel(f_rep, F_REP_5000_345) < 1e-10
        assert rel(f_attr, F_ATTR_5000_345) < 1e-10
        assert rel(f_b, F_BULK_5000_345) < 1e-10

    def test_against_live_oracle(self, pr):
        live = float(oracles.f_bulk(5000, 345)[3])
        assert rel(pr.f_bulk(5000.0, 345.0)[3], live) < 1e-10

    def test_rejects_out_of_domain_density(self, pr):
        with pytest.raises(eos.ThermoDomainError):
            pr.f_bulk(1.0 / pr.coeffs.b, 345.0)
        with pytest.raises(eos.ThermoDomainError):
            pr.f_bulk(-5.0, 345.0)
        with pytest.raises(eos.ThermoDomainError):
            pr.f_bulk(0.0, 345.0)


class TestChemicalPotential:
    def test_frozen_oracle(self, pr):
        mu_b = pr.mu_bulk(5000.0, 345.0)[0]
        assert rel(mu_b, MU_B_5000_345) < 1e-10

    def test_finite_difference(self, pr):
        n, T = valid_points(pr, 200, seed=1)
        for ni, Ti in zip(n, T):
            mu_b = pr.mu_bulk(ni, Ti)[0]
            fd = central_diff(lambda x: pr.f_bulk(x, Ti)[3], ni, ni * 1e-6)
            assert rel(mu_b, fd) < 1e-6

    def test_split_additivity(self, pr):
        n, T = valid_points(pr, 500, seed=2)
        mu_b, mu_cx, mu_cc, _ = pr.mu_bulk(n, T)
        assert np.max(np.abs(mu_cx + mu_cc - mu_b) / np.abs(mu_b)) < 1e-12

    def test_convexity_sweep(self, pr):
        n = np.linspace(0.01, 0.95, 50) / pr.coeffs.b
        T = np.linspace(250.0, 500.0, 50)
        nn, TT = np.meshgrid(n, T)
        dmu = pr.mu_bulk(nn, TT)[3]
        assert np.all(dmu > 0.0)

    def test_dmu_convex_matches_fd(self, pr):
        n, T = valid_points(pr, 100, seed=3)
        for ni, Ti in zip(n, T):
            d = pr.mu_bulk(ni, Ti)[3]
            fd = central_diff(lambda x: pr.mu_bulk(x, Ti)[1], ni, ni * 1e-6)
            assert rel(d, fd) < 1e-6


class TestEntropyGamma:
    def test_frozen_oracle(self, pr):
        _, s_b = pr.gamma_s_bulk(5000.0, 345.0)
        assert rel(s_b, S_B_5000_345) < 1e-10

    def test_gamma_is_dfdT(self, pr):
        n, T = valid_points(pr, 200, seed=4)
        for ni, Ti in zip(n, T):
            gamma_b, _ = pr.gamma_s_bulk(ni, Ti)
            fd = central_diff(lambda x: pr.f_bulk(ni, x)[3], Ti, Ti * 1e-6)
            assert rel(gamma_b, fd) < 1e-6

    def test_s_plus_gamma_zero(self, pr):
        n, T = valid_points(pr, 500, seed=5)
        gamma_b, s_b = pr.gamma_s_bulk(n, T)
        assert np.all(s_b + gamma_b == 0.0)

    def test_f_concave_in_T(self, pr):
        n = np.linspace(0.01, 0.95, 50) / pr.coeffs.b
        T = np.linspace(250.0, 500.0, 50)
        h = 1e-3
        for ni in n:
            f0 = pr.f_bulk(ni, T)[3]
            fp = pr.f_bulk(ni, T + h)[3]
            fm = pr.f_bulk(ni, T - h)[3]
            second = (fp - 2 * f0 + fm) / h**2
            assert np.all(second <= 1e-7 * np.abs(f0))


class TestInternalEnergy:
    def test_thermodynamic_identity(self, pr):
        n, T = valid_points(pr, 500, seed=6)
        theta = pr.internal_energy_bulk(n, T)
        _, _, _, f_b = pr.f_bulk(n, T)
        _, s_b = pr.gamma_s_bulk(n, T)
        assert np.max(np.abs(theta - (f_b + T * s_b)) / np.abs(theta)) < 1e-10

    def test_reference_temperature_reduction(self, pr):
        n, T0 = 5000.0, pr.substance.T0
        a, a1, _ = pr.energy_param(T0)
        b = pr.coeffs.b
        bn = b * n
        log_attr = np.log((1 + (1 - np.sqrt(2)) * bn) / (1 + (1 + np.sqrt(2)) * bn))
        expect = n * pr.substance.theta0 + n * (a - T0 * a1) / (2 * np.sqrt(2) * b) * log_attr
        assert rel(pr.internal_energy_bulk(n, T0), expect) < 1e-13

    def test_frozen_oracle(self, pr):
        theta = pr.internal_energy_bulk(9058.3724, 345.0)
        assert rel(theta, THETA_B_NL_345) < 1e-10


class TestPressure:
    def test_ideal_gas_limit(self, pr):
        n = 1e-6 / pr.coeffs.b
        p = pr.p_bulk(n, 345.0)
        assert rel(p, n * R * 345.0) < 1e-4

    def test_coexistence_pair_near_equal(self, pr):
        p_g = pr.p_bulk(N_G, 345.0)
        p_l = pr.p_bulk(N_L, 345.0)
        assert abs(p_g - p_l) / abs(p_g) < 0.01

    def test_matches_direct_formula(self, pr):
        n, T = valid_points(pr, 500, seed=7)
        p1 = pr.p_bulk(n, T)
        p2 = pr.p_bulk_direct(n, T)
        assert np.max(np.abs(p1 - p2) / np.abs(p2)) < 1e-8


class TestInfluenceParam:
    def test_value_at_tc(self, pr):
        c, _, _ = pr.influence_param(425.2)
        a, _, _ = pr.energy_param(425.2)
        assert rel(c, a * pr.coeffs.b ** (2 / 3) * pr.coeffs.beta2) < 1e-13

    def test_derivatives_vs_finite_difference(self, pr):
        for T in np.linspace(100.0, 600.0, 23):
            c, c1, c2 = pr.influence_param(T)
            fd1 = central_diff(lambda x: pr.influence_param(x)[0], T, T * 1e-6)
            assert rel(c1, fd1) < 1e-6
            fd2 = central_diff(lambda x: pr.influence_param(x)[1], T, T * 1e-6)
            assert rel(c2, fd2) < 1e-6

    def test_c2_nonpositive_over_paper_range(self, pr):
        for T in np.linspace(0.1 * 425.2, 3 * 425.2, 100):
            assert pr.influence_param(T)[2] <= 0.0


class TestConcavityCondition:
    def test_paper_range(self, pr):
        assert pr.concavity_condition(345.0)
        assert pr.concavity_condition(0.1 * 425.2)
        for T in np.linspace(0.1 * 425.2, 3 * 425.2, 100):
            assert pr.concavity_condition(T)

    def test_sign_matches_c2(self, pr):
        co = pr.coeffs
        Tc = pr.substance.T_crit
        for T in np.linspace(50.0, 5 * Tc, 400):
            Tr = T / Tc
            bracket = 1.0 + co.m * (1.0 - np.sqrt(Tr))
            value = (1 + co.m) * (co.beta1 * (1 - Tr) + co.beta2) \
                + 4 * co.beta1 * Tr * bracket
            c2 = pr.influence_param(T)[2]
            assert pr.concavity_condition(T) == (value <= 0.0)
            if abs(value) > 1e-20:
                assert np.sign(c2) == np.sign(value)


class TestGradContributions:
    def test_zero_gradient(self, pr):
        out = eos.grad_contributions(pr.influence_param(345.0), 0.0, 345.0)
        assert all(v == 0.0 for v in out)

    def test_entropy_identity(self, pr):
        f_g, gamma_g, theta_g, _ = eos.grad_contributions(
            pr.influence_param(345.0), 1e18, 345.0)
        # theta_grad = f_grad + T * s_grad with s_grad = -gamma_grad
        assert theta_g - (f_g + 345.0 * (-gamma_g)) == 0.0

    def test_frozen_oracle(self, pr):
        out = eos.grad_contributions(pr.influence_param(345.0), 1e18, 345.0)
        for got, want in zip(out, GRAD_345_1E18):
            assert rel(got, want) < 1e-10


class TestVolumetricHeatCapacity:
    def test_ideal_limit(self, pr):
        n = 1e-6 / pr.coeffs.b
        cv = pr.volumetric_heat_capacity(n, 345.0, 0.0)
        _, psi_v = pr.ideal_heat_capacity(345.0)
        assert rel(cv, n * psi_v) < 1e-4

    def test_finite_difference(self, pr):
        n, T = valid_points(pr, 100, seed=8)
        g2 = 1e18
        for ni, Ti in zip(n, T):
            cv = pr.volumetric_heat_capacity(ni, Ti, g2)

            def theta_total(x):
                theta_b = pr.internal_energy_bulk(ni, x)
                return theta_b + eos.grad_contributions(
                    pr.influence_param(x), g2, x)[2]

            fd = central_diff(theta_total, Ti, Ti * 1e-6)
            assert rel(cv, fd) < 1e-6

    def test_positive_on_sweep(self, pr):
        n = np.linspace(0.01, 0.95, 50) / pr.coeffs.b
        T = np.linspace(250.0, 500.0, 50)
        nn, TT = np.meshgrid(n, T)
        cv = pr.volumetric_heat_capacity(nn, TT, 1e18)
        assert np.all(cv > 0.0)


class TestSplitProperties:
    @settings(max_examples=200, deadline=None)
    @given(x=st.floats(min_value=0.01, max_value=0.95),
           T=st.floats(min_value=250.0, max_value=500.0))
    def test_splitting_and_identities(self, x, T):
        pr = _PR_SHARED
        n = x / pr.coeffs.b
        f_i, f_r, f_a, f_b = pr.f_bulk(n, T)
        assert rel(f_i + f_r + f_a, f_b) < 1e-12
        mu_b, mu_cx, mu_cc, dmu = pr.mu_bulk(n, T)
        assert rel(mu_cx + mu_cc, mu_b) < 1e-12
        assert dmu > 0.0
        gamma_b, s_b = pr.gamma_s_bulk(n, T)
        assert s_b + gamma_b == 0.0
        theta = pr.internal_energy_bulk(n, T)
        assert abs(theta - (f_b + T * s_b)) <= 1e-10 * abs(theta)
        p = pr.p_bulk(n, T)
        assert abs(p - (n * mu_b - f_b)) <= 1e-8 * max(abs(p), 1.0)

    def test_attraction_concave_in_n(self, pr):
        n = np.linspace(0.02, 0.93, 50) / pr.coeffs.b
        T = np.linspace(250.0, 500.0, 50)
        for Ti in T:
            h = n * 1e-5
            f0 = pr.f_bulk(n, Ti)[2]
            fp = pr.f_bulk(n + h, Ti)[2]
            fm = pr.f_bulk(n - h, Ti)[2]
            second = (fp - 2 * f0 + fm) / h**2
            assert np.all(second <= 1e-10)

    def test_convex_part_convex_in_n(self, pr):
        n = np.linspace(0.02, 0.93, 50) / pr.coeffs.b
        T = np.linspace(250.0, 500.0, 50)
        for Ti in T:
            h = n * 1e-5
            conv = lambda x: pr.f_bulk(x, Ti)[0] + pr.f_bulk(x, Ti)[1]
            second = (conv(n + h) - 2 * conv(n) + conv(n - h)) / h**2
            assert np.all(second >= -1e-10)


_PR_SHARED = eos.PengRobinson(eos.n_butane())
