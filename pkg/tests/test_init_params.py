"""Conditioning algebra: covariance matrix, weight solves, stationarity."""

import math

import numpy as np
import pytest

from glassdyn.errors import ConfigError, DomainError, NoRootError, SingularMatrixError
from glassdyn.init_params import (
    InitCondition, check_stationary, fdt_regime_residual, gamma_star,
    gibbs_init, pure_p_localized, sigma_nu, solve_w, v_eval,
)
from glassdyn.mixture import Mixture, g_beta
from glassdyn.phase import c_inf

M23 = Mixture({2: 1.0, 3: 1.0})


class TestSigmaNu:
    def test_example_matrix(self):
        expect = np.array([[2, 0, 0, 0], [0, 2, 5, 0], [0, 5, 13, 0], [0, 0, 0, 5]],
                          dtype=float)
        np.testing.assert_allclose(sigma_nu(M23, 1.0, 0.0), expect, atol=1e-14)

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            qs = rng.uniform(0.2, 1.0)
            qo = rng.uniform(-qs, qs)
            s = sigma_nu(M23, qs, qo)
            np.testing.assert_allclose(s, s.T, atol=1e-14)

    def test_positive_definite_grid(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            m = Mixture({2: rng.uniform(0.1, 2), 3: rng.uniform(0.1, 2),
                         4: rng.uniform(0.1, 2)})
            for qs in (0.3, 0.7, 1.0):
                for qo in np.linspace(-0.95, 0.95, 21):
                    if abs(qo) > qs:
                        continue
                    eig = np.linalg.eigvalsh(sigma_nu(m, qs, qo))[0]
                    assert eig > 0.0


class TestSolveW:
    def test_block_solve_example(self):
        ic = InitCondition(1.0, 1.0, 0.7, 0.9, 0.0)
        vf = solve_w(ic, M23)
        np.testing.assert_allclose(vf.w, [0.5, 4.6, -1.7, 0.0], atol=1e-12)

    def test_defining_equation_reproduced(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            qs = rng.uniform(0.3, 1.0)
            qo = rng.uniform(-qs * 0.9, qs * 0.9)
            ic = InitCondition(qs, rng.normal(), rng.normal(), rng.normal(), qo)
            vf = solve_w(ic, M23)
            sigma = sigma_nu(M23, qs, qo)
            np.testing.assert_allclose(sigma @ vf.w, ic.V * [1, 1, 1, 0],
                                       atol=1e-10)

    def test_rs_zero_energy_gives_zero_v(self):
        vf = solve_w(InitCondition(0.0, 0.0), M23)
        assert vf.v(0.0, 0.7) == 0.0
        assert vf.vy(0.0, 0.7) == 0.0

    def test_rs_branch_formula(self):
        vf = solve_w(InitCondition(0.0, 1.3), M23)
        assert vf.v(0.0, 0.5) == pytest.approx(1.3 * M23.nu(0.5) / M23.nu(1.0))

    def test_pure_branch_forces_w3_zero(self):
        p3 = Mixture.pure(3)
        qs, Es = 0.8, -0.4
        ic = InitCondition(qs, 0.7, Es, 3 * Es / qs**2, 0.3)
        vf = solve_w(ic, p3)
        assert vf.w[2] == 0.0
        assert vf.v(ic.q_o, 1.0) == pytest.approx(ic.E, abs=1e-10)
        assert vf.v(qs**2, ic.q_o) == pytest.approx(ic.E_star, abs=1e-10)

    def test_pure_branch_rejects_inconsistent_g(self):
        p3 = Mixture.pure(3)
        with pytest.raises(ConfigError):
            solve_w(InitCondition(0.8, 0.7, -0.4, 1.0, 0.3), p3)

    def test_pure_degenerate_monomial(self):
        p3 = Mixture.pure(3)
        qs, E = 0.8, 0.5
        qo = qs
        Es = E * qo**3
        ic = InitCondition(qs, E, Es, 3 * Es / qs**2, qo)
        vf = solve_w(ic, p3)
        assert vf.v(0.3, 0.6) == pytest.approx(E * 0.6**3)

    def test_degenerate_nonpure_w4_zero(self):
        # three active powers keep the on-ray data unconstrained
        m = Mixture({2: 1.0, 3: 1.0, 4: 1.0})
        ic = InitCondition(0.6, 0.4, -0.2, 0.3, 0.6)
        vf = solve_w(ic, m)
        assert vf.w[3] == 0.0
        assert vf.v(ic.q_star**2, ic.q_o) == pytest.approx(ic.E_star, abs=1e-10)
        # on the degenerate band the start point sits on the axis ray, so the
        # radial identity couples both partial derivatives
        qs2 = ic.q_star**2
        combined = (vf.vx(qs2, ic.q_o)
                    + ic.q_o / qs2 * vf.vy(qs2, ic.q_o))
        assert combined == pytest.approx(ic.G_star, abs=1e-10)

    def test_degenerate_two_power_mixture_needs_consistent_data(self):
        # on the degenerate band a two-power mixture spans only two on-ray
        # degrees of freedom, so arbitrary (E, E_star, G_star) is rejected
        with pytest.raises(SingularMatrixError):
            with pytest.warns(UserWarning):
                solve_w(InitCondition(0.6, 0.4, -0.2, 0.3, 0.6), M23)

    def test_qo_one_singular(self):
        ic = InitCondition(1.0, 0.5, 0.5, 0.3, 1.0)
        with pytest.raises(SingularMatrixError):
            solve_w(ic, M23)


class TestVEval:
    def test_interpolation_identities(self):
        rng = np.random.default_rng(3)
        for _ in range(8):
            qs = rng.uniform(0.3, 0.95)
            qo = rng.uniform(-qs * 0.9, qs * 0.9)
            ic = InitCondition(qs, rng.normal(), rng.normal(), rng.normal(), qo)
            vf = solve_w(ic, M23)
            assert v_eval(vf, qo, 1.0) == pytest.approx(ic.E, abs=1e-9)
            assert v_eval(vf, qs**2, qo) == pytest.approx(ic.E_star, abs=1e-9)
            assert v_eval(vf, qs**2, qo, "vx") == pytest.approx(ic.G_star, abs=1e-9)
            assert v_eval(vf, qs**2, qo, "vy") == pytest.approx(0.0, abs=1e-9)

    def test_partials_match_finite_differences(self):
        ic = InitCondition(0.8, 0.6, -0.3, 0.4, 0.35)
        vf = solve_w(ic, M23)
        eps = 1e-6
        rng = np.random.default_rng(4)
        for _ in range(10):
            x, y = rng.uniform(-0.6, 0.6, 2)
            fx = (vf.v(x + eps, y) - vf.v(x - eps, y)) / (2 * eps)
            fy = (vf.v(x, y + eps) - vf.v(x, y - eps)) / (2 * eps)
            assert vf.vx(x, y) == pytest.approx(fx, rel=1e-6, abs=1e-6)
            assert vf.vy(x, y) == pytest.approx(fy, rel=1e-6, abs=1e-6)

    def test_even_mixture_reflection(self):
        meven = Mixture({2: 1.0, 4: 0.7})
        qs = 0.8
        ic_p = InitCondition(qs, 0.5, -0.2, 0.3, 0.4)
        ic_m = InitCondition(qs, 0.5, -0.2, 0.3, -0.4)
        vp, vm = solve_w(ic_p, meven), solve_w(ic_m, meven)
        rng = np.random.default_rng(5)
        for _ in range(10):
            x, y = rng.uniform(-0.7, 0.7, 2)
            assert vm.v(-x, y) == pytest.approx(vp.v(x, y), abs=1e-12)


class TestGibbsInit:
    def test_rs_energy(self):
        ic = gibbs_init(M23, 0.2, 0.0)
        assert ic.q_star == 0.0 and ic.E == pytest.approx(0.8)

    def test_rsb_geometry(self):
        ic = gibbs_init(M23, 1.0, 0.5, -1.0)
        assert ic.q_star == pytest.approx(math.sqrt(0.5))
        assert ic.q_o == 0.5

    def test_g_star_value(self):
        ic = gibbs_init(M23, 1.0, 0.5, -1.0)
        assert ic.G_star == pytest.approx(6.0)

    def test_energy_shift(self):
        ic = gibbs_init(M23, 1.0, 0.5, -1.0)
        assert ic.E == pytest.approx(-1.0 + 2.0 * M23.theta(0.5))


class TestGammaStar:
    def test_alpha_zero(self):
        assert gamma_star(M23, 0.7, 0.8, 0.0) == pytest.approx(0.5)

    def test_alpha_at_qstar_identity(self):
        beta, qs = 0.6, 0.75
        val = gamma_star(M23, beta, qs, qs)
        assert val == pytest.approx(0.5 - g_beta(M23, beta, qs**2, 1), abs=1e-12)

    def test_matches_band_parameter(self):
        beta, qb = 0.6, 0.5
        qs = math.sqrt(qb)
        expect = 0.5 / (1 - qb) - 2 * beta**2 * M23.nu(qb, 1)
        assert gamma_star(M23, beta, qs, qs) == pytest.approx(expect, abs=1e-12)

    def test_alpha_one_rejected(self):
        with pytest.raises(DomainError):
            gamma_star(M23, 0.5, 0.8, 1.0)


class TestCheckStationary:
    def test_gibbs_line_admissible(self):
        ic = gibbs_init(M23, 0.9, 0.5, -1.0)
        rep = check_stationary(ic, M23, 0.9)
        assert rep.admissible and rep.residual < 1e-10

    def test_off_line_not_admissible(self):
        ic = gibbs_init(M23, 0.9, 0.5, -1.0)
        rep = check_stationary(ic, M23, 1.2)
        assert not rep.admissible and rep.residual > 1e-4

    def test_rs_cases(self):
        beta = 0.4
        good = InitCondition(0.0, 2 * beta * M23.nu(1.0))
        assert check_stationary(good, M23, beta).admissible
        assert not check_stationary(InitCondition(0.0, 0.0), M23, beta).admissible


class TestFdtRegime:
    def test_stationary_data_zero_residual(self):
        # fast-relaxation configuration: c_inf = q_o exactly
        beta = 0.2236
        ic = gibbs_init(M23, beta, 0.5, -1.0)
        gam = gamma_star(M23, beta, ic.q_star, ic.q_star)
        ci = c_inf(M23, beta, gam)
        rep = fdt_regime_residual(M23, beta, ic, ic.q_star, ic.q_star, ci)
        assert rep.res_new24 < 1e-7
        assert rep.psd_ok

    def test_equality_case_of_psd_bound(self):
        beta = 0.2236
        ic = gibbs_init(M23, beta, 0.5, -1.0)
        rep = fdt_regime_residual(M23, beta, ic, 0.3, 0.3, 0.09)
        assert rep.psd_ok

    def test_violations_exist(self):
        beta = 0.2236
        ic = gibbs_init(M23, beta, 0.5, -1.0)
        rng = np.random.default_rng(6)
        found = False
        for _ in range(50):
            a, ah = rng.uniform(-0.9, 0.9, 2)
            ciw = rng.uniform(0.0, max(a**2 - 0.01, 0.005))
            found |= not fdt_regime_residual(M23, beta, ic, a, ah, ciw).psd_ok
        assert found


class TestPurePLocalized:
    def test_roots_satisfy_equation(self):
        p3 = Mixture.pure(3)
        beta, qc = 1.2, 0.6
        rec = pure_p_localized(p3, beta, qc, -1.0)
        rhs = math.sqrt(2 * (1 - qc))
        for q in (rec.q_minus, rec.q_beta):
            assert 2 * beta * math.sqrt(p3.nu(q, 2)) * (1 - q) == pytest.approx(
                rhs, abs=1e-10)

    def test_root_ordering(self):
        rec = pure_p_localized(Mixture.pure(3), 1.2, 0.6, -1.0)
        assert rec.q_minus < 1.0 / 3.0 < rec.q_beta < 1.0

    def test_h_inf_formula(self):
        p3 = Mixture.pure(3)
        rec = pure_p_localized(p3, 1.2, 0.6, -0.7)
        assert rec.H_inf == pytest.approx(-0.7 + 2 * 1.2 * p3.theta(rec.q_beta))

    def test_no_root_when_beta_small(self):
        with pytest.raises(NoRootError):
            pure_p_localized(Mixture.pure(3), 0.05, 0.6, -1.0)
