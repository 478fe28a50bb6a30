"""Scalar relaxation equation against closed forms and the two-time residual."""

import numpy as np
import pytest

from glassdyn.dynamics import SolverConfig, residual
from glassdyn.errors import ConfigError, GammaTooSmallError, PlateauWarning
from glassdyn.fdt import solve_fdt, stationary_two_time
from glassdyn.init_params import InitCondition, gibbs_init, solve_w
from glassdyn.mixture import Mixture

M23 = Mixture({2: 1.0, 3: 1.0})


def _const_kernel_solution(gamma, tau):
    # beta = 0 collapses the memory kernel to the constant gamma, so
    # c' = -gamma (c - 1) - 1/2 integrates in closed form
    return (1.0 - 0.5 / gamma) + np.exp(-gamma * tau) / (2.0 * gamma)


class TestSolveFdt:
    def test_exponential_at_gamma_half(self):
        sol = solve_fdt(M23, 0.0, 0.5, 20.0, 0.005)
        assert np.abs(sol.c - np.exp(-0.5 * sol.tau)).max() < 3 * 0.005**2

    def test_constant_kernel_closed_form(self):
        sol = solve_fdt(M23, 0.0, 0.8, 20.0, 0.005)
        assert np.abs(sol.c - _const_kernel_solution(0.8, sol.tau)).max() < 1e-5

    def test_initial_values(self):
        sol = solve_fdt(M23, 0.4, 0.6, 5.0, 0.01)
        assert sol.c[0] == 1.0
        assert sol.cprime[0] == -0.5
        assert sol.r[0] == 1.0

    def test_plateau_reached(self):
        # far from the dynamical critical point the decay rate is order 1/2,
        # so forty time units land well inside the 1e-8 plateau window
        sol = solve_fdt(M23, 0.1, 0.5, 60.0, 0.01)
        assert sol.plateaued
        assert abs(sol.c[-1] - sol.c_inf) < 0.05

    def test_monotone_decreasing(self):
        sol = solve_fdt(M23, 0.3, 0.5, 10.0, 0.01)
        assert (np.diff(sol.c) < 1e-12).all()

    def test_grid_convergence_second_order(self):
        beta, gamma = 0.3, 0.6
        sols = {h: solve_fdt(M23, beta, gamma, 4.0, h) for h in (0.02, 0.01, 0.005)}
        d1 = np.abs(sols[0.02].c - sols[0.01].c[::2]).max()
        d2 = np.abs(sols[0.01].c - sols[0.005].c[::2]).max()
        assert d1 / d2 > 3.0

    def test_gamma_too_small_propagates(self):
        with pytest.raises(GammaTooSmallError):
            solve_fdt(M23, 0.2, 0.1, 5.0, 0.01)

    def test_did_not_plateau_warns(self):
        with pytest.warns(PlateauWarning):
            solve_fdt(M23, 0.3, 0.5, 0.5, 0.005)


class TestStationaryTwoTime:
    def _gibbs_pair(self, beta=0.25, q_EA=0.5, T=2.0, h=0.01):
        ic = gibbs_init(M23, beta, q_EA, -1.0)
        gamma = 0.5 / (1 - q_EA) - 2 * beta**2 * M23.nu(q_EA, 1)
        with pytest.warns(PlateauWarning):
            fdt = solve_fdt(M23, beta, gamma, T, h)
        return ic, fdt

    def test_structure(self):
        ic, fdt = self._gibbs_pair()
        sol = stationary_two_time(fdt, ic)
        np.testing.assert_allclose(np.diagonal(sol.R), 1.0)
        np.testing.assert_allclose(sol.q, ic.q_o)
        np.testing.assert_allclose(sol.H, ic.E)
        np.testing.assert_allclose(sol.K, 1.0)
        assert sol.C[5, 2] == fdt.c[3]

    def test_refuses_non_stationary_data(self):
        ic, fdt = self._gibbs_pair()
        bad = InitCondition(ic.q_star, ic.E + 0.5, ic.E_star, ic.G_star, ic.q_o)
        with pytest.raises(ConfigError):
            stationary_two_time(fdt, bad)

    def test_satisfies_two_time_equations(self):
        ic, fdt = self._gibbs_pair()
        sol = stationary_two_time(fdt, ic)
        vf = solve_w(ic, M23)
        cfg = SolverConfig(beta=fdt.beta, T=2.0, h=fdt.h_tau)
        rep = residual(sol, vf, M23, cfg)
        assert rep.sup_res_R < 5 * fdt.h_tau
        assert rep.sup_res_C < 5 * fdt.h_tau
        assert rep.sup_res_q < 5 * fdt.h_tau
        assert rep.sup_res_H < 5 * fdt.h_tau
        assert rep.sup_res_mu < 5 * fdt.h_tau

    def test_rs_stationary_construction(self):
        beta = 0.25
        ic = InitCondition(0.0, 2 * beta * M23.nu(1.0))
        with pytest.warns(PlateauWarning):
            fdt = solve_fdt(M23, beta, 0.5, 2.0, 0.01)
        sol = stationary_two_time(fdt, ic)
        assert np.all(sol.L == 0.0)
        rep = residual(sol, solve_w(ic, M23), M23, SolverConfig(beta=beta, T=2.0, h=0.01))
        assert max(rep.sup_res_C, rep.sup_res_R, rep.sup_res_H) < 0.05
