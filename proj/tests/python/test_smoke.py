import math

import numpy as np
import pytest

import phasels


def test_generators_are_seeded():
    a = phasels.gen_gaussian_matrix(20, 5, 7)
    assert a.shape == (20, 5)
    assert np.array_equal(a, phasels.gen_gaussian_matrix(20, 5, 7))
    x = phasels.gen_signal(30, 4, 2.0, 1)
    assert np.count_nonzero(x) <= 4
    assert np.linalg.norm(x) == pytest.approx(2.0)
    eta = phasels.gen_noise("fixed_norm:1", 50, 3)
    assert np.linalg.norm(eta) == pytest.approx(1.0)


def test_geometry_helpers():
    assert phasels.dist_sign(np.array([1.0, 2.0]), np.array([-1.0, -2.0])) == 0.0
    w = phasels.project_l1_ball(np.array([3.0, -1.0, 0.5]), 1.0)
    assert np.abs(w).sum() == pytest.approx(1.0)
    assert np.allclose(phasels.soft_threshold(np.array([2.0, -0.5]), 1.0), [1.0, 0.0])
    assert phasels.f_theta(0.0) == 0.0
    assert phasels.f_theta(math.pi / 2) == pytest.approx(2 / math.pi, abs=1e-12)
    est, se = phasels.expected_abs_xi(math.pi / 4, 20000, 1)
    assert abs(est - phasels.expected_abs_xi_closed_form(math.pi / 4)) <= 4 * se


def test_srip_and_width():
    a = phasels.gen_gaussian_matrix(12, 4, 5)
    lo, hi = phasels.srip_constants(a, 1)
    assert 0.0 < lo <= hi
    w, se = phasels.gaussian_width("sphere", 1, samples=20000, seed=2)
    assert abs(w - math.sqrt(2 / math.pi)) <= 4 * se


def test_error_reduction_recovers_noiseless_signal():
    a = phasels.gen_gaussian_matrix(80, 10, 1)
    x0 = phasels.gen_signal(10, None, 1.0, 2)
    y = np.abs(a @ x0)
    r = phasels.error_reduction(a, y, restarts=5, seed=3)
    assert r.converged
    assert phasels.dist_sign(r.x_hat, x0) <= 1e-6
    assert r.fixed_point_residual == pytest.approx(phasels.fixed_point_residual(a, y, r.x_hat), abs=1e-12)


def test_lasso_solvers_run():
    a = phasels.gen_gaussian_matrix(100, 40, 4)
    x0 = phasels.gen_signal(40, 3, 1.0, 5)
    y = np.abs(a @ x0) + phasels.gen_noise("fixed_norm:0.1", 100, 6)
    c = phasels.constrained_lasso(a, y, np.abs(x0).sum(), restarts=3, seed=1, spectral_support=3)
    assert np.abs(c.x_hat).sum() <= np.abs(x0).sum() + 1e-9
    r = phasels.regularized_lasso(a, y, 1.0, restarts=3, seed=1, spectral_support=3)
    assert r.objective >= 0.0
    lin = phasels.linear_least_squares(a, a @ x0)
    assert np.allclose(lin.x_hat, x0)


def test_errors_are_translated():
    with pytest.raises(phasels.PhaselsError, match="singular"):
        phasels.error_reduction(np.ones((6, 2)), np.ones(6))


def test_sweep_and_fit():
    records = phasels.run_sweep(
        "d = 5\nm_list = 40,80\ntrials = 3\nrestarts = 2\nseed = 11\n"
    )
    assert len(records) == 6
    assert [r.m for r in records] == [40, 40, 40, 80, 80, 80]
    slope, intercept, r2 = phasels.fit_loglog([1.0, 2.0, 4.0], [1.0, 0.5, 0.25])
    assert slope == pytest.approx(-1.0)
    assert intercept == pytest.approx(0.0, abs=1e-12)
    assert r2 == pytest.approx(1.0)


def test_cli_in_process():
    code, out, err = phasels.run_cli(["check", "ftheta"])
    assert code == 0, err
    assert "PASS" in out
    code, _, err = phasels.run_cli(["solve", "--m", "20"])
    assert code == 2
    assert err
