import math

import pytest

import spherekrr as sk


def test_spectrum_linear_kernel():
    profile = sk.KernelProfile.parse("poly:[0,1]")
    sp = sk.build_spectrum(profile, 3)
    assert sp.K == 1
    assert sp.mu[1] == pytest.approx(0.25, abs=1e-12)
    assert sp.mult == [1.0, 4.0]


def test_multiplicity_and_legendre():
    assert sk.multiplicity(3, 2) == 9.0
    assert sk.legendre_eval(4, 1, -0.3) == pytest.approx(-0.3)


def test_rate_queries():
    q = sk.RateQuery()
    q.s, q.gamma = 1.5, 2.0
    a = sk.krr_rate(q)
    assert a.d_exponent == pytest.approx(-1.5)
    assert a.lambda_exponent == pytest.approx(0.75)
    assert sk.saturation_gap(2.0, 2.0).gap == pytest.approx(0.5)
    q.s, q.gamma = 0.4, 0.4
    with pytest.raises(ValueError):
        sk.krr_rate(q)


def test_key_quantities_and_conditions():
    sp = sk.build_spectrum(sk.KernelProfile.exponential(), 10)
    tg = sk.build_target(sp, 1.0, 1.5)
    kq = sk.key_quantities(sp, tg, 0.1)
    assert kq.n2 <= kq.n1
    assert kq.m1_zonal**2 <= kq.q1 * kq.n1 * (1 + 1e-9)
    rep = sk.check_approximation_conditions(
        sp, tg, 0.1, 10**8, sk.ConditionRegime.general
    )
    assert rep.all_pass


def test_fit_and_risk():
    profile = sk.KernelProfile.exponential()
    sp = sk.build_spectrum(profile, 5)
    tg = sk.build_target(sp, 1.0, 1.5)
    dz = sk.sample_sphere(5, 40, 7)
    fit = sk.fit_krr(profile, sp, tg, dz, 0.1, 1.0, 1)
    risk = sk.excess_risk_analytic(fit, sp, tg, dz)
    assert risk.value > 0
    rep = sk.bias_variance(profile, sp, tg, dz, 0.1, 1.0)
    assert rep.excess_risk == pytest.approx(rep.bias2 + rep.variance)


def test_sweep_and_slope():
    cfg = sk.ExperimentConfig()
    cfg.d_grid = [6, 8, 10]
    cfg.replicates = 2
    cfg.seed = 3
    records = sk.run_sweep(cfg)
    assert len(records) == 6
    assert all(r.error == "" for r in records)
    fit = sk.fit_rate(records, sk.FitAxis.log_d, True)
    assert fit.n_points == 3
    assert math.isfinite(fit.slope)
