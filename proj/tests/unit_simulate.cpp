#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "spherekrr/simulate.hpp"

using namespace spherekrr;

namespace {

// Single-point design pinned at the target pole e_1, where every risk
// quantity has a closed form.
Design pole_design(int d) {
  Design dz;
  dz.d = d;
  dz.X = Eigen::MatrixXd::Zero(1, d + 1);
  dz.X(0, 0) = 1.0;
  dz.gram_t = Eigen::MatrixXd::Ones(1, 1);
  return dz;
}

// Degree-1 target 2<x, e_1> on S^3 under the linear kernel (beta_1 = 1).
ZonalTarget degree_one_target(const Spectrum& sp) {
  ZonalTarget tg;
  tg.s = 1.0;
  tg.gamma = 0.5;
  tg.c0 = 4.0;
  tg.q = 1;
  tg.beta = {0.0, 1.0};
  tg.level_mass = {0.0, 4.0};
  tg.hs_norm = 2.0;
  tg.pole.assign(sp.d + 1, 0.0);
  tg.pole[0] = 1.0;
  return tg;
}

}  // namespace

TEST_CASE("sample_sphere determinism and geometry") {
  Design a = sample_sphere(6, 40, 123);
  Design b = sample_sphere(6, 40, 123);
  Design c = sample_sphere(6, 40, 124);
  CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.X - c.X).cwiseAbs().maxCoeff() > 0.0);
  CHECK(a.X.cols() == 7);
  for (int i = 0; i < 40; ++i) {
    CHECK(a.X.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.gram_t(i, i) == 1.0);
    for (int j = 0; j < i; ++j) {
      CHECK(a.gram_t(i, j) == doctest::Approx(a.X.row(i).dot(a.X.row(j))));
      CHECK(std::abs(a.gram_t(i, j)) <= 1.0);
    }
  }
  // Inner products of independent uniform points concentrate near zero.
  Design big = sample_sphere(200, 100, 7);
  double mx = 0.0;
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < i; ++j) mx = std::max(mx, std::abs(big.gram_t(i, j)));
  }
  CHECK(mx < 0.5);
}

TEST_CASE("kernel matrix basics") {
  Design dz = sample_sphere(4, 30, 99);
  Eigen::MatrixXd kc =
      kernel_matrix(KernelProfile::power_series({3.0}), dz);
  CHECK((kc.array() - 3.0).abs().maxCoeff() < 1e-15);

  Eigen::MatrixXd ke = kernel_matrix(KernelProfile::exponential(), dz);
  CHECK((ke - ke.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 30; ++i) {
    CHECK(ke(i, i) == doctest::Approx(std::exp(1.0)));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ke);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("mercer M matrix on the pole design") {
  Spectrum sp = build_spectrum(KernelProfile::parse("poly:[0,1]"), 3);
  Design dz = pole_design(3);
  Eigen::MatrixXd m = mercer_m_matrix(sp, dz.gram_t);
  // M_11 = mu_1^2 N(3,1) = 0.0625 * 4.
  CHECK(m(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("single-point fit has the closed form") {
  KernelProfile lin = KernelProfile::parse("poly:[0,1]");
  Spectrum sp = build_spectrum(lin, 3);
  ZonalTarget tg = degree_one_target(sp);
  Design dz = pole_design(3);

  KrrFit fit = fit_krr(lin, sp, tg, dz, 0.25, 0.0, 1);
  // (K + n lambda) alpha = y with K = Phi(1) = 1? no: K_11 = k(1) = 1 for
  // the linear profile; y = f*(e_1) = 2; so alpha = 2 / (1 + 0.25).
  CHECK(fit.alpha(0) == doctest::Approx(2.0 / 1.25).epsilon(1e-12));
  CHECK(fit.residual < 1e-12);

  RiskValue risk = excess_risk_analytic(fit, sp, tg, dz);
  // f_hat = alpha t, f* = 2t, E[t^2] = 1/4 on S^3.
  double a = fit.alpha(0);
  CHECK(risk.value ==
        doctest::Approx((a - 2.0) * (a - 2.0) / 4.0).epsilon(1e-10));
  CHECK(risk.trunc_bound < 1e-10);

  // Large lambda drives the fit to zero and the risk to ||f*||^2.
  KrrFit flat = fit_krr(lin, sp, tg, dz, 1e12, 0.0, 1);
  CHECK(std::abs(flat.alpha(0)) < 1e-10);
  CHECK(excess_risk_analytic(flat, sp, tg, dz).value ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fit determinism and noise injection") {
  KernelProfile e = KernelProfile::exponential();
  Spectrum sp = build_spectrum(e, 5);
  ZonalTarget tg = build_target(sp, 1.0, 1.5);
  Design dz = sample_sphere(5, 25, 3);
  KrrFit f1 = fit_krr(e, sp, tg, dz, 0.1, 1.0, 42);
  KrrFit f2 = fit_krr(e, sp, tg, dz, 0.1, 1.0, 42);
  KrrFit f3 = fit_krr(e, sp, tg, dz, 0.1, 1.0, 43);
  CHECK((f1.alpha - f2.alpha).cwiseAbs().maxCoeff() == 0.0);
  CHECK((f1.alpha - f3.alpha).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("analytic risk agrees with the Monte Carlo oracle") {
  KernelProfile e = KernelProfile::exponential();
  Spectrum sp = build_spectrum(e, 5);
  ZonalTarget tg = build_target(sp, 1.0, 1.5);
  Design dz = sample_sphere(5, 30, 11);
  KrrFit fit = fit_krr(e, sp, tg, dz, 0.05, 0.5, 21);
  RiskValue an = excess_risk_analytic(fit, sp, tg, dz);
  auto [mc, se] = excess_risk_montecarlo(fit, e, sp, tg, dz, 200000, 77);
  CHECK(std::abs(an.value - mc) < 5.0 * se + 1e-12);
  CHECK(se > 0.0);
}

TEST_CASE("bias-variance decomposition") {
  KernelProfile e = KernelProfile::exponential();
  Spectrum sp = build_spectrum(e, 4);
  ZonalTarget tg = build_target(sp, 1.5, 1.5);
  Design dz = sample_sphere(4, 20, 5);

  RiskReport noiseless = bias_variance(e, sp, tg, dz, 0.1, 0.0);
  CHECK(noiseless.variance == 0.0);
  KrrFit clean = fit_krr(e, sp, tg, dz, 0.1, 0.0, 1);
  CHECK(noiseless.bias2 ==
        doctest::Approx(excess_risk_analytic(clean, sp, tg, dz).value)
            .epsilon(1e-10));

  ZonalTarget zero = build_target(sp, 1.0, 1.5, 0.0);
  RiskReport pure_noise = bias_variance(e, sp, zero, dz, 0.1, 2.0);
  CHECK(pure_noise.bias2 < 1e-14);
  CHECK(pure_noise.variance > 0.0);
  // Variance scales as sigma^2.
  RiskReport unit_noise = bias_variance(e, sp, zero, dz, 0.1, 1.0);
  CHECK(pure_noise.variance ==
        doctest::Approx(4.0 * unit_noise.variance).epsilon(1e-12));

  RiskReport both = bias_variance(e, sp, tg, dz, 0.1, 1.0);
  CHECK(both.excess_risk ==
        doctest::Approx(both.bias2 + both.variance).epsilon(1e-12));

  // The trace formula matches an empirical noise average.
  int reps = 400;
  double acc = 0.0;
  for (int r = 0; r < reps; ++r) {
    KrrFit f = fit_krr(e, sp, tg, dz, 0.1, 1.0, 1000 + r);
    acc += excess_risk_analytic(f, sp, tg, dz).value;
  }
  acc /= reps;
  CHECK(std::abs(acc - both.excess_risk) < 0.15 * both.excess_risk);
}

TEST_CASE("variance is monotone in lambda") {
  KernelProfile e = KernelProfile::exponential();
  Spectrum sp = build_spectrum(e, 5);
  Design dz = sample_sphere(5, 30, 9);
  std::vector<double> lambdas;
  for (int i = 0; i < 12; ++i) lambdas.push_back(std::pow(10.0, -6.0 + 0.5 * i));
  VarianceMonotonicityReport rep =
      variance_monotonicity_check(e, sp, dz, lambdas, 1.0);
  CHECK(rep.monotone);
  REQUIRE(rep.variances.size() == lambdas.size());
  for (size_t i = 1; i < rep.variances.size(); ++i) {
    CHECK(rep.variances[i] <= rep.variances[i - 1] * (1.0 + 1e-10));
  }
  std::vector<double> unsorted{0.1, 0.01};
  CHECK_THROWS_AS(variance_monotonicity_check(e, sp, dz, unsorted, 1.0),
                  std::invalid_argument);
}

TEST_CASE("noise-free fit approaches the population regularizer") {
  KernelProfile e = KernelProfile::exponential();
  Spectrum sp = build_spectrum(e, 5);
  ZonalTarget tg = build_target(sp, 1.0, 1.5);
  double lambda = 0.2;
  // Average a few designs; a single draw can buck the O(1/n) trend.
  auto mean_dist = [&](int n) {
    double acc = 0.0;
    for (uint64_t seed = 1; seed <= 3; ++seed) {
      acc += population_distance(e, sp, tg, sample_sphere(5, n, seed), lambda);
    }
    return acc / 3.0;
  };
  double d100 = mean_dist(100);
  double d800 = mean_dist(800);
  CHECK(d800 < d100);
  CHECK(d800 < 0.05 * tg.l2_norm_sq());
}

TEST_CASE("DesignEvaluator matches bias_variance across lambdas") {
  KernelProfile e = KernelProfile::exponential();
  Spectrum sp = build_spectrum(e, 4);
  ZonalTarget tg = build_target(sp, 1.5, 1.5);
  Design dz = sample_sphere(4, 35, 13);
  DesignEvaluator ev(e, sp, tg, dz);
  CHECK(ev.n() == 35);
  for (double lambda : {1e-4, 1e-2, 0.3, 5.0}) {
    RiskReport direct = bias_variance(e, sp, tg, dz, lambda, 0.7);
    RiskReport fast = ev.report(lambda, 0.7);
    CHECK(std::abs(direct.bias2 - fast.bias2) <
          1e-8 * (1.0 + direct.bias2));
    CHECK(std::abs(direct.variance - fast.variance) <
          1e-8 * (1.0 + direct.variance));
    CHECK(std::abs(direct.excess_risk - fast.excess_risk) <
          1e-8 * (1.0 + direct.excess_risk));
  }
}
