// Acceptance battery: each criterion prints one [PASS]/[FAIL] line with the
// measured values. Run with no arguments for all ten, or pass an index.
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "spherekrr/harness.hpp"
#include "spherekrr/rng.hpp"

using namespace spherekrr;

namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// 1. Exact spectral oracles: linear kernel on S^3 and the exp-profile trace.
bool criterion1(std::ostringstream& msg) {
  KernelProfile lin = KernelProfile::parse("poly:[0,1]");
  bool ok = true;
  double mu1 = eigenvalue_quadrature(lin, 3, 1);
  ok = ok && close(mu1, 0.25, 1e-10);
  for (int k : {0, 2, 3, 4, 5}) {
    ok = ok && std::abs(eigenvalue_quadrature(lin, 3, k)) <= 1e-10;
  }
  msg << "mu_1=" << mu1;
  for (int d : {5, 10, 20}) {
    Spectrum sp = build_spectrum(KernelProfile::exponential(), d);
    double trace = 0.0;
    for (int k = 0; k <= sp.K; ++k) trace += sp.mu[k] * sp.mult[k];
    double err = std::abs(trace - std::exp(1.0));
    ok = ok && err < 1e-8;
    msg << ", trace_err(d=" << d << ")=" << err;
  }
  return ok;
}

// 2. Eigenvalue decay slopes mu_k ~ d^{-k} for the exp profile.
bool criterion2(std::ostringstream& msg) {
  std::vector<int> d_grid{50, 100, 200, 400};
  std::vector<std::vector<double>> mu_rows;
  for (int d : d_grid) mu_rows.push_back(build_spectrum(KernelProfile::exponential(), d).mu);
  std::vector<double> dx(d_grid.begin(), d_grid.end());
  bool ok = true;
  for (int k = 0; k <= 3; ++k) {
    std::vector<double> mus;
    for (auto& row : mu_rows) mus.push_back(row[k]);
    double slope = log_log_slope(dx, mus);
    ok = ok && close(slope, -k, 0.1);
    msg << "slope_" << k << "=" << slope << " ";
  }
  return ok;
}

// 3. Key-quantity rates at lambda = d^{-l} across (s, l, p) configurations.
bool criterion3(std::ostringstream& msg) {
  struct Cfg {
    double s, l;
    int p;
  };
  std::vector<Cfg> cfgs{{0.5, 0.5, 0}, {1.0, 0.5, 0}, {2.0, 0.5, 0},
                        {0.5, 1.5, 1}, {1.0, 1.5, 1}, {2.0, 1.5, 1}};
  std::vector<int> d_grid{50, 100, 200, 400};
  KernelProfile e = KernelProfile::exponential();
  bool ok = true;
  for (const Cfg& c : cfgs) {
    QuantitySlopeReport rep = quantity_rate_probe(e, c.s, c.l, c.p, d_grid);
    bool here = close(rep.n1_slope, rep.n1_theory, 0.15) &&
                close(rep.n2_slope, rep.n2_theory, 0.15) &&
                close(rep.m2_slope, rep.m2_theory, 0.15);
    ok = ok && here;
    msg << "(s=" << c.s << ",l=" << c.l << ",p=" << c.p << ":"
        << (here ? "ok" : "BAD") << " N1 " << rep.n1_slope << "/"
        << rep.n1_theory << " N2 " << rep.n2_slope << "/" << rep.n2_theory
        << " M2 " << rep.m2_slope << "/" << rep.m2_theory << ") ";
  }
  return ok;
}

double eval_d_exp(double s, double gamma, KernelFamily fam, RateMethod m) {
  RateQuery q{s, gamma, fam, m};
  return (m == RateMethod::krr ? krr_rate(q) : minimax_rate(q)).d_exponent;
}

// 4. Rate-curve algebra: continuity, sub-1 optimality, saturation gaps,
// and the s >= 2 invariance.
bool criterion4(std::ostringstream& msg) {
  bool ok = true;
  // Continuity at every breakpoint; the curve is piecewise linear in gamma,
  // so the right limit is recovered exactly by linear extrapolation.
  double h = std::ldexp(1.0, -20);
  double worst = 0.0;
  for (double s = 0.25; s <= 3.001; s += 0.25) {
    for (KernelFamily fam :
         {KernelFamily::generic_inner, KernelFamily::ntk_relu2}) {
      for (RateMethod m : {RateMethod::krr, RateMethod::minimax}) {
        double floor = rate_validity_floor(s, m);
        for (double bp : rate_breakpoints(s, fam, m, 8.0)) {
          if (bp <= floor + 2.0 * h || bp + 2.0 * h > 8.0) continue;
          double at = eval_d_exp(s, bp, fam, m);
          double right =
              2.0 * eval_d_exp(s, bp + h, fam, m) - eval_d_exp(s, bp + 2 * h, fam, m);
          worst = std::max(worst, std::abs(at - right));
        }
      }
    }
  }
  ok = ok && worst <= 1e-12;
  msg << "continuity_worst=" << worst;

  // krr equals minimax (epsilon aside) for s <= 1.
  double sub1_worst = 0.0;
  for (double s : {0.25, 0.5, 0.75, 1.0}) {
    for (double g = 0.4; g <= 6.0; g += 0.05) {
      if (g <= rate_validity_floor(s, RateMethod::krr)) continue;
      sub1_worst = std::max(
          sub1_worst,
          std::abs(eval_d_exp(s, g, KernelFamily::generic_inner, RateMethod::krr) -
                   eval_d_exp(s, g, KernelFamily::generic_inner,
                              RateMethod::minimax)));
    }
  }
  ok = ok && sub1_worst <= 1e-12;
  msg << ", sub1_worst=" << sub1_worst;

  // A strictly positive gap exists for every s > 1 tested.
  for (double s : {1.25, 1.5, 2.0, 2.5}) {
    double best = 0.0;
    for (double g = 0.4; g <= 6.0; g += 0.05) {
      best = std::max(best, saturation_gap(s, g).gap);
    }
    ok = ok && best > 0.1;
    msg << ", max_gap(s=" << s << ")=" << best;
  }
  double g22 = saturation_gap(2.0, 2.0).gap;
  ok = ok && close(g22, 0.5, 1e-12);
  msg << ", gap(2,2)=" << g22;

  // Exact invariance of the krr curve for s >= 2.
  double inv_worst = 0.0;
  for (double g = 0.4; g <= 6.0; g += 0.05) {
    for (double s : {2.5, 3.0}) {
      inv_worst = std::max(
          inv_worst,
          std::abs(eval_d_exp(2.0, g, KernelFamily::generic_inner,
                              RateMethod::krr) -
                   eval_d_exp(s, g, KernelFamily::generic_inner,
                              RateMethod::krr)));
    }
  }
  ok = ok && inv_worst <= 1e-14;
  msg << ", s>=2_invariance=" << inv_worst;
  return ok;
}

// 5. Decomposition identity on random configurations.
bool criterion5(std::ostringstream& msg) {
  Rng rng(20250501);
  KernelProfile e = KernelProfile::exponential();
  bool ok = true;
  double worst_z = 0.0;
  for (int c = 0; c < 20; ++c) {
    int d = 3 + static_cast<int>(rng.next_uniform() * 8);
    int n = 20 + static_cast<int>(rng.next_uniform() * 180);
    double s = 0.5 + 1.5 * rng.next_uniform();
    double lambda = std::pow(10.0, -3.0 + 3.0 * rng.next_uniform());
    double sigma = 0.3 + 1.2 * rng.next_uniform();
    Spectrum sp = build_spectrum(e, d);
    ZonalTarget tg = build_target(sp, s, 1.5);
    Design dz = sample_sphere(d, n, 100 + c);
    RiskReport rr = bias_variance(e, sp, tg, dz, lambda, sigma);
    double sum = 0.0, sum_sq = 0.0;
    int draws = 200;
    for (int i = 0; i < draws; ++i) {
      KrrFit fit = fit_krr(e, sp, tg, dz, lambda, sigma, 5000 + 300 * c + i);
      double v = excess_risk_analytic(fit, sp, tg, dz).value;
      sum += v;
      sum_sq += v * v;
    }
    double mean = sum / draws;
    double se =
        std::sqrt(std::max(0.0, sum_sq / draws - mean * mean) / draws);
    double z = se > 0.0 ? std::abs(mean - rr.excess_risk) / se : 0.0;
    worst_z = std::max(worst_z, z);
    ok = ok && z <= 5.0;
  }
  msg << "worst |mean - (bias2+var)| / se = " << worst_z << " over 20 configs";
  return ok;
}

// 6. Analytic vs Monte Carlo excess risk.
bool criterion6(std::ostringstream& msg) {
  Rng rng(777);
  KernelProfile e = KernelProfile::exponential();
  bool ok = true;
  int bad = 0;
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    int d = 3 + static_cast<int>(rng.next_uniform() * 8);
    int n = 20 + static_cast<int>(rng.next_uniform() * 180);
    double s = 0.5 + 1.5 * rng.next_uniform();
    double lambda = std::pow(10.0, -3.0 + 3.0 * rng.next_uniform());
    double sigma = rng.next_uniform();
    Spectrum sp = build_spectrum(e, d);
    ZonalTarget tg = build_target(sp, s, 1.5);
    Design dz = sample_sphere(d, n, 900 + c);
    KrrFit fit = fit_krr(e, sp, tg, dz, lambda, sigma, 40 + c);
    RiskValue an = excess_risk_analytic(fit, sp, tg, dz);
    auto [mc, se] = excess_risk_montecarlo(fit, e, sp, tg, dz, 100000, 60 + c);
    double slack = 4.0 * se + an.trunc_bound;
    double dev = std::abs(an.value - mc);
    if (dev > slack) ++bad;
    worst = std::max(worst, slack > 0 ? dev / slack : 0.0);
  }
  ok = bad == 0;
  msg << bad << "/50 configs outside 4 se + trunc; worst ratio " << worst;
  return ok;
}

// 7. Variance monotone in lambda on random designs.
bool criterion7(std::ostringstream& msg) {
  Rng rng(31);
  KernelProfile e = KernelProfile::exponential();
  bool ok = true;
  for (int c = 0; c < 10; ++c) {
    int d = 3 + static_cast<int>(rng.next_uniform() * 6);
    int n = 20 + static_cast<int>(rng.next_uniform() * 130);
    Spectrum sp = build_spectrum(e, d);
    Design dz = sample_sphere(d, n, 4000 + c);
    std::vector<double> lambdas;
    for (int i = 0; i < 10; ++i) lambdas.push_back(std::pow(10.0, -5.0 + 0.6 * i));
    ok = ok && variance_monotonicity_check(e, sp, dz, lambdas, 1.0).monotone;
  }
  msg << "10 designs x 10-point lambda grid, zero violations: "
      << (ok ? "yes" : "no");
  return ok;
}

// 8. Empirical rate slopes for (s=1, gamma=1.5) and (s=0.75, gamma=1.2).
bool criterion8(std::ostringstream& msg) {
  bool ok = true;
  {
    ExperimentConfig cfg;
    cfg.s = 1.0;
    cfg.gamma = 1.5;
    cfg.d_grid = {20, 40, 80, 160};
    cfg.replicates = 5;
    cfg.seed = 11;
    SlopeFit fit = fit_rate(run_sweep(cfg), FitAxis::log_d, true);
    double theory = krr_rate({cfg.s, cfg.gamma}).d_exponent;
    ok = ok && close(fit.slope, theory, 0.25);
    msg << "s=1: slope " << fit.slope << " vs " << theory << " (tol 0.25)";
  }
  {
    ExperimentConfig cfg;
    cfg.s = 0.75;
    cfg.gamma = 1.2;
    cfg.d_grid = {20, 40, 80, 160};
    cfg.replicates = 5;
    cfg.seed = 12;
    SlopeFit fit = fit_rate(run_sweep(cfg), FitAxis::log_d, true);
    double theory = krr_rate({cfg.s, cfg.gamma}).d_exponent;
    ok = ok && close(fit.slope, theory, 0.3);
    msg << "; s=0.75: slope " << fit.slope << " vs " << theory << " (tol 0.3)";
  }
  return ok;
}

// 9. Saturation: even the best lambda exponent stays short of the minimax
// n-rate for s = 2, gamma = 2.
bool criterion9(std::ostringstream& msg) {
  ExperimentConfig cfg;
  cfg.s = 2.0;
  cfg.gamma = 2.0;
  cfg.d_grid = {16, 24, 36, 54};
  cfg.replicates = 3;
  cfg.seed = 13;
  cfg.lambda_policy = LambdaPolicy::sweep;
  for (int i = 0; i < 12; ++i) cfg.sweep_exponents.push_back(0.60 + 0.05 * i);
  auto records = run_sweep(cfg);
  double best = 0.0;
  double best_l = 0.0;
  bool first = true;
  for (double l : cfg.sweep_exponents) {
    SlopeFit fit =
        fit_rate(filter_by_lambda_exponent(records, l), FitAxis::log_n, true);
    if (first || fit.slope < best) {
      best = fit.slope;
      best_l = l;
      first = false;
    }
  }
  double minimax_n =
      minimax_rate({cfg.s, cfg.gamma, KernelFamily::generic_inner,
                    RateMethod::minimax})
          .n_exponent;
  double krr_n = krr_rate({cfg.s, cfg.gamma}).n_exponent;
  bool ok = best >= minimax_n + 0.15 && close(best, krr_n, 0.25);
  msg << "best slope " << best << " at l=" << best_l << "; minimax "
      << minimax_n << " (margin 0.15), krr theory " << krr_n << " (tol 0.25)";
  return ok;
}

// 10. Condition checker at d = 100, n = 1e4.
bool criterion10(std::ostringstream& msg) {
  Spectrum sp = build_spectrum(KernelProfile::exponential(), 100);
  ZonalTarget tg = build_target(sp, 1.0, 2.0);
  ConditionReport rep = check_approximation_conditions(
      sp, tg, 0.01, 10000, ConditionRegime::general);
  double first = rep.ratios[0];
  bool ok = close(first, 0.09, 0.02) && rep.pass[0];
  ConditionReport tiny = check_approximation_conditions(
      sp, tg, std::pow(100.0, -3.0), 10000, ConditionRegime::general);
  ok = ok && !tiny.all_pass;
  msg << "first ratio at lambda=d^-1: " << first
      << " (want 0.09 +- 0.02, pass at 0.2: " << (rep.pass[0] ? "yes" : "no")
      << "); lambda=d^-3 all_pass: " << (tiny.all_pass ? "yes" : "no");
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  if (argc > 1) {
    which.push_back(std::atoi(argv[1]));
  } else {
    for (int i = 1; i <= 10; ++i) which.push_back(i);
  }
  bool (*fns[])(std::ostringstream&) = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9, criterion10};
  bool all = true;
  for (int i : which) {
    if (i < 1 || i > 10) {
      std::cerr << "unknown criterion " << i << "\n";
      return 2;
    }
    std::ostringstream msg;
    bool ok = false;
    try {
      ok = fns[i - 1](msg);
    } catch (const std::exception& e) {
      msg << "exception: " << e.what();
    }
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << i << ": "
              << msg.str() << "\n";
    all = all && ok;
  }
  return all ? 0 : 1;
}
