#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "spherekrr/harness.hpp"
#include "spherekrr/rng.hpp"

namespace spherekrr {

namespace {

RateMethod parse_method(const std::string& m) {
  if (m == "krr") return RateMethod::krr;
  if (m == "minimax") return RateMethod::minimax;
  throw std::invalid_argument("--method: must be krr or minimax");
}

KernelFamily parse_family(const std::string& f) {
  if (f == "generic" || f == "generic_inner") return KernelFamily::generic_inner;
  if (f == "ntk-relu2" || f == "ntk_relu2") return KernelFamily::ntk_relu2;
  throw std::invalid_argument("--family: must be generic or ntk-relu2");
}

void print_rate_answer(std::ostream& os, const RateAnswer& a,
                       RateMethod method) {
  os << "d_exponent " << a.d_exponent << "\n";
  os << "n_exponent " << a.n_exponent << "\n";
  if (method == RateMethod::krr) {
    os << "lambda_exponent " << a.lambda_exponent
       << (a.lambda_log_correction ? " (times ln d)" : "") << "\n";
  }
  os << "period " << a.period_index << " " << to_string(a.period_kind) << "\n";
  os << "log_factor " << to_string(a.log_factor) << "\n";
  os << "epsilon_slack " << (a.epsilon_slack ? 1 : 0) << "\n";
}

struct VerifyRunner {
  bool all_ok = true;

  void check(const std::string& name, bool ok) {
    std::cout << (ok ? "[ ok ] " : "[FAIL] ") << name << "\n";
    all_ok = all_ok && ok;
  }
};

bool run_verify() {
  VerifyRunner v;

  {
    bool ok = true;
    for (int d : {5, 10}) {
      Spectrum sp = build_spectrum(KernelProfile::exponential(), d);
      double trace = 0.0;
      for (int k = 0; k <= sp.K; ++k) trace += sp.mu[k] * sp.mult[k];
      ok = ok && std::abs(trace + sp.tail_mass - std::exp(1.0)) < 1e-8 &&
           sp.tail_mass < 1e-8;
    }
    v.check("trace identity (exp profile, d = 5, 10)", ok);
  }
  {
    KernelProfile lin = KernelProfile::parse("poly:[0,1]");
    double mu1 = eigenvalue_quadrature(lin, 3, 1);
    v.check("linear kernel eigenvalue mu_1 = 1/4 on S^3",
            std::abs(mu1 - 0.25) < 1e-12);
  }
  {
    Spectrum sp = build_spectrum(KernelProfile::exponential(), 5);
    Rng rng(42);
    bool ok = true;
    for (int i = 0; i < 1000; ++i) {
      double t = 2.0 * rng.next_uniform() - 1.0;
      for (int k = 0; k <= std::min(sp.K, 8); ++k) {
        ok = ok && std::abs(zonal_kernel(sp, k, t)) <= sp.mult[k] + 1e-9;
      }
    }
    v.check("addition-formula bound |Z_k(t)| <= N(d,k)", ok);
  }
  {
    Spectrum sp = build_spectrum(KernelProfile::ntk_relu2(), 5,
                                 TruncationPolicy::fixed_degree(11));
    bool ok = true;
    for (int k = 3; k <= sp.K; k += 2) ok = ok && sp.mu[k] <= 1e-10;
    v.check("NTK parity: odd-degree eigenvalues vanish", ok);
  }
  {
    bool ok = true;
    for (double s = 0.25; s <= 3.001; s += 0.25) {
      for (KernelFamily fam :
           {KernelFamily::generic_inner, KernelFamily::ntk_relu2}) {
        for (RateMethod method : {RateMethod::krr, RateMethod::minimax}) {
          for (double bp : rate_breakpoints(s, fam, method, 8.0)) {
            double lo_floor = rate_validity_floor(s, method);
            if (bp - 1e-7 <= lo_floor) continue;
            RateQuery ql{s, bp - 1e-9, fam, method};
            RateQuery qr{s, bp + 1e-9, fam, method};
            auto eval = [&](const RateQuery& q) {
              return method == RateMethod::krr ? krr_rate(q) : minimax_rate(q);
            };
            ok = ok && std::abs(eval(ql).d_exponent - eval(qr).d_exponent) <
                           1e-6;
          }
        }
      }
    }
    v.check("rate curves continuous at breakpoints", ok);
  }
  {
    bool ok = true;
    for (double s : {0.5, 1.0, 1.5, 2.0, 2.5}) {
      for (double g = 0.4; g <= 6.0; g += 0.1) {
        if (g <= rate_validity_floor(s, RateMethod::krr)) continue;
        GapReport gap = saturation_gap(s, g);
        ok = ok && gap.gap >= -1e-12;
        if (s <= 1.0) ok = ok && gap.gap <= 1e-12;
      }
    }
    v.check("krr rate dominates the minimax rate; equality for s <= 1", ok);
  }
  {
    Spectrum sp = build_spectrum(KernelProfile::exponential(), 20);
    ZonalTarget tg = build_target(sp, 1.5, 1.5);
    bool ok = true;
    double prev_n1 = -1.0, prev_m2 = -1.0;
    for (int i = 0; i < 12; ++i) {
      double lambda = std::pow(10.0, -6.0 + 0.5 * i);
      KeyQuantities kq = key_quantities(sp, tg, lambda);
      ok = ok && kq.n2 <= kq.n1 * (1.0 + 1e-12);
      ok = ok && kq.m1_zonal * kq.m1_zonal <= kq.q1 * kq.n1 * (1.0 + 1e-9);
      if (prev_n1 >= 0.0) ok = ok && kq.n1 <= prev_n1 * (1.0 + 1e-12);
      if (prev_m2 >= 0.0) ok = ok && kq.m2 >= prev_m2 * (1.0 - 1e-12);
      prev_n1 = kq.n1;
      prev_m2 = kq.m2;
    }
    v.check("key-quantity monotonicity and Cauchy-Schwarz chain", ok);
  }
  {
    KernelProfile profile = KernelProfile::exponential();
    Spectrum sp = build_spectrum(profile, 3);
    Design dz = sample_sphere(3, 60, 11);
    auto rep = variance_monotonicity_check(
        profile, sp, dz, {1e-4, 1e-3, 1e-2, 1e-1, 1.0}, 1.0);
    v.check("variance nonincreasing in lambda", rep.monotone);
  }
  {
    KernelProfile profile = KernelProfile::exponential();
    Spectrum sp = build_spectrum(profile, 5);
    ZonalTarget tg = build_target(sp, 1.0, 1.2);
    Design dz = sample_sphere(5, 50, 3);
    RiskReport rr = bias_variance(profile, sp, tg, dz, 0.01, 1.0);
    double sum = 0.0, sum_sq = 0.0;
    int draws = 50;
    for (int i = 0; i < draws; ++i) {
      KrrFit fit = fit_krr(profile, sp, tg, dz, 0.01, 1.0, 1000 + i);
      double e = excess_risk_analytic(fit, sp, tg, dz).value;
      sum += e;
      sum_sq += e * e;
    }
    double mean = sum / draws;
    double se = std::sqrt(
        std::max(0.0, sum_sq / draws - mean * mean) / draws);
    v.check("bias-variance decomposition identity",
            std::abs(mean - rr.excess_risk) <= 5.0 * se + 1e-12);
  }
  {
    ExperimentConfig cfg;
    cfg.s = 1.0;
    cfg.gamma = 1.5;
    cfg.d_grid = {6, 8};
    cfg.replicates = 1;
    cfg.seed = 9;
    std::ostringstream a, b;
    write_records_csv(a, run_sweep(cfg));
    write_records_csv(b, run_sweep(cfg));
    v.check("sweep determinism (same seed, identical CSV)", a.str() == b.str());
  }
  return v.all_ok;
}

int cli_run(int argc, char** argv) {
  CLI::App app{"large-dimensional kernel ridge regression toolkit"};
  app.require_subcommand(1);

  // spectrum
  auto* sc_spectrum = app.add_subcommand("spectrum", "build a kernel spectrum");
  std::string sp_profile = "exp";
  int sp_d = 0;
  int sp_K = -1;
  double sp_eps = 1e-10;
  std::string sp_out;
  sc_spectrum->add_option("--profile", sp_profile, "kernel profile");
  sc_spectrum->add_option("--d", sp_d, "sphere dimension")->required();
  sc_spectrum->add_option("--K", sp_K, "fixed truncation degree");
  sc_spectrum->add_option("--eps-tail", sp_eps, "relative tail tolerance");
  sc_spectrum->add_option("--out", sp_out, "output JSON path");

  // quantities
  auto* sc_quant = app.add_subcommand("quantities", "key-quantity table");
  std::string q_profile = "exp";
  int q_d = 0;
  double q_s = 1.0, q_gamma = 1.5, q_c0 = 1.0, q_rcap = 10.0;
  std::vector<double> q_lambdas, q_ls;
  std::string q_out;
  sc_quant->add_option("--profile", q_profile, "kernel profile");
  sc_quant->add_option("--d", q_d, "sphere dimension")->required();
  sc_quant->add_option("--s", q_s, "source exponent")->required();
  sc_quant->add_option("--gamma", q_gamma, "scaling exponent")->required();
  sc_quant->add_option("--c0", q_c0, "level mass");
  sc_quant->add_option("--r-cap", q_rcap, "norm cap");
  sc_quant->add_option("--lambda", q_lambdas, "lambda values");
  sc_quant->add_option("--l", q_ls, "lambda exponents (lambda = d^-l)");
  sc_quant->add_option("--out", q_out, "output CSV path");

  // rates
  auto* sc_rates = app.add_subcommand("rates", "rate-curve queries");
  double r_s = 1.0, r_gamma = 0.0, r_gamma_max = 6.0;
  std::string r_method = "krr", r_family = "generic", r_out;
  bool r_figure = false, r_curve = false;
  std::vector<double> r_s_list;
  sc_rates->add_option("--s", r_s, "source exponent");
  sc_rates->add_option("--gamma", r_gamma, "scaling exponent");
  sc_rates->add_option("--method", r_method, "krr or minimax");
  sc_rates->add_option("--family", r_family, "generic or ntk-relu2");
  sc_rates->add_option("--gamma-max", r_gamma_max, "curve upper endpoint");
  sc_rates->add_flag("--curve", r_curve, "emit one curve as CSV");
  sc_rates->add_flag("--figure", r_figure, "emit multi-panel figure data");
  sc_rates->add_option("--s-list", r_s_list, "figure s values");
  sc_rates->add_option("--out", r_out, "output CSV path");

  // conditions
  auto* sc_cond = app.add_subcommand("conditions", "approximation conditions");
  std::string c_profile = "exp";
  int c_d = 0;
  long c_n = 0;
  double c_s = 1.0, c_gamma = 1.5, c_lambda = 0.0, c_l = 0.0;
  double c_threshold = 0.2, c_epsilon = 0.05;
  sc_cond->add_option("--profile", c_profile, "kernel profile");
  sc_cond->add_option("--d", c_d, "sphere dimension")->required();
  sc_cond->add_option("--n", c_n, "sample size")->required();
  sc_cond->add_option("--s", c_s, "source exponent")->required();
  sc_cond->add_option("--gamma", c_gamma, "scaling exponent")->required();
  auto* opt_clam = sc_cond->add_option("--lambda", c_lambda, "lambda value");
  auto* opt_cl = sc_cond->add_option("--l", c_l, "lambda exponent");
  sc_cond->add_option("--threshold", c_threshold, "pass threshold");
  sc_cond->add_option("--epsilon", c_epsilon, "epsilon for s < 1");

  // simulate
  auto* sc_sim = app.add_subcommand("simulate", "run a KRR sweep");
  ExperimentConfig cfg;
  std::string sim_policy = "balance";
  sc_sim->set_config("--config", "", "TOML config file");
  sc_sim->add_option("--profile", cfg.profile, "kernel profile");
  sc_sim->add_option("--s", cfg.s, "source exponent");
  sc_sim->add_option("--gamma", cfg.gamma, "scaling exponent");
  sc_sim->add_option("--c-n", cfg.c_n, "n = round(c_n * d^gamma)");
  sc_sim->add_option("--sigma", cfg.sigma, "noise level");
  sc_sim->add_option("--c0", cfg.c0, "level mass");
  sc_sim->add_option("--r-cap", cfg.r_cap, "norm cap");
  sc_sim->add_option("--d-grid", cfg.d_grid, "dimensions");
  sc_sim->add_option("--lambda-policy", sim_policy, "balance|fixed|sweep");
  sc_sim->add_option("--l", cfg.fixed_l, "fixed lambda exponent");
  sc_sim->add_option("--sweep", cfg.sweep_exponents, "sweep lambda exponents");
  sc_sim->add_option("--replicates", cfg.replicates, "designs per cell");
  sc_sim->add_option("--seed", cfg.seed, "base seed");
  sc_sim->add_option("--threads", cfg.threads, "worker threads");
  sc_sim->add_option("--out", cfg.out_path, "output CSV path");

  // fit
  auto* sc_fit = app.add_subcommand("fit", "fit a rate exponent to a CSV");
  std::string f_csv, f_axis = "d";
  bool f_unverified = false;
  double f_l = std::numeric_limits<double>::quiet_NaN();
  sc_fit->add_option("--csv", f_csv, "records CSV")->required();
  sc_fit->add_option("--axis", f_axis, "d or n");
  sc_fit->add_flag("--include-unverified", f_unverified,
                   "keep cells failing the approximation conditions");
  sc_fit->add_option("--lambda-exponent", f_l, "restrict to one exponent");

  // verify
  app.add_subcommand("verify", "run the property suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (sc_spectrum->parsed()) {
    KernelProfile profile = KernelProfile::parse(sp_profile);
    TruncationPolicy policy = sp_K >= 0 ? TruncationPolicy::fixed_degree(sp_K)
                                        : TruncationPolicy::tail_tolerance(sp_eps);
    Spectrum sp = build_spectrum(profile, sp_d, policy);
    if (sp_out.empty()) {
      std::cout << sp.to_json() << "\n";
    } else {
      std::ofstream os(sp_out);
      if (!os) throw std::runtime_error("cannot open " + sp_out);
      os << sp.to_json() << "\n";
    }
    return 0;
  }
  if (sc_quant->parsed()) {
    KernelProfile profile = KernelProfile::parse(q_profile);
    Spectrum sp = build_spectrum(profile, q_d);
    ZonalTarget tg = build_target(sp, q_s, q_gamma, q_c0, q_rcap);
    for (double l : q_ls) q_lambdas.push_back(std::pow(q_d, -l));
    if (q_lambdas.empty()) {
      throw std::invalid_argument("provide --lambda or --l values");
    }
    std::ostringstream os;
    os << KeyQuantities::csv_header() << "\n";
    for (double lambda : q_lambdas) {
      os << key_quantities(sp, tg, lambda).csv_row(q_d) << "\n";
    }
    if (q_out.empty()) {
      std::cout << os.str();
    } else {
      std::ofstream f(q_out);
      if (!f) throw std::runtime_error("cannot open " + q_out);
      f << os.str();
    }
    return 0;
  }
  if (sc_rates->parsed()) {
    RateMethod method = parse_method(r_method);
    KernelFamily family = parse_family(r_family);
    if (r_figure) {
      if (r_out.empty()) throw std::invalid_argument("--figure needs --out");
      std::vector<double> s_list =
          r_s_list.empty() ? std::vector<double>{0.01, 0.5, 1.0, 1.5, 2.0, 2.5}
                           : r_s_list;
      emit_figure_data(s_list, r_gamma_max,
                       {KernelFamily::generic_inner, KernelFamily::ntk_relu2},
                       r_out);
      return 0;
    }
    if (r_curve) {
      auto curve =
          sample_rate_curve(r_s, 0.0, r_gamma_max, 0.05, family, method);
      std::cout << rate_curve_csv_header() << "\n";
      for (const auto& [gamma, answer] : curve) {
        std::cout << rate_curve_csv_row(r_s, family, method, gamma, answer)
                  << "\n";
      }
      return 0;
    }
    if (r_gamma <= 0.0) {
      throw std::invalid_argument("provide --gamma (or --curve/--figure)");
    }
    RateQuery q{r_s, r_gamma, family, method};
    RateAnswer a = method == RateMethod::krr ? krr_rate(q) : minimax_rate(q);
    print_rate_answer(std::cout, a, method);
    return 0;
  }
  if (sc_cond->parsed()) {
    KernelProfile profile = KernelProfile::parse(c_profile);
    Spectrum sp = build_spectrum(profile, c_d);
    ZonalTarget tg = build_target(sp, c_s, c_gamma);
    double lambda;
    if (opt_clam->count()) {
      lambda = c_lambda;
    } else if (opt_cl->count()) {
      lambda = std::pow(c_d, -c_l);
    } else {
      throw std::invalid_argument("provide --lambda or --l");
    }
    ConditionRegime regime =
        c_s < 1.0 ? ConditionRegime::sub_one : ConditionRegime::general;
    ConditionReport rep = check_approximation_conditions(
        sp, tg, lambda, c_n, regime, c_threshold, c_epsilon);
    for (size_t i = 0; i < rep.ratios.size(); ++i) {
      std::cout << rep.names[i] << " " << rep.ratios[i] << " "
                << (rep.pass[i] ? "pass" : "fail") << "\n";
    }
    std::cout << "all " << (rep.all_pass ? "pass" : "fail") << "\n";
    return 0;
  }
  if (sc_sim->parsed()) {
    if (sim_policy == "balance") {
      cfg.lambda_policy = LambdaPolicy::balance;
    } else if (sim_policy == "fixed") {
      cfg.lambda_policy = LambdaPolicy::fixed_exponent;
    } else if (sim_policy == "sweep") {
      cfg.lambda_policy = LambdaPolicy::sweep;
    } else {
      throw std::invalid_argument("unknown lambda policy: " + sim_policy);
    }
    std::vector<ExperimentRecord> records = run_sweep(cfg);
    if (cfg.out_path.empty()) write_records_csv(std::cout, records);
    long failed = 0;
    for (const auto& r : records) {
      if (!r.error.empty()) ++failed;
    }
    if (failed > 0) {
      std::cerr << failed << " of " << records.size() << " cells failed\n";
    }
    return 0;
  }
  if (sc_fit->parsed()) {
    std::vector<ExperimentRecord> records = read_records_csv(f_csv);
    if (!std::isnan(f_l)) records = filter_by_lambda_exponent(records, f_l);
    FitAxis axis = f_axis == "n" ? FitAxis::log_n : FitAxis::log_d;
    SlopeFit fit = fit_rate(records, axis, f_unverified);
    std::cout << "slope " << fit.slope << "\n";
    std::cout << "intercept " << fit.intercept << "\n";
    std::cout << "r_squared " << fit.r_squared << "\n";
    std::cout << "n_points " << fit.n_points << "\n";
    return 0;
  }
  // verify
  return run_verify() ? 0 : 2;
}

}  // namespace

int cli_main(int argc, char** argv) {
  try {
    return cli_run(argc, argv);
  } catch (const UnprovenRegionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace spherekrr
