#include "spherekrr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "spherekrr/rng.hpp"

namespace spherekrr {

namespace {

KernelFamily family_of(const std::string& profile_name) {
  return profile_name == "ntk-relu2" ? KernelFamily::ntk_relu2
                                     : KernelFamily::generic_inner;
}

long sample_size(const ExperimentConfig& cfg, int d) {
  return std::lround(cfg.c_n * std::pow(static_cast<double>(d), cfg.gamma));
}

struct LambdaChoice {
  double exponent = 0.0;
  bool log_correction = false;
};

std::vector<LambdaChoice> lambda_choices(const ExperimentConfig& cfg) {
  std::vector<LambdaChoice> out;
  switch (cfg.lambda_policy) {
    case LambdaPolicy::balance: {
      RateQuery q{cfg.s, cfg.gamma, family_of(cfg.profile), RateMethod::krr};
      RateAnswer a = krr_rate(q);
      out.push_back({a.lambda_exponent, a.lambda_log_correction});
      break;
    }
    case LambdaPolicy::fixed_exponent:
      out.push_back({cfg.fixed_l, false});
      break;
    case LambdaPolicy::sweep:
      for (double l : cfg.sweep_exponents) out.push_back({l, false});
      break;
  }
  if (out.empty()) {
    throw std::invalid_argument("no lambda exponents configured");
  }
  return out;
}

double lambda_value(const LambdaChoice& lc, int d) {
  double v = std::pow(static_cast<double>(d), -lc.exponent);
  if (lc.log_correction) v *= std::log(static_cast<double>(d));
  return v;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (d_grid.empty()) throw std::invalid_argument("d_grid is empty");
  for (size_t i = 1; i < d_grid.size(); ++i) {
    if (d_grid[i] <= d_grid[i - 1]) {
      throw std::invalid_argument("d_grid must be strictly increasing");
    }
  }
  if (d_grid.front() < 2) throw std::invalid_argument("d must be >= 2");
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (s <= 0.0 || gamma <= 0.0 || c_n <= 0.0 || sigma < 0.0) {
    throw std::invalid_argument("need s > 0, gamma > 0, c_n > 0, sigma >= 0");
  }
  for (int d : d_grid) {
    long n = std::lround(c_n * std::pow(static_cast<double>(d), gamma));
    if (n < 10) {
      throw std::invalid_argument("cell sample size below 10 at d = " +
                                  std::to_string(d));
    }
  }
  if (lambda_policy == LambdaPolicy::sweep && sweep_exponents.empty()) {
    throw std::invalid_argument("sweep policy needs sweep exponents");
  }
}

int default_thread_count() {
  if (const char* env = std::getenv("SPHEREKRR_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return std::max(1u, std::min(hw, 8u));
}

std::vector<ExperimentRecord> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  KernelProfile profile = KernelProfile::parse(cfg.profile);
  std::vector<LambdaChoice> lambdas = lambda_choices(cfg);

  const size_t n_d = cfg.d_grid.size();
  const size_t n_rep = static_cast<size_t>(cfg.replicates);
  const size_t n_lam = lambdas.size();

  // Shared per-d state built up front; immutable during the parallel phase.
  std::vector<Spectrum> spectra;
  std::vector<ZonalTarget> targets;
  std::vector<long> sizes;
  std::vector<std::vector<bool>> cond(n_d, std::vector<bool>(n_lam, false));
  ConditionRegime regime =
      cfg.s < 1.0 ? ConditionRegime::sub_one : ConditionRegime::general;
  for (size_t di = 0; di < n_d; ++di) {
    int d = cfg.d_grid[di];
    spectra.push_back(build_spectrum(profile, d));
    targets.push_back(
        build_target(spectra[di], cfg.s, cfg.gamma, cfg.c0, cfg.r_cap));
    sizes.push_back(sample_size(cfg, d));
    for (size_t li = 0; li < n_lam; ++li) {
      ConditionReport rep = check_approximation_conditions(
          spectra[di], targets[di], lambda_value(lambdas[li], d), sizes[di],
          regime);
      cond[di][li] = rep.all_pass;
    }
  }

  std::vector<ExperimentRecord> records(n_d * n_rep * n_lam);
  std::atomic<size_t> next_task{0};
  const size_t n_tasks = n_d * n_rep;
  auto worker = [&]() {
    while (true) {
      size_t task = next_task.fetch_add(1);
      if (task >= n_tasks) return;
      size_t di = task / n_rep;
      size_t rep = task % n_rep;
      int d = cfg.d_grid[di];
      long n = sizes[di];
      uint64_t cell_seed = mix_seed(cfg.seed, static_cast<uint64_t>(d),
                                    static_cast<uint64_t>(rep));
      for (size_t li = 0; li < n_lam; ++li) {
        size_t idx = (di * n_rep + rep) * n_lam + li;
        ExperimentRecord& r = records[idx];
        r.run_id = static_cast<long>(idx);
        r.d = d;
        r.n = n;
        r.gamma = cfg.gamma;
        r.s = cfg.s;
        r.lambda_exponent = lambdas[li].exponent;
        r.lambda = lambda_value(lambdas[li], d);
        r.seed = cell_seed;
        r.cond_pass = cond[di][li];
      }
      try {
        Design dz = sample_sphere(d, static_cast<int>(n), cell_seed);
        DesignEvaluator ev(profile, spectra[di], targets[di], dz);
        for (size_t li = 0; li < n_lam; ++li) {
          size_t idx = (di * n_rep + rep) * n_lam + li;
          ExperimentRecord& r = records[idx];
          RiskReport rep_out = ev.report(r.lambda, cfg.sigma);
          r.excess_risk = rep_out.excess_risk;
          r.bias2 = rep_out.bias2;
          r.variance = rep_out.variance;
          r.trunc_bound = rep_out.trunc_bound;
        }
      } catch (const std::exception& e) {
        double nan = std::numeric_limits<double>::quiet_NaN();
        for (size_t li = 0; li < n_lam; ++li) {
          size_t idx = (di * n_rep + rep) * n_lam + li;
          records[idx].excess_risk = nan;
          records[idx].bias2 = nan;
          records[idx].variance = nan;
          records[idx].trunc_bound = nan;
          records[idx].error = e.what();
        }
      }
    }
  };

  int n_threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
  n_threads = std::min<size_t>(n_threads, n_tasks);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (!cfg.out_path.empty()) write_records_csv(cfg.out_path, records);
  return records;
}

std::string records_csv_header() {
  return "run_id,d,n,gamma,s,lambda,lambda_exponent,seed,excess_risk,bias2,"
         "variance,trunc_bound,cond_pass";
}

void write_records_csv(std::ostream& os,
                       const std::vector<ExperimentRecord>& records) {
  os << records_csv_header() << "\n";
  os.precision(17);
  for (const auto& r : records) {
    os << r.run_id << "," << r.d << "," << r.n << "," << r.gamma << "," << r.s
       << "," << r.lambda << "," << r.lambda_exponent << "," << r.seed << ","
       << r.excess_risk << "," << r.bias2 << "," << r.variance << ","
       << r.trunc_bound << "," << (r.cond_pass ? 1 : 0) << "\n";
  }
}

void write_records_csv(const std::string& path,
                       const std::vector<ExperimentRecord>& records) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  write_records_csv(os, records);
}

std::vector<ExperimentRecord> read_records_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(is, line)) {
    throw std::invalid_argument("empty CSV file: " + path);
  }
  std::vector<ExperimentRecord> records;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string item;
    while (std::getline(ls, item, ',')) fields.push_back(item);
    if (fields.size() != 13) {
      throw std::invalid_argument("malformed CSV row: " + line);
    }
    ExperimentRecord r;
    r.run_id = std::stol(fields[0]);
    r.d = std::stoi(fields[1]);
    r.n = std::stol(fields[2]);
    r.gamma = std::stod(fields[3]);
    r.s = std::stod(fields[4]);
    r.lambda = std::stod(fields[5]);
    r.lambda_exponent = std::stod(fields[6]);
    r.seed = std::stoull(fields[7]);
    r.excess_risk = std::stod(fields[8]);
    r.bias2 = std::stod(fields[9]);
    r.variance = std::stod(fields[10]);
    r.trunc_bound = std::stod(fields[11]);
    r.cond_pass = std::stoi(fields[12]) != 0;
    records.push_back(r);
  }
  return records;
}

std::vector<ExperimentRecord> filter_by_lambda_exponent(
    const std::vector<ExperimentRecord>& records, double lambda_exponent) {
  std::vector<ExperimentRecord> out;
  for (const auto& r : records) {
    if (r.lambda_exponent == lambda_exponent) out.push_back(r);
  }
  return out;
}

SlopeFit fit_rate(const std::vector<ExperimentRecord>& records, FitAxis axis,
                  bool include_unverified) {
  std::vector<ExperimentRecord> kept;
  for (const auto& r : records) {
    if (!r.error.empty() || !std::isfinite(r.excess_risk)) continue;
    if (!r.cond_pass && !include_unverified) continue;
    kept.push_back(r);
  }
  if (kept.empty()) throw std::invalid_argument("no usable records");
  double l0 = kept.front().lambda_exponent;
  for (const auto& r : kept) {
    if (r.lambda_exponent != l0) {
      throw std::invalid_argument(
          "records mix lambda exponents; filter before fitting");
    }
  }
  std::vector<int> ds;
  for (const auto& r : kept) ds.push_back(r.d);
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  if (ds.size() < 3) throw std::invalid_argument("need >= 3 distinct d values");

  std::vector<double> xs, ys;
  for (int d : ds) {
    std::vector<double> risks;
    long n = 0;
    for (const auto& r : kept) {
      if (r.d == d) {
        risks.push_back(r.excess_risk);
        n = r.n;
      }
    }
    double m = median(risks);
    if (!(m > 0.0)) throw std::runtime_error("nonpositive median risk");
    xs.push_back(std::log(axis == FitAxis::log_d ? static_cast<double>(d)
                                                 : static_cast<double>(n)));
    ys.push_back(std::log(m));
  }
  int n_pts = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n_pts; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n_pts * sxx - sx * sx;
  if (denom == 0.0) throw std::runtime_error("degenerate abscissa");
  SlopeFit fit;
  fit.axis = axis;
  fit.n_points = n_pts;
  fit.slope = (n_pts * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n_pts;
  double ss_tot = 0, ss_res = 0;
  double ymean = sy / n_pts;
  for (int i = 0; i < n_pts; ++i) {
    double pred = fit.intercept + fit.slope * xs[i];
    ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
    ss_res += (ys[i] - pred) * (ys[i] - pred);
  }
  if (ss_tot == 0.0) throw std::runtime_error("degenerate fit: identical risks");
  fit.r_squared = std::max(0.0, 1.0 - ss_res / ss_tot);
  return fit;
}

void emit_figure_data(const std::vector<double>& s_list, double gamma_max,
                      const std::vector<KernelFamily>& families,
                      const std::string& out_path) {
  std::ofstream os(out_path);
  if (!os) throw std::runtime_error("cannot open output file: " + out_path);
  os << rate_curve_csv_header() << "\n";
  for (KernelFamily family : families) {
    for (double s : s_list) {
      for (RateMethod method : {RateMethod::krr, RateMethod::minimax}) {
        auto curve = sample_rate_curve(s, 0.0, gamma_max, 0.05, family, method);
        for (const auto& [gamma, answer] : curve) {
          os << rate_curve_csv_row(s, family, method, gamma, answer) << "\n";
        }
      }
    }
  }
}

}  // namespace spherekrr
