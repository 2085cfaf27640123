#include "spherekrr/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace spherekrr {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

// Golub-Welsch for a symmetric weight: monic recurrence coefficients b_n give
// the Jacobi matrix; nodes are its eigenvalues and the normalized weights are
// the squared first components of the eigenvectors (they sum to 1).
QuadratureRule golub_welsch_symmetric(const std::vector<double>& b, int order) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(order - 1);
  for (int i = 0; i + 1 < order; ++i) sub[i] = std::sqrt(b[i + 1]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = es.eigenvalues()[i];
    double q = es.eigenvectors()(0, i);
    rule.weights[i] = q * q;
  }
  return rule;
}

// Gauss-Legendre rule on [-1,1] with weights summing to 1.
QuadratureRule gauss_legendre(int order) {
  std::vector<double> b(order);
  for (int n = 1; n < order; ++n) {
    b[n] = static_cast<double>(n) * n / ((2.0 * n + 1.0) * (2.0 * n - 1.0));
  }
  return golub_welsch_symmetric(b, order);
}

// Rule for the same sphere measure via the substitution t = sin(phi); not
// polynomial-exact but geometrically convergent for profiles like the NTK
// whose only singularities sit at t = +-1 (they become analytic in phi).
QuadratureRule sphere_measure_rule_trig(int d, int order) {
  QuadratureRule gl = gauss_legendre(order);
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  double total = 0.0;
  for (int i = 0; i < order; ++i) {
    double phi = 0.5 * kPi * gl.nodes[i];
    rule.nodes[i] = std::sin(phi);
    double w = gl.weights[i] * std::exp((d - 1) * std::log(std::cos(phi)));
    rule.weights[i] = w;
    total += w;
  }
  for (double& w : rule.weights) w /= total;
  return rule;
}

double integrate_mu(const KernelProfile& profile, int d, int k,
                    const QuadratureRule& rule) {
  double acc = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * profile(rule.nodes[i]) *
           legendre_eval(d, k, rule.nodes[i]);
  }
  return acc;
}

QuadratureRule rule_for(const KernelProfile& profile, int d, int order) {
  if (profile.kind() == ProfileKind::NtkRelu2) {
    return sphere_measure_rule_trig(d, std::max(order, d / 2 + 64));
  }
  return sphere_measure_rule(d, order);
}

double clamp_eigenvalue(double mu, double scale, int d, int k) {
  if (mu < -1e-12) {
    std::cerr << "warning: clamping negative eigenvalue mu_" << k << " = " << mu
              << " at d = " << d << "\n";
  }
  (void)scale;
  return std::max(mu, 0.0);
}

}  // namespace

QuadratureRule sphere_measure_rule(int d, int order) {
  if (d < 2) throw std::invalid_argument("sphere dimension must be >= 2");
  if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
  double alpha = 0.5 * (d - 2);
  std::vector<double> b(order);
  for (int n = 1; n < order; ++n) {
    b[n] = n * (n + 2.0 * alpha) /
           ((2.0 * n + 2.0 * alpha + 1.0) * (2.0 * n + 2.0 * alpha - 1.0));
  }
  return golub_welsch_symmetric(b, order);
}

double multiplicity(int d, int k) {
  if (d < 2 || k < 0) throw std::invalid_argument("multiplicity needs d>=2, k>=0");
  if (k == 0) return 1.0;
  long double r = 1.0L;
  for (int i = 1; i < k; ++i) r *= static_cast<long double>(d - 1 + i) / i;
  r *= static_cast<long double>(2 * k + d - 1) / k;
  if (r <= 9007199254740992.0L) return static_cast<double>(std::llroundl(r));
  if (r > std::numeric_limits<double>::max()) {
    throw std::overflow_error("multiplicity exceeds double range");
  }
  return static_cast<double>(r);
}

double legendre_eval(int d, int k, double t) {
  if (std::abs(t) > 1.0 + 1e-12) {
    throw std::domain_error("legendre_eval argument |t| > 1");
  }
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = t;
  for (int j = 1; j < k; ++j) {
    double next = ((2.0 * j + d - 1.0) * t * cur - j * prev) / (j + d - 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> legendre_all(int d, int K, double t) {
  std::vector<double> out(K + 1);
  out[0] = 1.0;
  if (K >= 1) out[1] = t;
  for (int j = 1; j < K; ++j) {
    out[j + 1] = ((2.0 * j + d - 1.0) * t * out[j] - j * out[j - 1]) /
                 (j + d - 1.0);
  }
  return out;
}

double eigenvalue_quadrature(const KernelProfile& profile, int d, int k) {
  if (d < 2 || k < 0) throw std::invalid_argument("need d>=2, k>=0");
  int degree = profile.kind() == ProfileKind::PowerSeries
                   ? static_cast<int>(profile.stored_coefficients().size())
                   : 64;
  int order = std::max(64, (degree + k) / 2 + 8);
  double a = integrate_mu(profile, d, k, rule_for(profile, d, order));
  double b = integrate_mu(profile, d, k, rule_for(profile, d, order + 16));
  double scale = profile.sup_bound();
  if (std::abs(a - b) > 1e-10 * std::abs(b) + 1e-13 * scale) {
    throw std::runtime_error("eigenvalue quadrature did not converge");
  }
  return clamp_eigenvalue(b, scale, d, k);
}

TruncationPolicy TruncationPolicy::fixed_degree(int K) {
  TruncationPolicy p;
  p.fixed = true;
  p.K = K;
  return p;
}

TruncationPolicy TruncationPolicy::tail_tolerance(double eps) {
  TruncationPolicy p;
  p.eps_tail = eps;
  return p;
}

Spectrum build_spectrum(const KernelProfile& profile, int d,
                        const TruncationPolicy& policy) {
  if (d < 2) throw std::invalid_argument("sphere dimension must be >= 2");
  double phi1 = profile.sup_bound();
  double eps_abs = policy.eps_tail * phi1;

  auto compute = [&](int K) {
    Spectrum sp;
    sp.d = d;
    sp.K = K;
    sp.profile_name = profile.name();
    int degree = profile.kind() == ProfileKind::PowerSeries
                     ? static_cast<int>(profile.stored_coefficients().size())
                     : 64;
    int order = std::max(64, std::max(2 * K + 16, (degree + K) / 2 + 8));
    QuadratureRule rule = rule_for(profile, d, order);
    sp.mu.resize(K + 1);
    sp.mult.resize(K + 1);
    std::vector<double> phi_vals(rule.nodes.size());
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
      phi_vals[i] = profile(rule.nodes[i]);
    }
    // One recurrence pass per node covers all degrees at once.
    std::vector<double> acc(K + 1, 0.0);
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
      std::vector<double> pk = legendre_all(d, K, rule.nodes[i]);
      double wphi = rule.weights[i] * phi_vals[i];
      for (int k = 0; k <= K; ++k) acc[k] += wphi * pk[k];
    }
    double trace = 0.0;
    for (int k = 0; k <= K; ++k) {
      sp.mu[k] = clamp_eigenvalue(acc[k], phi1, d, k);
      sp.mult[k] = multiplicity(d, k);
      trace += sp.mu[k] * sp.mult[k];
    }
    sp.tail_mass = std::max(0.0, phi1 - trace);
    return sp;
  };

  if (policy.fixed) {
    if (policy.K < 0 || policy.K > policy.hard_cap) {
      throw std::invalid_argument("truncation degree out of range");
    }
    return compute(policy.K);
  }
  for (int K = 8;; K = std::min(2 * K, policy.hard_cap)) {
    Spectrum sp = compute(K);
    if (sp.tail_mass <= eps_abs) {
      // Drop trailing levels while the tail tolerance still holds, so exactly
      // truncated profiles (e.g. polynomials) report their true degree.
      while (sp.K > 0) {
        double c = sp.mu[sp.K] * sp.mult[sp.K];
        if (sp.tail_mass + c > eps_abs) break;
        sp.tail_mass += c;
        sp.mu.pop_back();
        sp.mult.pop_back();
        --sp.K;
      }
      return sp;
    }
    if (K == policy.hard_cap) {
      throw std::runtime_error("tail tolerance not met at truncation cap");
    }
  }
}

double zonal_kernel(const Spectrum& sp, int k, double t) {
  if (k < 0 || k > sp.K) throw std::invalid_argument("degree beyond truncation");
  return sp.mult[k] * legendre_eval(sp.d, k, t);
}

std::pair<double, double> mercer_reconstruct(const Spectrum& sp,
                                             const KernelProfile& profile,
                                             double t) {
  std::vector<double> pk = legendre_all(sp.d, sp.K, t);
  double value = 0.0;
  for (int k = 0; k <= sp.K; ++k) value += sp.mu[k] * sp.mult[k] * pk[k];
  return {value, std::abs(value - profile(t))};
}

double log_log_slope(const std::vector<double>& x,
                     const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0) || !(x[i] > 0.0)) continue;
    double lx = std::log(x[i]);
    double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("slope needs >= 2 positive points");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

DecaySlopeReport eigen_decay_check(const KernelProfile& profile, int p,
                                   const std::vector<int>& d_grid) {
  if (d_grid.size() < 3) throw std::invalid_argument("need >= 3 grid points");
  DecaySlopeReport report;
  report.d_grid = d_grid;
  std::vector<std::vector<double>> mu_rows(d_grid.size());
  for (size_t i = 0; i < d_grid.size(); ++i) {
    Spectrum sp = build_spectrum(profile, d_grid[i]);
    mu_rows[i] = sp.mu;
    double dom = 0.0;
    for (int k = p + 1; k <= sp.K; ++k) {
      if (sp.mu[p] > 0.0) dom = std::max(dom, sp.mu[k] / sp.mu[p]);
    }
    report.domination.push_back(dom);
  }
  std::vector<double> dx(d_grid.begin(), d_grid.end());
  for (int k = 0; k <= p + 1; ++k) {
    std::vector<double> mus;
    int positives = 0;
    for (auto& row : mu_rows) {
      double mu = k < static_cast<int>(row.size()) ? row[k] : 0.0;
      // Quadrature roundoff leaves tiny positive values on levels that
      // carry no spectrum; treat those as exact zeros.
      double floor = 1e-12 * *std::max_element(row.begin(), row.end());
      if (mu <= floor) mu = 0.0;
      if (mu > 0.0) ++positives;
      mus.push_back(mu);
    }
    report.slopes.push_back(
        positives >= 2 ? log_log_slope(dx, mus)
                       : std::numeric_limits<double>::quiet_NaN());
    report.expected.push_back(-static_cast<double>(k));
  }
  return report;
}

std::string Spectrum::to_json() const {
  nlohmann::json j;
  j["d"] = d;
  j["K"] = K;
  j["mu"] = mu;
  j["mult"] = mult;
  j["tail_mass"] = tail_mass;
  j["profile_name"] = profile_name;
  return j.dump(2);
}

}  // namespace spherekrr
