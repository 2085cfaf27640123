#pragma once

#include <string>
#include <utility>
#include <vector>

#include "spherekrr/kernel.hpp"

namespace spherekrr {

// Mercer eigen-structure of an inner-product kernel on S^d: per-degree
// eigenvalues mu_k with multiplicities N(d,k), truncated at degree K.
struct Spectrum {
  int d = 0;
  int K = 0;
  std::vector<double> mu;    // mu_0 .. mu_K
  std::vector<double> mult;  // N(d,0) .. N(d,K)
  double tail_mass = 0.0;    // Phi(1) - sum mu_k N(d,k), clamped at 0
  std::string profile_name;

  std::string to_json() const;
};

struct TruncationPolicy {
  static TruncationPolicy fixed_degree(int K);
  static TruncationPolicy tail_tolerance(double eps);

  bool fixed = false;
  int K = 0;
  double eps_tail = 1e-10;  // relative to Phi(1)
  int hard_cap = 200;
};

// Dimension of degree-k spherical harmonics on S^d. Exact integer value when
// representable; larger values are returned in floating point.
double multiplicity(int d, int k);

// Gegenbauer/Legendre polynomial for S^d (ambient dimension d+1), normalized
// so P_k(1) = 1, via the three-term recurrence.
double legendre_eval(int d, int k, double t);

// P_0(t) .. P_K(t) in one recurrence pass.
std::vector<double> legendre_all(int d, int K, double t);

// mu_k = (omega_{d-1}/omega_d) int Phi(t) P_k(t) (1-t^2)^{(d-2)/2} dt,
// with a two-order accuracy check.
double eigenvalue_quadrature(const KernelProfile& profile, int d, int k);

Spectrum build_spectrum(const KernelProfile& profile, int d,
                        const TruncationPolicy& policy = TruncationPolicy());

// Z_{k,d}(t) = N(d,k) P_k(t) (addition formula).
double zonal_kernel(const Spectrum& sp, int k, double t);

// (sum_k mu_k Z_{k,d}(t), |value - Phi(t)|)
std::pair<double, double> mercer_reconstruct(const Spectrum& sp,
                                             const KernelProfile& profile,
                                             double t);

struct DecaySlopeReport {
  std::vector<double> slopes;         // slope of log mu_k vs log d, k = 0..p+1
  std::vector<double> expected;       // -k
  std::vector<double> domination;     // max_{k>p} mu_k/mu_p at each d
  std::vector<int> d_grid;
};

DecaySlopeReport eigen_decay_check(const KernelProfile& profile, int p,
                                   const std::vector<int>& d_grid);

// Normalized Gauss quadrature rules (weights sum to 1) used by the
// eigenvalue integrals; exposed for reuse in grid suprema.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Rule for the probability measure proportional to (1-t^2)^{(d-2)/2} on
// [-1,1]; exact for polynomial integrands of degree <= 2*order-1.
QuadratureRule sphere_measure_rule(int d, int order);

// Least-squares slope of log(y) against log(x); ignores nonpositive y.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace spherekrr
