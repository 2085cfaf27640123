#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "spherekrr/quantities.hpp"

namespace spherekrr {

struct Design {
  int d = 0;
  Eigen::MatrixXd X;       // n x (d+1) unit rows
  Eigen::MatrixXd gram_t;  // pairwise inner products
  uint64_t seed = 0;

  int n() const { return static_cast<int>(X.rows()); }
};

Design sample_sphere(int d, int n, uint64_t seed);

Eigen::MatrixXd kernel_matrix(const KernelProfile& profile, const Design& dz);

// M_ij = sum_k mu_k^2 Z_{k,d}(<x_i,x_j>); the Gram matrix of the kernel
// sections in L2, used by every analytic risk formula.
Eigen::MatrixXd mercer_m_matrix(const Spectrum& sp,
                                const Eigen::MatrixXd& gram_t);

struct KrrFit {
  Eigen::VectorXd alpha;
  double lambda = 0.0;
  double residual = 0.0;  // relative residual of the linear solve
  bool jitter_used = false;
};

// alpha = (K + n lambda I)^{-1} y with y_i = f*(x_i) + sigma g_i.
KrrFit fit_krr(const KernelProfile& profile, const Spectrum& sp,
               const ZonalTarget& tg, const Design& dz, double lambda,
               double noise_sigma, uint64_t seed);

struct RiskValue {
  double value = 0.0;
  double trunc_bound = 0.0;
};

// ||f_hat - f*||_{L2}^2 via the Mercer series and the addition formula.
RiskValue excess_risk_analytic(const KrrFit& fit, const Spectrum& sp,
                               const ZonalTarget& tg, const Design& dz);

// Monte Carlo oracle: mean of (f_hat(z) - f*(z))^2 on fresh uniform points.
std::pair<double, double> excess_risk_montecarlo(
    const KrrFit& fit, const KernelProfile& profile, const Spectrum& sp,
    const ZonalTarget& tg, const Design& dz, int m_test, uint64_t seed);

struct RiskReport {
  double excess_risk = 0.0;
  double bias2 = 0.0;
  double variance = 0.0;
  double trunc_bound = 0.0;
  int n_noise_draws = 0;  // 0 = analytic noise average
};

// Fixed-design decomposition: bias2 from the noise-free fit, variance from
// the trace formula; excess_risk = bias2 + variance by construction.
RiskReport bias_variance(const KernelProfile& profile, const Spectrum& sp,
                         const ZonalTarget& tg, const Design& dz,
                         double lambda, double noise_sigma);

struct VarianceMonotonicityReport {
  std::vector<double> lambdas;
  std::vector<double> variances;
  bool monotone = false;
};

VarianceMonotonicityReport variance_monotonicity_check(
    const KernelProfile& profile, const Spectrum& sp, const Design& dz,
    std::vector<double> lambda_list, double noise_sigma);

// ||f~_lambda - f_lambda||_{L2}^2 where f~ is the noise-free fit and
// f_lambda is the population-regularized target with level coefficients
// mu_k/(mu_k+lambda) beta_k.
double population_distance(const KernelProfile& profile, const Spectrum& sp,
                           const ZonalTarget& tg, const Design& dz,
                           double lambda);

// Shares one eigendecomposition of the kernel matrix across many lambdas,
// so a lambda sweep on a fixed design costs O(n^2) per point after setup.
class DesignEvaluator {
 public:
  DesignEvaluator(const KernelProfile& profile, const Spectrum& sp,
                  const ZonalTarget& tg, const Design& dz);

  RiskReport report(double lambda, double noise_sigma) const;
  int n() const { return n_; }

 private:
  int n_;
  double tail_mass_;
  double fstar_sq_;
  Eigen::MatrixXd U_;
  Eigen::VectorXd evals_;   // eigenvalues of the kernel matrix
  Eigen::MatrixXd B_;       // U^T M U
  Eigen::VectorXd c_;       // U^T f*(X)
  Eigen::VectorXd v_;       // U^T g, g_i = <k(x_i,.), f*>_{L2}
};

}  // namespace spherekrr
