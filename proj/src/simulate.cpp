#include "spherekrr/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "spherekrr/rng.hpp"

namespace spherekrr {

namespace {

Eigen::VectorXd pole_inner_products(const ZonalTarget& tg, const Design& dz) {
  Eigen::Map<const Eigen::VectorXd> pole(tg.pole.data(), tg.pole.size());
  Eigen::VectorXd t = dz.X * pole;
  return t.cwiseMax(-1.0).cwiseMin(1.0);
}

// w_i = sum_k mu_k coeff_k sqrt(N(d,k)) P_k(<x_i, x0>); the L2 inner product
// of k(x_i, .) with the zonal function having level coefficients coeff_k.
Eigen::VectorXd zonal_section_inner(const Spectrum& sp, const ZonalTarget& tg,
                                    const Design& dz,
                                    const std::vector<double>& coeffs) {
  Eigen::VectorXd t = pole_inner_products(tg, dz);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(t.size());
  int kmax = static_cast<int>(coeffs.size()) - 1;
  for (int i = 0; i < t.size(); ++i) {
    std::vector<double> pk = legendre_all(sp.d, kmax, t[i]);
    double acc = 0.0;
    for (int k = 0; k <= kmax; ++k) {
      if (coeffs[k] != 0.0) {
        acc += sp.mu[k] * coeffs[k] * std::sqrt(sp.mult[k]) * pk[k];
      }
    }
    w[i] = acc;
  }
  return w;
}

Eigen::VectorXd target_values(const ZonalTarget& tg, const Spectrum& sp,
                              const Design& dz) {
  Eigen::VectorXd t = pole_inner_products(tg, dz);
  Eigen::VectorXd y(t.size());
  for (int i = 0; i < t.size(); ++i) y[i] = eval_target_t(tg, sp, t[i]);
  return y;
}

struct RidgeSolve {
  Eigen::VectorXd alpha;
  double residual = 0.0;
  bool jitter_used = false;
};

RidgeSolve solve_ridge(const Eigen::MatrixXd& kmat, double n_lambda,
                       const Eigen::VectorXd& y, double scale) {
  Eigen::MatrixXd A = kmat;
  A.diagonal().array() += n_lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  RidgeSolve out;
  if (llt.info() != Eigen::Success) {
    A.diagonal().array() += 1e-12 * scale;
    llt.compute(A);
    out.jitter_used = true;
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("ridge system factorization failed");
    }
  }
  out.alpha = llt.solve(y);
  // One step of iterative refinement.
  Eigen::VectorXd r = y - A * out.alpha;
  out.alpha += llt.solve(r);
  double ynorm = y.norm();
  out.residual = ynorm > 0.0 ? (y - A * out.alpha).norm() / ynorm : 0.0;
  return out;
}

double l1_norm(const Eigen::VectorXd& v) { return v.cwiseAbs().sum(); }

RiskValue risk_from_alpha(const Eigen::VectorXd& alpha,
                          const Eigen::MatrixXd& mmat, const Spectrum& sp,
                          const ZonalTarget& tg, const Design& dz) {
  std::vector<double> coeffs(tg.beta.begin(), tg.beta.end());
  Eigen::VectorXd g = zonal_section_inner(sp, tg, dz, coeffs);
  double value = alpha.dot(mmat * alpha) - 2.0 * alpha.dot(g) +
                 tg.l2_norm_sq();
  RiskValue rv;
  rv.value = std::max(0.0, value);
  double a1 = l1_norm(alpha);
  rv.trunc_bound = sp.tail_mass * a1 * a1;
  if (rv.trunc_bound > 0.01 * rv.value && rv.value > 0.0) {
    std::cerr << "warning: truncation bound " << rv.trunc_bound
              << " exceeds 1% of excess risk " << rv.value << "\n";
  }
  return rv;
}

}  // namespace

Design sample_sphere(int d, int n, uint64_t seed) {
  if (d < 2 || n < 1) throw std::invalid_argument("need d >= 2 and n >= 1");
  Design dz;
  dz.d = d;
  dz.seed = seed;
  dz.X.resize(n, d + 1);
  Rng rng(mix_seed(seed, 0x5EEDu));
  for (int i = 0; i < n; ++i) {
    double norm_sq = 0.0;
    do {
      for (int j = 0; j <= d; ++j) {
        double g = rng.next_gaussian();
        dz.X(i, j) = g;
      }
      norm_sq = dz.X.row(i).squaredNorm();
    } while (norm_sq < 1e-24);
    dz.X.row(i) /= std::sqrt(norm_sq);
  }
  dz.gram_t = dz.X * dz.X.transpose();
  dz.gram_t = dz.gram_t.cwiseMax(-1.0).cwiseMin(1.0);
  dz.gram_t.diagonal().setOnes();
  return dz;
}

Eigen::MatrixXd kernel_matrix(const KernelProfile& profile, const Design& dz) {
  int n = dz.n();
  Eigen::MatrixXd kmat(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double v = profile(dz.gram_t(i, j));
      kmat(i, j) = v;
      kmat(j, i) = v;
    }
  }
  return kmat;
}

Eigen::MatrixXd mercer_m_matrix(const Spectrum& sp,
                                const Eigen::MatrixXd& gram_t) {
  int n = static_cast<int>(gram_t.rows());
  int K = sp.K;
  std::vector<double> coeff(K + 1);
  for (int k = 0; k <= K; ++k) coeff[k] = sp.mu[k] * sp.mu[k] * sp.mult[k];
  Eigen::MatrixXd mmat(n, n);
  int d = sp.d;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double t = gram_t(i, j);
      double prev = 1.0;
      double cur = t;
      double acc = coeff[0];
      if (K >= 1) acc += coeff[1] * t;
      for (int k = 1; k < K; ++k) {
        double next = ((2.0 * k + d - 1.0) * t * cur - k * prev) /
                      (k + d - 1.0);
        prev = cur;
        cur = next;
        acc += coeff[k + 1] * next;
      }
      mmat(i, j) = acc;
      mmat(j, i) = acc;
    }
  }
  return mmat;
}

KrrFit fit_krr(const KernelProfile& profile, const Spectrum& sp,
               const ZonalTarget& tg, const Design& dz, double lambda,
               double noise_sigma, uint64_t seed) {
  if (lambda <= 0.0) throw std::invalid_argument("lambda must be > 0");
  int n = dz.n();
  Eigen::VectorXd y = target_values(tg, sp, dz);
  if (noise_sigma > 0.0) {
    Rng rng(mix_seed(seed, 0xA015Eu));
    for (int i = 0; i < n; ++i) y[i] += noise_sigma * rng.next_gaussian();
  }
  Eigen::MatrixXd kmat = kernel_matrix(profile, dz);
  RidgeSolve rs = solve_ridge(kmat, n * lambda, y, profile.sup_bound());
  KrrFit fit;
  fit.alpha = std::move(rs.alpha);
  fit.lambda = lambda;
  fit.residual = rs.residual;
  fit.jitter_used = rs.jitter_used;
  return fit;
}

RiskValue excess_risk_analytic(const KrrFit& fit, const Spectrum& sp,
                               const ZonalTarget& tg, const Design& dz) {
  Eigen::MatrixXd mmat = mercer_m_matrix(sp, dz.gram_t);
  return risk_from_alpha(fit.alpha, mmat, sp, tg, dz);
}

std::pair<double, double> excess_risk_montecarlo(
    const KrrFit& fit, const KernelProfile& profile, const Spectrum& sp,
    const ZonalTarget& tg, const Design& dz, int m_test, uint64_t seed) {
  if (m_test < 100) throw std::invalid_argument("m_test must be >= 100");
  int dim = dz.d + 1;
  Rng rng(mix_seed(seed, 0x7E57u));
  Eigen::Map<const Eigen::VectorXd> pole(tg.pole.data(), tg.pole.size());
  Eigen::VectorXd z(dim);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int m = 0; m < m_test; ++m) {
    double norm_sq = 0.0;
    do {
      for (int j = 0; j < dim; ++j) z[j] = rng.next_gaussian();
      norm_sq = z.squaredNorm();
    } while (norm_sq < 1e-24);
    z /= std::sqrt(norm_sq);
    Eigen::VectorXd tz = (dz.X * z).cwiseMax(-1.0).cwiseMin(1.0);
    double fhat = 0.0;
    for (int i = 0; i < tz.size(); ++i) fhat += fit.alpha[i] * profile(tz[i]);
    double tpole = std::min(1.0, std::max(-1.0, z.dot(pole)));
    double diff = fhat - eval_target_t(tg, sp, tpole);
    double v = diff * diff;
    sum += v;
    sum_sq += v * v;
  }
  double mean = sum / m_test;
  double var = std::max(0.0, sum_sq / m_test - mean * mean);
  return {mean, std::sqrt(var / m_test)};
}

RiskReport bias_variance(const KernelProfile& profile, const Spectrum& sp,
                         const ZonalTarget& tg, const Design& dz,
                         double lambda, double noise_sigma) {
  if (lambda <= 0.0) throw std::invalid_argument("lambda must be > 0");
  int n = dz.n();
  Eigen::MatrixXd kmat = kernel_matrix(profile, dz);
  Eigen::MatrixXd mmat = mercer_m_matrix(sp, dz.gram_t);
  Eigen::VectorXd y0 = target_values(tg, sp, dz);
  RidgeSolve rs = solve_ridge(kmat, n * lambda, y0, profile.sup_bound());
  RiskValue bias = risk_from_alpha(rs.alpha, mmat, sp, tg, dz);

  Eigen::MatrixXd A = kmat;
  A.diagonal().array() += n * lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  Eigen::MatrixXd s1 = llt.solve(mmat);
  double trace = llt.solve(s1.transpose()).trace();

  RiskReport rep;
  rep.bias2 = bias.value;
  rep.variance = std::max(0.0, noise_sigma * noise_sigma * trace);
  rep.excess_risk = rep.bias2 + rep.variance;
  rep.trunc_bound = bias.trunc_bound;
  rep.n_noise_draws = 0;
  return rep;
}

VarianceMonotonicityReport variance_monotonicity_check(
    const KernelProfile& profile, const Spectrum& sp, const Design& dz,
    std::vector<double> lambda_list, double noise_sigma) {
  if (lambda_list.size() < 2) {
    throw std::invalid_argument("need at least two lambdas");
  }
  if (!std::is_sorted(lambda_list.begin(), lambda_list.end())) {
    throw std::invalid_argument("lambda list must be ascending");
  }
  int n = dz.n();
  Eigen::MatrixXd kmat = kernel_matrix(profile, dz);
  Eigen::MatrixXd mmat = mercer_m_matrix(sp, dz.gram_t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kmat);
  Eigen::MatrixXd mu = mmat * es.eigenvectors();
  Eigen::VectorXd bdiag(n);
  for (int i = 0; i < n; ++i) {
    bdiag[i] = es.eigenvectors().col(i).dot(mu.col(i));
  }
  VarianceMonotonicityReport rep;
  rep.lambdas = lambda_list;
  double s2 = noise_sigma * noise_sigma;
  for (double lambda : lambda_list) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double denom = es.eigenvalues()[i] + n * lambda;
      acc += bdiag[i] / (denom * denom);
    }
    rep.variances.push_back(s2 * acc);
  }
  rep.monotone = true;
  for (size_t i = 1; i < rep.variances.size(); ++i) {
    if (rep.variances[i] > rep.variances[i - 1] * (1.0 + 1e-12) + 1e-300) {
      rep.monotone = false;
    }
  }
  return rep;
}

double population_distance(const KernelProfile& profile, const Spectrum& sp,
                           const ZonalTarget& tg, const Design& dz,
                           double lambda) {
  int n = dz.n();
  Eigen::MatrixXd kmat = kernel_matrix(profile, dz);
  Eigen::VectorXd y0 = target_values(tg, sp, dz);
  RidgeSolve rs = solve_ridge(kmat, n * lambda, y0, profile.sup_bound());
  Eigen::MatrixXd mmat = mercer_m_matrix(sp, dz.gram_t);
  std::vector<double> c(tg.q + 1, 0.0);
  double flam_sq = 0.0;
  for (int k = 0; k <= tg.q; ++k) {
    c[k] = sp.mu[k] / (sp.mu[k] + lambda) * tg.beta[k];
    flam_sq += c[k] * c[k];
  }
  Eigen::VectorXd w = zonal_section_inner(sp, tg, dz, c);
  double dist = rs.alpha.dot(mmat * rs.alpha) - 2.0 * rs.alpha.dot(w) +
                flam_sq;
  return std::max(0.0, dist);
}

DesignEvaluator::DesignEvaluator(const KernelProfile& profile,
                                 const Spectrum& sp, const ZonalTarget& tg,
                                 const Design& dz)
    : n_(dz.n()), tail_mass_(sp.tail_mass), fstar_sq_(tg.l2_norm_sq()) {
  Eigen::MatrixXd kmat = kernel_matrix(profile, dz);
  Eigen::MatrixXd mmat = mercer_m_matrix(sp, dz.gram_t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kmat);
  U_ = es.eigenvectors();
  evals_ = es.eigenvalues();
  B_ = U_.transpose() * mmat * U_;
  c_ = U_.transpose() * target_values(tg, sp, dz);
  std::vector<double> coeffs(tg.beta.begin(), tg.beta.end());
  v_ = U_.transpose() * zonal_section_inner(sp, tg, dz, coeffs);
}

RiskReport DesignEvaluator::report(double lambda, double noise_sigma) const {
  if (lambda <= 0.0) throw std::invalid_argument("lambda must be > 0");
  Eigen::VectorXd a(n_);
  Eigen::VectorXd inv_sq(n_);
  for (int i = 0; i < n_; ++i) {
    double denom = evals_[i] + n_ * lambda;
    a[i] = c_[i] / denom;
    inv_sq[i] = 1.0 / (denom * denom);
  }
  RiskReport rep;
  rep.bias2 = std::max(0.0, a.dot(B_ * a) - 2.0 * a.dot(v_) + fstar_sq_);
  rep.variance = std::max(
      0.0, noise_sigma * noise_sigma * B_.diagonal().dot(inv_sq));
  rep.excess_risk = rep.bias2 + rep.variance;
  double a1 = l1_norm(U_ * a);
  rep.trunc_bound = tail_mass_ * a1 * a1;
  rep.n_noise_draws = 0;
  return rep;
}

}  // namespace spherekrr
