#include "spherekrr/quantities.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace spherekrr {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

double kappa_sq(const Spectrum& sp) {
  double trace = 0.0;
  for (int k = 0; k <= sp.K; ++k) trace += sp.mu[k] * sp.mult[k];
  return trace + sp.tail_mass;
}

}  // namespace

double ZonalTarget::l2_norm_sq() const {
  double acc = 0.0;
  for (double b : beta) acc += b * b;
  return acc;
}

ZonalTarget build_target(const Spectrum& sp, double s, double gamma, double c0,
                         double r_cap, std::vector<double> pole) {
  if (s <= 0.0 || gamma <= 0.0) {
    throw std::invalid_argument("build_target needs s > 0 and gamma > 0");
  }
  if (c0 < 0.0 || r_cap <= 0.0) {
    throw std::invalid_argument("build_target needs c0 >= 0 and r_cap > 0");
  }
  // q: smallest integer > gamma whose eigenvalue is nonzero.
  int q = static_cast<int>(std::floor(gamma)) + 1;
  while (q <= sp.K && sp.mu[q] <= 0.0) ++q;
  if (q > sp.K) {
    throw std::invalid_argument("spectrum truncated below the target degree q");
  }
  ZonalTarget tg;
  tg.s = s;
  tg.gamma = gamma;
  tg.c0 = c0;
  tg.q = q;
  tg.beta.assign(q + 1, 0.0);
  tg.level_mass.assign(q + 1, 0.0);
  double norm_sq = 0.0;
  for (int k = 0; k <= q; ++k) {
    if (sp.mu[k] <= 0.0) continue;
    tg.beta[k] = std::sqrt(c0) * std::pow(sp.mu[k], 0.5 * s);
    tg.level_mass[k] = c0;
    norm_sq += c0;
  }
  if (norm_sq > r_cap * r_cap) {
    throw std::invalid_argument("level mass c0 conflicts with the norm cap");
  }
  tg.hs_norm = std::sqrt(norm_sq);
  if (pole.empty()) {
    pole.assign(sp.d + 1, 0.0);
    pole[0] = 1.0;
  }
  if (static_cast<int>(pole.size()) != sp.d + 1) {
    throw std::invalid_argument("pole dimension mismatch");
  }
  tg.pole = std::move(pole);
  return tg;
}

double eval_target_t(const ZonalTarget& tg, const Spectrum& sp, double t) {
  std::vector<double> pk = legendre_all(sp.d, tg.q, t);
  double acc = 0.0;
  for (int k = 0; k <= tg.q; ++k) {
    if (tg.beta[k] != 0.0) acc += tg.beta[k] * std::sqrt(sp.mult[k]) * pk[k];
  }
  return acc;
}

double eval_target(const ZonalTarget& tg, const Spectrum& sp,
                   const std::vector<double>& x) {
  if (x.size() != tg.pole.size()) {
    throw std::invalid_argument("point dimension mismatch");
  }
  double norm_sq = 0.0;
  double t = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    norm_sq += x[i] * x[i];
    t += x[i] * tg.pole[i];
  }
  if (std::abs(norm_sq - 1.0) > 1e-10) {
    throw std::invalid_argument("point is not on the unit sphere");
  }
  return eval_target_t(tg, sp, std::min(1.0, std::max(-1.0, t)));
}

double zonal_grid_sup(const Spectrum& sp, const std::vector<double>& coeffs,
                      int grid_points) {
  int kmax = static_cast<int>(coeffs.size()) - 1;
  if (kmax < 0) return 0.0;
  double sup = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    double t = std::cos(kPi * i / (grid_points - 1));
    std::vector<double> pk = legendre_all(sp.d, kmax, t);
    double acc = 0.0;
    for (int k = 0; k <= kmax; ++k) {
      if (coeffs[k] != 0.0) acc += coeffs[k] * std::sqrt(sp.mult[k]) * pk[k];
    }
    sup = std::max(sup, std::abs(acc));
  }
  return sup;
}

KeyQuantities key_quantities(const Spectrum& sp, const ZonalTarget& tg,
                             double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("lambda must be > 0");
  KeyQuantities kq;
  kq.lambda = lambda;
  for (int k = 0; k <= sp.K; ++k) {
    double r = sp.mu[k] / (sp.mu[k] + lambda);
    kq.n1 += sp.mult[k] * r;
    kq.n2 += sp.mult[k] * r * r;
  }
  double k2 = kappa_sq(sp);
  std::vector<double> m1_coeffs(tg.q + 1, 0.0);
  for (int k = 0; k <= tg.q; ++k) {
    double b = tg.beta[k];
    if (b == 0.0) continue;
    double denom = sp.mu[k] + lambda;
    double rl = lambda / denom;
    kq.m2 += rl * rl * b * b;
    kq.q1 += lambda * lambda / (sp.mu[k] * denom) * b * b;
    kq.q2 += k2 * k2 * sp.mu[k] / (denom * denom) * b * b;
    m1_coeffs[k] = rl * b;
  }
  kq.m1_zonal = zonal_grid_sup(sp, m1_coeffs);
  return kq;
}

std::string KeyQuantities::csv_header() {
  return "d,lambda,n1,n2,m2,q1,q2,m1_zonal";
}

std::string KeyQuantities::csv_row(int d) const {
  std::ostringstream os;
  os.precision(17);
  os << d << "," << lambda << "," << n1 << "," << n2 << "," << m2 << ","
     << q1 << "," << q2 << "," << m1_zonal;
  return os.str();
}

ConditionReport check_approximation_conditions(const Spectrum& sp,
                                               const ZonalTarget& tg,
                                               double lambda, long n,
                                               ConditionRegime regime,
                                               double threshold,
                                               double epsilon) {
  if (n < 2) throw std::invalid_argument("need n >= 2");
  KeyQuantities kq = key_quantities(sp, tg, lambda);
  double ln_n = std::log(static_cast<double>(n));
  ConditionReport rep;
  rep.regime = regime;
  rep.threshold = threshold;
  rep.names.push_back("n1_log_over_n");
  rep.ratios.push_back(kq.n1 * ln_n / n);
  rep.names.push_back("n1_sq_log_over_n_n2");
  rep.ratios.push_back(kq.n1 * kq.n1 * ln_n / (n * kq.n2));
  double m2_sqrt = std::sqrt(kq.m2);
  double sup_term;
  if (regime == ConditionRegime::general) {
    sup_term = kq.m1_zonal;
    rep.names.push_back("sqrt_n1_m1_over_n_sqrt_m2");
  } else {
    // 0 < s < 1: the sup-norm proxy is the regularized population function.
    std::vector<double> coeffs(tg.q + 1, 0.0);
    for (int k = 0; k <= tg.q; ++k) {
      coeffs[k] = sp.mu[k] / (sp.mu[k] + lambda) * tg.beta[k];
    }
    sup_term = zonal_grid_sup(sp, coeffs);
    rep.names.push_back("sqrt_n1_flambda_sup_over_n_sqrt_m2");
  }
  rep.ratios.push_back(m2_sqrt > 0.0
                           ? std::sqrt(kq.n1) * sup_term / (n * m2_sqrt)
                           : 0.0);
  if (regime == ConditionRegime::sub_one) {
    double npow = std::pow(static_cast<double>(n), 0.5 * (1.0 - tg.s) + epsilon);
    rep.names.push_back("sqrt_n1_npow_over_n_sqrt_m2");
    rep.ratios.push_back(
        m2_sqrt > 0.0 ? std::sqrt(kq.n1) * npow / (n * m2_sqrt) : 0.0);
  }
  rep.all_pass = true;
  for (double r : rep.ratios) {
    bool ok = r < threshold;
    rep.pass.push_back(ok);
    rep.all_pass = rep.all_pass && ok;
  }
  return rep;
}

QuantitySlopeReport quantity_rate_probe(const KernelProfile& profile, double s,
                                        double l, int p,
                                        const std::vector<int>& d_grid) {
  if (d_grid.size() < 3) throw std::invalid_argument("need >= 3 grid points");
  if (!(p <= l && l <= p + 1)) {
    throw std::invalid_argument("need p <= l <= p+1");
  }
  QuantitySlopeReport rep;
  rep.d_grid = d_grid;
  rep.s = s;
  rep.l = l;
  rep.p = p;
  std::vector<double> dx(d_grid.begin(), d_grid.end());
  std::vector<double> n1v, n2v, m2v, q1v, q2v;
  for (int d : d_grid) {
    Spectrum sp = build_spectrum(profile, d);
    ZonalTarget tg = build_target(sp, s, p + 0.5);
    KeyQuantities kq = key_quantities(sp, tg, std::pow(d, -l));
    n1v.push_back(kq.n1);
    n2v.push_back(kq.n2);
    m2v.push_back(kq.m2);
    q1v.push_back(kq.q1);
    q2v.push_back(kq.q2);
  }
  rep.n1_slope = log_log_slope(dx, n1v);
  rep.n2_slope = log_log_slope(dx, n2v);
  rep.m2_slope = log_log_slope(dx, m2v);
  rep.q1_slope = log_log_slope(dx, q1v);
  rep.q2_slope = log_log_slope(dx, q2v);
  double st = std::min(s, 2.0);
  rep.n1_theory = l;
  rep.n2_theory = std::max(static_cast<double>(p), 2 * l - (p + 1));
  rep.m2_theory = -std::min(2 * l - (2 - st) * p, (p + 1) * st);
  rep.q1_theory = -std::min(2 * l - (2 - st) * p, l + (st - 1) * (p + 1));
  rep.q2_theory =
      s <= 1.0 ? std::max((1 - s) * p, 2 * l - (1 + s) * (p + 1))
               : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

}  // namespace spherekrr
