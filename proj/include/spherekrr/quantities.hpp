#pragma once

#include <string>
#include <vector>

#include "spherekrr/spectrum.hpp"

namespace spherekrr {

// Source-condition target: one zonal harmonic per degree up to q, with level
// mass mu_k^{-s} beta_k^2 saturated at c0 on every level carrying spectrum.
struct ZonalTarget {
  double s = 1.0;
  double gamma = 1.0;
  double c0 = 1.0;
  int q = 0;
  std::vector<double> beta;        // beta_0 .. beta_q
  std::vector<double> level_mass;  // mu_k^{-s} beta_k^2
  double hs_norm = 0.0;
  std::vector<double> pole;        // unit vector in R^{d+1}

  double l2_norm_sq() const;  // sum beta_k^2
};

ZonalTarget build_target(const Spectrum& sp, double s, double gamma,
                         double c0 = 1.0, double r_cap = 10.0,
                         std::vector<double> pole = {});

// f*(x) = sum_k beta_k sqrt(N(d,k)) P_k(<x, x0>)
double eval_target(const ZonalTarget& tg, const Spectrum& sp,
                   const std::vector<double>& x);
double eval_target_t(const ZonalTarget& tg, const Spectrum& sp, double t);

struct KeyQuantities {
  double lambda = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  double m2 = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double m1_zonal = 0.0;

  static std::string csv_header();
  std::string csv_row(int d) const;
};

KeyQuantities key_quantities(const Spectrum& sp, const ZonalTarget& tg,
                             double lambda);

// Sup over a Chebyshev t-grid of |sum_k coeff_k sqrt(N(d,k)) P_k(t)|; the
// functions probed here are zonal, so the t-grid sup matches the sphere sup.
double zonal_grid_sup(const Spectrum& sp, const std::vector<double>& coeffs,
                      int grid_points = 4001);

enum class ConditionRegime { general, sub_one };

struct ConditionReport {
  ConditionRegime regime = ConditionRegime::general;
  double threshold = 0.2;
  std::vector<std::string> names;
  std::vector<double> ratios;
  std::vector<bool> pass;
  bool all_pass = false;
};

// Dimensionless smallness ratios behind the theorem's approximation
// conditions; each must be small for the bias-variance bounds to bind.
ConditionReport check_approximation_conditions(
    const Spectrum& sp, const ZonalTarget& tg, double lambda, long n,
    ConditionRegime regime, double threshold = 0.2, double epsilon = 0.05);

struct QuantitySlopeReport {
  std::vector<int> d_grid;
  double s = 0.0;
  double l = 0.0;
  int p = 0;
  double n1_slope = 0, n2_slope = 0, m2_slope = 0, q1_slope = 0, q2_slope = 0;
  // Predicted log-d exponents; NaN where the prediction needs s outside its
  // validity range.
  double n1_theory = 0, n2_theory = 0, m2_theory = 0, q1_theory = 0,
         q2_theory = 0;
};

// Empirical log-d slopes of the key quantities at lambda = d^{-l}.
QuantitySlopeReport quantity_rate_probe(const KernelProfile& profile, double s,
                                        double l, int p,
                                        const std::vector<int>& d_grid);

}  // namespace spherekrr
