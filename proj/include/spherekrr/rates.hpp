#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spherekrr {

enum class KernelFamily { generic_inner, ntk_relu2 };
enum class RateMethod { krr, minimax };
enum class PeriodKind { variance_dominated, transition, bias_dominated };
enum class LogFactor { none, ln2 };

struct RateQuery {
  double s = 1.0;
  double gamma = 1.0;
  KernelFamily family = KernelFamily::generic_inner;
  RateMethod method = RateMethod::krr;
};

// Excess risk ~ d^{d_exponent} = n^{n_exponent} under n ~ d^gamma. Log
// factors and the minimax epsilon are carried as flags, never folded into
// the exponents.
struct RateAnswer {
  double d_exponent = 0.0;
  double n_exponent = 0.0;
  int period_index = 0;  // active degree p of the period containing gamma
  PeriodKind period_kind = PeriodKind::variance_dominated;
  double lambda_exponent = 0.0;  // lambda = d^{-l}; NaN for minimax
  bool lambda_log_correction = false;  // multiply lambda by ln d (p = 0)
  LogFactor log_factor = LogFactor::none;
  bool epsilon_slack = false;
};

// gamma below the proven region for s <= 1/2 (gamma <= 3s/(2(s+1))).
struct UnprovenRegionError : std::domain_error {
  using std::domain_error::domain_error;
};

RateAnswer krr_rate(const RateQuery& q);
RateAnswer minimax_rate(const RateQuery& q);

struct GapReport {
  double gap = 0.0;  // krr d_exponent - minimax d_exponent, >= 0
  bool epsilon_slack = false;
  RateAnswer krr;
  RateAnswer minimax;
};

GapReport saturation_gap(double s, double gamma,
                         KernelFamily family = KernelFamily::generic_inner);

// Interval endpoints of the piecewise curve in (0, gamma_max], ascending.
std::vector<double> rate_breakpoints(double s, KernelFamily family,
                                     RateMethod method, double gamma_max);

// Curve samples on a step grid with every breakpoint inserted as a knot.
std::vector<std::pair<double, RateAnswer>> sample_rate_curve(
    double s, double gamma_min, double gamma_max, double step,
    KernelFamily family, RateMethod method);

// Smallest gamma covered by the theorems (0 unless krr with s <= 1/2).
double rate_validity_floor(double s, RateMethod method);

std::string to_string(KernelFamily family);
std::string to_string(RateMethod method);
std::string to_string(PeriodKind kind);
std::string to_string(LogFactor f);

std::string rate_curve_csv_header();
std::string rate_curve_csv_row(double s, KernelFamily family,
                               RateMethod method, double gamma,
                               const RateAnswer& a);

}  // namespace spherekrr
