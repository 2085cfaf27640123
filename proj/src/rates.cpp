#include "spherekrr/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spherekrr {

namespace {

// Degrees carrying nonzero eigenvalues. For the two-layer ReLU NTK these are
// {0, 1} plus the even degrees; the period successor p' of an active degree
// is the next active degree.
int next_active(KernelFamily family, int p) {
  if (family == KernelFamily::generic_inner) return p + 1;
  return p <= 1 ? p + 1 : p + 2;
}

void validate(const RateQuery& q) {
  if (q.s <= 0.0 || q.gamma <= 0.0) {
    throw std::invalid_argument("rate query needs s > 0 and gamma > 0");
  }
}

// Period containing gamma: the active degree p with
// p(1+sigma) < gamma <= p'(1+sigma).
int find_period(KernelFamily family, double sigma, double gamma) {
  int p = 0;
  while (true) {
    int pp = next_active(family, p);
    if (gamma <= pp * (1.0 + sigma)) return p;
    p = pp;
  }
}

RateAnswer finish(RateAnswer a, double gamma) {
  a.n_exponent = a.d_exponent / gamma;
  return a;
}

// Ridge regression curve for s >= 1 (uses st = min(s,2)).
RateAnswer krr_rate_saturating(KernelFamily family, double st, double gamma) {
  int p = find_period(family, st, gamma);
  int pp = next_active(family, p);
  RateAnswer a;
  a.period_index = p;
  double k1 = pp + p * st;
  double k2 = 2.0 * pp * st - pp + 2.0 * p - p * st;
  if (gamma <= k1) {
    a.period_kind = PeriodKind::variance_dominated;
    a.d_exponent = -gamma + p;
    a.lambda_exponent = 0.5 * (gamma + p - p * st);
    if (p == 0) {
      a.log_factor = LogFactor::ln2;
      a.lambda_log_correction = true;
    }
  } else if (gamma <= k2) {
    a.period_kind = PeriodKind::transition;
    a.d_exponent = -0.5 * (gamma + pp - 2.0 * p + p * st);
    a.lambda_exponent = 0.25 * (gamma + pp + 2.0 * p - p * st);
  } else {
    a.period_kind = PeriodKind::bias_dominated;
    a.d_exponent = -pp * st;
    a.lambda_exponent = 0.5 * (gamma + pp * (1.0 - st));
  }
  return finish(a, gamma);
}

// Ridge regression curve for 0 < s < 1 (two cases per period).
RateAnswer krr_rate_sub_one(KernelFamily family, double s, double gamma) {
  int p = find_period(family, s, gamma);
  int pp = next_active(family, p);
  RateAnswer a;
  a.period_index = p;
  if (gamma <= p + pp * s) {
    a.period_kind = PeriodKind::variance_dominated;
    a.d_exponent = -gamma + p;
    a.lambda_exponent = 0.5 * (gamma + p - p * s);
    if (p == 0) {
      a.log_factor = LogFactor::ln2;
      a.lambda_log_correction = true;
    }
  } else {
    a.period_kind = PeriodKind::bias_dominated;
    a.d_exponent = -pp * s;
    a.lambda_exponent = p + 0.5 * (pp - p) * s;
  }
  return finish(a, gamma);
}

}  // namespace

double rate_validity_floor(double s, RateMethod method) {
  if (method == RateMethod::krr && s <= 0.5) {
    return 3.0 * s / (2.0 * (s + 1.0));
  }
  return 0.0;
}

RateAnswer krr_rate(const RateQuery& q) {
  validate(q);
  if (q.gamma <= rate_validity_floor(q.s, RateMethod::krr)) {
    throw UnprovenRegionError(
        "gamma <= 3s/(2(s+1)) is outside the proven region for s <= 1/2");
  }
  if (q.s >= 1.0) {
    return krr_rate_saturating(q.family, std::min(q.s, 2.0), q.gamma);
  }
  return krr_rate_sub_one(q.family, q.s, q.gamma);
}

RateAnswer minimax_rate(const RateQuery& q) {
  validate(q);
  int p = find_period(q.family, q.s, q.gamma);
  int pp = next_active(q.family, p);
  RateAnswer a;
  a.period_index = p;
  a.lambda_exponent = std::numeric_limits<double>::quiet_NaN();
  if (q.gamma <= p + pp * q.s) {
    a.period_kind = PeriodKind::variance_dominated;
    a.d_exponent = -q.gamma + p;
    a.epsilon_slack = true;
  } else {
    a.period_kind = PeriodKind::bias_dominated;
    a.d_exponent = -pp * q.s;
  }
  return finish(a, q.gamma);
}

GapReport saturation_gap(double s, double gamma, KernelFamily family) {
  GapReport g;
  g.krr = krr_rate({s, gamma, family, RateMethod::krr});
  g.minimax = minimax_rate({s, gamma, family, RateMethod::minimax});
  g.gap = g.krr.d_exponent - g.minimax.d_exponent;
  g.epsilon_slack = g.minimax.epsilon_slack;
  return g;
}

std::vector<double> rate_breakpoints(double s, KernelFamily family,
                                     RateMethod method, double gamma_max) {
  std::vector<double> knots;
  double floor_gamma = rate_validity_floor(s, method);
  auto add = [&](double g) {
    if (g > floor_gamma && g <= gamma_max) knots.push_back(g);
  };
  bool saturating = method == RateMethod::krr && s >= 1.0;
  double sigma = saturating ? std::min(s, 2.0) : s;
  int p = 0;
  while (p * (1.0 + sigma) < gamma_max) {
    int pp = next_active(family, p);
    add(p * (1.0 + sigma));
    if (saturating) {
      add(pp + p * sigma);
      add(2.0 * pp * sigma - pp + 2.0 * p - p * sigma);
    } else {
      add(p + pp * sigma);
    }
    add(pp * (1.0 + sigma));
    p = pp;
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-15; }),
              knots.end());
  return knots;
}

std::vector<std::pair<double, RateAnswer>> sample_rate_curve(
    double s, double gamma_min, double gamma_max, double step,
    KernelFamily family, RateMethod method) {
  if (step <= 0.0) throw std::invalid_argument("step must be > 0");
  double lo = std::max(gamma_min, rate_validity_floor(s, method) + 1e-12);
  std::vector<double> gammas;
  for (double g = std::max(lo, step); g <= gamma_max + 1e-12; g += step) {
    gammas.push_back(std::min(g, gamma_max));
  }
  for (double k : rate_breakpoints(s, family, method, gamma_max)) {
    if (k >= lo) gammas.push_back(k);
  }
  std::sort(gammas.begin(), gammas.end());
  gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());
  std::vector<std::pair<double, RateAnswer>> out;
  out.reserve(gammas.size());
  for (double g : gammas) {
    RateQuery q{s, g, family, method};
    out.emplace_back(g, method == RateMethod::krr ? krr_rate(q)
                                                  : minimax_rate(q));
  }
  return out;
}

std::string to_string(KernelFamily family) {
  return family == KernelFamily::generic_inner ? "generic_inner" : "ntk_relu2";
}

std::string to_string(RateMethod method) {
  return method == RateMethod::krr ? "krr" : "minimax";
}

std::string to_string(PeriodKind kind) {
  switch (kind) {
    case PeriodKind::variance_dominated: return "variance_dominated";
    case PeriodKind::transition: return "transition";
    default: return "bias_dominated";
  }
}

std::string to_string(LogFactor f) {
  return f == LogFactor::none ? "none" : "ln2";
}

std::string rate_curve_csv_header() {
  return "s,gamma,method,family,p,period_kind,d_exponent,n_exponent,"
         "lambda_exponent,log_factor,epsilon_slack";
}

std::string rate_curve_csv_row(double s, KernelFamily family,
                               RateMethod method, double gamma,
                               const RateAnswer& a) {
  std::ostringstream os;
  os.precision(17);
  os << s << "," << gamma << "," << to_string(method) << ","
     << to_string(family) << "," << a.period_index << ","
     << to_string(a.period_kind) << "," << a.d_exponent << ","
     << a.n_exponent << ",";
  if (!std::isnan(a.lambda_exponent)) os << a.lambda_exponent;
  os << "," << to_string(a.log_factor) << "," << (a.epsilon_slack ? 1 : 0);
  return os.str();
}

}  // namespace spherekrr
