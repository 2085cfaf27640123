#include "spherekrr/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace spherekrr {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

double clamp_to_domain(double t) {
  if (std::abs(t) > 1.0 + 1e-12) {
    throw std::domain_error("kernel profile argument |t| > 1");
  }
  return std::min(1.0, std::max(-1.0, t));
}

double ntk_eval(double t) {
  // Two-layer ReLU NTK profile, normalized so the value at t = 1 is 1:
  // Phi(t) = [t + (2 t asin(t) + sqrt(1 - t^2)) / pi] / 2.
  double u = std::sqrt(std::max(0.0, 1.0 - t * t));
  return 0.5 * (t + (2.0 * t * std::asin(t) + u) / kPi);
}

std::complex<double> ntk_eval_complex(std::complex<double> z) {
  std::complex<double> u = std::sqrt(1.0 - z * z);
  return 0.5 * (z + (2.0 * z * std::asin(z) + u) / kPi);
}

// Taylor coefficients via trigonometric interpolation on a circle of radius r
// inside the unit disk, where the profile is analytic. Aliasing error decays
// like r^grid_size, so two grid sizes agreeing to 1e-10 certifies the result.
std::vector<double> ntk_coefficients_on_grid(int j_max, int grid_size) {
  // A radius close to the unit circle keeps the 1/r^j rescaling from
  // amplifying roundoff at large j; the branch points sit at t = +-1, so
  // any r < 1 stays inside the analyticity domain.
  const double r = 0.9;
  std::vector<double> acc(j_max + 1, 0.0);
  for (int m = 0; m < grid_size; ++m) {
    double theta = 2.0 * kPi * m / grid_size;
    std::complex<double> z = std::polar(r, theta);
    std::complex<double> f = ntk_eval_complex(z);
    for (int j = 0; j <= j_max; ++j) {
      acc[j] += f.real() * std::cos(j * theta) + f.imag() * std::sin(j * theta);
    }
  }
  double scale = 1.0;
  for (int j = 0; j <= j_max; ++j) {
    acc[j] /= grid_size * scale;
    scale *= r;
  }
  return acc;
}

}  // namespace

KernelProfile::KernelProfile(ProfileKind kind, std::vector<double> coeffs,
                             std::string name)
    : kind_(kind), coeffs_(std::move(coeffs)), name_(std::move(name)) {
  if (kind_ == ProfileKind::NtkRelu2) {
    sup_bound_ = ntk_eval(1.0);
  } else {
    double total = 0.0;
    for (double a : coeffs_) {
      if (a < 0.0 || !std::isfinite(a)) {
        throw std::invalid_argument("power series coefficients must be >= 0");
      }
      total += a;
    }
    sup_bound_ = total;
  }
}

KernelProfile KernelProfile::power_series(std::vector<double> coeffs,
                                          std::string name) {
  if (coeffs.empty()) {
    throw std::invalid_argument("power series needs at least one coefficient");
  }
  if (name.empty()) {
    std::ostringstream os;
    os << "poly:[";
    for (size_t j = 0; j < coeffs.size(); ++j) {
      if (j) os << ",";
      os << coeffs[j];
    }
    os << "]";
    name = os.str();
  }
  return KernelProfile(ProfileKind::PowerSeries, std::move(coeffs),
                       std::move(name));
}

KernelProfile KernelProfile::exponential() {
  // a_j = 1/j!, truncated once terms fall below 1e-16 * Phi(1).
  std::vector<double> coeffs;
  double a = 1.0;
  for (int j = 0;; ++j) {
    coeffs.push_back(a);
    a /= (j + 1);
    if (a < 1e-16 * std::exp(1.0)) break;
  }
  return KernelProfile(ProfileKind::PowerSeries, std::move(coeffs), "exp");
}

KernelProfile KernelProfile::ntk_relu2() {
  return KernelProfile(ProfileKind::NtkRelu2, {}, "ntk-relu2");
}

KernelProfile KernelProfile::parse(const std::string& text) {
  if (text == "exp") return exponential();
  if (text == "ntk-relu2") return ntk_relu2();
  const std::string prefix = "poly:[";
  if (text.rfind(prefix, 0) == 0 && text.back() == ']') {
    std::string body = text.substr(prefix.size(),
                                   text.size() - prefix.size() - 1);
    std::vector<double> coeffs;
    std::istringstream is(body);
    std::string item;
    while (std::getline(is, item, ',')) {
      size_t pos = 0;
      double v = std::stod(item, &pos);
      coeffs.push_back(v);
    }
    if (coeffs.empty()) {
      throw std::invalid_argument("empty coefficient list in " + text);
    }
    return power_series(std::move(coeffs), text);
  }
  throw std::invalid_argument("unknown kernel profile: " + text);
}

double KernelProfile::operator()(double t) const {
  t = clamp_to_domain(t);
  if (kind_ == ProfileKind::NtkRelu2) return ntk_eval(t);
  double v = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    v = v * t + *it;
  }
  return v;
}

std::vector<double> KernelProfile::series_coefficients(int j_max) const {
  if (j_max < 0) throw std::invalid_argument("j_max must be >= 0");
  if (kind_ == ProfileKind::PowerSeries) {
    std::vector<double> out(j_max + 1, 0.0);
    for (int j = 0; j <= j_max && j < static_cast<int>(coeffs_.size()); ++j) {
      out[j] = coeffs_[j];
    }
    return out;
  }
  int grid = std::max(256, 8 * (j_max + 1));
  std::vector<double> coarse = ntk_coefficients_on_grid(j_max, grid);
  std::vector<double> fine = ntk_coefficients_on_grid(j_max, 2 * grid);
  for (int j = 0; j <= j_max; ++j) {
    if (std::abs(coarse[j] - fine[j]) > 1e-10) {
      throw std::runtime_error("NTK coefficient extraction did not stabilize");
    }
  }
  return fine;
}

bool KernelProfile::strictly_positive() const {
  if (kind_ == ProfileKind::NtkRelu2) return false;
  for (double a : coeffs_) {
    if (a <= 0.0) return false;
  }
  return true;
}

}  // namespace spherekrr
