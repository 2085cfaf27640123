#pragma once

#include <string>
#include <vector>

namespace spherekrr {

enum class ProfileKind { PowerSeries, NtkRelu2 };

// Inner-product kernel profile Phi on [-1,1], so k(x,y) = Phi(<x,y>).
// Either a power series with nonnegative coefficients or the two-layer
// ReLU NTK profile, normalized so Phi_NT(1) = 1.
class KernelProfile {
 public:
  static KernelProfile power_series(std::vector<double> coeffs,
                                    std::string name = "");
  static KernelProfile exponential();  // a_j = 1/j!
  static KernelProfile ntk_relu2();
  // Accepts "poly:[a0,a1,...]", "exp", "ntk-relu2".
  static KernelProfile parse(const std::string& text);

  double operator()(double t) const;  // eval_phi
  double sup_bound() const { return sup_bound_; }  // kappa^2 = Phi(1)
  ProfileKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  // Taylor coefficients of Phi at 0 up to degree j_max. For the NTK profile
  // they are extracted numerically with a stabilization check to 1e-10.
  std::vector<double> series_coefficients(int j_max) const;

  // True when every stored coefficient is strictly positive.
  bool strictly_positive() const;

  // Stored series (empty for the NTK profile).
  const std::vector<double>& stored_coefficients() const { return coeffs_; }

 private:
  KernelProfile(ProfileKind kind, std::vector<double> coeffs, std::string name);

  ProfileKind kind_;
  std::vector<double> coeffs_;
  std::string name_;
  double sup_bound_;
};

}  // namespace spherekrr
