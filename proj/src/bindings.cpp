#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spherekrr/harness.hpp"

namespace py = pybind11;
using namespace spherekrr;

PYBIND11_MODULE(_core, m) {
  m.doc() = "kernel ridge regression on large-dimensional spheres";

  py::register_exception<UnprovenRegionError>(m, "UnprovenRegionError",
                                              PyExc_ValueError);

  py::class_<KernelProfile>(m, "KernelProfile")
      .def_static("parse", &KernelProfile::parse)
      .def_static("exponential", &KernelProfile::exponential)
      .def_static("ntk_relu2", &KernelProfile::ntk_relu2)
      .def_static("power_series", &KernelProfile::power_series)
      .def("__call__", &KernelProfile::operator())
      .def("series_coefficients", &KernelProfile::series_coefficients)
      .def("sup_bound", &KernelProfile::sup_bound)
      .def("name", &KernelProfile::name);

  py::class_<TruncationPolicy>(m, "TruncationPolicy")
      .def_static("fixed_degree", &TruncationPolicy::fixed_degree)
      .def_static("tail_tolerance", &TruncationPolicy::tail_tolerance);

  py::class_<Spectrum>(m, "Spectrum")
      .def_readonly("d", &Spectrum::d)
      .def_readonly("K", &Spectrum::K)
      .def_readonly("mu", &Spectrum::mu)
      .def_readonly("mult", &Spectrum::mult)
      .def_readonly("tail_mass", &Spectrum::tail_mass)
      .def_readonly("profile_name", &Spectrum::profile_name)
      .def("to_json", &Spectrum::to_json);

  m.def("multiplicity", &multiplicity, py::arg("d"), py::arg("k"));
  m.def("legendre_eval", &legendre_eval, py::arg("d"), py::arg("k"),
        py::arg("t"));
  m.def("build_spectrum", &build_spectrum, py::arg("profile"), py::arg("d"),
        py::arg("policy") = TruncationPolicy{});
  m.def("zonal_kernel", &zonal_kernel);
  m.def("mercer_reconstruct", &mercer_reconstruct);

  py::class_<ZonalTarget>(m, "ZonalTarget")
      .def_readonly("s", &ZonalTarget::s)
      .def_readonly("gamma", &ZonalTarget::gamma)
      .def_readonly("q", &ZonalTarget::q)
      .def_readonly("beta", &ZonalTarget::beta)
      .def_readonly("hs_norm", &ZonalTarget::hs_norm)
      .def("l2_norm_sq", &ZonalTarget::l2_norm_sq);

  m.def("build_target", &build_target, py::arg("spectrum"), py::arg("s"),
        py::arg("gamma"), py::arg("c0") = 1.0, py::arg("r_cap") = 10.0,
        py::arg("pole") = std::vector<double>{});
  m.def("eval_target_t", &eval_target_t);

  py::class_<KeyQuantities>(m, "KeyQuantities")
      .def_readonly("lambda_", &KeyQuantities::lambda)
      .def_readonly("n1", &KeyQuantities::n1)
      .def_readonly("n2", &KeyQuantities::n2)
      .def_readonly("m2", &KeyQuantities::m2)
      .def_readonly("q1", &KeyQuantities::q1)
      .def_readonly("q2", &KeyQuantities::q2)
      .def_readonly("m1_zonal", &KeyQuantities::m1_zonal);

  m.def("key_quantities", &key_quantities);

  py::enum_<ConditionRegime>(m, "ConditionRegime")
      .value("general", ConditionRegime::general)
      .value("sub_one", ConditionRegime::sub_one);

  py::class_<ConditionReport>(m, "ConditionReport")
      .def_readonly("names", &ConditionReport::names)
      .def_readonly("ratios", &ConditionReport::ratios)
      .def_readonly("passes", &ConditionReport::pass)
      .def_readonly("all_pass", &ConditionReport::all_pass);

  m.def("check_approximation_conditions", &check_approximation_conditions,
        py::arg("spectrum"), py::arg("target"), py::arg("lambda_"),
        py::arg("n"), py::arg("regime"), py::arg("threshold") = 0.2,
        py::arg("epsilon") = 0.05);

  py::enum_<KernelFamily>(m, "KernelFamily")
      .value("generic_inner", KernelFamily::generic_inner)
      .value("ntk_relu2", KernelFamily::ntk_relu2);
  py::enum_<RateMethod>(m, "RateMethod")
      .value("krr", RateMethod::krr)
      .value("minimax", RateMethod::minimax);
  py::enum_<PeriodKind>(m, "PeriodKind")
      .value("variance_dominated", PeriodKind::variance_dominated)
      .value("transition", PeriodKind::transition)
      .value("bias_dominated", PeriodKind::bias_dominated);

  py::class_<RateQuery>(m, "RateQuery")
      .def(py::init<>())
      .def_readwrite("s", &RateQuery::s)
      .def_readwrite("gamma", &RateQuery::gamma)
      .def_readwrite("family", &RateQuery::family)
      .def_readwrite("method", &RateQuery::method);

  py::class_<RateAnswer>(m, "RateAnswer")
      .def_readonly("d_exponent", &RateAnswer::d_exponent)
      .def_readonly("n_exponent", &RateAnswer::n_exponent)
      .def_readonly("period_index", &RateAnswer::period_index)
      .def_readonly("period_kind", &RateAnswer::period_kind)
      .def_readonly("lambda_exponent", &RateAnswer::lambda_exponent)
      .def_readonly("lambda_log_correction", &RateAnswer::lambda_log_correction)
      .def_readonly("epsilon_slack", &RateAnswer::epsilon_slack);

  m.def("krr_rate", &krr_rate);
  m.def("minimax_rate", &minimax_rate);

  py::class_<GapReport>(m, "GapReport")
      .def_readonly("gap", &GapReport::gap)
      .def_readonly("krr", &GapReport::krr)
      .def_readonly("minimax", &GapReport::minimax);

  m.def("saturation_gap", &saturation_gap, py::arg("s"), py::arg("gamma"),
        py::arg("family") = KernelFamily::generic_inner);
  m.def("rate_breakpoints", &rate_breakpoints);
  m.def("sample_rate_curve", &sample_rate_curve);
  m.def("rate_validity_floor", &rate_validity_floor);

  py::class_<Design>(m, "Design")
      .def_readonly("d", &Design::d)
      .def_readonly("X", &Design::X)
      .def_readonly("gram_t", &Design::gram_t)
      .def("n", &Design::n);

  m.def("sample_sphere", &sample_sphere, py::arg("d"), py::arg("n"),
        py::arg("seed"));
  m.def("kernel_matrix", &kernel_matrix);

  py::class_<KrrFit>(m, "KrrFit")
      .def_readonly("alpha", &KrrFit::alpha)
      .def_readonly("residual", &KrrFit::residual)
      .def_readonly("jitter_used", &KrrFit::jitter_used);

  m.def("fit_krr", &fit_krr, py::arg("profile"), py::arg("spectrum"),
        py::arg("target"), py::arg("design"), py::arg("lambda_"),
        py::arg("noise_sigma"), py::arg("seed"));

  py::class_<RiskValue>(m, "RiskValue")
      .def_readonly("value", &RiskValue::value)
      .def_readonly("trunc_bound", &RiskValue::trunc_bound);

  m.def("excess_risk_analytic", &excess_risk_analytic);
  m.def("excess_risk_montecarlo", &excess_risk_montecarlo, py::arg("fit"),
        py::arg("profile"), py::arg("spectrum"), py::arg("target"),
        py::arg("design"), py::arg("m_test"), py::arg("seed"));

  py::class_<RiskReport>(m, "RiskReport")
      .def_readonly("excess_risk", &RiskReport::excess_risk)
      .def_readonly("bias2", &RiskReport::bias2)
      .def_readonly("variance", &RiskReport::variance)
      .def_readonly("trunc_bound", &RiskReport::trunc_bound);

  m.def("bias_variance", &bias_variance, py::arg("profile"),
        py::arg("spectrum"), py::arg("target"), py::arg("design"),
        py::arg("lambda_"), py::arg("noise_sigma"));

  py::enum_<LambdaPolicy>(m, "LambdaPolicy")
      .value("balance", LambdaPolicy::balance)
      .value("fixed_exponent", LambdaPolicy::fixed_exponent)
      .value("sweep", LambdaPolicy::sweep);
  py::enum_<FitAxis>(m, "FitAxis")
      .value("log_d", FitAxis::log_d)
      .value("log_n", FitAxis::log_n);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("profile", &ExperimentConfig::profile)
      .def_readwrite("s", &ExperimentConfig::s)
      .def_readwrite("gamma", &ExperimentConfig::gamma)
      .def_readwrite("c_n", &ExperimentConfig::c_n)
      .def_readwrite("sigma", &ExperimentConfig::sigma)
      .def_readwrite("d_grid", &ExperimentConfig::d_grid)
      .def_readwrite("lambda_policy", &ExperimentConfig::lambda_policy)
      .def_readwrite("fixed_l", &ExperimentConfig::fixed_l)
      .def_readwrite("sweep_exponents", &ExperimentConfig::sweep_exponents)
      .def_readwrite("replicates", &ExperimentConfig::replicates)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("out_path", &ExperimentConfig::out_path)
      .def_readwrite("threads", &ExperimentConfig::threads);

  py::class_<ExperimentRecord>(m, "ExperimentRecord")
      .def_readonly("d", &ExperimentRecord::d)
      .def_readonly("n", &ExperimentRecord::n)
      .def_readonly("lambda_", &ExperimentRecord::lambda)
      .def_readonly("lambda_exponent", &ExperimentRecord::lambda_exponent)
      .def_readonly("excess_risk", &ExperimentRecord::excess_risk)
      .def_readonly("bias2", &ExperimentRecord::bias2)
      .def_readonly("variance", &ExperimentRecord::variance)
      .def_readonly("cond_pass", &ExperimentRecord::cond_pass)
      .def_readonly("error", &ExperimentRecord::error);

  m.def("run_sweep", &run_sweep);
  m.def("fit_rate", &fit_rate, py::arg("records"), py::arg("axis"),
        py::arg("include_unverified") = false);
  m.def("filter_by_lambda_exponent", &filter_by_lambda_exponent);

  py::class_<SlopeFit>(m, "SlopeFit")
      .def_readonly("slope", &SlopeFit::slope)
      .def_readonly("intercept", &SlopeFit::intercept)
      .def_readonly("r_squared", &SlopeFit::r_squared)
      .def_readonly("n_points", &SlopeFit::n_points);
}
