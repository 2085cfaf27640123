#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spherekrr/rates.hpp"
#include "spherekrr/simulate.hpp"

namespace spherekrr {

enum class LambdaPolicy { balance, fixed_exponent, sweep };

struct ExperimentConfig {
  std::string profile = "exp";
  double s = 1.0;
  double gamma = 1.5;
  double c_n = 1.0;  // n = round(c_n * d^gamma)
  double sigma = 1.0;
  double c0 = 1.0;
  double r_cap = 10.0;
  std::vector<int> d_grid;
  LambdaPolicy lambda_policy = LambdaPolicy::balance;
  double fixed_l = 0.5;
  std::vector<double> sweep_exponents;
  int replicates = 5;
  uint64_t seed = 1;
  std::string out_path;
  int threads = 0;  // 0 = SPHEREKRR_THREADS env or hardware default

  void validate() const;
};

struct ExperimentRecord {
  long run_id = 0;
  int d = 0;
  long n = 0;
  double gamma = 0.0;
  double s = 0.0;
  double lambda = 0.0;
  double lambda_exponent = 0.0;
  uint64_t seed = 0;
  double excess_risk = 0.0;
  double bias2 = 0.0;
  double variance = 0.0;
  double trunc_bound = 0.0;
  bool cond_pass = false;
  std::string error;  // nonempty when the cell failed
};

std::vector<ExperimentRecord> run_sweep(const ExperimentConfig& cfg);

std::string records_csv_header();
void write_records_csv(std::ostream& os,
                       const std::vector<ExperimentRecord>& records);
void write_records_csv(const std::string& path,
                       const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> read_records_csv(const std::string& path);

enum class FitAxis { log_d, log_n };

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
  FitAxis axis = FitAxis::log_d;
};

// Least-squares fit of log(median excess risk per d) against log d or log n.
// Records failing the approximation conditions are dropped unless
// include_unverified is set; all records must share one lambda exponent.
SlopeFit fit_rate(const std::vector<ExperimentRecord>& records, FitAxis axis,
                  bool include_unverified = false);

std::vector<ExperimentRecord> filter_by_lambda_exponent(
    const std::vector<ExperimentRecord>& records, double lambda_exponent);

// CSV with krr and minimax curves (breakpoints included) for each s and
// family, in the rate_curve CSV schema.
void emit_figure_data(const std::vector<double>& s_list, double gamma_max,
                      const std::vector<KernelFamily>& families,
                      const std::string& out_path);

int default_thread_count();

int cli_main(int argc, char** argv);

}  // namespace spherekrr
