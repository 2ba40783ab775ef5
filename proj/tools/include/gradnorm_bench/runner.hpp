#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradnorm/problems.hpp"
#include "gradnorm/restarts.hpp"
#include "gradnorm/transport.hpp"
#include "gradnorm_bench/config.hpp"

namespace gradnorm::bench {

/// A configured problem instance.
struct Problem {
  std::string kind;
  OraclePtr oracle;
  Vector x0;
  std::optional<TransportInstance> transport;
  std::optional<HardFamilySpec> hard;
  std::optional<Vector> known_minimizer;
};

Problem build_problem(const ProblemConfig& pc, std::uint64_t seed);

/// High-accuracy minimizer. Closed form where known, otherwise damped Newton
/// with a pseudo-inverse step. For the transport dual, the minimizer closest
/// to x0 is returned (the dual is constant along two directions).
struct Reference {
  Vector x;
  double value = 0.0;
  double grad_norm = 0.0;
  std::string method;
};

Reference reference_solution(const Problem& problem);

/// Heuristic M_p: the largest Taylor-remainder ratio
/// (p+1)! |f(y) - T_p(x; y)| / ||y - x||^{p+1} over seeded random pairs near
/// `center`, doubled. An underestimate voids the wrapper guarantees.
double estimate_lipschitz(const Oracle& oracle, int p, const Vector& center, double radius, int samples,
                          std::uint64_t seed);

struct RunOutput {
  Problem problem;
  GradnormResult result;
  nlohmann::json summary;
  /// Set when the wrapper raised RestartFailure or GuaranteeViolation.
  std::optional<std::string> failure;
  bool guarantee_violation = false;
};

/// Runs one experiment. RestartFailure is caught and reported through
/// `failure`; configuration problems and other solver errors propagate.
RunOutput run_experiment(const RunConfig& config);

/// The trace as CSV text with the fixed header. wall_seconds is written as 0
/// unless `timing` is set, so identical runs give identical bytes.
std::string trace_csv(const std::vector<TraceRow>& rows, bool timing);
extern const char* const kTraceHeader;

/// Writes trace.csv, summary.json and, for transport problems, plan.csv.
void write_outputs(const std::string& dir, const RunOutput& out, bool timing);

struct SweepPoint {
  double eps = 0.0;
  long long iterations = 0;  ///< scheduled in theoretical mode, executed in practical mode
  long long scheduled_iterations = 0;
  long long total_inner_iterations = 0;
  double final_grad_norm = 0.0;
  bool guarantee_met = false;
};

struct SweepOutput {
  std::vector<SweepPoint> points;
  double theoretical_exponent = 0.0;
  double fitted_slope = 0.0;
  bool all_met = true;
};

/// Least-squares slope of ln(y) against ln(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs the config once per eps (at least three), writing each run to
/// dir/eps_<i>/ and the table to dir/sweep.csv when `dir` is nonempty.
SweepOutput run_sweep(const RunConfig& config, const std::vector<double>& eps_list, const std::string& dir);

/// fd_check at `points` seeded random points (hard family: away from kinks).
nlohmann::json validate_problem(const Problem& problem, int points, std::uint64_t seed, bool* pass);

}  // namespace gradnorm::bench
