#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradnorm/atm.hpp"
#include "gradnorm/oracle.hpp"

namespace gradnorm {

/// Which initial bound drives the restart schedule.
enum class Wrapper {
  Gap,     ///< f(x0) - f* <= Delta_0, mu = eps^2 / (32 Delta_0)
  Radius,  ///< ||x0 - x*|| <= R, mu = eps / (4 R)
};

enum class RunMode {
  Theoretical,  ///< each restart runs its full N_k
  Practical,    ///< each restart capped at min(N_k, cap) with a stagnation exit
};

std::string to_string(Wrapper w);
std::string to_string(RunMode m);
Wrapper parse_wrapper(const std::string& s);
RunMode parse_run_mode(const std::string& s);

/// One row of the per-iteration trace; restart boundaries get inner_iter = 0.
struct TraceRow {
  int restart_index = 0;
  long global_iter = 0;
  int inner_iter = 0;
  double L_k = 0.0;
  double f_value = 0.0;
  double grad_norm = 0.0;     ///< ||grad f||
  double grad_norm_mu = 0.0;  ///< ||grad f_mu||
  long tensor_step_trials = 0;
  double wall_seconds = 0.0;
};

struct RestartOptions {
  RunMode mode = RunMode::Practical;
  int practical_cap = 500;
  int stagnation_window = 500;
  /// Inner runs stop once ||grad f_mu|| drops below this. Defaults: eps / 4 in
  /// practical mode; 1e-6 eps in theoretical mode, where it only guards against
  /// iterating at round-off level after the restart target is long met.
  std::optional<double> inner_stop_grad;
  /// Subproblem tolerance; defaults to default_step_tolerance(eps).
  std::optional<double> step_tol;
  bool check_invariants = true;
  bool record_trace = true;
  /// Keep z_0, ..., z_K for offline invariant checks.
  bool record_points = false;
};

struct RestartRun {
  Wrapper wrapper = Wrapper::Gap;
  RunMode mode = RunMode::Practical;
  int p = 0;
  double M_p = 0.0;
  double M_mu = 0.0;       ///< p * M_p, the terminal-step constant
  double eps = 0.0;
  double mu = 0.0;
  double eps_tilde = 0.0;
  double initial_bound = 0.0;  ///< Delta_0 or R
  int planned_restarts = 0;    ///< K from the closed form (at least 1 in radius mode)
  int restarts = 0;            ///< restarts actually performed

  std::vector<double> bounds;        ///< Delta_k or R_k per restart
  std::vector<long long> schedule;   ///< N_k per restart
  std::vector<long long> budgets;    ///< iterations allowed per restart
  std::vector<int> executed;         ///< iterations performed per restart
  std::vector<AtmStop> stop_reasons;
  std::vector<std::vector<IterationRecord>> inner_traces;
  std::vector<Vector> points;        ///< z_0..z_K when record_points

  long long scheduled_iterations = 0;  ///< sum of N_k
  long long total_inner_iterations = 0;  ///< iterations actually performed
  long total_tensor_steps = 0;
  double iteration_bound = 0.0;        ///< closed-form bound on sum N_k

  AtmDiagnostics diagnostics;
  std::vector<TraceRow> trace;

  double final_grad_norm = 0.0;     ///< ||grad f(z~)||
  double final_grad_norm_mu = 0.0;  ///< ||grad f_mu(z~)||
  double mu_distance_term = 0.0;    ///< mu ||z~ - x0||
  double final_value = 0.0;
  /// Gradient bounds implied by the terminal decrease, exponents (p+1)/p and p/(p+1).
  double terminal_bound_statement = 0.0;
  double terminal_bound_variant = 0.0;
  bool guarantee_met = false;
};

struct GradnormResult {
  Vector z;
  RestartRun run;
};

/// Failure inside a wrapper, with the partial run.
class RestartFailure : public std::runtime_error {
 public:
  RestartFailure(const std::string& what, GradnormResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const GradnormResult& partial() const { return partial_; }

 private:
  GradnormResult partial_;
};

/// The returned point has ||grad f(z~)|| > eps: Delta_0, R or M_p was wrong.
class GuaranteeViolation : public RestartFailure {
 public:
  using RestartFailure::RestartFailure;
};

/// N_k = max{ ceil((2 c M_p 2^{(p+1)/2} Delta_k^{(p-1)/2} / mu^{(p+1)/2})^{2/(3p+1)}), 1 }
long long schedule_Nk_gap(int k, double delta0, double mu, double M_p, int p);
/// N_k = max{ ceil((8 c M_p R_k^{p-1} / mu)^{2/(3p+1)}), 1 }
long long schedule_Nk_radius(int k, double R, double mu, double M_p, int p);

/// eps~ = (eps/2)^{p/(p+1)} / (8 (p M_p)^{1/p} (p+1)!)
double inner_threshold(double eps, double M_p, int p);
double gap_mu(double eps, double delta0);
double radius_mu(double eps, double R);

/// Number of restarts K: the first k with Delta_0 2^{-k} < eps~ (gap) or
/// mu (R 2^{-k})^2 / 2 < eps~ (radius).
int gap_restart_count(double delta0, double eps_tilde);
int radius_restart_count(double R, double mu, double eps_tilde);

/// Closed-form upper bound on sum_k N_k over the K restarts.
double gap_iteration_bound(double delta0, double mu, double M_p, int p, int K);
double radius_iteration_bound(double R, double mu, double M_p, int p, int K);

/// Exponent of eps in the iteration count: -2(p+1)/(3p+1) (gap) or -2/(3p+1) (radius).
double complexity_exponent(Wrapper w, int p);

/// Objective-residual wrapper. Requires delta0 >= f(x0) - f*.
GradnormResult minimize_gradnorm_from_gap(const Oracle& oracle, const Vector& x0, double delta0,
                                          double eps, double M_p, int p,
                                          const RestartOptions& opts = {});

/// Argument-residual wrapper. Requires R >= ||x0 - x*||. At least one restart
/// runs even when mu R^2 / 2 < eps~, since the terminal-step argument needs
/// f_mu(z_K) - f_mu* <= mu R_K^2 / 2 and that bound is unknown at z_0 = x0.
GradnormResult minimize_gradnorm_from_radius(const Oracle& oracle, const Vector& x0, double R,
                                             double eps, double M_p, int p,
                                             const RestartOptions& opts = {});

}  // namespace gradnorm
