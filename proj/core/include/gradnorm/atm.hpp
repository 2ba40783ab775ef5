#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradnorm/oracle.hpp"
#include "gradnorm/taylor_step.hpp"

namespace gradnorm {

/// One accepted iteration of the accelerated tensor method.
struct IterationRecord {
  int k = 0;                  ///< index of the produced iterate y^k (k >= 1)
  double L = 0.0;             ///< accepted L_{k-1}
  double A = 0.0;             ///< A_k
  double f_value = 0.0;       ///< f(y^k)
  double grad_norm = 0.0;     ///< ||grad f(y^k)||
  double displacement = 0.0;  ///< ||y^k - x^{k-1}||
  int inner_iterations = 0;   ///< subproblem iterations of the accepted step
  int trials = 0;             ///< tensor steps spent choosing L_{k-1}
  long cumulative_trials = 0;
};

/// Estimating-sequence state (A_k, y^k, u^k) plus the last accepted L.
struct AtmState {
  int k = 0;
  double A = 0.0;
  Vector y;
  Vector u;
  std::optional<double> L_prev;
};

struct AtmOptions {
  /// Stop once ||grad f(y^k)|| <= stop_grad.
  std::optional<double> stop_grad;
  /// Stop once the best gradient norm has not improved for this many iterations.
  std::optional<int> stop_window;
  /// Evaluate the per-step invariants (displacement sandwich, a-recurrence,
  /// decrease inequality) and tally violations.
  bool check_invariants = true;
  int max_bracket_steps = 60;
  int max_bisection_steps = 60;
  TensorStepOptions step;
};

/// Running tallies of the per-step invariants.
struct AtmDiagnostics {
  long steps_checked = 0;
  long sandwich_violations = 0;
  double max_recurrence_residual = 0.0;
  long decrease_checks = 0;
  long decrease_violations = 0;
  /// Worst (required - decrease - slack) / max(required, tiny); <= 0 means no violation.
  double worst_decrease_excess = -1.0;

  void merge(const AtmDiagnostics& other);
  bool clean() const {
    return sandwich_violations == 0 && decrease_violations == 0 && max_recurrence_residual <= 1e-9;
  }
};

/// Result of choosing L_k: the quantities Algorithm 1 computes from the trial.
struct LkChoice {
  double L = 0.0;
  double a = 0.0;
  double A_next = 0.0;
  Vector x;       ///< extrapolation point x^k
  Vector y_next;  ///< y^{k+1} = T_{p, p M_p}^{F_{L,x}}(x)
  double ratio = 0.0;  ///< 2(p+1) M_p / (p! L) ||y^{k+1} - x^k||^{p-1}, in [1/2, 1]
  int trials = 0;
  int inner_iterations = 0;
};

/// Two-sided condition on L: 1/2 <= 2(p+1) M_p / (p! L) ||y - x||^{p-1} <= 1.
double displacement_ratio(int p, double M_p, double L, double displacement);

/// a_{k+1} = (1/L + sqrt(1/L^2 + 4 A_k / L)) / 2, the positive root of L a^2 = a + A_k.
double next_a(double L, double A);

/// Geometric bracketing from the warm start followed by log-scale bisection.
/// Every trial recomputes (a, A, x) before the tensor step.
LkChoice search_Lk(const Oracle& oracle, const AtmState& state, int p, double M_p,
                   const AtmOptions& opts, AtmDiagnostics* diag = nullptr);

enum class AtmStop { Budget, GradientTarget, Stagnation };

std::string to_string(AtmStop reason);

struct AtmResult {
  Vector y;  ///< last iterate
  std::vector<IterationRecord> trace;
  AtmStop reason = AtmStop::Budget;
  int iterations = 0;
  long tensor_steps = 0;
  double initial_grad_norm = 0.0;
  std::optional<double> last_L;
  AtmDiagnostics diagnostics;
};

/// Observer called after each accepted iteration with the record and y^k.
using AtmObserver = std::function<void(const IterationRecord&, const Vector&)>;

/// Subproblem or L-search failure inside run_atm, with the partial run attached.
class AtmError : public std::runtime_error {
 public:
  AtmError(const std::string& what, AtmResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const AtmResult& partial() const { return partial_; }

 private:
  AtmResult partial_;
};

/// Near-optimal tensor method started from u_0 = y_0 for at most N iterations.
AtmResult run_atm(const Oracle& oracle, const Vector& y0, int N, int p, double M_p,
                  const AtmOptions& opts = {}, const AtmObserver& observer = {});

/// c = 2^{(3(p+1)^2 + 4)/4} (p+1) / p!
double theoretical_constant_c(int p);

/// c M_p R^{p+1} / k^{(3p+1)/2}
double convergence_bound(int p, double M_p, double initial_distance, int k);

}  // namespace gradnorm
