#include "gradnorm/atm.hpp"

#include <algorithm>
#include <cmath>

#include "gradnorm/errors.hpp"

namespace gradnorm {

namespace {

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

struct Trial {
  LkChoice choice;
  DecreaseCheck decrease;
};

Trial evaluate_trial(const Oracle& oracle, const AtmState& state, int p, double M_p, double L,
                     const AtmOptions& opts) {
  Trial t;
  LkChoice& c = t.choice;
  c.L = L;
  c.a = next_a(L, state.A);
  c.A_next = state.A + c.a;
  c.x = (state.A / c.A_next) * state.y + (c.a / c.A_next) * state.u;

  const OraclePtr view = make_regularized(borrow(oracle), c.x, L);
  const double step_constant = p * regularized_lipschitz(M_p, p, L);
  const TensorStepResult step = tensor_step(*view, c.x, p, step_constant, opts.step);
  c.y_next = step.y;
  c.inner_iterations = step.inner_iterations;
  c.ratio = displacement_ratio(p, M_p, L, (c.y_next - c.x).norm());

  if (opts.check_invariants) {
    t.decrease = check_step_decrease(*view, c.x, c.y_next, p, step_constant);
  }
  return t;
}

void record_decrease(AtmDiagnostics* diag, const DecreaseCheck& d) {
  if (!diag) return;
  ++diag->decrease_checks;
  if (!d.holds) ++diag->decrease_violations;
  const double excess = (d.required - d.decrease - d.slack) / std::max(d.required, 1e-300);
  diag->worst_decrease_excess = std::max(diag->worst_decrease_excess, excess);
}

}  // namespace

void AtmDiagnostics::merge(const AtmDiagnostics& other) {
  steps_checked += other.steps_checked;
  sandwich_violations += other.sandwich_violations;
  max_recurrence_residual = std::max(max_recurrence_residual, other.max_recurrence_residual);
  decrease_checks += other.decrease_checks;
  decrease_violations += other.decrease_violations;
  worst_decrease_excess = std::max(worst_decrease_excess, other.worst_decrease_excess);
}

double displacement_ratio(int p, double M_p, double L, double displacement) {
  return 2.0 * (p + 1) * M_p / (factorial(p) * L) * std::pow(displacement, p - 1);
}

double next_a(double L, double A) {
  const double inv = 1.0 / L;
  return 0.5 * (inv + std::sqrt(inv * inv + 4.0 * A * inv));
}

LkChoice search_Lk(const Oracle& oracle, const AtmState& state, int p, double M_p,
                   const AtmOptions& opts, AtmDiagnostics* diag) {
  if (!(M_p > 0.0) || !std::isfinite(M_p)) throw InputError("search_Lk: M_p must be positive");
  if (state.y.size() != oracle.dimension() || state.u.size() != oracle.dimension()) {
    throw InputError("search_Lk: state dimension mismatch");
  }

  double L = state.L_prev.value_or(2.0 * (p + 1) * M_p / factorial(p));
  std::optional<double> too_small;  // ratio > 1
  std::optional<double> too_large;  // ratio < 1/2
  int bracket_steps = 0;
  int bisection_steps = 0;
  int trials = 0;

  while (true) {
    Trial t = evaluate_trial(oracle, state, p, M_p, L, opts);
    ++trials;
    if (opts.check_invariants) record_decrease(diag, t.decrease);

    const double ratio = t.choice.ratio;
    if (ratio >= 0.5 && ratio <= 1.0) {
      t.choice.trials = trials;
      if (diag && opts.check_invariants) {
        ++diag->steps_checked;
        const LkChoice& c = t.choice;
        const double residual = std::abs(c.L * c.a * c.a - c.A_next) / c.A_next;
        diag->max_recurrence_residual = std::max(diag->max_recurrence_residual, residual);
        if (!(c.ratio >= 0.5 && c.ratio <= 1.0)) ++diag->sandwich_violations;
      }
      return std::move(t.choice);
    }

    if (ratio > 1.0) too_small = L; else too_large = L;
    if (too_small && too_large) {
      if (++bisection_steps > opts.max_bisection_steps) break;
      L = std::sqrt(*too_small * *too_large);
    } else {
      if (++bracket_steps > opts.max_bracket_steps) break;
      L = ratio > 1.0 ? 2.0 * L : 0.5 * L;
    }
    if (!(L > 0.0) || !std::isfinite(L)) break;
  }
  throw LineSearchError("no L_k satisfies the displacement condition after " +
                        std::to_string(trials) + " trials (last L = " + std::to_string(L) +
                        "); check M_p or the problem geometry");
}

std::string to_string(AtmStop reason) {
  switch (reason) {
    case AtmStop::Budget: return "budget";
    case AtmStop::GradientTarget: return "gradient_target";
    case AtmStop::Stagnation: return "stagnation";
  }
  return "unknown";
}

AtmResult run_atm(const Oracle& oracle, const Vector& y0, int N, int p, double M_p,
                  const AtmOptions& opts, const AtmObserver& observer) {
  if (N < 1) throw InputError("run_atm: iteration budget N must be >= 1");
  if (y0.size() != oracle.dimension()) throw InputError("run_atm: starting point dimension mismatch");
  if (!(M_p > 0.0) || !std::isfinite(M_p)) throw InputError("run_atm: M_p must be positive");
  require_order(oracle, p);
  require_finite(y0, "starting point");

  AtmResult result;
  AtmState state;
  state.y = y0;
  state.u = y0;

  const double g0 = oracle.gradient(y0).norm();
  require_finite(g0, "gradient");
  result.initial_grad_norm = g0;
  result.y = y0;
  if (g0 == 0.0 || (opts.stop_grad && g0 <= *opts.stop_grad)) {
    result.reason = AtmStop::GradientTarget;
    return result;
  }

  double best = g0;
  int since_best = 0;

  for (int k = 0; k < N; ++k) {
    LkChoice choice;
    try {
      choice = search_Lk(oracle, state, p, M_p, opts, &result.diagnostics);
    } catch (const SubproblemError& e) {
      result.y = state.y;
      throw AtmError(std::string("iteration ") + std::to_string(k) + ": " + e.what(), std::move(result));
    } catch (const LineSearchError& e) {
      result.y = state.y;
      throw AtmError(std::string("iteration ") + std::to_string(k) + ": " + e.what(), std::move(result));
    }

    const Vector grad = oracle.gradient(choice.y_next);
    require_finite(grad, "gradient");
    state.u -= choice.a * grad;
    state.A = choice.A_next;
    state.y = choice.y_next;
    state.L_prev = choice.L;
    state.k = k + 1;

    result.tensor_steps += choice.trials;
    IterationRecord rec;
    rec.k = state.k;
    rec.L = choice.L;
    rec.A = state.A;
    rec.f_value = oracle.value(state.y);
    rec.grad_norm = grad.norm();
    rec.displacement = (choice.y_next - choice.x).norm();
    rec.inner_iterations = choice.inner_iterations;
    rec.trials = choice.trials;
    rec.cumulative_trials = result.tensor_steps;
    result.trace.push_back(rec);
    result.iterations = state.k;
    result.last_L = choice.L;
    result.y = state.y;
    if (observer) observer(rec, state.y);

    if (rec.grad_norm == 0.0 || (opts.stop_grad && rec.grad_norm <= *opts.stop_grad)) {
      result.reason = AtmStop::GradientTarget;
      return result;
    }
    if (rec.grad_norm < best) {
      best = rec.grad_norm;
      since_best = 0;
    } else if (opts.stop_window && ++since_best >= *opts.stop_window) {
      result.reason = AtmStop::Stagnation;
      return result;
    }
  }
  result.reason = AtmStop::Budget;
  return result;
}

double theoretical_constant_c(int p) {
  if (p < 1 || p > 3) throw InputError("theoretical_constant_c: p must be 1, 2 or 3");
  const double q = p + 1.0;
  return std::pow(2.0, (3.0 * q * q + 4.0) / 4.0) * q / factorial(p);
}

double convergence_bound(int p, double M_p, double initial_distance, int k) {
  return theoretical_constant_c(p) * M_p * std::pow(initial_distance, p + 1) /
         std::pow(static_cast<double>(k), (3.0 * p + 1.0) / 2.0);
}

}  // namespace gradnorm
