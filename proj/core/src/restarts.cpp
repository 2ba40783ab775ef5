#include "gradnorm/restarts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "gradnorm/errors.hpp"
#include "gradnorm/taylor_step.hpp"

namespace gradnorm {

namespace {

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

constexpr double kMaxIterations = 1e15;

long long schedule_from_base(double base, int p, const char* name, int k) {
  const double value = std::pow(base, 2.0 / (3.0 * p + 1.0));
  if (!std::isfinite(base) || !std::isfinite(value) || value > kMaxIterations) {
    std::ostringstream msg;
    msg << name << ": N_" << k << " overflows (base " << base << ", p " << p << ")";
    throw ScheduleError(msg.str());
  }
  return std::max(static_cast<long long>(std::ceil(value)), 1LL);
}

void validate_schedule_args(int k, double bound, double mu, double M_p, int p) {
  if (k < 0) throw InputError("schedule: k must be >= 0");
  if (p < 1 || p > 3) throw InputError("schedule: p must be 1, 2 or 3");
  if (!(bound > 0.0) || !(mu > 0.0) || !(M_p > 0.0)) {
    throw InputError("schedule: bound, mu and M_p must be positive");
  }
}

struct Driver {
  const Oracle& oracle;
  const Vector& x0;
  Wrapper wrapper;
  double bound;
  double eps;
  double M_p;
  int p;
  const RestartOptions& opts;

  bool keep_going(int k, const RestartRun& run) const {
    if (wrapper == Wrapper::Gap) return std::ldexp(bound, -k) >= run.eps_tilde;
    // z_0 = x0 carries no bound on f_mu(z_0) - f_mu*; the gap bound
    // mu R_k^2 / 2 only holds after an accelerated run, so restart 0 always runs.
    if (k == 0) return true;
    const double Rk = std::ldexp(bound, -k);
    return run.mu * Rk * Rk / 2.0 >= run.eps_tilde;
  }

  GradnormResult operator()() const {
    require_order(oracle, p);
    if (x0.size() != oracle.dimension()) throw InputError("wrapper: x0 dimension mismatch");
    require_finite(x0, "x0");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("wrapper: eps must be positive");
    if (!(M_p > 0.0) || !std::isfinite(M_p)) throw InputError("wrapper: M_p must be positive");
    if (!(bound > 0.0) || !std::isfinite(bound)) {
      throw InputError(wrapper == Wrapper::Gap ? "wrapper: Delta_0 must be positive"
                                               : "wrapper: R must be positive");
    }

    if (opts.practical_cap < 1) throw InputError("wrapper: practical_cap must be >= 1");
    if (opts.stagnation_window < 1) throw InputError("wrapper: stagnation_window must be >= 1");

    GradnormResult out;
    RestartRun& run = out.run;
    run.wrapper = wrapper;
    run.mode = opts.mode;
    run.p = p;
    run.M_p = M_p;
    run.M_mu = p * M_p;
    run.eps = eps;
    run.initial_bound = bound;
    run.mu = wrapper == Wrapper::Gap ? gap_mu(eps, bound) : radius_mu(eps, bound);
    run.eps_tilde = inner_threshold(eps, M_p, p);
    run.planned_restarts = wrapper == Wrapper::Gap ? gap_restart_count(bound, run.eps_tilde)
                                                   : std::max(1, radius_restart_count(bound, run.mu, run.eps_tilde));
    run.iteration_bound = wrapper == Wrapper::Gap
                              ? gap_iteration_bound(bound, run.mu, M_p, p, run.planned_restarts)
                              : radius_iteration_bound(bound, run.mu, M_p, p, run.planned_restarts);

    const OraclePtr f_mu = make_regularized(borrow(oracle), x0, run.mu);
    const double M_p_mu = regularized_lipschitz(M_p, p, run.mu);

    AtmOptions atm;
    atm.check_invariants = opts.check_invariants;
    atm.step.tol = opts.step_tol.value_or(default_step_tolerance(eps));
    if (opts.mode == RunMode::Practical) {
      atm.stop_grad = opts.inner_stop_grad.value_or(0.25 * eps);
      atm.stop_window = opts.stagnation_window;
    } else {
      atm.stop_grad = opts.inner_stop_grad.value_or(1e-6 * eps);
    }

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    long global_iter = 0;
    auto push_row = [&](int restart, int inner, double L, const Vector& point) {
      if (!opts.record_trace) return;
      TraceRow row;
      row.restart_index = restart;
      row.global_iter = global_iter++;
      row.inner_iter = inner;
      row.L_k = L;
      row.f_value = oracle.value(point);
      row.grad_norm = oracle.gradient(point).norm();
      row.grad_norm_mu = f_mu->gradient(point).norm();
      row.tensor_step_trials = run.total_tensor_steps;
      row.wall_seconds = elapsed();
      run.trace.push_back(row);
    };

    Vector z = x0;
    if (opts.record_points) run.points.push_back(z);
    int k = 0;
    while (keep_going(k, run)) {
      const double bound_k = std::ldexp(bound, -k);
      const long long N_k = wrapper == Wrapper::Gap ? schedule_Nk_gap(k, bound, run.mu, M_p, p)
                                                    : schedule_Nk_radius(k, bound, run.mu, M_p, p);
      long long budget = N_k;
      if (opts.mode == RunMode::Practical) budget = std::min<long long>(N_k, opts.practical_cap);
      if (budget > std::numeric_limits<int>::max()) {
        throw ScheduleError("restart " + std::to_string(k) + ": N_k = " + std::to_string(N_k) +
                            " exceeds the supported iteration count");
      }
      run.bounds.push_back(bound_k);
      run.schedule.push_back(N_k);
      run.budgets.push_back(budget);
      run.scheduled_iterations += N_k;

      push_row(k, 0, 0.0, z);
      const long steps_before = run.total_tensor_steps;
      auto observer = [&](const IterationRecord& rec, const Vector& y) {
        run.total_tensor_steps = steps_before + rec.cumulative_trials;
        push_row(k, rec.k, rec.L, y);
      };

      AtmResult inner;
      try {
        inner = run_atm(*f_mu, z, static_cast<int>(budget), p, M_p_mu, atm, observer);
      } catch (const AtmError& e) {
        run.diagnostics.merge(e.partial().diagnostics);
        run.restarts = k;
        out.z = e.partial().y;
        throw RestartFailure("restart " + std::to_string(k) + ": " + e.what(), std::move(out));
      }
      run.total_tensor_steps = steps_before + inner.tensor_steps;
      run.executed.push_back(inner.iterations);
      run.total_inner_iterations += inner.iterations;
      run.stop_reasons.push_back(inner.reason);
      run.diagnostics.merge(inner.diagnostics);
      run.inner_traces.push_back(std::move(inner.trace));
      z = std::move(inner.y);
      if (opts.record_points) run.points.push_back(z);
      ++k;
    }
    run.restarts = k;
    if (k != run.planned_restarts) {
      throw std::logic_error("restart loop exited at k = " + std::to_string(k) +
                             ", closed form gives K = " + std::to_string(run.planned_restarts));
    }

    TensorStepOptions terminal;
    terminal.tol = atm.step.tol;
    terminal.relative_tol = atm.step.relative_tol;
    TensorStepResult last;
    try {
      last = tensor_step(*f_mu, z, p, p * M_p_mu, terminal);
    } catch (const SubproblemError& e) {
      out.z = e.best_iterate();
      throw RestartFailure(std::string("terminal step: ") + e.what(), std::move(out));
    }
    ++run.total_tensor_steps;
    out.z = last.y;

    run.final_grad_norm_mu = f_mu->gradient(out.z).norm();
    run.final_grad_norm = oracle.gradient(out.z).norm();
    run.final_value = oracle.value(out.z);
    run.mu_distance_term = run.mu * (out.z - x0).norm();

    const double step_constant = p * M_p_mu;
    if (opts.check_invariants) {
      const DecreaseCheck d = check_step_decrease(*f_mu, z, out.z, p, step_constant);
      ++run.diagnostics.decrease_checks;
      if (!d.holds) ++run.diagnostics.decrease_violations;
    }
    const double scaled = 8.0 * factorial(p + 1) * std::pow(step_constant, 1.0 / p) *
                          std::max(0.0, measured_decrease(*f_mu, z, out.z));
    run.terminal_bound_statement = std::pow(scaled, p / (p + 1.0));
    run.terminal_bound_variant = std::pow(scaled, (p + 1.0) / p);

    push_row(k, 0, 0.0, out.z);

    run.guarantee_met = run.final_grad_norm <= eps;
    if (!run.guarantee_met) {
      std::ostringstream msg;
      msg << "gradient norm " << run.final_grad_norm << " exceeds eps = " << eps
          << " (||grad f_mu|| = " << run.final_grad_norm_mu << ", mu ||z - x0|| = " << run.mu_distance_term
          << "); the supplied " << (wrapper == Wrapper::Gap ? "Delta_0" : "R") << " or M_p is likely too small";
      throw GuaranteeViolation(msg.str(), std::move(out));
    }
    return out;
  }
};

}  // namespace

std::string to_string(Wrapper w) { return w == Wrapper::Gap ? "gap" : "radius"; }
std::string to_string(RunMode m) { return m == RunMode::Theoretical ? "theoretical" : "practical"; }

Wrapper parse_wrapper(const std::string& s) {
  if (s == "gap") return Wrapper::Gap;
  if (s == "radius") return Wrapper::Radius;
  throw InputError("unknown wrapper '" + s + "' (expected gap or radius)");
}

RunMode parse_run_mode(const std::string& s) {
  if (s == "theoretical") return RunMode::Theoretical;
  if (s == "practical") return RunMode::Practical;
  throw InputError("unknown mode '" + s + "' (expected theoretical or practical)");
}

long long schedule_Nk_gap(int k, double delta0, double mu, double M_p, int p) {
  validate_schedule_args(k, delta0, mu, M_p, p);
  const double c = theoretical_constant_c(p);
  const double delta_k = std::ldexp(delta0, -k);
  const double base = 2.0 * c * M_p * std::pow(2.0, (p + 1) / 2.0) * std::pow(delta_k, (p - 1) / 2.0) /
                      std::pow(mu, (p + 1) / 2.0);
  return schedule_from_base(base, p, "schedule_Nk_gap", k);
}

long long schedule_Nk_radius(int k, double R, double mu, double M_p, int p) {
  validate_schedule_args(k, R, mu, M_p, p);
  const double c = theoretical_constant_c(p);
  const double R_k = std::ldexp(R, -k);
  const double base = 8.0 * c * M_p * std::pow(R_k, p - 1) / mu;
  return schedule_from_base(base, p, "schedule_Nk_radius", k);
}

double inner_threshold(double eps, double M_p, int p) {
  return std::pow(eps / 2.0, p / (p + 1.0)) / (8.0 * std::pow(p * M_p, 1.0 / p) * factorial(p + 1));
}

double gap_mu(double eps, double delta0) { return eps * eps / (32.0 * delta0); }
double radius_mu(double eps, double R) { return eps / (4.0 * R); }

int gap_restart_count(double delta0, double eps_tilde) {
  if (delta0 < eps_tilde) return 0;
  int k = std::max(0, static_cast<int>(std::ceil(std::log2(delta0 / eps_tilde))));
  while (std::ldexp(delta0, -k) >= eps_tilde) ++k;
  while (k > 0 && std::ldexp(delta0, -(k - 1)) < eps_tilde) --k;
  return k;
}

int radius_restart_count(double R, double mu, double eps_tilde) {
  auto active = [&](int k) {
    const double Rk = std::ldexp(R, -k);
    return mu * Rk * Rk / 2.0 >= eps_tilde;
  };
  if (!active(0)) return 0;
  int k = std::max(0, static_cast<int>(std::ceil(0.5 * std::log2(mu * R * R / (2.0 * eps_tilde)))));
  while (active(k)) ++k;
  while (k > 0 && !active(k - 1)) --k;
  return k;
}

namespace {

// sum_{k<K} q^k
double geometric_sum(double q, int K) {
  if (K <= 0) return 0.0;
  if (q == 1.0) return K;
  return (1.0 - std::pow(q, K)) / (1.0 - q);
}

}  // namespace

double gap_iteration_bound(double delta0, double mu, double M_p, int p, int K) {
  const double c = theoretical_constant_c(p);
  const double e = 2.0 / (3.0 * p + 1.0);
  const double scale = std::pow(2.0 * c * std::pow(2.0, (p + 1) / 2.0), e) * std::pow(M_p, e) /
                       std::pow(mu, (p + 1.0) / (3.0 * p + 1.0)) *
                       std::pow(delta0, (p - 1.0) / (3.0 * p + 1.0));
  const double ratio = std::pow(2.0, -(p - 1.0) / (3.0 * p + 1.0));
  return scale * geometric_sum(ratio, K) + K;
}

double radius_iteration_bound(double R, double mu, double M_p, int p, int K) {
  const double c = theoretical_constant_c(p);
  const double e = 2.0 / (3.0 * p + 1.0);
  const double scale = std::pow(8.0 * c * M_p * std::pow(R, p - 1) / mu, e);
  const double ratio = std::pow(2.0, -2.0 * (p - 1.0) / (3.0 * p + 1.0));
  return scale * geometric_sum(ratio, K) + K;
}

double complexity_exponent(Wrapper w, int p) {
  return w == Wrapper::Gap ? -2.0 * (p + 1) / (3.0 * p + 1) : -2.0 / (3.0 * p + 1);
}

GradnormResult minimize_gradnorm_from_gap(const Oracle& oracle, const Vector& x0, double delta0,
                                          double eps, double M_p, int p, const RestartOptions& opts) {
  return Driver{oracle, x0, Wrapper::Gap, delta0, eps, M_p, p, opts}();
}

GradnormResult minimize_gradnorm_from_radius(const Oracle& oracle, const Vector& x0, double R,
                                             double eps, double M_p, int p,
                                             const RestartOptions& opts) {
  return Driver{oracle, x0, Wrapper::Radius, R, eps, M_p, p, opts}();
}

}  // namespace gradnorm
