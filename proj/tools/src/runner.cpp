#include "gradnorm_bench/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "gradnorm/csv.hpp"
#include "gradnorm/fd_check.hpp"
#include "gradnorm/ot_recovery.hpp"
#include "gradnorm/taylor_step.hpp"

namespace gradnorm::bench {

namespace fs = std::filesystem;
using nlohmann::json;

const char* const kTraceHeader =
    "restart_index,global_iter,inner_iter,L_k,f_value,grad_norm,grad_norm_mu,tensor_step_trials,wall_seconds";

namespace {

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <class T>
json list_json(const std::vector<T>& v) {
  json a = json::array();
  for (const T& x : v) a.push_back(x);
  return a;
}

Vector damped_newton(const Oracle& f, Vector x) {
  double best = f.gradient(x).norm();
  int stalled = 0;
  for (int it = 0; it < 500 && stalled < 5; ++it) {
    const Vector g = f.gradient(x);
    const double gn = g.norm();
    if (gn <= 1e-14) break;
    const Matrix H = f.hessian(x);
    const Vector d = -H.completeOrthogonalDecomposition().solve(g);
    const double f0 = f.value(x);
    const double slope = g.dot(d);
    double t = 1.0;
    while (t > 1e-12 && f.value(x + t * d) > f0 + 1e-4 * t * slope) t *= 0.5;
    Vector next = x + t * d;
    // Near the solution the value test is lost in rounding; accept full steps
    // that reduce the gradient instead.
    if (t <= 1e-12) {
      next = x + d;
      if (f.gradient(next).norm() >= gn) break;
    }
    x = std::move(next);
    const double now = f.gradient(x).norm();
    if (now < best * 0.5) {
      stalled = 0;
    } else {
      ++stalled;
    }
    best = std::min(best, now);
  }
  return x;
}

double resolve_lipschitz(const Problem& problem, const SolverConfig& sc, std::uint64_t seed, std::string* how) {
  switch (sc.M_p.kind) {
    case LipschitzSpec::Kind::Value:
      *how = "given";
      return sc.M_p.value;
    case LipschitzSpec::Kind::Declared: {
      *how = "declared";
      const auto m = problem.oracle->lipschitz(sc.p);
      if (!m) {
        throw ConfigError("solver.M_p: problem '" + problem.kind + "' declares no M_" + std::to_string(sc.p) +
                          "; give a number or \"estimate\"");
      }
      if (!(*m > 0.0)) {
        throw ConfigError("solver.M_p: declared M_" + std::to_string(sc.p) + " of problem '" + problem.kind +
                          "' is 0; give a positive number");
      }
      return *m;
    }
    case LipschitzSpec::Kind::Estimate: {
      *how = "estimate (heuristic)";
      const double m = estimate_lipschitz(*problem.oracle, sc.p, problem.x0, 1.0, 200, seed);
      if (!(m > 0.0)) throw ConfigError("solver.M_p: estimate came out as 0; give a positive number");
      return m;
    }
  }
  throw ConfigError("solver.M_p: unsupported");
}

}  // namespace

Problem build_problem(const ProblemConfig& pc, std::uint64_t seed) {
  const std::uint64_t s = pc.seed.value_or(seed);
  Problem pr;
  pr.kind = pc.kind;
  if (pc.kind == "quadratic") {
    auto q = random_quadratic(pc.n, s, pc.lambda_min, pc.lambda_max);
    pr.known_minimizer = q->Q().ldlt().solve(q->b());
    pr.oracle = q;
  } else if (pc.kind == "logistic") {
    LogisticDataset data;
    if (pc.source == "synthetic") {
      data = synthetic_logistic(pc.d, pc.n, s);
    } else {
      LibsvmOptions lo;
      lo.features = pc.features;
      lo.normalize_rows = pc.normalize_rows;
      lo.max_rows = pc.max_rows;
      lo.seed = s;
      data = load_libsvm(pc.path, lo);
    }
    pr.oracle = logistic_problem(std::move(data));
  } else if (pc.kind == "hard_family") {
    HardFamilySpec spec{pc.p, pc.n, pc.m};
    pr.hard = spec;
    pr.known_minimizer = hard_family_minimizer(spec);
    pr.oracle = hard_family_problem(spec);
  } else if (pc.kind == "ot_dual") {
    TransportInstance inst = pc.cost_path.empty()
                                 ? random_transport(pc.n, pc.gamma, s)
                                 : load_transport(pc.cost_path, pc.source_path, pc.target_path, pc.gamma);
    pr.transport = inst;
    pr.oracle = ot_dual_problem(std::move(inst));
  } else {
    throw ConfigError("problem.kind: unknown problem '" + pc.kind + "'");
  }
  const int n = pr.oracle->dimension();
  if (pc.x0) {
    if (static_cast<int>(pc.x0->size()) != n) {
      throw ConfigError("problem.x0: expected " + std::to_string(n) + " entries, got " +
                        std::to_string(pc.x0->size()));
    }
    pr.x0 = Eigen::Map<const Vector>(pc.x0->data(), n);
  } else {
    pr.x0 = Vector::Zero(n);
  }
  return pr;
}

Reference reference_solution(const Problem& problem) {
  const Oracle& f = *problem.oracle;
  Reference ref;
  if (problem.known_minimizer) {
    ref.x = *problem.known_minimizer;
    ref.method = "closed form";
  } else {
    if (f.order_supported() < 2) throw CapabilityError("reference_solution: needs a Hessian");
    ref.x = damped_newton(f, problem.x0);
    ref.method = "damped Newton";
    if (problem.transport) {
      const int n = problem.transport->size();
      Vector d = ref.x - problem.x0;
      const double a = d.head(n).mean();
      const double b = d.tail(n).mean();
      d.head(n).array() -= a;
      d.tail(n).array() -= b;
      ref.x = problem.x0 + d;
      ref.method = "damped Newton, closest minimizer to x0";
    }
  }
  ref.value = f.value(ref.x);
  ref.grad_norm = f.gradient(ref.x).norm();
  return ref;
}

double estimate_lipschitz(const Oracle& oracle, int p, const Vector& center, double radius, int samples,
                          std::uint64_t seed) {
  require_order(oracle, p);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> length(0.01, 1.0);
  const int n = oracle.dimension();
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vector x(n), h(n);
    for (int i = 0; i < n; ++i) x(i) = normal(rng);
    for (int i = 0; i < n; ++i) h(i) = normal(rng);
    x = center + radius * x / std::sqrt(static_cast<double>(n));
    const double r = radius * length(rng);
    h *= r / h.norm();
    const Vector y = x + h;
    const double rem = std::abs(oracle.value(y) - taylor_model_value(oracle, x, y, p, 0.0));
    best = std::max(best, factorial(p + 1) * rem / std::pow(r, p + 1));
  }
  return 2.0 * best;
}

RunOutput run_experiment(const RunConfig& config) {
  const SolverConfig& sc = config.solver;
  RunOutput out;
  out.problem = build_problem(config.problem, config.seed);
  const Problem& pr = out.problem;
  const Oracle& f = *pr.oracle;
  require_order(f, sc.p);

  std::string M_source;
  const double M_p = resolve_lipschitz(pr, sc, config.seed, &M_source);

  std::optional<Reference> ref;
  auto need_reference = [&]() -> const Reference& {
    if (!ref) ref = reference_solution(pr);
    return *ref;
  };

  double bound = 0.0;
  std::string bound_source;
  if (sc.wrapper == Wrapper::Gap) {
    if (sc.delta0->reference) {
      const Reference& r = need_reference();
      const double gap = f.value(pr.x0) - r.value;
      bound = sc.reference_margin * std::max(gap, 0.0) + 1e-12 * std::max(1.0, std::abs(r.value));
      bound_source = "reference";
    } else {
      bound = sc.delta0->value;
      bound_source = "given";
    }
  } else {
    if (sc.radius->reference) {
      const Reference& r = need_reference();
      bound = sc.reference_margin * (pr.x0 - r.x).norm() + 1e-12 * std::max(1.0, r.x.norm());
      bound_source = "reference";
    } else {
      bound = sc.radius->value;
      bound_source = "given";
    }
  }

  RestartOptions opts;
  opts.mode = sc.mode;
  opts.practical_cap = sc.practical_cap;
  opts.stagnation_window = sc.stagnation_window;

  try {
    out.result = sc.wrapper == Wrapper::Gap ? minimize_gradnorm_from_gap(f, pr.x0, bound, sc.eps, M_p, sc.p, opts)
                                            : minimize_gradnorm_from_radius(f, pr.x0, bound, sc.eps, M_p, sc.p, opts);
  } catch (const GuaranteeViolation& e) {
    out.result = e.partial();
    out.failure = e.what();
    out.guarantee_violation = true;
  } catch (const RestartFailure& e) {
    out.result = e.partial();
    out.failure = e.what();
  }

  const RestartRun& run = out.result.run;
  json s;
  s["status"] = !out.failure ? "ok" : out.guarantee_violation ? "guarantee_violation" : "solver_failure";
  if (out.failure) s["error"] = *out.failure;
  s["problem"] = {{"kind", pr.kind}, {"dimension", f.dimension()}};
  s["wrapper"] = to_string(sc.wrapper);
  s["mode"] = to_string(sc.mode);
  s["p"] = sc.p;
  s["M_p"] = M_p;
  s["M_p_source"] = M_source;
  s["M_mu"] = run.M_mu;
  s["eps"] = sc.eps;
  s["mu"] = run.mu;
  s["eps_tilde"] = run.eps_tilde;
  s[sc.wrapper == Wrapper::Gap ? "delta0" : "radius"] = bound;
  s["bound_source"] = bound_source;
  s["seed"] = config.problem.seed.value_or(config.seed);
  s["final_grad_norm"] = run.final_grad_norm;
  s["final_grad_norm_mu"] = run.final_grad_norm_mu;
  s["mu_distance_term"] = run.mu_distance_term;
  s["final_value"] = run.final_value;
  s["guarantee_met"] = run.guarantee_met;
  s["planned_restarts"] = run.planned_restarts;
  s["restarts"] = run.restarts;
  s["schedule"] = list_json(run.schedule);
  s["budgets"] = list_json(run.budgets);
  s["executed"] = list_json(run.executed);
  json reasons = json::array();
  for (AtmStop r : run.stop_reasons) reasons.push_back(to_string(r));
  s["stop_reasons"] = reasons;
  s["scheduled_iterations"] = run.scheduled_iterations;
  s["total_inner_iterations"] = run.total_inner_iterations;
  s["total_tensor_steps"] = run.total_tensor_steps;
  s["iteration_bound"] = run.iteration_bound;
  s["complexity_exponent"] = complexity_exponent(sc.wrapper, sc.p);
  s["terminal_bound"] = {{"exponent_p_over_p_plus_1", run.terminal_bound_statement},
                         {"exponent_p_plus_1_over_p", run.terminal_bound_variant}};
  const AtmDiagnostics& d = run.diagnostics;
  s["diagnostics"] = {{"steps_checked", d.steps_checked},
                      {"sandwich_violations", d.sandwich_violations},
                      {"max_recurrence_residual", d.max_recurrence_residual},
                      {"decrease_checks", d.decrease_checks},
                      {"decrease_violations", d.decrease_violations},
                      {"worst_decrease_excess", d.worst_decrease_excess},
                      {"clean", d.clean()}};
  if (ref) {
    s["reference"] = {{"value", ref->value}, {"grad_norm", ref->grad_norm}, {"method", ref->method}};
  }
  if (pr.transport && out.result.z.size() == f.dimension()) {
    const Certificate c = certificate(out.result.z, *pr.transport);
    const TransportCost tc = transport_cost(primal_plan(out.result.z, *pr.transport), *pr.transport);
    s["certificate"] = {{"eps_f", c.eps_f}, {"eps_f_signed", c.eps_f_signed}, {"eps_eq", c.eps_eq},
                        {"dual_value", c.dual_value}};
    s["plan"] = {{"linear_cost", tc.linear}, {"entropy", tc.entropy}, {"entropic_objective", tc.entropic}};
  }
  s["z"] = vec_json(out.result.z);
  out.summary = std::move(s);
  return out;
}

std::string trace_csv(const std::vector<TraceRow>& rows, bool timing) {
  std::ostringstream o;
  o << kTraceHeader << '\n';
  for (const TraceRow& r : rows) {
    o << r.restart_index << ',' << r.global_iter << ',' << r.inner_iter << ',' << format_double(r.L_k) << ','
      << format_double(r.f_value) << ',' << format_double(r.grad_norm) << ',' << format_double(r.grad_norm_mu)
      << ',' << r.tensor_step_trials << ',' << format_double(timing ? r.wall_seconds : 0.0) << '\n';
  }
  return o.str();
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw InputError("write failed for '" + path.string() + "'");
}

}  // namespace

void write_outputs(const std::string& dir, const RunOutput& out, bool timing) {
  fs::create_directories(dir);
  write_text(fs::path(dir) / "trace.csv", trace_csv(out.result.run.trace, timing));
  write_text(fs::path(dir) / "summary.json", out.summary.dump(2) + "\n");
  if (out.problem.transport && out.result.z.size() == out.problem.oracle->dimension()) {
    write_plan_csv((fs::path(dir) / "plan.csv").string(), primal_plan(out.result.z, *out.problem.transport));
  }
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("loglog_slope: need two or more paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InputError("loglog_slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw InputError("loglog_slope: x values must differ");
  return sxy / sxx;
}

SweepOutput run_sweep(const RunConfig& config, const std::vector<double>& eps_list, const std::string& dir) {
  if (eps_list.size() < 3) throw ConfigError("sweep: at least three eps values are required");
  SweepOutput sw;
  sw.theoretical_exponent = complexity_exponent(config.solver.wrapper, config.solver.p);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    RunConfig c = config;
    c.solver.eps = eps_list[i];
    const RunOutput out = run_experiment(c);
    const RestartRun& run = out.result.run;
    SweepPoint pt;
    pt.eps = eps_list[i];
    pt.scheduled_iterations = run.scheduled_iterations;
    pt.total_inner_iterations = run.total_inner_iterations;
    pt.iterations = c.solver.mode == RunMode::Theoretical ? run.scheduled_iterations : run.total_inner_iterations;
    pt.final_grad_norm = run.final_grad_norm;
    pt.guarantee_met = run.guarantee_met && !out.failure;
    sw.all_met = sw.all_met && pt.guarantee_met;
    sw.points.push_back(pt);
    xs.push_back(pt.eps);
    ys.push_back(static_cast<double>(std::max<long long>(pt.iterations, 1)));
    if (!dir.empty()) write_outputs((fs::path(dir) / ("eps_" + std::to_string(i))).string(), out, config.timing);
  }
  sw.fitted_slope = loglog_slope(xs, ys);
  if (!dir.empty()) {
    std::ostringstream o;
    o << "eps,iterations,scheduled_iterations,total_inner_iterations,final_grad_norm,guarantee_met,"
         "theoretical_exponent,fitted_slope\n";
    for (const SweepPoint& pt : sw.points) {
      o << format_double(pt.eps) << ',' << pt.iterations << ',' << pt.scheduled_iterations << ','
        << pt.total_inner_iterations << ',' << format_double(pt.final_grad_norm) << ','
        << (pt.guarantee_met ? "true" : "false") << ',' << format_double(sw.theoretical_exponent) << ','
        << format_double(sw.fitted_slope) << '\n';
    }
    fs::create_directories(dir);
    write_text(fs::path(dir) / "sweep.csv", o.str());
  }
  return sw;
}

json validate_problem(const Problem& problem, int points, std::uint64_t seed, bool* pass) {
  if (points < 1) throw InputError("validate: points must be >= 1");
  const Oracle& f = *problem.oracle;
  const int n = f.dimension();
  const int max_order = std::min(3, f.order_supported());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::shared_ptr<const HardFamilyOracle> hard;
  if (problem.hard) hard = std::make_shared<HardFamilyOracle>(*problem.hard);

  struct Worst {
    double error = 0.0;
    int point = -1;
    int coordinate = -1;
    double tolerance = 0.0;
    int failures = 0;
  };
  std::vector<Worst> worst(max_order);
  double asym = 0.0;
  bool ok = true;
  for (int k = 0; k < points; ++k) {
    Vector x(n);
    for (int attempt = 0;; ++attempt) {
      for (int i = 0; i < n; ++i) x(i) = problem.x0(i) + normal(rng);
      if (!hard || hard->apply_A(x).cwiseAbs().minCoeff() > 0.1) break;
      if (attempt > 10000) throw EvaluationError("validate: could not sample a point away from the kinks");
    }
    const FdReport rep = fd_check(f, x, max_order);
    asym = std::max(asym, rep.hessian_asymmetry);
    ok = ok && rep.pass;
    for (const FdOrderReport& o : rep.orders) {
      Worst& w = worst[o.order - 1];
      w.tolerance = o.tolerance;
      if (!o.pass) ++w.failures;
      if (o.max_rel_error >= w.error) {
        w.error = o.max_rel_error;
        w.point = k;
        w.coordinate = o.worst_coordinate;
      }
    }
  }
  json orders = json::array();
  for (int o = 0; o < max_order; ++o) {
    orders.push_back({{"order", o + 1},
                      {"max_rel_error", worst[o].error},
                      {"tolerance", worst[o].tolerance},
                      {"worst_point", worst[o].point},
                      {"worst_coordinate", worst[o].coordinate},
                      {"failures", worst[o].failures},
                      {"pass", worst[o].failures == 0}});
  }
  if (pass) *pass = ok;
  return {{"problem", problem.kind}, {"dimension", n},          {"points", points},
          {"seed", seed},            {"hessian_asymmetry", asym}, {"orders", orders},
          {"pass", ok}};
}

}  // namespace gradnorm::bench
