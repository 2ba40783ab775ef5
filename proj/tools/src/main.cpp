#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gradnorm/errors.hpp"
#include "gradnorm_bench/config.hpp"
#include "gradnorm_bench/runner.hpp"

namespace fs = std::filesystem;
using namespace gradnorm;
using namespace gradnorm::bench;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct Common {
  std::string config;
  std::string out = "out";
  std::string mode;
  std::optional<std::uint64_t> seed;
};

RunConfig load(const Common& c) {
  RunConfig rc = load_config(c.config);
  if (!c.mode.empty()) {
    try {
      rc.solver.mode = parse_run_mode(c.mode);
    } catch (const InputError& e) {
      throw ConfigError(std::string("--mode: ") + e.what());
    }
  }
  if (c.seed) rc.seed = *c.seed;
  return rc;
}

int cmd_run(const Common& c) {
  const RunConfig rc = load(c);
  const RunOutput out = run_experiment(rc);
  write_outputs(c.out, out, rc.timing);
  const RestartRun& run = out.result.run;
  std::cout << "problem " << out.problem.kind << ", " << to_string(rc.solver.wrapper) << " wrapper, "
            << to_string(rc.solver.mode) << " mode, p = " << rc.solver.p << "\n"
            << "||grad f(z)|| = " << run.final_grad_norm << " (eps = " << rc.solver.eps << ")\n"
            << "restarts " << run.restarts << ", inner iterations " << run.total_inner_iterations
            << ", scheduled " << run.scheduled_iterations << "\n"
            << "wrote " << (fs::path(c.out) / "summary.json").string() << "\n";
  if (out.failure) {
    std::cerr << "error: " << *out.failure << "\n";
    return kExitSolver;
  }
  return 0;
}

int cmd_sweep(const Common& c, const std::string& eps_list) {
  const RunConfig rc = load(c);
  std::vector<double> eps = eps_list.empty() ? rc.sweep_eps : parse_eps_list(eps_list);
  if (eps.empty()) throw ConfigError("--eps-list: required (or give sweep.eps in the config)");
  const SweepOutput sw = run_sweep(rc, eps, c.out);
  for (const SweepPoint& pt : sw.points) {
    std::cout << "eps " << pt.eps << ": iterations " << pt.iterations << ", ||grad f|| " << pt.final_grad_norm
              << (pt.guarantee_met ? "" : "  (guarantee missed)") << "\n";
  }
  std::cout << "fitted slope " << sw.fitted_slope << ", theoretical exponent " << sw.theoretical_exponent << "\n"
            << "wrote " << (fs::path(c.out) / "sweep.csv").string() << "\n";
  return sw.all_met ? 0 : kExitSolver;
}

int cmd_validate(const Common& c, std::optional<int> points) {
  const RunConfig rc = load(c);
  const Problem pr = build_problem(rc.problem, rc.seed);
  bool pass = false;
  const auto report = validate_problem(pr, points.value_or(rc.validate_points), rc.seed, &pass);
  fs::create_directories(c.out);
  std::ofstream(fs::path(c.out) / "validate.json") << report.dump(2) << "\n";
  for (const auto& o : report.at("orders")) {
    std::cout << "order " << o.at("order").get<int>() << ": max rel error "
              << o.at("max_rel_error").get<double>() << " (tol " << o.at("tolerance").get<double>() << ") "
              << (o.at("pass").get<bool>() ? "pass" : "FAIL") << "\n";
  }
  std::cout << (pass ? "derivative check passed" : "derivative check FAILED") << "\n";
  return pass ? 0 : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-norm minimization with accelerated tensor methods"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, validate_opts;
  std::string eps_list;
  std::optional<int> points;
  auto add_common = [](CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON config file")->required();
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
    sub->add_option("--mode", c.mode, "theoretical or practical (overrides the config)");
    sub->add_option("--seed", c.seed, "Seed (overrides the config)");
  };
  CLI::App* run = app.add_subcommand("run", "Run one experiment; writes trace.csv and summary.json");
  add_common(run, run_opts);
  CLI::App* sweep = app.add_subcommand("sweep", "Run over several eps and fit the iteration exponent");
  add_common(sweep, sweep_opts);
  sweep->add_option("--eps-list", eps_list, "Comma-separated eps values, at least three");
  CLI::App* validate = app.add_subcommand("validate", "Finite-difference check of the problem's derivatives");
  add_common(validate, validate_opts);
  validate->add_option("--points", points, "Number of random points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*sweep) return cmd_sweep(sweep_opts, eps_list);
    return cmd_validate(validate_opts, points);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CapabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}
