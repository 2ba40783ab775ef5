#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradnorm/errors.hpp"
#include "gradnorm/restarts.hpp"

namespace gradnorm::bench {

/// Invalid configuration; the message names the offending field.
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

struct ProblemConfig {
  std::string kind;  ///< quadratic | logistic | hard_family | ot_dual
  std::optional<std::uint64_t> seed;

  // quadratic
  int n = 5;
  double lambda_min = 0.01;
  double lambda_max = 1.0;

  // logistic
  std::string source = "synthetic";  ///< synthetic | libsvm
  int d = 100;
  std::string path;
  bool normalize_rows = false;
  std::optional<int> max_rows;
  std::optional<int> features;

  // hard_family (n shared with quadratic)
  int p = 3;
  int m = 5;

  // ot_dual (n shared); either generated or loaded from CSV files
  double gamma = 0.5;
  std::string cost_path, source_path, target_path;

  std::optional<std::vector<double>> x0;
};

/// How the smoothness constant is obtained.
struct LipschitzSpec {
  enum class Kind { Declared, Estimate, Value } kind = Kind::Declared;
  double value = 0.0;
};

/// An initial bound given as a number or computed from a reference solve.
struct BoundSpec {
  bool reference = false;
  double value = 0.0;
};

struct SolverConfig {
  Wrapper wrapper = Wrapper::Radius;
  int p = 3;
  double eps = 1e-5;
  LipschitzSpec M_p;
  std::optional<BoundSpec> delta0;
  std::optional<BoundSpec> radius;
  /// Multiplies reference-derived bounds so round-off cannot make them too small.
  double reference_margin = 1.0 + 1e-6;
  RunMode mode = RunMode::Practical;
  int practical_cap = 500;
  int stagnation_window = 500;
};

struct RunConfig {
  ProblemConfig problem;
  SolverConfig solver;
  std::uint64_t seed = 0;
  bool timing = false;
  std::vector<double> sweep_eps;
  int validate_points = 20;
};

/// Parses and validates; paths are resolved against `base_dir` and must exist.
RunConfig parse_config(const nlohmann::json& j, const std::string& base_dir = ".");
/// Reads a JSON file. Parse failures become ConfigError with the path in the message.
RunConfig load_config(const std::string& path);

/// "1e-2,3e-3" -> {0.01, 0.003}.
std::vector<double> parse_eps_list(const std::string& text);

}  // namespace gradnorm::bench
