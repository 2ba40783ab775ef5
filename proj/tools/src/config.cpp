#include "gradnorm_bench/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace gradnorm::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + "." + key + ": unknown field");
  }
}

const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  return j;
}

double get_number(const json& obj, const std::string& key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + ": must be finite");
  return x;
}

int get_int(const json& obj, const std::string& key, const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  return v.get<bool>();
}

std::uint64_t get_seed(const json& v, const std::string& where) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError(where + ": expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string existing_path(const json& obj, const std::string& key, const std::string& where,
                          const std::string& base_dir) {
  const std::string raw = get_string(obj, key, where, "");
  if (raw.empty()) throw ConfigError(where + "." + key + ": required");
  fs::path p(raw);
  if (p.is_relative()) p = fs::path(base_dir) / p;
  if (!fs::exists(p)) throw ConfigError(where + "." + key + ": file not found: " + p.string());
  return p.string();
}

void require_positive_int(int v, const std::string& field, int minimum = 1) {
  if (v < minimum) throw ConfigError(field + ": must be >= " + std::to_string(minimum));
}

ProblemConfig parse_problem(const json& j, const std::string& base_dir) {
  const std::string w = "problem";
  require_object(j, w);
  ProblemConfig pc;
  pc.kind = get_string(j, "kind", w, "");
  if (j.contains("seed")) pc.seed = get_seed(j.at("seed"), w + ".seed");
  if (j.contains("x0")) {
    const json& x = j.at("x0");
    if (!x.is_array()) throw ConfigError(w + ".x0: expected an array of numbers");
    std::vector<double> v;
    for (const json& e : x) {
      if (!e.is_number()) throw ConfigError(w + ".x0: expected an array of numbers");
      v.push_back(e.get<double>());
    }
    pc.x0 = std::move(v);
  }

  if (pc.kind == "quadratic") {
    reject_unknown(j, w, {"kind", "seed", "x0", "n", "lambda_min", "lambda_max"});
    pc.n = get_int(j, "n", w, 5);
    pc.lambda_min = get_number(j, "lambda_min", w, 0.01);
    pc.lambda_max = get_number(j, "lambda_max", w, 1.0);
    require_positive_int(pc.n, w + ".n");
    if (!(pc.lambda_min > 0.0)) throw ConfigError(w + ".lambda_min: must be positive");
    if (pc.lambda_max < pc.lambda_min) throw ConfigError(w + ".lambda_max: must be >= lambda_min");
  } else if (pc.kind == "logistic") {
    reject_unknown(j, w, {"kind", "seed", "x0", "source", "d", "n", "path", "normalize_rows", "max_rows", "features"});
    pc.source = get_string(j, "source", w, "synthetic");
    if (pc.source == "synthetic") {
      pc.d = get_int(j, "d", w, 100);
      pc.n = get_int(j, "n", w, 10);
      require_positive_int(pc.d, w + ".d");
      require_positive_int(pc.n, w + ".n");
    } else if (pc.source == "libsvm") {
      pc.path = existing_path(j, "path", w, base_dir);
      pc.normalize_rows = get_bool(j, "normalize_rows", w, false);
      if (j.contains("max_rows")) {
        pc.max_rows = get_int(j, "max_rows", w, 0);
        require_positive_int(*pc.max_rows, w + ".max_rows");
      }
      if (j.contains("features")) {
        pc.features = get_int(j, "features", w, 0);
        require_positive_int(*pc.features, w + ".features");
      }
    } else {
      throw ConfigError(w + ".source: expected synthetic or libsvm");
    }
  } else if (pc.kind == "hard_family") {
    reject_unknown(j, w, {"kind", "seed", "x0", "p", "n", "m"});
    pc.p = get_int(j, "p", w, 3);
    pc.n = get_int(j, "n", w, 5);
    pc.m = get_int(j, "m", w, pc.n);
    if (pc.p < 1 || pc.p > 3) throw ConfigError(w + ".p: must be 1, 2 or 3");
    require_positive_int(pc.n, w + ".n", 2);
    if (pc.m < 2 || pc.m > pc.n) throw ConfigError(w + ".m: need 2 <= m <= n");
  } else if (pc.kind == "ot_dual") {
    reject_unknown(j, w, {"kind", "seed", "x0", "n", "gamma", "cost", "source", "target"});
    pc.gamma = get_number(j, "gamma", w, 0.5);
    if (!(pc.gamma > 0.0)) throw ConfigError(w + ".gamma: must be positive");
    if (j.contains("cost") || j.contains("source") || j.contains("target")) {
      pc.cost_path = existing_path(j, "cost", w, base_dir);
      pc.source_path = existing_path(j, "source", w, base_dir);
      pc.target_path = existing_path(j, "target", w, base_dir);
    } else {
      pc.n = get_int(j, "n", w, 10);
      require_positive_int(pc.n, w + ".n");
    }
  } else if (pc.kind.empty()) {
    throw ConfigError(w + ".kind: required (quadratic, logistic, hard_family or ot_dual)");
  } else {
    throw ConfigError(w + ".kind: unknown problem '" + pc.kind + "'");
  }
  return pc;
}

std::optional<BoundSpec> parse_bound(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  const json& v = j.at(key);
  BoundSpec b;
  if (v.is_string()) {
    if (v.get<std::string>() != "reference") {
      throw ConfigError(where + "." + key + ": expected a positive number or \"reference\"");
    }
    b.reference = true;
  } else if (v.is_number()) {
    b.value = v.get<double>();
    if (!(b.value > 0.0) || !std::isfinite(b.value)) throw ConfigError(where + "." + key + ": must be positive");
  } else {
    throw ConfigError(where + "." + key + ": expected a positive number or \"reference\"");
  }
  return b;
}

SolverConfig parse_solver(const json& j) {
  const std::string w = "solver";
  require_object(j, w);
  reject_unknown(j, w, {"wrapper", "p", "eps", "M_p", "delta0", "radius", "reference_margin", "mode",
                        "practical_cap", "stagnation_window"});
  SolverConfig sc;
  try {
    sc.wrapper = parse_wrapper(get_string(j, "wrapper", w, "radius"));
    sc.mode = parse_run_mode(get_string(j, "mode", w, "practical"));
  } catch (const InputError& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  sc.p = get_int(j, "p", w, 3);
  if (sc.p < 1 || sc.p > 3) throw ConfigError(w + ".p: must be 1, 2 or 3");
  if (!j.contains("eps")) throw ConfigError(w + ".eps: required");
  sc.eps = get_number(j, "eps", w, 0.0);
  if (!(sc.eps > 0.0)) throw ConfigError(w + ".eps: must be positive");

  if (j.contains("M_p")) {
    const json& v = j.at("M_p");
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "declared") {
        sc.M_p.kind = LipschitzSpec::Kind::Declared;
      } else if (s == "estimate") {
        sc.M_p.kind = LipschitzSpec::Kind::Estimate;
      } else {
        throw ConfigError(w + ".M_p: expected a positive number, \"declared\" or \"estimate\"");
      }
    } else if (v.is_number()) {
      sc.M_p.kind = LipschitzSpec::Kind::Value;
      sc.M_p.value = v.get<double>();
      if (!(sc.M_p.value > 0.0) || !std::isfinite(sc.M_p.value)) throw ConfigError(w + ".M_p: must be positive");
    } else {
      throw ConfigError(w + ".M_p: expected a positive number, \"declared\" or \"estimate\"");
    }
  }
  sc.delta0 = parse_bound(j, "delta0", w);
  sc.radius = parse_bound(j, "radius", w);
  if (sc.wrapper == Wrapper::Gap && !sc.delta0) throw ConfigError(w + ".delta0: required for the gap wrapper");
  if (sc.wrapper == Wrapper::Radius && !sc.radius) throw ConfigError(w + ".radius: required for the radius wrapper");
  sc.reference_margin = get_number(j, "reference_margin", w, sc.reference_margin);
  if (!(sc.reference_margin >= 1.0)) throw ConfigError(w + ".reference_margin: must be >= 1");
  sc.practical_cap = get_int(j, "practical_cap", w, 500);
  sc.stagnation_window = get_int(j, "stagnation_window", w, 500);
  require_positive_int(sc.practical_cap, w + ".practical_cap");
  require_positive_int(sc.stagnation_window, w + ".stagnation_window");
  return sc;
}

}  // namespace

RunConfig parse_config(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(j, "config", {"problem", "solver", "seed", "timing", "sweep", "validate"});
  RunConfig rc;
  if (!j.contains("problem")) throw ConfigError("problem: required");
  if (!j.contains("solver")) throw ConfigError("solver: required");
  if (j.contains("seed")) rc.seed = get_seed(j.at("seed"), "seed");
  rc.timing = get_bool(j, "timing", "config", false);
  rc.problem = parse_problem(j.at("problem"), base_dir);
  rc.solver = parse_solver(j.at("solver"));
  if (rc.problem.kind == "hard_family" && rc.problem.p != rc.solver.p &&
      rc.solver.M_p.kind == LipschitzSpec::Kind::Declared) {
    throw ConfigError("solver.p: the hard family declares M_p only for its own order " +
                      std::to_string(rc.problem.p));
  }
  if (j.contains("sweep")) {
    const json& s = require_object(j.at("sweep"), "sweep");
    reject_unknown(s, "sweep", {"eps"});
    if (s.contains("eps")) {
      if (!s.at("eps").is_array()) throw ConfigError("sweep.eps: expected an array of numbers");
      for (const json& e : s.at("eps")) {
        if (!e.is_number() || !(e.get<double>() > 0.0)) throw ConfigError("sweep.eps: entries must be positive numbers");
        rc.sweep_eps.push_back(e.get<double>());
      }
    }
  }
  if (j.contains("validate")) {
    const json& v = require_object(j.at("validate"), "validate");
    reject_unknown(v, "validate", {"points"});
    rc.validate_points = get_int(v, "points", "validate", 20);
    require_positive_int(rc.validate_points, "validate.points");
  }
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  const fs::path dir = fs::path(path).parent_path();
  return parse_config(j, dir.empty() ? "." : dir.string());
}

std::vector<double> parse_eps_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("--eps-list: bad value '" + item + "'");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size() || !(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError("--eps-list: bad value '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace gradnorm::bench
