#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "gradnorm/errors.hpp"
#include "gradnorm/problems.hpp"

namespace gradnorm {

namespace {

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

void LogisticDataset::validate() const {
  if (features.rows() == 0 || features.cols() == 0) throw InputError("logistic: empty dataset");
  if (labels.size() != features.rows()) throw InputError("logistic: label count differs from row count");
  for (int i = 0; i < labels.size(); ++i) {
    if (labels(i) != 1.0 && labels(i) != -1.0) {
      throw InputError("logistic: label " + std::to_string(i) + " is not +-1");
    }
  }
  if (!features.allFinite()) throw InputError("logistic: non-finite feature value");
}

LogisticOracle::LogisticOracle(LogisticDataset data) : data_(std::move(data)) {
  data_.validate();
  yw_ = data_.labels.asDiagonal() * data_.features;
  const Vector sq = data_.features.rowwise().squaredNorm();
  const double d = data_.samples();
  m1_ = sq.sum() / (4.0 * d);
  m2_ = std::sqrt(3.0) / 18.0 * sq.array().pow(1.5).sum() / d;
  m3_ = sq.array().square().sum() / (8.0 * d);
}

double LogisticOracle::value(const Vector& x) const {
  const Vector t = -(yw_ * x);
  double s = 0.0;
  for (int i = 0; i < t.size(); ++i) s += softplus(t(i));
  return s / data_.samples();
}

Vector LogisticOracle::gradient(const Vector& x) const {
  const Vector t = -(yw_ * x);
  Vector sig(t.size());
  for (int i = 0; i < t.size(); ++i) sig(i) = sigmoid(t(i));
  return -(yw_.transpose() * sig) / data_.samples();
}

Matrix LogisticOracle::hessian(const Vector& x) const {
  const Vector t = -(yw_ * x);
  Vector w(t.size());
  for (int i = 0; i < t.size(); ++i) {
    const double s = sigmoid(t(i));
    w(i) = s * (1.0 - s);
  }
  Matrix H = yw_.transpose() * w.asDiagonal() * yw_ / data_.samples();
  return 0.5 * (H + H.transpose());
}

ThirdContraction LogisticOracle::third_contract(const Vector& x, const Vector& h) const {
  const Vector t = -(yw_ * x);
  const Vector s = -(yw_ * h);  // dt_i along h
  Vector coef(t.size());
  double scalar = 0.0;
  for (int i = 0; i < t.size(); ++i) {
    const double sg = sigmoid(t(i));
    const double l3 = sg * (1.0 - sg) * (1.0 - 2.0 * sg);
    coef(i) = l3 * s(i) * s(i);
    scalar += coef(i) * s(i);
  }
  const double d = data_.samples();
  return {-(yw_.transpose() * coef) / d, scalar / d};
}

std::optional<double> LogisticOracle::lipschitz(int p) const {
  switch (p) {
    case 1: return m1_;
    case 2: return m2_;
    case 3: return m3_;
    default: return std::nullopt;
  }
}

std::shared_ptr<LogisticOracle> logistic_problem(LogisticDataset data) {
  return std::make_shared<LogisticOracle>(std::move(data));
}

LogisticDataset parse_libsvm(const std::string& text, const LibsvmOptions& opts) {
  struct Row {
    double label;
    std::vector<std::pair<int, double>> entries;
  };
  std::vector<Row> rows;
  int max_index = 0;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    Row row;
    try {
      std::size_t used = 0;
      row.label = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("libsvm line " + std::to_string(lineno) + ": bad label '" + tok + "'", lineno);
    }
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) {
        throw ParseError("libsvm line " + std::to_string(lineno) + ": expected index:value, got '" + tok + "'",
                         lineno);
      }
      int index = 0;
      double value = 0.0;
      try {
        std::size_t used = 0;
        const std::string is = tok.substr(0, colon), vs = tok.substr(colon + 1);
        index = std::stoi(is, &used);
        if (used != is.size()) throw std::invalid_argument(is);
        value = std::stod(vs, &used);
        if (used != vs.size()) throw std::invalid_argument(vs);
      } catch (const std::exception&) {
        throw ParseError("libsvm line " + std::to_string(lineno) + ": malformed pair '" + tok + "'", lineno);
      }
      if (index < 1) {
        throw ParseError("libsvm line " + std::to_string(lineno) + ": indices are 1-based", lineno);
      }
      if (opts.features && index > *opts.features) {
        throw ParseError("libsvm line " + std::to_string(lineno) + ": index " + std::to_string(index) +
                             " exceeds feature count " + std::to_string(*opts.features),
                         lineno);
      }
      if (!std::isfinite(value)) {
        throw ParseError("libsvm line " + std::to_string(lineno) + ": non-finite value", lineno);
      }
      max_index = std::max(max_index, index);
      row.entries.emplace_back(index, value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("libsvm: no data rows");

  std::set<double> classes;
  for (const Row& r : rows) classes.insert(r.label);
  if (classes.size() > 2) throw InputError("libsvm: more than two distinct labels");
  std::map<double, double> remap;
  if (classes.size() == 2) {
    remap[*classes.begin()] = -1.0;
    remap[*classes.rbegin()] = 1.0;
  } else {
    const double only = *classes.begin();
    remap[only] = only > 0 ? 1.0 : -1.0;
  }

  std::vector<std::size_t> keep(rows.size());
  std::iota(keep.begin(), keep.end(), 0);
  if (opts.max_rows) {
    if (*opts.max_rows < 1) throw InputError("libsvm: max_rows must be >= 1");
    if (keep.size() > static_cast<std::size_t>(*opts.max_rows)) {
      std::mt19937_64 rng(opts.seed);
      std::shuffle(keep.begin(), keep.end(), rng);
      keep.resize(*opts.max_rows);
      std::sort(keep.begin(), keep.end());
    }
  }

  const int n = opts.features.value_or(max_index);
  if (n < 1) throw InputError("libsvm: no features");
  LogisticDataset data;
  data.features = Matrix::Zero(static_cast<Eigen::Index>(keep.size()), n);
  data.labels.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const Row& row = rows[keep[r]];
    data.labels(r) = remap.at(row.label);
    for (const auto& [index, value] : row.entries) data.features(r, index - 1) = value;
    if (opts.normalize_rows) {
      const double norm = data.features.row(r).norm();
      if (norm > 0) data.features.row(r) /= norm;
    }
  }
  return data;
}

LogisticDataset load_libsvm(const std::string& path, const LibsvmOptions& opts) {
  std::ifstream in(path);
  if (!in) throw InputError("libsvm: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_libsvm(buf.str(), opts);
}

LogisticDataset synthetic_logistic(int d, int n, std::uint64_t seed) {
  if (d < 1 || n < 1) throw InputError("synthetic_logistic: d and n must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  LogisticDataset data;
  data.features.resize(d, n);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < n; ++j) data.features(i, j) = normal(rng);
  Vector planted(n);
  for (int j = 0; j < n; ++j) planted(j) = normal(rng);
  planted /= planted.norm();
  data.labels.resize(d);
  for (int i = 0; i < d; ++i) data.labels(i) = data.features.row(i).dot(planted) >= 0 ? 1.0 : -1.0;
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const int flips = static_cast<int>(std::lround(0.1 * d));
  for (int i = 0; i < flips; ++i) data.labels(order[i]) *= -1.0;
  return data;
}

}  // namespace gradnorm
