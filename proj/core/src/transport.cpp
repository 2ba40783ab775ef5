#include "gradnorm/transport.hpp"

#include <cmath>
#include <random>

#include "gradnorm/csv.hpp"
#include "gradnorm/errors.hpp"

namespace gradnorm {

namespace {

void check_histogram(const Vector& h, int n, const char* name) {
  if (h.size() != n) {
    throw InputError(std::string("transport: ") + name + " has " + std::to_string(h.size()) +
                     " entries, expected " + std::to_string(n));
  }
  if (!h.allFinite() || h.minCoeff() < 0.0) {
    throw InputError(std::string("transport: ") + name + " must be finite and nonnegative");
  }
  if (std::abs(h.sum() - 1.0) > 1e-12) {
    throw InputError(std::string("transport: ") + name + " must sum to 1 (sum = " + std::to_string(h.sum()) + ")");
  }
}

// Scaled log-potentials Z_ij = (xi_i + eta_j - C_ij) / gamma.
Matrix log_potentials(const TransportInstance& inst, const Vector& lambda) {
  const int n = inst.size();
  if (lambda.size() != 2 * n) throw InputError("transport: lambda must have 2n entries");
  const auto xi = lambda.head(n);
  const auto eta = lambda.tail(n);
  Matrix Z = (-inst.cost).eval();
  Z.colwise() += xi;
  Z.rowwise() += eta.transpose();
  return Z / inst.gamma;
}

Matrix softmax_matrix(const Matrix& Z) {
  const double top = Z.maxCoeff();
  Matrix X = (Z.array() - top).exp().matrix();
  return X / X.sum();
}

}  // namespace

void TransportInstance::validate() const {
  const int n = size();
  if (n < 1) throw InputError("transport: empty instance");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InputError("transport: gamma must be positive");
  if (cost.rows() != n || cost.cols() != n) {
    throw InputError("transport: cost must be " + std::to_string(n) + " x " + std::to_string(n));
  }
  if (!cost.allFinite() || cost.minCoeff() < 0.0) throw InputError("transport: cost must be finite and nonnegative");
  const double scale = std::max(1.0, cost.maxCoeff());
  if ((cost - cost.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InputError("transport: cost must be symmetric");
  }
  check_histogram(source, n, "source");
  check_histogram(target, n, "target");
}

TransportInstance random_transport(int n, double gamma, std::uint64_t seed) {
  if (n < 1) throw InputError("random_transport: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0), mass(0.1, 1.0);
  Matrix pts(n, 2);
  for (int i = 0; i < n; ++i) {
    pts(i, 0) = unit(rng);
    pts(i, 1) = unit(rng);
  }
  TransportInstance inst;
  inst.gamma = gamma;
  inst.cost.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inst.cost(i, j) = (pts.row(i) - pts.row(j)).squaredNorm();
  inst.source.resize(n);
  inst.target.resize(n);
  for (int i = 0; i < n; ++i) inst.source(i) = mass(rng);
  for (int i = 0; i < n; ++i) inst.target(i) = mass(rng);
  inst.source /= inst.source.sum();
  inst.target /= inst.target.sum();
  inst.validate();
  return inst;
}

TransportInstance load_transport(const std::string& cost_path, const std::string& source_path,
                                 const std::string& target_path, double gamma) {
  TransportInstance inst;
  inst.cost = read_csv_matrix(cost_path);
  const Matrix s = read_csv_matrix(source_path);
  const Matrix t = read_csv_matrix(target_path);
  if (s.cols() != 1) throw InputError(source_path + ": histogram file must have one column");
  if (t.cols() != 1) throw InputError(target_path + ": histogram file must have one column");
  inst.source = s.col(0);
  inst.target = t.col(0);
  inst.gamma = gamma;
  inst.validate();
  return inst;
}

Matrix constraint_matrix(int n) {
  Matrix A = Matrix::Zero(2 * n, n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      A(i, i + j * n) = 1.0;
      A(n + j, i + j * n) = 1.0;
    }
  }
  return A;
}

Vector constraint_rhs(const TransportInstance& inst) {
  Vector b(2 * inst.size());
  b << inst.source, inst.target;
  return b;
}

double smax(const Vector& v, double gamma) {
  if (v.size() == 0) throw InputError("smax: empty vector");
  if (!(gamma > 0.0)) throw InputError("smax: gamma must be positive");
  const double top = v.maxCoeff();
  return top + gamma * std::log(((v.array() - top) / gamma).exp().sum());
}

Vector softargmax(const Vector& v, double gamma) {
  if (v.size() == 0) throw InputError("softargmax: empty vector");
  if (!(gamma > 0.0)) throw InputError("softargmax: gamma must be positive");
  const double top = v.maxCoeff();
  Vector x = ((v.array() - top) / gamma).exp().matrix();
  return x / x.sum();
}

OtDualOracle::OtDualOracle(TransportInstance inst) : inst_(std::move(inst)) { inst_.validate(); }

Matrix OtDualOracle::plan(const Vector& lambda) const { return softmax_matrix(log_potentials(inst_, lambda)); }

double OtDualOracle::value(const Vector& lambda) const {
  const Matrix Z = log_potentials(inst_, lambda);
  const double top = Z.maxCoeff();
  const double s = inst_.gamma * (top + std::log((Z.array() - top).exp().sum()));
  const int n = inst_.size();
  return s - lambda.head(n).dot(inst_.source) - lambda.tail(n).dot(inst_.target);
}

Vector OtDualOracle::gradient(const Vector& lambda) const {
  const Matrix X = plan(lambda);
  const int n = inst_.size();
  Vector g(2 * n);
  g << X.rowwise().sum() - inst_.source, X.colwise().sum().transpose() - inst_.target;
  return g;
}

Matrix OtDualOracle::hessian(const Vector& lambda) const {
  const Matrix X = plan(lambda);
  const int n = inst_.size();
  const Vector r = X.rowwise().sum();
  const Vector c = X.colwise().sum().transpose();
  Matrix H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = Matrix(r.asDiagonal()) - r * r.transpose();
  H.bottomRightCorner(n, n) = Matrix(c.asDiagonal()) - c * c.transpose();
  H.topRightCorner(n, n) = X - r * c.transpose();
  H.bottomLeftCorner(n, n) = H.topRightCorner(n, n).transpose();
  return H / inst_.gamma;
}

ThirdContraction OtDualOracle::third_contract(const Vector& lambda, const Vector& h) const {
  const Matrix X = plan(lambda);
  const int n = inst_.size();
  if (h.size() != 2 * n) throw InputError("transport: direction must have 2n entries");
  Matrix W(n, n);
  W.colwise() = h.head(n);
  W.rowwise() += h.tail(n).transpose();
  const double mean = (X.array() * W.array()).sum();
  const Matrix dev = (W.array() - mean).matrix();
  const Matrix dev2 = dev.array().square().matrix();
  const double var = (X.array() * dev2.array()).sum();
  const Matrix Z = (X.array() * (dev2.array() - var)).matrix();
  const double g2 = inst_.gamma * inst_.gamma;
  ThirdContraction out;
  out.vector.resize(2 * n);
  out.vector << Z.rowwise().sum(), Z.colwise().sum().transpose();
  out.vector /= g2;
  out.scalar = (X.array() * dev2.array() * dev.array()).sum() / g2;
  return out;
}

std::optional<double> OtDualOracle::lipschitz(int p) const {
  const double n2 = 2.0 * inst_.size();
  const double g = inst_.gamma;
  switch (p) {
    case 1: return n2 / g;
    case 2: return 4.0 * std::sqrt(2.0) / (g * g);
    case 3: return 15.0 * n2 * n2 / (g * g * g);
    default: return std::nullopt;
  }
}

std::shared_ptr<OtDualOracle> ot_dual_problem(TransportInstance inst) {
  return std::make_shared<OtDualOracle>(std::move(inst));
}

}  // namespace gradnorm
