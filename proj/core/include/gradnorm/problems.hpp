#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gradnorm/oracle.hpp"

namespace gradnorm {

// ---------------------------------------------------------------- quadratic

/// f(x) = 1/2 x'Qx - b'x with Q symmetric positive semidefinite.
class QuadraticOracle : public Oracle {
 public:
  QuadraticOracle(Matrix Q, Vector b);

  int dimension() const override { return static_cast<int>(b_.size()); }
  int order_supported() const override { return 3; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;
  ThirdContraction third_contract(const Vector& x, const Vector& h) const override;
  /// M_1 = lambda_max(Q); higher derivatives vanish, so M_2 = M_3 = 0.
  std::optional<double> lipschitz(int p) const override;

  const Matrix& Q() const { return Q_; }
  const Vector& b() const { return b_; }

 private:
  Matrix Q_;
  Vector b_;
  double lambda_max_;
};

std::shared_ptr<QuadraticOracle> quadratic_problem(Matrix Q, Vector b);

/// Q = V diag(lambda) V' with lambda log-spaced in [lambda_min, lambda_max]
/// and V a seeded random rotation; b drawn standard normal.
std::shared_ptr<QuadraticOracle> random_quadratic(int n, std::uint64_t seed, double lambda_min = 0.01,
                                                  double lambda_max = 1.0);

// ---------------------------------------------------------------- logistic

struct LogisticDataset {
  Vector labels;    ///< entries in {-1, +1}
  Matrix features;  ///< d x n, one sample per row

  int samples() const { return static_cast<int>(features.rows()); }
  int features_dim() const { return static_cast<int>(features.cols()); }
  /// Throws InputError on empty data, bad labels, or non-finite features.
  void validate() const;
};

/// f(x) = (1/d) sum_i ln(1 + exp(-y_i <w_i, x>)).
class LogisticOracle : public Oracle {
 public:
  explicit LogisticOracle(LogisticDataset data);

  int dimension() const override { return data_.features_dim(); }
  int order_supported() const override { return 3; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;
  ThirdContraction third_contract(const Vector& x, const Vector& h) const override;
  std::optional<double> lipschitz(int p) const override;

  const LogisticDataset& data() const { return data_; }

 private:
  LogisticDataset data_;
  Matrix yw_;  // rows y_i w_i
  double m1_, m2_, m3_;
};

std::shared_ptr<LogisticOracle> logistic_problem(LogisticDataset data);

struct LibsvmOptions {
  /// Feature count; inferred from the largest index when unset.
  std::optional<int> features;
  bool normalize_rows = false;
  /// Keep a seeded random subset of at most this many rows.
  std::optional<int> max_rows;
  std::uint64_t seed = 0;
};

/// Labels 0/1 and any two distinct values are mapped to -1/+1 (the smaller
/// one becomes -1). Throws ParseError with the 1-based line on bad input.
LogisticDataset load_libsvm(const std::string& path, const LibsvmOptions& opts = {});
LogisticDataset parse_libsvm(const std::string& text, const LibsvmOptions& opts = {});

/// Standard normal features, labels from a planted unit hyperplane with
/// round(0.1 d) of them flipped.
LogisticDataset synthetic_logistic(int d, int n, std::uint64_t seed);

// ---------------------------------------------------------------- hard family

struct HardFamilySpec {
  int p = 3;
  int n = 5;
  int m = 5;
  void validate() const;
};

/// f(x) = (1/(p+1)) sum_i |[A x]_i|^{p+1} - x_1, A = diag(U_m, I_{n-m}),
/// U_m upper bidiagonal with 1 on the diagonal and -1 above it.
class HardFamilyOracle : public Oracle {
 public:
  explicit HardFamilyOracle(HardFamilySpec spec);

  int dimension() const override { return spec_.n; }
  int order_supported() const override { return 3; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;
  ThirdContraction third_contract(const Vector& x, const Vector& h) const override;
  /// Declared only for the family's own order: M_p = p! ||A||^{p+1} <= p! 2^{p+1}.
  std::optional<double> lipschitz(int p) const override;

  const HardFamilySpec& spec() const { return spec_; }
  Vector apply_A(const Vector& x) const;
  Vector apply_At(const Vector& u) const;
  Matrix A() const;

 private:
  HardFamilySpec spec_;
};

std::shared_ptr<HardFamilyOracle> hard_family_problem(HardFamilySpec spec);

/// x*_i = m - i + 1 for i <= m, zero beyond.
Vector hard_family_minimizer(const HardFamilySpec& spec);
/// f* = -m p / (p + 1).
double hard_family_optimal_value(const HardFamilySpec& spec);

}  // namespace gradnorm
