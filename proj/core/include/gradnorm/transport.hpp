#pragma once

#include <cstdint>
#include <string>

#include "gradnorm/oracle.hpp"

namespace gradnorm {

/// Entropy-regularized transport between two histograms on n points.
struct TransportInstance {
  Matrix cost;    ///< n x n, symmetric, nonnegative
  Vector source;  ///< row marginal, in the simplex
  Vector target;  ///< column marginal, in the simplex
  double gamma = 1.0;

  int size() const { return static_cast<int>(source.size()); }
  /// Throws InputError when an invariant fails.
  void validate() const;
};

/// n points uniform in the unit square, squared Euclidean cost, histograms
/// with entries uniform in [0.1, 1] then normalized.
TransportInstance random_transport(int n, double gamma, std::uint64_t seed);

/// Cost from an n x n CSV, histograms from one-column CSVs (all with a header row).
TransportInstance load_transport(const std::string& cost_path, const std::string& source_path,
                                 const std::string& target_path, double gamma);

/// The 2n x n^2 marginal operator on column-major vec(X): rows 0..n-1 give
/// X 1, rows n..2n-1 give X' 1.
Matrix constraint_matrix(int n);
/// b = (source; target).
Vector constraint_rhs(const TransportInstance& inst);

/// gamma ln sum_j exp(v_j / gamma), evaluated with the max shifted out.
double smax(const Vector& v, double gamma);
/// Gradient of smax: softmax(v / gamma).
Vector softargmax(const Vector& v, double gamma);

/// phi(lambda) = smax_gamma(A' lambda - vec(C)) - <lambda, b>, lambda = (xi; eta).
///
/// Minimizing phi is the dual of the entropic transport problem over the
/// n^2 simplex. phi is constant along (1; 0) and (0; 1), so minimizers are
/// never unique.
class OtDualOracle : public Oracle {
 public:
  explicit OtDualOracle(TransportInstance inst);

  int dimension() const override { return 2 * inst_.size(); }
  int order_supported() const override { return 3; }
  double value(const Vector& lambda) const override;
  Vector gradient(const Vector& lambda) const override;
  Matrix hessian(const Vector& lambda) const override;
  ThirdContraction third_contract(const Vector& lambda, const Vector& h) const override;
  /// M_1 = 2n/gamma, M_2 = 4 sqrt(2)/gamma^2, M_3 = 15 (2n)^2 / gamma^3.
  std::optional<double> lipschitz(int p) const override;

  const TransportInstance& instance() const { return inst_; }
  /// The plan softmax((xi_i + eta_j - C_ij) / gamma) over all n^2 entries.
  Matrix plan(const Vector& lambda) const;

 private:
  TransportInstance inst_;
};

std::shared_ptr<OtDualOracle> ot_dual_problem(TransportInstance inst);

}  // namespace gradnorm
