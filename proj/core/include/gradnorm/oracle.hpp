#pragma once

#include <memory>
#include <optional>
#include <utility>

#include "gradnorm/types.hpp"

namespace gradnorm {

/// Directional third derivative at x along h: D^3 f(x)[h,h,.] and D^3 f(x)[h,h,h].
struct ThirdContraction {
  Vector vector;
  double scalar = 0.0;
};

/// A convex objective with analytic derivatives up to `order_supported()`.
///
/// Evaluation is const and must not mutate shared state, so one oracle can be
/// queried from several threads at once. Third-order information is only
/// available as contractions; no n^3 tensor is ever formed.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual int dimension() const = 0;
  virtual int order_supported() const = 0;

  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  /// Dense symmetric Hessian. Throws CapabilityError when order_supported() < 2.
  virtual Matrix hessian(const Vector& x) const;
  /// Throws CapabilityError when order_supported() < 3.
  virtual ThirdContraction third_contract(const Vector& x, const Vector& h) const;

  /// Declared Lipschitz constant M_p of the p-th derivative, if known.
  virtual std::optional<double> lipschitz(int p) const = 0;
};

using OraclePtr = std::shared_ptr<const Oracle>;

/// Non-owning handle; the caller keeps `oracle` alive.
OraclePtr borrow(const Oracle& oracle);

/// f(x) + (coeff/2)||x - center||^2. Derivatives of order >= 3 are those of
/// `base`; the declared first-order constant grows by `coeff`.
OraclePtr make_regularized(OraclePtr base, Vector center, double coeff);

/// Declared constant of the p-th derivative after adding (coeff/2)||x-z||^2.
double regularized_lipschitz(double base_constant, int p, double coeff);

/// The matrix D^3 f(x)[h,.,.], assembled column by column from
/// third_contract through the polarization identity.
Matrix third_directional_hessian(const Oracle& oracle, const Vector& x, const Vector& h);

/// Throws InputError unless p is 1, 2 or 3; CapabilityError if the oracle
/// does not provide derivatives of order p.
void require_order(const Oracle& oracle, int p);

/// Throws EvaluationError if any entry is NaN or infinite.
void require_finite(const Vector& v, const char* what);
void require_finite(double v, const char* what);

}  // namespace gradnorm
