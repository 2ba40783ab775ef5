#include "gradnorm/oracle.hpp"

#include <cmath>
#include <string>

#include "gradnorm/errors.hpp"

namespace gradnorm {

Matrix Oracle::hessian(const Vector&) const {
  throw CapabilityError("oracle does not provide second derivatives");
}

ThirdContraction Oracle::third_contract(const Vector&, const Vector&) const {
  throw CapabilityError("oracle does not provide third derivatives");
}

OraclePtr borrow(const Oracle& oracle) {
  return OraclePtr(std::shared_ptr<const Oracle>{}, &oracle);
}

namespace {

class RegularizedOracle final : public Oracle {
 public:
  RegularizedOracle(OraclePtr base, Vector center, double coeff)
      : base_(std::move(base)), center_(std::move(center)), coeff_(coeff) {}

  int dimension() const override { return base_->dimension(); }
  int order_supported() const override { return base_->order_supported(); }

  double value(const Vector& x) const override {
    return base_->value(x) + 0.5 * coeff_ * (x - center_).squaredNorm();
  }

  Vector gradient(const Vector& x) const override {
    return base_->gradient(x) + coeff_ * (x - center_);
  }

  Matrix hessian(const Vector& x) const override {
    Matrix h = base_->hessian(x);
    h.diagonal().array() += coeff_;
    return h;
  }

  ThirdContraction third_contract(const Vector& x, const Vector& h) const override {
    return base_->third_contract(x, h);
  }

  std::optional<double> lipschitz(int p) const override {
    auto m = base_->lipschitz(p);
    if (!m) return std::nullopt;
    return regularized_lipschitz(*m, p, coeff_);
  }

 private:
  OraclePtr base_;
  Vector center_;
  double coeff_;
};

}  // namespace

OraclePtr make_regularized(OraclePtr base, Vector center, double coeff) {
  if (!base) throw InputError("make_regularized: null base oracle");
  if (!(coeff >= 0.0) || !std::isfinite(coeff)) {
    throw InputError("make_regularized: coefficient must be finite and >= 0");
  }
  if (center.size() != base->dimension()) {
    throw InputError("make_regularized: center has dimension " + std::to_string(center.size()) +
                     ", oracle has " + std::to_string(base->dimension()));
  }
  return std::make_shared<RegularizedOracle>(std::move(base), std::move(center), coeff);
}

double regularized_lipschitz(double base_constant, int p, double coeff) {
  return p == 1 ? base_constant + coeff : base_constant;
}

Matrix third_directional_hessian(const Oracle& oracle, const Vector& x, const Vector& h) {
  const Eigen::Index n = x.size();
  Matrix out = Matrix::Zero(n, n);
  const double s = h.norm();
  if (s == 0.0) return out;
  // D^3[h, e_i, .] = (D^3[h + s e_i]^2 - D^3[h - s e_i]^2) / (4 s), exact for trilinear forms.
  Vector probe = h;
  for (Eigen::Index i = 0; i < n; ++i) {
    probe[i] = h[i] + s;
    const Vector plus = oracle.third_contract(x, probe).vector;
    probe[i] = h[i] - s;
    const Vector minus = oracle.third_contract(x, probe).vector;
    probe[i] = h[i];
    out.col(i) = (plus - minus) / (4.0 * s);
  }
  return 0.5 * (out + out.transpose());
}

void require_order(const Oracle& oracle, int p) {
  if (p < 1 || p > 3) throw InputError("order p must be 1, 2 or 3 (got " + std::to_string(p) + ")");
  if (p > oracle.order_supported()) {
    throw CapabilityError("oracle supports derivatives up to order " +
                          std::to_string(oracle.order_supported()) + ", requested " +
                          std::to_string(p));
  }
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw EvaluationError(std::string("non-finite ") + what);
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw EvaluationError(std::string("non-finite ") + what);
}

}  // namespace gradnorm
