#include "projsplit/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "projsplit/errors.hpp"

namespace projsplit {

Vector MonotoneOperator::resolvent(const Vector&, double) const {
  throw ActivationError(fmt::format("{}: no resolvent available", name()));
}

Vector MonotoneOperator::apply(const Vector&) const {
  throw ActivationError(fmt::format("{}: operator is not single-valued", name()));
}

std::optional<double> MonotoneOperator::graph_distance(const Vector&, const Vector&) const {
  return std::nullopt;
}

std::optional<double> MonotoneOperator::value(const Vector&) const { return std::nullopt; }

namespace {

void require_dim(const MonotoneOperator& op, const Vector& v) {
  if (v.dim() != op.dim())
    throw DimensionError(
        fmt::format("{}: expected dimension {}, got {}", op.name(), op.dim(), v.dim()));
}

void require_positive_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw StepsizeError(fmt::format("stepsize must be positive and finite, got {}", rho));
}

class SoftThreshold final : public MonotoneOperator {
 public:
  SoftThreshold(std::size_t dim, double lambda) : dim_(dim), lambda_(lambda) {
    meta_.strong_monotonicity = 0.0;
    meta_.ball_lipschitz = lambda * std::sqrt(static_cast<double>(dim));
  }

  std::string name() const override { return fmt::format("soft_threshold(lambda={})", lambda_); }
  std::size_t dim() const override { return dim_; }
  bool has_resolvent() const override { return true; }
  bool is_single_valued() const override { return false; }

  Vector resolvent(const Vector& a, double rho) const override {
    require_dim(*this, a);
    const double t = rho * lambda_;
    Vector x(dim_);
    for (std::size_t j = 0; j < dim_; ++j) {
      if (a[j] > t)
        x[j] = a[j] - t;
      else if (a[j] < -t)
        x[j] = a[j] + t;
    }
    return x;
  }

  std::optional<double> graph_distance(const Vector& x, const Vector& y) const override {
    require_dim(*this, x);
    require_dim(*this, y);
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      double d = 0.0;
      if (x[j] > 0.0)
        d = y[j] - lambda_;
      else if (x[j] < 0.0)
        d = y[j] + lambda_;
      else
        d = std::max(0.0, std::abs(y[j]) - lambda_);
      s += d * d;
    }
    return std::sqrt(s);
  }

  std::optional<double> value(const Vector& x) const override {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return lambda_ * s;
  }

 private:
  std::size_t dim_;
  double lambda_;
};

class BoxIndicator final : public MonotoneOperator {
 public:
  BoxIndicator(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    meta_.strong_monotonicity = 0.0;
  }

  std::string name() const override { return "box_indicator"; }
  std::size_t dim() const override { return lo_.dim(); }
  bool has_resolvent() const override { return true; }
  bool is_single_valued() const override { return false; }

  Vector resolvent(const Vector& a, double) const override {
    require_dim(*this, a);
    Vector x(a.dim());
    for (std::size_t j = 0; j < a.dim(); ++j) x[j] = std::clamp(a[j], lo_[j], hi_[j]);
    return x;
  }

  std::optional<double> graph_distance(const Vector& x, const Vector& y) const override {
    require_dim(*this, x);
    require_dim(*this, y);
    double s = 0.0;
    for (std::size_t j = 0; j < x.dim(); ++j) {
      if (x[j] < lo_[j] || x[j] > hi_[j]) return std::numeric_limits<double>::infinity();
      double d = 0.0;
      const bool at_lo = x[j] == lo_[j];
      const bool at_hi = x[j] == hi_[j];
      if (at_lo && at_hi)
        d = 0.0;  // degenerate interval: normal cone is the whole line
      else if (at_lo)
        d = std::max(0.0, y[j]);
      else if (at_hi)
        d = std::max(0.0, -y[j]);
      else
        d = y[j];
      s += d * d;
    }
    return std::sqrt(s);
  }

  std::optional<double> value(const Vector& x) const override {
    for (std::size_t j = 0; j < x.dim(); ++j)
      if (x[j] < lo_[j] || x[j] > hi_[j]) return std::numeric_limits<double>::infinity();
    return 0.0;
  }

 private:
  Vector lo_;
  Vector hi_;
};

class Affine final : public MonotoneOperator {
 public:
  Affine(DenseMatrix a, Vector b, double offset, std::string label)
      : a_(std::move(a)), b_(std::move(b)), offset_(offset), label_(std::move(label)) {
    symmetric_ = a_.is_symmetric();
    const SymmetricSpectrum spec = symmetric_spectrum(a_);
    const double scale = std::max(1.0, std::abs(spec.max));
    if (spec.min < -1e-12 * scale)
      throw ConfigError(fmt::format("{}: symmetric part is not positive semidefinite "
                                    "(min eigenvalue {})",
                                    label_, spec.min));
    meta_.lipschitz = spectral_norm(a_);
    meta_.strong_monotonicity = std::max(0.0, spec.min);
    if (symmetric_ && spec.max > 0.0) meta_.cocoercivity = spec.max;
  }

  std::string name() const override { return label_; }
  std::size_t dim() const override { return b_.dim(); }
  bool has_resolvent() const override { return true; }
  bool is_single_valued() const override { return true; }

  Vector apply(const Vector& z) const override {
    require_dim(*this, z);
    Vector out = a_.apply(z);
    out += b_;
    return out;
  }

  Vector resolvent(const Vector& a, double rho) const override {
    require_dim(*this, a);
    // (I + rho A) x = a - rho b
    DenseMatrix m = rho * a_;
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += 1.0;
    return solve_linear(m, axpy(-rho, b_, a));
  }

  std::optional<double> graph_distance(const Vector& x, const Vector& y) const override {
    return std::sqrt(dist_sq(apply(x), y));
  }

  std::optional<double> value(const Vector& x) const override {
    if (!symmetric_) return std::nullopt;
    return 0.5 * dot(x, a_.apply(x)) + dot(b_, x) + offset_;
  }

 private:
  DenseMatrix a_;
  Vector b_;
  double offset_;
  std::string label_;
  bool symmetric_ = false;
};

class ScaledIdentity final : public MonotoneOperator {
 public:
  ScaledIdentity(std::size_t dim, double c) : dim_(dim), c_(c) {
    meta_.lipschitz = c;
    meta_.strong_monotonicity = c;
    meta_.cocoercivity = c;
  }

  std::string name() const override { return fmt::format("scaled_identity(c={})", c_); }
  std::size_t dim() const override { return dim_; }
  bool has_resolvent() const override { return true; }
  bool is_single_valued() const override { return true; }

  Vector apply(const Vector& z) const override {
    require_dim(*this, z);
    return c_ * z;
  }

  Vector resolvent(const Vector& a, double rho) const override {
    require_dim(*this, a);
    return (1.0 / (1.0 + rho * c_)) * a;
  }

  std::optional<double> graph_distance(const Vector& x, const Vector& y) const override {
    return std::sqrt(dist_sq(apply(x), y));
  }

  std::optional<double> value(const Vector& x) const override { return 0.5 * c_ * norm_sq(x); }

 private:
  std::size_t dim_;
  double c_;
};

}  // namespace

OperatorPtr make_soft_threshold(std::size_t dim, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ConfigError(fmt::format("soft_threshold: lambda must be positive, got {}", lambda));
  return std::make_shared<SoftThreshold>(dim, lambda);
}

OperatorPtr make_box_indicator(Vector lo, Vector hi) {
  require_same_dim(lo, hi, "box_indicator");
  for (std::size_t j = 0; j < lo.dim(); ++j)
    if (!(lo[j] <= hi[j]))
      throw ConfigError(fmt::format("box_indicator: empty box in coordinate {}", j));
  return std::make_shared<BoxIndicator>(std::move(lo), std::move(hi));
}

OperatorPtr make_affine(DenseMatrix a, Vector b, double offset) {
  if (!a.is_square() || a.rows() != b.dim())
    throw DimensionError("affine: A must be square and match b");
  return std::make_shared<Affine>(std::move(a), std::move(b), offset, "affine");
}

OperatorPtr make_quadratic_gradient(DenseMatrix a, Vector b, double offset) {
  if (!a.is_square() || a.rows() != b.dim())
    throw DimensionError("quadratic_gradient: A must be square and match b");
  if (!a.is_symmetric()) throw ConfigError("quadratic_gradient: A must be symmetric");
  return std::make_shared<Affine>(std::move(a), std::move(b), offset, "quadratic_gradient");
}

OperatorPtr make_scaled_identity(std::size_t dim, double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw ConfigError(fmt::format("scaled_identity: c must be positive, got {}", c));
  return std::make_shared<ScaledIdentity>(dim, c);
}

// ---- slots and activations ----------------------------------------------------------

OperatorSlot OperatorSlot::backward(OperatorPtr op, ErrorInjector injector) {
  if (!op) throw ConfigError("backward slot: null operator");
  if (!op->has_resolvent())
    throw ConfigError(fmt::format("backward slot: {} has no resolvent", op->name()));
  return OperatorSlot{SlotKind::kBackward, std::move(op), std::move(injector)};
}

OperatorSlot OperatorSlot::forward(OperatorPtr op) {
  if (!op) throw ConfigError("forward slot: null operator");
  if (!op->is_single_valued())
    throw ConfigError(fmt::format("forward slot: {} is not single-valued", op->name()));
  const auto& lip = op->meta().lipschitz;
  if (!lip || !(*lip > 0.0))
    throw ConfigError(
        fmt::format("forward slot: {} needs a declared Lipschitz constant > 0", op->name()));
  return OperatorSlot{SlotKind::kForward, std::move(op), {}};
}

double OperatorSlot::lipschitz() const {
  const auto& lip = op->meta().lipschitz;
  if (!lip) throw MetadataError(fmt::format("{}: Lipschitz constant not declared", op->name()));
  return *lip;
}

ErrorCheck check_error_conditions(const Vector& z, const Vector& x, const Vector& y,
                                  const Vector& w, double rho, const Vector& e, double sigma,
                                  double delta) {
  const Vector zx = z - x;
  const Vector yw = y - w;
  const double zx2 = norm_sq(zx);
  ErrorCheck c;
  c.slack1 = dot(zx, e) + sigma * zx2;
  c.slack2 = rho * sigma * norm_sq(yw) - dot(e, yw);
  c.slack3 = delta * zx2 - norm_sq(e);
  c.err1 = c.slack1 >= 0.0;
  c.err2 = c.slack2 >= 0.0;
  c.err3 = c.slack3 >= 0.0;
  return c;
}

Activation backward_step(const MonotoneOperator& op, const Vector& z, const Vector& w, double rho,
                         const Vector& e) {
  require_positive_rho(rho);
  require_dim(op, z);
  require_dim(op, w);
  require_dim(op, e);
  Vector a = axpy(rho, w, z);
  a += e;
  Vector x = op.resolvent(a, rho);
  require_finite(x, "resolvent output");
  Vector y = (1.0 / rho) * (a - x);
  return Activation{std::move(x), std::move(y), e, Vector{}};
}

Activation backward_activate(OperatorSlot& slot, const Vector& z, const Vector& w, double rho) {
  if (slot.is_forward()) throw ConfigError("backward_activate called on a forward slot");
  return slot.injector.activate(*slot.op, z, w, rho);
}

Activation forward_activate(const OperatorSlot& slot, const Vector& z, const Vector& w,
                            double rho) {
  if (!slot.is_forward()) throw ConfigError("forward_activate called on a backward slot");
  require_positive_rho(rho);
  const double lip = slot.lipschitz();
  if (rho * lip >= 1.0)
    throw StepsizeError(fmt::format(
        "forward stepsize bound violated for {}: rho={} must be < 1/L={}", slot.op->name(), rho,
        1.0 / lip));
  require_dim(*slot.op, z);
  require_dim(*slot.op, w);
  Vector tz = slot.op->apply(z);
  Vector x = axpy(-rho, tz - w, z);
  Vector y = slot.op->apply(x);
  return Activation{std::move(x), std::move(y), Vector(z.dim()), std::move(tz)};
}

}  // namespace projsplit
