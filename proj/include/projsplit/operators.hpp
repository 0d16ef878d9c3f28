#pragma once

// Monotone operators and their two activation modes.
//
//   backward:  a = z + rho*w + e,  x = prox_{rho T}(a),  y = (a - x)/rho
//   forward:   x = z - rho*(T z - w),  y = T x            (requires rho < 1/L)
//
// Backward activations may carry an injected error e that must satisfy, for the
// configured sigma in [0,1) and delta >= 0,
//
//   <z - x, e>   >= -sigma * |z - x|^2
//   <e, y - w>   <=  rho * sigma * |y - w|^2
//   |e|^2        <=  delta * |z - x|^2

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "projsplit/dense_matrix.hpp"
#include "projsplit/space.hpp"

namespace projsplit {

// Declared constants. Constructors derive these from the matrix spectrum; nothing
// is estimated at runtime.
struct OperatorMeta {
  std::optional<double> lipschitz;            // L
  std::optional<double> cocoercivity;         // Gamma: <u-v,Tu-Tv> >= |Tu-Tv|^2 / Gamma
  std::optional<double> strong_monotonicity;  // mu
  std::optional<double> ball_lipschitz;       // M: Lipschitz modulus of f on any ball
};

class MonotoneOperator {
 public:
  virtual ~MonotoneOperator() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;

  virtual bool has_resolvent() const = 0;
  // prox_{rho T}(a) = (I + rho T)^{-1} a.
  virtual Vector resolvent(const Vector& a, double rho) const;

  virtual bool is_single_valued() const = 0;
  virtual Vector apply(const Vector& z) const;

  // Distance from y to the set T(x); +inf when x lies outside dom T. nullopt when
  // the graph is not decidable for this operator.
  virtual std::optional<double> graph_distance(const Vector& x, const Vector& y) const;

  // f(x) when T is the subdifferential of a closed proper convex f (may be +inf).
  virtual std::optional<double> value(const Vector& x) const;

  const OperatorMeta& meta() const noexcept { return meta_; }

 protected:
  OperatorMeta meta_;
};

using OperatorPtr = std::shared_ptr<const MonotoneOperator>;

// ---- library -----------------------------------------------------------------

// T = subdifferential of lambda*|x|_1; resolvent is soft-thresholding by rho*lambda.
OperatorPtr make_soft_threshold(std::size_t dim, double lambda);
// T = normal cone of the box [lo, hi]; resolvent is clipping.
OperatorPtr make_box_indicator(Vector lo, Vector hi);
// T z = A z + b with (A + A^T)/2 positive semidefinite. Exposes f only when A is
// symmetric, in which case f(z) = z^T A z / 2 + b^T z + offset.
OperatorPtr make_affine(DenseMatrix a, Vector b, double offset = 0.0);
// Gradient of f(z) = z^T A z / 2 + b^T z + offset, A symmetric PSD.
OperatorPtr make_quadratic_gradient(DenseMatrix a, Vector b, double offset = 0.0);
// T z = c z, c > 0 (gradient of c|z|^2/2).
OperatorPtr make_scaled_identity(std::size_t dim, double c);

// ---- error injection -----------------------------------------------------------

enum class ErrorMode { kNone, kScaledRandom, kAdversarialAligned };

std::string to_string(ErrorMode mode);
ErrorMode error_mode_from_string(const std::string& name);

struct ErrorCheck {
  bool err1 = true;
  bool err2 = true;
  bool err3 = true;
  // Nonnegative slack means the inequality holds.
  double slack1 = 0.0;  // <z-x,e> + sigma|z-x|^2
  double slack2 = 0.0;  // rho*sigma|y-w|^2 - <e,y-w>
  double slack3 = 0.0;  // delta|z-x|^2 - |e|^2

  bool passed() const noexcept { return err1 && err2 && err3; }
};

ErrorCheck check_error_conditions(const Vector& z, const Vector& x, const Vector& y,
                                  const Vector& w, double rho, const Vector& e, double sigma,
                                  double delta);

struct Activation {
  Vector x;
  Vector y;
  Vector e;   // zero for forward activations
  Vector tz;  // T z for forward activations, empty for backward
};

// Draws admissible prox errors. A candidate e is drawn, the activation is run, the
// three conditions are checked, and e is halved (at most 60 times) until they hold;
// e = 0 is the final fallback. Owns its generator, so one injector per solver.
class ErrorInjector {
 public:
  static constexpr int kMaxShrinks = 60;

  ErrorInjector() = default;
  ErrorInjector(ErrorMode mode, double sigma, double delta, std::uint64_t seed);

  ErrorMode mode() const noexcept { return mode_; }
  double sigma() const noexcept { return sigma_; }
  double delta() const noexcept { return delta_; }

  Activation activate(const MonotoneOperator& op, const Vector& z, const Vector& w, double rho);

 private:
  ErrorMode mode_ = ErrorMode::kNone;
  double sigma_ = 0.0;
  double delta_ = 0.0;
  std::mt19937_64 rng_{0};
};

// ---- slots -----------------------------------------------------------------------

enum class SlotKind { kBackward, kForward };

struct OperatorSlot {
  SlotKind kind = SlotKind::kBackward;
  OperatorPtr op;
  ErrorInjector injector;

  static OperatorSlot backward(OperatorPtr op, ErrorInjector injector = {});
  // Requires a single-valued operator with declared lipschitz > 0.
  static OperatorSlot forward(OperatorPtr op);

  bool is_forward() const noexcept { return kind == SlotKind::kForward; }
  double lipschitz() const;  // throws MetadataError when undeclared
};

// Backward step with an explicit error vector.
Activation backward_step(const MonotoneOperator& op, const Vector& z, const Vector& w, double rho,
                         const Vector& e);

Activation backward_activate(OperatorSlot& slot, const Vector& z, const Vector& w, double rho);
Activation forward_activate(const OperatorSlot& slot, const Vector& z, const Vector& w,
                            double rho);

}  // namespace projsplit
