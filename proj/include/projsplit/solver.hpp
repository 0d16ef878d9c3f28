#pragma once

// Synchronous projective splitting for 0 in T_1 z + ... + T_n z.
//
// Each iteration activates every operator at the same snapshot (z^k, w^k),
// builds the affine separator
//
//   phi_k(p) = sum_{i<n} <z - x_i, y_i - w_i> + <z - x_n, y_n + sum_{i<n} w_i>
//
// and moves p^k a relaxed step toward the hyperplane {phi_k = 0} in the
// gamma-metric: p^{k+1} = p^k - alpha_k * grad(phi_k), alpha_k = beta_k phi_k / pi_k,
// pi_k = |grad(phi_k)|_gamma^2.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "projsplit/operators.hpp"
#include "projsplit/space.hpp"

namespace projsplit {

// A scalar parameter sequence with declared bounds [lower, upper]. Emitted values
// are checked against the bounds on every call.
class ParameterRule {
 public:
  ParameterRule() = default;
  static ParameterRule constant(double value);
  static ParameterRule sequence(double lower, double upper,
                                std::function<double(std::size_t k)> value);

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  bool is_constant() const noexcept { return !value_; }
  double at(std::size_t k) const;

 private:
  double lower_ = 1.0;
  double upper_ = 1.0;
  std::function<double(std::size_t)> value_;
};

// How phi_k(p^k) is evaluated when the step is taken. kExpanded is the
// <z,v> + sum <w_i,u_i> - sum <x_i,y_i> form; kPairwise sums <z - x_i, y_i - w_i>,
// which avoids cancellation once the iterates have settled.
enum class PhiEvaluation { kExpanded, kPairwise };

struct SolverConfig {
  double gamma = 1.0;
  ParameterRule beta = ParameterRule::constant(1.0);
  // One rule per operator; empty means defaults (1 for backward, 0.9/L for forward).
  std::vector<ParameterRule> rho;
  double sigma = 0.0;
  double delta = 0.0;
  std::size_t max_iters = 1000;
  // Stop when pi_k <= pi_tolerance * max(1, |p^k|_gamma^2).
  double pi_tolerance = 1e-24;
  // Keep every stride-th record (the terminal record is always kept).
  std::size_t trace_stride = 1;
  PhiEvaluation phi_evaluation = PhiEvaluation::kPairwise;
};

// Fills default stepsizes and validates every bound; throws StepsizeError or
// ConfigError.
SolverConfig resolve_config(const std::vector<OperatorSlot>& slots, SolverConfig config);

struct IterationRecord {
  std::size_t k = 0;
  std::vector<Vector> x;
  std::vector<Vector> y;
  std::vector<Vector> e;   // zero for forward slots
  std::vector<Vector> tz;  // T_i z^k for forward slots, empty for backward
  std::vector<Vector> u;   // x_i - x_n, i < n
  Vector v;                // sum_i y_i
  double pi = 0.0;
  double phi = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> rho;
  std::vector<SlotKind> kinds;
  ProductPoint p_before;
  ProductPoint p_after;
  // pi vanished: p_after = (x_n, y_1, ..., y_{n-1}) and no projection step was taken.
  bool terminal = false;

  std::size_t n() const noexcept { return x.size(); }
  // w_i^k for i = 0..n-1, with w_n = -sum_{i<n} w_i.
  Vector w(std::size_t i) const;
};

// phi_k(p), pairwise form, for an arbitrary p.
double phi_value(const IterationRecord& record, const ProductPoint& p);
// phi_k(p^k) in the expanded form.
double phi_expanded(const IterationRecord& record);
// (v / gamma, u_1, ..., u_{n-1}).
ProductPoint phi_gradient(const IterationRecord& record, double gamma);

class Solver {
 public:
  Solver(std::vector<OperatorSlot> slots, const SolverConfig& config, ProductPoint start);

  IterationRecord iterate();

  const ProductPoint& point() const noexcept { return point_; }
  std::size_t iterations() const noexcept { return k_; }
  bool finished() const noexcept { return finished_; }
  const SolverConfig& config() const noexcept { return config_; }
  const std::vector<OperatorSlot>& slots() const noexcept { return slots_; }

 private:
  std::vector<OperatorSlot> slots_;
  SolverConfig config_;
  ProductPoint point_;
  std::size_t k_ = 0;
  bool finished_ = false;
};

enum class SolveStatus { kConverged, kMaxIters, kStopped, kError };

std::string to_string(SolveStatus status);

struct SolveHooks {
  // Called on every record, retained or not.
  std::function<void(const IterationRecord&)> observer;
  // Return true to stop after the given record.
  std::function<bool(const IterationRecord&)> stop;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::kMaxIters;
  ProductPoint point;
  std::vector<IterationRecord> trace;
  std::size_t iterations = 0;
  std::string message;
};

// Validation failures (resolve_config) throw; failures inside iterations are
// reported as kError with the trace up to the failing iteration.
SolveOutcome solve(std::vector<OperatorSlot> slots, const SolverConfig& config,
                   ProductPoint start, const SolveHooks& hooks = {});

// n = 1 closed forms. Both return z^1, ..., z^{steps+1} (shorter if a solution
// is reached exactly).

// z^{k+1} = (1 - beta_k) z^k + beta_k prox_{rho_k T}(z^k)
std::vector<Vector> proximal_point_reference(const MonotoneOperator& op, const ParameterRule& rho,
                                             const ParameterRule& beta, Vector z1,
                                             std::size_t steps);

// x^k = z^k - rho_k T z^k,  z^{k+1} = z^k - rt_k T x^k,
// rt_k = beta_k rho_k <T z^k, T x^k> / |T x^k|^2
std::vector<Vector> extragradient_reference(const MonotoneOperator& op, const ParameterRule& rho,
                                            const ParameterRule& beta, Vector z1,
                                            std::size_t steps);

}  // namespace projsplit
