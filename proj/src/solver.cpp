#include "projsplit/solver.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "projsplit/errors.hpp"

namespace projsplit {

// ---- parameters --------------------------------------------------------------------

ParameterRule ParameterRule::constant(double value) {
  ParameterRule r;
  r.lower_ = value;
  r.upper_ = value;
  return r;
}

ParameterRule ParameterRule::sequence(double lower, double upper,
                                      std::function<double(std::size_t)> value) {
  ParameterRule r;
  r.lower_ = lower;
  r.upper_ = upper;
  r.value_ = std::move(value);
  return r;
}

double ParameterRule::at(std::size_t k) const {
  if (!value_) return upper_;
  const double v = value_(k);
  if (!std::isfinite(v) || v < lower_ || v > upper_)
    throw StepsizeError(fmt::format(
        "parameter sequence emitted {} at iteration {}, outside its declared range [{}, {}]", v,
        k, lower_, upper_));
  return v;
}

namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

SolverConfig resolve_config(const std::vector<OperatorSlot>& slots, SolverConfig config) {
  if (slots.empty()) throw ConfigError("at least one operator is required");
  if (!finite_positive(config.gamma))
    throw ConfigError(fmt::format("gamma must be a positive finite number, got {}", config.gamma));
  if (!(config.sigma >= 0.0 && config.sigma < 1.0))
    throw ConfigError(fmt::format("sigma must lie in [0,1), got {}", config.sigma));
  if (!(config.delta >= 0.0) || !std::isfinite(config.delta))
    throw ConfigError(fmt::format("delta must be >= 0, got {}", config.delta));
  if (!(config.pi_tolerance >= 0.0) || !std::isfinite(config.pi_tolerance))
    throw ConfigError(fmt::format("pi_tolerance must be >= 0, got {}", config.pi_tolerance));
  if (config.trace_stride == 0) throw ConfigError("trace stride must be >= 1");

  const double blo = config.beta.lower();
  const double bhi = config.beta.upper();
  if (!(blo > 0.0 && blo <= bhi && bhi < 2.0))
    throw StepsizeError(fmt::format(
        "relaxation bounds violated (need 0 < beta_lo <= beta_hi < 2, got [{}, {}])", blo, bhi));

  const std::size_t n = slots.size();
  if (config.rho.empty()) {
    config.rho.reserve(n);
    for (const auto& slot : slots)
      config.rho.push_back(
          ParameterRule::constant(slot.is_forward() ? 0.9 / slot.lipschitz() : 1.0));
  }
  if (config.rho.size() != n)
    throw ConfigError(
        fmt::format("expected {} stepsize rules, one per operator, got {}", n, config.rho.size()));

  for (std::size_t i = 0; i < n; ++i) {
    const ParameterRule& r = config.rho[i];
    if (!finite_positive(r.lower()) || !std::isfinite(r.upper()) || r.lower() > r.upper())
      throw StepsizeError(fmt::format(
          "stepsize bounds for operator {} must satisfy 0 < rho_lo <= rho_hi < inf, got [{}, {}]",
          i + 1, r.lower(), r.upper()));
    const OperatorSlot& slot = slots[i];
    if (!slot.op) throw ConfigError(fmt::format("operator {} is missing", i + 1));
    if (slot.is_forward()) {
      const double lip = slot.lipschitz();
      if (!(r.upper() * lip < 1.0))
        throw StepsizeError(fmt::format(
            "forward stepsize bound violated for operator {} (rho must be < 1/L = {}, got {})",
            i + 1, 1.0 / lip, r.upper()));
    } else {
      if (!slot.op->has_resolvent())
        throw ConfigError(
            fmt::format("operator {} ({}) has no resolvent and cannot be used in a backward slot",
                        i + 1, slot.op->name()));
      if (slot.injector.sigma() > config.sigma || slot.injector.delta() > config.delta)
        throw ConfigError(fmt::format(
            "operator {}: error injector (sigma={}, delta={}) exceeds the configured error "
            "tolerances (sigma={}, delta={})",
            i + 1, slot.injector.sigma(), slot.injector.delta(), config.sigma, config.delta));
    }
  }
  return config;
}

// ---- hyperplane ------------------------------------------------------------------------

Vector IterationRecord::w(std::size_t i) const {
  if (i + 1 < n()) return p_before.w(i);
  return wn_of(p_before);
}

double phi_value(const IterationRecord& record, const ProductPoint& p) {
  const std::size_t n = record.n();
  if (p.n() != n) throw DimensionError("phi_value: point has the wrong number of blocks");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    total += dot(p.z() - record.x[i], record.y[i] - p.w(i));
  total += dot(p.z() - record.x[n - 1], record.y[n - 1] - wn_of(p));
  require_finite(total, "phi");
  return total;
}

double phi_expanded(const IterationRecord& record) {
  const ProductPoint& p = record.p_before;
  double total = dot(p.z(), record.v);
  for (std::size_t i = 0; i < record.u.size(); ++i) total += dot(p.w(i), record.u[i]);
  for (std::size_t i = 0; i < record.n(); ++i) total -= dot(record.x[i], record.y[i]);
  require_finite(total, "phi");
  return total;
}

ProductPoint phi_gradient(const IterationRecord& record, double gamma) {
  return ProductPoint((1.0 / gamma) * record.v, record.u, gamma);
}

// ---- solver ----------------------------------------------------------------------------

Solver::Solver(std::vector<OperatorSlot> slots, const SolverConfig& config, ProductPoint start)
    : slots_(std::move(slots)), config_(resolve_config(slots_, config)), point_(std::move(start)) {
  if (point_.n() != slots_.size())
    throw DimensionError(fmt::format("start point has {} blocks but there are {} operators",
                                     point_.n(), slots_.size()));
  if (point_.gamma() != config_.gamma)
    throw DimensionError(fmt::format("start point carries gamma={} but the solver uses gamma={}",
                                     point_.gamma(), config_.gamma));
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].op->dim() != point_.dim())
      throw DimensionError(fmt::format("operator {} acts on dimension {} but z has dimension {}",
                                       i + 1, slots_[i].op->dim(), point_.dim()));
  for (const auto& w : point_.w()) require_finite(w, "start w");
  require_finite(point_.z(), "start z");
}

IterationRecord Solver::iterate() {
  if (finished_) throw ConfigError("solver already returned a solution");
  const std::size_t n = slots_.size();
  const double gamma = config_.gamma;

  IterationRecord r;
  r.k = ++k_;
  r.beta = config_.beta.at(r.k);
  r.p_before = point_;
  r.x.resize(n);
  r.y.resize(n);
  r.e.resize(n);
  r.tz.resize(n);
  r.rho.resize(n);
  r.kinds.resize(n);

  const Vector wn = wn_of(point_);
  const Vector& z = point_.z();
  for (std::size_t i = 0; i < n; ++i) {
    OperatorSlot& slot = slots_[i];
    const double rho = config_.rho[i].at(r.k);
    if (slot.is_forward() && !(rho * slot.lipschitz() < 1.0))
      throw StepsizeError(fmt::format(
          "forward stepsize bound violated for operator {} at iteration {} (rho must be < 1/L)",
          i + 1, r.k));
    const Vector& w = i + 1 < n ? point_.w(i) : wn;
    Activation act =
        slot.is_forward() ? forward_activate(slot, z, w, rho) : backward_activate(slot, z, w, rho);
    r.x[i] = std::move(act.x);
    r.y[i] = std::move(act.y);
    r.e[i] = std::move(act.e);
    r.tz[i] = std::move(act.tz);
    r.rho[i] = rho;
    r.kinds[i] = slot.kind;
  }

  const Vector& xn = r.x[n - 1];
  r.u.reserve(n - 1);
  double u_sq = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    r.u.push_back(r.x[i] - xn);
    u_sq += norm_sq(r.u.back());
  }
  r.v = Vector(point_.dim());
  for (const Vector& y : r.y) r.v += y;
  r.pi = u_sq + norm_sq(r.v) / gamma;
  require_finite(r.pi, "pi");

  r.phi = config_.phi_evaluation == PhiEvaluation::kExpanded ? phi_expanded(r)
                                                              : phi_value(r, point_);

  const double scale = std::max(1.0, gamma_norm_sq(point_));
  if (r.pi > config_.pi_tolerance * scale) {
    r.alpha = r.beta * r.phi / r.pi;
    require_finite(r.alpha, "alpha");
    Vector z_next = axpy(-r.alpha / gamma, r.v, z);
    std::vector<Vector> w_next;
    w_next.reserve(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) w_next.push_back(axpy(-r.alpha, r.u[i], point_.w(i)));
    point_ = ProductPoint(std::move(z_next), std::move(w_next), gamma);
  } else {
    r.alpha = 0.0;
    r.terminal = true;
    std::vector<Vector> w_next(r.y.begin(), r.y.end() - 1);
    point_ = ProductPoint(xn, std::move(w_next), gamma);
    finished_ = true;
  }
  r.p_after = point_;
  return r;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIters:
      return "max_iters";
    case SolveStatus::kStopped:
      return "stopped";
    case SolveStatus::kError:
      return "error";
  }
  return "error";
}

SolveOutcome solve(std::vector<OperatorSlot> slots, const SolverConfig& config,
                   ProductPoint start, const SolveHooks& hooks) {
  Solver solver(std::move(slots), config, std::move(start));
  const std::size_t stride = solver.config().trace_stride;

  SolveOutcome out;
  out.status = SolveStatus::kMaxIters;
  for (std::size_t it = 0; it < solver.config().max_iters; ++it) {
    IterationRecord rec;
    try {
      rec = solver.iterate();
    } catch (const Error& e) {
      out.status = SolveStatus::kError;
      out.message = e.what();
      break;
    }
    if (hooks.observer) hooks.observer(rec);
    const bool terminal = rec.terminal;
    const bool stop = !terminal && hooks.stop && hooks.stop(rec);
    if (terminal || (rec.k - 1) % stride == 0) out.trace.push_back(std::move(rec));
    if (terminal) {
      out.status = SolveStatus::kConverged;
      break;
    }
    if (stop) {
      out.status = SolveStatus::kStopped;
      break;
    }
  }
  out.point = solver.point();
  out.iterations = solver.iterations();
  return out;
}

// ---- n = 1 closed forms --------------------------------------------------------------

std::vector<Vector> proximal_point_reference(const MonotoneOperator& op, const ParameterRule& rho,
                                             const ParameterRule& beta, Vector z1,
                                             std::size_t steps) {
  if (!op.has_resolvent()) throw ConfigError(op.name() + " has no resolvent");
  std::vector<Vector> zs;
  zs.reserve(steps + 1);
  zs.push_back(std::move(z1));
  for (std::size_t k = 1; k <= steps; ++k) {
    const Vector& z = zs.back();
    const Vector x = op.resolvent(z, rho.at(k));
    if (x == z) {
      zs.push_back(x);
      break;
    }
    const double b = beta.at(k);
    zs.push_back(axpy(1.0 - b, z, b * x));
  }
  return zs;
}

std::vector<Vector> extragradient_reference(const MonotoneOperator& op, const ParameterRule& rho,
                                            const ParameterRule& beta, Vector z1,
                                            std::size_t steps) {
  if (!op.is_single_valued()) throw ConfigError(op.name() + " is not single-valued");
  if (!op.meta().lipschitz) throw MetadataError(op.name() + " declares no Lipschitz constant");
  const double lip = *op.meta().lipschitz;
  if (!(rho.upper() * lip < 1.0))
    throw StepsizeError(fmt::format("forward stepsize bound violated (rho must be < 1/L = {}, got {})",
                                    1.0 / lip, rho.upper()));
  std::vector<Vector> zs;
  zs.reserve(steps + 1);
  zs.push_back(std::move(z1));
  for (std::size_t k = 1; k <= steps; ++k) {
    const Vector& z = zs.back();
    const double r = rho.at(k);
    const Vector tz = op.apply(z);
    const Vector x = axpy(-r, tz, z);
    const Vector tx = op.apply(x);
    const double txx = norm_sq(tx);
    if (txx == 0.0) {
      zs.push_back(x);
      break;
    }
    const double rt = beta.at(k) * r * dot(tz, tx) / txx;
    zs.push_back(axpy(-rt, tx, z));
  }
  return zs;
}

}  // namespace projsplit
