#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "projsplit/errors.hpp"
#include "projsplit/rates.hpp"

namespace projsplit {

namespace {

struct KindName {
  CertificateKind kind;
  const char* name;
  double tolerance;
};

constexpr std::array<KindName, 13> kKinds = {{
    {CertificateKind::kFejer, "fejer", 1e-9},
    {CertificateKind::kSeparation, "separation", 1e-9},
    {CertificateKind::kAlphaLB, "alpha_lb", 1e-12},
    {CertificateKind::kPhiLB, "phi_lb", 1e-9},
    {CertificateKind::kGradUB, "grad_ub", 1e-9},
    {CertificateKind::kUpdateIdentity, "update_identity", 1e-12},
    {CertificateKind::kSummability, "summability", 1e-8},
    {CertificateKind::kBounds, "bounds", 1e-9},
    {CertificateKind::kErgodicGap, "ergodic_gap", 1e-8},
    {CertificateKind::kErgodicGapSinglePoint, "ergodic_gap_single", 1e-8},
    {CertificateKind::kStrongRate, "strong_rate", 1e-8},
    {CertificateKind::kLinearContraction, "linear_contraction", 1e-12},
    {CertificateKind::kErrorConditions, "error_conditions", 1e-12},
}};

const KindName& entry(CertificateKind kind) {
  for (const auto& e : kKinds)
    if (e.kind == kind) return e;
  throw ConfigError("unknown certificate kind");
}

Certificate start(CertificateKind kind) {
  Certificate c;
  c.kind = kind;
  c.tolerance = entry(kind).tolerance;
  return c;
}

const std::vector<IterationRecord>& trace_of(const CertificateInputs& in) {
  if (!in.trace) throw ConfigError("certificate evaluated without a trace");
  const auto& trace = *in.trace;
  for (std::size_t i = 0; i < trace.size(); ++i)
    if (trace[i].k != i + 1)
      throw ConfigError("certificates need the complete trace (no thinning)");
  return trace;
}

const ProblemMeta& meta_of(const CertificateInputs& in) {
  if (!in.meta) throw MetadataError("certificate evaluated without problem metadata");
  return *in.meta;
}

const RateConstants& constants_of(const CertificateInputs& in) {
  if (!in.constants) throw MetadataError("certificate evaluated without rate constants");
  return *in.constants;
}

const ProductPoint& oracle_of(const ProblemMeta& meta, CertificateKind kind) {
  if (!meta.oracle)
    throw MetadataError(
        fmt::format("metadata required: certificate '{}' needs an oracle solution point",
                    to_string(kind)));
  return *meta.oracle;
}

double radius_of(const RateConstants& c, CertificateKind kind) {
  if (!c.radius)
    throw MetadataError(fmt::format(
        "metadata required: certificate '{}' needs the distance from the start to the oracle",
        to_string(kind)));
  return *c.radius;
}

double sum_zx(const IterationRecord& r) {
  double s = 0.0;
  for (const Vector& x : r.x) s += dist_sq(r.p_before.z(), x);
  return s;
}

}  // namespace

std::string to_string(CertificateKind kind) { return entry(kind).name; }

std::optional<CertificateKind> certificate_kind_from_string(const std::string& name) {
  for (const auto& e : kKinds)
    if (name == e.name) return e.kind;
  return std::nullopt;
}

const std::vector<std::string>& certificate_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : kKinds) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

void Certificate::observe(double excess, std::size_t k) {
  ++checked;
  if (std::isnan(excess)) excess = std::numeric_limits<double>::infinity();
  if (excess > violation) {
    violation = excess;
    worst_k = k;
  }
}

void Certificate::finish() {
  pass = checked == 0 || violation <= tolerance;
  if (detail.empty())
    detail = checked == 0 ? "no applicable iterations"
                          : fmt::format("worst excess {:.3e} at k={} over {} checks", violation,
                                        worst_k, checked);
}

double fejer_residual(const IterationRecord& r, const ProductPoint& p_star) {
  const double b = r.beta;
  return gamma_dist_sq(r.p_before, p_star) - b * (2.0 - b) * gamma_dist_sq(r.p_after, r.p_before) -
         gamma_dist_sq(r.p_after, p_star);
}

Certificate check_fejer(const CertificateInputs& in) {
  Certificate c = start(CertificateKind::kFejer);
  const ProductPoint& ps = oracle_of(meta_of(in), c.kind);
  for (const auto& r : trace_of(in))
    if (!r.terminal) c.observe(-fejer_residual(r, ps), r.k);
  c.finish();
  return c;
}

Certificate check_separation(const CertificateInputs& in) {
  Certificate c = start(CertificateKind::kSeparation);
  const ProductPoint& ps = oracle_of(meta_of(in), c.kind);
  for (const auto& r : trace_of(in)) c.observe(phi_value(r, ps), r.k);
  c.finish();
  return c;
}

Certificate check_alpha_lower_bound(const CertificateInputs& in) {
  Certificate c = start(CertificateKind::kAlphaLB);
  const RateConstants& rc = constants_of(in);
  for (const auto& r : trace_of(in))
    if (!r.terminal) c.observe(rc.alpha_lb - r.alpha, r.k);
  c.finish();
  return c;
}

Certificate check_phi_lower_bound(const CertificateInputs& in) {
  Certificate c = start(CertificateKind::kPhiLB);
  const RateConstants& rc = constants_of(in);
  const ProblemMeta& meta = meta_of(in);
  for (const auto& r : trace_of(in)) {
    c.observe(rc.xi2 * sum_zx(r) - r.phi, r.k);
    // phi + sum_F L_i |z - x_i|^2 >= (1 - sigma) rho_lo sum_B |y_i - w_i|^2
    //                                 + rho_lo sum_F |T_i z - w_i|^2
    double lhs = r.phi;
    double rhs = 0.0;
    for (std::size_t i = 0; i < r.n(); ++i) {
      const Vector wi = r.w(i);
      if (r.kinds[i] == SlotKind::kForward) {
        lhs += *meta.lipschitz.at(i) * dist_sq(r.p_before.z(), r.x[i]);
        rhs += rc.rho_lo * dist_sq(r.tz[i], wi);
      } else {
        rhs += (1.0 - rc.sigma) * rc.rho_lo * dist_sq(r.y[i], wi);
      }
    }
    c.observe(rhs - lhs, r.k);
  }
  c.finish();
  return c;
}

Certificate check_grad_upper_bound(const CertificateInputs& in) {
  Certificate c = start(CertificateKind::kGradUB);
  const RateConstants& rc = constants_of(in);
  for (const auto& r : trace_of(in)) {
    const double grad = gamma_norm_sq(phi_gradient(r, rc.gamma));
    c.observe(grad - rc.xi1 * sum_zx(r), r.k);
  }
  c.finish();
  return c;
}

Certificate check_update_identity(const CertificateInputs& in) {
  Certificate c = start(CertificateKind::kUpdateIdentity);
  const RateConstants& rc = constants_of(in);
  for (const auto& r : trace_of(in)) {
    const ProductPoint grad = phi_gradient(r, rc.gamma);
    const double g2 = gamma_norm_sq(grad);
    c.observe(std::abs(g2 - r.pi) / std::max(1.0, r.pi), r.k);
    if (r.terminal) continue;
    const ProductPoint expected = axpy(-r.alpha, grad, r.p_before);
    const double scale = std::max(1.0, std::sqrt(gamma_norm_sq(r.p_after)));
    c.observe(std::sqrt(gamma_dist_sq(expected, r.p_after)) / scale, r.k);
    const double alpha = r.beta * r.phi / r.pi;
    c.observe(std::abs(alpha - r.alpha) / std::max(1.0, std::abs(alpha)), r.k);
  }
  c.finish();
  return c;
}

Certificate check_summability(const CertificateInputs& in) {
  Certificate c = start(CertificateKind::kSummability);
  const RateConstants& rc = constants_of(in);
  radius_of(rc, c.kind);
  SummabilityLedger ledger;
  for (const auto& r : trace_of(in)) {
    update_ledger(ledger, r);
    c.observe(-ledger_residuals(ledger, r, rc).worst(), r.k);
  }
  c.finish();
  return c;
}

Certificate check_bounds(const CertificateInputs& in) {
  Certificate c = start(CertificateKind::kBounds);
  const RateConstants& rc = constants_of(in);
  if (!rc.bx || !rc.by)
    throw MetadataError("metadata required: iterate bounds need the oracle and start points");
  for (const auto& r : trace_of(in)) {
    for (std::size_t i = 0; i < r.n(); ++i) {
      c.observe(norm(r.x[i]) - *rc.bx, r.k);
      c.observe(norm(r.y[i]) - *rc.by, r.k);
    }
  }
  c.finish();
  return c;
}

// ---- ergodic ------------------------------------------------------------------------

std::vector<Vector> ergodic_averages(const std::vector<IterationRecord>& trace, std::size_t k) {
  if (trace.empty() || k == 0) throw ConfigError("ergodic averages need at least one iteration");
  k = std::min(k, trace.size());
  const std::size_t n = trace.front().n();
  std::vector<Vector> sums(n, Vector(trace.front().p_before.dim()));
  double total = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    const double a = trace[t].alpha;
    if (!(a > 0.0)) throw ConfigError(fmt::format("ergodic weight alpha_{} is not positive", t + 1));
    total += a;
    for (std::size_t i = 0; i < n; ++i) sums[i] = axpy(a, trace[t].x[i], sums[i]);
  }
  for (auto& s : sums) s *= 1.0 / total;
  return sums;
}

Vector uniform_average(const std::vector<IterationRecord>& trace, std::size_t l, std::size_t k) {
  if (trace.empty() || k == 0) throw ConfigError("averages need at least one iteration");
  k = std::min(k, trace.size());
  Vector sum(trace.front().p_before.dim());
  for (std::size_t t = 0; t < k; ++t) sum += trace[t].x.at(l);
  sum *= 1.0 / static_cast<double>(k);
  return sum;
}

std::optional<double> objective_sum(const std::vector<OperatorSlot>& slots,
                                    const std::vector<Vector>& points) {
  if (points.size() != slots.size())
    throw DimensionError("objective_sum: one point per operator is required");
  double total = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto v = slots[i].op->value(points[i]);
    if (!v) return std::nullopt;
    total += *v;
  }
  return total;
}

namespace {

// Running alpha-weighted sums of x_i^t.
class ErgodicAccumulator {
 public:
  ErgodicAccumulator(std::size_t n, std::size_t dim) : sums_(n, Vector(dim)) {}

  void add(const IterationRecord& r) {
    total_ += r.alpha;
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] = axpy(r.alpha, r.x[i], sums_[i]);
  }
  double total() const noexcept { return total_; }
  std::vector<Vector> averages() const {
    std::vector<Vector> out = sums_;
    for (auto& v : out) v *= 1.0 / total_;
    return out;
  }

 private:
  std::vector<Vector> sums_;
  double total_ = 0.0;
};

}  // namespace

Certificate check_ergodic_gap(const CertificateInputs& in, bool single_point) {
  Certificate c = start(single_point ? CertificateKind::kErgodicGapSinglePoint
                                     : CertificateKind::kErgodicGap);
  const ProblemMeta& meta = meta_of(in);
  const RateConstants& rc = constants_of(in);
  require_certificate_inputs(c.kind, meta, rc);
  if (!in.slots) throw ConfigError("ergodic gap needs the operators");
  const auto& slots = *in.slots;
  const auto& trace = trace_of(in);
  const double r = *rc.radius;
  const double fstar = *meta.f_star;
  const double e_lin = single_point ? *rc.e4 : *rc.e3;
  const double gap_bound = rc.e2 * r * r + e_lin * r;
  if (trace.empty()) {
    c.finish();
    return c;
  }

  ErgodicAccumulator acc(meta.n, trace.front().p_before.dim());
  for (const auto& rec : trace) {
    if (rec.terminal) {
      // Finite termination: every x_j^K attains the optimal value.
      for (std::size_t j = 0; j < rec.n(); ++j) {
        const auto v = objective_sum(slots, std::vector<Vector>(rec.n(), rec.x[j]));
        if (!v) throw MetadataError("ergodic gap needs every function value");
        c.observe((*v - fstar) / std::max(1.0, std::abs(fstar)), rec.k);
      }
      continue;
    }
    acc.add(rec);
    if (!(acc.total() > 0.0)) continue;  // no step taken yet
    const std::vector<Vector> avg = acc.averages();
    const double k = static_cast<double>(rec.k);
    std::optional<double> value;
    if (single_point)
      value = objective_sum(slots, std::vector<Vector>(meta.n, avg[*rc.e4_index]));
    else
      value = objective_sum(slots, avg);
    if (!value) throw MetadataError("ergodic gap needs every function value");
    c.observe(k * (*value - fstar) - gap_bound, rec.k);

    double spread = 0.0;
    for (std::size_t i = 0; i < avg.size(); ++i)
      for (std::size_t l = i + 1; l < avg.size(); ++l)
        spread = std::max(spread, std::sqrt(dist_sq(avg[i], avg[l])));
    c.observe(spread - 4.0 * r / (rc.alpha_lb * k), rec.k);
  }
  c.finish();
  return c;
}

Certificate check_strong_rate(const CertificateInputs& in) {
  Certificate c = start(CertificateKind::kStrongRate);
  const ProblemMeta& meta = meta_of(in);
  const RateConstants& rc = constants_of(in);
  require_certificate_inputs(c.kind, meta, rc);
  const ProductPoint& ps = *meta.oracle;
  const double mu = *meta.mu;
  const std::size_t l = *meta.strong_index;
  const double r = *rc.radius;
  const double scale = rc.strong_rate_factor * rc.xi1 * r * r / (rc.beta_lo * rc.xi2 * mu);
  const auto& trace = trace_of(in);
  if (trace.empty()) {
    c.finish();
    return c;
  }
  Vector sum(ps.dim());
  for (const auto& rec : trace) {
    if (rec.terminal) continue;
    const double sep = phi_value(rec, rec.p_before) - phi_value(rec, ps);
    c.observe(mu * dist_sq(ps.z(), rec.x[l]) - sep, rec.k);
    sum += rec.x[l];
    const double k = static_cast<double>(rec.k);
    c.observe(dist_sq((1.0 / k) * sum, ps.z()) - scale / k, rec.k);
  }
  c.finish();
  return c;
}

Certificate check_linear_contraction(const CertificateInputs& in) {
  Certificate c = start(CertificateKind::kLinearContraction);
  const ProblemMeta& meta = meta_of(in);
  const RateConstants& rc = constants_of(in);
  require_certificate_inputs(c.kind, meta, rc);
  const ProductPoint& ps = *meta.oracle;
  const double e5 = *rc.e5;
  if (!(e5 > 0.0 && e5 <= 0.25)) {
    c.observe(std::numeric_limits<double>::infinity(), 0);
    c.detail = fmt::format("contraction constant {} outside (0, 1/4]", e5);
  }
  const double q = *rc.contraction_factor;
  for (const auto& rec : trace_of(in)) {
    if (rec.terminal) continue;
    c.observe(gamma_dist_sq(rec.p_after, ps) - q * gamma_dist_sq(rec.p_before, ps), rec.k);
  }
  c.finish();
  return c;
}

Certificate check_injected_errors(const CertificateInputs& in) {
  Certificate c = start(CertificateKind::kErrorConditions);
  const RateConstants& rc = constants_of(in);
  for (const auto& r : trace_of(in)) {
    for (std::size_t i = 0; i < r.n(); ++i) {
      if (r.kinds[i] != SlotKind::kBackward) continue;
      const ErrorCheck e = check_error_conditions(r.p_before.z(), r.x[i], r.y[i], r.w(i), r.rho[i],
                                                  r.e[i], rc.sigma, rc.delta);
      c.observe(-std::min({e.slack1, e.slack2, e.slack3}), r.k);
    }
  }
  c.finish();
  return c;
}

void require_certificate_inputs(CertificateKind kind, const ProblemMeta& meta,
                                const RateConstants& rc) {
  const std::string name = to_string(kind);
  auto need = [&](bool ok, const char* what) {
    if (!ok)
      throw MetadataError(fmt::format("metadata required: certificate '{}' needs {}", name, what));
  };
  switch (kind) {
    case CertificateKind::kFejer:
    case CertificateKind::kSeparation:
      need(meta.oracle.has_value(), "an oracle solution point");
      break;
    case CertificateKind::kSummability:
    case CertificateKind::kBounds:
      need(rc.radius.has_value(), "an oracle solution point");
      break;
    case CertificateKind::kErgodicGap:
    case CertificateKind::kErgodicGapSinglePoint:
      need(meta.f_star.has_value(), "the optimal value F*");
      need(rc.radius.has_value() && rc.e3.has_value(), "an oracle solution point");
      if (kind == CertificateKind::kErgodicGapSinglePoint) {
        if (!meta.single_point_rate_applicable)
          throw ConfigError(
              "single-point ergodic rate requested, but more than one backward function is "
              "not Lipschitz continuous on bounded sets for this instance");
        need(rc.e4.has_value(), "Lipschitz moduli of all but one backward function");
      }
      break;
    case CertificateKind::kStrongRate:
      need(meta.mu.has_value() && meta.strong_index.has_value(),
           "a strong monotonicity modulus mu and its operator index");
      need(rc.radius.has_value(), "an oracle solution point");
      break;
    case CertificateKind::kLinearContraction:
      need(meta.mu.has_value() && meta.strong_index.has_value(),
           "a strong monotonicity modulus mu and its operator index");
      need(rc.e5.has_value(), "cocoercivity constants for operators 1..n-1");
      need(meta.oracle.has_value(), "an oracle solution point");
      break;
    case CertificateKind::kAlphaLB:
    case CertificateKind::kPhiLB:
    case CertificateKind::kGradUB:
    case CertificateKind::kUpdateIdentity:
    case CertificateKind::kErrorConditions:
      break;
  }
}

Certificate run_certificate(CertificateKind kind, const CertificateInputs& in) {
  switch (kind) {
    case CertificateKind::kFejer:
      return check_fejer(in);
    case CertificateKind::kSeparation:
      return check_separation(in);
    case CertificateKind::kAlphaLB:
      return check_alpha_lower_bound(in);
    case CertificateKind::kPhiLB:
      return check_phi_lower_bound(in);
    case CertificateKind::kGradUB:
      return check_grad_upper_bound(in);
    case CertificateKind::kUpdateIdentity:
      return check_update_identity(in);
    case CertificateKind::kSummability:
      return check_summability(in);
    case CertificateKind::kBounds:
      return check_bounds(in);
    case CertificateKind::kErgodicGap:
      return check_ergodic_gap(in, false);
    case CertificateKind::kErgodicGapSinglePoint:
      return check_ergodic_gap(in, true);
    case CertificateKind::kStrongRate:
      return check_strong_rate(in);
    case CertificateKind::kLinearContraction:
      return check_linear_contraction(in);
    case CertificateKind::kErrorConditions:
      return check_injected_errors(in);
  }
  throw ConfigError("unknown certificate kind");
}

// ---- trace metrics -----------------------------------------------------------------

std::vector<TraceRow> trace_metrics(const std::vector<IterationRecord>& trace,
                                    const std::vector<OperatorSlot>& slots,
                                    const ProblemMeta& meta, const RateConstants& constants,
                                    bool with_ledger) {
  std::vector<TraceRow> rows;
  rows.reserve(trace.size());
  if (trace.empty()) return rows;
  const bool ledger_on = with_ledger && constants.radius.has_value();
  SummabilityLedger ledger;
  ErgodicAccumulator acc(meta.n, trace.front().p_before.dim());
  bool gap_available = meta.f_star.has_value();

  for (const auto& r : trace) {
    TraceRow row;
    row.k = r.k;
    row.phi = r.phi;
    row.pi = r.pi;
    row.alpha = r.alpha;
    row.norm_grad_gamma = std::sqrt(gamma_norm_sq(phi_gradient(r, constants.gamma)));
    if (meta.oracle) {
      row.dist_p_to_pstar_gamma = std::sqrt(gamma_dist_sq(r.p_before, *meta.oracle));
      row.dist_z_to_zstar = std::sqrt(dist_sq(r.p_before.z(), meta.oracle->z()));
      if (!r.terminal) row.fejer_residual = fejer_residual(r, *meta.oracle);
    }
    if (gap_available) {
      std::optional<double> value;
      if (r.terminal) {
        value = objective_sum(slots, std::vector<Vector>(r.n(), r.x.back()));
      } else {
        acc.add(r);
        if (acc.total() > 0.0) value = objective_sum(slots, acc.averages());
      }
      if (value)
        row.f_gap = *value - *meta.f_star;
      else if (acc.total() > 0.0 || r.terminal)
        gap_available = false;  // some f_i is not exposed
    }
    if (ledger_on) {
      update_ledger(ledger, r);
      row.caps = ledger_residuals(ledger, r, constants);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace projsplit
