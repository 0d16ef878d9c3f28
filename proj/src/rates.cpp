#include "projsplit/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "projsplit/errors.hpp"

namespace projsplit {

ProblemMeta meta_from_slots(const std::vector<OperatorSlot>& slots) {
  ProblemMeta meta;
  meta.n = slots.size();
  for (const auto& slot : slots) {
    meta.kinds.push_back(slot.kind);
    const OperatorMeta& m = slot.op->meta();
    meta.lipschitz.push_back(m.lipschitz);
    meta.cocoercivity.push_back(m.cocoercivity);
    meta.ball_lipschitz.push_back(m.ball_lipschitz);
  }
  return meta;
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw MetadataError(fmt::format("{} must be positive and finite, got {}", what, v));
}

// Picks the index j and the Lipschitz subset for the single-point ergodic rate.
// Returns false when more than one backward function lacks a ball Lipschitz modulus.
bool select_single_point_index(const ProblemMeta& meta, std::size_t& j,
                               std::vector<std::size_t>& lip_set) {
  std::vector<std::size_t> backward;
  std::vector<std::size_t> without_m;
  for (std::size_t i = 0; i < meta.n; ++i) {
    if (meta.is_forward(i)) continue;
    backward.push_back(i);
    if (!meta.ball_lipschitz[i]) without_m.push_back(i);
  }
  lip_set.clear();
  if (backward.empty()) {
    j = 0;
    while (j < meta.n && !meta.is_forward(j)) ++j;
    return true;
  }
  if (backward.size() == 1) {
    j = backward.front();
    return true;
  }
  if (without_m.size() > 1) return false;
  j = without_m.empty() ? backward.back() : without_m.front();
  for (std::size_t i : backward)
    if (i != j) lip_set.push_back(i);
  return true;
}

}  // namespace

RateConstants compute_constants(const ProblemMeta& meta, const SolverConfig& config,
                                const std::optional<ProductPoint>& start) {
  const std::size_t n = meta.n;
  if (n == 0 || meta.kinds.size() != n || meta.lipschitz.size() != n)
    throw MetadataError("problem metadata does not describe any operators");
  if (config.rho.size() != n)
    throw ConfigError(fmt::format("expected {} stepsize rules, got {}", n, config.rho.size()));

  RateConstants c;
  c.n = n;
  c.gamma = config.gamma;
  c.beta_lo = config.beta.lower();
  c.beta_hi = config.beta.upper();
  c.sigma = config.sigma;
  c.delta = config.delta;
  c.rho_n = config.rho[n - 1].upper();

  c.rho_lo = std::numeric_limits<double>::infinity();
  bool any_backward = false;
  double xi2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const ParameterRule& r = config.rho[i];
    c.rho_lo = std::min(c.rho_lo, r.lower());
    if (meta.is_forward(i)) {
      if (!meta.lipschitz[i]) throw MetadataError(fmt::format("operator {} needs L", i + 1));
      const double lip = *meta.lipschitz[i];
      ++c.n_forward;
      c.l_bar = std::max(c.l_bar, lip);
      xi2 = std::min(xi2, 1.0 / r.upper() - lip);
    } else {
      any_backward = true;
      c.rho_hi = std::max(c.rho_hi, r.upper());
    }
  }
  if (any_backward) xi2 = std::min(xi2, (1.0 - c.sigma) / c.rho_hi);
  require_positive(c.rho_lo, "smallest stepsize");

  const double nf = static_cast<double>(n);
  c.xi1 = 2.0 * nf *
          (1.0 + 2.0 / c.gamma *
                     (c.l_bar * c.l_bar * static_cast<double>(c.n_forward) +
                      (1.0 + c.delta) / (c.rho_lo * c.rho_lo)));
  c.xi2 = xi2;
  if (!(c.xi2 > 0.0))
    throw StepsizeError(fmt::format(
        "stepsize bounds leave no positive separation margin (xi2 = {}); each forward "
        "stepsize must stay strictly below 1/L",
        c.xi2));
  c.tau = 1.0 / (c.beta_lo * (2.0 - c.beta_hi));
  c.alpha_lb = c.beta_lo * c.xi2 / c.xi1;

  const double bb = c.beta_lo * c.beta_lo;
  c.e1 = 2.0 / ((1.0 - c.sigma) * c.rho_lo) *
         (1.0 + c.l_bar * (1.0 + c.rho_lo * c.l_bar) / c.xi2) * c.xi1 / (bb * c.xi2);
  c.e2 = c.xi1 / (2.0 * c.beta_lo * c.xi2) *
         (1.0 + (3.0 + 2.0 * c.e1) * c.tau +
          c.rho_n * c.tau *
              (2.0 + c.gamma * c.e1 + c.gamma * c.delta * c.xi1 / (bb * c.xi2 * c.xi2)));
  c.strong_rate_factor = std::max(1.0, (1.0 + c.tau) / 2.0);

  if (meta.oracle) {
    const ProductPoint& ps = *meta.oracle;
    if (ps.n() != n) throw DimensionError("oracle point has the wrong number of blocks");
    if (ps.gamma() != c.gamma)
      throw DimensionError("oracle point carries a different gamma than the solver");
    const double ps2 = gamma_norm_sq(ps);
    c.p_star_norm = std::sqrt(ps2);
    c.e3 = 2.0 * std::sqrt(nf) * *c.p_star_norm * c.xi1 / (c.beta_lo * c.xi2);
    if (start) {
      require_same_shape(*start, ps, "start point vs oracle");
      const double r2 = gamma_dist_sq(*start, ps);
      c.radius = std::sqrt(r2);
      c.bx = std::sqrt(2.0 * (c.xi1 / (bb * c.xi2 * c.xi2) + 1.0 / c.gamma) * r2 +
                       2.0 / c.gamma * ps2);
      c.by = std::sqrt(2.0 * (nf + c.e1) * r2 + 2.0 * nf * ps2);

      std::size_t j = 0;
      std::vector<std::size_t> lip_set;
      if (meta.single_point_rate_applicable && select_single_point_index(meta, j, lip_set)) {
        double m_sum = 0.0;
        for (std::size_t i : lip_set) m_sum += *meta.ball_lipschitz[i];
        c.e4 = *c.e3 + 4.0 * c.xi1 / (c.beta_lo * c.xi2) *
                           (m_sum + nf * (*c.by + 2.0 * c.l_bar * *c.bx));
        c.e4_index = j;
      }
    }
  }

  if (meta.mu && meta.strong_index) {
    bool cocoercive = true;
    double gamma_bar = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!meta.cocoercivity[i]) {
        cocoercive = false;
        break;
      }
      gamma_bar = std::max(gamma_bar, *meta.cocoercivity[i]);
    }
    if (cocoercive && *meta.mu > 0.0) {
      const double m = std::max(1.0 / *meta.mu, gamma_bar);
      const double g1 = 1.0 + c.gamma;
      const double inner = (8.0 * c.xi1 * c.xi1 * g1 * g1 * m * m + 2.0 * c.gamma * c.xi1) /
                               (bb * c.xi2 * c.xi2) +
                           2.0 * c.e1;
      c.e5 = 0.5 / inner;
      c.contraction_factor = 1.0 - std::min(1.0, 1.0 / c.tau) * *c.e5;
    }
  }
  return c;
}

// ---- ledger ----------------------------------------------------------------------------

double LedgerResiduals::worst() const {
  double w = std::numeric_limits<double>::infinity();
  for (double v : {dz, dw, zx, wy, phi, wtz, zx_step, wy_step})
    if (!std::isnan(v)) w = std::min(w, v);
  return w;
}

void update_ledger(SummabilityLedger& ledger, const IterationRecord& record) {
  if (record.terminal) return;
  const std::size_t n = record.n();
  const ProductPoint& p = record.p_before;
  const ProductPoint& q = record.p_after;
  ledger.dz += dist_sq(q.z(), p.z());
  for (std::size_t i = 0; i + 1 < n; ++i) ledger.dw += dist_sq(q.w(i), p.w(i));
  for (std::size_t i = 0; i < n; ++i) {
    const Vector wi = record.w(i);
    ledger.zx += dist_sq(p.z(), record.x[i]);
    ledger.wy += dist_sq(wi, record.y[i]);
    if (record.kinds[i] == SlotKind::kForward) ledger.wtz += dist_sq(wi, record.tz[i]);
  }
  ledger.phi += record.phi;
  ++ledger.steps;
}

LedgerResiduals ledger_residuals(const SummabilityLedger& ledger, const IterationRecord& record,
                                 const RateConstants& c) {
  if (!c.radius) throw MetadataError("ledger caps need the oracle point and the start point");
  const double r2 = *c.radius * *c.radius;
  const double bb = c.beta_lo * c.beta_lo;
  LedgerResiduals res;
  res.dz = c.tau * r2 / c.gamma - ledger.dz;
  res.dw = c.tau * r2 - ledger.dw;
  res.zx = c.tau * c.xi1 / (bb * c.xi2 * c.xi2) * r2 - ledger.zx;
  res.wy = c.tau * c.e1 * r2 - ledger.wy;
  res.phi = c.tau * c.xi1 / (bb * c.xi2) * r2 - ledger.phi;
  res.wtz = c.tau * c.e1 * r2 - ledger.wtz;
  if (record.terminal) {
    res.zx_step = std::numeric_limits<double>::quiet_NaN();
    res.wy_step = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  const double step = gamma_dist_sq(record.p_after, record.p_before);
  double zx = 0.0;
  double wy = 0.0;
  for (std::size_t i = 0; i < record.n(); ++i) {
    zx += dist_sq(record.p_before.z(), record.x[i]);
    wy += dist_sq(record.w(i), record.y[i]);
  }
  res.zx_step = c.xi1 / (bb * c.xi2 * c.xi2) * step - zx;
  res.wy_step = c.e1 * step - wy;
  return res;
}

}  // namespace projsplit
