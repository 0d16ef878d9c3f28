#pragma once

// Rate constants and per-run certificates.
//
// Notation: rho_lo = smallest lower stepsize bound over all operators, rho_hi = largest
// backward upper bound (0 when there are no backward slots), Lbar = largest forward
// Lipschitz constant (0 when there are no forward slots), R = |p^1 - p*|_gamma.
//
//   xi1   = 2n [1 + 2/gamma (Lbar^2 |I_F| + (1 + delta) / rho_lo^2)]
//   xi2   = min{(1 - sigma)/rho_hi (backward slots present), min_{j in I_F} (1/rho_hi_j - L_j)}
//   tau   = 1 / (beta_lo (2 - beta_hi))
//   alpha_lb = beta_lo xi2 / xi1
//   E1    = 2/((1 - sigma) rho_lo) (1 + Lbar (1 + rho_lo Lbar)/xi2) xi1 / (beta_lo^2 xi2)

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "projsplit/operators.hpp"
#include "projsplit/solver.hpp"
#include "projsplit/space.hpp"

namespace projsplit {

struct ProblemMeta {
  std::size_t n = 0;
  std::vector<SlotKind> kinds;
  std::vector<std::optional<double>> lipschitz;       // L_i
  std::vector<std::optional<double>> cocoercivity;    // Gamma_i
  std::vector<std::optional<double>> ball_lipschitz;  // M_i (Lipschitz modulus of f_i)
  std::optional<double> mu;                           // strong monotonicity modulus
  std::optional<std::size_t> strong_index;            // l, 0-based
  std::optional<ProductPoint> oracle;                 // p* in the extended solution set
  std::optional<double> f_star;                       // optimal value for optimization instances
  // False for instances where the single-point ergodic rate is known not to hold
  // (more than one non-Lipschitz backward function).
  bool single_point_rate_applicable = true;

  bool is_forward(std::size_t i) const { return kinds.at(i) == SlotKind::kForward; }
};

// Fills kinds and per-operator constants from the slots' declared metadata.
ProblemMeta meta_from_slots(const std::vector<OperatorSlot>& slots);

struct RateConstants {
  // inputs
  std::size_t n = 0;
  std::size_t n_forward = 0;
  double gamma = 1.0;
  double beta_lo = 1.0;
  double beta_hi = 1.0;
  double sigma = 0.0;
  double delta = 0.0;
  double rho_lo = 0.0;
  double rho_hi = 0.0;  // backward cap
  double rho_n = 0.0;   // upper stepsize bound of the last operator
  double l_bar = 0.0;

  double xi1 = 0.0;
  double xi2 = 0.0;
  double tau = 0.0;
  double alpha_lb = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;

  // Need the oracle p* (and p^1 for the radius).
  std::optional<double> radius;        // R
  std::optional<double> p_star_norm;   // |p*|_gamma
  std::optional<double> e3;
  std::optional<double> bx;
  std::optional<double> by;
  // Needs ball Lipschitz moduli and an applicable instance.
  std::optional<double> e4;
  std::optional<std::size_t> e4_index;  // j, 0-based
  // Needs mu and cocoercivity of operators 1..n-1.
  std::optional<double> e5;

  // Multiplier on xi1 R^2 / (beta_lo xi2 mu k) in the ergodic distance bound:
  // max(1, (1 + tau)/2), which is 1 for beta = 1.
  double strong_rate_factor = 1.0;
  // 1 - min(1, 1/tau) E5 when E5 is available.
  std::optional<double> contraction_factor;
};

// `config` must already be resolved (see resolve_config).
RateConstants compute_constants(const ProblemMeta& meta, const SolverConfig& config,
                                const std::optional<ProductPoint>& start = std::nullopt);

// ---- summability ledger --------------------------------------------------------------

struct SummabilityLedger {
  double dz = 0.0;    // sum_t |z^{t+1} - z^t|^2
  double dw = 0.0;    // sum_t sum_{i<n} |w_i^{t+1} - w_i^t|^2
  double zx = 0.0;    // sum_t sum_i |z^t - x_i^t|^2
  double wy = 0.0;    // sum_t sum_i |w_i^t - y_i^t|^2
  double phi = 0.0;   // sum_t phi_t(p^t)
  double wtz = 0.0;   // sum_t sum_{i in I_F} |w_i^t - T_i z^t|^2
  std::size_t steps = 0;
};

struct LedgerResiduals {
  // cap - running sum; nonnegative when the cap holds.
  double dz = 0.0;
  double dw = 0.0;
  double zx = 0.0;
  double wy = 0.0;
  double phi = 0.0;
  double wtz = 0.0;
  // Per-iteration caps in terms of |p^{k+1} - p^k|_gamma^2.
  double zx_step = 0.0;
  double wy_step = 0.0;

  double worst() const;
};

inline const std::vector<std::string>& ledger_column_names() {
  static const std::vector<std::string> names = {"cap_dz",  "cap_dw",  "cap_zx",
                                                 "cap_wy",  "cap_phi", "cap_wtz",
                                                 "cap_zx_step", "cap_wy_step"};
  return names;
}

// Adds the record's increments; terminal records leave the ledger untouched.
void update_ledger(SummabilityLedger& ledger, const IterationRecord& record);
// Requires constants.radius.
LedgerResiduals ledger_residuals(const SummabilityLedger& ledger, const IterationRecord& record,
                                 const RateConstants& constants);

// ---- certificates --------------------------------------------------------------------

enum class CertificateKind {
  kFejer,
  kSeparation,
  kAlphaLB,
  kPhiLB,
  kGradUB,
  kUpdateIdentity,
  kSummability,
  kBounds,
  kErgodicGap,
  kErgodicGapSinglePoint,
  kStrongRate,
  kLinearContraction,
  kErrorConditions,
};

std::string to_string(CertificateKind kind);
std::optional<CertificateKind> certificate_kind_from_string(const std::string& name);
const std::vector<std::string>& certificate_names();

struct Certificate {
  CertificateKind kind = CertificateKind::kFejer;
  // Largest excess of a measured quantity over its bound (negative when every check
  // holds with room to spare).
  double violation = -std::numeric_limits<double>::infinity();
  std::size_t worst_k = 0;
  double tolerance = 0.0;
  std::size_t checked = 0;
  bool pass = true;
  std::string detail;

  void observe(double excess, std::size_t k);
  void finish();
};

// Everything a certificate may need. The trace must be complete (consecutive k).
struct CertificateInputs {
  const std::vector<IterationRecord>* trace = nullptr;
  const std::vector<OperatorSlot>* slots = nullptr;
  const ProblemMeta* meta = nullptr;
  const RateConstants* constants = nullptr;
  const SolverConfig* config = nullptr;
};

// |p^k - p*|^2 - beta_k (2 - beta_k) |p^{k+1} - p^k|^2 - |p^{k+1} - p*|^2
double fejer_residual(const IterationRecord& record, const ProductPoint& p_star);

Certificate check_fejer(const CertificateInputs& in);
Certificate check_separation(const CertificateInputs& in);
Certificate check_alpha_lower_bound(const CertificateInputs& in);
Certificate check_phi_lower_bound(const CertificateInputs& in);
Certificate check_grad_upper_bound(const CertificateInputs& in);
Certificate check_update_identity(const CertificateInputs& in);
Certificate check_summability(const CertificateInputs& in);
Certificate check_bounds(const CertificateInputs& in);
Certificate check_ergodic_gap(const CertificateInputs& in, bool single_point);
Certificate check_strong_rate(const CertificateInputs& in);
Certificate check_linear_contraction(const CertificateInputs& in);
Certificate check_injected_errors(const CertificateInputs& in);

// Throws MetadataError / ConfigError when the inputs cannot support the certificate.
void require_certificate_inputs(CertificateKind kind, const ProblemMeta& meta,
                                const RateConstants& constants);
Certificate run_certificate(CertificateKind kind, const CertificateInputs& in);

// ---- ergodic averages ------------------------------------------------------------------

// xbar_i^k = sum_{t<=k} alpha_t x_i^t / sum_{t<=k} alpha_t over the first k records.
std::vector<Vector> ergodic_averages(const std::vector<IterationRecord>& trace, std::size_t k);
// (1/k) sum_{t<=k} x_l^t.
Vector uniform_average(const std::vector<IterationRecord>& trace, std::size_t l, std::size_t k);

// sum_i f_i(x_i) (or sum_i f_i(x) when all points coincide); nullopt when some f_i is
// not exposed.
std::optional<double> objective_sum(const std::vector<OperatorSlot>& slots,
                                    const std::vector<Vector>& points);

// ---- trace metrics -----------------------------------------------------------------

struct TraceRow {
  std::size_t k = 0;
  double phi = 0.0;
  double pi = 0.0;
  double alpha = 0.0;
  double norm_grad_gamma = 0.0;
  std::optional<double> dist_p_to_pstar_gamma;
  std::optional<double> dist_z_to_zstar;
  std::optional<double> f_gap;
  std::optional<double> fejer_residual;
  std::optional<LedgerResiduals> caps;
};

// One row per record. Ledger residuals are filled when `with_ledger` is set and the
// radius is known.
std::vector<TraceRow> trace_metrics(const std::vector<IterationRecord>& trace,
                                    const std::vector<OperatorSlot>& slots,
                                    const ProblemMeta& meta, const RateConstants& constants,
                                    bool with_ledger);

}  // namespace projsplit
