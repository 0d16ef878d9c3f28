#include "projsplit/problems.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "projsplit/errors.hpp"

namespace projsplit {

namespace {

using Rng = std::mt19937_64;

Vector gaussian_vector(std::size_t d, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(d);
  for (double& x : v) x = g(rng);
  return v;
}

DenseMatrix diag_conjugate(const DenseMatrix& q, const std::vector<double>& spectrum) {
  // Q diag(s) Q^T, symmetrized so it is exactly symmetric.
  const std::size_t d = q.rows();
  DenseMatrix m(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < spectrum.size(); ++k) s += q(r, k) * spectrum[k] * q(c, k);
      m(r, c) = s;
    }
  return m.symmetric_part();
}

DenseMatrix random_skew(std::size_t d, double scale, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  DenseMatrix k(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = r + 1; c < d; ++c) {
      const double v = scale * g(rng) / std::sqrt(static_cast<double>(d));
      k(r, c) = v;
      k(c, r) = -v;
    }
  return k;
}

// Random PSD spectrum in [lo, hi]; `with_zero` pins the smallest eigenvalue at 0.
std::vector<double> random_spectrum(std::size_t d, double lo, double hi, bool with_zero,
                                    Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> s(d);
  for (double& v : s) v = u(rng);
  if (with_zero) s[0] = 0.0;
  return s;
}

ProductPoint oracle_point(const Vector& z, std::vector<Vector> w) {
  return ProductPoint(z, std::move(w), 1.0);
}

}  // namespace

void ProblemInstance::set_gamma(double gamma) {
  if (meta.oracle) meta.oracle = ProductPoint(meta.oracle->z(), meta.oracle->w(), gamma);
}

DenseMatrix random_orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  if (cols > rows) throw DimensionError("random_orthonormal: need rows >= cols");
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  DenseMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = q(r, c);
  return out;
}

// ---- lasso -------------------------------------------------------------------------

ProblemInstance make_lasso_from_data(const DenseMatrix& a, const Vector& b, double lambda) {
  if (a.rows() != b.dim()) throw DimensionError("lasso: A and b disagree on the row count");
  const std::size_t d = a.cols();
  const DenseMatrix q = a.gram().symmetric_part();
  const Vector atb = a.apply_transpose(b);

  ProblemInstance inst;
  inst.generator = "lasso";
  inst.description = fmt::format("lasso d={} m={} lambda={}", d, a.rows(), lambda);
  inst.slots.push_back(OperatorSlot::backward(make_soft_threshold(d, lambda)));
  inst.slots.push_back(
      OperatorSlot::forward(make_quadratic_gradient(q, -atb, 0.5 * norm_sq(b))));
  inst.meta = meta_from_slots(inst.slots);

  const LassoReference ref = solve_lasso_reference(a, b, lambda);
  const Vector residual = b - a.apply(ref.z);
  inst.meta.oracle = oracle_point(ref.z, {a.apply_transpose(residual)});
  inst.meta.f_star = ref.objective;
  return inst;
}

ProblemInstance make_lasso(std::size_t d, std::size_t m, double lambda, std::uint64_t seed) {
  if (d == 0 || m == 0) throw ConfigError("lasso: d and m must be positive");
  Rng rng(seed);
  const std::size_t r = std::min(d, m);
  const DenseMatrix u = random_orthonormal(m, r, rng());
  const DenseMatrix v = random_orthonormal(d, r, rng());
  std::uniform_real_distribution<double> sing(1.0, 3.0);
  std::vector<double> s(r);
  for (double& x : s) x = sing(rng);

  DenseMatrix a(m, d);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < r; ++k) acc += u(i, k) * s[k] * v(j, k);
      a(i, j) = acc;
    }

  std::bernoulli_distribution active(0.2);
  std::normal_distribution<double> g(0.0, 1.0);
  Vector z_true(d);
  for (double& x : z_true) x = active(rng) ? g(rng) : 0.0;
  if (norm_sq(z_true) == 0.0) z_true[0] = 1.0;
  Vector b = a.apply(z_true);
  for (double& x : b) x += 0.1 * g(rng);

  ProblemInstance inst = make_lasso_from_data(a, b, lambda);
  inst.seed = seed;
  return inst;
}

// ---- affine ---------------------------------------------------------------------------

ProblemInstance make_affine_instance(std::vector<DenseMatrix> a, std::vector<Vector> b,
                                     std::vector<SlotKind> kinds,
                                     std::optional<std::size_t> strong_index,
                                     std::string generator) {
  const std::size_t n = a.size();
  if (n == 0 || b.size() != n || kinds.size() != n)
    throw DimensionError("affine instance: A, b and kinds must have one entry per operator");
  const std::size_t d = b[0].dim();
  DenseMatrix total(d, d);
  Vector rhs(d);
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].rows() != d || b[i].dim() != d)
      throw DimensionError("affine instance: inconsistent dimensions");
    total = total + a[i];
    rhs -= b[i];
  }
  const Vector z = solve_linear(total, rhs);

  ProblemInstance inst;
  inst.generator = std::move(generator);
  std::vector<Vector> w;
  for (std::size_t i = 0; i < n; ++i) {
    OperatorPtr op = a[i].is_symmetric() ? make_quadratic_gradient(a[i], b[i])
                                         : make_affine(a[i], b[i]);
    if (i + 1 < n) w.push_back(op->apply(z));
    inst.slots.push_back(kinds[i] == SlotKind::kForward ? OperatorSlot::forward(op)
                                                        : OperatorSlot::backward(op));
  }
  inst.meta = meta_from_slots(inst.slots);
  if (strong_index) {
    if (*strong_index >= n) throw ConfigError("affine instance: strong index out of range");
    const auto mu = inst.slots[*strong_index].op->meta().strong_monotonicity;
    if (!mu || !(*mu > 0.0))
      throw ConfigError(
          fmt::format("affine instance: operator {} is not strongly monotone", *strong_index + 1));
    inst.meta.mu = mu;
    inst.meta.strong_index = strong_index;
  }
  inst.meta.oracle = oracle_point(z, std::move(w));
  inst.description = fmt::format("{} d={} n={}", inst.generator, d, n);
  return inst;
}

namespace {

std::vector<SlotKind> default_alternating(std::size_t n) {
  std::vector<SlotKind> k(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = i % 2 == 0 ? SlotKind::kBackward : SlotKind::kForward;
  return k;
}

// Scales every b_i so the oracle has unit norm (z* is linear in b).
void normalize_offsets(const std::vector<DenseMatrix>& a, std::vector<Vector>& b) {
  const std::size_t d = b[0].dim();
  DenseMatrix total(d, d);
  Vector rhs(d);
  for (std::size_t i = 0; i < a.size(); ++i) {
    total = total + a[i];
    rhs -= b[i];
  }
  const double nz = norm(solve_linear(total, rhs));
  if (nz > 0.0)
    for (auto& v : b) v *= 1.0 / nz;
}

}  // namespace

ProblemInstance make_strongly_monotone_affine(std::size_t d, std::size_t n, double mu,
                                              std::uint64_t seed, std::vector<SlotKind> kinds) {
  if (d == 0 || n == 0) throw ConfigError("strongly monotone affine: d and n must be positive");
  if (!(mu > 0.0)) throw ConfigError("strongly monotone affine: mu must be positive");
  if (kinds.empty()) kinds = default_alternating(n);
  Rng rng(seed);
  const std::size_t l = n - 1;
  std::vector<DenseMatrix> a;
  std::vector<Vector> b;
  for (std::size_t i = 0; i < n; ++i) {
    const DenseMatrix q = random_orthonormal(d, d, rng());
    DenseMatrix ai = diag_conjugate(q, random_spectrum(d, 0.1, 2.0, i == l, rng));
    if (i == l) ai = ai + DenseMatrix::identity(d, mu);
    if (d > 1) ai = ai + random_skew(d, 0.5, rng);
    a.push_back(std::move(ai));
    b.push_back(gaussian_vector(d, rng));
  }
  normalize_offsets(a, b);
  ProblemInstance inst = make_affine_instance(std::move(a), std::move(b), std::move(kinds), l,
                                              "strongly_monotone_affine");
  inst.seed = seed;
  return inst;
}

ProblemInstance make_cocoercive_strong(std::size_t d, std::size_t n, double mu,
                                       std::uint64_t seed, std::vector<SlotKind> kinds) {
  if (d == 0 || n == 0) throw ConfigError("cocoercive instance: d and n must be positive");
  if (!(mu > 0.0)) throw ConfigError("cocoercive instance: mu must be positive");
  if (kinds.empty()) kinds.assign(n, SlotKind::kForward);
  Rng rng(seed);
  std::vector<DenseMatrix> a;
  std::vector<Vector> b;
  for (std::size_t i = 0; i < n; ++i) {
    const DenseMatrix q = random_orthonormal(d, d, rng());
    const bool last = i + 1 == n;
    DenseMatrix ai = diag_conjugate(q, random_spectrum(d, 0.5, 2.0, last, rng));
    if (last) {
      ai = ai + DenseMatrix::identity(d, mu);
      if (d > 1) ai = ai + random_skew(d, 0.5, rng);
    }
    a.push_back(std::move(ai));
    b.push_back(gaussian_vector(d, rng));
  }
  normalize_offsets(a, b);
  ProblemInstance inst = make_affine_instance(std::move(a), std::move(b), std::move(kinds), n - 1,
                                              "cocoercive_strong");
  inst.seed = seed;
  return inst;
}

// ---- feasibility ---------------------------------------------------------------------

ProblemInstance make_two_box_feasibility(const Vector& lo1, const Vector& hi1, const Vector& lo2,
                                         const Vector& hi2) {
  const std::size_t d = lo1.dim();
  if (hi1.dim() != d || lo2.dim() != d || hi2.dim() != d)
    throw DimensionError("two-set feasibility: box bounds disagree on dimension");
  Vector mid(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double lo = std::max(lo1[j], lo2[j]);
    const double hi = std::min(hi1[j], hi2[j]);
    if (!(lo <= hi))
      throw ConfigError(
          fmt::format("two-set feasibility: the boxes do not intersect in coordinate {}", j));
    mid[j] = 0.5 * (lo + hi);
  }
  ProblemInstance inst;
  inst.generator = "two_set_feasibility";
  inst.description = fmt::format("two-box feasibility d={}", d);
  inst.slots.push_back(OperatorSlot::backward(make_box_indicator(lo1, hi1)));
  inst.slots.push_back(OperatorSlot::backward(make_box_indicator(lo2, hi2)));
  inst.meta = meta_from_slots(inst.slots);
  inst.meta.oracle = oracle_point(mid, {Vector(d)});
  inst.meta.f_star = 0.0;
  inst.meta.single_point_rate_applicable = false;
  return inst;
}

ProblemInstance make_two_set_feasibility(std::size_t d, std::uint64_t seed) {
  if (d == 0) throw ConfigError("two-set feasibility: d must be positive");
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> half(0.2, 1.0);
  Vector lo1(d), hi1(d), lo2(d), hi2(d);
  for (std::size_t j = 0; j < d; ++j) {
    // Both boxes contain c; they overlap on a strict subinterval around it.
    const double c = 2.0 + g(rng);
    lo1[j] = c - half(rng);
    hi1[j] = c + half(rng);
    lo2[j] = c - half(rng);
    hi2[j] = c + half(rng);
  }
  ProblemInstance inst = make_two_box_feasibility(lo1, hi1, lo2, hi2);
  inst.seed = seed;
  return inst;
}

double solution_set_residual(const std::vector<OperatorSlot>& slots, const ProductPoint& p) {
  if (p.n() != slots.size()) throw DimensionError("point and operator count disagree");
  const Vector wn = wn_of(p);
  double worst = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Vector& w = i + 1 < slots.size() ? p.w(i) : wn;
    const auto dist = slots[i].op->graph_distance(p.z(), w);
    if (!dist)
      throw MetadataError(
          fmt::format("operator {} ({}) has no decidable graph", i + 1, slots[i].op->name()));
    worst = std::max(worst, *dist);
  }
  return worst;
}

}  // namespace projsplit
