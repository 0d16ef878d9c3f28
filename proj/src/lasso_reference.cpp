#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "projsplit/errors.hpp"
#include "projsplit/problems.hpp"

namespace projsplit {

namespace {

double l1(const Vector& z) {
  double s = 0.0;
  for (double v : z) s += std::abs(v);
  return s;
}

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Solve on the support of z with fixed signs:
//   (A_S^T A_S) z_S = A_S^T b - lambda sign(z_S).
// Returns nullopt when the polished point changes a sign.
std::optional<Vector> polish_on_support(const DenseMatrix& a, const Vector& b, double lambda,
                                        const Vector& z) {
  std::vector<std::size_t> support;
  for (std::size_t j = 0; j < z.dim(); ++j)
    if (z[j] != 0.0) support.push_back(j);
  if (support.empty()) return z;
  const std::size_t s = support.size();
  DenseMatrix as(a.rows(), s);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < s; ++c) as(r, c) = a(r, support[c]);
  Vector rhs = as.apply_transpose(b);
  for (std::size_t c = 0; c < s; ++c) rhs[c] -= lambda * (z[support[c]] > 0.0 ? 1.0 : -1.0);
  Vector zs;
  try {
    zs = solve_linear(as.gram(), rhs);
  } catch (const ActivationError&) {
    return std::nullopt;
  }
  Vector out(z.dim());
  for (std::size_t c = 0; c < s; ++c) {
    if ((zs[c] > 0.0) != (z[support[c]] > 0.0)) return std::nullopt;
    out[support[c]] = zs[c];
  }
  return out;
}

}  // namespace

double lasso_objective(const DenseMatrix& a, const Vector& b, double lambda, const Vector& z) {
  return 0.5 * norm_sq(a.apply(z) - b) + lambda * l1(z);
}

double lasso_duality_gap(const DenseMatrix& a, const Vector& b, double lambda, const Vector& z) {
  // Dual: max <b, theta> - |theta|^2/2 subject to |A^T theta|_inf <= lambda, with theta a
  // scaled residual.
  Vector theta = b - a.apply(z);
  const Vector g = a.apply_transpose(theta);
  double gmax = 0.0;
  for (double v : g) gmax = std::max(gmax, std::abs(v));
  if (gmax > lambda) theta *= lambda / gmax;
  const double dual = dot(b, theta) - 0.5 * norm_sq(theta);
  return lasso_objective(a, b, lambda, z) - dual;
}

LassoReference solve_lasso_reference(const DenseMatrix& a, const Vector& b, double lambda,
                                     std::size_t max_iters, double gap_tol) {
  if (!(lambda > 0.0)) throw ConfigError("lasso: lambda must be positive");
  const std::size_t d = a.cols();
  const DenseMatrix q = a.gram();
  const Vector atb = a.apply_transpose(b);
  const double lip = spectral_norm(a) * spectral_norm(a);
  const double step = lip > 0.0 ? 1.0 / lip : 1.0;

  LassoReference out;
  Vector z(d);
  std::size_t it = 0;
  double gap = lasso_duality_gap(a, b, lambda, z);
  while (it < max_iters && gap > gap_tol) {
    // z <- soft(z - step (Q z - A^T b), step lambda)
    Vector grad = q.apply(z);
    grad -= atb;
    for (std::size_t j = 0; j < d; ++j) z[j] = soft(z[j] - step * grad[j], step * lambda);
    ++it;
    if (it % 50 == 0) gap = lasso_duality_gap(a, b, lambda, z);
  }
  gap = lasso_duality_gap(a, b, lambda, z);

  if (const auto polished = polish_on_support(a, b, lambda, z)) {
    const double polished_gap = lasso_duality_gap(a, b, lambda, *polished);
    if (polished_gap <= gap) {
      z = *polished;
      gap = polished_gap;
    }
  }
  out.z = z;
  out.objective = lasso_objective(a, b, lambda, z);
  out.duality_gap = gap;
  out.iterations = it;
  return out;
}

}  // namespace projsplit
