#pragma once

// Seeded problem generators with independent oracles.

#include <cstdint>
#include <string>
#include <vector>

#include "projsplit/dense_matrix.hpp"
#include "projsplit/operators.hpp"
#include "projsplit/rates.hpp"

namespace projsplit {

struct ProblemInstance {
  std::string generator;
  std::string description;
  std::uint64_t seed = 0;
  std::vector<OperatorSlot> slots;
  ProblemMeta meta;  // oracle stored with gamma = 1 until set_gamma is called

  std::size_t n() const noexcept { return slots.size(); }
  std::size_t dim() const { return slots.at(0).op->dim(); }
  // Re-expresses the oracle point in the gamma-metric.
  void set_gamma(double gamma);
  ProductPoint zero_start(double gamma) const { return ProductPoint::zeros(dim(), n(), gamma); }
};

// min_z lambda |z|_1 + |A z - b|^2 / 2 with A = U diag(s) V^T, s uniform in [1, 3].
// Operator 1 is lambda|.|_1 (backward), operator 2 the least-squares gradient (forward).
ProblemInstance make_lasso(std::size_t d, std::size_t m, double lambda, std::uint64_t seed);
ProblemInstance make_lasso_from_data(const DenseMatrix& a, const Vector& b, double lambda);

// T_i z = A_i z + b_i with monotone A_i; operator `strong_index` carries mu * I on top
// of a singular PSD part so its modulus is exactly mu. Empty `kinds` alternates
// backward / forward starting with backward.
ProblemInstance make_strongly_monotone_affine(std::size_t d, std::size_t n, double mu,
                                              std::uint64_t seed,
                                              std::vector<SlotKind> kinds = {});

// T_1..T_{n-1} symmetric PSD affine (cocoercive), T_n strongly monotone affine with
// modulus mu. Empty `kinds` makes every slot forward.
ProblemInstance make_cocoercive_strong(std::size_t d, std::size_t n, double mu,
                                       std::uint64_t seed, std::vector<SlotKind> kinds = {});

// Affine instance from explicit data; the oracle comes from a direct solve of
// (sum A_i) z = -sum b_i.
ProblemInstance make_affine_instance(std::vector<DenseMatrix> a, std::vector<Vector> b,
                                     std::vector<SlotKind> kinds,
                                     std::optional<std::size_t> strong_index = std::nullopt,
                                     std::string generator = "affine");

// Two box indicators with a common point; the oracle is the midpoint of the
// intersection with zero duals.
ProblemInstance make_two_set_feasibility(std::size_t d, std::uint64_t seed);
ProblemInstance make_two_box_feasibility(const Vector& lo1, const Vector& hi1, const Vector& lo2,
                                         const Vector& hi2);

// Largest distance max_i dist(w_i, T_i z) with w_n = -sum w_i; zero iff p lies in the
// extended solution set.
double solution_set_residual(const std::vector<OperatorSlot>& slots, const ProductPoint& p);

// ---- lasso reference solver ------------------------------------------------------------

struct LassoReference {
  Vector z;
  double objective = 0.0;
  double duality_gap = 0.0;
  std::size_t iterations = 0;
};

// Proximal gradient at stepsize 1/L until the duality gap falls below `gap_tol`, then a
// support-restricted Newton polish when it lowers the gap.
LassoReference solve_lasso_reference(const DenseMatrix& a, const Vector& b, double lambda,
                                     std::size_t max_iters = 1000000, double gap_tol = 1e-12);

double lasso_objective(const DenseMatrix& a, const Vector& b, double lambda, const Vector& z);
double lasso_duality_gap(const DenseMatrix& a, const Vector& b, double lambda, const Vector& z);

// ---- seeded matrix helpers ---------------------------------------------------------------

// Rows x cols matrix with orthonormal columns (rows >= cols).
DenseMatrix random_orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace projsplit
