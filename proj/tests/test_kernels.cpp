#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "projsplit/kernels.hpp"

namespace k = projsplit::kernels;

namespace {

std::vector<const k::Table*> wide_tables() {
  std::vector<const k::Table*> out;
  for (auto b : {k::Backend::kAvx2, k::Backend::kNeon})
    if (const k::Table* t = k::table_for(b)) out.push_back(t);
  return out;
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

// lengths that hit every tail path of 4- and 16-wide loops
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 31, 33, 64, 100, 1001};

}  // namespace

TEST(Kernels, ActiveBackendIsKnown) {
  const k::Table& t = k::active();
  EXPECT_FALSE(t.name.empty());
  EXPECT_EQ(t.name, k::backend_name(t.backend));
}

TEST(Kernels, ScalarReferenceValues) {
  const k::Table& s = k::scalar_table();
  const double x[] = {1, 2, 3};
  const double y[] = {4, -5, 6};
  EXPECT_EQ(s.dot(x, y, 3), 12.0);
  EXPECT_EQ(s.norm_sq(x, 3), 14.0);
  EXPECT_EQ(s.dist_sq(x, y, 3), 9.0 + 49.0 + 9.0);
  double out[3];
  s.axpby(2.0, x, -1.0, y, out, 3);
  EXPECT_EQ(out[0], -2.0);
  EXPECT_EQ(out[1], 9.0);
  EXPECT_EQ(out[2], 0.0);
}

TEST(Kernels, ReductionsMatchScalar) {
  const auto wide = wide_tables();
  if (wide.empty()) GTEST_SKIP() << "no vector backend on this machine";
  std::mt19937_64 rng(11);
  const k::Table& s = k::scalar_table();
  for (const k::Table* t : wide) {
    for (std::size_t n : kLengths) {
      const auto x = random_values(rng, n);
      const auto y = random_values(rng, n);
      const double scale = s.norm_sq(x.data(), n) + s.norm_sq(y.data(), n) + 1.0;
      const double tol = 1e-14 * scale;
      EXPECT_NEAR(t->dot(x.data(), y.data(), n), s.dot(x.data(), y.data(), n), tol) << n;
      EXPECT_NEAR(t->norm_sq(x.data(), n), s.norm_sq(x.data(), n), tol) << n;
      EXPECT_NEAR(t->dist_sq(x.data(), y.data(), n), s.dist_sq(x.data(), y.data(), n), tol) << n;
    }
  }
}

TEST(Kernels, ElementwiseBitwiseEqualToScalar) {
  const auto wide = wide_tables();
  if (wide.empty()) GTEST_SKIP() << "no vector backend on this machine";
  std::mt19937_64 rng(12);
  const k::Table& s = k::scalar_table();
  for (const k::Table* t : wide) {
    for (std::size_t n : kLengths) {
      const auto x = random_values(rng, n);
      const auto y = random_values(rng, n);
      auto y1 = y;
      auto y2 = y;
      s.axpy(0.37, x.data(), y1.data(), n);
      t->axpy(0.37, x.data(), y2.data(), n);
      EXPECT_EQ(y1, y2) << t->name << " axpy n=" << n;

      std::vector<double> o1(n), o2(n);
      s.axpby(-1.3, x.data(), 2.1, y.data(), o1.data(), n);
      t->axpby(-1.3, x.data(), 2.1, y.data(), o2.data(), n);
      EXPECT_EQ(o1, o2) << t->name << " axpby n=" << n;

      // aliasing out == x
      auto a1 = x;
      auto a2 = x;
      s.axpby(0.5, a1.data(), 0.25, y.data(), a1.data(), n);
      t->axpby(0.5, a2.data(), 0.25, y.data(), a2.data(), n);
      EXPECT_EQ(a1, a2) << t->name << " aliased axpby n=" << n;
    }
  }
}

TEST(Kernels, FiniteScanAgrees) {
  std::mt19937_64 rng(13);
  std::vector<const k::Table*> all = wide_tables();
  all.push_back(&k::scalar_table());
  for (const k::Table* t : all) {
    for (std::size_t n : kLengths) {
      if (n == 0) {
        EXPECT_TRUE(t->all_finite(nullptr, 0));
        continue;
      }
      auto x = random_values(rng, n);
      EXPECT_TRUE(t->all_finite(x.data(), n));
      for (double bad : {std::numeric_limits<double>::quiet_NaN(),
                         std::numeric_limits<double>::infinity()}) {
        auto z = x;
        z[n - 1] = bad;
        EXPECT_FALSE(t->all_finite(z.data(), n)) << t->name << " n=" << n;
        z = x;
        z[0] = -bad;
        EXPECT_FALSE(t->all_finite(z.data(), n)) << t->name << " n=" << n;
      }
    }
  }
}
