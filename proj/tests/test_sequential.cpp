#include <gtest/gtest.h>

#include <Eigen/LU>
#include <cmath>
#include <numbers>
#include <random>

#include "itemcal/error.hpp"
#include "itemcal/sequential.hpp"

using namespace itemcal;

namespace {

// P(chi2(3) <= x) by composite Simpson after substituting x = t^2, which
// removes the square-root kink of the density at zero.
double chi2_3_cdf(double x) {
  const double top = std::sqrt(x);
  const int n = 20000;
  const double h = top / n;
  auto f = [](double t) { return 2.0 * t * t * std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  double s = f(0.0) + f(top);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

double chi2_3_quantile_oracle(double alpha) {
  double lo = 0.0, hi = 100.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (1.0 - chi2_3_cdf(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Mat3 random_spd(std::mt19937_64& gen, double scale) {
  std::normal_distribution<double> z(0.0, 1.0);
  Mat3 a;
  for (int i = 0; i < 9; ++i) a.data()[i] = z(gen);
  return scale * (a * a.transpose() + 0.1 * Mat3::Identity());
}

}  // namespace

TEST(ChiSquare, AgainstIntegrationOracle) {
  EXPECT_NEAR(chi_square_critical(0.05, 3), 7.81473, 1e-4);
  EXPECT_NEAR(chi_square_critical(0.05, 3), chi2_3_quantile_oracle(0.05), 1e-7);
  for (double a : {0.01, 0.1, 0.3, 0.7})
    EXPECT_NEAR(chi_square_critical(a, 3), chi2_3_quantile_oracle(a), 1e-7) << a;
}

TEST(ChiSquare, ClosedFormTwoDegrees) {
  EXPECT_NEAR(chi_square_critical(0.5, 2), 2.0 * std::log(2.0), 1e-8);
  for (double a : {0.01, 0.05, 0.2, 0.9}) EXPECT_NEAR(chi_square_critical(a, 2), -2.0 * std::log(a), 1e-8);
}

TEST(ChiSquare, MonotoneInAlpha) {
  EXPECT_LT(chi_square_critical(0.999, 3), chi_square_critical(0.9, 3));
  double prev = chi_square_critical(0.001, 3);
  for (double a = 0.01; a < 1.0; a += 0.01) {
    const double v = chi_square_critical(a, 3);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(chi_square_critical(0.999999, 3), 1e-2);
}

TEST(ChiSquare, RejectsBadArguments) {
  EXPECT_THROW(chi_square_critical(0.0, 3), Error);
  EXPECT_THROW(chi_square_critical(1.0, 3), Error);
  EXPECT_THROW(chi_square_critical(0.05, 0), Error);
}

TEST(StoppingCheck, Examples) {
  const StoppingConfig cfg{0.5, 0.05, 1};
  const StoppingDecision yes = stopping_check(32.0 * Mat3::Identity(), 200, cfg);
  EXPECT_TRUE(yes.stop);
  EXPECT_NEAR(yes.threshold, 31.259, 1e-3);
  EXPECT_NEAR(yes.lambda_min, 32.0, 1e-10);
  EXPECT_FALSE(stopping_check(31.0 * Mat3::Identity(), 200, cfg).stop);
  const Mat3 diag = Vec3(1000.0, 1000.0, 5.0).asDiagonal();
  const StoppingDecision d = stopping_check(diag, 200, cfg);
  EXPECT_FALSE(d.stop);
  EXPECT_NEAR(d.lambda_min, 5.0, 1e-10);
}

TEST(StoppingCheck, RespectsN0AndIndefiniteMatrices) {
  const StoppingConfig cfg{0.5, 0.05, 110};
  EXPECT_FALSE(stopping_check(100.0 * Mat3::Identity(), 109, cfg).stop);
  EXPECT_TRUE(stopping_check(100.0 * Mat3::Identity(), 110, cfg).stop);
  const Mat3 indefinite = Vec3(100.0, 100.0, -1.0).asDiagonal();
  EXPECT_FALSE(stopping_check(indefinite, 500, cfg).stop);
}

TEST(StoppingCheck, DecisionInvariant) {
  std::mt19937_64 gen(1);
  const StoppingConfig cfg{0.5, 0.05, 50};
  for (int i = 0; i < 500; ++i) {
    const Mat3 j = random_spd(gen, 10.0);
    const long n = 20 + i % 60;
    const StoppingDecision s = stopping_check(j, n, cfg);
    EXPECT_EQ(s.stop, s.lambda_min >= s.threshold && n >= cfg.n0);
  }
}

TEST(MinEigenvalue, MatchesCharacteristicPolynomial) {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 200; ++i) {
    const Mat3 j = random_spd(gen, 5.0);
    const double l = min_eigenvalue(j);
    EXPECT_NEAR((j - l * Mat3::Identity()).determinant(), 0.0, 1e-8 * std::pow(j.norm(), 3));
    // Every Rayleigh quotient is at least lambda_min.
    std::normal_distribution<double> z(0.0, 1.0);
    const Vec3 v(z(gen), z(gen), z(gen));
    EXPECT_GE(v.dot(j * v) / v.squaredNorm(), l - 1e-10 * j.norm());
  }
}

TEST(StoppingConfig, Validation) {
  EXPECT_THROW((StoppingConfig{0.0, 0.05, 1}.validate()), Error);
  EXPECT_THROW((StoppingConfig{0.5, 1.0, 1}.validate()), Error);
  EXPECT_THROW((StoppingConfig{0.5, 0.05, 0}.validate()), Error);
  EXPECT_NO_THROW((StoppingConfig{0.5, 0.05, 1}.validate()));
}

TEST(Ellipsoid, Examples) {
  const Gamma g0{0.0, 1.0, 0.1};
  std::mt19937_64 gen(4);
  for (int i = 0; i < 20; ++i) EXPECT_TRUE(ellipsoid_contains(g0, random_spd(gen, 3.0), g0, 0.05));
  const double r8 = std::sqrt(8.0 / 3.0);
  const Gamma far{g0.beta1 + r8, g0.beta2 + r8, g0.c + r8};
  EXPECT_FALSE(ellipsoid_contains(far, Mat3::Identity(), g0, 0.05));
  const double r19 = std::sqrt(1.9);
  const Gamma near{g0.beta1 + r19, g0.beta2, g0.c};
  EXPECT_TRUE(ellipsoid_contains(near, 4.0 * Mat3::Identity(), g0, 0.05));
}

TEST(MarginalCoverage, TruthIsCovered) {
  std::mt19937_64 gen(8);
  const ItemParams truth{1.3, -0.5, 0.2};
  const MarginalCoverage m = marginal_coverage(to_gamma(truth), random_spd(gen, 50.0), truth, 0.05);
  EXPECT_TRUE(m.a);
  EXPECT_TRUE(m.b);
  EXPECT_TRUE(m.c);
}

TEST(MarginalCoverage, DeltaMethodAtZeroDifficulty) {
  std::mt19937_64 gen(9);
  const Mat3 j = random_spd(gen, 40.0);
  const Mat3 inv = j.inverse();
  const Mat3 cov = natural_covariance({0.0, 1.0, 0.1}, j);
  EXPECT_NEAR(cov(1, 1), inv(0, 0), 1e-12);
  EXPECT_NEAR(cov(0, 0), inv(1, 1), 1e-12);
  EXPECT_NEAR(cov(2, 2), inv(2, 2), 1e-12);
}

TEST(MarginalCoverage, SingularInformation) {
  Mat3 j = Mat3::Zero();
  j(0, 0) = 1.0;
  try {
    marginal_coverage({0.0, 1.0, 0.1}, j, {1.0, 0.0, 0.1}, 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularInformation);
  }
}

TEST(MarginalCoverage, EllipsoidImpliesCInterval) {
  // c enters gamma linearly, so ellipsoid membership forces the c interval.
  std::mt19937_64 gen(10);
  std::normal_distribution<double> z(0.0, 0.3);
  int inside = 0;
  for (int i = 0; i < 2000; ++i) {
    const Mat3 j = random_spd(gen, 20.0);
    const ItemParams truth{1.0, 0.0, 0.2};
    const Gamma t = to_gamma(truth);
    const Gamma est{t.beta1 + z(gen), t.beta2 + 0.3 * std::abs(z(gen)), t.c + 0.2 * z(gen)};
    if (!ellipsoid_contains(est, j, t, 0.05)) continue;
    ++inside;
    EXPECT_TRUE(marginal_coverage(est, j, truth, 0.05).c);
  }
  EXPECT_GT(inside, 50);
}
