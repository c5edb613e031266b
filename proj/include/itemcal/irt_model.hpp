#pragma once

// Three-parameter logistic item response model.
//
//   P(Y = 1 | theta) = c + (1 - c) * G,   G = 1 / (1 + exp(-a (theta - b)))
//
// Estimation works in the reparameterized vector gamma = (beta1, beta2, c)
// with beta = (-a b, a), so the linear predictor is x' beta with x = (1, theta)
// and P = c + (1 - c) G(x' beta). Every vector and matrix in this library is
// ordered (beta1, beta2, c).

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string_view>

namespace itemcal {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Natural item parameters: discrimination a, difficulty b, guessing c.
struct ItemParams {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
};

/// Reparameterized estimation target (beta1, beta2, c) = (-a b, a, c).
struct Gamma {
  double beta1 = 0.0;
  double beta2 = 1.0;
  double c = 0.0;

  Vec3 vec() const { return {beta1, beta2, c}; }
  static Gamma from_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

/// Box constraints on the natural parameters.
struct ParamBounds {
  double a_min = 0.2;
  double a_max = 3.0;
  double b_min = -4.0;
  double b_max = 4.0;
  double c_min = 0.0;
  double c_max = 0.5;
};

/// What the estimators are allowed to see: the observed trait and the response.
struct Observation {
  double theta = 0.0;  // observed latent trait, true trait plus measurement error
  int y = 0;
};

enum class BatchTag : std::uint8_t { CBatch, AbBatch, InitialC, InitialAb, Random, DOpt };

std::string_view to_string(BatchTag tag) noexcept;

/// One recruited examinee's answer. `theta_true` exists for response
/// generation and post-hoc evaluation only; no estimator receives it.
struct ResponseRecord {
  Observation obs;
  double theta_true = 0.0;
  BatchTag tag = BatchTag::InitialAb;
};

// Floors used inside logs and variance denominators.
inline constexpr double kProbFloor = 1e-12;
inline constexpr double kVarianceFloor = 1e-12;

/// Throws Error(Domain) unless a > 0, b finite and 0 <= c < 1.
void validate(const ItemParams& item);
/// Throws Error(Domain) unless the item also lies inside `bounds`.
void validate(const ItemParams& item, const ParamBounds& bounds);

double icc(double theta, const ItemParams& item);

Gamma to_gamma(const ItemParams& item);
ItemParams from_gamma(const Gamma& g);

double log_likelihood(const Gamma& g, std::span<const Observation> data);
Vec3 score(const Gamma& g, std::span<const Observation> data);
Mat3 observed_information(const Gamma& g, std::span<const Observation> data);

/// Log-likelihood, score and observed information from a single pass.
struct LikelihoodTerms {
  double log_likelihood = 0.0;
  Vec3 score = Vec3::Zero();
  Mat3 information = Mat3::Zero();
};
LikelihoodTerms likelihood_terms(const Gamma& g, std::span<const Observation> data);

/// Expected information of one response at `theta`: grad P grad P' / (P (1 - P)).
/// Rank one, so its determinant is zero.
Mat3 fisher_information_point(const Gamma& g, double theta);

/// Gradient of P with respect to (beta1, beta2, c) at `theta`.
Vec3 probability_gradient(const Gamma& g, double theta);

}  // namespace itemcal
