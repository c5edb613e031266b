#include "itemcal/irt_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "itemcal/error.hpp"

namespace itemcal {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Domain: return "domain error";
    case ErrorCode::Config: return "config error";
    case ErrorCode::Io: return "I/O error";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::DegenerateData: return "degenerate data";
    case ErrorCode::SingularInformation: return "singular information";
  }
  return "unknown error";
}

std::string_view to_string(BatchTag tag) noexcept {
  switch (tag) {
    case BatchTag::CBatch: return "C_BATCH";
    case BatchTag::AbBatch: return "AB_BATCH";
    case BatchTag::InitialC: return "INITIAL_C";
    case BatchTag::InitialAb: return "INITIAL_AB";
    case BatchTag::Random: return "RANDOM";
    case BatchTag::DOpt: return "DOPT";
  }
  return "?";
}

void validate(const ItemParams& item) {
  if (!(item.a > 0.0) || !std::isfinite(item.a) || !std::isfinite(item.b) || !(item.c >= 0.0) ||
      !(item.c < 1.0)) {
    std::ostringstream os;
    os << "invalid item parameters (a=" << item.a << ", b=" << item.b << ", c=" << item.c << ")";
    throw Error(ErrorCode::Domain, os.str());
  }
}

void validate(const ItemParams& item, const ParamBounds& bounds) {
  validate(item);
  if (item.a < bounds.a_min || item.a > bounds.a_max || item.b < bounds.b_min ||
      item.b > bounds.b_max || item.c < bounds.c_min || item.c > bounds.c_max) {
    std::ostringstream os;
    os << "item (a=" << item.a << ", b=" << item.b << ", c=" << item.c
       << ") outside parameter bounds";
    throw Error(ErrorCode::Domain, os.str());
  }
}

namespace {

// Logistic factor and its complement, each computed without cancellation.
struct Logistic {
  double g;
  double gc;  // 1 - g
};

Logistic logistic(double eta) {
  if (eta >= 0.0) {
    const double e = std::exp(-eta);
    return {1.0 / (1.0 + e), e / (1.0 + e)};
  }
  const double e = std::exp(eta);
  return {e / (1.0 + e), 1.0 / (1.0 + e)};
}

// Per-response quantities shared by every likelihood routine.
struct PointEval {
  Logistic l;
  double p;  // P(Y = 1)
  double q;  // 1 - P, formed as (1 - c)(1 - G)
  Vec3 grad;
};

PointEval evaluate(const Gamma& g, double theta) {
  PointEval e;
  e.l = logistic(g.beta1 + g.beta2 * theta);
  e.p = g.c + (1.0 - g.c) * e.l.g;
  e.q = (1.0 - g.c) * e.l.gc;
  const double slope = (1.0 - g.c) * e.l.g * e.l.gc;
  e.grad = Vec3(slope, slope * theta, e.l.gc);
  return e;
}

}  // namespace

double icc(double theta, const ItemParams& item) {
  validate(item);
  if (!std::isfinite(theta)) throw Error(ErrorCode::Domain, "icc: theta must be finite");
  const Logistic l = logistic(item.a * (theta - item.b));
  return item.c + (1.0 - item.c) * l.g;
}

Gamma to_gamma(const ItemParams& item) {
  validate(item);
  return {-item.a * item.b, item.a, item.c};
}

ItemParams from_gamma(const Gamma& g) {
  if (!(g.beta2 > 0.0)) throw Error(ErrorCode::Domain, "from_gamma: beta2 must be positive");
  ItemParams item{g.beta2, -g.beta1 / g.beta2, g.c};
  validate(item);
  return item;
}

LikelihoodTerms likelihood_terms(const Gamma& g, std::span<const Observation> data) {
  double ll = 0.0, u1 = 0.0, u2 = 0.0, u3 = 0.0;
  double i11 = 0.0, i12 = 0.0, i22 = 0.0, i13 = 0.0, i23 = 0.0, i33 = 0.0;
  for (const Observation& o : data) {
    const Logistic l = logistic(g.beta1 + g.beta2 * o.theta);
    const double p = std::max(g.c + (1.0 - g.c) * l.g, kProbFloor);
    const double q = std::max((1.0 - g.c) * l.gc, kProbFloor);
    // d(log-lik)/dP and its derivative for a binary response.
    double w, dw;
    if (o.y == 1) {
      ll += std::log(p);
      w = 1.0 / p;
      dw = -w * w;
    } else {
      ll += std::log(q);
      w = -1.0 / q;
      dw = -w * w;
    }
    // grad P = (s, s theta, 1 - G); Hessian of P has beta block
    // (1-c) G (1-G) (1-2G) x x', beta/c block -G (1-G) x, c/c entry 0.
    const double gg = l.g * l.gc;
    const double s = (1.0 - g.c) * gg;
    const double th = o.theta;
    u1 += w * s;
    u2 += w * s * th;
    u3 += w * l.gc;
    const double k = w * s * (l.gc - l.g) + dw * s * s;
    const double m = -w * gg + dw * s * l.gc;
    i11 -= k;
    i12 -= k * th;
    i22 -= k * th * th;
    i13 -= m;
    i23 -= m * th;
    i33 -= dw * l.gc * l.gc;
  }
  LikelihoodTerms t;
  t.log_likelihood = ll;
  t.score = Vec3(u1, u2, u3);
  t.information << i11, i12, i13,
                   i12, i22, i23,
                   i13, i23, i33;
  return t;
}

double log_likelihood(const Gamma& g, std::span<const Observation> data) {
  double ll = 0.0;
  for (const Observation& o : data) {
    const PointEval e = evaluate(g, o.theta);
    ll += o.y == 1 ? std::log(std::max(e.p, kProbFloor)) : std::log(std::max(e.q, kProbFloor));
  }
  return ll;
}

Vec3 score(const Gamma& g, std::span<const Observation> data) {
  Vec3 u = Vec3::Zero();
  for (const Observation& o : data) {
    const PointEval e = evaluate(g, o.theta);
    const double var = std::max(e.p * e.q, kVarianceFloor);
    u += ((o.y - e.p) / var) * e.grad;
  }
  return u;
}

Mat3 observed_information(const Gamma& g, std::span<const Observation> data) {
  return likelihood_terms(g, data).information;
}

Vec3 probability_gradient(const Gamma& g, double theta) { return evaluate(g, theta).grad; }

Mat3 fisher_information_point(const Gamma& g, double theta) {
  const PointEval e = evaluate(g, theta);
  const double var = std::max(e.p * e.q, kVarianceFloor);
  return (e.grad * e.grad.transpose()) / var;
}

}  // namespace itemcal
