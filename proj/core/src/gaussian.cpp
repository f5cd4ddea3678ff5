#include "swarmcvt/gaussian.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace swarmcvt {

namespace {

// Eigenvalues below this fraction of the trace are treated as singular to
// keep Sigma^{-1/2} bounded.
constexpr double kSingularFraction = 1e-12;

void require_symmetric(const Eigen::Matrix2d& m) {
  const double off = std::abs(m(0, 1) - m(1, 0));
  if (off > 1e-12 * std::max(1.0, std::abs(m(0, 1)))) {
    throw std::domain_error("matrix is not symmetric");
  }
}

}  // namespace

Eigen::Vector2d sym_eigenvalues(const Eigen::Matrix2d& m) {
  const double tr = m.trace();
  const double det = m.determinant();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  return {tr / 2.0 - disc, tr / 2.0 + disc};
}

Eigen::Matrix2d spd_sqrt(const Eigen::Matrix2d& m) {
  require_symmetric(m);
  const double tr = m.trace();
  const double det = m.determinant();
  if (!(tr > 0.0) || !(det > 0.0)) {
    const Eigen::Vector2d ev = sym_eigenvalues(m);
    std::ostringstream msg;
    msg << "matrix is not positive definite: eigenvalue " << ev(0)
        << " is not > 0";
    throw std::domain_error(msg.str());
  }
  // r = (m + sqrt(det) I) / sqrt(tr + 2 sqrt(det)), exact for 2x2 SPD.
  const double s = std::sqrt(det);
  const double t = std::sqrt(tr + 2.0 * s);
  Eigen::Matrix2d r = (m + s * Eigen::Matrix2d::Identity()) / t;
  return (r + r.transpose()) / 2.0;
}

Eigen::Matrix2d spd_inv_sqrt(const Eigen::Matrix2d& m) {
  const Eigen::Vector2d ev = sym_eigenvalues(m);
  if (ev(0) <= kSingularFraction * m.trace()) {
    std::ostringstream msg;
    msg << "covariance is numerically singular: eigenvalue " << ev(0);
    throw std::domain_error(msg.str());
  }
  const Eigen::Matrix2d r = spd_sqrt(m);
  const double det = r.determinant();
  Eigen::Matrix2d inv;
  inv << r(1, 1), -r(0, 1), -r(1, 0), r(0, 0);
  return inv / det;
}

void Gaussian2::validate() const {
  require_symmetric(cov);
  if (!(cov.trace() > 0.0) || !(cov.determinant() > 0.0)) {
    const Eigen::Vector2d ev = sym_eigenvalues(cov);
    std::ostringstream msg;
    msg << "covariance is not positive definite: eigenvalue " << ev(0)
        << " is not > 0";
    throw std::domain_error(msg.str());
  }
}

double Gaussian2::pdf(const Eigen::Vector2d& x) const {
  const double det = cov.determinant();
  const Eigen::Vector2d d = x - mean;
  Eigen::Matrix2d inv;
  inv << cov(1, 1), -cov(0, 1), -cov(1, 0), cov(0, 0);
  inv /= det;
  const double q = d.dot(inv * d);
  return std::exp(-0.5 * q) / (2.0 * M_PI * std::sqrt(det));
}

void Gmm::validate() const {
  if (components.empty() || components.size() != weights.size()) {
    throw std::invalid_argument("mixture components/weights length mismatch");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("negative mixture weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("mixture weights do not sum to 1");
  }
  for (const Gaussian2& g : components) g.validate();
}

double Gmm::pdf(const Eigen::Vector2d& x) const {
  double p = 0.0;
  for (std::size_t i = 0; i < components.size(); ++i) {
    p += weights[i] * components[i].pdf(x);
  }
  return p;
}

double w2(const Gaussian2& g1, const Gaussian2& g2) {
  const Eigen::Matrix2d s1_half = spd_sqrt(g1.cov);
  const Eigen::Matrix2d inner = s1_half * g2.cov * s1_half;
  const Eigen::Matrix2d inner_sqrt = spd_sqrt((inner + inner.transpose()) / 2.0);
  const double tr = g1.cov.trace() + g2.cov.trace() - 2.0 * inner_sqrt.trace();
  const double d2 = (g1.mean - g2.mean).squaredNorm() + tr;
  return std::sqrt(std::max(0.0, d2));
}

Gaussian2 interpolate(const Gaussian2& g1, const Gaussian2& g2, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("interpolation parameter must lie in [0, 1]");
  }
  const Eigen::Matrix2d s1_half = spd_sqrt(g1.cov);
  const Eigen::Matrix2d s1_inv_half = spd_inv_sqrt(g1.cov);
  const Eigen::Matrix2d inner = s1_half * g2.cov * s1_half;
  const Eigen::Matrix2d inner_sqrt = spd_sqrt((inner + inner.transpose()) / 2.0);
  const Eigen::Matrix2d mid = (1.0 - tau) * g1.cov + tau * inner_sqrt;
  Eigen::Matrix2d sigma = s1_inv_half * mid * mid * s1_inv_half;
  sigma = (sigma + sigma.transpose()) / 2.0;
  return {(1.0 - tau) * g1.mean + tau * g2.mean, sigma};
}

Eigen::Matrix2d transport_map_matrix(const Gaussian2& g1, const Gaussian2& g2) {
  const Eigen::Matrix2d s1_half = spd_sqrt(g1.cov);
  const Eigen::Matrix2d s1_inv_half = spd_inv_sqrt(g1.cov);
  const Eigen::Matrix2d inner = s1_half * g2.cov * s1_half;
  const Eigen::Matrix2d inner_sqrt = spd_sqrt((inner + inner.transpose()) / 2.0);
  Eigen::Matrix2d a = s1_inv_half * inner_sqrt * s1_inv_half;
  return (a + a.transpose()) / 2.0;
}

Eigen::Vector2d transport_map(const Gaussian2& g1, const Gaussian2& g2,
                              const Eigen::Vector2d& x) {
  return g2.mean + transport_map_matrix(g1, g2) * (x - g1.mean);
}

}  // namespace swarmcvt
