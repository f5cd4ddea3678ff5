#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <vector>

namespace swarmcvt {

/// A 2-D Gaussian component: mean in km, SPD covariance in km^2.
struct Gaussian2 {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();

  Gaussian2() = default;
  Gaussian2(const Eigen::Vector2d& mu, const Eigen::Matrix2d& sigma)
      : mean(mu), cov(sigma) {}

  /// Throws std::domain_error if cov is asymmetric or not positive definite.
  void validate() const;

  /// Density at x (km^-2).
  double pdf(const Eigen::Vector2d& x) const;
};

/// Weighted mixture of Gaussian2 components.
struct Gmm {
  std::vector<Gaussian2> components;
  std::vector<double> weights;

  Gmm() = default;
  Gmm(std::vector<Gaussian2> comps, std::vector<double> w)
      : components(std::move(comps)), weights(std::move(w)) {}

  std::size_t size() const { return components.size(); }

  /// Checks weight normalization, nonnegativity and matching lengths.
  void validate() const;

  double pdf(const Eigen::Vector2d& x) const;
};

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
Eigen::Vector2d sym_eigenvalues(const Eigen::Matrix2d& m);

/// Principal square root of a 2x2 SPD matrix (closed form).
/// Throws std::domain_error for non-SPD input.
Eigen::Matrix2d spd_sqrt(const Eigen::Matrix2d& m);

/// Inverse of the principal square root; throws for near-singular input.
Eigen::Matrix2d spd_inv_sqrt(const Eigen::Matrix2d& m);

/// Wasserstein-2 distance between two Gaussians (closed form, km).
double w2(const Gaussian2& g1, const Gaussian2& g2);

/// Displacement interpolation (W2 geodesic point) at tau in [0, 1].
Gaussian2 interpolate(const Gaussian2& g1, const Gaussian2& g2, double tau);

/// The affine optimal transport map from g1 to g2 applied to x:
/// x -> mu2 + A (x - mu1), where pushing g1 through the map yields g2.
Eigen::Vector2d transport_map(const Gaussian2& g1, const Gaussian2& g2,
                              const Eigen::Vector2d& x);

/// Matrix A of the affine transport map above.
Eigen::Matrix2d transport_map_matrix(const Gaussian2& g1, const Gaussian2& g2);

inline double gmm_pdf(const Gmm& p, const Eigen::Vector2d& x) { return p.pdf(x); }

}  // namespace swarmcvt
