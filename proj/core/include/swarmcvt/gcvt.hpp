#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "swarmcvt/gaussian.hpp"
#include "swarmcvt/workspace.hpp"

namespace swarmcvt {

enum class GcvtVariant { I, II };

struct GcvtParams {
  int K = 100;
  double eta_B = 0.05;    // maximum tolerable obstacle mass per component
  double eta_V = 0.3;     // lower bound of component mass inside its cell
  double rho_max = 0.7;   // maximum spatial density, km^-2
  double kappa = 10.0;    // initial-covariance scale
  int lloyd_iters = 100;
  double lloyd_tol = 1e-3;
  std::uint64_t seed = 0;
};

/// K collocation Gaussian components with their Voronoi cells over the
/// free-space raster. Cells partition the free cells exactly.
struct Tessellation {
  std::vector<Gaussian2> generators;
  std::vector<RegionMask> cells;
  std::vector<double> objective_trace;  // CVT objective per Lloyd iteration

  std::size_t size() const { return generators.size(); }
};

/// k-means++ seeding over free-cell centers (D^2 weighting).
std::vector<Eigen::Vector2d> seed_means(const Workspace& w, int K,
                                        std::uint64_t seed);

struct LloydResult {
  std::vector<Eigen::Vector2d> means;
  std::vector<RegionMask> cells;
  std::vector<double> objective_trace;
};

/// Lloyd iteration with uniform density over free cells: assign each free
/// cell to its nearest mean, move means to cell centroids. Empty cells are
/// re-seeded at the free cell farthest from every current mean.
LloydResult lloyd_cvt(const Workspace& w,
                      const std::vector<Eigen::Vector2d>& means0,
                      const GcvtParams& params);

struct GcvtObjective {
  double total = 0.0;    // sum_i int_{V_i} -g ln g
  double j_sigma = 0.0;  // Mahalanobis term
  double j_p = 0.0;      // log-volume weighted mass term
};

/// Quadrature evaluation of the tessellation objective and its split
/// (total = j_sigma / 2 + j_p).
GcvtObjective gcvt_objective(const Tessellation& t, const Workspace& w);

/// Scalar-scaling covariance fit: Sigma(alpha) = alpha * sigma0 with the
/// smallest feasible alpha in (0, 1]. Feasible means obstacle mass < eta_B,
/// cell mass >= eta_V, and peak density <= rho_max.
/// Throws InfeasibleError naming the binding constraints when no alpha works.
std::pair<Eigen::Matrix2d, double> optimize_cov_gcvt2(
    const RegionMask& cell, const Eigen::Vector2d& mu,
    const Eigen::Matrix2d& sigma0, const GcvtParams& params,
    const Workspace& w);

/// Full-shape covariance fit: pattern search over the Cholesky factor of
/// Sigma^{-1}, minimizing |Sigma| with exterior penalties, started from the
/// scalar-scaling solution. Never returns a worse determinant than its
/// starting point.
Eigen::Matrix2d optimize_cov_gcvt1(const RegionMask& cell,
                                   const Eigen::Vector2d& mu,
                                   const Eigen::Matrix2d& sigma0,
                                   const GcvtParams& params,
                                   const Workspace& w);

/// Full pipeline: seeding, Lloyd, per-cell second moments, per-cell
/// covariance optimization (parallel). Cells whose covariance problem is
/// infeasible are dropped and their free cells reassigned to the nearest
/// surviving generator; more than 10% infeasible aborts.
Tessellation build_gcvt(const Workspace& w, const GcvtParams& params,
                        GcvtVariant variant);

/// Structured-text (JSON) round trip so planning can reuse a cached
/// tessellation. Cell masks are stored run-length encoded.
std::string tessellation_to_json(const Tessellation& t, const GcvtParams& params,
                                 GcvtVariant variant);
Tessellation tessellation_from_json(const std::string& text);

}  // namespace swarmcvt
