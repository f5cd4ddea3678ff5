#pragma once

#include <Eigen/Core>
#include <utility>

#include "swarmcvt/gaussian.hpp"

namespace swarmcvt {

/// Optimal coupling between two mixtures. matrix(i, j) is the mass moved
/// from source component i to target component j; cost is the WG distance
/// induced by the plan (km).
struct TransportPlan {
  Eigen::MatrixXd matrix;
  double cost = 0.0;
};

/// Solves the balanced transportation problem
///   min sum_ij cost(i,j) pi(i,j)  s.t. row sums = supply, col sums = demand
/// exactly by the transportation simplex. Ties are broken by lexicographic
/// (row-major) pivot order, so identical inputs give identical plans.
Eigen::MatrixXd solve_transport(const Eigen::MatrixXd& cost,
                                const Eigen::VectorXd& supply,
                                const Eigen::VectorXd& demand);

/// Wasserstein-GMM distance between two mixtures and its optimal plan.
std::pair<double, TransportPlan> wg_distance(const Gmm& p1, const Gmm& p2);

/// Plan cost without optimizing: dtilde(p1, p2, plan).
double wg_plan_cost(const Gmm& p1, const Gmm& p2, const Eigen::MatrixXd& plan);

/// Point on the WG geodesic between p1 and p2 induced by a coupling plan.
/// Components with plan mass below 1e-12 are dropped.
Gmm gmm_geodesic(const Gmm& p1, const Gmm& p2, const TransportPlan& plan,
                 double tau);

}  // namespace swarmcvt
