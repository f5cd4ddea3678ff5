#pragma once

#include <Eigen/Core>
#include <vector>

#include "swarmcvt/gaussian.hpp"
#include "swarmcvt/gcvt.hpp"
#include "swarmcvt/workspace.hpp"

namespace swarmcvt {

/// Undirected graph over Gaussian components. Nodes are the collocation
/// components followed by the start components and the goal components.
struct GcGraph {
  std::vector<Gaussian2> nodes;
  int n_colloc = 0;  // nodes [0, n_colloc) come from the tessellation
  int n_start = 0;   // then [n_colloc, n_colloc + n_start)
  int n_goal = 0;    // then the goal components
  struct Edge {
    int to;
    double cost;  // W2 distance, km
  };
  std::vector<std::vector<Edge>> adj;
  std::size_t edge_count() const;

  int start_node(int i) const { return n_colloc + i; }
  int goal_node(int j) const { return n_colloc + n_start + j; }
};

/// One component-to-component trajectory, time-indexed with one Gaussian
/// per step.
struct GcTrajectory {
  int source = 0;  // start component index
  int target = 0;  // goal component index
  std::vector<Gaussian2> gcs;
  double cost = 0.0;     // sum of per-step W2 distances, km
  double cost_sq = 0.0;  // sum of squared per-step W2 distances, km^2
};

struct PlannerParams {
  double d_th = 3.0;      // graph edge threshold, km
  double nu = 5.0;        // robot speed, km/h
  double dt = 0.1;        // step interval, h (step length = nu * dt)
  double eta_B = 0.05;
  double lambda_p = 1e3;  // obstacle penalty weight for the grid baseline, km^2
};

struct PlanResult {
  std::vector<std::vector<GcTrajectory>> trajectories;  // [N0][Nf]
  Eigen::MatrixXd weights;                              // N0 x Nf
  std::vector<Gmm> gmm_sequence;                        // length T + 1
  double upper_bound_cost = 0.0;                        // sum w * cost_sq
  GcGraph graph;
};

/// Builds the component graph: tessellation nodes plus start/goal nodes,
/// edges where W2 <= d_th and whose interpolants at tau in {.25, .5, .75}
/// keep obstacle mass below eta_B. With prune_edges = false the safety
/// pruning is skipped and edge costs gain lambda_p * p_B(midpoint) instead.
GcGraph build_graph(const std::vector<Gaussian2>& colloc, const Gmm& p0,
                    const Gmm& pf, const PlannerParams& params,
                    const Workspace& w, bool prune_edges = true);

/// Dijkstra with deterministic smallest-index tie-breaking.
/// Throws InfeasibleError when dst is unreachable.
std::pair<std::vector<int>, double> shortest_gc_path(const GcGraph& graph,
                                                     int src, int dst);

/// Expands a node path into a per-step trajectory: each edge of W2 length d
/// becomes ceil(d / step_len) equal geodesic steps.
GcTrajectory densify_path(const GcGraph& graph, const std::vector<int>& path,
                          double step_len);

/// Transportation LP over trajectory costs with the start/goal weights as
/// marginals.
Eigen::MatrixXd optimize_weights(const Eigen::MatrixXd& costs,
                                 const std::vector<double>& w0,
                                 const std::vector<double>& wf);

enum class PlanMethod { Cvt1, Cvt2, Grid, Random };

struct ScenarioParams {
  GcvtParams gcvt;
  PlannerParams planner;
};

/// Full macroscopic pipeline on a prebuilt tessellation (SwarmCVT or the
/// random baseline, which differ only in how the tessellation was made).
PlanResult plan_with_tessellation(const Tessellation& tess, const Gmm& p0,
                                  const Gmm& pf, const Workspace& w,
                                  const PlannerParams& params,
                                  bool enforce_feasibility = true,
                                  bool prune_edges = true);

/// Algorithm entry point: builds the GCVT and plans.
PlanResult plan_swarmcvt(const Gmm& p0, const Gmm& pf, const Workspace& w,
                         const ScenarioParams& params, GcvtVariant variant);

enum class BaselineKind { Grid, Random };

/// Simplified stand-ins for predefined-grid and randomized collocation.
PlanResult plan_baseline(const Gmm& p0, const Gmm& pf, const Workspace& w,
                         const ScenarioParams& params, BaselineKind kind);

}  // namespace swarmcvt
