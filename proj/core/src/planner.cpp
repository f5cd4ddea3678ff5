#include "swarmcvt/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "swarmcvt/errors.hpp"
#include "swarmcvt/parallel.hpp"
#include "swarmcvt/rng.hpp"
#include "swarmcvt/transport.hpp"

namespace swarmcvt {

namespace {

constexpr double kUnreachableCost = 1e18;
constexpr double kWeightDropTol = 1e-12;

}  // namespace

std::size_t GcGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& a : adj) total += a.size();
  return total / 2;
}

GcGraph build_graph(const std::vector<Gaussian2>& colloc, const Gmm& p0,
                    const Gmm& pf, const PlannerParams& params,
                    const Workspace& w, bool prune_edges) {
  for (std::size_t i = 0; i < p0.size(); ++i) {
    if (!(p_obstacle(p0.components[i], w) < params.eta_B)) {
      std::ostringstream msg;
      msg << "start component " << i << " violates the obstacle mass bound";
      throw ValidationError(msg.str());
    }
  }
  for (std::size_t j = 0; j < pf.size(); ++j) {
    if (!(p_obstacle(pf.components[j], w) < params.eta_B)) {
      std::ostringstream msg;
      msg << "goal component " << j << " violates the obstacle mass bound";
      throw ValidationError(msg.str());
    }
  }

  GcGraph graph;
  graph.nodes = colloc;
  graph.n_colloc = static_cast<int>(colloc.size());
  graph.n_start = static_cast<int>(p0.size());
  graph.n_goal = static_cast<int>(pf.size());
  graph.nodes.insert(graph.nodes.end(), p0.components.begin(),
                     p0.components.end());
  graph.nodes.insert(graph.nodes.end(), pf.components.begin(),
                     pf.components.end());
  const int n = static_cast<int>(graph.nodes.size());
  graph.adj.assign(n, {});

  // pairwise edge construction, parallel over source nodes
  std::vector<std::vector<GcGraph::Edge>> fwd(n);
  parallel_for(n, [&](int i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = w2(graph.nodes[i], graph.nodes[j]);
      if (d > params.d_th) continue;
      double cost = d;
      if (prune_edges) {
        bool safe = true;
        for (double tau : {0.25, 0.5, 0.75}) {
          const Gaussian2 g = interpolate(graph.nodes[i], graph.nodes[j], tau);
          if (!(p_obstacle(g, w) < params.eta_B)) {
            safe = false;
            break;
          }
        }
        if (!safe) continue;
      } else {
        const Gaussian2 mid = interpolate(graph.nodes[i], graph.nodes[j], 0.5);
        cost += params.lambda_p * p_obstacle(mid, w);
      }
      fwd[i].push_back({j, cost});
    }
  });
  for (int i = 0; i < n; ++i) {
    for (const auto& e : fwd[i]) {
      graph.adj[i].push_back(e);
      graph.adj[e.to].push_back({i, e.cost});
    }
  }
  for (auto& a : graph.adj) {
    std::sort(a.begin(), a.end(),
              [](const auto& x, const auto& y) { return x.to < y.to; });
  }
  return graph;
}

std::pair<std::vector<int>, double> shortest_gc_path(const GcGraph& graph,
                                                     int src, int dst) {
  const int n = static_cast<int>(graph.nodes.size());
  if (src < 0 || src >= n || dst < 0 || dst >= n) {
    throw std::invalid_argument("shortest_gc_path: node index out of range");
  }
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0.0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (const auto& e : graph.adj[u]) {
      const double nd = d + e.cost;
      if (nd < dist[e.to] ||
          (nd == dist[e.to] && parent[e.to] > u)) {
        dist[e.to] = nd;
        parent[e.to] = u;
        pq.push({nd, e.to});
      }
    }
  }
  if (!std::isfinite(dist[dst])) {
    std::ostringstream msg;
    msg << "no path between graph nodes " << src << " and " << dst;
    throw InfeasibleError(msg.str());
  }
  std::vector<int> path;
  for (int v = dst; v != -1; v = parent[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return {path, dist[dst]};
}

GcTrajectory densify_path(const GcGraph& graph, const std::vector<int>& path,
                          double step_len) {
  if (path.empty() || step_len <= 0.0) {
    throw std::invalid_argument("densify_path: empty path or bad step length");
  }
  GcTrajectory traj;
  traj.gcs.push_back(graph.nodes[path[0]]);
  for (std::size_t e = 0; e + 1 < path.size(); ++e) {
    const Gaussian2& a = graph.nodes[path[e]];
    const Gaussian2& b = graph.nodes[path[e + 1]];
    const double d = w2(a, b);
    const int m = std::max(1, static_cast<int>(std::ceil(d / step_len - 1e-12)));
    for (int t = 1; t < m; ++t) {
      traj.gcs.push_back(interpolate(a, b, static_cast<double>(t) / m));
    }
    traj.gcs.push_back(b);
  }
  for (std::size_t k = 0; k + 1 < traj.gcs.size(); ++k) {
    const double d = w2(traj.gcs[k], traj.gcs[k + 1]);
    traj.cost += d;
    traj.cost_sq += d * d;
  }
  return traj;
}

Eigen::MatrixXd optimize_weights(const Eigen::MatrixXd& costs,
                                 const std::vector<double>& w0,
                                 const std::vector<double>& wf) {
  const Eigen::VectorXd a =
      Eigen::Map<const Eigen::VectorXd>(w0.data(), w0.size());
  const Eigen::VectorXd b =
      Eigen::Map<const Eigen::VectorXd>(wf.data(), wf.size());
  return solve_transport(costs, a, b);
}

PlanResult plan_with_tessellation(const Tessellation& tess, const Gmm& p0,
                                  const Gmm& pf, const Workspace& w,
                                  const PlannerParams& params,
                                  bool enforce_feasibility, bool prune_edges) {
  p0.validate();
  pf.validate();
  const int n0 = static_cast<int>(p0.size());
  const int nf = static_cast<int>(pf.size());

  PlanResult plan;
  plan.graph = build_graph(tess.generators, p0, pf, params, w, prune_edges);
  const GcGraph& graph = plan.graph;
  const double step_len = params.nu * params.dt;

  plan.trajectories.assign(n0, std::vector<GcTrajectory>(nf));
  std::vector<std::string> pair_errors(n0 * nf);
  parallel_for(n0, [&](int i) {
    for (int j = 0; j < nf; ++j) {
      try {
        auto [path, cost] =
            shortest_gc_path(graph, graph.start_node(i), graph.goal_node(j));
        (void)cost;
        GcTrajectory traj = densify_path(graph, path, step_len);
        traj.source = i;
        traj.target = j;
        plan.trajectories[i][j] = std::move(traj);
      } catch (const InfeasibleError& e) {
        pair_errors[i * nf + j] = e.what();
      }
    }
  });

  Eigen::MatrixXd costs(n0, nf);
  bool any_unreachable = false;
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < nf; ++j) {
      if (!pair_errors[i * nf + j].empty()) {
        costs(i, j) = kUnreachableCost;
        any_unreachable = true;
      } else {
        costs(i, j) = plan.trajectories[i][j].cost;
      }
    }
  }

  plan.weights = optimize_weights(costs, p0.weights, pf.weights);
  if (any_unreachable) {
    for (int i = 0; i < n0; ++i) {
      for (int j = 0; j < nf; ++j) {
        if (costs(i, j) >= kUnreachableCost && plan.weights(i, j) > kWeightDropTol) {
          std::ostringstream msg;
          msg << "required weight on unreachable pair (" << i << ", " << j
              << "): " << pair_errors[i * nf + j];
          throw InfeasibleError(msg.str());
        }
      }
    }
  }

  // Pad every used trajectory to the common horizon by holding its final
  // component (zero-cost self-steps), then assemble the mixture sequence.
  std::size_t horizon = 1;
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < nf; ++j) {
      if (plan.weights(i, j) > kWeightDropTol) {
        horizon = std::max(horizon, plan.trajectories[i][j].gcs.size());
      }
    }
  }
  plan.upper_bound_cost = 0.0;
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < nf; ++j) {
      if (plan.weights(i, j) <= kWeightDropTol) continue;
      auto& traj = plan.trajectories[i][j];
      while (traj.gcs.size() < horizon) traj.gcs.push_back(traj.gcs.back());
      plan.upper_bound_cost += plan.weights(i, j) * traj.cost_sq;
    }
  }

  plan.gmm_sequence.resize(horizon);
  for (std::size_t k = 0; k < horizon; ++k) {
    Gmm mix;
    for (int i = 0; i < n0; ++i) {
      for (int j = 0; j < nf; ++j) {
        if (plan.weights(i, j) <= kWeightDropTol) continue;
        mix.components.push_back(plan.trajectories[i][j].gcs[k]);
        mix.weights.push_back(plan.weights(i, j));
      }
    }
    plan.gmm_sequence[k] = std::move(mix);
  }

  if (enforce_feasibility) {
    for (std::size_t k = 0; k < plan.gmm_sequence.size(); ++k) {
      const double pb = p_obstacle(plan.gmm_sequence[k], w);
      if (!(pb < params.eta_B)) {
        std::ostringstream msg;
        msg << "planned mixture at step " << k << " has obstacle mass " << pb
            << " >= " << params.eta_B;
        throw InfeasibleError(msg.str());
      }
    }
  }
  return plan;
}

PlanResult plan_swarmcvt(const Gmm& p0, const Gmm& pf, const Workspace& w,
                         const ScenarioParams& params, GcvtVariant variant) {
  const Tessellation tess = build_gcvt(w, params.gcvt, variant);
  return plan_with_tessellation(tess, p0, pf, w, params.planner);
}

namespace {

// Uniform grid of K means over the full ROI, obstacle cells included.
std::vector<Gaussian2> grid_collocation(const Workspace& w, int K,
                                        double rho_max) {
  const int gx = std::max(
      1, static_cast<int>(std::ceil(std::sqrt(K * w.width / w.height))));
  const int gy = std::max(1, (K + gx - 1) / gx);
  // shared isotropic covariance at the peak-density boundary
  const double s2 = 1.0 / (2.0 * M_PI * rho_max);
  const Eigen::Matrix2d cov = s2 * Eigen::Matrix2d::Identity();
  std::vector<Gaussian2> nodes;
  for (int r = 0; r < gy && static_cast<int>(nodes.size()) < K; ++r) {
    for (int c = 0; c < gx && static_cast<int>(nodes.size()) < K; ++c) {
      const Eigen::Vector2d mu{(c + 0.5) * w.width / gx,
                               (r + 0.5) * w.height / gy};
      nodes.push_back({mu, cov});
    }
  }
  return nodes;
}

// K distinct free cells sampled uniformly, with GCVT-II covariances fitted
// over the induced Voronoi partition of free cells.
Tessellation random_collocation(const Workspace& w, const GcvtParams& params) {
  const int n_free = static_cast<int>(w.free_cells.size());
  if (params.K > n_free) {
    throw InfeasibleError("random baseline: K exceeds the free cell count");
  }
  Rng rng(params.seed);
  std::vector<int> picked;
  std::vector<char> used(n_free, 0);
  while (static_cast<int>(picked.size()) < params.K) {
    const int i = static_cast<int>(rng.uniform_index(n_free));
    if (!used[i]) {
      used[i] = 1;
      picked.push_back(i);
    }
  }
  std::vector<Eigen::Vector2d> means;
  means.reserve(picked.size());
  for (int i : picked) means.push_back(w.cell_center(w.free_cells[i]));

  std::vector<RegionMask> cells(params.K);
  for (int i = 0; i < n_free; ++i) {
    const Eigen::Vector2d c = w.cell_center(w.free_cells[i]);
    int best = 0;
    double best_d = (c - means[0]).squaredNorm();
    for (int k = 1; k < params.K; ++k) {
      const double d = (c - means[k]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    cells[best].push_back(w.free_cells[i]);
  }

  std::vector<Eigen::Matrix2d> covs(params.K);
  std::vector<std::string> failures(params.K);
  parallel_for(params.K, [&](int k) {
    try {
      if (cells[k].empty()) throw InfeasibleError("empty sample cell");
      const Eigen::Matrix2d sigma0 =
          params.kappa * second_moment(cells[k], means[k], w);
      covs[k] = optimize_cov_gcvt2(cells[k], means[k], sigma0, params, w).first;
    } catch (const std::exception& e) {
      failures[k] = e.what();
    }
  });

  Tessellation t;
  int dropped = 0;
  for (int k = 0; k < params.K; ++k) {
    if (failures[k].empty()) {
      t.generators.push_back({means[k], covs[k]});
      t.cells.push_back(cells[k]);
    } else {
      ++dropped;
    }
  }
  if (dropped > params.K / 2 || t.generators.empty()) {
    throw InfeasibleError("random baseline: too many infeasible sample cells");
  }
  return t;
}

}  // namespace

PlanResult plan_baseline(const Gmm& p0, const Gmm& pf, const Workspace& w,
                         const ScenarioParams& params, BaselineKind kind) {
  if (kind == BaselineKind::Grid) {
    Tessellation tess;
    tess.generators = grid_collocation(w, params.gcvt.K, params.gcvt.rho_max);
    // the grid baseline relies on penalized edge costs, not pruning, so its
    // mixtures are not held to the per-step obstacle bound
    return plan_with_tessellation(tess, p0, pf, w, params.planner,
                                  /*enforce_feasibility=*/false,
                                  /*prune_edges=*/false);
  }
  const Tessellation tess = random_collocation(w, params.gcvt);
  return plan_with_tessellation(tess, p0, pf, w, params.planner);
}

}  // namespace swarmcvt
