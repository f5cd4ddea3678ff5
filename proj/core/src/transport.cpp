#include "swarmcvt/transport.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "swarmcvt/errors.hpp"

namespace swarmcvt {

namespace {

constexpr double kReducedCostTol = 1e-12;

// Basis of a transportation simplex iterate: a spanning tree on the
// bipartite row/column graph, stored as adjacency lists of basic cells.
struct Basis {
  int m, n;
  std::vector<std::vector<int>> row_adj;  // row i -> columns j with basic (i,j)
  std::vector<std::vector<int>> col_adj;  // column j -> rows i

  Basis(int m_, int n_) : m(m_), n(n_), row_adj(m_), col_adj(n_) {}

  void add(int i, int j) {
    row_adj[i].push_back(j);
    col_adj[j].push_back(i);
  }
  void remove(int i, int j) {
    std::erase(row_adj[i], j);
    std::erase(col_adj[j], i);
  }
};

// Dual potentials u, v with u[0] = 0, propagated over the basis tree.
void compute_potentials(const Eigen::MatrixXd& cost, const Basis& basis,
                        std::vector<double>& u, std::vector<double>& v) {
  const int m = basis.m, n = basis.n;
  u.assign(m, 0.0);
  v.assign(n, 0.0);
  std::vector<char> u_set(m, 0), v_set(n, 0);
  u_set[0] = 1;
  std::vector<std::pair<char, int>> stack{{0, 0}};  // (is_col, index)
  while (!stack.empty()) {
    auto [is_col, idx] = stack.back();
    stack.pop_back();
    if (!is_col) {
      for (int j : basis.row_adj[idx]) {
        if (!v_set[j]) {
          v[j] = cost(idx, j) - u[idx];
          v_set[j] = 1;
          stack.push_back({1, j});
        }
      }
    } else {
      for (int i : basis.col_adj[idx]) {
        if (!u_set[i]) {
          u[i] = cost(i, idx) - v[idx];
          u_set[i] = 1;
          stack.push_back({0, i});
        }
      }
    }
  }
}

// Unique alternating path from row i0 to column j0 through basic cells.
// Returned as a node sequence [row i0, col, row, ..., col j0].
std::vector<std::pair<char, int>> tree_path(const Basis& basis, int i0, int j0) {
  const int m = basis.m, n = basis.n;
  // BFS over the bipartite tree; nodes 0..m-1 rows, m..m+n-1 cols.
  std::vector<int> parent(m + n, -2);
  std::vector<int> queue{i0};
  parent[i0] = -1;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const int node = queue[qi];
    if (node == m + j0) break;
    if (node < m) {
      for (int j : basis.row_adj[node]) {
        if (parent[m + j] == -2) {
          parent[m + j] = node;
          queue.push_back(m + j);
        }
      }
    } else {
      for (int i : basis.col_adj[node - m]) {
        if (parent[i] == -2) {
          parent[i] = node;
          queue.push_back(i);
        }
      }
    }
  }
  std::vector<std::pair<char, int>> path;
  for (int node = m + j0; node != -1; node = parent[node]) {
    if (parent[node] == -2) {
      throw SolverError("transportation basis is not a spanning tree");
    }
    path.push_back({node >= m ? char(1) : char(0), node >= m ? node - m : node});
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

Eigen::MatrixXd solve_transport(const Eigen::MatrixXd& cost,
                                const Eigen::VectorXd& supply,
                                const Eigen::VectorXd& demand) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  if (cost.rows() != m || cost.cols() != n) {
    throw std::invalid_argument("transport cost matrix shape mismatch");
  }
  if (std::abs(supply.sum() - demand.sum()) > 1e-8) {
    throw std::invalid_argument("transport marginals are unbalanced");
  }

  Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(m, n);
  Basis basis(m, n);

  // Northwest-corner initial basic feasible solution. When a supply and a
  // demand exhaust simultaneously, a degenerate zero cell keeps the basis
  // at exactly m + n - 1 cells.
  {
    std::vector<double> a(supply.data(), supply.data() + m);
    std::vector<double> b(demand.data(), demand.data() + n);
    int i = 0, j = 0;
    while (i < m && j < n) {
      const double q = std::min(a[i], b[j]);
      plan(i, j) = q;
      basis.add(i, j);
      a[i] -= q;
      b[j] -= q;
      const bool row_done = a[i] <= 1e-15;
      const bool col_done = b[j] <= 1e-15;
      if (row_done && col_done) {
        if (i + 1 < m) {
          ++i;
        } else if (j + 1 < n) {
          ++j;
        } else {
          break;
        }
      } else if (row_done) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  std::vector<double> u, v;
  const long max_iters = 200L * (m + n) * std::max(m, n) + 1000;
  for (long iter = 0;; ++iter) {
    if (iter > max_iters) {
      std::ostringstream msg;
      msg << "transportation simplex did not converge after " << iter
          << " pivots on a " << m << "x" << n << " instance";
      throw SolverError(msg.str());
    }
    compute_potentials(cost, basis, u, v);

    // Entering cell: first (row-major) with negative reduced cost.
    int ei = -1, ej = -1;
    for (int i = 0; i < m && ei < 0; ++i) {
      for (int j = 0; j < n; ++j) {
        if (cost(i, j) - u[i] - v[j] < -kReducedCostTol) {
          ei = i;
          ej = j;
          break;
        }
      }
    }
    if (ei < 0) break;  // optimal

    const auto path = tree_path(basis, ei, ej);
    // Cells along the cycle: (ei,ej) gets +theta, then alternate along the
    // path. Path nodes alternate row/col starting at row ei.
    std::vector<std::pair<int, int>> minus_cells, plus_cells;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      int i = path[k].first ? path[k + 1].second : path[k].second;
      int j = path[k].first ? path[k].second : path[k + 1].second;
      if (k % 2 == 0) {
        minus_cells.push_back({i, j});
      } else {
        plus_cells.push_back({i, j});
      }
    }
    double theta = std::numeric_limits<double>::infinity();
    std::pair<int, int> leaving{-1, -1};
    for (const auto& [i, j] : minus_cells) {
      if (plan(i, j) < theta) {
        theta = plan(i, j);
        leaving = {i, j};
      }
    }
    plan(ei, ej) += theta;
    for (const auto& [i, j] : plus_cells) plan(i, j) += theta;
    for (const auto& [i, j] : minus_cells) plan(i, j) -= theta;
    plan(leaving.first, leaving.second) = 0.0;
    basis.remove(leaving.first, leaving.second);
    basis.add(ei, ej);
  }

  return plan;
}

std::pair<double, TransportPlan> wg_distance(const Gmm& p1, const Gmm& p2) {
  const int m = static_cast<int>(p1.size());
  const int n = static_cast<int>(p2.size());
  Eigen::MatrixXd cost(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = w2(p1.components[i], p2.components[j]);
      cost(i, j) = d * d;
    }
  }
  const Eigen::VectorXd a =
      Eigen::Map<const Eigen::VectorXd>(p1.weights.data(), m);
  const Eigen::VectorXd b =
      Eigen::Map<const Eigen::VectorXd>(p2.weights.data(), n);
  TransportPlan plan;
  plan.matrix = solve_transport(cost, a, b);
  const double obj = (cost.array() * plan.matrix.array()).sum();
  plan.cost = std::sqrt(std::max(0.0, obj));
  return {plan.cost, plan};
}

double wg_plan_cost(const Gmm& p1, const Gmm& p2, const Eigen::MatrixXd& plan) {
  double obj = 0.0;
  for (int i = 0; i < plan.rows(); ++i) {
    for (int j = 0; j < plan.cols(); ++j) {
      if (plan(i, j) > 0.0) {
        const double d = w2(p1.components[i], p2.components[j]);
        obj += d * d * plan(i, j);
      }
    }
  }
  return std::sqrt(std::max(0.0, obj));
}

Gmm gmm_geodesic(const Gmm& p1, const Gmm& p2, const TransportPlan& plan,
                 double tau) {
  if (plan.matrix.rows() != static_cast<long>(p1.size()) ||
      plan.matrix.cols() != static_cast<long>(p2.size())) {
    throw std::invalid_argument("transport plan shape does not match mixtures");
  }
  Gmm out;
  for (int i = 0; i < plan.matrix.rows(); ++i) {
    for (int j = 0; j < plan.matrix.cols(); ++j) {
      const double w = plan.matrix(i, j);
      if (w <= 1e-12) continue;
      out.components.push_back(
          interpolate(p1.components[i], p2.components[j], tau));
      out.weights.push_back(w);
    }
  }
  return out;
}

}  // namespace swarmcvt
