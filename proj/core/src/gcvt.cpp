#include "swarmcvt/gcvt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "swarmcvt/errors.hpp"
#include "swarmcvt/parallel.hpp"
#include "swarmcvt/rng.hpp"

namespace swarmcvt {

namespace {

struct ConstraintCheck {
  double p_b = 0.0;
  double mass = 0.0;
  double peak = 0.0;
  bool feasible = false;
  std::string binding;  // names of violated constraints when infeasible
};

ConstraintCheck check_constraints(const Gaussian2& g, const RegionMask& cell,
                                  const GcvtParams& params, const Workspace& w) {
  ConstraintCheck c;
  c.p_b = p_obstacle(g, w);
  c.mass = mass_in_region(g, cell, w);
  c.peak = max_density_in_region(g, cell, w);
  std::vector<std::string> violated;
  if (!(c.p_b < params.eta_B)) violated.push_back("eta_B");
  if (!(c.mass >= params.eta_V)) violated.push_back("eta_V");
  if (!(c.peak <= params.rho_max)) violated.push_back("rho_max");
  c.feasible = violated.empty();
  for (std::size_t i = 0; i < violated.size(); ++i) {
    if (i) c.binding += ", ";
    c.binding += violated[i];
  }
  return c;
}

double sq_dist(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a - b).squaredNorm();
}

// Index (within w.free_cells order) of the free cell farthest from every
// mean; used to repair empty Lloyd cells deterministically.
int farthest_free_cell(const Workspace& w,
                       const std::vector<Eigen::Vector2d>& means) {
  int best = w.free_cells.front();
  double best_d = -1.0;
  for (int idx : w.free_cells) {
    const Eigen::Vector2d c = w.cell_center(idx);
    double d = std::numeric_limits<double>::infinity();
    for (const auto& m : means) d = std::min(d, sq_dist(c, m));
    if (d > best_d) {
      best_d = d;
      best = idx;
    }
  }
  return best;
}

}  // namespace

std::vector<Eigen::Vector2d> seed_means(const Workspace& w, int K,
                                        std::uint64_t seed) {
  const int n_free = static_cast<int>(w.free_cells.size());
  if (K < 1 || K > n_free) {
    std::ostringstream msg;
    msg << "seed count K=" << K << " must lie in [1, " << n_free
        << "] (number of free cells)";
    throw std::invalid_argument(msg.str());
  }
  if (K == n_free) {
    std::vector<Eigen::Vector2d> all;
    all.reserve(n_free);
    for (int idx : w.free_cells) all.push_back(w.cell_center(idx));
    return all;
  }

  Rng rng(seed);
  std::vector<Eigen::Vector2d> means;
  means.reserve(K);
  means.push_back(
      w.cell_center(w.free_cells[rng.uniform_index(n_free)]));

  std::vector<double> d2(n_free);
  for (int i = 0; i < n_free; ++i) {
    d2[i] = sq_dist(w.cell_center(w.free_cells[i]), means[0]);
  }
  while (static_cast<int>(means.size()) < K) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    int pick = -1;
    if (total <= 0.0) {
      pick = static_cast<int>(rng.uniform_index(n_free));
    } else {
      double target = rng.uniform() * total;
      for (int i = 0; i < n_free; ++i) {
        target -= d2[i];
        if (target <= 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = n_free - 1;
    }
    const Eigen::Vector2d p = w.cell_center(w.free_cells[pick]);
    means.push_back(p);
    for (int i = 0; i < n_free; ++i) {
      d2[i] = std::min(d2[i], sq_dist(w.cell_center(w.free_cells[i]), p));
    }
  }
  return means;
}

LloydResult lloyd_cvt(const Workspace& w,
                      const std::vector<Eigen::Vector2d>& means0,
                      const GcvtParams& params) {
  const int K = static_cast<int>(means0.size());
  const int n_free = static_cast<int>(w.free_cells.size());
  LloydResult result;
  result.means = means0;

  std::vector<int> assign(n_free, 0);
  for (int iter = 0; iter < std::max(1, params.lloyd_iters); ++iter) {
    // assignment step (nearest mean, ties to the smallest index)
    double objective = 0.0;
    for (int i = 0; i < n_free; ++i) {
      const Eigen::Vector2d c = w.cell_center(w.free_cells[i]);
      int best = 0;
      double best_d = sq_dist(c, result.means[0]);
      for (int k = 1; k < K; ++k) {
        const double d = sq_dist(c, result.means[k]);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      assign[i] = best;
      objective += best_d;
    }
    result.objective_trace.push_back(objective * w.cell_area());

    // centroid step
    std::vector<Eigen::Vector2d> sums(K, Eigen::Vector2d::Zero());
    std::vector<int> counts(K, 0);
    for (int i = 0; i < n_free; ++i) {
      sums[assign[i]] += w.cell_center(w.free_cells[i]);
      counts[assign[i]] += 1;
    }
    double max_move = 0.0;
    bool reseeded = false;
    for (int k = 0; k < K; ++k) {
      if (counts[k] == 0) {
        result.means[k] = w.cell_center(farthest_free_cell(w, result.means));
        reseeded = true;
        continue;
      }
      const Eigen::Vector2d c = sums[k] / counts[k];
      max_move = std::max(max_move, (c - result.means[k]).norm());
      result.means[k] = c;
    }
    if (!reseeded && max_move < params.lloyd_tol) break;
  }

  // final assignment with the converged means
  result.cells.assign(K, {});
  for (int i = 0; i < n_free; ++i) {
    const Eigen::Vector2d c = w.cell_center(w.free_cells[i]);
    int best = 0;
    double best_d = sq_dist(c, result.means[0]);
    for (int k = 1; k < K; ++k) {
      const double d = sq_dist(c, result.means[k]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    result.cells[best].push_back(w.free_cells[i]);
  }
  return result;
}

GcvtObjective gcvt_objective(const Tessellation& t, const Workspace& w) {
  GcvtObjective obj;
  const double h2 = w.cell_area();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Gaussian2& g = t.generators[k];
    const double log_norm = std::log(2.0 * M_PI *
                                     std::sqrt(g.cov.determinant()));
    const Eigen::Matrix2d inv = g.cov.inverse();
    for (int idx : t.cells[k]) {
      const Eigen::Vector2d d = w.cell_center(idx) - g.mean;
      const double maha2 = d.dot(inv * d);
      const double density = std::exp(-0.5 * maha2 - log_norm);
      obj.j_sigma += density * maha2 * h2;
      obj.j_p += density * log_norm * h2;
      obj.total += density * (0.5 * maha2 + log_norm) * h2;
    }
  }
  return obj;
}

std::pair<Eigen::Matrix2d, double> optimize_cov_gcvt2(
    const RegionMask& cell, const Eigen::Vector2d& mu,
    const Eigen::Matrix2d& sigma0, const GcvtParams& params,
    const Workspace& w) {
  auto feasible = [&](double alpha) {
    return check_constraints({mu, alpha * sigma0}, cell, params, w).feasible;
  };

  // Feasibility scan over log-spaced candidates in [1e-4, 1]; constraints
  // are monotone in alpha in practice, the scan guards odd cells.
  constexpr int kCandidates = 64;
  constexpr double kAlphaMin = 1e-4;
  double prev = 0.0;
  double found = -1.0;
  for (int i = 0; i < kCandidates; ++i) {
    const double alpha =
        kAlphaMin * std::pow(1.0 / kAlphaMin,
                             static_cast<double>(i) / (kCandidates - 1));
    if (feasible(alpha)) {
      found = alpha;
      break;
    }
    prev = alpha;
  }
  if (found < 0.0) {
    // report the constraints violated at the most permissive candidate
    std::string binding_small =
        check_constraints({mu, kAlphaMin * sigma0}, cell, params, w).binding;
    std::string binding_large =
        check_constraints({mu, sigma0}, cell, params, w).binding;
    std::ostringstream msg;
    msg << "no feasible covariance scale: binding constraints " << binding_small
        << " at alpha=" << kAlphaMin << "; " << binding_large << " at alpha=1";
    throw InfeasibleError(msg.str());
  }

  // refine the lower feasibility boundary by bisection
  double lo = prev, hi = found;
  if (lo > 0.0) {
    while ((hi - lo) > 1e-6 * hi) {
      const double mid = std::sqrt(lo * hi);
      if (feasible(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }
  return {hi * sigma0, hi};
}

Eigen::Matrix2d optimize_cov_gcvt1(const RegionMask& cell,
                                   const Eigen::Vector2d& mu,
                                   const Eigen::Matrix2d& sigma0,
                                   const GcvtParams& params,
                                   const Workspace& w) {
  auto [sigma_start, alpha] = optimize_cov_gcvt2(cell, mu, sigma0, params, w);
  (void)alpha;

  // Parametrize Sigma^{-1} = L^T L with L = [[l00, 0], [l10, l11]].
  auto factor_of = [](const Eigen::Matrix2d& sigma) {
    const Eigen::Matrix2d inv = sigma.inverse();
    Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
    // Cholesky of inv as L^T L: take upper Cholesky of inv.
    // inv = L^T L with L lower triangular => l00^2 + l10^2 = inv(0,0) etc.
    l(1, 1) = std::sqrt(inv(1, 1));
    l(1, 0) = inv(0, 1) / l(1, 1);
    l(0, 0) = std::sqrt(std::max(1e-16, inv(0, 0) - l(1, 0) * l(1, 0)));
    return l;
  };
  auto sigma_of = [](double l00, double l10, double l11) {
    Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
    l(0, 0) = std::max(l00, 1e-8);
    l(1, 0) = l10;
    l(1, 1) = std::max(l11, 1e-8);
    const Eigen::Matrix2d inv = l.transpose() * l;
    Eigen::Matrix2d sigma = inv.inverse();
    return Eigen::Matrix2d((sigma + sigma.transpose()) / 2.0);
  };

  constexpr double kPenaltyWeight = 1e6;
  constexpr int kMaxEvals = 500;
  int evals = 0;
  double best_feasible_det = sigma_start.determinant();
  Eigen::Matrix2d best_feasible = sigma_start;

  auto objective = [&](double l00, double l10, double l11) {
    ++evals;
    const Eigen::Matrix2d sigma = sigma_of(l00, l10, l11);
    const Gaussian2 g{mu, sigma};
    const ConstraintCheck c = check_constraints(g, cell, params, w);
    double penalty = 0.0;
    if (!(c.p_b < params.eta_B)) {
      const double v = c.p_b - params.eta_B;
      penalty += v * v;
    }
    if (c.mass < params.eta_V) {
      const double v = params.eta_V - c.mass;
      penalty += v * v;
    }
    if (c.peak > params.rho_max) {
      const double v = c.peak - params.rho_max;
      penalty += v * v;
    }
    const double det = sigma.determinant();
    if (c.feasible && det < best_feasible_det) {
      best_feasible_det = det;
      best_feasible = sigma;
    }
    return det + kPenaltyWeight * penalty;
  };

  const Eigen::Matrix2d l0 = factor_of(sigma_start);
  double x[3] = {l0(0, 0), l0(1, 0), l0(1, 1)};
  double f = objective(x[0], x[1], x[2]);
  const double scale = std::max({std::abs(x[0]), std::abs(x[2]), 1e-3});
  double step = 0.25 * scale;

  while (evals < kMaxEvals && step > 1e-6 * scale) {
    bool improved = false;
    for (int d = 0; d < 3 && evals < kMaxEvals; ++d) {
      for (double sign : {+1.0, -1.0}) {
        double trial[3] = {x[0], x[1], x[2]};
        trial[d] += sign * step;
        const double ft = objective(trial[0], trial[1], trial[2]);
        if (ft < f - 1e-15) {
          f = ft;
          x[d] = trial[d];
          improved = true;
          break;
        }
        if (evals >= kMaxEvals) break;
      }
    }
    if (!improved) step *= 0.5;
  }
  return best_feasible;
}

Tessellation build_gcvt(const Workspace& w, const GcvtParams& params,
                        GcvtVariant variant) {
  const auto means0 = seed_means(w, params.K, params.seed);
  LloydResult lloyd = lloyd_cvt(w, means0, params);
  const int K = params.K;

  // Snap each mean onto a cell center of its own region so the generator
  // mean is guaranteed to lie in free space inside its cell.
  std::vector<Eigen::Vector2d> mus(K);
  for (int k = 0; k < K; ++k) {
    const Eigen::Vector2d m = lloyd.means[k];
    int best = lloyd.cells[k].front();
    double best_d = std::numeric_limits<double>::infinity();
    bool inside_own = false;
    for (int idx : lloyd.cells[k]) {
      const Eigen::Vector2d c = w.cell_center(idx);
      if (std::abs(c.x() - m.x()) <= w.grid_h / 2 &&
          std::abs(c.y() - m.y()) <= w.grid_h / 2) {
        inside_own = true;
        break;
      }
      const double d = sq_dist(c, m);
      if (d < best_d) {
        best_d = d;
        best = idx;
      }
    }
    mus[k] = inside_own ? m : w.cell_center(best);
  }

  std::vector<Eigen::Matrix2d> covs(K);
  std::vector<std::string> failures(K);
  parallel_for(K, [&](int k) {
    try {
      const Eigen::Matrix2d sigma0 =
          params.kappa * second_moment(lloyd.cells[k], mus[k], w);
      if (variant == GcvtVariant::II) {
        covs[k] = optimize_cov_gcvt2(lloyd.cells[k], mus[k], sigma0, params, w)
                      .first;
      } else {
        covs[k] = optimize_cov_gcvt1(lloyd.cells[k], mus[k], sigma0, params, w);
      }
    } catch (const std::exception& e) {
      failures[k] = e.what();
    }
  });

  std::vector<int> infeasible;
  for (int k = 0; k < K; ++k) {
    if (!failures[k].empty()) infeasible.push_back(k);
  }
  if (static_cast<double>(infeasible.size()) > 0.1 * K) {
    std::ostringstream msg;
    msg << infeasible.size() << " of " << K
        << " cells are infeasible (>10%); first failures:";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, infeasible.size());
         ++i) {
      msg << " [cell " << infeasible[i] << ": " << failures[infeasible[i]]
          << "]";
    }
    throw InfeasibleError(msg.str());
  }

  Tessellation t;
  t.objective_trace = lloyd.objective_trace;
  std::vector<int> kept;
  for (int k = 0; k < K; ++k) {
    if (failures[k].empty()) {
      kept.push_back(k);
      t.generators.push_back({mus[k], covs[k]});
      t.cells.push_back(lloyd.cells[k]);
    }
  }
  // Reassign the free cells of dropped generators to the nearest surviving
  // mean so the cells still partition free space.
  for (int k : infeasible) {
    for (int idx : lloyd.cells[k]) {
      const Eigen::Vector2d c = w.cell_center(idx);
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < kept.size(); ++j) {
        const double d = sq_dist(c, t.generators[j].mean);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(j);
        }
      }
      t.cells[best].push_back(idx);
    }
  }
  for (auto& cell : t.cells) std::sort(cell.begin(), cell.end());

  // post-construction verification of every retained generator
  for (std::size_t k = 0; k < t.size(); ++k) {
    const ConstraintCheck c =
        check_constraints(t.generators[k], t.cells[k], params, w);
    if (!c.feasible) {
      std::ostringstream msg;
      msg << "generator " << k << " violates " << c.binding
          << " after construction";
      throw InfeasibleError(msg.str());
    }
  }
  return t;
}

namespace {

nlohmann::json rle_encode(const RegionMask& cell) {
  nlohmann::json runs = nlohmann::json::array();
  std::size_t i = 0;
  while (i < cell.size()) {
    std::size_t j = i;
    while (j + 1 < cell.size() && cell[j + 1] == cell[j] + 1) ++j;
    runs.push_back({cell[i], static_cast<int>(j - i + 1)});
    i = j + 1;
  }
  return runs;
}

RegionMask rle_decode(const nlohmann::json& runs) {
  RegionMask cell;
  for (const auto& run : runs) {
    const int start = run[0].get<int>();
    const int len = run[1].get<int>();
    for (int k = 0; k < len; ++k) cell.push_back(start + k);
  }
  return cell;
}

}  // namespace

std::string tessellation_to_json(const Tessellation& t, const GcvtParams& params,
                                 GcvtVariant variant) {
  nlohmann::json doc;
  doc["schema"] = 1;
  doc["variant"] = variant == GcvtVariant::I ? "I" : "II";
  doc["params"] = {{"K", params.K},         {"eta_B", params.eta_B},
                   {"eta_V", params.eta_V}, {"rho_max", params.rho_max},
                   {"kappa", params.kappa}, {"lloyd_iters", params.lloyd_iters},
                   {"lloyd_tol", params.lloyd_tol}, {"seed", params.seed}};
  doc["objective_trace"] = t.objective_trace;
  nlohmann::json gens = nlohmann::json::array();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Gaussian2& g = t.generators[k];
    gens.push_back({{"mean", {g.mean.x(), g.mean.y()}},
                    {"cov", {g.cov(0, 0), g.cov(0, 1), g.cov(1, 1)}},
                    {"cell", rle_encode(t.cells[k])}});
  }
  doc["generators"] = std::move(gens);
  return doc.dump(2);
}

Tessellation tessellation_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("tessellation parse error: ") + e.what());
  }
  Tessellation t;
  t.objective_trace = doc.value("objective_trace", std::vector<double>{});
  for (const auto& gen : doc.at("generators")) {
    Gaussian2 g;
    g.mean = {gen["mean"][0].get<double>(), gen["mean"][1].get<double>()};
    const double a = gen["cov"][0].get<double>();
    const double b = gen["cov"][1].get<double>();
    const double c = gen["cov"][2].get<double>();
    g.cov << a, b, b, c;
    t.generators.push_back(g);
    t.cells.push_back(rle_decode(gen["cell"]));
  }
  return t;
}

}  // namespace swarmcvt
