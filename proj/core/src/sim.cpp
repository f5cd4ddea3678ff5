#include "swarmcvt/sim.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "swarmcvt/errors.hpp"
#include "swarmcvt/rng.hpp"
#include "swarmcvt/transport.hpp"

namespace swarmcvt {

std::vector<std::pair<Eigen::Vector2d, int>> sample_gmm(const Gmm& p, int n,
                                                        std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("sample_gmm: n must be positive");
  p.validate();
  Rng rng(seed);
  std::vector<Eigen::Matrix2d> roots;
  roots.reserve(p.size());
  for (const auto& g : p.components) roots.push_back(spd_sqrt(g.cov));

  std::vector<std::pair<Eigen::Vector2d, int>> out;
  out.reserve(n);
  for (int r = 0; r < n; ++r) {
    const double u = rng.uniform();
    double acc = 0.0;
    int comp = static_cast<int>(p.size()) - 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc += p.weights[i];
      if (u < acc) {
        comp = static_cast<int>(i);
        break;
      }
    }
    const Eigen::Vector2d z{rng.normal(), rng.normal()};
    out.push_back({p.components[comp].mean + roots[comp] * z, comp});
  }
  return out;
}

std::vector<RobotState> assign_robots(
    const std::vector<std::pair<Eigen::Vector2d, int>>& samples,
    const Eigen::MatrixXd& weights, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RobotState> robots;
  robots.reserve(samples.size());
  const Eigen::VectorXd row_sums = weights.rowwise().sum();
  for (const auto& [pos, comp] : samples) {
    if (comp < 0 || comp >= weights.rows() || row_sums(comp) <= 0.0) {
      std::ostringstream msg;
      msg << "robot sampled from component " << comp
          << " with zero plan row weight";
      throw InfeasibleError(msg.str());
    }
    const double u = rng.uniform() * row_sums(comp);
    double acc = 0.0;
    int target = static_cast<int>(weights.cols()) - 1;
    for (int j = 0; j < weights.cols(); ++j) {
      acc += weights(comp, j);
      if (u < acc) {
        target = j;
        break;
      }
    }
    RobotState robot;
    robot.position = pos;
    robot.source = comp;
    robot.target = target;
    robots.push_back(robot);
  }
  return robots;
}

void step_robots(std::vector<RobotState>& robots, const PlanResult& plan,
                 std::size_t k, double dt, double nu, int* speed_violations) {
  for (auto& robot : robots) {
    const auto& traj = plan.trajectories[robot.source][robot.target];
    if (k + 1 >= traj.gcs.size()) continue;
    const Gaussian2& ga = traj.gcs[k];
    const Gaussian2& gb = traj.gcs[k + 1];
    const Eigen::Vector2d next = transport_map(ga, gb, robot.position);
    const double step = (next - robot.position).norm();
    robot.position = next;
    robot.path_length += step;
    robot.energy_accum += 0.5 * (step / dt) * (step / dt) * dt;
    if (speed_violations && step / dt > 1.5 * nu) ++(*speed_violations);
  }
}

RunMetrics compute_metrics(const std::vector<RobotState>& robots,
                           const PlanResult& plan, const Gmm& pf,
                           const Workspace& w, double dt, double wall_time_s) {
  RunMetrics m;
  m.wall_time_s = wall_time_s;
  const std::size_t steps = plan.gmm_sequence.empty()
                                ? 0
                                : plan.gmm_sequence.size() - 1;
  m.sim_time_h = static_cast<double>(steps) * dt;
  if (!robots.empty()) {
    double d = 0.0, e = 0.0;
    for (const auto& r : robots) {
      d += r.path_length;
      e += r.energy_accum;
    }
    m.avg_distance_km = d / robots.size();
    m.energy_per_mass = e / robots.size();
  }
  for (std::size_t k = 0; k + 1 < plan.gmm_sequence.size(); ++k) {
    m.wg_path_length_km +=
        wg_distance(plan.gmm_sequence[k], plan.gmm_sequence[k + 1]).first;
  }
  if (!plan.gmm_sequence.empty()) {
    // terminal error against the plan-weighted refinement of the goal mixture
    Gmm goal_refined;
    for (int i = 0; i < plan.weights.rows(); ++i) {
      for (int j = 0; j < plan.weights.cols(); ++j) {
        if (plan.weights(i, j) > 1e-12) {
          goal_refined.components.push_back(pf.components[j]);
          goal_refined.weights.push_back(plan.weights(i, j));
        }
      }
    }
    m.final_wg_error_km =
        wg_distance(plan.gmm_sequence.back(), goal_refined).first;
    for (const auto& mix : plan.gmm_sequence) {
      m.max_dap = std::max(m.max_dap, p_obstacle(mix, w));
    }
  }
  return m;
}

SimResult simulate(const PlanResult& plan, const Gmm& p0, const Gmm& pf,
                   const Workspace& w, int n, double dt, double nu,
                   std::uint64_t seed, bool record_trace) {
  SimResult result;
  const auto samples = sample_gmm(p0, n, seed);
  result.robots = assign_robots(samples, plan.weights, seed ^ 0x9e3779b97f4a7c15ULL);
  const std::size_t steps =
      plan.gmm_sequence.empty() ? 0 : plan.gmm_sequence.size() - 1;
  if (record_trace) {
    result.trace.reserve(steps + 1);
    std::vector<Eigen::Vector2d> frame;
    for (const auto& r : result.robots) frame.push_back(r.position);
    result.trace.push_back(frame);
  }
  int speed_violations = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    step_robots(result.robots, plan, k, dt, nu, &speed_violations);
    if (record_trace) {
      std::vector<Eigen::Vector2d> frame;
      for (const auto& r : result.robots) frame.push_back(r.position);
      result.trace.push_back(std::move(frame));
    }
  }
  result.metrics = compute_metrics(result.robots, plan, pf, w, dt, 0.0);
  result.metrics.speed_violations = speed_violations;
  return result;
}

}  // namespace swarmcvt
