#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "swarmcvt/gaussian.hpp"
#include "swarmcvt/planner.hpp"
#include "swarmcvt/workspace.hpp"

namespace swarmcvt {

struct RobotState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  int source = 0;  // start component the robot was sampled from
  int target = 0;  // goal component it is assigned to
  double path_length = 0.0;   // km
  double energy_accum = 0.0;  // km^2 / h, integrated 0.5 v^2 dt
};

struct RunMetrics {
  double wall_time_s = 0.0;
  double sim_time_h = 0.0;          // T * dt
  double avg_distance_km = 0.0;     // mean robot path length
  double wg_path_length_km = 0.0;   // sum of step WG distances of the plan
  double energy_per_mass = 0.0;     // mean accumulated energy proxy
  double final_wg_error_km = 0.0;   // WG distance of the final step to goal
  double max_dap = 0.0;             // max obstacle mass over the plan steps
  int speed_violations = 0;         // robots ever exceeding 1.5 * nu
};

/// n draws from the mixture; each sample remembers its component.
std::vector<std::pair<Eigen::Vector2d, int>> sample_gmm(const Gmm& p, int n,
                                                        std::uint64_t seed);

/// Realizes the weight matrix as robot pair assignments: a robot sampled
/// from component i picks target j with probability w(i, j) / row_sum(i).
std::vector<RobotState> assign_robots(
    const std::vector<std::pair<Eigen::Vector2d, int>>& samples,
    const Eigen::MatrixXd& weights, std::uint64_t seed);

/// Moves every robot through the transport map of its pair's step k -> k+1.
void step_robots(std::vector<RobotState>& robots, const PlanResult& plan,
                 std::size_t k, double dt, double nu, int* speed_violations);

/// Metrics over a completed run.
RunMetrics compute_metrics(const std::vector<RobotState>& robots,
                           const PlanResult& plan, const Gmm& pf,
                           const Workspace& w, double dt, double wall_time_s);

struct SimResult {
  std::vector<RobotState> robots;
  RunMetrics metrics;
  // trace[k][r] is robot r's position at step k (length T + 1)
  std::vector<std::vector<Eigen::Vector2d>> trace;
};

/// Full deterministic simulation of n robots following the plan.
SimResult simulate(const PlanResult& plan, const Gmm& p0, const Gmm& pf,
                   const Workspace& w, int n, double dt, double nu,
                   std::uint64_t seed, bool record_trace = false);

}  // namespace swarmcvt
