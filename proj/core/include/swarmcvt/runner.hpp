#pragma once

#include <string>
#include <vector>

#include "swarmcvt/scenario.hpp"
#include "swarmcvt/sim.hpp"

namespace swarmcvt {

PlanMethod parse_method(const std::string& name);
std::string method_name(PlanMethod method);

struct RunOutput {
  std::string directory;
  RunMetrics metrics;
};

/// Executes plan + simulate + metrics for one (scenario, method, seed) and
/// writes a self-describing results directory: scenario copy, tessellation
/// (when one exists), plan CSVs, robot traces, metrics and run metadata.
RunOutput run(const Scenario& scenario, PlanMethod method, std::uint64_t seed,
              const std::string& out_dir);

struct SweepSpec {
  std::vector<PlanMethod> methods;
  std::vector<int> component_counts;
  std::vector<std::uint64_t> seeds;
};

/// Independent runs for every (method, K, seed) plus an aggregate
/// mean/std table written to summary.csv under out_dir.
std::vector<RunOutput> sweep(const Scenario& scenario, const SweepSpec& spec,
                             const std::string& out_dir);

}  // namespace swarmcvt
