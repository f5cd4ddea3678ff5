#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swarmcvt/gaussian.hpp"
#include "swarmcvt/planner.hpp"
#include "swarmcvt/workspace.hpp"

namespace swarmcvt {

/// A complete run description: workspace, endpoint mixtures and every
/// user-facing parameter. Optional fields filled from defaults are listed
/// in applied_defaults so no default stays silent.
struct Scenario {
  double width = 20.0;
  double height = 16.0;
  double grid_h = 0.05;
  std::vector<Polygon> obstacles;
  Gmm initial;
  Gmm target;
  GcvtParams gcvt;
  PlannerParams planner;
  int robots = 400;
  std::vector<std::uint64_t> seeds{1};
  std::vector<std::string> applied_defaults;

  void validate() const;
};

/// Parses and validates a scenario document. Unknown keys are rejected.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);
void save_scenario(const Scenario& s, const std::string& path);

}  // namespace swarmcvt
