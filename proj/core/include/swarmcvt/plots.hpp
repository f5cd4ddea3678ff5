#pragma once

#include <string>
#include <vector>

namespace swarmcvt {

/// Renders deterministic SVG figures from a results directory:
/// tessellation ellipses at the 95% confidence level, the component graph,
/// and robot trajectories from start (circles) to goal (triangles).
/// Returns the paths of the files written.
std::vector<std::string> emit_plots(const std::string& results_dir);

}  // namespace swarmcvt
