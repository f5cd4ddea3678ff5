#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "swarmcvt/errors.hpp"
#include "swarmcvt/gcvt.hpp"
#include "swarmcvt/plots.hpp"
#include "swarmcvt/runner.hpp"
#include "swarmcvt/scenario.hpp"

using namespace swarmcvt;
namespace fs = std::filesystem;

namespace {

std::string bundled_scenario_path() {
  return std::string(SWARMCVT_SCENARIO_DIR) + "/default.json";
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("swarmcvt_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// A tiny obstacle-free scenario that plans in well under a second.
Scenario small_scenario() {
  Scenario s;
  s.width = 8.0;
  s.height = 8.0;
  s.grid_h = 0.2;
  s.initial.components.push_back({{1.5, 4.0}, Eigen::Matrix2d::Identity() * 0.25});
  s.initial.weights.push_back(1.0);
  s.target.components.push_back({{6.5, 4.0}, Eigen::Matrix2d::Identity() * 0.25});
  s.target.weights.push_back(1.0);
  s.gcvt.K = 4;
  s.gcvt.lloyd_iters = 50;
  s.gcvt.lloyd_tol = 1e-4;
  s.planner.d_th = 6.0;
  s.robots = 40;
  s.seeds = {1};
  return s;
}

std::size_t count_occurrences(const std::string& text, const std::string& sub) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(sub); pos != std::string::npos;
       pos = text.find(sub, pos + sub.size())) {
    ++n;
  }
  return n;
}

// Value of the first attr="..." occurrence after `from`.
double first_attr(const std::string& svg, const std::string& attr,
                  std::size_t from = 0) {
  const std::string needle = attr + "=\"";
  const std::size_t pos = svg.find(needle, from);
  REQUIRE(pos != std::string::npos);
  return std::stod(svg.substr(pos + needle.size()));
}

}  // namespace

TEST_CASE("bundled scenario loads with documented defaults") {
  const Scenario s = load_scenario(bundled_scenario_path());
  CHECK(s.width == 20.0);
  CHECK(s.height == 16.0);
  CHECK(s.grid_h == 0.1);
  CHECK(s.obstacles.size() == 7);
  CHECK(s.initial.size() == 3);
  CHECK(s.target.size() == 3);
  CHECK(s.seeds.size() == 10);
  CHECK(s.robots == 400);

  // K is intentionally left unset in the file and falls back to 500,
  // recorded in applied_defaults so the fallback is visible downstream.
  CHECK(s.gcvt.K == 500);
  const auto& log = s.applied_defaults;
  CHECK(std::find(log.begin(), log.end(), "K=500") != log.end());

  CHECK(s.gcvt.eta_B == 0.05);
  CHECK(s.gcvt.eta_V == 0.3);
  CHECK(s.gcvt.rho_max == 0.7);
  CHECK(s.planner.d_th == 3.0);
  CHECK(s.planner.nu == 5.0);
  CHECK(s.planner.dt == 0.1);
}

TEST_CASE("scenario validation rejects bad input") {
  const std::string base = R"({
    "workspace": {"width": 8, "height": 8, "grid_h": 0.2, "obstacles": []},
    "initial": {"components": [{"mean": [2, 4], "cov": [0.25, 0, 0.25], "weight": 1}]},
    "target": {"components": [{"mean": [6, 4], "cov": [0.25, 0, 0.25], "weight": 1}]},
    "params": {"K": 4},
    "seeds": [1]
  })";
  CHECK_NOTHROW(scenario_from_json(base));

  SUBCASE("out-of-range eta_B") {
    nlohmann::json doc = nlohmann::json::parse(base);
    doc["params"]["eta_B"] = 1.5;
    CHECK_THROWS_AS(scenario_from_json(doc.dump()), ValidationError);
  }
  SUBCASE("unknown top-level key") {
    nlohmann::json doc = nlohmann::json::parse(base);
    doc["extra_section"] = 1;
    CHECK_THROWS_AS(scenario_from_json(doc.dump()), ValidationError);
  }
  SUBCASE("unknown params key") {
    nlohmann::json doc = nlohmann::json::parse(base);
    doc["params"]["typo_knob"] = 0.5;
    CHECK_THROWS_AS(scenario_from_json(doc.dump()), ValidationError);
  }
  SUBCASE("unsupported schema version") {
    nlohmann::json doc = nlohmann::json::parse(base);
    doc["schema"] = 2;
    CHECK_THROWS_AS(scenario_from_json(doc.dump()), ValidationError);
  }
  SUBCASE("malformed JSON") {
    CHECK_THROWS_AS(scenario_from_json("{not json"), ValidationError);
  }
  SUBCASE("negative width") {
    nlohmann::json doc = nlohmann::json::parse(base);
    doc["workspace"]["width"] = -3.0;
    CHECK_THROWS_AS(scenario_from_json(doc.dump()), ValidationError);
  }
  SUBCASE("invalid mixture weight") {
    nlohmann::json doc = nlohmann::json::parse(base);
    doc["initial"]["components"][0]["weight"] = 0.5;  // does not sum to 1
    CHECK_THROWS_AS(scenario_from_json(doc.dump()), ValidationError);
  }
}

TEST_CASE("missing scenario file raises IoError") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), IoError);
}

TEST_CASE("scenario save/load round trip") {
  const fs::path dir = fresh_dir("scenario_roundtrip");
  Scenario s = small_scenario();
  s.obstacles.push_back({{3.0, 3.0}, {5.0, 3.0}, {5.0, 5.0}, {3.0, 5.0}});
  const fs::path path = dir / "scenario.json";
  save_scenario(s, path.string());

  const Scenario r = load_scenario(path.string());
  CHECK(r.width == s.width);
  CHECK(r.height == s.height);
  CHECK(r.grid_h == s.grid_h);
  REQUIRE(r.obstacles.size() == 1);
  CHECK(r.obstacles[0][2] == s.obstacles[0][2]);
  CHECK(r.gcvt.K == s.gcvt.K);
  CHECK(r.planner.d_th == s.planner.d_th);
  CHECK(r.seeds == s.seeds);
  REQUIRE(r.initial.size() == 1);
  CHECK(r.initial.components[0].mean == s.initial.components[0].mean);
  CHECK(r.initial.components[0].cov == s.initial.components[0].cov);
  // nothing falls back to defaults when every field is written out
  CHECK(r.applied_defaults.empty());
  // serialization is idempotent after one round trip
  CHECK(scenario_to_json(r) == scenario_to_json(load_scenario(path.string())));
  fs::remove_all(dir);
}

TEST_CASE("parse_method and method_name") {
  CHECK(parse_method("cvt1") == PlanMethod::Cvt1);
  CHECK(parse_method("cvt2") == PlanMethod::Cvt2);
  CHECK(parse_method("grid") == PlanMethod::Grid);
  CHECK(parse_method("random") == PlanMethod::Random);
  CHECK_THROWS_AS(parse_method("astar"), ValidationError);
  CHECK_THROWS_AS(parse_method(""), ValidationError);
  for (const auto* name : {"cvt1", "cvt2", "grid", "random"}) {
    CHECK(method_name(parse_method(name)) == name);
  }
}

TEST_CASE("run writes a self-describing results directory") {
  const fs::path dir = fresh_dir("run_outputs");
  const Scenario s = small_scenario();
  const RunOutput out = run(s, PlanMethod::Cvt2, 1, dir.string());
  CHECK(out.directory == dir.string());

  for (const auto* name :
       {"scenario.json", "tessellation.json", "weights.csv",
        "gmm_sequence.csv", "robot_traces.csv", "metrics.json",
        "graph_nodes.csv", "graph_edges.csv", "graph_summary.json",
        "metadata.json"}) {
    INFO("expected file: " << name);
    CHECK(fs::exists(dir / name));
  }

  // the scenario copy reloads to the same document
  const Scenario copy = load_scenario((dir / "scenario.json").string());
  CHECK(copy.gcvt.K == s.gcvt.K);
  CHECK(copy.width == s.width);

  // graph bookkeeping is consistent with the tessellation and endpoints
  const auto summary =
      nlohmann::json::parse(slurp(dir / "graph_summary.json"));
  const Tessellation tess =
      tessellation_from_json(slurp(dir / "tessellation.json"));
  CHECK(summary.at("collocation_nodes").get<std::size_t>() == tess.size());
  CHECK(summary.at("start_nodes").get<int>() == 1);
  CHECK(summary.at("goal_nodes").get<int>() == 1);
  CHECK(summary.at("nodes").get<std::size_t>() == tess.size() + 2);

  // metrics.json carries every reported metric and no wall time
  const auto metrics = nlohmann::json::parse(slurp(dir / "metrics.json"));
  for (const auto* key :
       {"sim_time_h", "avg_distance_km", "wg_path_length_km",
        "energy_per_mass", "final_wg_error_km", "max_dap",
        "speed_violations"}) {
    INFO("expected metric: " << key);
    CHECK(metrics.contains(key));
  }
  CHECK_FALSE(metrics.contains("wall_time_s"));
  CHECK(metrics.at("sim_time_h").get<double>() > 0.0);
  CHECK(metrics.at("avg_distance_km").get<double>() > 0.0);

  // wall time and the applied-defaults log live in metadata.json
  const auto meta = nlohmann::json::parse(slurp(dir / "metadata.json"));
  CHECK(meta.at("method") == "cvt2");
  CHECK(meta.at("seed") == 1);
  CHECK(meta.contains("wall_time_s"));
  CHECK(meta.contains("applied_defaults"));
  CHECK(meta.contains("upper_bound_cost"));
  fs::remove_all(dir);
}

TEST_CASE("baseline runs omit the tessellation file") {
  const fs::path dir = fresh_dir("run_grid");
  run(small_scenario(), PlanMethod::Grid, 1, dir.string());
  CHECK_FALSE(fs::exists(dir / "tessellation.json"));
  CHECK(fs::exists(dir / "metrics.json"));
  fs::remove_all(dir);
}

TEST_CASE("repeated runs produce byte-identical artifacts") {
  const Scenario s = small_scenario();
  for (const PlanMethod method :
       {PlanMethod::Cvt2, PlanMethod::Random}) {
    const fs::path a = fresh_dir("det_a");
    const fs::path b = fresh_dir("det_b");
    run(s, method, 7, a.string());
    run(s, method, 7, b.string());
    for (const auto* name : {"metrics.json", "weights.csv",
                             "gmm_sequence.csv", "robot_traces.csv",
                             "graph_nodes.csv", "graph_edges.csv"}) {
      INFO("method " << method_name(method) << ", file " << name);
      CHECK(slurp(a / name) == slurp(b / name));
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("sweep runs every combination and aggregates") {
  const fs::path dir = fresh_dir("sweep");
  SweepSpec spec;
  spec.methods = {PlanMethod::Cvt2, PlanMethod::Grid};
  spec.component_counts = {4};
  spec.seeds = {1, 2};
  const auto outputs = sweep(small_scenario(), spec, dir.string());
  CHECK(outputs.size() == 4);
  for (const auto& out : outputs) {
    CHECK(fs::exists(fs::path(out.directory) / "metrics.json"));
  }
  CHECK(fs::exists(dir / "cvt2_K4_seed1" / "metrics.json"));
  CHECK(fs::exists(dir / "grid_K4_seed2" / "metrics.json"));

  const std::string summary = slurp(dir / "summary.csv");
  CHECK(summary.find("method,K,runs,") == 0);
  CHECK(summary.find("cvt2,4,2,") != std::string::npos);
  CHECK(summary.find("grid,4,2,") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("emit_plots renders every figure for a full results directory") {
  const fs::path dir = fresh_dir("plots_full");
  run(small_scenario(), PlanMethod::Cvt2, 1, dir.string());
  const auto written = emit_plots(dir.string());
  REQUIRE(written.size() == 3);
  for (const auto& path : written) {
    INFO("plot file: " << path);
    REQUIRE(fs::exists(path));
    const std::string svg = slurp(path);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
  }

  // the graph figure shows one marker per node: collocation + start circles
  // and one goal triangle (no obstacles in this scenario)
  const auto summary =
      nlohmann::json::parse(slurp(dir / "graph_summary.json"));
  const std::string graph_svg = slurp(dir / "graph.svg");
  const std::size_t circles = count_occurrences(graph_svg, "<circle");
  const std::size_t triangles = count_occurrences(graph_svg, "<polygon");
  CHECK(circles == summary.at("collocation_nodes").get<std::size_t>() +
                       summary.at("start_nodes").get<std::size_t>());
  CHECK(triangles == summary.at("goal_nodes").get<std::size_t>());
  CHECK(count_occurrences(graph_svg, "<line") ==
        summary.at("edges").get<std::size_t>());
  fs::remove_all(dir);
}

TEST_CASE("emit_plots draws 95% confidence ellipses to scale") {
  // hand-built results directory with a single isotropic unit generator so
  // the expected ellipse radii follow directly from the chi-square quantile
  const fs::path dir = fresh_dir("plots_ellipse");
  Scenario s = small_scenario();
  save_scenario(s, (dir / "scenario.json").string());

  const Workspace w = rasterize(s.width, s.height, s.obstacles, s.grid_h);
  Tessellation tess;
  tess.generators.push_back({{4.0, 4.0}, Eigen::Matrix2d::Identity()});
  tess.cells.push_back(w.free_cells);
  std::ofstream(dir / "tessellation.json")
      << tessellation_to_json(tess, s.gcvt, GcvtVariant::II);

  std::ofstream(dir / "graph_nodes.csv") << "id,kind,x,y\n0,start,4,4\n";
  std::ofstream(dir / "graph_edges.csv") << "i,j,cost\n";
  std::ofstream(dir / "robot_traces.csv") << "robot,k,x,y\n0,0,4,4\n0,1,5,4\n";

  emit_plots(dir.string());
  const std::string svg = slurp(dir / "tessellation.svg");
  const std::size_t at = svg.find("<ellipse");
  REQUIRE(at != std::string::npos);
  // semi-axis sqrt(5.991 * 1) km at 40 px/km
  const double expected = std::sqrt(5.991) * 40.0;
  CHECK(first_attr(svg, "rx", at) == doctest::Approx(expected).epsilon(1e-4));
  CHECK(first_attr(svg, "ry", at) == doctest::Approx(expected).epsilon(1e-4));
  fs::remove_all(dir);
}

TEST_CASE("emit_plots on an incomplete directory raises IoError") {
  const fs::path dir = fresh_dir("plots_missing");
  CHECK_THROWS_AS(emit_plots(dir.string()), IoError);  // no scenario.json

  save_scenario(small_scenario(), (dir / "scenario.json").string());
  CHECK_THROWS_AS(emit_plots(dir.string()), IoError);  // no graph CSVs
  fs::remove_all(dir);
}
