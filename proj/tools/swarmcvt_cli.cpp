// Command-line front end: plan a single run, sweep over methods/K/seeds,
// build a tessellation only, or render plots from a results directory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmcvt/errors.hpp"
#include "swarmcvt/gcvt.hpp"
#include "swarmcvt/plots.hpp"
#include "swarmcvt/runner.hpp"
#include "swarmcvt/scenario.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;

int dispatch(int argc, char** argv) {
  CLI::App app{"Swarm path planning over Gaussian mixtures"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "results", results_dir, variant = "II";
  std::string method = "cvt2";
  int components = -1;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::vector<std::string> methods{"cvt1", "cvt2"};
  std::vector<int> components_list;
  std::vector<std::uint64_t> seeds;

  auto* plan = app.add_subcommand("plan", "Plan and simulate one run");
  plan->add_option("--scenario", scenario_path, "Scenario file")->required();
  plan->add_option("--method", method, "cvt1|cvt2|grid|random");
  plan->add_option("--components", components, "Override component count K");
  plan->add_option("--seed", seed, "Random seed")
      ->each([&](const std::string&) { seed_given = true; });
  plan->add_option("--out", out_dir, "Output directory");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a (method, K, seed) grid");
  sweep_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  sweep_cmd->add_option("--methods", methods, "Methods to run");
  sweep_cmd->add_option("--components-list", components_list, "K values");
  sweep_cmd->add_option("--seeds", seeds, "Seeds");
  sweep_cmd->add_option("--out", out_dir, "Output directory");

  auto* gcvt_cmd = app.add_subcommand("gcvt", "Build a tessellation only");
  gcvt_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  gcvt_cmd->add_option("--variant", variant, "I or II");
  gcvt_cmd->add_option("--components", components, "Override component count K");
  gcvt_cmd->add_option("--seed", seed, "Random seed")
      ->each([&](const std::string&) { seed_given = true; });
  gcvt_cmd->add_option("--out", out_dir, "Output directory");

  auto* plot_cmd = app.add_subcommand("plot", "Render SVG plots from a run");
  plot_cmd->add_option("--results", results_dir, "Results directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (plan->parsed()) {
    swarmcvt::Scenario s = swarmcvt::load_scenario(scenario_path);
    if (components > 0) s.gcvt.K = components;
    if (!seed_given && !s.seeds.empty()) seed = s.seeds.front();
    const auto out =
        swarmcvt::run(s, swarmcvt::parse_method(method), seed, out_dir);
    std::cout << "run written to " << out.directory << "\n"
              << "avg_distance_km=" << out.metrics.avg_distance_km
              << " energy=" << out.metrics.energy_per_mass
              << " wg_path_km=" << out.metrics.wg_path_length_km
              << " final_error_km=" << out.metrics.final_wg_error_km << "\n";
    return 0;
  }

  if (sweep_cmd->parsed()) {
    swarmcvt::Scenario s = swarmcvt::load_scenario(scenario_path);
    swarmcvt::SweepSpec spec;
    for (const auto& m : methods) spec.methods.push_back(swarmcvt::parse_method(m));
    spec.component_counts =
        components_list.empty() ? std::vector<int>{s.gcvt.K} : components_list;
    spec.seeds = seeds.empty() ? s.seeds : seeds;
    const auto outputs = swarmcvt::sweep(s, spec, out_dir);
    std::cout << outputs.size() << " runs written under " << out_dir
              << " (see summary.csv)\n";
    return 0;
  }

  if (gcvt_cmd->parsed()) {
    swarmcvt::Scenario s = swarmcvt::load_scenario(scenario_path);
    if (components > 0) s.gcvt.K = components;
    if (!seed_given && !s.seeds.empty()) seed = s.seeds.front();
    s.gcvt.seed = seed;
    const auto v = variant == "I" ? swarmcvt::GcvtVariant::I
                 : variant == "II"
                     ? swarmcvt::GcvtVariant::II
                     : throw swarmcvt::ValidationError("variant must be I or II");
    const swarmcvt::Workspace w =
        swarmcvt::rasterize(s.width, s.height, s.obstacles, s.grid_h);
    const swarmcvt::Tessellation tess = swarmcvt::build_gcvt(w, s.gcvt, v);
    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / "tessellation.json";
    std::ofstream out(path);
    if (!out) throw swarmcvt::IoError("cannot write " + path.string());
    out << swarmcvt::tessellation_to_json(tess, s.gcvt, v) << "\n";
    std::ofstream scen(std::filesystem::path(out_dir) / "scenario.json");
    scen << swarmcvt::scenario_to_json(s) << "\n";
    std::cout << "tessellation with " << tess.size() << " components written to "
              << path.string() << "\n";
    return 0;
  }

  if (plot_cmd->parsed()) {
    for (const auto& f : swarmcvt::emit_plots(results_dir)) {
      std::cout << "wrote " << f << "\n";
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const swarmcvt::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const swarmcvt::InfeasibleError& e) {
    std::cerr << "planning error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const swarmcvt::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
