#include "swarmcvt/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "swarmcvt/errors.hpp"
#include "swarmcvt/gcvt.hpp"
#include "swarmcvt/parallel.hpp"

namespace swarmcvt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Fixed shortest-roundtrip formatting so identical runs produce
// byte-identical files.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

std::string weights_csv(const Eigen::MatrixXd& w) {
  std::ostringstream out;
  out << "source,target,weight\n";
  for (int i = 0; i < w.rows(); ++i) {
    for (int j = 0; j < w.cols(); ++j) {
      out << i << "," << j << "," << fmt(w(i, j)) << "\n";
    }
  }
  return out.str();
}

std::string gmm_sequence_csv(const std::vector<Gmm>& seq) {
  std::ostringstream out;
  out << "k,component,weight,mean_x,mean_y,cov_xx,cov_xy,cov_yy\n";
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const Gmm& mix = seq[k];
    for (std::size_t c = 0; c < mix.size(); ++c) {
      const Gaussian2& g = mix.components[c];
      out << k << "," << c << "," << fmt(mix.weights[c]) << ","
          << fmt(g.mean.x()) << "," << fmt(g.mean.y()) << ","
          << fmt(g.cov(0, 0)) << "," << fmt(g.cov(0, 1)) << ","
          << fmt(g.cov(1, 1)) << "\n";
    }
  }
  return out.str();
}

std::string traces_csv(const SimResult& sim) {
  std::ostringstream out;
  out << "robot,k,x,y\n";
  for (std::size_t k = 0; k < sim.trace.size(); ++k) {
    for (std::size_t r = 0; r < sim.trace[k].size(); ++r) {
      out << r << "," << k << "," << fmt(sim.trace[k][r].x()) << ","
          << fmt(sim.trace[k][r].y()) << "\n";
    }
  }
  return out.str();
}

json metrics_json(const RunMetrics& m) {
  // wall time lives in metadata.json: metrics files must be byte-identical
  // across reruns of the same seed
  return {{"sim_time_h", m.sim_time_h},
          {"avg_distance_km", m.avg_distance_km},
          {"wg_path_length_km", m.wg_path_length_km},
          {"energy_per_mass", m.energy_per_mass},
          {"final_wg_error_km", m.final_wg_error_km},
          {"max_dap", m.max_dap},
          {"speed_violations", m.speed_violations}};
}

}  // namespace

PlanMethod parse_method(const std::string& name) {
  if (name == "cvt1") return PlanMethod::Cvt1;
  if (name == "cvt2") return PlanMethod::Cvt2;
  if (name == "grid") return PlanMethod::Grid;
  if (name == "random") return PlanMethod::Random;
  throw ValidationError("unknown method '" + name +
                        "' (expected cvt1, cvt2, grid or random)");
}

std::string method_name(PlanMethod method) {
  switch (method) {
    case PlanMethod::Cvt1: return "cvt1";
    case PlanMethod::Cvt2: return "cvt2";
    case PlanMethod::Grid: return "grid";
    case PlanMethod::Random: return "random";
  }
  return "?";
}

RunOutput run(const Scenario& scenario, PlanMethod method, std::uint64_t seed,
              const std::string& out_dir) {
  scenario.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const Workspace w = rasterize(scenario.width, scenario.height,
                                scenario.obstacles, scenario.grid_h);
  ScenarioParams params{scenario.gcvt, scenario.planner};
  params.gcvt.seed = seed;

  PlanResult plan;
  std::string tessellation_doc;
  switch (method) {
    case PlanMethod::Cvt1:
    case PlanMethod::Cvt2: {
      const GcvtVariant variant =
          method == PlanMethod::Cvt1 ? GcvtVariant::I : GcvtVariant::II;
      const Tessellation tess = build_gcvt(w, params.gcvt, variant);
      tessellation_doc = tessellation_to_json(tess, params.gcvt, variant);
      plan = plan_with_tessellation(tess, scenario.initial, scenario.target, w,
                                    params.planner);
      break;
    }
    case PlanMethod::Grid:
      plan = plan_baseline(scenario.initial, scenario.target, w, params,
                           BaselineKind::Grid);
      break;
    case PlanMethod::Random:
      plan = plan_baseline(scenario.initial, scenario.target, w, params,
                           BaselineKind::Random);
      break;
  }

  SimResult sim = simulate(plan, scenario.initial, scenario.target, w,
                           scenario.robots, scenario.planner.dt,
                           scenario.planner.nu, seed, /*record_trace=*/true);

  const auto t1 = std::chrono::steady_clock::now();
  sim.metrics.wall_time_s =
      std::chrono::duration<double>(t1 - t0).count();

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_file(dir / "scenario.json", scenario_to_json(scenario) + "\n");
  if (!tessellation_doc.empty()) {
    write_file(dir / "tessellation.json", tessellation_doc + "\n");
  }
  write_file(dir / "weights.csv", weights_csv(plan.weights));
  write_file(dir / "gmm_sequence.csv", gmm_sequence_csv(plan.gmm_sequence));
  write_file(dir / "robot_traces.csv", traces_csv(sim));
  write_file(dir / "metrics.json", metrics_json(sim.metrics).dump(2) + "\n");

  {
    std::ostringstream nodes, edges;
    nodes << "id,kind,x,y\n";
    for (std::size_t i = 0; i < plan.graph.nodes.size(); ++i) {
      const int idx = static_cast<int>(i);
      const char* kind = idx < plan.graph.n_colloc ? "colloc"
                         : idx < plan.graph.n_colloc + plan.graph.n_start
                             ? "start"
                             : "goal";
      nodes << i << "," << kind << "," << fmt(plan.graph.nodes[i].mean.x())
            << "," << fmt(plan.graph.nodes[i].mean.y()) << "\n";
    }
    edges << "i,j,cost\n";
    for (std::size_t i = 0; i < plan.graph.adj.size(); ++i) {
      for (const auto& e : plan.graph.adj[i]) {
        if (static_cast<int>(i) < e.to) {
          edges << i << "," << e.to << "," << fmt(e.cost) << "\n";
        }
      }
    }
    write_file(dir / "graph_nodes.csv", nodes.str());
    write_file(dir / "graph_edges.csv", edges.str());
  }

  json graph_summary = {{"nodes", plan.graph.nodes.size()},
                        {"collocation_nodes", plan.graph.n_colloc},
                        {"start_nodes", plan.graph.n_start},
                        {"goal_nodes", plan.graph.n_goal},
                        {"edges", plan.graph.edge_count()}};
  write_file(dir / "graph_summary.json", graph_summary.dump(2) + "\n");

  json metadata = {{"method", method_name(method)},
                   {"seed", seed},
                   {"K", scenario.gcvt.K},
                   {"robots", scenario.robots},
                   {"wall_time_s", sim.metrics.wall_time_s},
                   {"upper_bound_cost", plan.upper_bound_cost},
                   {"lambda_p", scenario.planner.lambda_p},
                   {"energy_definition", "sum over steps of 0.5*(step/dt)^2*dt"},
                   {"applied_defaults", scenario.applied_defaults},
                   {"version", "swarmcvt 0.1.0"}};
  write_file(dir / "metadata.json", metadata.dump(2) + "\n");

  return {out_dir, sim.metrics};
}

std::vector<RunOutput> sweep(const Scenario& scenario, const SweepSpec& spec,
                             const std::string& out_dir) {
  struct Job {
    PlanMethod method;
    int k;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (PlanMethod method : spec.methods) {
    for (int k : spec.component_counts) {
      for (std::uint64_t seed : spec.seeds) {
        jobs.push_back({method, k, seed});
      }
    }
  }

  std::vector<RunOutput> outputs(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), [&](int i) {
    const Job& job = jobs[i];
    Scenario s = scenario;
    s.gcvt.K = job.k;
    std::ostringstream name;
    name << method_name(job.method) << "_K" << job.k << "_seed" << job.seed;
    try {
      outputs[i] =
          run(s, job.method, job.seed, (fs::path(out_dir) / name.str()).string());
    } catch (const std::exception& e) {
      errors[i] = name.str() + ": " + e.what();
    }
  });
  for (const auto& err : errors) {
    if (!err.empty()) throw InfeasibleError("sweep job failed: " + err);
  }

  // aggregate mean/std per (method, K) per metric
  std::ostringstream summary;
  summary << "method,K,runs,avg_distance_mean,avg_distance_std,"
             "wg_path_mean,wg_path_std,energy_mean,energy_std,"
             "final_error_mean,final_error_std\n";
  std::map<std::pair<std::string, int>, std::vector<const RunMetrics*>> groups;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    groups[{method_name(jobs[i].method), jobs[i].k}].push_back(
        &outputs[i].metrics);
  }
  auto mean_std = [](const std::vector<const RunMetrics*>& g,
                     auto field) -> std::pair<double, double> {
    double mean = 0.0;
    for (const auto* m : g) mean += field(*m);
    mean /= g.size();
    double var = 0.0;
    for (const auto* m : g) var += (field(*m) - mean) * (field(*m) - mean);
    return {mean, g.size() > 1 ? std::sqrt(var / (g.size() - 1)) : 0.0};
  };
  for (const auto& [key, group] : groups) {
    const auto d = mean_std(group, [](const RunMetrics& m) { return m.avg_distance_km; });
    const auto wg = mean_std(group, [](const RunMetrics& m) { return m.wg_path_length_km; });
    const auto e = mean_std(group, [](const RunMetrics& m) { return m.energy_per_mass; });
    const auto fe = mean_std(group, [](const RunMetrics& m) { return m.final_wg_error_km; });
    summary << key.first << "," << key.second << "," << group.size() << ","
            << fmt(d.first) << "," << fmt(d.second) << "," << fmt(wg.first)
            << "," << fmt(wg.second) << "," << fmt(e.first) << ","
            << fmt(e.second) << "," << fmt(fe.first) << "," << fmt(fe.second)
            << "\n";
  }
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "summary.csv", summary.str());
  return outputs;
}

}  // namespace swarmcvt
