#include "swarmcvt/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "swarmcvt/errors.hpp"

namespace swarmcvt {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw ValidationError("unknown key '" + key + "' in " + context);
    }
  }
}

Gmm parse_gmm(const json& obj, const std::string& context) {
  reject_unknown_keys(obj, {"components"}, context);
  Gmm p;
  for (const auto& comp : obj.at("components")) {
    reject_unknown_keys(comp, {"mean", "cov", "weight"},
                        context + " component");
    Gaussian2 g;
    g.mean = {comp.at("mean")[0].get<double>(), comp.at("mean")[1].get<double>()};
    const auto& cov = comp.at("cov");
    g.cov << cov[0].get<double>(), cov[1].get<double>(), cov[1].get<double>(),
        cov[2].get<double>();
    p.components.push_back(g);
    p.weights.push_back(comp.at("weight").get<double>());
  }
  return p;
}

json gmm_to_json(const Gmm& p) {
  json comps = json::array();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Gaussian2& g = p.components[i];
    comps.push_back({{"mean", {g.mean.x(), g.mean.y()}},
                     {"cov", {g.cov(0, 0), g.cov(0, 1), g.cov(1, 1)}},
                     {"weight", p.weights[i]}});
  }
  return {{"components", comps}};
}

template <typename T>
T take(const json& obj, const std::string& key, T fallback,
       std::vector<std::string>& defaults_log) {
  if (obj.contains(key)) return obj.at(key).get<T>();
  std::ostringstream note;
  note << key << "=" << fallback;
  defaults_log.push_back(note.str());
  return fallback;
}

void check_range(bool ok, const std::string& field) {
  if (!ok) throw ValidationError("scenario field out of range: " + field);
}

}  // namespace

void Scenario::validate() const {
  check_range(width > 0.0, "workspace.width");
  check_range(height > 0.0, "workspace.height");
  check_range(grid_h > 0.0, "workspace.grid_h");
  check_range(gcvt.K > 0, "params.K");
  check_range(gcvt.eta_B > 0.0 && gcvt.eta_B < 1.0, "params.eta_B");
  check_range(gcvt.eta_V > 0.0 && gcvt.eta_V < 1.0, "params.eta_V");
  check_range(gcvt.rho_max > 0.0, "params.rho_max");
  check_range(gcvt.kappa > 0.0, "params.kappa");
  check_range(gcvt.lloyd_iters > 0, "params.lloyd_iters");
  check_range(gcvt.lloyd_tol > 0.0, "params.lloyd_tol");
  check_range(planner.d_th > 0.0, "params.d_th");
  check_range(planner.nu > 0.0, "params.nu");
  check_range(planner.dt > 0.0, "params.dt");
  check_range(robots > 0, "params.robots");
  check_range(!seeds.empty(), "seeds");
  try {
    initial.validate();
    target.validate();
  } catch (const std::exception& e) {
    throw ValidationError(std::string("scenario mixture invalid: ") + e.what());
  }
}

Scenario scenario_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario parse error: ") + e.what());
  }
  reject_unknown_keys(
      doc, {"schema", "workspace", "initial", "target", "params", "seeds"},
      "scenario");
  Scenario s;
  if (doc.value("schema", 1) != 1) {
    throw ValidationError("unsupported scenario schema version");
  }

  const json& ws = doc.at("workspace");
  reject_unknown_keys(ws, {"width", "height", "grid_h", "obstacles"},
                      "workspace");
  s.width = ws.at("width").get<double>();
  s.height = ws.at("height").get<double>();
  s.grid_h = take(ws, "grid_h", 0.05, s.applied_defaults);
  for (const auto& poly : ws.value("obstacles", json::array())) {
    Polygon p;
    for (const auto& v : poly) {
      p.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    s.obstacles.push_back(std::move(p));
  }

  s.initial = parse_gmm(doc.at("initial"), "initial");
  s.target = parse_gmm(doc.at("target"), "target");

  const json params = doc.value("params", json::object());
  reject_unknown_keys(params,
                      {"K", "d_th", "nu", "eta_B", "eta_V", "rho_max", "kappa",
                       "dt", "robots", "lloyd_iters", "lloyd_tol", "lambda_p"},
                      "params");
  s.gcvt.K = take(params, "K", 500, s.applied_defaults);
  s.gcvt.eta_B = take(params, "eta_B", 0.05, s.applied_defaults);
  s.gcvt.eta_V = take(params, "eta_V", 0.3, s.applied_defaults);
  s.gcvt.rho_max = take(params, "rho_max", 0.7, s.applied_defaults);
  s.gcvt.kappa = take(params, "kappa", 10.0, s.applied_defaults);
  s.gcvt.lloyd_iters = take(params, "lloyd_iters", 100, s.applied_defaults);
  s.gcvt.lloyd_tol = take(params, "lloyd_tol", 1e-3, s.applied_defaults);
  s.planner.d_th = take(params, "d_th", 3.0, s.applied_defaults);
  s.planner.nu = take(params, "nu", 5.0, s.applied_defaults);
  s.planner.dt = take(params, "dt", 0.1, s.applied_defaults);
  s.planner.eta_B = s.gcvt.eta_B;
  s.planner.lambda_p = take(params, "lambda_p", 1e3, s.applied_defaults);
  s.robots = take(params, "robots", 400, s.applied_defaults);

  if (doc.contains("seeds")) {
    s.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
  } else {
    s.applied_defaults.push_back("seeds=[1]");
  }

  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
  json obstacles = json::array();
  for (const auto& poly : s.obstacles) {
    json p = json::array();
    for (const auto& v : poly) p.push_back({v.x(), v.y()});
    obstacles.push_back(p);
  }
  json doc = {
      {"schema", 1},
      {"workspace",
       {{"width", s.width},
        {"height", s.height},
        {"grid_h", s.grid_h},
        {"obstacles", obstacles}}},
      {"initial", gmm_to_json(s.initial)},
      {"target", gmm_to_json(s.target)},
      {"params",
       {{"K", s.gcvt.K},
        {"eta_B", s.gcvt.eta_B},
        {"eta_V", s.gcvt.eta_V},
        {"rho_max", s.gcvt.rho_max},
        {"kappa", s.gcvt.kappa},
        {"lloyd_iters", s.gcvt.lloyd_iters},
        {"lloyd_tol", s.gcvt.lloyd_tol},
        {"d_th", s.planner.d_th},
        {"nu", s.planner.nu},
        {"dt", s.planner.dt},
        {"lambda_p", s.planner.lambda_p},
        {"robots", s.robots}}},
      {"seeds", s.seeds}};
  return doc.dump(2);
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file: " + path);
  out << scenario_to_json(s) << "\n";
}

}  // namespace swarmcvt
