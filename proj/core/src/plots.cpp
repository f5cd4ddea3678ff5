#include "swarmcvt/plots.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "swarmcvt/errors.hpp"
#include "swarmcvt/gaussian.hpp"
#include "swarmcvt/gcvt.hpp"
#include "swarmcvt/scenario.hpp"

namespace swarmcvt {

namespace fs = std::filesystem;

namespace {

// chi-square 2-dof 95% quantile; ellipse semi-axes are sqrt(5.991 * lambda)
constexpr double kChi2Quantile95 = 5.991;
constexpr double kScale = 40.0;  // px per km

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Svg {
  std::ostringstream body;
  double width_km, height_km;

  Svg(double w, double h) : width_km(w), height_km(h) {}

  // SVG y grows downward; flip so the plot matches workspace coordinates
  double px(double x) const { return x * kScale; }
  double py(double y) const { return (height_km - y) * kScale; }

  void polygon(const Polygon& poly, const std::string& style) {
    body << "<polygon points=\"";
    for (const auto& v : poly) {
      body << fmt(px(v.x())) << "," << fmt(py(v.y())) << " ";
    }
    body << "\" " << style << "/>\n";
  }

  void ellipse(const Gaussian2& g, const std::string& style) {
    const Eigen::Vector2d ev = sym_eigenvalues(g.cov);
    const double a = std::sqrt(kChi2Quantile95 * ev(1));
    const double b = std::sqrt(kChi2Quantile95 * ev(0));
    // eigenvector of the larger eigenvalue gives the rotation
    double angle = 0.0;
    if (std::abs(g.cov(0, 1)) > 1e-14) {
      angle = std::atan2(ev(1) - g.cov(0, 0), g.cov(0, 1));
    } else if (g.cov(1, 1) > g.cov(0, 0)) {
      angle = M_PI / 2.0;
    }
    body << "<ellipse cx=\"0\" cy=\"0\" rx=\"" << fmt(a * kScale) << "\" ry=\""
         << fmt(b * kScale) << "\" transform=\"translate("
         << fmt(px(g.mean.x())) << " " << fmt(py(g.mean.y())) << ") rotate("
         << fmt(-angle * 180.0 / M_PI) << ")\" " << style << "/>\n";
  }

  void circle(const Eigen::Vector2d& p, double r_px, const std::string& style) {
    body << "<circle cx=\"" << fmt(px(p.x())) << "\" cy=\"" << fmt(py(p.y()))
         << "\" r=\"" << fmt(r_px) << "\" " << style << "/>\n";
  }

  void triangle(const Eigen::Vector2d& p, double r_px, const std::string& style) {
    const double cx = px(p.x()), cy = py(p.y());
    body << "<polygon points=\"" << fmt(cx) << "," << fmt(cy - r_px) << " "
         << fmt(cx - r_px) << "," << fmt(cy + r_px) << " " << fmt(cx + r_px)
         << "," << fmt(cy + r_px) << "\" " << style << "/>\n";
  }

  void line(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
            const std::string& style) {
    body << "<line x1=\"" << fmt(px(a.x())) << "\" y1=\"" << fmt(py(a.y()))
         << "\" x2=\"" << fmt(px(b.x())) << "\" y2=\"" << fmt(py(b.y()))
         << "\" " << style << "/>\n";
  }

  void polyline(const std::vector<Eigen::Vector2d>& pts,
                const std::string& style) {
    body << "<polyline points=\"";
    for (const auto& p : pts) {
      body << fmt(px(p.x())) << "," << fmt(py(p.y())) << " ";
    }
    body << "\" fill=\"none\" " << style << "/>\n";
  }

  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << fmt(width_km * kScale) << "\" height=\"" << fmt(height_km * kScale)
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body.str() << "</svg>\n";
    return out.str();
  }
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing results file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

void draw_obstacles(Svg& svg, const Scenario& scenario) {
  for (const auto& poly : scenario.obstacles) {
    svg.polygon(poly, "fill=\"black\" fill-opacity=\"0.85\"");
  }
}

}  // namespace

std::vector<std::string> emit_plots(const std::string& results_dir) {
  const fs::path dir(results_dir);
  const Scenario scenario = scenario_from_json(read_file(dir / "scenario.json"));
  std::vector<std::string> written;

  if (fs::exists(dir / "tessellation.json")) {
    const Tessellation tess =
        tessellation_from_json(read_file(dir / "tessellation.json"));
    Svg svg(scenario.width, scenario.height);
    draw_obstacles(svg, scenario);
    for (const auto& g : tess.generators) {
      svg.ellipse(g, "fill=\"none\" stroke=\"blue\" stroke-width=\"1\"");
      svg.circle(g.mean, 2.0, "fill=\"blue\"");
    }
    const fs::path out = dir / "tessellation.svg";
    std::ofstream(out) << svg.str();
    written.push_back(out.string());
  }

  {
    const auto nodes = read_csv(dir / "graph_nodes.csv");
    const auto edges = read_csv(dir / "graph_edges.csv");
    std::vector<Eigen::Vector2d> pos(nodes.size());
    Svg svg(scenario.width, scenario.height);
    draw_obstacles(svg, scenario);
    for (const auto& row : nodes) {
      pos[std::stoul(row[0])] = {std::stod(row[2]), std::stod(row[3])};
    }
    for (const auto& row : edges) {
      svg.line(pos[std::stoul(row[0])], pos[std::stoul(row[1])],
               "stroke=\"#bbbbbb\" stroke-width=\"0.5\"");
    }
    for (const auto& row : nodes) {
      const Eigen::Vector2d p{std::stod(row[2]), std::stod(row[3])};
      if (row[1] == "start") {
        svg.circle(p, 4.0, "fill=\"green\"");
      } else if (row[1] == "goal") {
        svg.triangle(p, 5.0, "fill=\"red\"");
      } else {
        svg.circle(p, 1.5, "fill=\"#333399\"");
      }
    }
    const fs::path out = dir / "graph.svg";
    std::ofstream(out) << svg.str();
    written.push_back(out.string());
  }

  {
    const auto rows = read_csv(dir / "robot_traces.csv");
    std::vector<std::vector<Eigen::Vector2d>> paths;
    for (const auto& row : rows) {
      const std::size_t robot = std::stoul(row[0]);
      if (robot >= paths.size()) paths.resize(robot + 1);
      paths[robot].push_back({std::stod(row[2]), std::stod(row[3])});
    }
    Svg svg(scenario.width, scenario.height);
    draw_obstacles(svg, scenario);
    for (const auto& path : paths) {
      if (!path.empty()) {
        svg.polyline(path, "stroke=\"#7799cc\" stroke-width=\"0.4\" "
                           "stroke-opacity=\"0.5\"");
      }
    }
    for (const auto& path : paths) {
      if (!path.empty()) {
        svg.circle(path.front(), 1.5, "fill=\"green\"");
        svg.triangle(path.back(), 2.0, "fill=\"red\"");
      }
    }
    const fs::path out = dir / "trajectories.svg";
    std::ofstream(out) << svg.str();
    written.push_back(out.string());
  }

  return written;
}

}  // namespace swarmcvt
