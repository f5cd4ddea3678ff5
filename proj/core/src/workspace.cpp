#include "swarmcvt/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "swarmcvt/errors.hpp"

namespace swarmcvt {

namespace {

// Density beyond this many standard deviations is treated as zero when
// choosing quadrature bounds.
constexpr double kSigmaReach = 7.0;

bool segments_intersect(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                        const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
  auto cross = [](const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
    return u.x() * v.y() - u.y() * v.x();
  };
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

void validate_polygon(const Polygon& poly, std::size_t index, double width,
                      double height) {
  std::ostringstream msg;
  if (poly.size() < 3) {
    msg << "obstacle polygon " << index << " has fewer than 3 vertices";
    throw ValidationError(msg.str());
  }
  for (const auto& v : poly) {
    if (v.x() < -1e-9 || v.x() > width + 1e-9 || v.y() < -1e-9 ||
        v.y() > height + 1e-9) {
      msg << "obstacle polygon " << index << " has a vertex outside the ROI";
      throw ValidationError(msg.str());
    }
  }
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // skip adjacent edges (they share a vertex)
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j],
                             poly[(j + 1) % n])) {
        msg << "obstacle polygon " << index << " is self-intersecting";
        throw ValidationError(msg.str());
      }
    }
  }
}

// Bounding box of cells within kSigmaReach standard deviations of g.
struct CellBox {
  int r0, r1, c0, c1;  // inclusive
  bool empty;
};

CellBox reach_box(const Gaussian2& g, const Workspace& w) {
  const double sigma_max =
      std::sqrt(std::max(g.cov(0, 0), g.cov(1, 1)) + std::abs(g.cov(0, 1)));
  const double reach = kSigmaReach * sigma_max;
  CellBox box;
  box.c0 = std::max(0, static_cast<int>((g.mean.x() - reach) / w.grid_h));
  box.c1 = std::min(w.nx - 1, static_cast<int>((g.mean.x() + reach) / w.grid_h));
  box.r0 = std::max(0, static_cast<int>((g.mean.y() - reach) / w.grid_h));
  box.r1 = std::min(w.ny - 1, static_cast<int>((g.mean.y() + reach) / w.grid_h));
  box.empty = box.c0 > box.c1 || box.r0 > box.r1;
  return box;
}

}  // namespace

bool point_in_polygon(const Eigen::Vector2d& p, const Polygon& poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross =
          a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

Workspace rasterize(double width, double height,
                    const std::vector<Polygon>& obstacles, double grid_h) {
  if (!(width > 0.0) || !(height > 0.0) || !(grid_h > 0.0)) {
    throw ValidationError("workspace dimensions and grid_h must be positive");
  }
  if (grid_h > std::min(width, height) / 10.0 + 1e-12) {
    throw ValidationError("grid_h must be at most min(W, H) / 10");
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    validate_polygon(obstacles[i], i, width, height);
  }

  Workspace w;
  w.width = width;
  w.height = height;
  w.grid_h = grid_h;
  w.nx = static_cast<int>(std::ceil(width / grid_h - 1e-9));
  w.ny = static_cast<int>(std::ceil(height / grid_h - 1e-9));
  w.obstacles = obstacles;
  w.free_mask.assign(static_cast<std::size_t>(w.nx) * w.ny, 1);

  for (const Polygon& poly : obstacles) {
    double min_x = width, max_x = 0, min_y = height, max_y = 0;
    for (const auto& v : poly) {
      min_x = std::min(min_x, v.x());
      max_x = std::max(max_x, v.x());
      min_y = std::min(min_y, v.y());
      max_y = std::max(max_y, v.y());
    }
    const int c0 = std::max(0, static_cast<int>(min_x / grid_h) - 1);
    const int c1 = std::min(w.nx - 1, static_cast<int>(max_x / grid_h) + 1);
    const int r0 = std::max(0, static_cast<int>(min_y / grid_h) - 1);
    const int r1 = std::min(w.ny - 1, static_cast<int>(max_y / grid_h) + 1);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const int idx = w.cell_index(r, c);
        if (w.free_mask[idx] &&
            point_in_polygon(w.cell_center(idx), poly)) {
          w.free_mask[idx] = 0;
        }
      }
    }
  }

  for (int idx = 0; idx < w.nx * w.ny; ++idx) {
    (w.free_mask[idx] ? w.free_cells : w.obstacle_cells).push_back(idx);
  }
  if (w.free_cells.empty()) {
    throw ValidationError("no free cells: obstacles cover the whole ROI");
  }
  return w;
}

double p_obstacle(const Gaussian2& g, const Workspace& w) {
  const CellBox box = reach_box(g, w);
  if (box.empty) return 0.0;
  double mass = 0.0;
  for (int r = box.r0; r <= box.r1; ++r) {
    for (int c = box.c0; c <= box.c1; ++c) {
      const int idx = w.cell_index(r, c);
      if (!w.free_mask[idx]) mass += g.pdf(w.cell_center(idx));
    }
  }
  return mass * w.cell_area();
}

double p_obstacle(const Gmm& p, const Workspace& w) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    total += p.weights[i] * p_obstacle(p.components[i], w);
  }
  return total;
}

double mass_in_region(const Gaussian2& g, const RegionMask& region,
                      const Workspace& w) {
  double mass = 0.0;
  for (int idx : region) mass += g.pdf(w.cell_center(idx));
  return mass * w.cell_area();
}

double max_density_in_region(const Gaussian2& g, const RegionMask& region,
                             const Workspace& w) {
  if (region.empty()) {
    throw std::invalid_argument("max_density_in_region: empty region");
  }
  double best = 0.0;
  for (int idx : region) best = std::max(best, g.pdf(w.cell_center(idx)));
  return best;
}

Eigen::Matrix2d second_moment(const RegionMask& region,
                              const Eigen::Vector2d& mu, const Workspace& w) {
  if (region.empty()) {
    throw std::invalid_argument("second_moment: empty region");
  }
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  const double h2 = w.cell_area();
  for (int idx : region) {
    const Eigen::Vector2d d = w.cell_center(idx) - mu;
    m += d * d.transpose() * h2;
  }
  const double tr = m.trace();
  if (m.determinant() <= 1e-12 * tr * tr) {
    throw std::domain_error("second_moment: degenerate (collinear) region");
  }
  return m;
}

}  // namespace swarmcvt
