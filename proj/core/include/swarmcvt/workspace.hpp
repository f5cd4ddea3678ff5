#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "swarmcvt/gaussian.hpp"

namespace swarmcvt {

using Polygon = std::vector<Eigen::Vector2d>;

/// Indices of raster cells forming a region (a Voronoi cell, for instance).
using RegionMask = std::vector<int>;

/// Rectangular ROI with polygonal obstacles rasterized onto a uniform grid.
/// Immutable after construction; all queries are read-only.
struct Workspace {
  double width = 0.0;   // km
  double height = 0.0;  // km
  double grid_h = 0.0;  // raster cell side, km
  int nx = 0, ny = 0;   // raster size (columns, rows)
  std::vector<Polygon> obstacles;
  std::vector<std::uint8_t> free_mask;  // nx*ny, 1 = free, 0 = obstacle
  std::vector<int> free_cells;          // ascending indices of free cells
  std::vector<int> obstacle_cells;      // ascending indices of obstacle cells

  Eigen::Vector2d cell_center(int idx) const {
    const int r = idx / nx, c = idx % nx;
    return {(c + 0.5) * grid_h, (r + 0.5) * grid_h};
  }
  int cell_index(int row, int col) const { return row * nx + col; }
  bool is_free(int idx) const { return free_mask[idx] != 0; }
  double cell_area() const { return grid_h * grid_h; }
};

/// Even-odd point-in-polygon test.
bool point_in_polygon(const Eigen::Vector2d& p, const Polygon& poly);

/// Builds the free-space raster. Cell centers inside any obstacle polygon
/// (even-odd rule) are marked occupied. Throws ValidationError for
/// self-intersecting or out-of-bounds polygons, or if no free cell remains.
Workspace rasterize(double width, double height,
                    const std::vector<Polygon>& obstacles, double grid_h);

/// Distribution avoidance penalty: probability mass the Gaussian places on
/// obstacle cells (midpoint quadrature).
double p_obstacle(const Gaussian2& g, const Workspace& w);
double p_obstacle(const Gmm& p, const Workspace& w);

/// Probability mass of g over the given region cells.
double mass_in_region(const Gaussian2& g, const RegionMask& region,
                      const Workspace& w);

/// Maximum density of g over region cell centers. Throws for empty regions.
double max_density_in_region(const Gaussian2& g, const RegionMask& region,
                             const Workspace& w);

/// Second moment of the region about mu: midpoint quadrature of
/// (x-mu)(x-mu)^T over the region cells.
/// Throws std::domain_error for degenerate (collinear) regions.
Eigen::Matrix2d second_moment(const RegionMask& region,
                              const Eigen::Vector2d& mu, const Workspace& w);

}  // namespace swarmcvt
