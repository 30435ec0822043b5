#ifndef GPCOV_GEOMETRY_HPP
#define GPCOV_GEOMETRY_HPP

#include <span>
#include <vector>

#include <Eigen/Core>

#include "gpcov/common.hpp"

namespace gpcov {

/// Rectangular pixel grid. Pixel (x, y) has linear index y * width + x and
/// its center at ((x + 0.5) * cell_size, (y + 0.5) * cell_size).
struct Domain {
  int width = 1;
  int height = 1;
  double cell_size = 1.0;

  Domain() = default;
  Domain(int w, int h, double cs = 1.0);

  int pixel_count() const { return width * height; }
  double pixel_area() const { return cell_size * cell_size; }
  double world_width() const { return width * cell_size; }
  double world_height() const { return height * cell_size; }

  int pixel_x(int index) const { return index % width; }
  int pixel_y(int index) const { return index / width; }
  Point center(int index) const {
    return {(pixel_x(index) + 0.5) * cell_size, (pixel_y(index) + 0.5) * cell_size};
  }

  /// Closed world rectangle [0, W] x [0, H]; the feasible set for agents.
  Box<double> bounds() const { return {Point(0.0, 0.0), Point(world_width(), world_height())}; }
  bool contains(const Point &p) const { return bounds().contains(p); }
};

using NeighborSets = std::vector<std::vector<int>>;

struct VoronoiPartition {
  /// Owning agent per pixel, indexed like Domain pixels.
  std::vector<int> owner;
  /// Pixel indices owned by each agent, ascending.
  std::vector<std::vector<int>> cells;
  /// Sorted neighbor indices per agent.
  NeighborSets neighbors;
  Eigen::MatrixXi laplacian;

  int agent_count() const { return static_cast<int>(cells.size()); }
  /// Number of undirected edges in the neighbor graph.
  int edge_count() const;
};

/// Nearest-agent assignment of every pixel center, ties to the lowest agent
/// index. Two agents are neighbors when their cells contain 4-adjacent pixels.
VoronoiPartition compute_partition(std::span<const Point> positions, const Domain &domain);

/// L = D - A for an undirected, loop-free neighbor relation.
Eigen::MatrixXi laplacian_of(const NeighborSets &neighbors);

} // namespace gpcov

#endif // GPCOV_GEOMETRY_HPP
