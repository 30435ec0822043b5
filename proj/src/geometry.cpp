#include "gpcov/geometry.hpp"

#include <algorithm>
#include <string>

namespace gpcov {

Domain::Domain(int w, int h, double cs) : width(w), height(h), cell_size(cs) {
  if (w < 1 || h < 1)
    throw ConfigError("domain dimensions must be positive");
  if (!(cs > 0.0))
    throw ConfigError("cell_size must be positive");
}

int VoronoiPartition::edge_count() const {
  int twice = 0;
  for (const auto &n : neighbors)
    twice += static_cast<int>(n.size());
  return twice / 2;
}

VoronoiPartition compute_partition(std::span<const Point> positions, const Domain &domain) {
  const int n = static_cast<int>(positions.size());
  if (n == 0)
    throw std::invalid_argument("compute_partition: no agents");
  for (int i = 0; i < n; ++i) {
    if (!domain.contains(positions[i]))
      throw DomainError("compute_partition: agent " + std::to_string(i) + " outside domain");
  }

  VoronoiPartition part;
  part.owner.resize(domain.pixel_count());
  part.cells.assign(n, {});

  for (int y = 0; y < domain.height; ++y) {
    const double cy = (y + 0.5) * domain.cell_size;
    for (int x = 0; x < domain.width; ++x) {
      const double cx = (x + 0.5) * domain.cell_size;
      int best = 0;
      double best_d2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double dx = cx - positions[i].x();
        const double dy = cy - positions[i].y();
        const double d2 = dx * dx + dy * dy;
        if (i == 0 || d2 < best_d2) {
          best = i;
          best_d2 = d2;
        }
      }
      const int idx = y * domain.width + x;
      part.owner[idx] = best;
      part.cells[best].push_back(idx);
    }
  }

  std::vector<std::vector<char>> adjacent(n, std::vector<char>(n, 0));
  for (int y = 0; y < domain.height; ++y) {
    for (int x = 0; x < domain.width; ++x) {
      const int a = part.owner[y * domain.width + x];
      if (x + 1 < domain.width) {
        const int b = part.owner[y * domain.width + x + 1];
        if (a != b)
          adjacent[a][b] = adjacent[b][a] = 1;
      }
      if (y + 1 < domain.height) {
        const int b = part.owner[(y + 1) * domain.width + x];
        if (a != b)
          adjacent[a][b] = adjacent[b][a] = 1;
      }
    }
  }
  part.neighbors.assign(n, {});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (adjacent[i][j])
        part.neighbors[i].push_back(j);

  part.laplacian = laplacian_of(part.neighbors);
  return part;
}

Eigen::MatrixXi laplacian_of(const NeighborSets &neighbors) {
  const int n = static_cast<int>(neighbors.size());
  Eigen::MatrixXi adjacency = Eigen::MatrixXi::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j : neighbors[i]) {
      if (j < 0 || j >= n)
        throw InvariantError("laplacian_of: neighbor index out of range");
      if (j == i)
        throw InvariantError("laplacian_of: self-loop at agent " + std::to_string(i));
      adjacency(i, j) = 1;
    }
  }
  if (adjacency != adjacency.transpose())
    throw InvariantError("laplacian_of: neighbor relation is not symmetric");

  Eigen::MatrixXi laplacian = -adjacency;
  laplacian.diagonal() = adjacency.rowwise().sum();
  return laplacian;
}

} // namespace gpcov
