#pragma once

// Triangle meshes of fundamental domains, glued along side pairings.

#include <array>
#include <iosfwd>
#include <vector>

#include "ylab/domain.hpp"

namespace ylab {

/// Barycentric coordinates of the three interior quadrature points; every
/// point has weight 1/3 of the triangle area.
inline constexpr std::array<std::array<double, 3>, 3> kQuadrature{{
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0},
}};

/// Conformal factor 4 / (1 - |z|^2)^2 of the disk metric.
double disk_density(Complex z);

/// Hyperbolic distance 2 atanh(|z - w| / |1 - conj(z) w|).
double hyperbolic_edge_length(Complex z, Complex w);

struct SurfaceMesh {
  std::vector<Complex> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  /// Representative (smallest index) of each node's gluing class.
  std::vector<int> identClass;
  /// Conformal factor at the quadrature points of each triangle.
  std::vector<std::array<double, 3>> weights;
  /// Boundary segments, directed with the domain on their left.
  std::vector<std::array<int, 2>> boundary;
  /// {x, y, e}: the pairing map of polygon edge e sends node x to node y.
  std::vector<std::array<int, 3>> glue;
  /// Largest hyperbolic edge length (Euclidean for flat meshes).
  double meshSize = 0.0;
  bool hyperbolic = true;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t triangle_count() const { return triangles.size(); }

  /// Node -> degree of freedom in 0..class_count()-1, ordered by representative.
  std::vector<int> dof_index() const;
  std::size_t class_count() const;

  double triangle_area(std::size_t t) const;  // Euclidean
  /// Sum over triangles of the weighted quadrature of the conformal factor.
  double weighted_area() const;
};

struct MeshOptions {
  /// Minimum angle targeted by quality refinement, in degrees.
  double minAngleDeg = 20.0;
  /// Boundary segments are never split below hTarget * segmentFloor.
  double segmentFloor = 0.125;
  /// Hard cap on the number of nodes.
  std::size_t maxNodes = 300000;
};

/// Constrained Delaunay refinement of a paired polygon. Boundary nodes on an
/// edge are pairing images of the nodes on its partner edge.
SurfaceMesh mesh_domain(const GeodesicPolygon& polygon, double hTarget, const MeshOptions& options = {});

/// Unit-square flat torus, n x n cells split into two triangles, weight 1.
SurfaceMesh flat_torus_mesh(int n);

/// V - E + F of the glued mesh.
int euler_characteristic(const SurfaceMesh& mesh);

/// Largest |map(x) - y| over identified boundary nodes x, y.
double pairing_defect(const SurfaceMesh& mesh, const GeodesicPolygon& polygon);

/// Point location with P1 interpolation on an unglued mesh.
class MeshLocator {
 public:
  explicit MeshLocator(const SurfaceMesh& mesh, int cellsPerSide = 0);

  struct Hit {
    int triangle = -1;
    std::array<double, 3> bary{0.0, 0.0, 0.0};
  };

  /// Triangle containing z, or the closest one when z lies just outside.
  Hit locate(Complex z) const;

 private:
  const SurfaceMesh* mesh_;
  int cells_;
  double x0_, y0_, dx_, dy_;
  std::vector<std::vector<int>> buckets_;
  Hit nearest(Complex z) const;
};

void write_mesh_json(const SurfaceMesh& mesh, std::ostream& out);
void write_mesh_off(const SurfaceMesh& mesh, std::ostream& out);

}  // namespace ylab
