#pragma once

// Dirichlet fundamental domains of Fuchsian groups in the Poincare disk.

#include <vector>

#include "ylab/hypgeom.hpp"

namespace ylab {

/// A geodesic of the disk: a circle orthogonal to the unit circle, or a
/// diameter through the origin.
struct Geodesic {
  Complex center{0.0, 0.0};
  double radius = 0.0;
  bool diameter = false;
  Complex direction{1.0, 0.0};  // unit direction when `diameter`

  static Geodesic through(Complex z, Complex w);
  /// Euclidean distance from z to the supporting circle/line.
  double offset(Complex z) const;
};

struct GeodesicPolygon {
  std::vector<Complex> vertices;  // counterclockwise; edge i joins vertex i to i+1
  std::vector<Geodesic> edges;
  /// pairing[i] is the edge glued to edge i; empty for unpaired polygons.
  std::vector<int> pairing;
  /// pairingMaps[i] maps edge i onto edge pairing[i] (reversing direction).
  std::vector<Mobius> pairingMaps;
  std::vector<Word> pairingWords;
  Complex basepoint{0.0, 0.0};

  std::size_t size() const { return vertices.size(); }
  Complex vertex(std::size_t i) const { return vertices[i % vertices.size()]; }
  bool paired() const { return !pairing.empty(); }

  /// Hyperbolic length of edge i.
  double edge_length(std::size_t i) const;

  /// True if z lies in the closed polygon (within `tol` of the edge circles).
  bool contains(Complex z, double tol = 1e-12) const;

  /// Moves z into the polygon with side pairings; returns the image and the
  /// accumulated isometry. Requires a paired Dirichlet polygon.
  std::pair<Complex, Mobius> reduce(Complex z, int maxSteps = 200) const;
};

/// Polygon with geodesic edges through the given counterclockwise vertices.
GeodesicPolygon geodesic_polygon(std::vector<Complex> vertices);

/// Interior angles, vertex by vertex.
std::vector<double> interior_angles(const GeodesicPolygon& polygon);

/// Gauss-Bonnet area (n - 2) pi - sum of interior angles.
double hyperbolic_area(const GeodesicPolygon& polygon);

struct DirichletOptions {
  /// Stability tolerance between wordRadius and wordRadius + 1.
  double stabilityTol = 1e-10;
  /// Skip the wordRadius + 1 comparison (used by the stability check itself).
  bool checkStability = true;
};

/// Dirichlet domain {z : d(z,p) <= d(z, w p)} over reduced words w of length
/// <= wordRadius. Throws NumericalError("increase wordRadius") when the
/// result is unbounded, unpaired, or moves when the radius grows by one.
GeodesicPolygon dirichlet_domain(const FuchsianGroup& group, Complex basepoint = {0.0, 0.0},
                                 int wordRadius = 3, const DirichletOptions& options = {});

/// dirichlet_domain at the basepoint 0, retrying with wordRadius + 1 while it
/// reports "increase wordRadius", up to maxRadius.
GeodesicPolygon escalating_dirichlet_domain(const FuchsianGroup& group, int wordRadius,
                                            int maxRadius = 8);

/// Word radius recommended for a set of Fenchel-Nielsen coordinates.
int default_word_radius(const FNCoords& coords);

}  // namespace ylab
