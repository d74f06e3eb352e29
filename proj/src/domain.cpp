#include "ylab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace ylab {

namespace {

using std::numbers::pi;

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

Complex from_klein(Complex k) { return k / (1.0 + std::sqrt(std::max(0.0, 1.0 - std::norm(k)))); }

// Half-plane constraint Re(k conj(c)) <= 1 in Klein coordinates for the
// bisector between the origin and the orbit point q.
struct Constraint {
  Complex dual;     // c
  Complex orbit;    // q, in centered disk coordinates
  Word word;
  MobiusExt element;  // maps the basepoint to the orbit point
};

// Convex hull (counterclockwise, strictly convex) of the dual points.
std::vector<std::size_t> hull(const std::vector<Constraint>& cs) {
  std::vector<std::size_t> idx(cs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const Complex p = cs[a].dual, q = cs[b].dual;
    return p.real() < q.real() || (p.real() == q.real() && p.imag() < q.imag());
  });
  // Merge near-coincident dual points first, keeping the shortest word: a
  // pair a rounding error apart can fake a convex turn and shield both from
  // popping.
  std::vector<bool> dropped(idx.size(), false);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (dropped[i]) continue;
    for (std::size_t j = i + 1; j < idx.size() && cs[idx[j]].dual.real() - cs[idx[i]].dual.real() < 1e-9; ++j) {
      if (dropped[j] || std::abs(cs[idx[j]].dual - cs[idx[i]].dual) >= 1e-9) continue;
      if (cs[idx[j]].word.size() < cs[idx[i]].word.size()) {
        dropped[i] = true;
        break;
      }
      dropped[j] = true;
    }
  }
  std::size_t kept = 0;
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (!dropped[i]) idx[kept++] = idx[i];
  idx.resize(kept);
  if (idx.size() < 3) return idx;
  std::vector<std::size_t> h(2 * idx.size());
  std::size_t k = 0;
  auto turn = [&](std::size_t o, std::size_t a, std::size_t b) {
    return cross(cs[a].dual - cs[o].dual, cs[b].dual - cs[o].dual);
  };
  for (std::size_t i = 0; i < idx.size(); ++i) {
    while (k >= 2 && turn(h[k - 2], h[k - 1], idx[i]) <= 0) --k;
    h[k++] = idx[i];
  }
  for (std::size_t i = idx.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && turn(h[k - 2], h[k - 1], idx[i]) <= 0) --k;
    h[k++] = idx[i];
  }
  h.resize(k - 1);
  return h;
}

// Intersection of the lines Re(k conj(a)) = 1 and Re(k conj(b)) = 1.
Complex dual_vertex(Complex a, Complex b) {
  const double det = a.real() * b.imag() - a.imag() * b.real();
  return {(b.imag() - a.imag()) / det, (a.real() - b.real()) / det};
}

struct CenteredPolygon {
  std::vector<Complex> klein;        // vertices in centered Klein coordinates
  std::vector<const Constraint*> sides;  // side i lies between vertex i and i+1
};

CenteredPolygon intersect(const std::vector<Constraint>& cs) {
  std::vector<std::size_t> h = hull(cs);
  std::vector<const Constraint*> sides;
  for (std::size_t i : h) sides.push_back(&cs[i]);
  // Different words for the same element give coincident dual points; keep
  // the shortest word.
  for (std::size_t i = 0; sides.size() >= 2 && i < sides.size();) {
    const std::size_t j = (i + 1) % sides.size();
    if (std::abs(sides[i]->dual - sides[j]->dual) < 1e-9) {
      const std::size_t drop = sides[j]->word.size() < sides[i]->word.size() ? i : j;
      sides.erase(sides.begin() + static_cast<std::ptrdiff_t>(drop));
      i = 0;
    } else {
      ++i;
    }
  }
  // Drop sides of vanishing length: several bisectors through one vertex.
  for (bool changed = true; changed && sides.size() >= 3;) {
    changed = false;
    const std::size_t n = sides.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Complex v0 = dual_vertex(sides[(i + n - 1) % n]->dual, sides[i]->dual);
      const Complex v1 = dual_vertex(sides[i]->dual, sides[(i + 1) % n]->dual);
      if (std::abs(v1 - v0) < 1e-11) {
        sides.erase(sides.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  CenteredPolygon out;
  const std::size_t n = sides.size();
  if (n < 3) throw NumericalError("dirichlet_domain: degenerate polygon, increase wordRadius");
  // Vertex i sits between side i-1 and side i; rotate so side i follows vertex i.
  for (std::size_t i = 0; i < n; ++i)
    out.klein.push_back(dual_vertex(sides[i]->dual, sides[(i + 1) % n]->dual));
  out.sides.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.sides.push_back(sides[(i + 1) % n]);
  return out;
}

using ComplexExt = std::complex<long double>;

// Image of the basepoint p under g, recentered so that p sits at the origin.
ComplexExt centered_orbit(const MobiusExt& g, ComplexExt p) {
  const ComplexExt i(0.0L, 1.0L);
  const ComplexExt wp = i * (1.0L + p) / (1.0L - p);
  const ComplexExt w = (g.a() * wp + g.b()) / (g.c() * wp + g.d());
  const ComplexExt z = (w - i) / (w + i);
  return (z - p) / (1.0L - std::conj(p) * z);
}

std::vector<Constraint> collect_constraints(const FuchsianGroup& group, ComplexExt basepoint, int wordRadius,
                                            double maxDistance, bool& fixedPoint) {
  std::vector<Constraint> cs;
  fixedPoint = false;
  for_each_word(group, wordRadius, [&](const Word& word, const MobiusExt& g) {
    const ComplexExt q = centered_orbit(g, basepoint);
    const long double rho = std::abs(q);
    if (rho < 1e-9L) {
      if (g.distance_to_identity() < 1e-9L) return;  // relator consequences
      fixedPoint = true;
      return;
    }
    const double dist = static_cast<double>(2 * std::atanh(std::min(rho, 1.0L - 1e-19L)));
    if (dist > maxDistance) return;
    const double m = std::tanh(dist / 4);
    const double km = 2 * m / (1 + m * m);
    const Complex dir(static_cast<double>(q.real() / rho), static_cast<double>(q.imag() / rho));
    cs.push_back({dir / km, Complex(static_cast<double>(q.real()), static_cast<double>(q.imag())), word, g});
  });
  return cs;
}

GeodesicPolygon build(const FuchsianGroup& group, Complex basepoint, int wordRadius,
                      double maxDistance, bool& fixedPoint) {
  const MobiusExt center = disk_recentering(basepoint).cast<long double>();
  const ComplexExt p(basepoint.real(), basepoint.imag());
  std::vector<Constraint> cs = collect_constraints(group, p, wordRadius, maxDistance, fixedPoint);
  if (fixedPoint) return {};
  if (cs.size() < 3) throw NumericalError("dirichlet_domain: too few orbit points, increase wordRadius");
  CenteredPolygon cp = intersect(cs);
  for (Complex k : cp.klein)
    if (!(std::abs(k) < 1.0 - 1e-14))
      throw NumericalError("dirichlet_domain: unbounded domain, increase wordRadius");

  // Orientation: the hull is counterclockwise, hence so is the polygon.
  GeodesicPolygon poly;
  poly.basepoint = basepoint;
  const Mobius uncenter = center.inverse().cast<double>();
  for (Complex k : cp.klein) poly.vertices.push_back(uncenter(from_klein(k)));
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i)
    poly.edges.push_back(Geodesic::through(poly.vertices[i], poly.vertices[(i + 1) % n]));

  // Edge i is the bisector of p and g p; g^{-1} carries it onto the bisector
  // of p and g^{-1} p.
  poly.pairing.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexExt qi = centered_orbit(cp.sides[i]->element.inverse(), p);
    const Complex target(static_cast<double>(qi.real()), static_cast<double>(qi.imag()));
    for (std::size_t j = 0; j < n; ++j) {
      if (disk_distance(cp.sides[j]->orbit, target) < 1e-7) {
        poly.pairing[i] = static_cast<int>(j);
        break;
      }
    }
    if (poly.pairing[i] < 0)
      throw NumericalError("dirichlet_domain: unpaired side, increase wordRadius");
    Word w = cp.sides[i]->word;
    std::reverse(w.begin(), w.end());
    for (int& l : w) l = -l;
    poly.pairingWords.push_back(w);
    poly.pairingMaps.push_back(group.evaluate(w));
  }
  for (std::size_t i = 0; i < n; ++i)
    if (poly.pairing[static_cast<std::size_t>(poly.pairing[i])] != static_cast<int>(i))
      throw NumericalError("dirichlet_domain: side pairing is not an involution");
  return poly;
}

double max_vertex_distance(const GeodesicPolygon& poly) {
  double r = 0.0;
  for (Complex v : poly.vertices) r = std::max(r, disk_distance(poly.basepoint, v));
  return r;
}

}  // namespace

Geodesic Geodesic::through(Complex z, Complex w) {
  Geodesic g;
  const double c = cross(z, w);
  if (std::abs(c) < 1e-14 * std::max(1e-300, std::abs(z) * std::abs(w)) || std::abs(c) < 1e-300) {
    g.diameter = true;
    const Complex d = std::abs(z) > std::abs(w) ? z : w;
    g.direction = std::abs(d) > 0 ? d / std::abs(d) : Complex(1.0, 0.0);
    return g;
  }
  // Circle through z, w and the inversion of z: center solves
  // 2 Re(conj(c) z) = |z|^2 + 1 and the same for w.
  const double rz = std::norm(z) + 1.0;
  const double rw = std::norm(w) + 1.0;
  const double det = 2.0 * (z.real() * w.imag() - z.imag() * w.real());
  g.center = Complex((rz * w.imag() - rw * z.imag()) / det, (z.real() * rw - w.real() * rz) / det);
  g.radius = std::sqrt(std::max(0.0, std::norm(g.center) - 1.0));
  return g;
}

double Geodesic::offset(Complex z) const {
  if (diameter) return std::abs(cross(direction, z));
  return std::abs(std::abs(z - center) - radius);
}

double GeodesicPolygon::edge_length(std::size_t i) const { return disk_distance(vertex(i), vertex(i + 1)); }

bool GeodesicPolygon::contains(Complex z, double tol) const {
  if (std::abs(z) >= 1.0) return false;
  // Each edge circle separates the disk; the polygon lies on the basepoint's side.
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Geodesic& e = edges[i];
    const Complex ref = basepoint;
    double sz, sr;
    if (e.diameter) {
      sz = cross(e.direction, z);
      sr = cross(e.direction, ref);
      if (std::abs(sr) < 1e-14) sr = cross(e.direction, 0.5 * (vertex(i + 2) + vertex(i + 3)));
    } else {
      sz = std::abs(z - e.center) - e.radius;
      sr = std::abs(ref - e.center) - e.radius;
    }
    if (sz * (sr > 0 ? 1.0 : -1.0) < -tol) return false;
  }
  return true;
}

std::pair<Complex, Mobius> GeodesicPolygon::reduce(Complex z, int maxSteps) const {
  if (!paired()) throw LogicError("reduce: polygon has no side pairings");
  Mobius acc = Mobius::Identity(Model::Disk);
  for (int step = 0; step < maxSteps; ++step) {
    // Dirichlet reduction: if z is closer to the image g p of the basepoint
    // than to p, apply g^{-1} (the pairing map of g's side).
    const double d0 = disk_distance(z, basepoint);
    double best = d0;
    int which = -1;
    for (std::size_t i = 0; i < size(); ++i) {
      const Complex gp = pairingMaps[i].inverse()(basepoint);
      const double di = disk_distance(z, gp);
      if (di < best - 1e-13) {
        best = di;
        which = static_cast<int>(i);
      }
    }
    if (which < 0) return {z, acc};
    z = pairingMaps[static_cast<std::size_t>(which)](z);
    acc = pairingMaps[static_cast<std::size_t>(which)] * acc;
  }
  throw NumericalError("reduce: no convergence");
}

GeodesicPolygon geodesic_polygon(std::vector<Complex> vertices) {
  GeodesicPolygon p;
  p.vertices = std::move(vertices);
  const std::size_t n = p.vertices.size();
  if (n < 3) throw LogicError("geodesic_polygon: need at least 3 vertices");
  Complex centroid{0, 0};
  for (Complex v : p.vertices) centroid += v;
  p.basepoint = centroid / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    p.edges.push_back(Geodesic::through(p.vertices[i], p.vertices[(i + 1) % n]));
  return p;
}

std::vector<double> interior_angles(const GeodesicPolygon& polygon) {
  const std::size_t n = polygon.size();
  if (n < 3 || polygon.edges.size() != n) throw LogicError("interior_angles: polygon is not closed");
  for (std::size_t i = 0; i < n; ++i) {
    const Geodesic& e = polygon.edges[i];
    if (e.offset(polygon.vertex(i)) > 1e-10 || e.offset(polygon.vertex(i + 1)) > 1e-10)
      throw LogicError("hyperbolic_area: polygon is not closed");
  }
  std::vector<double> angles(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Mobius c = disk_recentering(polygon.vertex(i));
    const Complex next = c(polygon.vertex(i + 1));
    const Complex prev = c(polygon.vertex(i + n - 1));
    double a = std::arg(prev / next);
    if (a < 0) a += 2 * pi;
    angles[i] = a;
  }
  return angles;
}

double hyperbolic_area(const GeodesicPolygon& polygon) {
  const auto angles = interior_angles(polygon);
  double sum = 0.0;
  for (double a : angles) sum += a;
  return (static_cast<double>(angles.size()) - 2.0) * pi - sum;
}

GeodesicPolygon dirichlet_domain(const FuchsianGroup& group, Complex basepoint, int wordRadius,
                                 const DirichletOptions& options) {
  if (wordRadius < 2) throw LogicError("dirichlet_domain: wordRadius must be >= 2");
  if (!(std::abs(basepoint) < 1.0)) throw LogicError("dirichlet_domain: basepoint outside the disk");
  if (group.model() != Model::Disk) throw LogicError("dirichlet_domain: expects a disk-model group");

  const double unbounded = std::numeric_limits<double>::infinity();
  bool fixedPoint = false;
  GeodesicPolygon poly = build(group, basepoint, wordRadius, unbounded, fixedPoint);
  if (fixedPoint) {
    basepoint += Complex(1e-3, 0.0);
    poly = build(group, basepoint, wordRadius, unbounded, fixedPoint);
    if (fixedPoint) throw NumericalError("dirichlet_domain: basepoint fixed by a group element");
  }
  if (!options.checkStability) return poly;

  // Only orbit points within twice the circumradius can cut the domain.
  const double reach = 2.0 * max_vertex_distance(poly) + 1e-6;
  GeodesicPolygon wider = build(group, basepoint, wordRadius + 1, reach, fixedPoint);
  bool stable = wider.size() == poly.size();
  if (stable) {
    // Same cyclic vertex order up to rotation.
    std::size_t shift = 0;
    double best = unbounded;
    for (std::size_t s = 0; s < poly.size(); ++s) {
      const double d = std::abs(wider.vertices[s] - poly.vertices[0]);
      if (d < best) {
        best = d;
        shift = s;
      }
    }
    for (std::size_t i = 0; i < poly.size() && stable; ++i)
      stable = std::abs(wider.vertex(i + shift) - poly.vertices[i]) <= options.stabilityTol;
  }
  if (!stable) {
    std::ostringstream os;
    os << "dirichlet_domain: domain not stable at wordRadius " << wordRadius << ", increase wordRadius";
    throw NumericalError(os.str());
  }
  return poly;
}

GeodesicPolygon escalating_dirichlet_domain(const FuchsianGroup& group, int wordRadius, int maxRadius) {
  for (int r = wordRadius;; ++r) {
    try {
      return dirichlet_domain(group, {0.0, 0.0}, r);
    } catch (const NumericalError& e) {
      if (r >= maxRadius || std::string(e.what()).find("increase wordRadius") == std::string::npos) throw;
    }
  }
}

int default_word_radius(const FNCoords& coords) { return coords.min_length() < 0.5 ? 6 : 3; }

}  // namespace ylab
