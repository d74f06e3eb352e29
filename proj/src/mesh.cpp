#include "ylab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <set>

#include "json.hpp"

namespace ylab {

double disk_density(Complex z) {
  const double s = 1.0 - std::norm(z);
  return 4.0 / (s * s);
}

double hyperbolic_edge_length(Complex z, Complex w) {
  const double r = std::abs(z - w) / std::abs(1.0 - std::conj(z) * w);
  return 2.0 * std::atanh(std::min(r, 1.0 - 1e-16));
}

namespace {

double orient(Complex a, Complex b, Complex c) {
  return (b.real() - a.real()) * (c.imag() - a.imag()) - (b.imag() - a.imag()) * (c.real() - a.real());
}

// Positive when p lies inside the circle through the counterclockwise a, b, c.
double incircle(Complex a, Complex b, Complex c, Complex p) {
  const Complex ap = a - p, bp = b - p, cp = c - p;
  const double a2 = std::norm(ap), b2 = std::norm(bp), c2 = std::norm(cp);
  return ap.real() * (bp.imag() * c2 - b2 * cp.imag()) - ap.imag() * (bp.real() * c2 - b2 * cp.real()) +
         a2 * (bp.real() * cp.imag() - bp.imag() * cp.real());
}

Complex circumcenter(Complex a, Complex b, Complex c) {
  const Complex ba = b - a, ca = c - a;
  const double d = 2.0 * (ba.real() * ca.imag() - ba.imag() * ca.real());
  const double b2 = std::norm(ba), c2 = std::norm(ca);
  return a + Complex((ca.imag() * b2 - ba.imag() * c2) / d, (ba.real() * c2 - ca.real() * b2) / d);
}

// Incremental constrained Delaunay triangulation. Boundary edges carry
// neighbor -1 and are never crossed by a cavity.
class Triangulation {
 public:
  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nb;  // nb[k] lies across the edge opposite v[k]
    bool alive = true;
  };

  enum class Status { Inserted, Outside, Encroaches, Degenerate };
  struct Result {
    Status status = Status::Inserted;
    int u = -1, w = -1;  // offending boundary edge
    int node = -1;
    std::vector<int> created;
  };

  std::vector<Complex> pts;
  std::vector<Tri> tris;

  Triangulation() {
    pts = {Complex(-4.0, -3.0), Complex(4.0, -3.0), Complex(0.0, 5.0)};
    tris.push_back({{0, 1, 2}, {-1, -1, -1}, true});
  }

  Complex edge_start(int t, int k) const { return pts[static_cast<std::size_t>(tris[t].v[(k + 1) % 3])]; }
  Complex edge_end(int t, int k) const { return pts[static_cast<std::size_t>(tris[t].v[(k + 2) % 3])]; }

  // Walks towards p. Returns the containing triangle, or -(1 + 3t + k) when
  // the walk leaves the domain through edge k of triangle t.
  int locate(Complex p, int start) const {
    int t = start;
    if (t < 0 || !tris[static_cast<std::size_t>(t)].alive) t = any_alive();
    for (std::size_t step = 0; step < 4 * tris.size() + 16; ++step) {
      const Tri& tr = tris[static_cast<std::size_t>(t)];
      int next = -2;
      for (int j = 0; j < 3; ++j) {
        const int k = static_cast<int>((step + static_cast<std::size_t>(j)) % 3);
        if (orient(edge_start(t, k), edge_end(t, k), p) < 0.0) {
          next = tr.nb[k];
          if (next < 0) return -(1 + 3 * t + k);
          break;
        }
      }
      if (next == -2) return t;
      t = next;
    }
    throw NumericalError("mesh_domain: point location did not terminate");
  }

  int any_alive() const {
    for (std::size_t t = tris.size(); t-- > 0;)
      if (tris[t].alive) return static_cast<int>(t);
    throw LogicError("mesh_domain: empty triangulation");
  }

  // Bowyer-Watson insertion of p starting from the triangle `start` that
  // contains it. With `open` set, the boundary edge (open.u, open.w) of
  // `start` is removed and replaced by u-p-w (segment split).
  Result insert(Complex p, int start, bool checkEncroach, std::array<int, 2> open = {-1, -1}) {
    Result res;
    std::vector<int> cavity{start};
    std::set<int> inCavity{start};
    struct Edge {
      int u, w, outer;
    };
    std::vector<Edge> rim;
    bool openSeen = false;
    for (std::size_t c = 0; c < cavity.size(); ++c) {
      const int t = cavity[c];
      for (int k = 0; k < 3; ++k) {
        const Tri& tr = tris[static_cast<std::size_t>(t)];
        const int u = tr.v[(k + 1) % 3], w = tr.v[(k + 2) % 3], n = tr.nb[k];
        if (n < 0) {
          if (u == open[0] && w == open[1]) {
            openSeen = true;
            continue;
          }
          if (checkEncroach) {
            const Complex pu = pts[static_cast<std::size_t>(u)] - p, pw = pts[static_cast<std::size_t>(w)] - p;
            if (pu.real() * pw.real() + pu.imag() * pw.imag() <= 0.0) {
              res.status = Status::Encroaches;
              res.u = u;
              res.w = w;
              return res;
            }
          }
          rim.push_back({u, w, -1});
          continue;
        }
        if (inCavity.count(n)) continue;
        const Tri& nt = tris[static_cast<std::size_t>(n)];
        if (incircle(pts[static_cast<std::size_t>(nt.v[0])], pts[static_cast<std::size_t>(nt.v[1])],
                     pts[static_cast<std::size_t>(nt.v[2])], p) > 0.0) {
          inCavity.insert(n);
          cavity.push_back(n);
        } else {
          rim.push_back({u, w, n});
        }
      }
    }
    if (open[0] >= 0 && !openSeen) {
      res.status = Status::Degenerate;
      return res;
    }
    // The rim must be visible from p.
    for (const Edge& e : rim) {
      const Complex a = pts[static_cast<std::size_t>(e.u)], b = pts[static_cast<std::size_t>(e.w)];
      const double scale = std::norm(b - a) + std::norm(p - a);
      if (!(orient(a, b, p) > 1e-12 * scale)) {
        res.status = Status::Degenerate;
        return res;
      }
    }

    const int node = static_cast<int>(pts.size());
    pts.push_back(p);
    res.node = node;
    std::vector<int> slots = cavity;
    for (int t : cavity) tris[static_cast<std::size_t>(t)].alive = false;
    while (slots.size() < rim.size()) {
      slots.push_back(static_cast<int>(tris.size()));
      tris.push_back({});
    }
    for (std::size_t e = 0; e < rim.size(); ++e) {
      const int t = slots[e];
      tris[static_cast<std::size_t>(t)] = {{rim[e].u, rim[e].w, node}, {-1, -1, rim[e].outer}, true};
      if (rim[e].outer >= 0) {
        Tri& o = tris[static_cast<std::size_t>(rim[e].outer)];
        for (int k = 0; k < 3; ++k)
          if (o.v[(k + 1) % 3] == rim[e].w && o.v[(k + 2) % 3] == rim[e].u) o.nb[k] = t;
      }
      res.created.push_back(t);
    }
    // Fan adjacency: the edge (w, p) of triangle (u, w, p) is shared with the
    // triangle starting at w.
    for (std::size_t e = 0; e < rim.size(); ++e) {
      for (std::size_t f = 0; f < rim.size(); ++f) {
        if (rim[f].u == rim[e].w) tris[static_cast<std::size_t>(slots[e])].nb[0] = slots[f];
        if (rim[f].w == rim[e].u) tris[static_cast<std::size_t>(slots[e])].nb[1] = slots[f];
      }
    }
    return res;
  }

  int find_edge(int u, int w) const {
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const Tri& tr = tris[t];
      if (!tr.alive) continue;
      for (int k = 0; k < 3; ++k)
        if (tr.v[(k + 1) % 3] == u && tr.v[(k + 2) % 3] == w) return static_cast<int>(t);
    }
    return -1;
  }
};

using SegmentKey = std::pair<int, int>;

class DomainMesher {
 public:
  DomainMesher(const GeodesicPolygon& polygon, double h, const MeshOptions& options)
      : poly_(polygon), h_(h), opt_(options) {}

  SurfaceMesh run() {
    place_boundary();
    for (int round = 0;; ++round) {
      if (round > 40) throw NumericalError("mesh_domain: boundary recovery failed");
      build_boundary_triangulation();
      const SegmentKey missing = first_missing_segment();
      if (missing.first < 0) break;
      split_boundary_lists(missing);
    }
    carve_exterior();
    refine();
    return finish();
  }

 private:
  const GeodesicPolygon& poly_;
  double h_;
  MeshOptions opt_;

  // Boundary description in terms of boundary point ids (positions in bpts_).
  std::vector<Complex> bpts_;
  std::vector<std::vector<int>> edgeNodes_;   // per polygon edge, from vertex i to i+1
  std::vector<std::vector<double>> edgePos_;  // hyperbolic arclength from vertex i
  Triangulation tri_;
  std::vector<int> bnode_;                    // boundary point id -> triangulation node
  std::map<SegmentKey, int> segEdge_;         // triangulation segment -> polygon edge

  int add_bpoint(Complex z) {
    bpts_.push_back(z);
    return static_cast<int>(bpts_.size()) - 1;
  }

  void place_boundary() {
    const std::size_t n = poly_.size();
    edgeNodes_.assign(n, {});
    edgePos_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) add_bpoint(poly_.vertices[i]);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = static_cast<std::size_t>(poly_.pairing[i]);
      if (j < i) continue;
      const double len = poly_.edge_length(i);
      const int k = std::max(2, static_cast<int>(std::ceil(len / (0.5 * h_) - 1e-9)));
      std::vector<int> nodesI{static_cast<int>(i)}, nodesJ{static_cast<int>(j)};
      std::vector<double> posI{0.0}, posJ{0.0};
      std::vector<int> interiorJ;
      for (int r = 1; r < k; ++r) {
        const double s = len * r / k;
        const Complex z = disk_geodesic_point(poly_.vertex(i), poly_.vertex(i + 1), s);
        nodesI.push_back(add_bpoint(z));
        posI.push_back(s);
        interiorJ.push_back(add_bpoint(poly_.pairingMaps[i](z)));
      }
      for (int r = k - 1; r >= 1; --r) {
        nodesJ.push_back(interiorJ[static_cast<std::size_t>(r - 1)]);
        posJ.push_back(len - len * r / k);
      }
      nodesI.push_back(static_cast<int>((i + 1) % n));
      posI.push_back(len);
      nodesJ.push_back(static_cast<int>((j + 1) % n));
      posJ.push_back(len);
      edgeNodes_[i] = nodesI;
      edgePos_[i] = posI;
      edgeNodes_[j] = nodesJ;
      edgePos_[j] = posJ;
    }
  }

  void build_boundary_triangulation() {
    tri_ = Triangulation();
    bnode_.assign(bpts_.size(), -1);
    int last = 0;
    for (std::size_t b = 0; b < bpts_.size(); ++b) {
      const int t = tri_.locate(bpts_[b], last);
      if (t < 0) throw NumericalError("mesh_domain: boundary point outside the disk");
      auto res = tri_.insert(bpts_[b], t, false);
      if (res.status != Triangulation::Status::Inserted)
        throw NumericalError("mesh_domain: degenerate boundary point");
      bnode_[b] = res.node;
      last = res.created.front();
    }
    segEdge_.clear();
    for (std::size_t i = 0; i < edgeNodes_.size(); ++i)
      for (std::size_t r = 0; r + 1 < edgeNodes_[i].size(); ++r)
        segEdge_[{bnode_[static_cast<std::size_t>(edgeNodes_[i][r])],
                  bnode_[static_cast<std::size_t>(edgeNodes_[i][r + 1])]}] = static_cast<int>(i);
  }

  SegmentKey first_missing_segment() const {
    std::set<SegmentKey> edges;
    for (const auto& t : tri_.tris) {
      if (!t.alive) continue;
      for (int k = 0; k < 3; ++k) edges.insert({t.v[k], t.v[(k + 1) % 3]});
    }
    for (const auto& [seg, e] : segEdge_)
      if (!edges.count(seg)) return seg;
    return {-1, -1};
  }

  // Splits the boundary segment in the boundary lists only (before carving).
  void split_boundary_lists(const SegmentKey& seg) {
    const int i = segEdge_.at(seg);
    std::size_t r = 0;
    while (bnode_[static_cast<std::size_t>(edgeNodes_[static_cast<std::size_t>(i)][r])] != seg.first) ++r;
    split_in_lists(i, r);
  }

  // Inserts the arc midpoint of segment r of edge i and of its partner into
  // the boundary lists; returns the two new boundary point ids.
  std::array<int, 2> split_in_lists(int i, std::size_t r) {
    const std::size_t ii = static_cast<std::size_t>(i);
    const std::size_t j = static_cast<std::size_t>(poly_.pairing[ii]);
    const std::size_t last = edgeNodes_[j].size() - 1;
    const std::size_t rj = last - r - 1;
    const double s = 0.5 * (edgePos_[ii][r] + edgePos_[ii][r + 1]);
    const Complex z = disk_geodesic_point(poly_.vertex(ii), poly_.vertex(ii + 1), s);
    const int a = add_bpoint(z);
    const int b = add_bpoint(poly_.pairingMaps[ii](z));
    const double len = edgePos_[ii].back();
    edgeNodes_[ii].insert(edgeNodes_[ii].begin() + static_cast<std::ptrdiff_t>(r + 1), a);
    edgePos_[ii].insert(edgePos_[ii].begin() + static_cast<std::ptrdiff_t>(r + 1), s);
    edgeNodes_[j].insert(edgeNodes_[j].begin() + static_cast<std::ptrdiff_t>(rj + 1), b);
    edgePos_[j].insert(edgePos_[j].begin() + static_cast<std::ptrdiff_t>(rj + 1), len - s);
    return {a, b};
  }

  void carve_exterior() {
    auto& tris = tri_.tris;
    std::vector<char> outside(tris.size(), 0);
    std::deque<int> queue;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!tris[t].alive) continue;
      for (int v : tris[t].v)
        if (v < 3) {
          outside[t] = 1;
          queue.push_back(static_cast<int>(t));
          break;
        }
    }
    while (!queue.empty()) {
      const int t = queue.front();
      queue.pop_front();
      for (int k = 0; k < 3; ++k) {
        const auto& tr = tris[static_cast<std::size_t>(t)];
        const int n = tr.nb[k];
        if (n < 0 || outside[static_cast<std::size_t>(n)]) continue;
        const int u = tr.v[(k + 1) % 3], w = tr.v[(k + 2) % 3];
        if (segEdge_.count({w, u})) continue;  // crossing into the domain
        outside[static_cast<std::size_t>(n)] = 1;
        queue.push_back(n);
      }
    }
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!tris[t].alive) continue;
      if (outside[t]) {
        tris[t].alive = false;
        continue;
      }
      for (int k = 0; k < 3; ++k) {
        const int n = tris[t].nb[k];
        if (n >= 0 && outside[static_cast<std::size_t>(n)]) tris[t].nb[k] = -1;
      }
    }
    for (const auto& t : tris)
      if (t.alive)
        for (int k = 0; k < 3; ++k)
          if (t.nb[k] < 0 && !segEdge_.count({t.v[(k + 1) % 3], t.v[(k + 2) % 3]}))
            throw NumericalError("mesh_domain: boundary is not closed");
  }

  double max_edge(int t) const {
    const auto& v = tri_.tris[static_cast<std::size_t>(t)].v;
    double m = 0.0;
    for (int k = 0; k < 3; ++k)
      m = std::max(m, hyperbolic_edge_length(tri_.pts[static_cast<std::size_t>(v[k])],
                                             tri_.pts[static_cast<std::size_t>(v[(k + 1) % 3])]));
    return m;
  }

  double min_angle(int t) const {
    const auto& v = tri_.tris[static_cast<std::size_t>(t)].v;
    double m = std::numbers::pi;
    for (int k = 0; k < 3; ++k) {
      const Complex a = tri_.pts[static_cast<std::size_t>(v[k])];
      const Complex b = tri_.pts[static_cast<std::size_t>(v[(k + 1) % 3])];
      const Complex c = tri_.pts[static_cast<std::size_t>(v[(k + 2) % 3])];
      m = std::min(m, std::abs(std::arg((b - a) / (c - a))));
    }
    return m;
  }

  bool bad(int t) const {
    const double e = max_edge(t);
    if (e > h_) return true;
    return e > 0.25 * h_ && min_angle(t) < opt_.minAngleDeg * std::numbers::pi / 180.0;
  }

  // Splits a boundary segment and its partner; false if either is too short
  // or the split is not possible.
  bool split_segment(int u, int w, std::deque<int>& queue) {
    auto it = segEdge_.find({u, w});
    if (it == segEdge_.end()) return false;
    const int i = it->second;
    const std::size_t ii = static_cast<std::size_t>(i);
    std::size_t r = 0;
    while (bnode_[static_cast<std::size_t>(edgeNodes_[ii][r])] != u) ++r;
    if (edgePos_[ii][r + 1] - edgePos_[ii][r] < opt_.segmentFloor * h_) return false;

    const std::size_t j = static_cast<std::size_t>(poly_.pairing[ii]);
    const std::size_t rj = edgeNodes_[j].size() - 1 - r - 1;
    const int u2 = bnode_[static_cast<std::size_t>(edgeNodes_[j][rj])];
    const int w2 = bnode_[static_cast<std::size_t>(edgeNodes_[j][rj + 1])];

    const auto ids = split_in_lists(i, r);
    bnode_.resize(bpts_.size(), -1);
    const bool ok = insert_on_segment(ids[0], u, w, i, queue) && insert_on_segment(ids[1], u2, w2, static_cast<int>(j), queue);
    if (!ok) throw NumericalError("mesh_domain: boundary segment split failed");
    return true;
  }

  bool insert_on_segment(int bid, int u, int w, int edge, std::deque<int>& queue) {
    const int t = tri_.find_edge(u, w);
    if (t < 0) return false;
    auto res = tri_.insert(bpts_[static_cast<std::size_t>(bid)], t, false, {u, w});
    if (res.status != Triangulation::Status::Inserted) return false;
    bnode_[static_cast<std::size_t>(bid)] = res.node;
    segEdge_.erase({u, w});
    segEdge_[{u, res.node}] = edge;
    segEdge_[{res.node, w}] = edge;
    for (int c : res.created) queue.push_back(c);
    return true;
  }

  void refine() {
    std::deque<int> queue;
    for (std::size_t t = 0; t < tri_.tris.size(); ++t)
      if (tri_.tris[t].alive) queue.push_back(static_cast<int>(t));
    while (!queue.empty()) {
      const int t = queue.front();
      queue.pop_front();
      if (!tri_.tris[static_cast<std::size_t>(t)].alive || !bad(t)) continue;
      if (tri_.pts.size() > opt_.maxNodes)
        throw NumericalError("mesh_domain: node budget exceeded, increase hTarget");
      const auto& v = tri_.tris[static_cast<std::size_t>(t)].v;
      const Complex a = tri_.pts[static_cast<std::size_t>(v[0])], b = tri_.pts[static_cast<std::size_t>(v[1])],
                    c = tri_.pts[static_cast<std::size_t>(v[2])];
      if (try_insert(circumcenter(a, b, c), t, queue)) continue;
      if (!tri_.tris[static_cast<std::size_t>(t)].alive) continue;  // a segment split consumed it
      if (max_edge(t) <= h_) continue;                             // only the angle was poor
      // Fall back to the midpoint of the longest edge.
      int k = 0;
      double best = -1.0;
      for (int e = 0; e < 3; ++e) {
        const double len = hyperbolic_edge_length(tri_.pts[static_cast<std::size_t>(v[e])],
                                                  tri_.pts[static_cast<std::size_t>(v[(e + 1) % 3])]);
        if (len > best) {
          best = len;
          k = e;
        }
      }
      const Complex mid = 0.5 * (tri_.pts[static_cast<std::size_t>(v[k])] + tri_.pts[static_cast<std::size_t>(v[(k + 1) % 3])]);
      try_insert(mid, t, queue);
    }
  }

  // Inserts p, splitting a boundary segment instead when p falls outside or
  // encroaches. Returns true when the mesh changed.
  bool try_insert(Complex p, int from, std::deque<int>& queue) {
    if (!(std::abs(p) < 1.0)) p = tri_.pts[static_cast<std::size_t>(tri_.tris[static_cast<std::size_t>(from)].v[0])];
    const int loc = tri_.locate(p, from);
    if (loc < 0) {
      const int code = -loc - 1;
      const int t = code / 3, k = code % 3;
      const auto& tr = tri_.tris[static_cast<std::size_t>(t)];
      const bool changed = split_segment(tr.v[(k + 1) % 3], tr.v[(k + 2) % 3], queue);
      if (changed) queue.push_back(from);
      return changed;
    }
    auto res = tri_.insert(p, loc, true);
    switch (res.status) {
      case Triangulation::Status::Inserted:
        for (int c : res.created) queue.push_back(c);
        return true;
      case Triangulation::Status::Encroaches: {
        const bool changed = split_segment(res.u, res.w, queue);
        if (changed) queue.push_back(from);
        return changed;
      }
      default:
        return false;
    }
  }

  SurfaceMesh finish() {
    SurfaceMesh mesh;
    const std::size_t np = tri_.pts.size();
    std::vector<int> renumber(np, -1);
    for (std::size_t p = 3; p < np; ++p) {
      renumber[p] = static_cast<int>(mesh.nodes.size());
      mesh.nodes.push_back(tri_.pts[p]);
    }
    for (const auto& t : tri_.tris) {
      if (!t.alive) continue;
      mesh.triangles.push_back({renumber[static_cast<std::size_t>(t.v[0])], renumber[static_cast<std::size_t>(t.v[1])],
                                renumber[static_cast<std::size_t>(t.v[2])]});
    }
    // Gluing classes.
    std::vector<int> parent(mesh.nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) {
        parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        x = parent[static_cast<std::size_t>(x)];
      }
      return x;
    };
    auto node_of = [&](int bid) { return renumber[static_cast<std::size_t>(bnode_[static_cast<std::size_t>(bid)])]; };
    for (std::size_t i = 0; i < edgeNodes_.size(); ++i) {
      const std::size_t j = static_cast<std::size_t>(poly_.pairing[i]);
      const auto& ni = edgeNodes_[i];
      const auto& nj = edgeNodes_[j];
      for (std::size_t r = 0; r < ni.size(); ++r) {
        const int x = node_of(ni[r]);
        const int y = node_of(nj[nj.size() - 1 - r]);
        mesh.glue.push_back({x, y, static_cast<int>(i)});
        const int fx = find(x), fy = find(y);
        if (fx != fy) parent[static_cast<std::size_t>(std::max(fx, fy))] = std::min(fx, fy);
      }
      for (std::size_t r = 0; r + 1 < ni.size(); ++r) mesh.boundary.push_back({node_of(ni[r]), node_of(ni[r + 1])});
    }
    mesh.identClass.resize(mesh.nodes.size());
    for (std::size_t x = 0; x < mesh.nodes.size(); ++x) mesh.identClass[x] = find(static_cast<int>(x));

    mesh.hyperbolic = true;
    for (const auto& t : mesh.triangles) {
      std::array<double, 3> w{};
      for (std::size_t q = 0; q < 3; ++q) {
        Complex z{0.0, 0.0};
        for (std::size_t k = 0; k < 3; ++k) z += kQuadrature[q][k] * mesh.nodes[static_cast<std::size_t>(t[k])];
        w[q] = disk_density(z);
      }
      mesh.weights.push_back(w);
      for (int k = 0; k < 3; ++k)
        mesh.meshSize = std::max(mesh.meshSize, hyperbolic_edge_length(mesh.nodes[static_cast<std::size_t>(t[k])],
                                                                       mesh.nodes[static_cast<std::size_t>(t[(k + 1) % 3])]));
    }
    return mesh;
  }
};

}  // namespace

std::vector<int> SurfaceMesh::dof_index() const {
  std::vector<int> dof(nodes.size(), -1);
  int next = 0;
  for (std::size_t x = 0; x < nodes.size(); ++x) {
    const std::size_t rep = static_cast<std::size_t>(identClass[x]);
    if (dof[rep] < 0) dof[rep] = next++;
    dof[x] = dof[rep];
  }
  return dof;
}

std::size_t SurfaceMesh::class_count() const {
  std::size_t n = 0;
  for (std::size_t x = 0; x < nodes.size(); ++x)
    if (identClass[x] == static_cast<int>(x)) ++n;
  return n;
}

double SurfaceMesh::triangle_area(std::size_t t) const {
  const auto& v = triangles[t];
  return 0.5 * orient(nodes[static_cast<std::size_t>(v[0])], nodes[static_cast<std::size_t>(v[1])],
                      nodes[static_cast<std::size_t>(v[2])]);
}

double SurfaceMesh::weighted_area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t)
    a += triangle_area(t) * (weights[t][0] + weights[t][1] + weights[t][2]) / 3.0;
  return a;
}

SurfaceMesh mesh_domain(const GeodesicPolygon& polygon, double hTarget, const MeshOptions& options) {
  if (!(hTarget > 0.0 && hTarget <= 0.5)) throw LogicError("mesh_domain: hTarget must lie in (0, 0.5]");
  if (!polygon.paired()) throw LogicError("mesh_domain: polygon has no side pairings");
  return DomainMesher(polygon, hTarget, options).run();
}

SurfaceMesh flat_torus_mesh(int n) {
  if (n < 2) throw LogicError("flat_torus_mesh: need n >= 2");
  SurfaceMesh mesh;
  mesh.hyperbolic = false;
  const int s = n + 1;
  auto id = [s](int i, int j) { return j * s + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      mesh.nodes.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
      mesh.identClass.push_back(id(i % n, j % n));
    }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  for (int i = 0; i < n; ++i) {
    mesh.boundary.push_back({id(i, 0), id(i + 1, 0)});
    mesh.boundary.push_back({id(n, i), id(n, i + 1)});
    mesh.boundary.push_back({id(n - i, n), id(n - i - 1, n)});
    mesh.boundary.push_back({id(0, n - i), id(0, n - i - 1)});
  }
  mesh.weights.assign(mesh.triangles.size(), {1.0, 1.0, 1.0});
  mesh.meshSize = std::sqrt(2.0) / n;
  return mesh;
}

int euler_characteristic(const SurfaceMesh& mesh) {
  std::set<std::pair<int, int>> edges;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) edges.insert(std::minmax(t[k], t[(k + 1) % 3]));
  const long v = static_cast<long>(mesh.class_count());
  const long e = static_cast<long>(edges.size()) - static_cast<long>(mesh.boundary.size()) / 2;
  const long f = static_cast<long>(mesh.triangles.size());
  return static_cast<int>(v - e + f);
}

double pairing_defect(const SurfaceMesh& mesh, const GeodesicPolygon& polygon) {
  double worst = 0.0;
  for (const auto& [x, y, e] : mesh.glue) {
    const Complex image = polygon.pairingMaps[static_cast<std::size_t>(e)](mesh.nodes[static_cast<std::size_t>(x)]);
    worst = std::max(worst, std::abs(image - mesh.nodes[static_cast<std::size_t>(y)]));
  }
  return worst;
}

MeshLocator::MeshLocator(const SurfaceMesh& mesh, int cellsPerSide) : mesh_(&mesh) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (Complex z : mesh.nodes) {
    xmin = std::min(xmin, z.real());
    xmax = std::max(xmax, z.real());
    ymin = std::min(ymin, z.imag());
    ymax = std::max(ymax, z.imag());
  }
  cells_ = cellsPerSide > 0 ? cellsPerSide
                            : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.triangles.size()) / 2.0)));
  x0_ = xmin;
  y0_ = ymin;
  dx_ = std::max(1e-12, (xmax - xmin) / cells_);
  dy_ = std::max(1e-12, (ymax - ymin) / cells_);
  buckets_.assign(static_cast<std::size_t>(cells_) * static_cast<std::size_t>(cells_), {});
  auto cell = [&](double v, double o, double d) {
    return std::clamp(static_cast<int>(std::floor((v - o) / d)), 0, cells_ - 1);
  };
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    double tx0 = 1e300, tx1 = -1e300, ty0 = 1e300, ty1 = -1e300;
    for (int v : mesh.triangles[t]) {
      const Complex z = mesh.nodes[static_cast<std::size_t>(v)];
      tx0 = std::min(tx0, z.real());
      tx1 = std::max(tx1, z.real());
      ty0 = std::min(ty0, z.imag());
      ty1 = std::max(ty1, z.imag());
    }
    for (int j = cell(ty0, y0_, dy_); j <= cell(ty1, y0_, dy_); ++j)
      for (int i = cell(tx0, x0_, dx_); i <= cell(tx1, x0_, dx_); ++i)
        buckets_[static_cast<std::size_t>(j * cells_ + i)].push_back(static_cast<int>(t));
  }
}

namespace {

std::array<double, 3> barycentric(const SurfaceMesh& mesh, int t, Complex z) {
  const auto& v = mesh.triangles[static_cast<std::size_t>(t)];
  const Complex a = mesh.nodes[static_cast<std::size_t>(v[0])], b = mesh.nodes[static_cast<std::size_t>(v[1])],
                c = mesh.nodes[static_cast<std::size_t>(v[2])];
  const double area = orient(a, b, c);
  return {orient(z, b, c) / area, orient(a, z, c) / area, orient(a, b, z) / area};
}

}  // namespace

MeshLocator::Hit MeshLocator::locate(Complex z) const {
  const int i = static_cast<int>(std::floor((z.real() - x0_) / dx_));
  const int j = static_cast<int>(std::floor((z.imag() - y0_) / dy_));
  if (i >= 0 && j >= 0 && i < cells_ && j < cells_) {
    for (int t : buckets_[static_cast<std::size_t>(j * cells_ + i)]) {
      const auto bc = barycentric(*mesh_, t, z);
      if (bc[0] >= -1e-12 && bc[1] >= -1e-12 && bc[2] >= -1e-12) return {t, bc};
    }
  }
  return nearest(z);
}

MeshLocator::Hit MeshLocator::nearest(Complex z) const {
  const int ci = std::clamp(static_cast<int>(std::floor((z.real() - x0_) / dx_)), 0, cells_ - 1);
  const int cj = std::clamp(static_cast<int>(std::floor((z.imag() - y0_) / dy_)), 0, cells_ - 1);
  Hit best;
  double bestScore = 1e300;
  for (int ring = 0; ring < cells_; ++ring) {
    for (int j = cj - ring; j <= cj + ring; ++j)
      for (int i = ci - ring; i <= ci + ring; ++i) {
        if (i < 0 || j < 0 || i >= cells_ || j >= cells_) continue;
        if (std::max(std::abs(i - ci), std::abs(j - cj)) != ring) continue;
        for (int t : buckets_[static_cast<std::size_t>(j * cells_ + i)]) {
          const auto bc = barycentric(*mesh_, t, z);
          const double score = -std::min({bc[0], bc[1], bc[2]});
          if (score < bestScore) {
            bestScore = score;
            best = {t, bc};
          }
        }
      }
    if (best.triangle >= 0 && ring >= 1) break;
  }
  if (best.triangle < 0) throw LogicError("MeshLocator: empty mesh");
  // Clamp to the triangle and renormalize.
  for (double& b : best.bary) b = std::max(0.0, b);
  const double s = best.bary[0] + best.bary[1] + best.bary[2];
  for (double& b : best.bary) b /= s;
  return best;
}

void write_mesh_json(const SurfaceMesh& mesh, std::ostream& out) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (Complex z : mesh.nodes) j["nodes"].push_back({z.real(), z.imag()});
  j["triangles"] = mesh.triangles;
  j["identClass"] = mesh.identClass;
  j["weights"] = mesh.weights;
  j["meshSize"] = mesh.meshSize;
  j["hyperbolic"] = mesh.hyperbolic;
  out << j.dump() << '\n';
}

void write_mesh_off(const SurfaceMesh& mesh, std::ostream& out) {
  out << "OFF\n" << mesh.nodes.size() << ' ' << mesh.triangles.size() << " 0\n";
  out.precision(17);
  for (Complex z : mesh.nodes) out << z.real() << ' ' << z.imag() << " 0\n";
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace ylab
