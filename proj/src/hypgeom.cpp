#include "ylab/hypgeom.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

namespace ylab {

namespace {

// Group construction runs in extended precision: the conjugations that glue
// the two tori involve matrices of norm ~e^{collar length}, and rounding them
// in double would spoil the relator.
using Real = long double;
using MobiusX = MobiusMap<Real>;
using MatrixX = MobiusX::Matrix2;

MobiusX uhp(const MatrixX& m) { return MobiusX(m, Model::UpperHalfPlane); }

MobiusX diag_translation(Real length) {
  MatrixX m;
  m << std::exp(length / 2), 0, 0, std::exp(-length / 2);
  return uhp(m);
}

// Translation by `length` along the unit semicircle, which meets the
// imaginary axis orthogonally at i.
MobiusX circle_translation(Real length) {
  MatrixX m;
  m << std::cosh(length / 2), std::sinh(length / 2), std::sinh(length / 2), std::cosh(length / 2);
  return uhp(m);
}

Real checked_acosh(Real x, const char* what) {
  if (!std::isfinite(x) || x < 1.0L) {
    std::ostringstream os;
    os << "fn_to_group: degenerate hexagon (" << what << " = " << static_cast<double>(x) << ")";
    throw NumericalError(os.str());
  }
  return std::acosh(x);
}

// Generators (a, b) of a one-holed torus whose non-separating curve has
// length `alpha` and twist `twist`, bounded by a geodesic of length `delta`.
// The axis of a is the imaginary axis; [a,b] translates along the boundary.
std::pair<MobiusX, MobiusX> one_holed_torus(Real alpha, Real twist, Real delta) {
  // Right-angled hexagon of the pants (alpha, alpha, delta): distance between
  // the two copies of the alpha boundary.
  const Real sa = std::sinh(alpha / 2);
  const Real ca = std::cosh(alpha / 2);
  const Real coshD = (std::cosh(delta / 2) + ca * ca) / (sa * sa);
  const Real dist = checked_acosh(coshD, "perpendicular distance");
  return {diag_translation(alpha), diag_translation(twist) * circle_translation(dist)};
}

MobiusX commutator(const MobiusX& a, const MobiusX& b) {
  return a * b * a.inverse() * b.inverse();
}

// Image of a projective point [x:y] under m, as an extended real.
Real apply_projective(const MatrixX& m, Real x, Real y) {
  const Real nx = m(0, 0) * x + m(0, 1) * y;
  const Real ny = m(1, 0) * x + m(1, 1) * y;
  return nx / ny;
}

// Isometry S that sends the repelling fixed point of the hyperbolic `x` to 0,
// the attracting one to infinity, and the foot on axis(x) of the common
// perpendicular with the imaginary axis (the axis of the torus's
// non-separating generator) to i.
MobiusX standardize(const MobiusX& x) {
  const MatrixX& m = x.matrix();
  const Real c = m(1, 0);
  if (std::abs(c) < 1e-14L) throw NumericalError("fn_to_group: boundary axis through infinity");
  const Real tr = m.trace();
  const Real disc = std::sqrt(tr * tr - 4);
  const Real z1 = ((m(0, 0) - m(1, 1)) + disc) / (2 * c);
  const Real z2 = ((m(0, 0) - m(1, 1)) - disc) / (2 * c);
  // |x'(z)| = 1/(cz+d)^2 < 1 at the attracting fixed point.
  const bool z1Attracting = std::abs(c * z1 + m(1, 1)) > 1;
  const Real attracting = z1Attracting ? z1 : z2;
  const Real repelling = z1Attracting ? z2 : z1;
  const Real s = repelling - attracting > 0 ? 1 : -1;
  MatrixX s0;
  s0 << s, -s * repelling, 1, -attracting;
  s0 /= std::sqrt(s0.determinant());
  const Real p = apply_projective(s0, 0, 1);
  const Real q = apply_projective(s0, 1, 0);
  if (!(p * q > 0)) throw NumericalError("fn_to_group: torus axis crosses its boundary axis");
  const Real foot = std::sqrt(p * q);
  MatrixX scale;
  scale << 1 / std::sqrt(foot), 0, 0, std::sqrt(foot);
  return uhp(scale * s0);
}

}  // namespace

std::string to_string(Model model) { return model == Model::Disk ? "disk" : "uhp"; }

Model model_from_string(const std::string& name) {
  if (name == "disk") return Model::Disk;
  if (name == "uhp") return Model::UpperHalfPlane;
  throw LogicError("unknown model tag '" + name + "'");
}

double disk_distance(Complex z, Complex w) {
  const double r = std::abs(z - w) / std::abs(1.0 - std::conj(z) * w);
  return 2.0 * std::atanh(std::min(r, 1.0 - 1e-16));
}

Mobius disk_recentering(Complex p) {
  Mobius::ComplexMatrix2 u;
  u << 1.0, -p, -std::conj(p), 1.0;
  return Mobius::FromDiskMatrix(u);
}

Complex disk_geodesic_point(Complex from, Complex to, double s) {
  const Mobius center = disk_recentering(from);
  const Complex direction = center(to);
  const double r = std::abs(direction);
  if (r == 0.0) return from;
  const Complex local = std::tanh(s / 2) * direction / r;
  return center.inverse()(local);
}

void FNCoords::validate() const {
  if (genus != 2) throw LogicError("FNCoords: only genus 2 is supported");
  for (double l : lengths)
    if (!(l > 0) || !std::isfinite(l)) throw LogicError("FNCoords: lengths must be positive");
  for (double t : twists)
    if (!std::isfinite(t)) throw LogicError("FNCoords: twists must be finite");
}

double FNCoords::min_length() const { return *std::min_element(lengths.begin(), lengths.end()); }

FuchsianGroup::FuchsianGroup(std::vector<MobiusExt> generators, Word relator, int genus)
    : exact_(std::move(generators)), relator_(std::move(relator)), genus_(genus) {
  if (exact_.empty()) throw LogicError("FuchsianGroup: no generators");
  for (const auto& g : exact_) {
    if (g.model() != exact_.front().model())
      throw LogicError("FuchsianGroup: generators in different models");
    generators_.push_back(g.cast<double>());
  }
  for (int l : relator_)
    if (l == 0 || std::abs(l) > static_cast<int>(exact_.size()))
      throw LogicError("FuchsianGroup: relator letter out of range");
  relator_deviation_ = static_cast<double>(evaluate_ext(relator_).distance_to_identity());
}

namespace {
std::vector<MobiusExt> widen(const std::vector<Mobius>& gens) {
  std::vector<MobiusExt> out;
  for (const auto& g : gens) out.push_back(g.cast<long double>());
  return out;
}
}  // namespace

FuchsianGroup::FuchsianGroup(const std::vector<Mobius>& generators, Word relator, int genus)
    : FuchsianGroup(widen(generators), std::move(relator), genus) {}

MobiusExt FuchsianGroup::letter(int l) const {
  const MobiusExt& g = exact_.at(static_cast<std::size_t>(std::abs(l) - 1));
  return l > 0 ? g : g.inverse();
}

MobiusExt FuchsianGroup::evaluate_ext(std::span<const int> word) const {
  MobiusExt result = MobiusExt::Identity(model());
  for (int l : word) result = result * letter(l);
  return result;
}

double FuchsianGroup::cyclic_relator_deviation() const {
  long double worst = 0.0L;
  Word rotated = relator_;
  for (std::size_t k = 0; k < relator_.size(); ++k) {
    worst = std::max(worst, evaluate_ext(rotated).distance_to_identity());
    std::rotate(rotated.begin(), rotated.begin() + 1, rotated.end());
  }
  return static_cast<double>(worst);
}

FuchsianGroup FuchsianGroup::conjugated(const Mobius& by) const {
  const MobiusExt c = by.cast<long double>();
  const MobiusExt inv = c.inverse();
  std::vector<MobiusExt> gens;
  gens.reserve(exact_.size());
  for (const auto& g : exact_) gens.push_back(c * g * inv);
  return FuchsianGroup(std::move(gens), relator_, genus_);
}

namespace {
void visit_words(const FuchsianGroup& group, int maxLength, Word& word, const MobiusExt& value,
                 const std::function<void(const Word&, const MobiusExt&)>& visit) {
  const int ngen = static_cast<int>(group.generators().size());
  for (int k = 1; k <= ngen; ++k) {
    for (int l : {k, -k}) {
      if (!word.empty() && word.back() == -l) continue;
      word.push_back(l);
      const MobiusExt next = value * group.letter(l);
      visit(word, next);
      if (static_cast<int>(word.size()) < maxLength) visit_words(group, maxLength, word, next, visit);
      word.pop_back();
    }
  }
}
}  // namespace

void for_each_word(const FuchsianGroup& group, int maxLength,
                   const std::function<void(const Word&, const MobiusExt&)>& visit) {
  Word word;
  visit_words(group, maxLength, word, MobiusExt::Identity(group.model()), visit);
}

std::vector<GroupElement> enumerate_words(const FuchsianGroup& group, int maxLength) {
  const int ngen = static_cast<int>(group.generators().size());
  std::vector<int> letters;
  for (int k = 1; k <= ngen; ++k) {
    letters.push_back(k);
    letters.push_back(-k);
  }
  struct Partial {
    Word word;
    MobiusExt map;
  };
  std::vector<GroupElement> out;
  std::vector<Partial> frontier{{Word{}, MobiusExt::Identity(group.model())}};
  for (int len = 1; len <= maxLength; ++len) {
    std::vector<Partial> next;
    next.reserve(frontier.size() * (letters.size() - 1));
    for (const auto& e : frontier) {
      for (int l : letters) {
        if (!e.word.empty() && e.word.back() == -l) continue;
        Partial g{e.word, e.map * group.letter(l)};
        g.word.push_back(l);
        out.push_back({g.word, g.map.cast<double>(), g.map.trace()});
        next.push_back(std::move(g));
      }
    }
    frontier = std::move(next);
  }
  return out;
}

SystoleEstimate shortest_translation(const FuchsianGroup& group, int maxLength) {
  SystoleEstimate best{std::numeric_limits<double>::infinity(), {}};
  for (const auto& e : enumerate_words(group, maxLength)) {
    // Conjugates repeat shorter words and only add rounding.
    if (e.word.size() > 1 && e.word.front() == -e.word.back()) continue;
    const long double t = std::abs(e.trace);
    if (t <= 2.0L + 1e-12L) continue;
    const double len = static_cast<double>(2 * std::acosh(t / 2));
    if (len < best.length - 1e-13) best = {len, e.word};
  }
  return best;
}

FuchsianGroup fn_to_group(const FNCoords& coords) {
  coords.validate();
  std::array<Real, 3> len;
  std::array<Real, 3> tw;
  for (int k = 0; k < 3; ++k) {
    len[k] = coords.lengths[k];
    tw[k] = coords.twists[k];
  }

  auto [a1, b1] = one_holed_torus(len[1], tw[1], len[0]);
  auto [a2p, b2p] = one_holed_torus(len[2], tw[2], len[0]);
  const MobiusX d1 = commutator(a1, b1);
  const MobiusX d2p = commutator(a2p, b2p);

  // Standard position: the separating geodesic is the imaginary axis
  // (translating towards 0) and the foot of the perpendicular from axis(a1)
  // is i, the image of the disk origin. The second torus is conjugated onto
  // the far side of that axis with its boundary element matching d1^{-1},
  // shifted along the axis by the separating twist.
  const MobiusX s1 = standardize(d1.inverse());
  const MobiusX glue = diag_translation(tw[0]) * standardize(d2p);

  std::vector<MobiusExt> gens;
  for (const MobiusX& g : {s1 * a1 * s1.inverse(), s1 * b1 * s1.inverse(),
                           glue * a2p * glue.inverse(), glue * b2p * glue.inverse()})
    gens.push_back(g.with_model(Model::Disk));
  FuchsianGroup group(std::move(gens), Word{1, 2, -1, -2, 3, 4, -3, -4}, 2);
  if (!(group.relator_deviation() < 1e-9)) {
    std::ostringstream os;
    os << "fn_to_group: relator deviation " << group.relator_deviation();
    throw NumericalError(os.str());
  }
  return group;
}

FuchsianGroup bolza_group() {
  using std::numbers::pi_v;
  const Real half = std::acosh(1 + std::numbers::sqrt2_v<Real>);  // half translation length
  MobiusX::ComplexMatrix2 shift;
  shift << std::cosh(half), std::sinh(half), std::sinh(half), std::cosh(half);
  std::vector<MobiusExt> gens;
  for (int k = 0; k < 4; ++k) {
    const Real theta = k * pi_v<Real> / 4;
    MobiusX::ComplexMatrix2 rot = MobiusX::ComplexMatrix2::Zero();
    rot(0, 0) = std::polar(Real(1), theta / 2);
    rot(1, 1) = std::polar(Real(1), -theta / 2);
    gens.push_back(MobiusX::FromDiskMatrix(rot * shift * rot.adjoint()));
  }
  return FuchsianGroup(std::move(gens), Word{1, -2, 3, -4, -1, 2, -3, 4}, 2);
}

}  // namespace ylab
