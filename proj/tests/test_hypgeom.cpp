#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "ylab/hypgeom.hpp"

using namespace ylab;

namespace {

Mobius translation(double t) {
  Eigen::Matrix2d m;
  m << std::exp(t / 2), 0.0, 0.0, std::exp(-t / 2);
  return Mobius(m, Model::Disk);
}

Mobius random_map(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Eigen::Matrix2d m;
  do m << u(rng), u(rng), u(rng), u(rng);
  while (m.determinant() < 0.1);
  return Mobius(m, Model::Disk);
}

double max_entry_diff(const Mobius& f, const Mobius& g) {
  // Projective: compare up to sign.
  return std::min((f.matrix() - g.matrix()).cwiseAbs().maxCoeff(), (f.matrix() + g.matrix()).cwiseAbs().maxCoeff());
}

// Independent enumeration of freely reduced words, multiplied out in long double.
void words(const FuchsianGroup& g, int maxLen, Word& w, const Eigen::Matrix<long double, 2, 2>& m,
           const std::function<void(const Word&, const Eigen::Matrix<long double, 2, 2>&)>& visit) {
  if (!w.empty()) visit(w, m);
  if (static_cast<int>(w.size()) == maxLen) return;
  const int k = static_cast<int>(g.generators().size());
  for (int l = -k; l <= k; ++l) {
    if (l == 0 || (!w.empty() && w.back() == -l)) continue;
    const auto& gen = g.generators_ext()[static_cast<std::size_t>(std::abs(l) - 1)];
    const Eigen::Matrix<long double, 2, 2> gm = l > 0 ? gen.matrix() : gen.inverse().matrix();
    w.push_back(l);
    words(g, maxLen, w, m * gm, visit);
    w.pop_back();
  }
}

double oracle_systole(const FuchsianGroup& g, int maxLen) {
  double best = 1e300;
  Word w;
  words(g, maxLen, w, Eigen::Matrix<long double, 2, 2>::Identity(), [&](const Word&, const auto& m) {
    const long double t = std::abs(m.trace());
    if (t > 2.0L) best = std::min(best, static_cast<double>(2.0L * std::acosh(t / 2.0L)));
  });
  return best;
}

}  // namespace

TEST_CASE("composition with identity and inverse") {
  std::mt19937 rng(3);
  for (int i = 0; i < 20; ++i) {
    const Mobius g = random_map(rng);
    CHECK(max_entry_diff(Mobius::Identity() * g, g) < 1e-15);
    CHECK((g * g.inverse()).distance_to_identity() < 1e-12);
    CHECK(std::abs(g.matrix().determinant() - 1.0) < 1e-12);
  }
}

TEST_CASE("composition is associative") {
  std::mt19937 rng(5);
  for (int i = 0; i < 20; ++i) {
    const Mobius a = random_map(rng), b = random_map(rng), c = random_map(rng);
    CHECK(max_entry_diff((a * b) * c, a * (b * c)) < 1e-12);
  }
}

TEST_CASE("mismatched model tags are rejected") {
  const Mobius a = translation(1.0);
  CHECK_THROWS_AS(compose(a, a.with_model(Model::UpperHalfPlane)), LogicError);
  CHECK(model_from_string(to_string(Model::UpperHalfPlane)) == Model::UpperHalfPlane);
}

TEST_CASE("translations along a common axis add their lengths") {
  std::mt19937 rng(7);
  for (double l1 : {0.3, 1.0, 2.5})
    for (double l2 : {0.1, 0.7, 3.0}) {
      const Mobius g = random_map(rng);
      const Mobius f1 = g * translation(l1) * g.inverse();
      const Mobius f2 = g * translation(l2) * g.inverse();
      // Trace of the product by hand.
      const auto& A = f1.matrix();
      const auto& B = f2.matrix();
      const double trace = A(0, 0) * B(0, 0) + A(0, 1) * B(1, 0) + A(1, 0) * B(0, 1) + A(1, 1) * B(1, 1);
      CHECK(trace == doctest::Approx(2 * std::cosh((l1 + l2) / 2)).epsilon(1e-12));
      CHECK(translation_length(f1 * f2) == doctest::Approx(l1 + l2).epsilon(1e-10));
    }
}

TEST_CASE("translation length") {
  CHECK(std::abs(translation_length(translation(1.0)) - 1.0) < 1e-12);
  CHECK_THROWS_WITH_AS(translation_length(Mobius::Identity()), doctest::Contains("not hyperbolic"), NumericalError);
  std::mt19937 rng(11);
  const Mobius f = translation(1.7);
  for (int i = 0; i < 20; ++i) {
    const Mobius g = random_map(rng);
    CHECK(std::abs(translation_length(f) - translation_length(g * f * g.inverse())) < 1e-10);
  }
}

TEST_CASE("disk action agrees with the Cayley transform") {
  const Mobius f = translation(1.0);
  // Translation along the real diameter moves 0 to tanh(1/2).
  CHECK(std::abs(f(Complex(0, 0)) - Complex(std::tanh(0.5), 0)) < 1e-14);
  CHECK(std::abs(disk_distance(Complex(0, 0), f(Complex(0, 0))) - 1.0) < 1e-12);
  const Complex p(0.3, -0.4);
  CHECK(std::abs(disk_recentering(p)(p)) < 1e-14);
  const Complex q = disk_geodesic_point(p, Complex(-0.5, 0.2), 0.8);
  CHECK(disk_distance(p, q) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("Bolza group") {
  const FuchsianGroup g = bolza_group();
  CHECK(g.generators().size() == 4);
  CHECK(g.relator_deviation() < 1e-12);
  CHECK(g.cyclic_relator_deviation() < 1e-12);
  for (const auto& a : g.generators()) CHECK(std::abs(a.trace()) > 2.0);
  const double expected = 2 * std::acosh(1 + std::sqrt(2.0));
  CHECK(oracle_systole(g, 4) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(shortest_translation(g, 4).length == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("word enumeration is complete and freely reduced") {
  const FuchsianGroup g = bolza_group();
  const auto all = enumerate_words(g, 3);
  // 8 + 8*7 + 8*49 reduced words.
  CHECK(all.size() == 8 + 56 + 392);
  for (const auto& e : all)
    for (std::size_t i = 1; i < e.word.size(); ++i) CHECK(e.word[i] != -e.word[i - 1]);
}

TEST_CASE("groups from Fenchel-Nielsen coordinates") {
  const std::vector<FNCoords> corpus{
      {{2, 2, 2}, {0, 0, 0}, 2},       {{1.5, 1.5, 1.5}, {0, 0, 0}, 2},   {{0.3, 2, 2}, {0, 0, 0}, 2},
      {{2, 0.3, 2}, {0.5, -0.2, 0}, 2}, {{4, 4, 4}, {1, 1, 1}, 2},         {{1, 1, 1}, {0.5, 0.5, 0.5}, 2},
      {{0.15, 2, 2}, {0, 0, 0}, 2},     {{3, 1, 0.5}, {-0.3, 0.8, 1.2}, 2}};
  for (const auto& c : corpus) {
    CAPTURE(c.lengths[0]);
    CAPTURE(c.lengths[1]);
    const FuchsianGroup g = fn_to_group(c);
    CHECK(g.generators().size() == 4);
    CHECK(g.relator_deviation() < 1e-9);
    CHECK(g.cyclic_relator_deviation() < 1e-9);
    for (const auto& a : g.generators()) CHECK(std::abs(a.trace()) > 2.0);
    CHECK(oracle_systole(g, 4) <= c.min_length() * (1 + 1e-6));
  }
}

TEST_CASE("short pants curves are the systole") {
  // The collar lemma keeps crossing curves long when l is small; at l = 2 they are not.
  for (double l : {0.5, 1.0}) {
    const FuchsianGroup g = fn_to_group({{l, l, l}, {0, 0, 0}, 2});
    CHECK(oracle_systole(g, 6) == doctest::Approx(l).epsilon(1e-6));
  }
  CHECK(oracle_systole(fn_to_group({{2, 2, 2}, {0, 0, 0}, 2}), 6) < 2.0);
  const FuchsianGroup pinched = fn_to_group({{0.3, 2, 2}, {0, 0, 0}, 2});
  CHECK(oracle_systole(pinched, 4) == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("generators depend continuously on the coordinates") {
  const FNCoords base{{1.2, 2.1, 1.7}, {0.3, -0.4, 0.2}, 2};
  const FuchsianGroup g0 = fn_to_group(base);
  const double delta = 1e-7;
  for (int k = 0; k < 6; ++k) {
    FNCoords c = base;
    if (k < 3) c.lengths[static_cast<std::size_t>(k)] += delta;
    else c.twists[static_cast<std::size_t>(k - 3)] += delta;
    const FuchsianGroup g1 = fn_to_group(c);
    for (std::size_t i = 0; i < 4; ++i) CHECK(max_entry_diff(g0.generators()[i], g1.generators()[i]) <= 1e3 * delta);
  }
}

TEST_CASE("invalid coordinates") {
  CHECK_THROWS_AS(fn_to_group({{0.0, 2, 2}, {0, 0, 0}, 2}), LogicError);
  CHECK_THROWS_AS(fn_to_group({{1, 2, 2}, {0, 0, 0}, 3}), LogicError);
}
