#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/QR>

#include "ylab/pathscan.hpp"

using namespace ylab;

namespace {

double brute_force_best(const Eigen::MatrixXd& w) {
  std::vector<int> perm(static_cast<std::size_t>(w.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1e300;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += w(static_cast<Eigen::Index>(i), perm[i]);
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double total(const Eigen::MatrixXd& w, const std::vector<int>& perm) {
  double s = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) s += w(static_cast<Eigen::Index>(i), perm[i]);
  return s;
}

SparseMatrix identity(Eigen::Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  return I;
}

SpectrumResult with_vectors(const Eigen::MatrixXd& X) {
  SpectrumResult s;
  s.eigenvectors = X;
  s.eigenvalues = Eigen::VectorXd::LinSpaced(X.cols(), 0.0, 1.0);
  s.residuals = Eigen::VectorXd::Zero(X.cols());
  return s;
}

}  // namespace

TEST_CASE("bisection on simple crossings") {
  const auto lin = refine_crossing([](double t) { return t - 0.3; }, 0.0, 1.0, 1e-10);
  REQUIRE(lin.size() == 1);
  CHECK(lin[0].tStar == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(lin[0].slope == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(lin[0].bracketHi - lin[0].bracketLo < 1e-10);
  // A tangency has no sign change.
  CHECK_THROWS_AS(refine_crossing([](double t) { return (t - 0.5) * (t - 0.5); }, 0.0, 1.0, 1e-10), NumericalError);
  CHECK_THROWS_AS(refine_crossing([](double t) { return t + 1.0; }, 0.0, 1.0, 1e-10), NumericalError);
  // Three roots, one per presampled piece.
  const auto cubic = refine_crossing([](double t) { return (t - 0.1) * (t - 0.45) * (t - 0.9); }, 0.0, 1.0, 1e-10);
  REQUIRE(cubic.size() == 3);
  CHECK(cubic[0].tStar == doctest::Approx(0.1).epsilon(1e-8));
  CHECK(cubic[1].tStar == doctest::Approx(0.45).epsilon(1e-8));
  CHECK(cubic[2].tStar == doctest::Approx(0.9).epsilon(1e-8));
  CHECK(cubic[0].slope > 0.0);
  CHECK(cubic[1].slope < 0.0);
}

TEST_CASE("assignment matches brute force") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 1; k <= 6; ++k)
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXd w(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) w(i, j) = u(rng);
      const auto perm = max_weight_assignment(w);
      std::vector<int> sorted = perm;
      std::sort(sorted.begin(), sorted.end());
      for (int i = 0; i < k; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
      CHECK(total(w, perm) == doctest::Approx(brute_force_best(w)).epsilon(1e-12));
    }
  CHECK_THROWS_AS(max_weight_assignment(Eigen::MatrixXd(2, 3)), LogicError);
}

TEST_CASE("branch matching") {
  std::mt19937 rng(9);
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(12, 5);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
  const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ() * Eigen::MatrixXd::Identity(12, 5);
  const SparseMatrix I = identity(12);

  const Matching same = match_eigenbranches(Q, with_vectors(Q), I);
  for (int i = 0; i < 5; ++i) CHECK(same.permutation[static_cast<std::size_t>(i)] == i);
  CHECK(!same.flagged);

  Eigen::MatrixXd swapped = Q;
  swapped.col(1).swap(swapped.col(3));
  swapped.col(2) *= -1.0;
  const Matching sw = match_eigenbranches(Q, with_vectors(swapped), I);
  CHECK(sw.permutation == std::vector<int>{0, 3, 2, 1, 4});
  for (double o : sw.overlaps) CHECK(o == doctest::Approx(1.0).epsilon(1e-12));

  // A 45 degree rotation of two columns: overlaps 1/sqrt 2, still above 0.5.
  Eigen::MatrixXd rot = Q;
  rot.col(0) = (Q.col(0) + Q.col(1)) / std::sqrt(2.0);
  rot.col(1) = (Q.col(0) - Q.col(1)) / std::sqrt(2.0);
  const Matching r = match_eigenbranches(Q, with_vectors(rot), I);
  const Eigen::MatrixXd w = (Q.transpose() * rot).array().square();
  CHECK(total(w, r.permutation) == doctest::Approx(brute_force_best(w)).epsilon(1e-12));
  CHECK(!r.flagged);
  // Ties go to eigenvalue order.
  CHECK(r.permutation[0] == 0);
  CHECK(r.permutation[1] == 1);

  // Three-way mixing drops an overlap below the minimum.
  Eigen::MatrixXd mix = Q;
  mix.col(0) = (Q.col(0) + Q.col(1) + Q.col(2)) / std::sqrt(3.0);
  mix.col(1) = (Q.col(0) - Q.col(1)) / std::sqrt(2.0);
  mix.col(2) = (Q.col(0) + Q.col(1) - 2.0 * Q.col(2)) / std::sqrt(6.0);
  CHECK(match_eigenbranches(Q, with_vectors(mix), I, 0.9).flagged);
}

TEST_CASE("path interpolation") {
  const PathSpec path{{{3, 2, 2}, {0, 0.4, 0}, 2}, {{0.3, 2, 2}, {0, -0.4, 0}, 2}, 20};
  CHECK(path.at(0.0).lengths == path.start.lengths);
  CHECK(path.at(1.0).lengths == path.end.lengths);
  CHECK(path.at(0.5).lengths[0] == doctest::Approx(std::sqrt(0.9)).epsilon(1e-14));
  CHECK(path.at(0.5).twists[1] == doctest::Approx(0.0));
  CHECK(path.at(0.25).twists[1] == doctest::Approx(0.2).epsilon(1e-14));
  for (int i = 0; i < 10; ++i) CHECK(path.at(i / 9.0).min_length() >= kPinchingFloor);
  PathSpec low = path;
  low.end.lengths[0] = 0.05;
  CHECK_THROWS_AS(low.validate(), LogicError);
  PathSpec one = path;
  one.sampleCount = 1;
  CHECK_THROWS_AS(one.validate(), LogicError);
}

TEST_CASE("m = 4 is refused") {
  const PathSpec path{{{3, 2, 2}, {0, 0, 0}, 2}, {{0.3, 2, 2}, {0, 0, 0}, 2}, 20};
  CHECK_THROWS_WITH_AS(scan_path(path, make_params(4), 10), doctest::Contains("refusing to scan"), LogicError);
}

TEST_CASE("constant path") {
  const FNCoords c{{2, 2, 2}, {0, 0, 0}, 2};
  ScanOptions o;
  o.sample.hTarget = 0.2;
  const ScanReport r = scan_path({c, c, 3}, make_params(5), 10, o);
  CHECK(r.crossings.empty());
  REQUIRE(r.spectra.size() == 3);
  CHECK((r.spectra[0] - r.spectra[2]).cwiseAbs().maxCoeff() == 0.0);
  for (int i : r.indexProfile) CHECK(i == r.indexProfile.front());
  for (const auto& b : r.track.branches)
    for (double v : b) CHECK(v == doctest::Approx(b.front()).epsilon(1e-12));
}

TEST_CASE("coarse pinching scan") {
  const PathSpec path{{{3, 2, 2}, {0, 0, 0}, 2}, {{0.3, 2, 2}, {0, 0, 0}, 2}, 8};
  ScanOptions o;
  o.sample.hTarget = 0.2;
  const ScanReport r = scan_path(path, make_params(5), 10, o);
  CHECK(r.endReport.morseIndex > r.startReport.morseIndex);
  CHECK(r.indexProfile.front() == r.startReport.morseIndex);
  CHECK(r.indexProfile.back() == r.endReport.morseIndex);
  // Each simple crossing changes the index by one; downward crossings add.
  int net = 0;
  for (const auto& e : r.crossings) net += e.slope < 0.0 ? 1 : -1;
  CHECK(net == r.endReport.morseIndex - r.startReport.morseIndex);
  CHECK(r.crossings.size() % 2 == static_cast<std::size_t>(std::abs(net) % 2));
  for (const auto& e : r.crossings) {
    CHECK(e.tStar >= e.bracketLo);
    CHECK(e.tStar <= e.bracketHi);
  }
}

TEST_CASE("small eigenvalues follow the collar") {
  // The endpoint spectrum moves continuously under a tiny change of length.
  ScanOptions o;
  o.sample.hTarget = 0.2;
  const SurfaceSample a = compute_sample({{0.3, 2, 2}, {0, 0, 0}, 2}, 6, o.sample);
  const SurfaceSample b = compute_sample({{0.3 * (1 + 1e-4), 2, 2}, {0, 0, 0}, 2}, 6, o.sample);
  CHECK(std::abs(a.spectrum.eigenvalues[1] - b.spectrum.eigenvalues[1]) < 1e-2 * a.spectrum.eigenvalues[1]);
  CHECK(a.spectrum.eigenvalues[1] < 0.25);
}
