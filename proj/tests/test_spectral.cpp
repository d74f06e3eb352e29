#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>
#include <sstream>

#include "ylab/pathscan.hpp"

using namespace ylab;

namespace {

constexpr double kPi = std::numbers::pi;

// Monomials of degree d in k variables, counted by recursion.
long long monomials(int k, int d) {
  if (d < 0) return 0;
  if (k == 1) return 1;
  long long s = 0;
  for (int e = 0; e <= d; ++e) s += monomials(k - 1, d - e);
  return s;
}

const GeodesicPolygon& bolza() {
  static const GeodesicPolygon p = dirichlet_domain(bolza_group());
  return p;
}

}  // namespace

TEST_CASE("operators on the Bolza mesh") {
  const SurfaceMesh mesh = mesh_domain(bolza(), 0.2);
  const Operators ops = assemble_operators(mesh);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(ops.K.rows());
  CHECK((ops.K * one).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(one.dot(ops.M * one) == doctest::Approx(mesh.weighted_area()).epsilon(1e-12));
  CHECK(one.dot(ops.M * one) == doctest::Approx(4 * kPi).epsilon(1e-2));
  const SparseMatrix Kt = ops.K.transpose(), Mt = ops.M.transpose();
  CHECK((ops.K - Kt).norm() < 1e-12 * ops.K.norm());
  CHECK((ops.M - Mt).norm() < 1e-12 * ops.M.norm());
  CHECK(ops.K.rows() == static_cast<Eigen::Index>(mesh.class_count()));
}

TEST_CASE("flat torus eigenvalues converge at second order") {
  std::vector<double> err;
  for (int n : {8, 16, 32}) {
    const SurfaceMesh mesh = flat_torus_mesh(n);
    const Operators ops = assemble_operators(mesh);
    const SpectrumResult s = lowest_eigenpairs(ops.K, ops.M, 8, {.tol = 1e-10});
    const double exact = 4 * kPi * kPi;
    if (n == 32) {
      for (int k = 1; k <= 4; ++k) CHECK(std::abs(s.eigenvalues[k] - exact) / exact < 1e-2);
      // Next level (1,1) at 8 pi^2; the diagonals split it on coarse grids.
      for (int k = 5; k <= 8; ++k) CHECK(s.eigenvalues[k] == doctest::Approx(2 * exact).epsilon(0.05));
    }
    CHECK(s.clusters()[1].second == 4);
    err.push_back(std::abs(s.eigenvalues[1] - exact));
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double ratio = err[i] / err[i + 1];
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);
  }
}

TEST_CASE("eigenvectors are M-orthonormal and reproducible") {
  const SurfaceMesh mesh = mesh_domain(bolza(), 0.2);
  const Operators ops = assemble_operators(mesh);
  const SpectrumResult a = lowest_eigenpairs(ops.K, ops.M, 10, {.seed = 4});
  const SpectrumResult b = lowest_eigenpairs(ops.K, ops.M, 10, {.seed = 4});
  const Eigen::MatrixXd G = a.eigenvectors.transpose() * (ops.M * a.eigenvectors);
  CHECK((G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(a.eigenvalues[0] == 0.0);
  CHECK(a.eigenvectors.col(0).maxCoeff() - a.eigenvectors.col(0).minCoeff() < 1e-12);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.eigenvectors == b.eigenvectors);
  for (Eigen::Index i = 1; i < a.size(); ++i) CHECK(a.eigenvalues[i] >= a.eigenvalues[i - 1]);
  CHECK(a.max_residual() < 1e-8);
}

TEST_CASE("Bolza first eigenvalue is a triple cluster") {
  const SurfaceMesh mesh = mesh_domain(bolza(), 0.1);
  const Operators ops = assemble_operators(mesh);
  const SpectrumResult s = lowest_eigenpairs(ops.K, ops.M, 6);
  const auto clusters = s.clusters();
  REQUIRE(clusters.size() > 1);
  CHECK(clusters[1].second == 3);
  CHECK(clusters[1].first == doctest::Approx(3.838).epsilon(0.03));
}

TEST_CASE("eigensolver failures") {
  const SurfaceMesh mesh = flat_torus_mesh(8);
  const Operators ops = assemble_operators(mesh);
  CHECK_THROWS_AS(lowest_eigenpairs(ops.K, ops.M, 8, {.tol = 1e-30, .maxIterations = 3}), NumericalError);
  CHECK_THROWS_AS(lowest_eigenpairs(ops.K, ops.M, 0), LogicError);
  SurfaceMesh bad = mesh;
  std::swap(bad.triangles[0][0], bad.triangles[0][1]);
  CHECK_THROWS_AS(assemble_operators(bad), NumericalError);
}

TEST_CASE("sphere spectrum") {
  for (int n = 2; n <= 10; ++n) {
    const SphereSpectrum s = sphere_spectrum(n, 5);
    for (int j = 0; j <= 5; ++j) {
      CHECK(s.values[static_cast<std::size_t>(j)] == j * (j + n - 1));
      // Harmonic polynomials: degree-j monomials minus degree-(j-2) ones.
      CHECK(s.multiplicities[static_cast<std::size_t>(j)] == monomials(n + 1, j) - monomials(n + 1, j - 2));
    }
  }
  const SphereSpectrum s3 = sphere_spectrum(3, 3);
  std::ostringstream os;
  write_sphere_csv(s3, os);
  CHECK(os.str() == "0,1\n3,4\n8,9\n15,16\n");
  CHECK_THROWS_AS(sphere_spectrum(1, 3), LogicError);
}

TEST_CASE("product spectrum") {
  const SphereSpectrum s = sphere_spectrum(3, 2);
  Eigen::VectorXd surf(4);
  surf << 0.0, 0.5, 3.0, 6.0;
  const auto none = product_spectrum(s, surf, 0.0);
  REQUIRE(none.size() == 1);
  CHECK(none[0].value == 0.0);
  CHECK(none[0].multiplicity == 1);
  // 3 + 0 (sphere, multiplicity 4) coincides with 0 + 3 (surface).
  const auto p = product_spectrum(s, surf, 3.5);
  REQUIRE(p.size() == 4);
  CHECK(p[2].value == 3.0);
  CHECK(p[2].multiplicity == 5);
  CHECK(p[3].value == 3.5);
  CHECK(p[3].multiplicity == 4);
  CHECK_THROWS_WITH_AS(product_spectrum(s, surf, 20.0), doctest::Contains("extend"), NumericalError);
}
