#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "ylab/yamabe.hpp"

using namespace ylab;

namespace {

constexpr double kPi = std::numbers::pi;

struct Fixture {
  SurfaceMesh mesh;
  Operators ops;
};

const Fixture& bolza() {
  static const Fixture f = [] {
    Fixture x;
    x.mesh = mesh_domain(dirichlet_domain(bolza_group()), 0.2);
    x.ops = assemble_operators(x.mesh);
    return x;
  }();
  return f;
}

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

// Eigenvector whose eigenvalue is closest to `target`.
Eigen::VectorXd nearest_mode(const SpectrumResult& s, double target) {
  Eigen::Index best = 1;
  for (Eigen::Index i = 1; i < s.size(); ++i)
    if (std::abs(s.eigenvalues[i] - target) < std::abs(s.eigenvalues[best] - target)) best = i;
  return s.eigenvectors.col(best);
}

}  // namespace

TEST_CASE("constants") {
  CHECK(sphere_volume(2) == doctest::Approx(4 * kPi).epsilon(1e-14));
  CHECK(sphere_volume(3) == doctest::Approx(2 * kPi * kPi).epsilon(1e-14));
  CHECK(sphere_volume(4) == doctest::Approx(8 * kPi * kPi / 3).epsilon(1e-14));
  CHECK(gradient_coefficient(make_params(5)) == doctest::Approx(16.0 / 3.0));
}

TEST_CASE("the constant factor solves the equation") {
  const auto& f = bolza();
  const ModelParams p = make_params(5);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(f.ops.K.rows());
  const Eigen::VectorXd r = yamabe_residual(one, static_cast<double>(p.scalN - 2), f.mesh, f.ops, p);
  CHECK(r.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(dual_norm(r, f.ops.M) < 1e-12);
  // With the surface scaled by 1/theta the constant solution has mu = scalN - 2 theta.
  CHECK(yamabe_residual(one, 6.0 - 2 * 0.4, f.mesh, f.ops, p, 0.4).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("functionals at the constant factor") {
  const auto& f = bolza();
  const ModelParams p = make_params(5);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(f.ops.K.rows());
  const double area = one.dot(f.ops.M * one);
  CHECK(he_functional(one, f.ops, p) == doctest::Approx(2 * kPi * kPi * 4.0 * area).epsilon(1e-12));
  CHECK(he_functional(one, f.ops, p) == doctest::Approx(2 * kPi * kPi * 4.0 * 4 * kPi).epsilon(1e-2));
  CHECK(volume_functional(one, f.mesh, f.ops, p) == doctest::Approx(2 * kPi * kPi * 4 * kPi).epsilon(1e-2));
  std::mt19937 rng(1);
  const Eigen::VectorXd u = one + random_vector(one.size(), rng, 0.3);
  for (double c : {0.5, 2.0, 3.0}) {
    CHECK(he_functional(c * u, f.ops, p) == doctest::Approx(c * c * he_functional(u, f.ops, p)).epsilon(1e-12));
    CHECK(volume_functional(c * u, f.mesh, f.ops, p) ==
          doctest::Approx(std::pow(c, 10.0 / 3.0) * volume_functional(u, f.mesh, f.ops, p)).epsilon(1e-12));
  }
}

TEST_CASE("derivatives of the functionals") {
  const auto& f = bolza();
  const ModelParams p = make_params(5);
  const double vol = sphere_volume(p.n);
  std::mt19937 rng(2);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(f.ops.K.rows());
  const Eigen::VectorXd u = one + random_vector(one.size(), rng, 0.3);
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXd v = random_vector(one.size(), rng);
    const double h = 1e-4;
    for (double theta : {1.0, 0.6}) {
      const double hp = he_functional(u + h * v, f.ops, p, theta), h0 = he_functional(u, f.ops, p, theta),
                   hm = he_functional(u - h * v, f.ops, p, theta);
      // The functional is quadratic: the second difference is its Hessian exactly.
      const double hess = 2 * vol *
                          (theta * gradient_coefficient(p) * v.dot(f.ops.K * v) +
                           (static_cast<double>(p.scalN) - 2 * theta) * v.dot(f.ops.M * v));
      CHECK((hp - 2 * h0 + hm) / (h * h) == doctest::Approx(hess).epsilon(1e-6));
      // Gradient is 2 Vol times the residual without the nonlinear term.
      const double grad = 2 * vol * yamabe_residual(u, 0.0, f.mesh, f.ops, p, theta).dot(v);
      CHECK((hp - hm) / (2 * h) == doctest::Approx(grad).epsilon(1e-8));
    }
    const double vp = volume_functional(u + h * v, f.mesh, f.ops, p), vm = volume_functional(u - h * v, f.mesh, f.ops, p);
    const double q = static_cast<double>(p.n + 4) / p.n;
    const double dv = vol * 2.0 * (p.n + 2) / p.n * power_load(u, q, f.mesh, f.ops).dot(v);
    CHECK((vp - vm) / (2 * h) == doctest::Approx(dv).epsilon(1e-7));
  }
}

TEST_CASE("Jacobian of the residual") {
  const auto& f = bolza();
  const ModelParams p = make_params(5);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(f.ops.K.rows());
  const double c1 = gradient_coefficient(p);
  const double mu = static_cast<double>(p.scalN - 2);
  // At u = 1 the linearization is c1 (K - threshold M).
  const SparseMatrix J = yamabe_jacobian(one, mu, f.mesh, f.ops, p);
  const SparseMatrix expected = c1 * (f.ops.K - static_cast<double>(p.threshold) * f.ops.M);
  CHECK(Eigen::MatrixXd(J - expected).cwiseAbs().maxCoeff() < 1e-12 * Eigen::MatrixXd(expected).cwiseAbs().maxCoeff());
  std::mt19937 rng(3);
  const Eigen::VectorXd u = one + random_vector(one.size(), rng, 0.3);
  const SparseMatrix Ju = yamabe_jacobian(u, 3.7, f.mesh, f.ops, p, 0.8);
  for (int k = 0; k < 5; ++k) {
    const Eigen::VectorXd v = random_vector(one.size(), rng);
    const double h = 1e-6;
    const Eigen::VectorXd fd = (yamabe_residual(u + h * v, 3.7, f.mesh, f.ops, p, 0.8) -
                                yamabe_residual(u - h * v, 3.7, f.mesh, f.ops, p, 0.8)) /
                               (2 * h);
    const Eigen::VectorXd jv = Ju * v;
    CHECK((fd - jv).norm() <= 1e-6 * jv.norm());
  }
}

TEST_CASE("zero steps return the seed") {
  const auto& f = bolza();
  const ModelParams p = make_params(5);
  std::mt19937 rng(4);
  const auto pts = continue_branch(f.mesh, f.ops, random_vector(f.ops.K.rows(), rng), p, {.steps = 0});
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].mu == 4.0);
  CHECK(pts[0].theta == 1.0);
  CHECK(pts[0].distanceFromConstant == 0.0);
  CHECK_THROWS_AS(continue_branch(f.mesh, f.ops, Eigen::VectorXd::Ones(f.ops.K.rows()), p), LogicError);
  CHECK_THROWS_AS(continue_branch(f.mesh, f.ops, Eigen::VectorXd::Ones(3), p), LogicError);
}

TEST_CASE("symmetric torus bifurcation is a pitchfork") {
  // cos(2 pi x) changes sign under the half-period shift, so both directions
  // are images of each other and must reach the same mu.
  const SurfaceMesh mesh = flat_torus_mesh(16);
  const Operators ops = assemble_operators(mesh);
  const ModelParams p = make_params(5);
  Eigen::VectorXd psi(ops.K.rows());
  for (std::size_t x = 0; x < mesh.nodes.size(); ++x)
    psi[ops.dof[x]] = std::cos(2 * kPi * mesh.nodes[x].real());
  const ContinuationOptions o{.steps = 4, .ds = 0.05};
  const auto plus = continue_branch(mesh, ops, psi, p, o);
  const auto minus = continue_branch(mesh, ops, -psi, p, o);
  REQUIRE(plus.size() == 5);
  REQUIRE(minus.size() == 5);
  for (std::size_t i = 1; i < plus.size(); ++i) {
    CHECK(plus[i].mu == doctest::Approx(minus[i].mu).epsilon(1e-8));
    CHECK(plus[i].theta == doctest::Approx(minus[i].theta).epsilon(1e-8));
    CHECK(plus[i].residualNorm < 1e-8);
    CHECK(plus[i].mu > 0.0);
  }
}

TEST_CASE("pinched surface bifurcation is transcritical") {
  const ModelParams p = make_params(5);
  const SurfaceSample s = compute_sample({{3.0 * std::pow(0.1, 0.7988), 2, 2}, {0, 0, 0}, 2}, 8, {.hTarget = 0.2});
  const Eigen::VectorXd psi = nearest_mode(s.spectrum, 1.0);
  const Eigen::VectorXd lumped = s.ops.M * Eigen::VectorXd::Ones(psi.size());
  const double c2 = (lumped.array() * psi.array().square()).sum();
  const double cubic = (lumped.array() * psi.array().cube()).sum() / std::pow(c2, 1.5);
  REQUIRE(std::abs(cubic) > 0.1);
  const ContinuationOptions o{.steps = 3, .ds = 0.02};
  const auto plus = continue_branch(s.mesh, s.ops, psi, p, o);
  const auto minus = continue_branch(s.mesh, s.ops, -psi, p, o);
  CHECK((plus[1].mu - 4.0) * (minus[1].mu - 4.0) < 0.0);
  // Along +psi mu moves against the sign of the cubic moment.
  CHECK((plus[1].mu - 4.0) * cubic < 0.0);

  // Branch points are constrained critical points of the functional: no
  // first variation along directions that keep the volume.
  const double q = static_cast<double>(p.n + 4) / p.n;
  std::mt19937 rng(5);
  for (const BranchPoint& pt : plus) {
    CHECK(pt.mu > 0.0);
    CHECK(pt.residualNorm < 1e-8);
    CHECK(std::abs(pt.volumeError) < 1e-8);
    if (pt.s == 0.0) continue;
    const Eigen::VectorXd n = power_load(pt.u.u, q, s.mesh, s.ops);
    Eigen::VectorXd v = random_vector(n.size(), rng);
    v -= n * (n.dot(v) / n.dot(n));
    const double h = 1e-5;
    const double dv = (he_functional(pt.u.u + h * v, s.ops, p, pt.theta) - he_functional(pt.u.u - h * v, s.ops, p, pt.theta)) / (2 * h);
    const double dn = (he_functional(pt.u.u + h * n / n.norm(), s.ops, p, pt.theta) -
                       he_functional(pt.u.u - h * n / n.norm(), s.ops, p, pt.theta)) /
                      (2 * h);
    CHECK(std::abs(dv) < 1e-6 * std::abs(dn) * v.norm());
  }
  for (std::size_t i = 2; i < plus.size(); ++i) CHECK(plus[i].distanceFromConstant > plus[i - 1].distanceFromConstant);
}

TEST_CASE("branch output") {
  const SurfaceMesh mesh = flat_torus_mesh(8);
  const Operators ops = assemble_operators(mesh);
  Eigen::VectorXd psi(ops.K.rows());
  for (std::size_t x = 0; x < mesh.nodes.size(); ++x) psi[ops.dof[x]] = std::cos(2 * kPi * mesh.nodes[x].real());
  CrossingBranch b;
  b.kernelIndex = 1;
  b.points = continue_branch(mesh, ops, psi, make_params(5), {.steps = 2});
  std::ostringstream js, csv;
  write_branch_jsonl({b}, js);
  std::istringstream lines(js.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"branch", "kernelIndex", "s", "mu", "theta", "volumeError", "residualNorm", "distanceFromConstant"})
      CHECK(j.contains(key));
    ++count;
  }
  CHECK(count == 3);
  write_branch_nodes_csv(b, csv);
  std::istringstream rows(csv.str());
  int n = 0;
  while (std::getline(rows, line)) ++n;
  CHECK(n >= ops.K.rows());
}
