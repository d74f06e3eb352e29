#include "ylab/yamabe.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "ylab/io.hpp"

namespace ylab {

double sphere_volume(int n) {
  if (n < 0) throw LogicError("sphere_volume: n must be >= 0");
  const double h = 0.5 * (n + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double gradient_coefficient(const ModelParams& p) { return 4.0 * (p.n + 1) / p.n; }

namespace {

void require_positive(const Eigen::VectorXd& u, const char* who) {
  if (u.size() == 0 || !(u.minCoeff() > 0.0)) throw LogicError(std::string(who) + ": conformal factor must be positive");
}

void require_size(const Eigen::VectorXd& u, const Operators& ops, const char* who) {
  if (u.size() != ops.M.rows()) throw LogicError(std::string(who) + ": size mismatch");
}

double yamabe_power(const ModelParams& p) { return (p.n + 4.0) / p.n; }
double volume_power(const ModelParams& p) { return 2.0 * (p.n + 2.0) / p.n; }

// Calls fn(dofs, bary, weight) for every quadrature point.
template <class Fn>
void for_each_quadrature_point(const SurfaceMesh& mesh, const Operators& ops, Fn&& fn) {
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const std::array<int, 3> d{ops.dof[static_cast<std::size_t>(tri[0])], ops.dof[static_cast<std::size_t>(tri[1])],
                               ops.dof[static_cast<std::size_t>(tri[2])]};
    const double a = mesh.triangle_area(t) / 3.0;
    for (std::size_t q = 0; q < 3; ++q) fn(d, kQuadrature[q], a * mesh.weights[t][q]);
  }
}

double interpolate(const Eigen::VectorXd& u, const std::array<int, 3>& d, const std::array<double, 3>& b) {
  return b[0] * u[d[0]] + b[1] * u[d[1]] + b[2] * u[d[2]];
}

}  // namespace

double he_functional(const Eigen::VectorXd& u, const Operators& ops, const ModelParams& p, double theta) {
  require_size(u, ops, "he_functional");
  require_positive(u, "he_functional");
  return sphere_volume(p.n) * (theta * gradient_coefficient(p) * u.dot(ops.K * u) +
                               (static_cast<double>(p.scalN) - 2.0 * theta) * u.dot(ops.M * u));
}

double volume_functional(const Eigen::VectorXd& u, const SurfaceMesh& mesh, const Operators& ops, const ModelParams& p) {
  require_size(u, ops, "volume_functional");
  require_positive(u, "volume_functional");
  const double q = volume_power(p);
  double v = 0.0;
  for_each_quadrature_point(mesh, ops, [&](const std::array<int, 3>& d, const std::array<double, 3>& b, double w) {
    v += w * std::pow(interpolate(u, d, b), q);
  });
  return sphere_volume(p.n) * v;
}

Eigen::VectorXd power_load(const Eigen::VectorXd& u, double q, const SurfaceMesh& mesh, const Operators& ops) {
  require_size(u, ops, "power_load");
  require_positive(u, "power_load");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(u.size());
  for_each_quadrature_point(mesh, ops, [&](const std::array<int, 3>& d, const std::array<double, 3>& b, double w) {
    const double v = w * std::pow(interpolate(u, d, b), q);
    for (std::size_t i = 0; i < 3; ++i) f[d[i]] += v * b[i];
  });
  return f;
}

SparseMatrix power_mass(const Eigen::VectorXd& u, double q, const SurfaceMesh& mesh, const Operators& ops) {
  require_size(u, ops, "power_mass");
  require_positive(u, "power_mass");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 27);
  for_each_quadrature_point(mesh, ops, [&](const std::array<int, 3>& d, const std::array<double, 3>& b, double w) {
    const double v = w * std::pow(interpolate(u, d, b), q);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) trip.emplace_back(d[i], d[j], v * b[i] * b[j]);
  });
  SparseMatrix A(u.size(), u.size());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Eigen::VectorXd yamabe_residual(const Eigen::VectorXd& u, double mu, const SurfaceMesh& mesh, const Operators& ops,
                                const ModelParams& p, double theta) {
  require_size(u, ops, "yamabe_residual");
  require_positive(u, "yamabe_residual");
  return theta * gradient_coefficient(p) * (ops.K * u) + (static_cast<double>(p.scalN) - 2.0 * theta) * (ops.M * u) -
         mu * power_load(u, yamabe_power(p), mesh, ops);
}

SparseMatrix yamabe_jacobian(const Eigen::VectorXd& u, double mu, const SurfaceMesh& mesh, const Operators& ops,
                             const ModelParams& p, double theta) {
  const double q = yamabe_power(p);
  SparseMatrix J = theta * gradient_coefficient(p) * ops.K + (static_cast<double>(p.scalN) - 2.0 * theta) * ops.M;
  J -= (mu * q) * power_mass(u, q - 1.0, mesh, ops);
  return J;
}

double dual_norm(const Eigen::VectorXd& r, const SparseMatrix& M) {
  const Eigen::VectorXd lumped = M * Eigen::VectorXd::Ones(M.rows());
  return std::sqrt((r.array().square() / lumped.array()).sum());
}

namespace {

// State of the extended system: u, mu, theta.
struct State {
  Eigen::VectorXd u;
  double mu = 0.0;
  double theta = 1.0;
};

class Continuation {
 public:
  Continuation(const SurfaceMesh& mesh, const Operators& ops, const ModelParams& p)
      : mesh_(mesh), ops_(ops), p_(p), n_(ops.M.rows()) {
    ones_ = Eigen::VectorXd::Ones(n_);
    mOnes_ = ops.M * ones_;
    area_ = ones_.dot(mOnes_);
    v0_ = volume_functional(ones_, mesh, ops, p);
  }

  double area() const { return area_; }

  // Inner product: mass-weighted mean for u, plain for the scalars.
  double dot(const State& a, const State& b) const {
    return a.u.dot(ops_.M * b.u) / area_ + a.mu * b.mu + a.theta * b.theta;
  }

  State axpy(const State& x, double s, const State& t) const { return {x.u + s * t.u, x.mu + s * t.mu, x.theta + s * t.theta}; }

  State normalized(State t) const {
    const double nrm = std::sqrt(dot(t, t));
    t.u /= nrm;
    t.mu /= nrm;
    t.theta /= nrm;
    return t;
  }

  double volume_error(const Eigen::VectorXd& u) const { return volume_functional(u, mesh_, ops_, p_) / v0_ - 1.0; }

  double residual_norm(const State& x) const {
    return dual_norm(yamabe_residual(x.u, x.mu, mesh_, ops_, p_, x.theta), ops_.M);
  }

  // Newton on {residual = 0, volume = v0, <tangent, x - anchor> = ds}.
  bool correct(State& x, const State& anchor, const State& tangent, double ds) const {
    const double q = yamabe_power(p_);
    const double c1 = gradient_coefficient(p_);
    const double vScale = sphere_volume(p_.n) * volume_power(p_) / v0_;
    const Eigen::VectorXd tuM = ops_.M * tangent.u / area_;
    for (int it = 0; it < maxNewton_; ++it) {
      if (!(x.u.minCoeff() > 0.0)) return false;
      const Eigen::VectorXd load = power_load(x.u, q, mesh_, ops_);
      const Eigen::VectorXd Ku = ops_.K * x.u, Mu = ops_.M * x.u;
      Eigen::VectorXd F(n_ + 2);
      F.head(n_) = x.theta * c1 * Ku + (static_cast<double>(p_.scalN) - 2.0 * x.theta) * Mu - x.mu * load;
      F[n_] = volume_error(x.u);
      F[n_ + 1] = dot(tangent, State{x.u - anchor.u, x.mu - anchor.mu, x.theta - anchor.theta}) - ds;
      const double rn = dual_norm(F.head(n_), ops_.M);
      if (rn < tol_ && std::abs(F[n_]) < 1e-2 * tol_ && std::abs(F[n_ + 1]) < tol_) return true;

      const SparseMatrix J = yamabe_jacobian(x.u, x.mu, mesh_, ops_, p_, x.theta);
      const Eigen::VectorXd dTheta = c1 * Ku - 2.0 * Mu;
      const Eigen::VectorXd volGrad = vScale * power_load(x.u, volume_power(p_) - 1.0, mesh_, ops_);
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(static_cast<std::size_t>(J.nonZeros() + 5 * n_ + 2));
      for (Eigen::Index k = 0; k < J.outerSize(); ++k)
        for (SparseMatrix::InnerIterator e(J, k); e; ++e) trip.emplace_back(e.row(), e.col(), e.value());
      for (Eigen::Index i = 0; i < n_; ++i) {
        trip.emplace_back(i, n_, -load[i]);
        trip.emplace_back(i, n_ + 1, dTheta[i]);
        trip.emplace_back(n_, i, volGrad[i]);
        trip.emplace_back(n_ + 1, i, tuM[i]);
      }
      trip.emplace_back(n_ + 1, n_, tangent.mu);
      trip.emplace_back(n_ + 1, n_ + 1, tangent.theta);
      SparseMatrix A(n_ + 2, n_ + 2);
      A.setFromTriplets(trip.begin(), trip.end());
      Eigen::SparseLU<SparseMatrix> lu;
      lu.compute(A);
      if (lu.info() != Eigen::Success) return false;
      const Eigen::VectorXd d = lu.solve(F);
      if (lu.info() != Eigen::Success || !d.allFinite()) return false;
      x.u -= d.head(n_);
      x.mu -= d[n_];
      x.theta -= d[n_ + 1];
    }
    return false;
  }

  BranchPoint point(const State& x, double s) const {
    BranchPoint bp;
    bp.s = s;
    bp.u.u = x.u;
    bp.mu = x.mu;
    bp.theta = x.theta;
    bp.volumeError = volume_error(x.u);
    bp.residualNorm = residual_norm(x);
    const double mean = x.u.dot(mOnes_) / area_;
    bp.distanceFromConstant = (x.u.array() - mean).abs().maxCoeff();
    return bp;
  }

  void set_solver(double tol, int maxNewton) {
    tol_ = tol;
    maxNewton_ = maxNewton;
  }

 private:
  const SurfaceMesh& mesh_;
  const Operators& ops_;
  ModelParams p_;
  Eigen::Index n_;
  Eigen::VectorXd ones_, mOnes_;
  double area_ = 0.0, v0_ = 0.0;
  double tol_ = 1e-10;
  int maxNewton_ = 25;
};

}  // namespace

std::vector<BranchPoint> continue_branch(const SurfaceMesh& mesh, const Operators& ops, const Eigen::VectorXd& kernel,
                                         const ModelParams& p, const ContinuationOptions& options) {
  if (options.steps < 0) throw LogicError("continue_branch: steps must be >= 0");
  if (!(options.ds > 0.0)) throw LogicError("continue_branch: ds must be positive");
  if (kernel.size() != ops.M.rows()) throw LogicError("continue_branch: kernel size mismatch");
  Continuation c(mesh, ops, p);
  c.set_solver(options.newtonTol, options.maxNewton);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(kernel.size());
  State seed{ones, static_cast<double>(p.scalN - 2), 1.0};
  std::vector<BranchPoint> points{c.point(seed, 0.0)};
  if (options.steps == 0) return points;

  // Mean-free kernel direction, unit in the mass-weighted mean.
  Eigen::VectorXd psi = kernel - ones * (ones.dot(ops.M * kernel) / c.area());
  const double kk = psi.dot(ops.M * psi);
  if (!(kk > 0.0)) throw LogicError("continue_branch: kernel is constant");
  psi *= std::sqrt(c.area() / kk);

  // The trivial solution u = 1, mu = scalN - 2 theta degenerates along psi
  // where theta c1 lambda = (scalN - 2 theta) 4 / n.
  const double lambda = psi.dot(ops.K * psi) / psi.dot(ops.M * psi);
  const double thetaStar = static_cast<double>(p.scalN) / ((p.n + 1) * lambda + 2.0);
  State prev{ones, static_cast<double>(p.scalN) - 2.0 * thetaStar, thetaStar};
  State tangent{psi, 0.0, 0.0};
  tangent = c.normalized(tangent);

  double s = 0.0;
  for (int step = 0; step < options.steps; ++step) {
    double ds = options.ds;
    bool ok = false;
    State x;
    for (int h = 0; h <= options.maxHalvings; ++h, ds *= 0.5) {
      x = c.axpy(prev, ds, tangent);
      if (!(x.u.minCoeff() > 0.0)) continue;
      if (c.correct(x, prev, tangent, ds)) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      std::ostringstream os;
      os << "continue_branch: corrector failed at step " << step + 1 << " after " << options.maxHalvings
         << " step halvings";
      throw NumericalError(os.str());
    }
    s += ds;
    points.push_back(c.point(x, s));
    tangent = c.normalized(State{x.u - prev.u, x.mu - prev.mu, x.theta - prev.theta});
    prev = x;
  }
  return points;
}

CrossingContinuation continue_crossing(const CrossingEvent& crossing, const PathSpec& path, const ModelParams& p,
                                       int eigCount, const SampleOptions& sample, const ContinuationOptions& options,
                                       int threads) {
  CrossingContinuation out;
  out.tStar = crossing.tStar;
  out.sample = compute_sample(path.at(crossing.tStar), eigCount, sample);
  const SpectrumResult& spec = out.sample.spectrum;
  const double thr = static_cast<double>(p.threshold);
  const double tol = std::max(default_null_tol(spec), std::abs(crossing.slope) * (crossing.bracketHi - crossing.bracketLo));

  std::vector<int> kernel;
  for (Eigen::Index i = 1; i < spec.eigenvalues.size(); ++i)
    if (std::abs(spec.eigenvalues[i] - thr) <= tol) kernel.push_back(static_cast<int>(i));
  if (kernel.empty()) {
    if (crossing.sortedIndex < 1 || crossing.sortedIndex >= spec.eigenvalues.size())
      throw NumericalError("continue_crossing: no eigenvalue near the threshold at t*");
    kernel.push_back(crossing.sortedIndex);
  }

  out.branches.resize(kernel.size());
  std::vector<std::string> errors(kernel.size());
  auto work = [&](std::size_t k) {
    try {
      CrossingBranch& b = out.branches[k];
      b.kernelIndex = kernel[k];
      b.eigenvalue = spec.eigenvalues[kernel[k]];
      b.points = continue_branch(out.sample.mesh, out.sample.ops, spec.eigenvectors.col(kernel[k]), p, options);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  };
  if (threads > 1 && kernel.size() > 1) {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < kernel.size(); ++k) pool.emplace_back(work, k);
    for (auto& th : pool) th.join();
  } else {
    for (std::size_t k = 0; k < kernel.size(); ++k) work(k);
  }
  for (const auto& e : errors)
    if (!e.empty()) throw NumericalError(e);
  return out;
}

void write_branch_jsonl(const std::vector<CrossingBranch>& branches, std::ostream& out) {
  for (std::size_t b = 0; b < branches.size(); ++b)
    for (const auto& pt : branches[b].points) {
      nlohmann::ordered_json j = {{"branch", b},
                                  {"kernelIndex", branches[b].kernelIndex},
                                  {"s", pt.s},
                                  {"mu", pt.mu},
                                  {"theta", pt.theta},
                                  {"volumeError", pt.volumeError},
                                  {"residualNorm", pt.residualNorm},
                                  {"distanceFromConstant", pt.distanceFromConstant}};
      out << j.dump() << '\n';
    }
}

void write_branch_nodes_csv(const CrossingBranch& branch, std::ostream& out) {
  out << "class";
  for (std::size_t k = 0; k < branch.points.size(); ++k) out << ",u" << k;
  out << '\n';
  if (branch.points.empty()) return;
  const Eigen::Index n = branch.points.front().u.u.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    out << i;
    for (const auto& pt : branch.points) out << ',' << format_double(pt.u.u[i]);
    out << '\n';
  }
}

}  // namespace ylab
