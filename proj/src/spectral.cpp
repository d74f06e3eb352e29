#include "ylab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "ylab/io.hpp"

namespace ylab {

Operators assemble_operators(const SurfaceMesh& mesh) {
  Operators ops;
  ops.dof = mesh.dof_index();
  const Eigen::Index n = static_cast<Eigen::Index>(mesh.class_count());
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(mesh.triangles.size() * 9);
  mt.reserve(mesh.triangles.size() * 9);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    std::array<Complex, 3> p;
    std::array<int, 3> d;
    for (std::size_t k = 0; k < 3; ++k) {
      p[k] = mesh.nodes[static_cast<std::size_t>(tri[k])];
      d[k] = ops.dof[static_cast<std::size_t>(tri[k])];
    }
    const double area = mesh.triangle_area(t);
    if (!(area > 0.0)) throw NumericalError("assemble_operators: degenerate or inverted triangle");
    // Gradients of the barycentric coordinates are (-dy, dx) / (2 area).
    std::array<double, 3> bx, by;
    for (std::size_t k = 0; k < 3; ++k) {
      const Complex e = p[(k + 2) % 3] - p[(k + 1) % 3];
      bx[k] = -e.imag();
      by[k] = e.real();
    }
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        kt.emplace_back(d[i], d[j], (bx[i] * bx[j] + by[i] * by[j]) / (4.0 * area));
        double m = 0.0;
        for (std::size_t q = 0; q < 3; ++q) m += mesh.weights[t][q] * kQuadrature[q][i] * kQuadrature[q][j];
        mt.emplace_back(d[i], d[j], m * area / 3.0);
      }
    }
  }
  ops.K.resize(n, n);
  ops.M.resize(n, n);
  ops.K.setFromTriplets(kt.begin(), kt.end());
  ops.M.setFromTriplets(mt.begin(), mt.end());
  return ops;
}

std::vector<int> cluster_ids(const Eigen::VectorXd& values, double relTol) {
  std::vector<int> ids(static_cast<std::size_t>(values.size()), 0);
  int id = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    const double prev = values[i - 1], cur = values[i];
    const bool same = i > 1 && std::abs(cur - prev) <= relTol * std::max(std::abs(cur), std::abs(prev));
    if (!same) ++id;
    ids[static_cast<std::size_t>(i)] = id;
  }
  return ids;
}

std::vector<std::pair<double, int>> SpectrumResult::clusters() const {
  std::vector<std::pair<double, int>> out;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const std::size_t c = static_cast<std::size_t>(clusterId[static_cast<std::size_t>(i)]);
    if (c >= out.size()) out.resize(c + 1, {0.0, 0});
    out[c].first += eigenvalues[i];
    out[c].second += 1;
  }
  for (auto& [v, m] : out) v /= m;
  return out;
}

namespace {

// Removes the constant component and M-orthonormalizes the columns of X by
// two passes of Cholesky QR.
void m_orthonormalize(Eigen::MatrixXd& X, const SparseMatrix& M, const Eigen::VectorXd& c) {
  for (int pass = 0; pass < 2; ++pass) {
    X -= c * (c.transpose() * (M * X));
    const Eigen::MatrixXd G = X.transpose() * (M * X);
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (G + G.transpose()));
    if (llt.info() != Eigen::Success) throw NumericalError("lowest_eigenpairs: block lost rank");
    X = llt.matrixU().solve<Eigen::OnTheRight>(X);
  }
}

}  // namespace

SpectrumResult lowest_eigenpairs(const SparseMatrix& K, const SparseMatrix& M, int count, const EigenOptions& options) {
  if (count < 1) throw LogicError("lowest_eigenpairs: count must be >= 1");
  const Eigen::Index n = K.rows();
  if (K.cols() != n || M.rows() != n || M.cols() != n) throw LogicError("lowest_eigenpairs: shape mismatch");
  const int guard = options.guard > 0 ? options.guard : std::max(6, count);
  const Eigen::Index block = std::min<Eigen::Index>(count + guard, n - 1);
  if (block < count) throw LogicError("lowest_eigenpairs: problem too small for the requested count");

  // Shift-invert operator (K - sigma M)^{-1} M with sigma < 0 keeps it SPD.
  SparseMatrix A = K - options.shift * M;
  Eigen::SimplicialLDLT<SparseMatrix> solver(A);
  if (solver.info() != Eigen::Success) throw NumericalError("lowest_eigenpairs: factorization failed");

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd c = ones / std::sqrt(ones.dot(M * ones));
  Eigen::VectorXd lumped = M * ones;

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd X(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = unif(rng);
  m_orthonormalize(X, M, c);

  Eigen::VectorXd theta(block), res(block);
  int it = 0;
  for (; it < options.maxIterations; ++it) {
    Eigen::MatrixXd Y = solver.solve(M * X);
    m_orthonormalize(Y, M, c);
    const Eigen::MatrixXd KY = K * Y;
    Eigen::MatrixXd Kr = Y.transpose() * KY;
    Kr = 0.5 * (Kr + Kr.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(Kr);
    X = Y * ritz.eigenvectors();
    theta = ritz.eigenvalues();
    const Eigen::MatrixXd R = K * X - (M * X) * theta.asDiagonal();
    for (Eigen::Index j = 0; j < block; ++j) res[j] = std::sqrt((R.col(j).array().square() / lumped.array()).sum());
    if (res.head(count).maxCoeff() < options.tol) break;
  }
  if (it == options.maxIterations) {
    std::ostringstream os;
    os << "lowest_eigenpairs: no convergence after " << it << " iterations; best residuals";
    for (Eigen::Index j = 0; j < count; ++j) os << ' ' << res[j];
    throw NumericalError(os.str());
  }

  SpectrumResult out;
  out.iterations = it + 1;
  out.eigenvalues.resize(count + 1);
  out.residuals.resize(count + 1);
  out.eigenvectors.resize(n, count + 1);
  out.eigenvalues[0] = 0.0;
  out.eigenvectors.col(0) = c;
  out.residuals[0] = std::sqrt(((K * c).array().square() / lumped.array()).sum());
  out.eigenvalues.tail(count) = theta.head(count);
  out.residuals.tail(count) = res.head(count);
  out.eigenvectors.rightCols(count) = X.leftCols(count);
  // Fix the sign of each vector for reproducible output: largest entry positive.
  for (Eigen::Index j = 1; j <= count; ++j) {
    Eigen::Index k;
    out.eigenvectors.col(j).cwiseAbs().maxCoeff(&k);
    if (out.eigenvectors(k, j) < 0) out.eigenvectors.col(j) *= -1.0;
  }
  out.clusterId = cluster_ids(out.eigenvalues, options.clusterTol);
  return out;
}

namespace {

long long binomial(int a, int b) {
  if (b < 0 || a < b) return 0;
  b = std::min(b, a - b);
  long long r = 1;
  for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
  return r;
}

}  // namespace

SphereSpectrum sphere_spectrum(int n, int jMax) {
  if (n < 2) throw LogicError("sphere_spectrum: n must be >= 2");
  if (jMax < 0) throw LogicError("sphere_spectrum: jMax must be >= 0");
  SphereSpectrum s;
  s.n = n;
  s.jMax = jMax;
  for (int j = 0; j <= jMax; ++j) {
    s.values.push_back(static_cast<double>(j) * (j + n - 1));
    s.multiplicities.push_back(binomial(n + j, n) - binomial(n + j - 2, n));
  }
  return s;
}

std::vector<SpectralValue> product_spectrum(const SphereSpectrum& sphere, const Eigen::VectorXd& surface, double cutoff) {
  if (surface.size() == 0 || sphere.values.empty()) throw LogicError("product_spectrum: empty component spectrum");
  if (cutoff > sphere.values.back() + surface.maxCoeff()) throw NumericalError("product_spectrum: extend component spectra");
  std::vector<SpectralValue> sums;
  for (std::size_t j = 0; j < sphere.values.size(); ++j)
    for (Eigen::Index k = 0; k < surface.size(); ++k) {
      const double v = sphere.values[j] + surface[k];
      if (v <= cutoff + 1e-9) sums.push_back({v, sphere.multiplicities[j]});
    }
  std::stable_sort(sums.begin(), sums.end(), [](const SpectralValue& a, const SpectralValue& b) { return a.value < b.value; });
  std::vector<SpectralValue> merged;
  for (const auto& s : sums) {
    if (!merged.empty() && std::abs(s.value - merged.back().value) <= 1e-9 * std::max(1.0, std::abs(s.value)))
      merged.back().multiplicity += s.multiplicity;
    else
      merged.push_back(s);
  }
  return merged;
}

void write_spectrum_csv(const SpectrumResult& spectrum, std::ostream& out) {
  out << "index,eigenvalue,clusterId,residual\n";
  for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i)
    out << i << ',' << format_double(spectrum.eigenvalues[i]) << ',' << spectrum.clusterId[static_cast<std::size_t>(i)]
        << ',' << format_double(spectrum.residuals[i]) << '\n';
}

void write_sphere_csv(const SphereSpectrum& spectrum, std::ostream& out) {
  for (std::size_t j = 0; j < spectrum.values.size(); ++j)
    out << format_double(spectrum.values[j]) << ',' << spectrum.multiplicities[j] << '\n';
}

}  // namespace ylab
