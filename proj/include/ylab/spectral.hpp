#pragma once

// P1 finite elements for the Laplacian of a glued surface mesh, a
// shift-invert eigensolver, and closed-form sphere and product spectra.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "ylab/mesh.hpp"

namespace ylab {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct Operators {
  SparseMatrix K;  // stiffness, Euclidean by conformal invariance
  SparseMatrix M;  // mass against the conformal factor
  std::vector<int> dof;  // mesh node -> row
};

/// Stiffness and weighted mass on the glued degrees of freedom.
Operators assemble_operators(const SurfaceMesh& mesh);

struct EigenOptions {
  double tol = 1e-8;
  std::uint64_t seed = 0;
  int maxIterations = 500;
  double shift = -1.0;
  double clusterTol = 1e-2;
  /// Extra block vectors beyond the requested count.
  int guard = 0;  // 0: choose automatically
};

/// Lowest part of the spectrum of K x = lambda M x. Index 0 holds the zero
/// mode (the constants); entries 1..count are the requested eigenvalues.
struct SpectrumResult {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // M-orthonormal columns, possibly empty
  /// ||K x - lambda M x|| in the lumped-mass dual norm, x M-normalized.
  Eigen::VectorXd residuals;
  std::vector<int> clusterId;
  int iterations = 0;

  Eigen::Index size() const { return eigenvalues.size(); }
  double max_residual() const { return residuals.size() ? residuals.maxCoeff() : 0.0; }
  /// (mean value, multiplicity) per cluster.
  std::vector<std::pair<double, int>> clusters() const;
};

SpectrumResult lowest_eigenpairs(const SparseMatrix& K, const SparseMatrix& M, int count,
                                 const EigenOptions& options = {});

/// Cluster ids for ascending values: neighbors within a relative gap of
/// `relTol` share a cluster; the zero mode (index 0) is alone.
std::vector<int> cluster_ids(const Eigen::VectorXd& values, double relTol);

struct SphereSpectrum {
  int n = 2;
  int jMax = 0;
  std::vector<double> values;               // j (j + n - 1)
  std::vector<long long> multiplicities;    // degree-j spherical harmonics
};

SphereSpectrum sphere_spectrum(int n, int jMax);

struct SpectralValue {
  double value = 0.0;
  long long multiplicity = 0;
};

/// All sums lambda_j(N) + lambda_k(surface) up to cutoff, coincidences within
/// 1e-9 merged. Surface eigenvalues are counted once each.
std::vector<SpectralValue> product_spectrum(const SphereSpectrum& sphere, const Eigen::VectorXd& surface,
                                            double cutoff);

void write_spectrum_csv(const SpectrumResult& spectrum, std::ostream& out);
void write_sphere_csv(const SphereSpectrum& spectrum, std::ostream& out);

}  // namespace ylab
