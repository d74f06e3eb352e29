#pragma once

// Thresholds, the basic inequality, and Morse index / nullity bookkeeping
// for product metrics on S^{m-2} x Sigma.

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

#include "ylab/spectral.hpp"

namespace ylab {

struct ModelParams {
  int m = 5;          // total dimension
  int n = 3;          // sphere dimension m - 2
  long long scalN = 6;     // (m - 2)(m - 3)
  long long threshold = 1; // (scalN - 2) / (n + 1) = m - 4
  long long lambda1N = 3;  // m - 2
};

ModelParams make_params(int m);

struct InequalityReport {
  bool holds = false;
  double lowerMargin = 0.0;  // threshold - 1/4
  double upperMargin = 0.0;  // lambda1N - threshold
};

/// 1/4 < threshold < lambda1N.
InequalityReport check_basic_inequality(const ModelParams& p);

struct IndexReport {
  int morseIndex = 0;
  int nullity = 0;
  std::vector<SpectralValue> contributing;
  std::vector<SpectralValue> nearThreshold;
  double nullTol = 0.0;
};

/// Index and nullity from a product spectrum (zero mode excluded). `covered`
/// is the largest value the list is known to be complete up to.
IndexReport morse_index_nullity(const std::vector<SpectralValue>& product, const ModelParams& p, double nullTol,
                                double covered);

/// Same, building the product spectrum from a computed surface spectrum.
IndexReport surface_index(const SpectrumResult& surface, const ModelParams& p, double nullTol);

/// max(2 * largest residual, 1e-4).
double default_null_tol(const SpectrumResult& surface);

/// Number of eigenvalues in (0, a), with multiplicity; `covered` as above.
int count_below(const Eigen::VectorXd& values, double a, double covered);
int count_below(const SpectrumResult& spectrum, double a);

/// Scalar curvature (m - 2k - 2)(m - 1) of S^{m-k-1} x H^{k+1}.
long long scal_product(int m, int k);

void write_index_json(const IndexReport& report, const ModelParams& p, std::ostream& out);

}  // namespace ylab
