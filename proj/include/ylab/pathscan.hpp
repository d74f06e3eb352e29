#pragma once

// Sampled paths of hyperbolic metrics: spectra along the path, eigenvalue
// branch matching, threshold crossings and Morse-index profiles.

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ylab/index.hpp"

namespace ylab {

/// Everything computed for one surface: group, domain, mesh, operators and
/// the low spectrum.
struct SurfaceSample {
  FNCoords coords;
  GeodesicPolygon domain;
  SurfaceMesh mesh;
  Operators ops;
  SpectrumResult spectrum;
};

struct SampleOptions {
  double hTarget = 0.1;
  EigenOptions eig;
  int maxWordRadius = 8;
};

SurfaceSample compute_sample(const FNCoords& coords, int eigCount, const SampleOptions& options = {});
SurfaceSample compute_bolza_sample(int eigCount, const SampleOptions& options = {});

struct PathSpec {
  FNCoords start;
  FNCoords end;
  int sampleCount = 20;

  /// Lengths interpolate geometrically, twists linearly.
  FNCoords at(double t) const;
  void validate() const;
};

/// Smallest length allowed anywhere on a path.
inline constexpr double kPinchingFloor = 0.1;

/// Eigenvectors of `from` evaluated on the nodes of `to`: each node of `to`
/// is reduced into the domain of `from` and interpolated linearly there.
Eigen::MatrixXd transport_eigenvectors(const SurfaceSample& from, const SurfaceSample& to);

struct Matching {
  std::vector<int> permutation;   // prev branch i -> next index permutation[i]
  std::vector<double> overlaps;   // |<prev_i, next_perm(i)>_M| per branch
  bool flagged = false;           // some checked overlap below the minimum
};

/// Assignment maximizing the total squared M-overlap between `prev` (columns
/// expressed on the dofs of `next`) and the eigenvectors of `next`; ties go
/// to eigenvalue order. Overlaps are checked for branches listed in `checked`
/// (all when empty).
Matching match_eigenbranches(const Eigen::MatrixXd& prev, const SpectrumResult& next, const SparseMatrix& M,
                             double minOverlap = 0.5, const std::vector<bool>& checked = {});

/// Maximum-weight perfect assignment on a square matrix (Hungarian method).
std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight);

struct CrossingEvent {
  double tStar = 0.0;
  double bracketLo = 0.0, bracketHi = 0.0;
  int branch = -1;        // branch id in the track
  int sortedIndex = -1;   // position of the crossing eigenvalue in the sorted spectrum
  double slope = 0.0;     // d(lambda)/dt, secant estimate
  bool nullity = false;   // eigenvalue within nullTol of the threshold at t*
  bool candidate = false; // also: endpoints nondegenerate
};

/// Bisection for the zeros of f on [lo, hi]. The bracket is first sampled at
/// `presamples` interior points; every sign-changing piece yields one event.
/// Throws when no sign change is found.
std::vector<CrossingEvent> refine_crossing(const std::function<double(double)>& f, double lo, double hi, double tol,
                                           int presamples = 2);

struct BranchTrack {
  std::vector<double> samples;               // t values
  std::vector<std::vector<double>> branches; // branches[b][s]
  std::vector<std::vector<int>> matching;    // per step: permutation
  std::vector<double> minOverlap;            // per step
};

struct ScanOptions {
  SampleOptions sample;
  double refineTol = 1e-3;
  int maxHalvings = 3;
  int threads = 1;
  double minOverlap = 0.5;
  bool refine = true;
  /// Coverage guard: the top eigenvalue must stay above threshold + margin.
  double coverageMargin = 0.2;
  /// Overlaps are only enforced for branches below threshold + this band.
  double matchBand = 1.0;
};

struct ScanReport {
  ModelParams params;
  BranchTrack track;
  std::vector<Eigen::VectorXd> spectra;  // sorted, per sample
  std::vector<int> indexProfile;
  std::vector<int> nullityProfile;
  std::vector<CrossingEvent> crossings;
  IndexReport startReport, endReport;
  bool startNondegenerate = true, endNondegenerate = true;
  std::vector<double> nullTols;
};

ScanReport scan_path(const PathSpec& path, const ModelParams& params, int eigCount, const ScanOptions& options = {});

void write_scan_csv(const ScanReport& report, std::ostream& out);
void write_events_json(const ScanReport& report, std::ostream& out);

}  // namespace ylab
