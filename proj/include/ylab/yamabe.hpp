#pragma once

// Conformal factors depending on the surface only: the discrete
// Hilbert-Einstein functional, the constant scalar curvature equation and
// continuation of nonconstant solutions away from a threshold crossing.

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

#include "ylab/pathscan.hpp"

namespace ylab {

/// Nodal values, one per identification class.
struct ConformalFactor {
  Eigen::VectorXd u;

  bool positive() const { return u.size() > 0 && u.minCoeff() > 0.0; }
};

struct BranchPoint {
  double s = 0.0;      // arclength
  ConformalFactor u;
  double mu = 0.0;     // constant scalar curvature
  double theta = 1.0;  // surface metric scaled by 1/theta; 1 is hyperbolic
  double volumeError = 0.0;    // relative to the volume at u = 1
  double residualNorm = 0.0;   // lumped dual norm
  double distanceFromConstant = 0.0;  // sup |u - mean(u)|
};

/// Volume of the round unit sphere S^n.
double sphere_volume(int n);

/// 4(n+1)/n.
double gradient_coefficient(const ModelParams& p);

/// Vol(S^n) (theta 4(n+1)/n u'Ku + (scalN - 2 theta) u'Mu); theta = 1 is the
/// hyperbolic metric.
double he_functional(const Eigen::VectorXd& u, const Operators& ops, const ModelParams& p, double theta = 1.0);

/// Vol(S^n) times the quadrature of u^{2(n+2)/n} against the hyperbolic measure.
double volume_functional(const Eigen::VectorXd& u, const SurfaceMesh& mesh, const Operators& ops, const ModelParams& p);

/// Load vector of u^q: entry i is the quadrature of phi_i u^q.
Eigen::VectorXd power_load(const Eigen::VectorXd& u, double q, const SurfaceMesh& mesh, const Operators& ops);

/// Weighted mass matrix with weight u^q at the quadrature points.
SparseMatrix power_mass(const Eigen::VectorXd& u, double q, const SurfaceMesh& mesh, const Operators& ops);

/// theta 4(n+1)/n Ku + (scalN - 2 theta) Mu - mu N(u), N(u) the load of
/// u^{(n+4)/n}. At theta = 1 this is the constant scalar curvature equation.
Eigen::VectorXd yamabe_residual(const Eigen::VectorXd& u, double mu, const SurfaceMesh& mesh, const Operators& ops,
                                const ModelParams& p, double theta = 1.0);

/// Derivative of yamabe_residual with respect to u.
SparseMatrix yamabe_jacobian(const Eigen::VectorXd& u, double mu, const SurfaceMesh& mesh, const Operators& ops,
                             const ModelParams& p, double theta = 1.0);

/// sqrt(sum r_i^2 / (M 1)_i).
double dual_norm(const Eigen::VectorXd& r, const SparseMatrix& M);

struct ContinuationOptions {
  int steps = 8;
  double ds = 0.02;
  double newtonTol = 1e-10;
  int maxNewton = 25;
  int maxHalvings = 5;
};

/// Pseudo-arclength continuation of the nonconstant branch leaving the
/// trivial solution through the kernel direction `kernel`. The surface scale
/// theta is the free parameter; the branch starts where the trivial solution
/// degenerates along `kernel`. The first point returned is the seed u = 1,
/// mu = scalN - 2.
std::vector<BranchPoint> continue_branch(const SurfaceMesh& mesh, const Operators& ops, const Eigen::VectorXd& kernel,
                                         const ModelParams& p, const ContinuationOptions& options = {});

struct CrossingBranch {
  int kernelIndex = 0;   // position in the sorted spectrum at t*
  double eigenvalue = 0.0;
  std::vector<BranchPoint> points;
};

struct CrossingContinuation {
  double tStar = 0.0;
  SurfaceSample sample;
  std::vector<CrossingBranch> branches;
};

/// Recomputes the surface at the crossing and continues one branch per
/// eigenvector within nullTol of the threshold there (at least the
/// crossing's own).
CrossingContinuation continue_crossing(const CrossingEvent& crossing, const PathSpec& path, const ModelParams& p,
                                       int eigCount, const SampleOptions& sample, const ContinuationOptions& options,
                                       int threads = 1);

/// One JSON object per line.
void write_branch_jsonl(const std::vector<CrossingBranch>& branches, std::ostream& out);

/// Nodal values: class index then one column per point.
void write_branch_nodes_csv(const CrossingBranch& branch, std::ostream& out);

}  // namespace ylab
