#pragma once

// Hyperbolic-plane isometries and cocompact genus-2 Fuchsian groups.
//
// Every isometry is stored as a real SL(2,R) matrix together with a model
// tag. An UpperHalfPlane map acts on Im w > 0 by w -> (aw+b)/(cw+d). A Disk
// map with the same matrix acts on |z| < 1 through the Cayley transform
// w = i(1+z)/(1-z), i.e. by the SU(1,1) matrix C^{-1} A C. Reinterpreting a
// half-plane group as a disk group is therefore just a change of tag, and the
// disk origin corresponds to the point i.

#include <Eigen/Core>
#include <Eigen/LU>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ylab/error.hpp"

namespace ylab {

using Complex = std::complex<double>;

enum class Model { Disk, UpperHalfPlane };

std::string to_string(Model model);
Model model_from_string(const std::string& name);

template <typename Scalar>
class MobiusMap {
 public:
  using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
  using ComplexScalar = std::complex<Scalar>;
  using ComplexMatrix2 = Eigen::Matrix<ComplexScalar, 2, 2>;

  MobiusMap() : matrix_(Matrix2::Identity()), model_(Model::Disk) {}

  /// Normalizes to determinant one; the determinant must be positive.
  MobiusMap(const Matrix2& m, Model model) : matrix_(m), model_(model) {
    const Scalar det = m.determinant();
    if (!(det > Scalar(0)))
      throw LogicError("MobiusMap: matrix must have positive determinant");
    matrix_ /= std::sqrt(det);
  }

  /// Wraps a matrix already known to lie in SL(2,R), without renormalizing.
  static MobiusMap FromSL2(const Matrix2& m, Model model) { return MobiusMap(m, model, NoNormalize{}); }

  static MobiusMap Identity(Model model = Model::Disk) {
    return MobiusMap(Matrix2::Identity(), model);
  }

  /// Builds the disk map z -> (u00 z + u01) / (u10 z + u11) from an SU(1,1)
  /// (or projectively equivalent) complex matrix.
  static MobiusMap FromDiskMatrix(const ComplexMatrix2& u) {
    const ComplexMatrix2 a = cayley() * u * cayley().inverse();
    // Projective scaling may leave a common complex phase; remove it.
    ComplexScalar phase(1);
    Scalar best(0);
    for (int i = 0; i < 4; ++i) {
      if (std::abs(a(i)) > best) {
        best = std::abs(a(i));
        phase = a(i) / std::abs(a(i));
      }
    }
    Matrix2 real;
    for (int i = 0; i < 4; ++i) real(i) = std::real(a(i) / phase);
    if (real.determinant() < Scalar(0)) real = -real;
    return MobiusMap(real, Model::Disk);
  }

  const Matrix2& matrix() const { return matrix_; }
  Scalar a() const { return matrix_(0, 0); }
  Scalar b() const { return matrix_(0, 1); }
  Scalar c() const { return matrix_(1, 0); }
  Scalar d() const { return matrix_(1, 1); }
  Model model() const { return model_; }
  Scalar trace() const { return matrix_.trace(); }

  MobiusMap inverse() const {
    Matrix2 adj;
    adj << d(), -b(), -c(), a();
    return MobiusMap(adj, model_, NoNormalize{});
  }

  MobiusMap with_model(Model model) const { return MobiusMap(matrix_, model, NoNormalize{}); }

  template <typename Other>
  MobiusMap<Other> cast() const {
    return MobiusMap<Other>(matrix_.template cast<Other>(), model_);
  }

  /// SU(1,1) form of the map acting on the disk.
  ComplexMatrix2 disk_matrix() const {
    return cayley().inverse() * matrix_.template cast<ComplexScalar>() * cayley();
  }

  ComplexScalar operator()(const ComplexScalar& z) const {
    if (model_ == Model::UpperHalfPlane) return (a() * z + b()) / (c() * z + d());
    const ComplexMatrix2 u = disk_matrix();
    return (u(0, 0) * z + u(0, 1)) / (u(1, 0) * z + u(1, 1));
  }

  /// Operator-norm distance to the identity in PSL(2,R) (sign ignored).
  Scalar distance_to_identity() const {
    const Matrix2 id = Matrix2::Identity();
    return std::min(op_norm(matrix_ - id), op_norm(matrix_ + id));
  }

  static const ComplexMatrix2& cayley() {
    static const ComplexMatrix2 c = [] {
      ComplexMatrix2 m;
      const ComplexScalar i(0, 1);
      m << i, i, ComplexScalar(-1), ComplexScalar(1);
      return m;
    }();
    return c;
  }

 private:
  struct NoNormalize {};
  MobiusMap(const Matrix2& m, Model model, NoNormalize) : matrix_(m), model_(model) {}

  static Scalar op_norm(const Matrix2& m) {
    // Largest singular value of a 2x2 matrix in closed form.
    const Scalar f = m.squaredNorm();
    const Scalar det = m.determinant();
    const Scalar disc = std::sqrt(std::max(Scalar(0), f * f - 4 * det * det));
    return std::sqrt((f + disc) / 2);
  }

  Matrix2 matrix_;
  Model model_;
};

using Mobius = MobiusMap<double>;
/// Extended-precision map; used to store group generators.
using MobiusExt = MobiusMap<long double>;

/// f after g. Throws LogicError when the model tags differ.
template <typename Scalar>
MobiusMap<Scalar> compose(const MobiusMap<Scalar>& f, const MobiusMap<Scalar>& g) {
  if (f.model() != g.model()) throw LogicError("mobius_compose: mismatched model tags");
  const typename MobiusMap<Scalar>::Matrix2 m = f.matrix() * g.matrix();
  // Products of long words can lose the determinant to cancellation; the
  // exact product is unimodular, so keep it unnormalized then.
  if (!(m.determinant() > Scalar(0))) return MobiusMap<Scalar>::FromSL2(m, f.model());
  return MobiusMap<Scalar>(m, f.model());
}

template <typename Scalar>
MobiusMap<Scalar> operator*(const MobiusMap<Scalar>& f, const MobiusMap<Scalar>& g) {
  return compose(f, g);
}

/// 2 arccosh(|tr|/2); throws NumericalError("not hyperbolic") when |tr| <= 2.
template <typename Scalar>
Scalar translation_length(const MobiusMap<Scalar>& f) {
  using std::abs;
  const Scalar t = abs(f.trace());
  if (!(t > Scalar(2))) throw NumericalError("translation_length: not hyperbolic");
  return 2 * std::acosh(t / 2);
}

/// Hyperbolic distance in the Poincare disk.
double disk_distance(Complex z, Complex w);

/// Disk isometry z -> (z - p)/(1 - conj(p) z), sending p to the origin.
Mobius disk_recentering(Complex p);

/// Point at hyperbolic distance `s` from `from` along the geodesic towards `to`.
Complex disk_geodesic_point(Complex from, Complex to, double s);

/// Fenchel-Nielsen coordinates of a genus-2 surface.
///
/// The pants decomposition consists of one separating curve and one
/// non-separating curve inside each of the two one-holed tori it bounds:
///   lengths[0], twists[0]  separating curve
///   lengths[1], twists[1]  non-separating curve of the first torus
///   lengths[2], twists[2]  non-separating curve of the second torus
/// Pinching lengths[0] splits the surface and drives one eigenvalue to zero;
/// pinching lengths[1] or lengths[2] only pushes eigenvalues towards 1/4.
struct FNCoords {
  std::array<double, 3> lengths{2.0, 2.0, 2.0};
  std::array<double, 3> twists{0.0, 0.0, 0.0};
  int genus = 2;

  void validate() const;
  double min_length() const;
};

/// A word in the generators: letter k+1 is generator k, -(k+1) its inverse.
using Word = std::vector<int>;

/// Cocompact surface group given by generators and one relator.
///
/// Generators are kept in extended precision; `generators()` exposes double
/// copies for the geometry code, while words are multiplied out in extended
/// precision before rounding.
class FuchsianGroup {
 public:
  FuchsianGroup(std::vector<MobiusExt> generators, Word relator, int genus);
  FuchsianGroup(const std::vector<Mobius>& generators, Word relator, int genus);

  const std::vector<Mobius>& generators() const { return generators_; }
  const std::vector<MobiusExt>& generators_ext() const { return exact_; }
  const Word& relator() const { return relator_; }
  double relator_deviation() const { return relator_deviation_; }
  int genus() const { return genus_; }
  Model model() const { return generators_.front().model(); }

  MobiusExt letter(int l) const;
  MobiusExt evaluate_ext(std::span<const int> word) const;
  Mobius evaluate(std::span<const int> word) const { return evaluate_ext(word).cast<double>(); }

  /// max over cyclic permutations of the relator of the distance to identity.
  double cyclic_relator_deviation() const;

  FuchsianGroup conjugated(const Mobius& by) const;

 private:
  std::vector<MobiusExt> exact_;
  std::vector<Mobius> generators_;
  Word relator_;
  double relator_deviation_ = 0.0;
  int genus_ = 2;
};

struct GroupElement {
  Word word;
  Mobius map;
  long double trace = 0.0L;  // from the extended-precision product
};

/// Visits every freely reduced word of length 1..maxLength depth-first,
/// passing the word and its extended-precision value.
void for_each_word(const FuchsianGroup& group, int maxLength,
                   const std::function<void(const Word&, const MobiusExt&)>& visit);

/// All freely reduced words of length 1..maxLength, in shortlex order.
std::vector<GroupElement> enumerate_words(const FuchsianGroup& group, int maxLength);

struct SystoleEstimate {
  double length = 0.0;
  Word word;
};

/// Shortest translation length over freely reduced words up to maxLength.
SystoleEstimate shortest_translation(const FuchsianGroup& group, int maxLength);

FuchsianGroup fn_to_group(const FNCoords& coords);

/// Side pairings of the regular octagon with interior angles pi/4.
FuchsianGroup bolza_group();

}  // namespace ylab
