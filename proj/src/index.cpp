#include "ylab/index.hpp"

#include <algorithm>
#include <ostream>

#include "json.hpp"

namespace ylab {

ModelParams make_params(int m) {
  if (m < 4) throw LogicError("make_params: m must be >= 4");
  ModelParams p;
  p.m = m;
  p.n = m - 2;
  p.scalN = static_cast<long long>(m - 2) * (m - 3);
  if ((p.scalN - 2) % (p.n + 1) != 0) throw LogicError("make_params: threshold is not integral");
  p.threshold = (p.scalN - 2) / (p.n + 1);
  p.lambda1N = m - 2;
  return p;
}

InequalityReport check_basic_inequality(const ModelParams& p) {
  InequalityReport r;
  r.lowerMargin = static_cast<double>(p.threshold) - 0.25;
  r.upperMargin = static_cast<double>(p.lambda1N - p.threshold);
  r.holds = r.lowerMargin > 0.0 && r.upperMargin > 0.0;
  return r;
}

IndexReport morse_index_nullity(const std::vector<SpectralValue>& product, const ModelParams& p, double nullTol,
                                double covered) {
  const double thr = static_cast<double>(p.threshold);
  if (nullTol < 0.0) throw LogicError("morse_index_nullity: nullTol must be nonnegative");
  if (covered < thr + nullTol) throw NumericalError("morse_index_nullity: spectrum does not cover the threshold, increase eigCount");
  IndexReport r;
  r.nullTol = nullTol;
  for (const auto& e : product) {
    if (e.value == 0.0) continue;  // constants
    if (e.value < thr - nullTol) {
      r.contributing.push_back(e);
      r.morseIndex += static_cast<int>(e.multiplicity);
    } else if (std::abs(e.value - thr) <= nullTol) {
      r.nearThreshold.push_back(e);
      r.nullity += static_cast<int>(e.multiplicity);
    }
  }
  return r;
}

IndexReport surface_index(const SpectrumResult& surface, const ModelParams& p, double nullTol) {
  if (surface.size() == 0) throw LogicError("surface_index: empty spectrum");
  const double top = surface.eigenvalues.maxCoeff();
  const double cutoff = static_cast<double>(p.threshold) + nullTol;
  if (top < cutoff) throw NumericalError("surface_index: spectrum does not cover the threshold, increase eigCount");
  const auto sphere = sphere_spectrum(p.n, 1);
  return morse_index_nullity(product_spectrum(sphere, surface.eigenvalues, cutoff), p, nullTol, top);
}

double default_null_tol(const SpectrumResult& surface) { return std::max(2.0 * surface.max_residual(), 1e-4); }

int count_below(const Eigen::VectorXd& values, double a, double covered) {
  if (!(a > 0.0)) throw LogicError("count_below: a must be positive");
  if (a > covered) throw NumericalError("count_below: spectrum does not cover a, increase eigCount");
  int n = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values[i] > 0.0 && values[i] < a) ++n;
  return n;
}

int count_below(const SpectrumResult& spectrum, double a) {
  return count_below(spectrum.eigenvalues, a, spectrum.size() ? spectrum.eigenvalues.maxCoeff() : 0.0);
}

long long scal_product(int m, int k) {
  if (k < 0 || k > m - 2) throw LogicError("scal_product: need 0 <= k <= m - 2");
  return static_cast<long long>(m - 2 * k - 2) * (m - 1);
}

void write_index_json(const IndexReport& report, const ModelParams& p, std::ostream& out) {
  auto entries = [](const std::vector<SpectralValue>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& e : v) a.push_back({{"value", e.value}, {"multiplicity", e.multiplicity}});
    return a;
  };
  const auto ineq = check_basic_inequality(p);
  nlohmann::json j = {{"m", p.m},
                      {"threshold", p.threshold},
                      {"morseIndex", report.morseIndex},
                      {"nullity", report.nullity},
                      {"nullTol", report.nullTol},
                      {"contributing", entries(report.contributing)},
                      {"nearThreshold", entries(report.nearThreshold)},
                      {"basicInequality", ineq.holds},
                      {"lowerMargin", ineq.lowerMargin},
                      {"upperMargin", ineq.upperMargin}};
  out << j.dump(2) << '\n';
}

}  // namespace ylab
