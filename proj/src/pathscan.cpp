#include "ylab/pathscan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "ylab/io.hpp"

namespace ylab {

SurfaceSample compute_sample(const FNCoords& coords, int eigCount, const SampleOptions& options) {
  coords.validate();
  SurfaceSample s;
  s.coords = coords;
  const FuchsianGroup group = fn_to_group(coords);
  s.domain = escalating_dirichlet_domain(group, default_word_radius(coords), options.maxWordRadius);
  s.mesh = mesh_domain(s.domain, options.hTarget);
  s.ops = assemble_operators(s.mesh);
  s.spectrum = lowest_eigenpairs(s.ops.K, s.ops.M, eigCount, options.eig);
  return s;
}

SurfaceSample compute_bolza_sample(int eigCount, const SampleOptions& options) {
  SurfaceSample s;
  s.domain = dirichlet_domain(bolza_group());
  s.mesh = mesh_domain(s.domain, options.hTarget);
  s.ops = assemble_operators(s.mesh);
  s.spectrum = lowest_eigenpairs(s.ops.K, s.ops.M, eigCount, options.eig);
  return s;
}

FNCoords PathSpec::at(double t) const {
  FNCoords c = start;
  for (std::size_t i = 0; i < 3; ++i) {
    c.lengths[i] = std::exp((1.0 - t) * std::log(start.lengths[i]) + t * std::log(end.lengths[i]));
    c.twists[i] = (1.0 - t) * start.twists[i] + t * end.twists[i];
  }
  // Keep the endpoints exact.
  if (t == 0.0) c = start;
  if (t == 1.0) c = end;
  return c;
}

void PathSpec::validate() const {
  start.validate();
  end.validate();
  if (sampleCount < 2) throw LogicError("PathSpec: sampleCount must be >= 2");
  // Geometric interpolation is monotone, so the endpoints bound every sample.
  if (std::min(start.min_length(), end.min_length()) < kPinchingFloor)
    throw LogicError("PathSpec: lengths below the pinching floor 0.1");
}

Eigen::MatrixXd transport_eigenvectors(const SurfaceSample& from, const SurfaceSample& to) {
  const MeshLocator locator(from.mesh);
  const Eigen::MatrixXd& X = from.spectrum.eigenvectors;
  const std::size_t dofs = to.mesh.class_count();
  std::vector<int> rep(dofs, -1);
  for (std::size_t x = 0; x < to.mesh.nodes.size(); ++x) {
    const int d = to.ops.dof[x];
    if (rep[static_cast<std::size_t>(d)] < 0) rep[static_cast<std::size_t>(d)] = static_cast<int>(x);
  }
  Eigen::MatrixXd P(static_cast<Eigen::Index>(dofs), X.cols());
  for (std::size_t d = 0; d < dofs; ++d) {
    const Complex z = to.mesh.nodes[static_cast<std::size_t>(rep[d])];
    const Complex reduced = from.domain.reduce(z).first;
    const auto hit = locator.locate(reduced);
    P.row(static_cast<Eigen::Index>(d)).setZero();
    for (std::size_t k = 0; k < 3; ++k) {
      const int node = from.mesh.triangles[static_cast<std::size_t>(hit.triangle)][k];
      P.row(static_cast<Eigen::Index>(d)) += hit.bary[k] * X.row(from.ops.dof[static_cast<std::size_t>(node)]);
    }
  }
  return P;
}

std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight) {
  const Eigen::Index n = weight.rows();
  if (weight.cols() != n) throw LogicError("max_weight_assignment: matrix must be square");
  // Hungarian method on cost = -weight, 1-based potentials.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Eigen::Index> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (Eigen::Index i = 1; i <= n; ++i) {
    p[0] = i;
    Eigen::Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Eigen::Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = -weight(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Eigen::Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (Eigen::Index j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = static_cast<int>(j - 1);
  return assignment;
}

Matching match_eigenbranches(const Eigen::MatrixXd& prev, const SpectrumResult& next, const SparseMatrix& M,
                             double minOverlap, const std::vector<bool>& checked) {
  const Eigen::MatrixXd& X = next.eigenvectors;
  if (prev.cols() != X.cols() || prev.rows() != X.rows())
    throw LogicError("match_eigenbranches: eigenvector blocks differ in shape");
  const Eigen::Index k = X.cols();
  const Eigen::MatrixXd MP = M * prev;
  Eigen::MatrixXd overlap = (MP.transpose() * X).cwiseAbs();
  for (Eigen::Index i = 0; i < k; ++i) {
    const double nrm = std::sqrt(std::max(1e-300, prev.col(i).dot(MP.col(i))));
    overlap.row(i) /= nrm;
  }
  // A tiny bias towards the diagonal resolves exact ties by eigenvalue order.
  Eigen::MatrixXd weight = overlap.cwiseAbs2();
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) weight(i, j) -= 1e-12 * static_cast<double>(std::abs(i - j));
  Matching out;
  out.permutation = max_weight_assignment(weight);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double o = overlap(i, out.permutation[static_cast<std::size_t>(i)]);
    out.overlaps.push_back(o);
    const bool check = checked.empty() || checked[static_cast<std::size_t>(i)];
    if (check && o < minOverlap) out.flagged = true;
  }
  return out;
}

std::vector<CrossingEvent> refine_crossing(const std::function<double(double)>& f, double lo, double hi, double tol,
                                           int presamples) {
  if (!(hi > lo)) throw LogicError("refine_crossing: empty bracket");
  std::vector<double> ts{lo}, fs{f(lo)};
  for (int i = 1; i <= presamples; ++i) {
    const double t = lo + (hi - lo) * i / (presamples + 1);
    ts.push_back(t);
    fs.push_back(f(t));
  }
  ts.push_back(hi);
  fs.push_back(f(hi));
  std::vector<CrossingEvent> events;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    double a = ts[i], b = ts[i + 1], fa = fs[i], fb = fs[i + 1];
    if (fa == 0.0) {
      events.push_back({a, ts[i], ts[i + 1], -1, -1, 0.0, false, false});
      continue;
    }
    if (fa * fb > 0.0 || fb == 0.0) continue;
    while (b - a >= tol) {
      const double m = 0.5 * (a + b);
      const double fm = f(m);
      if (fm == 0.0) {
        a = b = m;
        fa = fb = 0.0;
        break;
      }
      if (fa * fm < 0.0) {
        b = m;
        fb = fm;
      } else {
        a = m;
        fa = fm;
      }
    }
    CrossingEvent e;
    e.bracketLo = a;
    e.bracketHi = b;
    e.tStar = b > a ? a - fa * (b - a) / (fb - fa) : a;
    e.slope = b > a ? (fb - fa) / (b - a) : 0.0;
    events.push_back(e);
  }
  if (fs.back() == 0.0) events.push_back({hi, hi, hi, -1, -1, 0.0, false, false});
  if (events.empty()) throw NumericalError("refine_crossing: no sign change in bracket");
  return events;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int count_strictly_below(const Eigen::VectorXd& v, double thr) {
  int c = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] < thr) ++c;
  return c;
}

}  // namespace

ScanReport scan_path(const PathSpec& path, const ModelParams& params, int eigCount, const ScanOptions& options) {
  const auto ineq = check_basic_inequality(params);
  if (!ineq.holds) {
    std::ostringstream os;
    os << "scan_path: basic inequality 1/4 < " << params.threshold << " < " << params.lambda1N << " fails for m="
       << params.m << "; refusing to scan";
    throw LogicError(os.str());
  }
  path.validate();
  const double thr = static_cast<double>(params.threshold);

  std::vector<double> ts;
  for (int i = 0; i < path.sampleCount; ++i) ts.push_back(static_cast<double>(i) / (path.sampleCount - 1));
  std::vector<SurfaceSample> samples(ts.size());
  parallel_for(ts.size(), options.threads,
               [&](std::size_t i) { samples[i] = compute_sample(path.at(ts[i]), eigCount, options.sample); });

  auto guard = [&](const SurfaceSample& s, double t) {
    if (s.spectrum.eigenvalues[s.spectrum.size() - 1] < thr + options.coverageMargin) {
      std::ostringstream os;
      os << "scan_path: top eigenvalue below threshold + " << options.coverageMargin << " at t=" << t
         << ", increase eigCount";
      throw NumericalError(os.str());
    }
  };
  for (std::size_t i = 0; i < ts.size(); ++i) guard(samples[i], ts[i]);

  // Match consecutive samples, halving steps whose overlaps are poor.
  std::vector<int> depth(ts.size() - 1, 0);
  std::vector<Matching> matches;
  for (std::size_t i = 0; i + 1 < ts.size();) {
    const Eigen::MatrixXd P = transport_eigenvectors(samples[i], samples[i + 1]);
    std::vector<bool> checked;
    const auto& a = samples[i].spectrum.eigenvalues;
    const auto& b = samples[i + 1].spectrum.eigenvalues;
    for (Eigen::Index k = 0; k < a.size(); ++k) checked.push_back(a[k] < thr + options.matchBand || b[k] < thr + options.matchBand);
    Matching m = match_eigenbranches(P, samples[i + 1].spectrum, samples[i + 1].ops.M, options.minOverlap, checked);
    if (!m.flagged) {
      matches.push_back(std::move(m));
      ++i;
      continue;
    }
    if (depth[i] >= options.maxHalvings) {
      std::ostringstream os;
      os << "scan_path: eigenbranch matching failed on [" << ts[i] << ", " << ts[i + 1] << "] after "
         << options.maxHalvings << " step halvings";
      throw NumericalError(os.str());
    }
    const double tm = 0.5 * (ts[i] + ts[i + 1]);
    SurfaceSample mid = compute_sample(path.at(tm), eigCount, options.sample);
    guard(mid, tm);
    const int d = depth[i] + 1;
    ts.insert(ts.begin() + static_cast<std::ptrdiff_t>(i + 1), tm);
    samples.insert(samples.begin() + static_cast<std::ptrdiff_t>(i + 1), std::move(mid));
    depth[i] = d;
    depth.insert(depth.begin() + static_cast<std::ptrdiff_t>(i + 1), d);
  }

  ScanReport report;
  report.params = params;
  report.track.samples = ts;
  const std::size_t nb = static_cast<std::size_t>(eigCount + 1);
  report.track.branches.assign(nb, std::vector<double>(ts.size(), 0.0));
  std::vector<int> position(nb);
  for (std::size_t b = 0; b < nb; ++b) position[b] = static_cast<int>(b);
  for (std::size_t s = 0; s < ts.size(); ++s) {
    if (s > 0) {
      const auto& perm = matches[s - 1].permutation;
      for (auto& p : position) p = perm[static_cast<std::size_t>(p)];
      report.track.matching.push_back(perm);
      report.track.minOverlap.push_back(*std::min_element(matches[s - 1].overlaps.begin(), matches[s - 1].overlaps.end()));
    }
    for (std::size_t b = 0; b < nb; ++b)
      report.track.branches[b][s] = samples[s].spectrum.eigenvalues[position[b]];
  }

  for (std::size_t s = 0; s < ts.size(); ++s) {
    const double tol = default_null_tol(samples[s].spectrum);
    const IndexReport r = surface_index(samples[s].spectrum, params, tol);
    report.spectra.push_back(samples[s].spectrum.eigenvalues);
    report.indexProfile.push_back(r.morseIndex);
    report.nullityProfile.push_back(r.nullity);
    report.nullTols.push_back(tol);
    if (s == 0) report.startReport = r;
    if (s + 1 == ts.size()) report.endReport = r;
  }
  report.startNondegenerate = report.startReport.nullity == 0;
  report.endNondegenerate = report.endReport.nullity == 0;

  // Crossings: the sorted eigenvalues between the two counts change sign.
  for (std::size_t s = 0; s + 1 < ts.size(); ++s) {
    const int cLo = count_strictly_below(report.spectra[s], thr);
    const int cHi = count_strictly_below(report.spectra[s + 1], thr);
    if (cLo == cHi) continue;
    std::map<double, Eigen::VectorXd> cache{{ts[s], report.spectra[s]}, {ts[s + 1], report.spectra[s + 1]}};
    double maxResidual = std::max(samples[s].spectrum.max_residual(), samples[s + 1].spectrum.max_residual());
    auto spectrum_at = [&](double t) -> const Eigen::VectorXd& {
      auto it = cache.find(t);
      if (it == cache.end()) {
        const SurfaceSample probe = compute_sample(path.at(t), eigCount, options.sample);
        maxResidual = std::max(maxResidual, probe.spectrum.max_residual());
        it = cache.emplace(t, probe.spectrum.eigenvalues).first;
      }
      return it->second;
    };
    for (int j = std::min(cLo, cHi) + 1; j <= std::max(cLo, cHi); ++j) {
      auto f = [&](double t) { return spectrum_at(t)[j] - thr; };
      std::vector<CrossingEvent> events;
      if (options.refine) {
        events = refine_crossing(f, ts[s], ts[s + 1], options.refineTol);
      } else {
        CrossingEvent e;
        e.bracketLo = ts[s];
        e.bracketHi = ts[s + 1];
        const double fa = f(ts[s]), fb = f(ts[s + 1]);
        e.tStar = ts[s] - fa * (ts[s + 1] - ts[s]) / (fb - fa);
        e.slope = (fb - fa) / (ts[s + 1] - ts[s]);
        events.push_back(e);
      }
      // Branch id: the branch sitting at sorted position j on the side where
      // the eigenvalue is above the threshold.
      const std::size_t side = cLo < cHi ? s : s + 1;
      for (auto& e : events) {
        e.sortedIndex = j;
        for (std::size_t b = 0; b < nb; ++b)
          if (report.track.branches[b][side] == report.spectra[side][j]) e.branch = static_cast<int>(b);
        const double nullTol = std::max(2.0 * maxResidual, 1e-4);
        const double atStar = std::abs(f(e.tStar));
        e.nullity = atStar <= nullTol + std::abs(e.slope) * (e.bracketHi - e.bracketLo);
        e.candidate = e.nullity && report.startNondegenerate && report.endNondegenerate;
        report.crossings.push_back(e);
      }
    }
  }
  return report;
}

void write_scan_csv(const ScanReport& report, std::ostream& out) {
  const auto& tr = report.track;
  out << "t";
  for (std::size_t b = 1; b < tr.branches.size(); ++b) out << ",branch" << b;
  out << ",index,nullity\n";
  for (std::size_t s = 0; s < tr.samples.size(); ++s) {
    out << format_double(tr.samples[s]);
    for (std::size_t b = 1; b < tr.branches.size(); ++b) out << ',' << format_double(tr.branches[b][s]);
    out << ',' << report.indexProfile[s] << ',' << report.nullityProfile[s] << '\n';
  }
}

void write_events_json(const ScanReport& report, std::ostream& out) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : report.crossings)
    events.push_back({{"tStar", e.tStar},
                      {"bracket", {e.bracketLo, e.bracketHi}},
                      {"branch", e.branch},
                      {"sortedIndex", e.sortedIndex},
                      {"slope", e.slope},
                      {"nullity", e.nullity},
                      {"candidate", e.candidate}});
  nlohmann::json j = {{"m", report.params.m},
                      {"threshold", report.params.threshold},
                      {"crossings", events},
                      {"startIndex", report.startReport.morseIndex},
                      {"endIndex", report.endReport.morseIndex},
                      {"startNondegenerate", report.startNondegenerate},
                      {"endNondegenerate", report.endNondegenerate},
                      {"samples", report.track.samples.size()}};
  out << j.dump(2) << '\n';
}

}  // namespace ylab
