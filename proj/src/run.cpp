#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "ylab/config.hpp"
#include "ylab/io.hpp"

namespace ylab {

namespace {

namespace fs = std::filesystem;

class OutputDir {
 public:
  explicit OutputDir(const std::string& path) : root_(path) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw Error("cannot create output directory " + path + ": " + ec.message());
  }

  template <class Fn>
  void write(const std::string& name, Fn&& fn) {
    std::ofstream f(root_ / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (root_ / name).string());
    fn(f);
    files_.push_back(name);
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path root_;
  std::vector<std::string> files_;
};

SampleOptions sample_options(const RunConfig& c) {
  SampleOptions s;
  s.hTarget = c.hTarget;
  s.eig.tol = c.eigTol;
  s.eig.seed = c.seed;
  return s;
}

SurfaceSample surface(const RunConfig& c) {
  return c.bolza ? compute_bolza_sample(c.eigCount, sample_options(c))
                 : compute_sample(c.coords, c.eigCount, sample_options(c));
}

ScanOptions scan_options(const RunConfig& c) {
  ScanOptions o;
  o.sample = sample_options(c);
  o.refineTol = c.refineTol;
  o.threads = c.threads;
  return o;
}

std::string summary_scan(const ScanReport& r) {
  std::ostringstream os;
  os << "m=" << r.params.m << " samples=" << r.track.samples.size() << " crossings=" << r.crossings.size()
     << " i0=" << r.startReport.morseIndex << " i1=" << r.endReport.morseIndex;
  for (const auto& e : r.crossings) os << " t*=" << format_double(e.tStar);
  return os.str();
}

}  // namespace

int run(const RunConfig& c, std::ostream& summary) {
  OutputDir out(c.output);
  std::ostringstream line;
  line << command_name(c.command) << ' ';

  switch (c.command) {
    case Command::SphereSpec: {
      const SphereSpectrum s = sphere_spectrum(c.sphereN, c.jMax);
      out.write("spectrum.csv", [&](std::ostream& f) { write_sphere_csv(s, f); });
      line << "n=" << c.sphereN << " jMax=" << c.jMax << " lambda1=" << (s.values.size() > 1 ? s.values[1] : 0.0);
      break;
    }
    case Command::SurfaceSpec: {
      const SurfaceSample s = surface(c);
      out.write("spectrum.csv", [&](std::ostream& f) { write_spectrum_csv(s.spectrum, f); });
      const auto clusters = s.spectrum.clusters();
      line << "triangles=" << s.mesh.triangle_count() << " area=" << format_double(s.mesh.weighted_area());
      if (clusters.size() > 1)
        line << " lambda1=" << format_double(clusters[1].first) << " multiplicity=" << clusters[1].second;
      line << " maxResidual=" << s.spectrum.max_residual();
      break;
    }
    case Command::Index: {
      const ModelParams p = make_params(c.m);
      const SurfaceSample s = surface(c);
      const double tol = c.nullTol > 0.0 ? c.nullTol : default_null_tol(s.spectrum);
      const IndexReport r = surface_index(s.spectrum, p, tol);
      const auto ineq = check_basic_inequality(p);
      out.write("spectrum.csv", [&](std::ostream& f) { write_spectrum_csv(s.spectrum, f); });
      out.write("index.json", [&](std::ostream& f) { write_index_json(r, p, f); });
      line << "m=" << p.m << " i=" << r.morseIndex << " ν=" << r.nullity << " lowerMargin=" << ineq.lowerMargin
           << " upperMargin=" << ineq.upperMargin;
      break;
    }
    case Command::PathScan: {
      const ModelParams p = make_params(c.m);
      const ScanReport r = scan_path(c.path, p, c.eigCount, scan_options(c));
      out.write("scan.csv", [&](std::ostream& f) { write_scan_csv(r, f); });
      out.write("events.json", [&](std::ostream& f) { write_events_json(r, f); });
      line << summary_scan(r);
      break;
    }
    case Command::Branch: {
      const ModelParams p = make_params(c.m);
      const ScanReport r = scan_path(c.path, p, c.eigCount, scan_options(c));
      out.write("scan.csv", [&](std::ostream& f) { write_scan_csv(r, f); });
      out.write("events.json", [&](std::ostream& f) { write_events_json(r, f); });
      if (r.crossings.empty()) throw NumericalError("branch: the scan found no threshold crossing to continue");
      const CrossingContinuation cc =
          continue_crossing(r.crossings.front(), c.path, p, c.eigCount, sample_options(c), c.continuation, c.threads);
      out.write("spectrum.csv", [&](std::ostream& f) { write_spectrum_csv(cc.sample.spectrum, f); });
      out.write("branch.jsonl", [&](std::ostream& f) { write_branch_jsonl(cc.branches, f); });
      if (c.writeNodes)
        for (std::size_t b = 0; b < cc.branches.size(); ++b)
          out.write("branch_nodes_" + std::to_string(b) + ".csv",
                    [&](std::ostream& f) { write_branch_nodes_csv(cc.branches[b], f); });
      line << summary_scan(r) << " branches=" << cc.branches.size();
      if (!cc.branches.empty() && cc.branches.front().points.size() > 1) {
        const auto& pts = cc.branches.front().points;
        line << " mu1=" << format_double(pts[1].mu) << " muLast=" << format_double(pts.back().mu)
             << " distLast=" << format_double(pts.back().distanceFromConstant);
      }
      break;
    }
  }

  std::vector<std::string> files = out.files();
  files.push_back("meta.json");
  out.write("meta.json", [&](std::ostream& f) {
    nlohmann::ordered_json meta = {{"version", kVersion},
                                   {"command", command_name(c.command)},
                                   {"seed", c.seed},
                                   {"threads", c.threads},
                                   {"outputs", files},
                                   {"config", nlohmann::json::parse(config_to_json(c))}};
    f << meta.dump(2) << '\n';
  });
  summary << line.str() << '\n';
  return 0;
}

}  // namespace ylab
