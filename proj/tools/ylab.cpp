#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ylab/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectra of genus-2 hyperbolic surfaces, Morse indices of products with round spheres, "
               "threshold crossings along pinching paths and continuation of the bifurcating branches."};
  std::string configPath, outDir;
  std::optional<int> threads, samples, eigCount;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  app.add_option("--config", configPath, "JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out", outDir, "output directory (overrides the config)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
  app.add_option("--seed", seed, "eigensolver seed");
  app.add_option("--samples", samples, "path samples")->check(CLI::Range(2, 10000));
  app.add_option("--eig-count", eigCount, "nonzero eigenpairs per surface")->check(CLI::Range(1, 500));
  app.add_option("--tol", tol, "eigensolver residual tolerance")->check(CLI::Range(1e-14, 1e-2));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ylab::RunConfig config;
  try {
    std::ifstream in(configPath);
    std::stringstream text;
    text << in.rdbuf();
    config = ylab::parse_config(text.str());
  } catch (const ylab::ConfigError& e) {
    std::cerr << "config error at " << e.what() << '\n';
    return 2;
  }
  if (!outDir.empty()) config.output = outDir;
  if (threads) config.threads = *threads;
  if (seed) config.seed = *seed;
  if (samples) config.path.sampleCount = *samples;
  if (eigCount) config.eigCount = *eigCount;
  if (tol) config.eigTol = *tol;

  try {
    return ylab::run(config, std::cout);
  } catch (const ylab::ConfigError& e) {
    std::cerr << "config error at " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
