#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "locpert/calculus.hpp"
#include "locpert/error.hpp"
#include "locpert/run.hpp"
#include "locpert/snapshot.hpp"
#include "locpert/verify.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerify = 3;

struct Overrides {
  std::string output;
  long long seed = -1;
  int ensemble = 0;
  int n_steps = 0;
  int threads = -1;
};

locpert::RunConfig load(const std::string& path, const Overrides& o) {
  locpert::ConfigDocument doc = locpert::ConfigDocument::load(path);
  if (o.seed >= 0) doc.set("run", "seed", o.seed);
  if (o.ensemble > 0) doc.set("run", "ensemble", o.ensemble);
  if (o.n_steps > 0) doc.set("run", "n_steps", o.n_steps);
  if (o.threads >= 0) doc.set("run", "threads", o.threads);
  return locpert::parse_run_config(doc);
}

std::filesystem::path output_dir(const locpert::RunConfig& cfg, const Overrides& o) {
  return o.output.empty() ? locpert::output_directory(cfg) : std::filesystem::path(o.output);
}

std::vector<double> parse_dts(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw locpert::ConfigError("--dts: malformed value '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int simulate(const std::string& path, const Overrides& o) {
  const locpert::RunConfig cfg = load(path, o);
  const auto dir = output_dir(cfg, o);
  const locpert::RunSummary s = locpert::run_simulation(cfg, dir);
  std::cout << "wrote " << s.files.size() + 1 << " files to " << dir.string() << '\n';
  return 0;
}

int converge(const std::string& path, const Overrides& o, const std::string& dts_text,
             const std::vector<std::string>& metrics) {
  locpert::RunConfig cfg = load(path, o);
  if (!metrics.empty()) cfg.study_metrics = metrics;
  const std::vector<double> dts = dts_text.empty() ? cfg.study_dts : parse_dts(dts_text);
  if (dts.size() < 3) throw locpert::ConfigError("a convergence study needs at least three dt values");
  locpert::StudyResult result;
  try {
    result = locpert::run_convergence(cfg, dts);
  } catch (const locpert::InvalidArgument& e) {
    throw locpert::ConfigError(e.what());
  }
  const auto dir = output_dir(cfg, o);
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "convergence.csv");
  locpert::write_study_csv(csv, result);
  for (const auto& m : result.metrics) {
    std::printf("%-32s slope %7.3f%s\n", m.name.c_str(), m.slope, m.at_roundoff ? "  (round-off)" : "");
  }
  std::cout << "wrote " << (dir / "convergence.csv").string() << '\n';
  return 0;
}

int verify(const std::string& path, const Overrides& o, const std::string& report) {
  const locpert::RunConfig cfg = load(path, o);
  const auto checks = locpert::verify_suite(cfg);
  locpert::write_report(std::cout, checks);
  if (!report.empty()) {
    std::ofstream out(report);
    locpert::write_report(out, checks);
  }
  for (const auto& c : checks) {
    if (!c.pass) return kExitVerify;
  }
  return 0;
}

int inspect(const std::string& path) {
  const locpert::ScalarField f = locpert::read_snapshot(std::filesystem::path(path));
  const locpert::Grid& g = f.grid();
  std::cout << "dim " << g.dim() << "\npoints";
  for (int p = 0; p < g.dim(); ++p) std::cout << ' ' << g.points(p);
  std::cout << "\nextent";
  for (int p = 0; p < g.dim(); ++p) std::printf(" %.17g", g.extent(p));
  std::printf("\nmin %.17g\nmax %.17g\nmean %.17g\nintegral %.17g\nrms %.17g\n", f.values().minCoeff(),
              f.values().maxCoeff(), f.values().mean(), locpert::integrate(f), f.rms());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic perturbation of tensor fields by random diffeomorphism increments"};
  app.set_version_flag("--version", locpert::kVersion);
  app.require_subcommand(1);

  Overrides o;
  std::string config, snapshot, dts, report;
  std::vector<std::string> metrics;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("config", config, "Run configuration file")->required();
    sub->add_option("--output", o.output, "Output directory (overrides LOCPERT_OUTPUT_DIR and [run] output)");
    sub->add_option("--seed", o.seed, "Override [run] seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", o.threads, "Override [run] threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  };

  auto* sim = app.add_subcommand("simulate", "Run the ensemble and write diagnostics, snapshots and a manifest");
  add_run_flags(sim);
  sim->add_option("--ensemble", o.ensemble, "Override [run] ensemble")->check(CLI::PositiveNumber);
  sim->add_option("--n-steps", o.n_steps, "Override [run] n_steps")->check(CLI::PositiveNumber);

  auto* conv = app.add_subcommand("converge", "Time-step refinement study; writes convergence.csv");
  add_run_flags(conv);
  conv->add_option("--dts", dts, "Comma-separated time steps (default: [study] dts)");
  conv->add_option("--metrics", metrics, "Metric names (default: [study] metrics or all)")->delimiter(',');

  auto* ver = app.add_subcommand("verify", "Run the verification suite; exit 3 on any failure");
  add_run_flags(ver);
  ver->add_option("--report", report, "Also write the report to this file");

  auto* ins = app.add_subcommand("inspect", "Print the grid and summary statistics of a .fld snapshot");
  ins->add_option("snapshot", snapshot, "Snapshot file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return simulate(config, o);
    if (*conv) return converge(config, o, dts, metrics);
    if (*ver) return verify(config, o, report);
    return inspect(snapshot);
  } catch (const locpert::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const locpert::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const locpert::RuntimeAbort& e) {
    std::cerr << "run aborted: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
