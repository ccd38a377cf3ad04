#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qdmem/io.hpp"
#include "qdmem/pipeline.hpp"
#include "qdmem/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitAcceptance = 3;

struct Options {
  std::string scenario_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<double> taus;
  std::string sweep_spec;
  std::string data_dir;
};

std::vector<double> parse_sweep_spec(const std::string& spec) {
  double start = 0.0, stop = 0.0, step = 0.0;
  char extra = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &start, &stop, &step,
                  &extra) != 3 ||
      step <= 0.0 || stop < start)
    throw std::runtime_error("--sweep-tau expects start:stop:step with "
                             "step > 0 and stop >= start");
  std::vector<double> taus;
  for (double t = start; t <= stop + 1e-9; t += step) taus.push_back(t);
  return taus;
}

// scenario from file (or the bundled calibration) with CLI overrides applied
qdmem::Scenario load_scenario(const Options& opt) {
  qdmem::Scenario s;
  if (!opt.scenario_path.empty())
    s = qdmem::parse_scenario(qdmem::io::read_file(opt.scenario_path));
  else
    s = qdmem::reference_scenario();
  if (opt.seed) s.run.seed = *opt.seed;
  if (!opt.taus.empty()) s.run.tau_s_list_ns = opt.taus;
  return s;
}

int validated(const qdmem::Scenario& s) {
  auto bad = qdmem::validate(s);
  if (bad.empty()) return kExitOk;
  std::fprintf(stderr, "scenario is invalid:\n");
  for (const auto& msg : bad) std::fprintf(stderr, "  - %s\n", msg.c_str());
  return kExitValidation;
}

void print_rows(const std::vector<qdmem::CriterionResult>& rows) {
  for (const auto& r : rows)
    std::printf("%s  %s: obtained %s (target %s, tolerance %s)\n",
                r.pass ? "PASS" : "FAIL", r.name.c_str(), r.obtained.c_str(),
                r.target.c_str(), r.tolerance.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulator and analysis toolkit for single-photon storage in "
               "a warm-vapor memory"};
  app.require_subcommand(1);
  Options opt;

  auto* sim = app.add_subcommand(
      "simulate", "synthesize histograms, event streams and scan traces");
  sim->add_option("--scenario", opt.scenario_path, "scenario file");
  sim->add_option("--out", opt.out, "output directory")->required();
  sim->add_option("--seed", opt.seed, "override the scenario seed");
  sim->add_option("--tau", opt.taus, "storage times in ns");
  sim->add_option("--sweep-tau", opt.sweep_spec,
                  "efficiency sweep grid start:stop:step in ns");

  auto* ana = app.add_subcommand(
      "analyze", "recover the reference figures from simulated data");
  ana->add_option("--scenario", opt.scenario_path, "scenario file");
  ana->add_option("--data", opt.data_dir, "directory written by simulate")
      ->required();
  ana->add_option("--out", opt.out, "report path (default report.json in "
                                    "the data directory)");

  auto* swp = app.add_subcommand(
      "sweep", "internal efficiency versus storage time");
  swp->add_option("--scenario", opt.scenario_path, "scenario file");
  swp->add_option("--sweep-tau", opt.sweep_spec, "grid start:stop:step in ns")
      ->required();
  swp->add_option("--out", opt.out, "output CSV path")->required();

  auto* rep = app.add_subcommand(
      "reproduce-paper", "run every acceptance criterion and report "
                         "pass/fail per row");
  rep->add_option("--seed", opt.seed, "override the bundled seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      qdmem::Scenario s = load_scenario(opt);
      if (int rc = validated(s)) return rc;
      std::vector<double> grid;
      if (!opt.sweep_spec.empty()) grid = parse_sweep_spec(opt.sweep_spec);
      qdmem::run_simulate(s, opt.out, grid);
      std::printf("simulation written to %s\n", opt.out.c_str());
      return kExitOk;
    }
    if (ana->parsed()) {
      qdmem::Scenario s = load_scenario(opt);
      if (int rc = validated(s)) return rc;
      std::string report = opt.out.empty()
                               ? opt.data_dir + "/report.json"
                               : opt.out;
      qdmem::AnalysisReport r = qdmem::run_analyze(s, opt.data_dir, report);
      std::printf("%s", qdmem::io::report_table(r).c_str());
      std::printf("report written to %s\n", report.c_str());
      return kExitOk;
    }
    if (swp->parsed()) {
      qdmem::Scenario s = load_scenario(opt);
      if (int rc = validated(s)) return rc;
      auto taus = parse_sweep_spec(opt.sweep_spec);
      qdmem::run_sweep(s, taus, opt.out);
      std::printf("%zu sweep rows written to %s\n", taus.size(),
                  opt.out.c_str());
      return kExitOk;
    }
    if (rep->parsed()) {
      auto rows = qdmem::run_reproduce_paper(opt.seed);
      print_rows(rows);
      std::size_t failed = 0;
      for (const auto& r : rows) failed += r.pass ? 0 : 1;
      std::printf("%zu/%zu criteria passed\n", rows.size() - failed,
                  rows.size());
      return failed == 0 ? kExitOk : kExitAcceptance;
    }
  } catch (const qdmem::ScenarioParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitOk;
}
