#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qdmem/analysis.hpp"
#include "qdmem/scenario.hpp"

namespace qdmem {

// ground truth and synthetic data products of one scenario run
struct SimOutputs {
  PhotonWavepacket at_cell;  // spectrum and flux arriving at the memory
  StorageOutcome storage;
  ArrivalHistogram reference;                 // control-off normalization run
  std::vector<ArrivalHistogram> storage_runs;  // one per requested tau_s
  HbtOutput hbt;
  FpiScan fpi;
  std::vector<std::pair<double, double>> sweep;  // (tau_ns, eta_internal)
};

// named-stream child seed: every consumer derives from the one scenario seed
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);

SimOutputs simulate(const Scenario& s);

// the estimator chain over in-memory outputs; mirrors run_analyze
AnalysisReport analyze_outputs(const SimOutputs& sim, const Scenario& s);

// internal efficiency of the scenario input per storage time
std::vector<std::pair<double, double>> sweep_internal_efficiency(
    const Scenario& s, const std::vector<double>& taus);

// file-level entry points; throw std::runtime_error on I/O failure.
// sweep_grid, when non-empty, replaces the storage-time list as the grid
// behind sweep.csv
void run_simulate(const Scenario& s, const std::string& out_dir,
                  const std::vector<double>& sweep_grid = {});
AnalysisReport run_analyze(const Scenario& s, const std::string& data_dir,
                           const std::string& report_path);
void run_sweep(const Scenario& s, const std::vector<double>& taus,
               const std::string& out_path);

struct CriterionResult {
  std::string name;
  std::string target;
  std::string obtained;
  std::string tolerance;
  bool pass = false;
};

// every reference-figure criterion plus the property suites; the tolerances
// absorb Poisson variation, so any seed should pass
std::vector<CriterionResult> run_reproduce_paper(
    std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace qdmem
