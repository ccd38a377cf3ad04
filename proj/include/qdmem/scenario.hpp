#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qdmem/detection.hpp"
#include "qdmem/optical_chain.hpp"
#include "qdmem/qd_source.hpp"
#include "qdmem/vapor_memory.hpp"

namespace qdmem {

// post-memory etalon; lorentzian treats the stated fwhm as a single peak-1
// peak, airy uses the full periodic transmission
struct EtalonSpec {
  std::string model = "lorentzian";  // or "airy"
  double center_mhz = -500.0;
  double fwhm_mhz = 500.0;
  double fsr_ghz = 25.0;

  Lineshape lineshape() const;
};

struct RunParams {
  std::uint64_t n_triggers = 10000000000ull;  // effective triggers
  std::uint64_t seed = 20260815ull;
  std::vector<double> tau_s_list_ns = {13.8};
  double bin_width_ps = 100.0;
  double window_ns = 25.0;
  double background_per_bin = 30.0;
  std::uint64_t hbt_pulses = 10000000ull;
  double hbt_photons_per_pulse = 0.05;  // brightness at the correlator tap
  double hbt_span_ns = 80.0;
  double hbt_bin_ns = 0.1;
  double fpi_fsr_ghz = 12.3;
  double fpi_instrument_fwhm_mhz = 150.0;
  double fpi_ghz_per_sample = 0.05;
  int fpi_samples = 640;
  double fpi_peak_counts = 100000.0;
};

struct Scenario {
  QdParams qd;
  double temperature_k = 17.0;  // operating point on the tuning curve
  LossBudget budget = default_loss_budget();
  EtalonSpec etalon;
  // observed-decay stretch factors; leakage passes both
  double etalon_decay_stretch = 1.47 / 1.39;
  DispersiveCell cell{60.0, 2.23 / 1.47};
  MemoryParams memory;
  DetectorParams detector;
  SyncChain sync;
  RunParams run;
};

// bundled calibration reproducing the reference figures
Scenario reference_scenario();

// every violated invariant, empty when the scenario is usable
std::vector<std::string> validate(const Scenario& s);

// flat sectioned key=value text; serialize(parse(serialize(s))) is
// byte-identical to serialize(s)
std::string serialize_scenario(const Scenario& s);

struct ScenarioParseError : std::runtime_error {
  ScenarioParseError(int line_no, const std::string& what);
  int line = 0;
};

// throws ScenarioParseError on malformed input
Scenario parse_scenario(const std::string& text);

}  // namespace qdmem
