#pragma once

#include <cstdint>
#include <vector>

#include "qdmem/qd_source.hpp"
#include "qdmem/spectra.hpp"

namespace qdmem {

struct DetectorParams {
  double irf_fwhm_ps = 93.0;  // gaussian response, combined over two channels
  double dark_rate_cps = 0.0;
  double efficiency = 1.0;
};

struct SyncChain {
  double laser_rate_mhz = 80.0;
  int pulse_pick_divisor = 2;
  double trigger_limit_mhz = 10.0;
};

struct TriggerFraction {
  double of_picked = 1.0;  // fraction of picked pulses that get recorded
  double of_laser = 1.0;   // same count referred to the raw laser rate
  double picked_rate_mhz = 0.0;
};

// trigger-limited acquisition fraction, snapped to the nearest power-of-two
// subdivision of the pulse stream
TriggerFraction effective_trigger_fraction(const SyncChain& sync);

// exponential arrival profile starting at t0, holding `fraction` of triggers
struct ExpProfile {
  double t0_ns = 0.0;
  double tau_ns = 1.0;
  double fraction = 0.0;
};

// gaussian arrival profile (retrieval peak)
struct GaussProfile {
  double mu_ns = 0.0;
  double sigma_ns = 1.0;
  double fraction = 0.0;
};

struct ArrivalHistogram {
  double bin_width_ps = 100.0;
  double t0_ns = 0.0;  // left edge of the first bin
  std::uint64_t n_triggers = 0;
  double background_per_bin = 0.0;
  double tau_s_ns = -1.0;  // storage-time marker; < 0 means none
  std::vector<std::uint64_t> counts;
};

// per-bin expectation values: profiles folded with the gaussian IRF via the
// closed-form convolved distribution functions, plus flat background
std::vector<double> expected_bin_means(const ExpProfile& leak,
                                       const GaussProfile& retrieval,
                                       const DetectorParams& det,
                                       std::uint64_t n_triggers,
                                       double window_ns, double bin_width_ps,
                                       double background_per_bin);

// Poisson draw per bin around the expectation values; deterministic per seed
ArrivalHistogram synthesize_histogram(const ExpProfile& leak,
                                      const GaussProfile& retrieval,
                                      const DetectorParams& det,
                                      std::uint64_t n_triggers,
                                      double window_ns, double bin_width_ps,
                                      double background_per_bin,
                                      std::uint64_t seed);

struct CoincidenceHistogram {
  double bin_width_ns = 0.1;
  double span_ns = 40.0;  // delays cover [-span, +span)
  double rep_period_ns = 12.5;
  std::uint64_t n_pulses = 0;
  std::vector<std::uint64_t> counts;
};

// all cross-detector pairs with signed delay inside [-span, +span)
CoincidenceHistogram coincidence_histogram(
    const std::vector<std::int64_t>& det_a_ps,
    const std::vector<std::int64_t>& det_b_ps, double bin_width_ns,
    double span_ns, double rep_period_ns, std::uint64_t n_pulses);

struct HbtOutput {
  CoincidenceHistogram hist;
  std::vector<std::int64_t> det_a_ps;  // jittered absolute timestamps
  std::vector<std::int64_t> det_b_ps;
};

// 50/50 split onto two virtual detectors with per-channel timing jitter
// sized so the combined pair response matches irf_fwhm_ps
HbtOutput simulate_hbt(const std::vector<EmissionEvent>& events,
                       double rep_rate_mhz, const DetectorParams& det,
                       std::uint64_t n_pulses, double span_ns,
                       double bin_width_ns, std::uint64_t seed);

struct FpiScan {
  std::vector<double> sample;     // scan position index
  std::vector<double> intensity;  // counts
  double true_ghz_per_sample = 0.0;
};

// piezo-scan trace of a line through a scanning cavity: transmission orders
// separated by the fsr, each order the line convolved with the instrument
// lorentzian; poisson counting noise on top
FpiScan simulate_fpi_scan(const Lineshape& line, double instrument_fwhm_mhz,
                          double fsr_ghz, double ghz_per_sample, int n_samples,
                          double peak_counts, std::uint64_t seed);

}  // namespace qdmem
