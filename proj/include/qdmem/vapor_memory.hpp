#pragma once

#include <string>
#include <vector>

#include "qdmem/qd_source.hpp"
#include "qdmem/spectra.hpp"

namespace qdmem {

struct BeatComponent {
  double amplitude = 0.0;  // >= 0; amplitudes over all components sum to 1
  double frequency_mhz = 0.0;
};

struct MemoryParams {
  double acceptance_fwhm_mhz = 560.0;
  double acceptance_center_mhz = -500.0;
  double intrinsic_efficiency = 0.15;  // internal efficiency for matched input
  double readin_share = 0.5;  // exponent splitting intrinsic into in/out halves
  double temporal_match = 0.66;
  double dephase_time_1e_ns = 32.0;
  double dephase_exponent = 2.0;  // 2 gaussian (doppler), 1 exponential
  // calibrated so retrieval is non-monotonic with its maximum at 15.8 ns
  std::vector<BeatComponent> beat_components = {
      {0.672929793, 0.0},
      {0.272932089, 63.709977350},
      {0.054138117, 101.290822302},
  };
  double retrieval_sigma_ns = 0.4247;  // retrieval peak width (about 1 ns fwhm)
  double cell_temperature_c = 60.0;
};

// every violated parameter constraint; empty when usable
std::vector<std::string> memory_violations(const MemoryParams& mem);
// throws std::invalid_argument with the first violation
void validate_memory(const MemoryParams& mem);

struct StorageOutcome {
  double input_flux = 0.0;       // photons per pulse reaching the cell
  double stored_fraction = 0.0;  // per input photon
  double leaked_fraction = 0.0;  // transmits the cell unstored
  double leak_tau_ns = 0.0;      // exponential profile of the leakage
  double spectral_factor = 0.0;  // acceptance-window overlap that was applied
};

// read-in: spectral acceptance, temporal matching, and the read-in share of
// the intrinsic efficiency; the complement leaks through unchanged
StorageOutcome readin(const PhotonWavepacket& wp, const MemoryParams& mem);

// full internal efficiency for a matched input at storage time tau:
// intrinsic * |sum_k a_k exp(i 2 pi nu_k tau)|^2 * exp(-(tau/tau_d)^n)
double retrieval_efficiency(const MemoryParams& mem, double tau_ns);

struct RetrievalResult {
  double retrieved_fraction = 0.0;  // per input photon
  double peak_time_ns = 0.0;
  double sigma_ns = 0.0;
  PhotonWavepacket wavepacket;  // spectrally narrowed output mode
  bool beyond_window = false;   // retrieval overlaps the next pulse
};

RetrievalResult retrieve(const StorageOutcome& stored, const MemoryParams& mem,
                         double tau_s_ns, double window_ns = 25.0);

}  // namespace qdmem
