#include "qdmem/vapor_memory.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace qdmem {

namespace {

double beat_factor(const MemoryParams& mem, double tau_ns) {
  std::complex<double> sum = 0.0;
  for (const auto& c : mem.beat_components) {
    double phase = 2.0 * std::numbers::pi * c.frequency_mhz * tau_ns * 1e-3;
    sum += c.amplitude * std::exp(std::complex<double>(0.0, phase));
  }
  return std::norm(sum);
}

double dephase_factor(const MemoryParams& mem, double tau_ns) {
  return std::exp(-std::pow(tau_ns / mem.dephase_time_1e_ns,
                            mem.dephase_exponent));
}

}  // namespace

std::vector<std::string> memory_violations(const MemoryParams& mem) {
  std::vector<std::string> out;
  if (!(mem.acceptance_fwhm_mhz > 0.0))
    out.push_back("memory acceptance fwhm must be positive");
  if (!(mem.intrinsic_efficiency > 0.0) || mem.intrinsic_efficiency > 1.0)
    out.push_back("intrinsic efficiency must be in (0, 1]");
  if (!(mem.temporal_match > 0.0) || mem.temporal_match > 1.0)
    out.push_back("temporal match must be in (0, 1]");
  if (!(mem.dephase_time_1e_ns > 0.0))
    out.push_back("dephase time must be positive");
  if (!(mem.dephase_exponent > 0.0))
    out.push_back("dephase exponent must be positive");
  if (mem.readin_share < 0.0 || mem.readin_share > 1.0)
    out.push_back("readin share must be in [0, 1]");
  if (!(mem.retrieval_sigma_ns > 0.0))
    out.push_back("retrieval sigma must be positive");
  if (mem.beat_components.empty()) {
    out.push_back("at least one beat component required");
    return out;
  }
  double total = 0.0;
  bool negative = false;
  for (const auto& c : mem.beat_components) {
    negative = negative || c.amplitude < 0.0;
    total += c.amplitude;
  }
  if (negative) out.push_back("beat amplitudes must be non-negative");
  if (std::abs(total - 1.0) > 1e-6)
    out.push_back("beat amplitudes must sum to 1");
  return out;
}

void validate_memory(const MemoryParams& mem) {
  auto bad = memory_violations(mem);
  if (!bad.empty()) throw std::invalid_argument(bad.front());
}

StorageOutcome readin(const PhotonWavepacket& wp, const MemoryParams& mem) {
  validate_memory(mem);
  StorageOutcome out;
  out.input_flux = wp.mean_photon_flux;
  out.leak_tau_ns = wp.tau_ns;
  if (wp.mean_photon_flux == 0.0) return out;

  Lineshape window =
      make_gaussian(mem.acceptance_center_mhz, mem.acceptance_fwhm_mhz);
  out.spectral_factor = spectral_filtered_fraction(wp, window).value;
  double intrinsic_in =
      std::pow(mem.intrinsic_efficiency, mem.readin_share);
  out.stored_fraction =
      intrinsic_in * mem.temporal_match * out.spectral_factor;
  out.leaked_fraction = 1.0 - out.stored_fraction;
  return out;
}

double retrieval_efficiency(const MemoryParams& mem, double tau_ns) {
  validate_memory(mem);
  if (tau_ns < 0.0)
    throw std::domain_error("retrieval_efficiency: storage time must be >= 0");
  return mem.intrinsic_efficiency * beat_factor(mem, tau_ns) *
         dephase_factor(mem, tau_ns);
}

RetrievalResult retrieve(const StorageOutcome& stored, const MemoryParams& mem,
                         double tau_s_ns, double window_ns) {
  validate_memory(mem);
  if (tau_s_ns < 0.0)
    throw std::domain_error("retrieve: storage time must be >= 0");
  RetrievalResult out;
  out.peak_time_ns = tau_s_ns;
  out.sigma_ns = mem.retrieval_sigma_ns;
  out.beyond_window = tau_s_ns + 2.0 * mem.retrieval_sigma_ns > window_ns;

  double intrinsic_out =
      std::pow(mem.intrinsic_efficiency, 1.0 - mem.readin_share);
  out.retrieved_fraction = stored.stored_fraction * intrinsic_out *
                           beat_factor(mem, tau_s_ns) *
                           dephase_factor(mem, tau_s_ns);

  // the memory re-emits into its acceptance mode
  out.wavepacket.spectral =
      make_gaussian(mem.acceptance_center_mhz, mem.acceptance_fwhm_mhz);
  out.wavepacket.tau_ns = mem.retrieval_sigma_ns;
  out.wavepacket.mean_photon_flux =
      stored.input_flux * out.retrieved_fraction;
  return out;
}

}  // namespace qdmem
