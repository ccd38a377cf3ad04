#pragma once

#include <cstdint>
#include <vector>

#include "qdmem/spectra.hpp"

namespace qdmem {

struct TuningAnchor {
  double temperature_k = 0.0;
  double redshift_mhz = 0.0;  // red shift accumulated since the coldest anchor
};

struct QdParams {
  double tau_qd_ns = 1.39;          // radiative decay constant
  double hom_fwhm_mhz = 400.0;      // homogeneous (lorentzian) component
  double inhom_fwhm_mhz = 5100.0;   // total emission width including broadening
  double center_at_base_mhz = 15000.0;  // detuning at the coldest anchor
  std::vector<TuningAnchor> tuning_curve = {
      {4.0, 0.0}, {17.0, 15000.0}, {21.0, 45000.0}};
  double fss_uev = 9.0;             // fine-structure splitting
  double power_exponent_x = 0.8;    // exciton saturation-curve slope
  double power_exponent_xx = 1.9;   // biexciton slope
  double purity_g2 = 0.15;          // target area-ratio g2 at zero delay
  double recapture_fraction = -1.0; // <0 derives it from purity_g2
  double recapture_delay_ns = 0.0;  // <=0 defaults to tau_qd_ns
  double mean_photons_per_pulse = 5e-4;  // at the memory fiber input
  double background_rate_mhz = 0.0;      // untimed background, events per us
};

// interpolated red shift relative to the coldest anchor; out-of-range
// temperatures throw
double emission_detuning_mhz(const QdParams& qd, double temperature_k);

// single-photon mode between chain elements; filters hold peak-1
// transmissions already applied to the (unit-area) base spectrum
struct PhotonWavepacket {
  Lineshape spectral;
  std::vector<Lineshape> filters;
  double tau_ns = 0.0;            // exponential temporal envelope constant
  double mean_photon_flux = 0.0;  // photons per excitation pulse
  char polarization = 'H';
};

// spectral density including applied filters, renormalized to unit area
double spectral_density(const PhotonWavepacket& wp, double nu_mhz);
// area of base spectrum times filters (the normalization constant)
double spectral_norm(const PhotonWavepacket& wp);
// overlap of the normalized filtered spectrum with one more peak-1 filter
OverlapResult spectral_filtered_fraction(const PhotonWavepacket& wp,
                                         const Lineshape& filter);

PhotonWavepacket build_wavepacket(const QdParams& qd, double temperature_k);

// saturation-curve model, intensity ratio for a power ratio
double intensity_vs_power(double power_ratio, double exponent);

// recapture probability per signal photon that reproduces a target
// area-ratio g2 at mean brightness p1
double recapture_probability(double purity_g2, double p1);
// area-ratio g2 implied by brightness p1 and recapture probability pr
double g2_of_recapture(double p1, double pr);

enum class EventKind : std::uint8_t { signal = 0, recapture = 1, background = 2 };

struct EmissionEvent {
  std::uint64_t pulse_index = 0;
  double time_ns = 0.0;  // relative to the owning pulse
  EventKind kind = EventKind::signal;
};

// per-pulse Monte-Carlo emission record, ordered by absolute time
std::vector<EmissionEvent> sample_emission_stream(const QdParams& qd,
                                                  std::uint64_t n_pulses,
                                                  double rep_rate_mhz,
                                                  std::uint64_t seed);

}  // namespace qdmem
