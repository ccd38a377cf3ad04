#include "qdmem/qd_source.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qdmem/rng.hpp"

namespace qdmem {

namespace {

void validate_tuning(const std::vector<TuningAnchor>& curve) {
  if (curve.size() < 2)
    throw std::invalid_argument("tuning curve needs at least two anchors");
  for (size_t i = 1; i < curve.size(); ++i) {
    if (!(curve[i].temperature_k > curve[i - 1].temperature_k))
      throw std::invalid_argument("tuning anchors must increase in temperature");
    if (curve[i].redshift_mhz < curve[i - 1].redshift_mhz)
      throw std::invalid_argument("tuning red shift must not decrease");
  }
}

}  // namespace

double emission_detuning_mhz(const QdParams& qd, double temperature_k) {
  validate_tuning(qd.tuning_curve);
  const auto& c = qd.tuning_curve;
  if (temperature_k < c.front().temperature_k ||
      temperature_k > c.back().temperature_k)
    throw std::out_of_range("temperature outside the tuning curve");
  for (size_t i = 1; i < c.size(); ++i) {
    if (temperature_k <= c[i].temperature_k) {
      double w = (temperature_k - c[i - 1].temperature_k) /
                 (c[i].temperature_k - c[i - 1].temperature_k);
      return c[i - 1].redshift_mhz +
             w * (c[i].redshift_mhz - c[i - 1].redshift_mhz);
    }
  }
  return c.back().redshift_mhz;
}

double spectral_norm(const PhotonWavepacket& wp) {
  if (wp.filters.empty()) return 1.0;
  auto product = [&](double nu) {
    double t = 1.0;
    for (const auto& f : wp.filters) t *= evaluate_peak1(f, nu);
    return t;
  };
  // range steering uses the narrowest filter
  const Lineshape* narrow = &wp.filters.front();
  for (const auto& f : wp.filters)
    if (f.fwhm_mhz < narrow->fwhm_mhz) narrow = &f;
  return filtered_fraction(wp.spectral, product, narrow->center_mhz,
                           narrow->fwhm_mhz)
      .value;
}

double spectral_density(const PhotonWavepacket& wp, double nu_mhz) {
  double v = evaluate(wp.spectral, nu_mhz);
  for (const auto& f : wp.filters) v *= evaluate_peak1(f, nu_mhz);
  return v / spectral_norm(wp);
}

OverlapResult spectral_filtered_fraction(const PhotonWavepacket& wp,
                                         const Lineshape& filter) {
  if (wp.filters.empty()) return filtered_fraction(wp.spectral, filter);
  auto with_new = [&](double nu) {
    double t = evaluate_peak1(filter, nu);
    for (const auto& f : wp.filters) t *= evaluate_peak1(f, nu);
    return t;
  };
  double denom = spectral_norm(wp);
  auto num = filtered_fraction(wp.spectral, with_new, filter.center_mhz,
                               filter.fwhm_mhz);
  OverlapResult out;
  out.value = num.value / denom;
  out.abs_error_estimate = num.abs_error_estimate / denom;
  out.range_warning = num.range_warning;
  return out;
}

PhotonWavepacket build_wavepacket(const QdParams& qd, double temperature_k) {
  if (!(qd.tau_qd_ns > 0.0))
    throw std::invalid_argument("tau_qd must be positive");
  if (qd.inhom_fwhm_mhz < qd.hom_fwhm_mhz)
    throw std::invalid_argument(
        "total emission width cannot be below the homogeneous component");
  double center = qd.center_at_base_mhz - emission_detuning_mhz(qd, temperature_k);

  PhotonWavepacket wp;
  if (qd.hom_fwhm_mhz < 1e-3) {
    wp.spectral = make_gaussian(center, qd.inhom_fwhm_mhz);
  } else if (qd.inhom_fwhm_mhz - qd.hom_fwhm_mhz < 1e-3) {
    wp.spectral = make_lorentzian(center, qd.hom_fwhm_mhz);
  } else {
    double g = voigt_gaussian_component(qd.inhom_fwhm_mhz, qd.hom_fwhm_mhz);
    wp.spectral = make_voigt(center, qd.hom_fwhm_mhz, g);
  }
  wp.tau_ns = qd.tau_qd_ns;
  wp.mean_photon_flux = qd.mean_photons_per_pulse;
  wp.polarization = 'H';
  return wp;
}

double intensity_vs_power(double power_ratio, double exponent) {
  if (power_ratio < 0.0)
    throw std::domain_error("intensity_vs_power: power ratio must be >= 0");
  return std::pow(power_ratio, exponent);
}

double g2_of_recapture(double p1, double pr) {
  if (!(p1 > 0.0)) throw std::domain_error("g2_of_recapture: p1 must be positive");
  return 2.0 * pr / (p1 * (1.0 + pr) * (1.0 + pr));
}

double recapture_probability(double purity_g2, double p1) {
  if (purity_g2 < 0.0 || p1 <= 0.0 || p1 > 1.0)
    throw std::domain_error("recapture_probability: bad purity or brightness");
  double gp = purity_g2 * p1;
  if (2.0 * gp >= 1.0)
    throw std::domain_error("recapture_probability: purity*brightness too large");
  // smaller root of g*p1*(1+pr)^2 = 2*pr, written in its stable form
  return gp / (1.0 - gp + std::sqrt(1.0 - 2.0 * gp));
}

std::vector<EmissionEvent> sample_emission_stream(const QdParams& qd,
                                                  std::uint64_t n_pulses,
                                                  double rep_rate_mhz,
                                                  std::uint64_t seed) {
  if (!(rep_rate_mhz > 0.0))
    throw std::invalid_argument("sample_emission_stream: rep rate must be positive");
  double p1 = qd.mean_photons_per_pulse;
  if (!(p1 >= 0.0) || p1 > 1.0)
    throw std::invalid_argument(
        "sample_emission_stream: photons per pulse must be a probability");
  double pr = qd.recapture_fraction >= 0.0
                  ? qd.recapture_fraction
                  : (p1 > 0.0 ? recapture_probability(qd.purity_g2, p1) : 0.0);
  if (pr > 1.0)
    throw std::invalid_argument("sample_emission_stream: recapture fraction > 1");
  double delay_scale =
      qd.recapture_delay_ns > 0.0 ? qd.recapture_delay_ns : qd.tau_qd_ns;
  double period_ns = 1000.0 / rep_rate_mhz;

  std::vector<EmissionEvent> events;
  events.reserve(static_cast<size_t>(
      std::min<double>(static_cast<double>(n_pulses) * (p1 * (1.0 + pr)) + 64.0,
                       2e8)));

  Rng rng = Rng::child(seed, "emission.signal");
  for (std::uint64_t i = 0; i < n_pulses; ++i) {
    if (rng.uniform() >= p1) continue;
    double t = rng.exponential(qd.tau_qd_ns);
    events.push_back({i, t, EventKind::signal});
    if (rng.uniform() < pr) {
      double tr = t + rng.exponential(delay_scale);
      events.push_back({i, tr, EventKind::recapture});
    }
  }

  if (qd.background_rate_mhz > 0.0) {
    Rng bg = Rng::child(seed, "emission.background");
    double span_ns = static_cast<double>(n_pulses) * period_ns;
    std::uint64_t n_bg = bg.poisson(qd.background_rate_mhz * span_ns * 1e-3);
    for (std::uint64_t k = 0; k < n_bg; ++k) {
      double t_abs = bg.uniform() * span_ns;
      auto pulse = static_cast<std::uint64_t>(t_abs / period_ns);
      pulse = std::min(pulse, n_pulses - 1);
      events.push_back({pulse, t_abs - static_cast<double>(pulse) * period_ns,
                        EventKind::background});
    }
  }

  std::stable_sort(events.begin(), events.end(),
                   [&](const EmissionEvent& a, const EmissionEvent& b) {
                     double ta = static_cast<double>(a.pulse_index) * period_ns + a.time_ns;
                     double tb = static_cast<double>(b.pulse_index) * period_ns + b.time_ns;
                     return ta < tb;
                   });
  return events;
}

}  // namespace qdmem
