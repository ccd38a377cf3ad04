#include "qdmem/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qdmem/rng.hpp"

namespace qdmem {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// distribution function of t0 + Exp(tau) + N(0, sigma)
double exp_gauss_cdf(double t, double t0, double tau, double sigma) {
  double z = (t - t0) / sigma;
  if (z < -8.0) return 0.0;  // both terms vanish; avoids overflow in the exp
  double k = sigma / tau;
  return normal_cdf(z) -
         std::exp(0.5 * k * k - (t - t0) / tau) * normal_cdf(z - k);
}

}  // namespace

TriggerFraction effective_trigger_fraction(const SyncChain& sync) {
  if (sync.pulse_pick_divisor < 1)
    throw std::invalid_argument("pulse pick divisor must be at least 1");
  if (!(sync.laser_rate_mhz > 0.0) || !(sync.trigger_limit_mhz > 0.0))
    throw std::invalid_argument("sync rates must be positive");
  TriggerFraction out;
  out.picked_rate_mhz = sync.laser_rate_mhz / sync.pulse_pick_divisor;
  double raw = sync.trigger_limit_mhz / out.picked_rate_mhz;
  if (raw >= 1.0) {
    out.of_picked = 1.0;
  } else {
    double n = std::round(-std::log2(raw));
    out.of_picked = std::pow(2.0, -n);
  }
  out.of_laser = out.of_picked / sync.pulse_pick_divisor;
  return out;
}

std::vector<double> expected_bin_means(const ExpProfile& leak,
                                       const GaussProfile& retrieval,
                                       const DetectorParams& det,
                                       std::uint64_t n_triggers,
                                       double window_ns, double bin_width_ps,
                                       double background_per_bin) {
  if (!(bin_width_ps > 0.0) || !(window_ns > 0.0))
    throw std::invalid_argument("histogram window and bin width must be positive");
  if (leak.fraction < 0.0 || retrieval.fraction < 0.0 ||
      leak.fraction > 1.0 || retrieval.fraction > 1.0)
    throw std::invalid_argument("profile fractions must be in [0, 1]");
  double bin_ns = bin_width_ps * 1e-3;
  auto n_bins = static_cast<size_t>(std::ceil(window_ns / bin_ns - 1e-9));
  double irf_sigma_ns = det.irf_fwhm_ps * 1e-3 / kFwhmPerSigma;
  double ret_sigma = std::hypot(retrieval.sigma_ns, irf_sigma_ns);
  double triggers = static_cast<double>(n_triggers);
  double bg = background_per_bin +
              det.dark_rate_cps * bin_ns * 1e-9 * triggers;

  std::vector<double> mu(n_bins);
  double prev_leak = exp_gauss_cdf(0.0, leak.t0_ns, leak.tau_ns, irf_sigma_ns);
  double prev_ret = normal_cdf((0.0 - retrieval.mu_ns) / ret_sigma);
  for (size_t i = 0; i < n_bins; ++i) {
    double hi = static_cast<double>(i + 1) * bin_ns;
    double cl = exp_gauss_cdf(hi, leak.t0_ns, leak.tau_ns, irf_sigma_ns);
    double cr = normal_cdf((hi - retrieval.mu_ns) / ret_sigma);
    double expected = leak.fraction * (cl - prev_leak) +
                      retrieval.fraction * (cr - prev_ret);
    mu[i] = det.efficiency * triggers * expected + bg;
    prev_leak = cl;
    prev_ret = cr;
  }
  return mu;
}

ArrivalHistogram synthesize_histogram(const ExpProfile& leak,
                                      const GaussProfile& retrieval,
                                      const DetectorParams& det,
                                      std::uint64_t n_triggers,
                                      double window_ns, double bin_width_ps,
                                      double background_per_bin,
                                      std::uint64_t seed) {
  auto mu = expected_bin_means(leak, retrieval, det, n_triggers, window_ns,
                               bin_width_ps, background_per_bin);
  ArrivalHistogram h;
  h.bin_width_ps = bin_width_ps;
  h.t0_ns = 0.0;
  h.n_triggers = n_triggers;
  h.background_per_bin = background_per_bin;
  h.tau_s_ns = retrieval.fraction > 0.0 ? retrieval.mu_ns : -1.0;
  h.counts.resize(mu.size());
  Rng rng = Rng::child(seed, "detection.histogram");
  for (size_t i = 0; i < mu.size(); ++i) h.counts[i] = rng.poisson(mu[i]);
  return h;
}

CoincidenceHistogram coincidence_histogram(
    const std::vector<std::int64_t>& det_a_ps,
    const std::vector<std::int64_t>& det_b_ps, double bin_width_ns,
    double span_ns, double rep_period_ns, std::uint64_t n_pulses) {
  if (!(bin_width_ns > 0.0) || !(span_ns > 0.0))
    throw std::invalid_argument("coincidence bin width and span must be positive");
  CoincidenceHistogram h;
  h.bin_width_ns = bin_width_ns;
  h.span_ns = span_ns;
  h.rep_period_ns = rep_period_ns;
  h.n_pulses = n_pulses;
  auto n_bins = static_cast<size_t>(std::llround(2.0 * span_ns / bin_width_ns));
  h.counts.assign(n_bins, 0);

  auto span_ps = static_cast<std::int64_t>(std::llround(span_ns * 1e3));
  size_t lo = 0;
  for (std::int64_t ta : det_a_ps) {
    while (lo < det_b_ps.size() && det_b_ps[lo] < ta - span_ps) ++lo;
    for (size_t j = lo; j < det_b_ps.size() && det_b_ps[j] < ta + span_ps; ++j) {
      double delay_ns = static_cast<double>(det_b_ps[j] - ta) * 1e-3;
      auto bin = static_cast<size_t>((delay_ns + span_ns) / bin_width_ns);
      if (bin < n_bins) ++h.counts[bin];
    }
  }
  return h;
}

HbtOutput simulate_hbt(const std::vector<EmissionEvent>& events,
                       double rep_rate_mhz, const DetectorParams& det,
                       std::uint64_t n_pulses, double span_ns,
                       double bin_width_ns, std::uint64_t seed) {
  if (!(rep_rate_mhz > 0.0))
    throw std::invalid_argument("simulate_hbt: rep rate must be positive");
  double period_ns = 1000.0 / rep_rate_mhz;
  if (!(span_ns >= 3.0 * period_ns))
    throw std::invalid_argument(
        "simulate_hbt: span must cover at least three repetition periods");
  // per-channel jitter; the delay of a pair then has fwhm = irf_fwhm_ps
  double jitter_ps = det.irf_fwhm_ps / std::numbers::sqrt2 / kFwhmPerSigma;

  HbtOutput out;
  Rng rng = Rng::child(seed, "hbt.detect");
  for (const auto& ev : events) {
    if (det.efficiency < 1.0 && rng.uniform() >= det.efficiency) continue;
    double t_ps = (static_cast<double>(ev.pulse_index) * period_ns + ev.time_ns) * 1e3 +
                  rng.normal(0.0, jitter_ps);
    auto stamp = static_cast<std::int64_t>(std::llround(t_ps));
    (rng.uniform() < 0.5 ? out.det_a_ps : out.det_b_ps).push_back(stamp);
  }
  if (det.dark_rate_cps > 0.0) {
    Rng dark = Rng::child(seed, "hbt.dark");
    double span_total_ps = static_cast<double>(n_pulses) * period_ns * 1e3;
    double expected = det.dark_rate_cps * span_total_ps * 1e-12;
    for (int side = 0; side < 2; ++side) {
      auto& dst = side == 0 ? out.det_a_ps : out.det_b_ps;
      std::uint64_t n = dark.poisson(0.5 * expected);
      for (std::uint64_t k = 0; k < n; ++k)
        dst.push_back(static_cast<std::int64_t>(
            std::llround(dark.uniform() * span_total_ps)));
    }
  }
  std::sort(out.det_a_ps.begin(), out.det_a_ps.end());
  std::sort(out.det_b_ps.begin(), out.det_b_ps.end());
  out.hist = coincidence_histogram(out.det_a_ps, out.det_b_ps, bin_width_ns,
                                   span_ns, period_ns, n_pulses);
  return out;
}

FpiScan simulate_fpi_scan(const Lineshape& line, double instrument_fwhm_mhz,
                          double fsr_ghz, double ghz_per_sample, int n_samples,
                          double peak_counts, std::uint64_t seed) {
  if (!(fsr_ghz > 0.0) || !(ghz_per_sample > 0.0) || n_samples < 4)
    throw std::invalid_argument("simulate_fpi_scan: bad scan geometry");
  Lineshape observed =
      instrument_fwhm_mhz > 0.0
          ? convolve(line, make_lorentzian(0.0, instrument_fwhm_mhz))
          : line;
  double fsr_mhz = fsr_ghz * 1e3;
  double step_mhz = ghz_per_sample * 1e3;
  // first order sits a quarter of the way into the scan
  double nu0 = observed.center_mhz - 0.25 * n_samples * step_mhz;

  FpiScan out;
  out.true_ghz_per_sample = ghz_per_sample;
  out.sample.resize(static_cast<size_t>(n_samples));
  out.intensity.resize(static_cast<size_t>(n_samples));
  double peak = evaluate(observed, observed.center_mhz);
  Rng rng = Rng::child(seed, "fpi.scan");
  for (int s = 0; s < n_samples; ++s) {
    double nu = nu0 + s * step_mhz;
    double v = 0.0;
    for (int k = -2; k <= 2; ++k) v += evaluate(observed, nu - k * fsr_mhz);
    out.sample[static_cast<size_t>(s)] = s;
    double mean = peak_counts * v / peak;
    out.intensity[static_cast<size_t>(s)] =
        peak_counts > 0.0 ? static_cast<double>(rng.poisson(mean)) : 0.0;
  }
  return out;
}

}  // namespace qdmem
