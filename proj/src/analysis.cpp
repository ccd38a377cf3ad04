#include "qdmem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qdmem {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;
constexpr double kFourLn2 = 4.0 * std::numbers::ln2;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

struct WindowData {
  std::vector<double> t;  // bin centers, ns
  std::vector<double> y;  // counts
};

WindowData collect(const ArrivalHistogram& hist,
                   const std::vector<std::pair<double, double>>& windows) {
  if (hist.counts.empty())
    throw std::invalid_argument("histogram has no bins");
  double bin_ns = hist.bin_width_ps * 1e-3;
  WindowData out;
  for (size_t i = 0; i < hist.counts.size(); ++i) {
    double tc = hist.t0_ns + (static_cast<double>(i) + 0.5) * bin_ns;
    for (const auto& w : windows) {
      if (tc >= w.first && tc < w.second) {
        out.t.push_back(tc);
        out.y.push_back(static_cast<double>(hist.counts[i]));
        break;
      }
    }
  }
  if (out.t.size() < 8)
    throw std::invalid_argument("fit windows select too few bins");
  return out;
}

double window_background_guess(const ArrivalHistogram& hist) {
  size_t n = hist.counts.size();
  size_t tail = std::max<size_t>(n / 10, 5);
  tail = std::min(tail, n);
  double s = 0.0;
  for (size_t i = n - tail; i < n; ++i)
    s += static_cast<double>(hist.counts[i]);
  return s / static_cast<double>(tail);
}

double decay_guess(const WindowData& d, double baseline) {
  // log-slope between the first point and one a few ns later
  double y0 = std::max(d.y.front() - baseline, 1.0);
  size_t j = d.t.size() / 3;
  double y1 = std::max(d.y[j] - baseline, 1.0);
  double dt = d.t[j] - d.t.front();
  if (y0 <= y1 || dt <= 0.0) return 1.5;
  return std::clamp(dt / std::log(y0 / y1), 0.2, 20.0);
}

}  // namespace

RetrievalFit fit_retrieval(const ArrivalHistogram& hist, double tau_s_ns,
                           std::optional<FitWindows> windows) {
  FitWindows w = windows.value_or(FitWindows{});
  if (!windows || (w.ret_lo_ns == 0.0 && w.ret_hi_ns == 0.0)) {
    w.ret_lo_ns = tau_s_ns - 2.0;
    w.ret_hi_ns = tau_s_ns + 2.0;
  }
  if (!(w.leak_lo_ns < w.leak_hi_ns) || !(w.ret_lo_ns < w.ret_hi_ns))
    throw std::invalid_argument("fit_retrieval: empty window");
  if (w.leak_hi_ns > w.ret_lo_ns)
    throw std::invalid_argument("fit_retrieval: windows must be disjoint");

  auto data = collect(hist, {{w.leak_lo_ns, w.leak_hi_ns},
                             {w.ret_lo_ns, w.ret_hi_ns}});
  double bin_ns = hist.bin_width_ps * 1e-3;

  double c0 = window_background_guess(hist);
  double peak_ret = 0.0;
  double mu0 = tau_s_ns;
  double leak_first = 1.0;
  {
    WindowData leak_only;
    for (size_t i = 0; i < data.t.size(); ++i) {
      if (data.t[i] < w.leak_hi_ns) {
        leak_only.t.push_back(data.t[i]);
        leak_only.y.push_back(data.y[i]);
      } else if (data.y[i] - c0 > peak_ret) {
        peak_ret = data.y[i] - c0;
        mu0 = data.t[i];
      }
    }
    double tau0 = leak_only.t.empty() ? 1.5 : decay_guess(leak_only, c0);
    leak_first = tau0;
  }
  double tau0 = leak_first;
  double a_leak0 = std::max((data.y.front() - c0) *
                                std::exp(data.t.front() / tau0),
                            1.0);

  FitProblem prob;
  prob.x = data.t;
  prob.y = data.y;
  prob.sigma = poisson_sigmas(data.y);
  prob.param_names = {"amp_leak", "tau_leak_ns", "amp_ret",
                      "mu_ns",    "sigma_ns",    "background"};
  prob.initial = {a_leak0, tau0, std::max(peak_ret, 1.0), mu0, 0.5,
                  std::max(c0, 0.0)};
  prob.lower = {0.0, 0.05, 0.0, w.ret_lo_ns, 0.05, 0.0};
  prob.upper = {1e18, 100.0, 1e18, w.ret_hi_ns, 5.0, 1e18};
  prob.model = [](double t, const std::vector<double>& p) {
    double u = (t - p[3]) / p[4];
    return p[0] * std::exp(-t / p[1]) + p[2] * std::exp(-0.5 * u * u) + p[5];
  };

  RetrievalFit out;
  out.fit = fit_model(prob);

  double a = out.fit.value("amp_ret");
  double s = out.fit.value("sigma_ns");
  double scale = std::sqrt(2.0 * std::numbers::pi) / bin_ns;
  out.n_ret.value = a * s * scale;
  // delta method over (amp_ret, sigma_ns)
  int ia = out.fit.index("amp_ret");
  int is = out.fit.index("sigma_ns");
  double var = s * s * out.fit.covariance(ia, ia) +
               a * a * out.fit.covariance(is, is) +
               2.0 * a * s * out.fit.covariance(ia, is);
  out.n_ret.sigma = scale * std::sqrt(std::max(var, 0.0));
  out.leak_tau = {out.fit.value("tau_leak_ns"), out.fit.sigma("tau_leak_ns")};
  return out;
}

ReferenceFit fit_reference(const ArrivalHistogram& hist,
                           std::optional<FitWindows> windows) {
  FitWindows w = windows.value_or(FitWindows{});
  if (!(w.leak_lo_ns < w.leak_hi_ns))
    throw std::invalid_argument("fit_reference: empty window");
  auto data = collect(hist, {{w.leak_lo_ns, w.leak_hi_ns}});
  double bin_ns = hist.bin_width_ps * 1e-3;

  double c0 = window_background_guess(hist);
  double tau0 = decay_guess(data, c0);
  double a0 = std::max((data.y.front() - c0) * std::exp(data.t.front() / tau0),
                       1.0);

  FitProblem prob;
  prob.x = data.t;
  prob.y = data.y;
  prob.sigma = poisson_sigmas(data.y);
  prob.param_names = {"amp", "tau_ns", "background"};
  prob.initial = {a0, tau0, std::max(c0, 0.0)};
  prob.lower = {0.0, 0.05, 0.0};
  prob.upper = {1e18, 100.0, 1e18};
  prob.model = [](double t, const std::vector<double>& p) {
    return p[0] * std::exp(-t / p[1]) + p[2];
  };

  ReferenceFit out;
  out.fit = fit_model(prob);
  double a = out.fit.value("amp");
  double tau = out.fit.value("tau_ns");
  out.tau = {tau, out.fit.sigma("tau_ns")};
  out.n_input.value = a * tau / bin_ns;
  int ia = out.fit.index("amp");
  int it = out.fit.index("tau_ns");
  double var = tau * tau * out.fit.covariance(ia, ia) +
               a * a * out.fit.covariance(it, it) +
               2.0 * a * tau * out.fit.covariance(ia, it);
  out.n_input.sigma = std::sqrt(std::max(var, 0.0)) / bin_ns;
  return out;
}

Efficiencies efficiencies(ValueSigma n_ret, ValueSigma n_input,
                          ValueSigma t_chain) {
  if (!(n_input.value > 0.0))
    throw std::domain_error("efficiencies: n_input must be positive");
  if (!(t_chain.value > 0.0))
    throw std::domain_error("efficiencies: chain transmission must be positive");
  Efficiencies out;
  out.t_chain = t_chain;
  out.eta_e2e.value = n_ret.value / n_input.value;
  double rel2 = 0.0;
  if (n_ret.value != 0.0) {
    double r1 = n_ret.sigma / n_ret.value;
    double r2 = n_input.sigma / n_input.value;
    rel2 = r1 * r1 + r2 * r2;
    out.eta_e2e.sigma = std::abs(out.eta_e2e.value) * std::sqrt(rel2);
  } else {
    out.eta_e2e.sigma = n_ret.sigma / n_input.value;
  }
  out.eta_int.value = out.eta_e2e.value / t_chain.value;
  double rt = t_chain.sigma / t_chain.value;
  if (out.eta_e2e.value != 0.0) {
    out.eta_int.sigma =
        std::abs(out.eta_int.value) * std::sqrt(rel2 + rt * rt);
  } else {
    out.eta_int.sigma = out.eta_e2e.sigma / t_chain.value;
  }
  return out;
}

G2Result g2_area(const CoincidenceHistogram& hist,
                 double integration_window_ns, int side_per_side) {
  if (hist.counts.empty())
    throw std::invalid_argument("g2_area: empty histogram");
  if (side_per_side < 1)
    throw std::invalid_argument("g2_area: need at least one side peak per side");
  double window =
      integration_window_ns > 0.0 ? integration_window_ns : hist.rep_period_ns;
  if (window > hist.rep_period_ns)
    throw std::invalid_argument(
        "g2_area: integration window exceeds the repetition period");
  double needed = side_per_side * hist.rep_period_ns + 0.5 * window;
  if (hist.span_ns + 1e-9 < needed)
    throw std::runtime_error("g2_area: histogram span misses required side peaks");

  auto area_around = [&](double center) {
    double lo = center - 0.5 * window;
    double hi = center + 0.5 * window;
    double total = 0.0;
    for (size_t i = 0; i < hist.counts.size(); ++i) {
      double mid = -hist.span_ns + (static_cast<double>(i) + 0.5) * hist.bin_width_ns;
      if (mid >= lo && mid < hi) total += static_cast<double>(hist.counts[i]);
    }
    return total;
  };

  G2Result out;
  out.central_area = area_around(0.0);
  double side_sum = 0.0;
  for (int k = 1; k <= side_per_side; ++k) {
    for (double sign : {-1.0, 1.0}) {
      double a = area_around(sign * k * hist.rep_period_ns);
      out.side_areas.push_back(a);
      side_sum += a;
    }
  }
  double n_side = static_cast<double>(out.side_areas.size());
  out.mean_side_area = side_sum / n_side;
  if (!(out.mean_side_area > 0.0))
    throw std::runtime_error("g2_area: side peaks carry no counts");

  out.g2.value = out.central_area / out.mean_side_area;
  double var_c = std::max(out.central_area, 1.0);
  double var_s = side_sum / (n_side * n_side);
  double rel_c2 = var_c / std::max(out.central_area * out.central_area, 1.0);
  double rel_s2 = var_s / (out.mean_side_area * out.mean_side_area);
  double base = out.central_area > 0.0 ? out.g2.value
                                       : 1.0 / out.mean_side_area;
  out.g2.sigma = base * std::sqrt(rel_c2 + rel_s2);
  return out;
}

DecayFit fit_decay(const ArrivalHistogram& hist, double irf_fwhm_ps) {
  if (hist.counts.empty())
    throw std::invalid_argument("fit_decay: empty histogram");
  double bin_ns = hist.bin_width_ps * 1e-3;
  WindowData data;
  for (size_t i = 0; i < hist.counts.size(); ++i) {
    data.t.push_back(hist.t0_ns + (static_cast<double>(i) + 0.5) * bin_ns);
    data.y.push_back(static_cast<double>(hist.counts[i]));
  }
  double sigma_irf = irf_fwhm_ps * 1e-3 / kFwhmPerSigma;

  double c0 = window_background_guess(hist);
  auto it_max = std::max_element(data.y.begin(), data.y.end());
  size_t imax = static_cast<size_t>(it_max - data.y.begin());
  double t0_guess = data.t[imax];
  WindowData tail;
  for (size_t i = imax; i < data.t.size(); ++i) {
    tail.t.push_back(data.t[i]);
    tail.y.push_back(data.y[i]);
  }
  double tau0 = tail.t.size() > 8 ? decay_guess(tail, c0) : 1.5;
  double total = 0.0;
  for (double y : data.y) total += std::max(y - c0, 0.0);

  FitProblem prob;
  prob.x = data.t;
  prob.y = data.y;
  prob.sigma = poisson_sigmas(data.y);
  prob.param_names = {"amp", "t0_ns", "tau_ns", "background"};
  prob.initial = {std::max(total, 1.0), t0_guess, tau0, std::max(c0, 0.0)};
  prob.lower = {0.0, -1e3, 1e-3, 0.0};
  prob.upper = {1e18, 1e3, 1e4, 1e18};
  prob.model = [bin_ns, sigma_irf](double t, const std::vector<double>& p) {
    double dt = t - p[1];
    double tau = p[2];
    double z = dt / sigma_irf;
    if (z < -8.0) return p[3];
    double k = sigma_irf / tau;
    double pdf = std::exp(0.5 * k * k - dt / tau) *
                 normal_cdf(z - k) / tau;
    return p[0] * bin_ns * pdf + p[3];
  };

  DecayFit out;
  out.fit = fit_model(prob);
  out.tau = {out.fit.value("tau_ns"), out.fit.sigma("tau_ns")};
  return out;
}

FpiResult fpi_linewidth(const std::vector<double>& sample,
                        const std::vector<double>& intensity, double fsr_ghz,
                        const FpiOptions& opts) {
  if (sample.size() != intensity.size() || sample.size() < 16)
    throw std::invalid_argument("fpi_linewidth: bad trace");
  if (!(fsr_ghz > 0.0))
    throw std::invalid_argument("fpi_linewidth: fsr must be positive");

  double ymax = *std::max_element(intensity.begin(), intensity.end());
  double thresh = 0.4 * ymax;
  // above-threshold segments, merged across dips shorter than a few samples;
  // a segment touching either end of the trace is a truncated order whose
  // center lies off-scan, so it must not enter the spacing calibration
  std::vector<double> peaks;
  {
    struct Segment {
      size_t lo, hi, peak;
    };
    std::vector<Segment> segments;
    for (size_t i = 0; i < intensity.size(); ++i) {
      if (intensity[i] < thresh) continue;
      if (!segments.empty() && i - segments.back().hi <= 4) {
        if (intensity[i] > intensity[segments.back().peak])
          segments.back().peak = i;
        segments.back().hi = i;
      } else {
        segments.push_back({i, i, i});
      }
    }
    for (const auto& seg : segments)
      if (seg.lo > 0 && seg.hi + 1 < intensity.size())
        peaks.push_back(sample[seg.peak]);
  }
  if (peaks.size() < 2)
    throw std::runtime_error(
        "fpi_linewidth: need at least two transmission orders to calibrate");

  double spacing = 0.0;
  for (size_t i = 1; i < peaks.size(); ++i) spacing += peaks[i] - peaks[i - 1];
  spacing /= static_cast<double>(peaks.size() - 1);

  FpiResult out;
  out.peak_samples = peaks;
  out.ghz_per_sample = fsr_ghz / spacing;

  // fit the first order over the core of the peak
  double lo = peaks.front() - opts.fit_window_fraction * spacing;
  double hi = peaks.front() + opts.fit_window_fraction * spacing;
  FitProblem prob;
  for (size_t i = 0; i < sample.size(); ++i) {
    if (sample[i] >= lo && sample[i] <= hi) {
      prob.x.push_back(sample[i]);
      prob.y.push_back(intensity[i]);
    }
  }
  prob.sigma = poisson_sigmas(prob.y);
  prob.param_names = {"amp", "mu_samples", "fwhm_samples", "background"};
  prob.initial = {ymax, peaks.front(), 0.2 * spacing, 0.0};
  prob.lower = {0.0, lo, 1e-3, 0.0};
  prob.upper = {1e18, hi, 4.0 * spacing, 1e18};
  if (opts.model == FpiOptions::PeakModel::gaussian) {
    prob.model = [](double s, const std::vector<double>& p) {
      double u = (s - p[1]) / p[2];
      return p[0] * std::exp(-kFourLn2 * u * u) + p[3];
    };
  } else {
    prob.model = [](double s, const std::vector<double>& p) {
      double u = 2.0 * (s - p[1]) / p[2];
      return p[0] / (1.0 + u * u) + p[3];
    };
  }
  out.fit = fit_model(prob);

  double w = out.fit.value("fwhm_samples");
  double sw = out.fit.sigma("fwhm_samples");
  double f = w * out.ghz_per_sample;
  double sf = sw * out.ghz_per_sample;
  if (opts.deconvolve_instrument) {
    double inst = opts.instrument_fwhm_ghz;
    if (opts.instrument == FpiOptions::InstrumentModel::lorentzian) {
      f = std::max(f - inst, 0.0);
    } else {
      double f2 = f * f - inst * inst;
      double fd = std::sqrt(std::max(f2, 0.0));
      sf = fd > 0.0 ? f * sf / fd : sf;
      f = fd;
    }
  }
  out.fwhm_ghz = {f, sf};
  return out;
}

ValueSigma time_bandwidth(ValueSigma tau_s, ValueSigma tau_qd) {
  if (!(tau_qd.value > 0.0))
    throw std::domain_error("time_bandwidth: tau_qd must be positive");
  ValueSigma out;
  out.value = tau_s.value / tau_qd.value;
  double r1 = tau_s.value != 0.0 ? tau_s.sigma / tau_s.value : 0.0;
  double r2 = tau_qd.sigma / tau_qd.value;
  out.sigma = std::abs(out.value) * std::sqrt(r1 * r1 + r2 * r2);
  if (tau_s.value == 0.0) out.sigma = tau_s.sigma / tau_qd.value;
  return out;
}

}  // namespace qdmem
