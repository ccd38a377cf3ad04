#pragma once

#include <optional>
#include <vector>

#include "qdmem/detection.hpp"
#include "qdmem/fit.hpp"

namespace qdmem {

struct ValueSigma {
  double value = 0.0;
  double sigma = 0.0;
};

struct FitWindows {
  double leak_lo_ns = 0.5;
  double leak_hi_ns = 10.0;
  double ret_lo_ns = 0.0;  // defaults derive from tau_s (tau_s - 2, tau_s + 2)
  double ret_hi_ns = 0.0;
};

struct RetrievalFit {
  FitResult fit;  // amp_leak, tau_leak_ns, amp_ret, mu_ns, sigma_ns, background
  ValueSigma n_ret;      // gaussian-component counts above background
  ValueSigma leak_tau;   // leakage decay constant
};

// joint exponential + gaussian + constant fit over the two windows with
// Poisson weighting; amplitudes are bounded at zero (clamped flag on the fit)
RetrievalFit fit_retrieval(const ArrivalHistogram& hist, double tau_s_ns,
                           std::optional<FitWindows> windows = std::nullopt);

struct ReferenceFit {
  FitResult fit;       // amp, tau_ns, background
  ValueSigma n_input;  // full exponential area in counts
  ValueSigma tau;
};

// exponential + constant fit of a control-off reference histogram over the
// leak window; the area extrapolates over the whole decay
ReferenceFit fit_reference(const ArrivalHistogram& hist,
                           std::optional<FitWindows> windows = std::nullopt);

struct Efficiencies {
  ValueSigma eta_e2e;
  ValueSigma eta_int;
  ValueSigma t_chain;
};

// eta_e2e = n_ret/n_input and eta_int = eta_e2e/t_chain with first-order
// error propagation; eta_int * t_chain reproduces eta_e2e exactly
Efficiencies efficiencies(ValueSigma n_ret, ValueSigma n_input,
                          ValueSigma t_chain);

struct G2Result {
  ValueSigma g2;
  double central_area = 0.0;
  double mean_side_area = 0.0;
  std::vector<double> side_areas;
};

// central-peak area over the mean of `side_per_side` neighbours each side,
// every area integrated over integration_window centered on its peak;
// integration_window <= 0 selects the full repetition period
G2Result g2_area(const CoincidenceHistogram& hist,
                 double integration_window_ns = -1.0, int side_per_side = 2);

struct DecayFit {
  FitResult fit;  // amp, t0_ns, tau_ns, background
  ValueSigma tau;
};

// exponential folded with the gaussian IRF of the stated width
DecayFit fit_decay(const ArrivalHistogram& hist, double irf_fwhm_ps);

struct FpiOptions {
  enum class PeakModel { gaussian, lorentzian };
  enum class InstrumentModel { lorentzian, gaussian };
  PeakModel model = PeakModel::gaussian;
  bool deconvolve_instrument = false;
  // a lorentzian response adds to the width and comes off linearly, a
  // gaussian one comes off in quadrature
  InstrumentModel instrument = InstrumentModel::lorentzian;
  double instrument_fwhm_ghz = 0.150;
  // half-width of the fit window as a fraction of the order spacing; kept
  // well under 0.5 so the neighbouring order's wing stays out of the fit
  double fit_window_fraction = 0.35;
};

struct FpiResult {
  ValueSigma fwhm_ghz;
  double ghz_per_sample = 0.0;
  std::vector<double> peak_samples;
  FitResult fit;  // amp, mu_samples, fwhm_samples, background
};

// calibrates the scan axis from the order spacing (= one fsr), then fits a
// single order; needs at least two transmission orders in the trace
FpiResult fpi_linewidth(const std::vector<double>& sample,
                        const std::vector<double>& intensity, double fsr_ghz,
                        const FpiOptions& opts = {});

// ratio with first-order uncertainty propagation
ValueSigma time_bandwidth(ValueSigma tau_s, ValueSigma tau_qd);

struct AnalysisReport {
  std::optional<ValueSigma> n_input;
  std::optional<ValueSigma> n_ret;
  std::optional<ValueSigma> eta_e2e;
  std::optional<ValueSigma> eta_int;
  std::optional<ValueSigma> t_chain;
  std::optional<ValueSigma> g2_zero;
  std::optional<ValueSigma> tau_fit;   // reference decay constant
  std::optional<ValueSigma> leak_tau;  // stretched leakage decay constant
  std::optional<ValueSigma> fwhm_ghz;  // scan-trace linewidth
  std::optional<ValueSigma> tbp;
  double tau_s_ns = -1.0;  // storage time the retrieval numbers refer to
};

}  // namespace qdmem
