#pragma once

#include <functional>
#include <vector>

namespace qdmem {

// All frequencies are detunings in MHz relative to the Cs D1 F=4 -> F'=3
// transition. Positive values sit above (blue of) the reference.

enum class LineKind { lorentzian, gaussian, voigt, airy };

// Parametric lineshape. The density kinds (lorentzian/gaussian/voigt)
// integrate to 1 over the real line; airy is a periodic transmission with
// peak value 1. For voigt, fwhm_mhz holds a closed-form width estimate;
// numeric_fwhm() measures the real one.
struct Lineshape {
  LineKind kind = LineKind::lorentzian;
  double center_mhz = 0.0;
  double fwhm_mhz = 0.0;
  double lorentzian_fwhm_mhz = 0.0;  // voigt component
  double gaussian_fwhm_mhz = 0.0;    // voigt component
  double fsr_mhz = 0.0;              // airy period
};

Lineshape make_lorentzian(double center_mhz, double fwhm_mhz);
Lineshape make_gaussian(double center_mhz, double fwhm_mhz);
Lineshape make_voigt(double center_mhz, double lorentzian_fwhm_mhz,
                     double gaussian_fwhm_mhz);
// requires fwhm < fsr/2 so the peaks stay resolved
Lineshape make_airy(double center_mhz, double fwhm_mhz, double fsr_mhz);

// density in 1/MHz for the density kinds, transmission in [0,1] for airy
double evaluate(const Lineshape& s, double nu_mhz);

// same shape rescaled so the peak value is exactly 1 (filter view)
double evaluate_peak1(const Lineshape& s, double nu_mhz);

struct OverlapResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  // set when the center separation exceeds the quadrature range, i.e. the
  // overlap is pure-tail and the returned value is a lower bound
  bool range_warning = false;
};

// fraction of a unit-area spectrum passed by a peak-1 filter
OverlapResult filtered_fraction(const Lineshape& spectrum,
                                const Lineshape& filter);
// callable-filter form; center/fwhm steer the quadrature range only
OverlapResult filtered_fraction(const Lineshape& spectrum,
                                const std::function<double(double)>& filter_peak1,
                                double filter_center_mhz,
                                double filter_fwhm_mhz);

// closed-form convolution: L*L adds widths, G*G adds in quadrature,
// any L/G/V mix stays a voigt; airy operands throw
Lineshape convolve(const Lineshape& a, const Lineshape& b);

// area over [lo,hi]; density kinds get analytic tail corrections so the
// full-line result is 1 to quadrature accuracy
double integrated_area(const Lineshape& s, double lo_mhz, double hi_mhz);

// half-maximum width measured on the evaluated profile by bisection
double numeric_fwhm(const Lineshape& s);
// generic form for ad-hoc profiles; width_guess brackets the search
double numeric_fwhm(const std::function<double(double)>& profile,
                    double center, double peak_value, double width_guess);

// gaussian component g such that voigt(lorentzian_fwhm, g) has the requested
// total width, measured numerically; total must be >= lorentzian_fwhm
double voigt_gaussian_component(double total_fwhm_mhz,
                                double lorentzian_fwhm_mhz);

// Olivero-Longbothum width estimate for a voigt profile
double voigt_fwhm_estimate(double lorentzian_fwhm_mhz,
                           double gaussian_fwhm_mhz);

namespace quad {

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
};

// adaptive Simpson over [lo,hi], subdivided first at the given breakpoints;
// stops when the local error estimate drops under abs_tol + rel_tol*|I|
Result integrate(const std::function<double(double)>& f, double lo, double hi,
                 const std::vector<double>& breakpoints, double abs_tol,
                 double rel_tol);

}  // namespace quad

}  // namespace qdmem
