#include "qdmem/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qdmem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;
// components below this are dropped when building a voigt
constexpr double kComponentFloorMhz = 1e-3;

double lorentz_density(double x, double fwhm) {
  double u = 2.0 * x / fwhm;
  return (2.0 / (kPi * fwhm)) / (1.0 + u * u);
}

double gauss_density(double x, double fwhm) {
  double u = x / fwhm;
  return (2.0 / fwhm) * std::sqrt(kLn2 / kPi) * std::exp(-4.0 * kLn2 * u * u);
}

double gauss_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * kLn2)); }

// mass of a unit-area density lying below x
double cdf_below(LineKind kind, double x, double center, double fwhm_l,
                 double fwhm_g) {
  switch (kind) {
    case LineKind::lorentzian:
      return 0.5 + std::atan(2.0 * (x - center) / fwhm_l) / kPi;
    case LineKind::gaussian:
      return 0.5 * std::erfc(-(x - center) /
                             (gauss_sigma(fwhm_g) * std::numbers::sqrt2));
    case LineKind::voigt:
      // far from center the gaussian factor has decayed; the lorentzian
      // component carries the tail mass
      return 0.5 + std::atan(2.0 * (x - center) / fwhm_l) / kPi;
    default:
      throw std::invalid_argument("cdf_below: not a density lineshape");
  }
}

struct SimpsonState {
  const std::function<double(double)>& f;
  double abs_tol;
  double rel_tol;
  double value = 0.0;
  double err = 0.0;

  void refine(double a, double b, double fa, double fm, double fb,
              double whole, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = f(lm);
    double frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    double local = left + right;
    if (depth <= 0 ||
        std::abs(delta) <= 15.0 * (abs_tol + rel_tol * std::abs(local))) {
      value += local + delta / 15.0;
      err += std::abs(delta) / 15.0;
      return;
    }
    refine(a, m, fa, flm, fm, left, depth - 1);
    refine(m, b, fm, frm, fb, right, depth - 1);
  }
};

double voigt_density(double x, double fwhm_l, double fwhm_g) {
  double sg = gauss_sigma(fwhm_g);
  double wide = 8.0 * sg;
  double spike = 4.0 * fwhm_l;
  double lo = std::min(x - wide, -spike);
  double hi = std::max(x + wide, spike);
  std::vector<double> breaks = {x - sg, x, x + sg, -fwhm_l, -0.5 * fwhm_l,
                                0.0,    0.5 * fwhm_l, fwhm_l};
  auto integrand = [&](double t) {
    return lorentz_density(t, fwhm_l) * gauss_density(x - t, fwhm_g);
  };
  auto r = quad::integrate(integrand, lo, hi, breaks, 1e-17, 1e-10);
  return r.value;
}

void validate_density_width(double fwhm) {
  if (!(fwhm > 0.0) || !std::isfinite(fwhm))
    throw std::invalid_argument("lineshape fwhm must be positive and finite");
}

}  // namespace

Lineshape make_lorentzian(double center_mhz, double fwhm_mhz) {
  validate_density_width(fwhm_mhz);
  Lineshape s;
  s.kind = LineKind::lorentzian;
  s.center_mhz = center_mhz;
  s.fwhm_mhz = fwhm_mhz;
  s.lorentzian_fwhm_mhz = fwhm_mhz;
  return s;
}

Lineshape make_gaussian(double center_mhz, double fwhm_mhz) {
  validate_density_width(fwhm_mhz);
  Lineshape s;
  s.kind = LineKind::gaussian;
  s.center_mhz = center_mhz;
  s.fwhm_mhz = fwhm_mhz;
  s.gaussian_fwhm_mhz = fwhm_mhz;
  return s;
}

Lineshape make_voigt(double center_mhz, double lorentzian_fwhm_mhz,
                     double gaussian_fwhm_mhz) {
  if (lorentzian_fwhm_mhz < 0.0 || gaussian_fwhm_mhz < 0.0)
    throw std::invalid_argument("voigt components must be non-negative");
  if (lorentzian_fwhm_mhz < kComponentFloorMhz)
    return make_gaussian(center_mhz, gaussian_fwhm_mhz);
  if (gaussian_fwhm_mhz < kComponentFloorMhz)
    return make_lorentzian(center_mhz, lorentzian_fwhm_mhz);
  Lineshape s;
  s.kind = LineKind::voigt;
  s.center_mhz = center_mhz;
  s.lorentzian_fwhm_mhz = lorentzian_fwhm_mhz;
  s.gaussian_fwhm_mhz = gaussian_fwhm_mhz;
  s.fwhm_mhz = voigt_fwhm_estimate(lorentzian_fwhm_mhz, gaussian_fwhm_mhz);
  return s;
}

Lineshape make_airy(double center_mhz, double fwhm_mhz, double fsr_mhz) {
  validate_density_width(fwhm_mhz);
  if (!(fsr_mhz > 0.0))
    throw std::invalid_argument("airy fsr must be positive");
  if (!(fwhm_mhz < 0.5 * fsr_mhz))
    throw std::invalid_argument("airy fwhm must be below fsr/2");
  Lineshape s;
  s.kind = LineKind::airy;
  s.center_mhz = center_mhz;
  s.fwhm_mhz = fwhm_mhz;
  s.fsr_mhz = fsr_mhz;
  return s;
}

double voigt_fwhm_estimate(double fl, double fg) {
  return 0.5346 * fl + std::sqrt(0.2166 * fl * fl + fg * fg);
}

double evaluate(const Lineshape& s, double nu_mhz) {
  double x = nu_mhz - s.center_mhz;
  switch (s.kind) {
    case LineKind::lorentzian:
      return lorentz_density(x, s.fwhm_mhz);
    case LineKind::gaussian:
      return gauss_density(x, s.fwhm_mhz);
    case LineKind::voigt:
      return voigt_density(x, s.lorentzian_fwhm_mhz, s.gaussian_fwhm_mhz);
    case LineKind::airy: {
      double finesse = s.fsr_mhz / s.fwhm_mhz;
      double phase = std::sin(kPi * x / s.fsr_mhz);
      double coeff = 2.0 * finesse / kPi;
      return 1.0 / (1.0 + coeff * coeff * phase * phase);
    }
  }
  throw std::logic_error("evaluate: unknown lineshape kind");
}

double evaluate_peak1(const Lineshape& s, double nu_mhz) {
  if (s.kind == LineKind::airy) return evaluate(s, nu_mhz);
  return evaluate(s, nu_mhz) / evaluate(s, s.center_mhz);
}

namespace quad {

Result integrate(const std::function<double(double)>& f, double lo, double hi,
                 const std::vector<double>& breakpoints, double abs_tol,
                 double rel_tol) {
  if (!(lo < hi)) throw std::invalid_argument("integrate: requires lo < hi");
  std::vector<double> knots;
  knots.push_back(lo);
  for (double b : breakpoints)
    if (b > lo && b < hi) knots.push_back(b);
  knots.push_back(hi);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  SimpsonState state{f, abs_tol / static_cast<double>(knots.size()), rel_tol};
  for (size_t i = 0; i + 1 < knots.size(); ++i) {
    double a = knots[i];
    double b = knots[i + 1];
    double m = 0.5 * (a + b);
    double fa = f(a);
    double fm = f(m);
    double fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    state.refine(a, b, fa, fm, fb, whole, 52);
  }
  return {state.value, state.err};
}

}  // namespace quad

namespace {

std::vector<double> density_breakpoints(const Lineshape& s) {
  double c = s.center_mhz;
  double w = s.fwhm_mhz;
  return {c - 3.0 * w, c - w, c - 0.5 * w, c, c + 0.5 * w, c + w, c + 3.0 * w};
}

OverlapResult overlap_impl(const Lineshape& spectrum,
                           const std::function<double(double)>& filter_peak1,
                           double fc, double ffw,
                           const std::vector<double>& extra_breaks) {
  if (spectrum.kind == LineKind::airy)
    throw std::invalid_argument("filtered_fraction: spectrum must be a density");
  double range = 50.0 * (spectrum.fwhm_mhz + ffw);
  double lo = std::min(spectrum.center_mhz, fc) - range;
  double hi = std::max(spectrum.center_mhz, fc) + range;

  std::vector<double> breaks = density_breakpoints(spectrum);
  for (double k : {-3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 3.0})
    breaks.push_back(fc + k * ffw);
  breaks.insert(breaks.end(), extra_breaks.begin(), extra_breaks.end());

  auto integrand = [&](double nu) {
    return evaluate(spectrum, nu) * filter_peak1(nu);
  };
  auto r = quad::integrate(integrand, lo, hi, breaks, 1e-9, 1e-8);

  // beyond the range the filter is taken flat at its boundary value
  double left_tail = cdf_below(spectrum.kind, lo, spectrum.center_mhz,
                               spectrum.lorentzian_fwhm_mhz,
                               spectrum.gaussian_fwhm_mhz) *
                     filter_peak1(lo);
  double right_tail = (1.0 - cdf_below(spectrum.kind, hi, spectrum.center_mhz,
                                       spectrum.lorentzian_fwhm_mhz,
                                       spectrum.gaussian_fwhm_mhz)) *
                      filter_peak1(hi);

  OverlapResult out;
  out.value = r.value + left_tail + right_tail;
  out.abs_error_estimate = r.abs_error + 0.5 * (left_tail + right_tail);
  out.range_warning = std::abs(spectrum.center_mhz - fc) > range;
  return out;
}

}  // namespace

OverlapResult filtered_fraction(const Lineshape& spectrum,
                                const Lineshape& filter) {
  std::vector<double> extra;
  if (filter.kind == LineKind::airy) {
    // resolve every transmission order inside the quadrature range
    double range = 50.0 * (spectrum.fwhm_mhz + filter.fwhm_mhz);
    double lo = std::min(spectrum.center_mhz, filter.center_mhz) - range;
    double hi = std::max(spectrum.center_mhz, filter.center_mhz) + range;
    double k0 = std::floor((lo - filter.center_mhz) / filter.fsr_mhz);
    for (double c = filter.center_mhz + k0 * filter.fsr_mhz; c < hi + filter.fsr_mhz;
         c += filter.fsr_mhz) {
      extra.push_back(c - filter.fwhm_mhz);
      extra.push_back(c);
      extra.push_back(c + filter.fwhm_mhz);
    }
  }
  auto fn = [filter](double nu) { return evaluate_peak1(filter, nu); };
  return overlap_impl(spectrum, fn, filter.center_mhz, filter.fwhm_mhz, extra);
}

OverlapResult filtered_fraction(const Lineshape& spectrum,
                                const std::function<double(double)>& filter_peak1,
                                double filter_center_mhz,
                                double filter_fwhm_mhz) {
  if (!(filter_fwhm_mhz > 0.0))
    throw std::invalid_argument("filtered_fraction: filter fwhm must be positive");
  return overlap_impl(spectrum, filter_peak1, filter_center_mhz,
                      filter_fwhm_mhz, {});
}

Lineshape convolve(const Lineshape& a, const Lineshape& b) {
  if (a.kind == LineKind::airy || b.kind == LineKind::airy)
    throw std::invalid_argument("convolve: airy lineshapes do not convolve");
  double c = a.center_mhz + b.center_mhz;
  double fl = a.lorentzian_fwhm_mhz + b.lorentzian_fwhm_mhz;
  double fg = std::hypot(a.gaussian_fwhm_mhz, b.gaussian_fwhm_mhz);
  if (fl < kComponentFloorMhz) return make_gaussian(c, fg);
  if (fg < kComponentFloorMhz) return make_lorentzian(c, fl);
  return make_voigt(c, fl, fg);
}

double integrated_area(const Lineshape& s, double lo_mhz, double hi_mhz) {
  if (!(lo_mhz < hi_mhz))
    throw std::invalid_argument("integrated_area: requires lo < hi");
  switch (s.kind) {
    case LineKind::lorentzian:
    case LineKind::gaussian:
      return cdf_below(s.kind, hi_mhz, s.center_mhz, s.lorentzian_fwhm_mhz,
                       s.gaussian_fwhm_mhz) -
             cdf_below(s.kind, lo_mhz, s.center_mhz, s.lorentzian_fwhm_mhz,
                       s.gaussian_fwhm_mhz);
    case LineKind::voigt: {
      double reach = 60.0 * (s.lorentzian_fwhm_mhz + s.gaussian_fwhm_mhz);
      double a = std::max(lo_mhz, s.center_mhz - reach);
      double b = std::min(hi_mhz, s.center_mhz + reach);
      double total = 0.0;
      if (a < b) {
        auto f = [&](double nu) { return evaluate(s, nu); };
        total += quad::integrate(f, a, b, density_breakpoints(s), 1e-9, 1e-8)
                     .value;
      }
      // portions beyond the numeric reach carry lorentzian tail mass
      if (lo_mhz < a)
        total += cdf_below(s.kind, a, s.center_mhz, s.lorentzian_fwhm_mhz, 0) -
                 cdf_below(s.kind, lo_mhz, s.center_mhz, s.lorentzian_fwhm_mhz,
                           0);
      if (hi_mhz > b)
        total += cdf_below(s.kind, hi_mhz, s.center_mhz, s.lorentzian_fwhm_mhz,
                           0) -
                 cdf_below(s.kind, b, s.center_mhz, s.lorentzian_fwhm_mhz, 0);
      return total;
    }
    case LineKind::airy: {
      std::vector<double> breaks;
      double k0 = std::floor((lo_mhz - s.center_mhz) / s.fsr_mhz);
      for (double c = s.center_mhz + k0 * s.fsr_mhz; c < hi_mhz + s.fsr_mhz;
           c += s.fsr_mhz) {
        breaks.push_back(c - s.fwhm_mhz);
        breaks.push_back(c);
        breaks.push_back(c + s.fwhm_mhz);
      }
      auto f = [&](double nu) { return evaluate(s, nu); };
      return quad::integrate(f, lo_mhz, hi_mhz, breaks, 1e-9, 1e-8).value;
    }
  }
  throw std::logic_error("integrated_area: unknown lineshape kind");
}

double numeric_fwhm(const std::function<double(double)>& profile, double center,
                    double peak_value, double width_guess) {
  if (!(peak_value > 0.0) || !(width_guess > 0.0))
    throw std::invalid_argument("numeric_fwhm: bad peak or width guess");
  double half = 0.5 * peak_value;
  auto crossing = [&](double direction) {
    double step = 0.25 * width_guess;
    double inner = center;
    double outer = center + direction * step;
    int guard = 0;
    while (profile(outer) >= half) {
      inner = outer;
      step *= 1.6;
      outer = center + direction * (std::abs(outer - center) + step);
      if (++guard > 200)
        throw std::runtime_error("numeric_fwhm: no half-maximum crossing");
    }
    for (int i = 0; i < 80; ++i) {
      double mid = 0.5 * (inner + outer);
      (profile(mid) >= half ? inner : outer) = mid;
    }
    return 0.5 * (inner + outer);
  };
  double right = crossing(+1.0);
  double left = crossing(-1.0);
  return right - left;
}

double numeric_fwhm(const Lineshape& s) {
  auto profile = [&](double nu) { return evaluate(s, nu); };
  return numeric_fwhm(profile, s.center_mhz, evaluate(s, s.center_mhz),
                      s.fwhm_mhz);
}

double voigt_gaussian_component(double total_fwhm_mhz,
                                double lorentzian_fwhm_mhz) {
  if (!(total_fwhm_mhz > 0.0) || lorentzian_fwhm_mhz < 0.0)
    throw std::invalid_argument("voigt_gaussian_component: bad widths");
  if (total_fwhm_mhz < lorentzian_fwhm_mhz)
    throw std::invalid_argument(
        "voigt_gaussian_component: total width below lorentzian component");
  if (total_fwhm_mhz - lorentzian_fwhm_mhz < kComponentFloorMhz) return 0.0;
  if (lorentzian_fwhm_mhz < kComponentFloorMhz) return total_fwhm_mhz;
  auto width_of = [&](double g) {
    return numeric_fwhm(make_voigt(0.0, lorentzian_fwhm_mhz, g));
  };
  double lo = 0.0;
  double hi = total_fwhm_mhz;  // olivero estimate already exceeds total here
  for (int i = 0; i < 60 && hi - lo > 1e-7 * total_fwhm_mhz; ++i) {
    double mid = 0.5 * (lo + hi);
    (width_of(mid) < total_fwhm_mhz ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace qdmem
