#include "qdmem/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qdmem {

namespace {

// Lanczos approximation (g = 7, 9 terms); own copy so Poisson acceptance
// tests are bit-identical everywhere
double log_gamma(double x) {
  static const double coeff[9] = {
      0.99999999999980993,      676.5203681218851,   -1259.1392167224028,
      771.32342877765313,       -176.61502916214059, 12.507343278686905,
      -0.13857109526572012,     9.9843695780195716e-6,
      1.5056327351493116e-7};
  if (x < 0.5)
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) -
           log_gamma(1.0 - x);
  x -= 1.0;
  double a = coeff[0];
  double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += coeff[i] / (x + i);
  return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t +
         std::log(a);
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rng Rng::child(std::uint64_t master_seed, std::string_view stream_name) {
  return Rng(splitmix64(master_seed ^ fnv1a64(stream_name)));
}

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::exponential(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("exponential: scale must be positive");
  // u in [0,1) so log1p(-u) is finite
  return -scale * std::log1p(-uniform());
}

double Rng::normal(double mean, double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("normal: sigma must be non-negative");
  double u1 = 1.0 - uniform();  // (0,1], keeps the log finite
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  return mean + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::poisson(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("poisson: lambda must be finite and non-negative");
  if (lambda == 0.0) return 0;
  if (lambda < 10.0) return poisson_inversion(lambda);
  return poisson_ptrs(lambda);
}

std::uint64_t Rng::poisson_inversion(double lambda) {
  double limit = std::exp(-lambda);
  double prod = 1.0;
  std::uint64_t k = 0;
  do {
    ++k;
    prod *= uniform();
  } while (prod > limit);
  return k - 1;
}

// Hoermann's transformed rejection (PTRS); valid for lambda >= 10
std::uint64_t Rng::poisson_ptrs(double lambda) {
  double slam = std::sqrt(lambda);
  double loglam = std::log(lambda);
  double b = 0.931 + 2.53 * slam;
  double a = -0.059 + 0.02483 * b;
  double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = uniform() - 0.5;
    double v = 1.0 - uniform();  // (0,1], keeps the log finite
    double us = 0.5 - std::abs(u);
    double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        k * loglam - lambda - log_gamma(k + 1.0))
      return static_cast<std::uint64_t>(k);
  }
}

}  // namespace qdmem
