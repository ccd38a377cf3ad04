#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qdmem/detection.hpp"
#include "qdmem/qd_source.hpp"

using namespace qdmem;

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

// reference: distribution function of t0 + Exp(tau) + N(0, sigma)
double emg_cdf(double t, double t0, double tau, double sigma) {
  double z = (t - t0) / sigma;
  double k = sigma / tau;
  return normal_cdf(z) -
         std::exp(0.5 * k * k - (t - t0) / tau) * normal_cdf(z - k);
}

}  // namespace

TEST_CASE("bin means conserve the event budget") {
  ExpProfile leak{2.0, 1.39, 1e-3};
  GaussProfile ret{13.8, 0.4247, 2e-5};
  DetectorParams det;
  det.efficiency = 0.8;
  auto mu = expected_bin_means(leak, ret, det, 1000000000ull, 25.0, 100.0, 4.0);
  REQUIRE(mu.size() == 250);
  double total = std::accumulate(mu.begin(), mu.end(), 0.0);
  double expected =
      0.8 * 1e9 * (leak.fraction + ret.fraction) + 250.0 * 4.0;
  // both profiles sit well inside the window, tails are negligible
  CHECK(total == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("bin means follow the jitter-folded distribution") {
  ExpProfile leak{2.0, 1.39, 1e-3};
  GaussProfile ret{0.0, 1.0, 0.0};
  DetectorParams det;  // 93 ps gaussian response
  double sigma = det.irf_fwhm_ps * 1e-3 / kFwhmPerSigma;
  auto mu = expected_bin_means(leak, ret, det, 1000000000ull, 25.0, 100.0, 0.0);
  for (size_t i : {0ul, 19ul, 20ul, 21ul, 60ul, 150ul}) {
    double lo = 0.1 * static_cast<double>(i);
    double hi = lo + 0.1;
    double want = 1e9 * leak.fraction *
                  (emg_cdf(hi, 2.0, 1.39, sigma) - emg_cdf(lo, 2.0, 1.39, sigma));
    CHECK(mu[i] == doctest::Approx(want).epsilon(1e-9));
  }
  CHECK_THROWS_AS(
      expected_bin_means(leak, ret, det, 1, 25.0, 0.0, 0.0),
      std::invalid_argument);
  ExpProfile bad{0.0, 1.0, 1.5};
  CHECK_THROWS_AS(expected_bin_means(bad, ret, det, 1, 25.0, 100.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("dark counts add to the flat background") {
  ExpProfile leak{2.0, 1.39, 0.0};
  GaussProfile ret{13.8, 0.4247, 0.0};
  DetectorParams det;
  det.dark_rate_cps = 100.0;
  auto mu = expected_bin_means(leak, ret, det, 1000000ull, 25.0, 100.0, 0.0);
  // 100 cps over a 100 ps bin, accumulated across 1e6 triggers
  CHECK(mu[40] == doctest::Approx(100.0 * 100e-12 * 1e6).epsilon(1e-9));
}

TEST_CASE("histogram synthesis is seed-deterministic") {
  ExpProfile leak{0.0, 2.23, 4e-6};
  GaussProfile ret{13.8, 0.4247, 1.3e-7};
  DetectorParams det;
  auto a = synthesize_histogram(leak, ret, det, 10000000000ull, 25.0, 100.0,
                                30.0, 555);
  auto b = synthesize_histogram(leak, ret, det, 10000000000ull, 25.0, 100.0,
                                30.0, 555);
  auto c = synthesize_histogram(leak, ret, det, 10000000000ull, 25.0, 100.0,
                                30.0, 556);
  REQUIRE(a.counts.size() == b.counts.size());
  CHECK(a.counts == b.counts);
  CHECK(a.counts != c.counts);
  CHECK(a.bin_width_ps == doctest::Approx(100.0));
  CHECK(a.n_triggers == 10000000000ull);
  CHECK(a.background_per_bin == doctest::Approx(30.0));
  CHECK(a.tau_s_ns == doctest::Approx(13.8));
  GaussProfile off{13.8, 0.4247, 0.0};
  CHECK(synthesize_histogram(leak, off, det, 1000ull, 25.0, 100.0, 0.0, 1)
            .tau_s_ns < 0.0);
}

TEST_CASE("synthesized counts track the expectation values") {
  ExpProfile leak{0.0, 2.23, 4e-6};
  GaussProfile ret{13.8, 0.4247, 1.3e-7};
  DetectorParams det;
  auto mu = expected_bin_means(leak, ret, det, 10000000000ull, 25.0, 100.0, 30.0);
  auto h = synthesize_histogram(leak, ret, det, 10000000000ull, 25.0, 100.0,
                                30.0, 777);
  double total_mu = std::accumulate(mu.begin(), mu.end(), 0.0);
  double total = 0.0;
  for (auto c : h.counts) total += static_cast<double>(c);
  CHECK(std::abs(total - total_mu) < 6.0 * std::sqrt(total_mu));
}

TEST_CASE("coincidence pairing bins signed delays") {
  std::vector<std::int64_t> a = {0};
  std::vector<std::int64_t> b = {-12500, 0, 12500, 39999, 41000};
  auto h = coincidence_histogram(a, b, 0.1, 40.0, 12.5, 1000);
  REQUIRE(h.counts.size() == 800);
  auto near = [&](double delay_ns) {
    auto center = static_cast<long>((delay_ns + 40.0) / 0.1);
    std::uint64_t total = 0;
    for (long i = center - 2; i <= center + 2; ++i)
      if (i >= 0 && i < 800) total += h.counts[static_cast<size_t>(i)];
    return total;
  };
  CHECK(near(-12.5) == 1);
  CHECK(near(0.0) == 1);
  CHECK(near(12.5) == 1);
  CHECK(near(39.9) == 1);
  std::uint64_t total = 0;
  for (auto c : h.counts) total += c;
  // the +41 ns partner lies outside the span
  CHECK(total == 4);
  CHECK_THROWS_AS(coincidence_histogram(a, b, 0.0, 40.0, 12.5, 1),
                  std::invalid_argument);
}

TEST_CASE("split detection keeps every event at unit efficiency") {
  QdParams qd;
  qd.mean_photons_per_pulse = 0.05;
  auto events = sample_emission_stream(qd, 200000, 80.0, 31);
  DetectorParams det;
  HbtOutput out = simulate_hbt(events, 80.0, det, 200000, 80.0, 0.1, 32);
  CHECK(out.det_a_ps.size() + out.det_b_ps.size() == events.size());
  CHECK(std::is_sorted(out.det_a_ps.begin(), out.det_a_ps.end()));
  // both channels see a similar share
  double ratio = static_cast<double>(out.det_a_ps.size()) /
                 static_cast<double>(events.size());
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.05));
  CHECK_THROWS_AS(simulate_hbt(events, 80.0, det, 200000, 30.0, 0.1, 32),
                  std::invalid_argument);
}

TEST_CASE("correlation peaks line up with the pulse period") {
  QdParams qd;
  qd.mean_photons_per_pulse = 0.05;
  auto events = sample_emission_stream(qd, 2000000, 80.0, 41);
  DetectorParams det;
  HbtOutput out = simulate_hbt(events, 80.0, det, 2000000, 80.0, 0.1, 42);
  const auto& h = out.hist;
  auto area = [&](double center) {
    double total = 0.0;
    for (size_t i = 0; i < h.counts.size(); ++i) {
      double mid = -h.span_ns + (static_cast<double>(i) + 0.5) * h.bin_width_ns;
      if (std::abs(mid - center) <= 2.0)
        total += static_cast<double>(h.counts[i]);
    }
    return total;
  };
  double side = 0.5 * (area(12.5) + area(-12.5));
  double central = area(0.0);
  double between = area(6.25);
  CHECK(side > 100.0);
  CHECK(between < 0.05 * side);
  // antibunched: central peak far below the uncorrelated side peaks
  CHECK(central < 0.35 * side);
}

TEST_CASE("scan trace shows repeated orders with counting noise") {
  Lineshape line = make_gaussian(0.0, 5100.0);
  FpiScan scan = simulate_fpi_scan(line, 150.0, 12.3, 0.05, 640, 100000.0, 77);
  FpiScan again = simulate_fpi_scan(line, 150.0, 12.3, 0.05, 640, 100000.0, 77);
  REQUIRE(scan.sample.size() == 640);
  REQUIRE(scan.intensity.size() == 640);
  CHECK(scan.intensity == again.intensity);
  CHECK(scan.true_ghz_per_sample == doctest::Approx(0.05));

  // two transmission orders separated by fsr / step = 246 samples
  double peak = *std::max_element(scan.intensity.begin(), scan.intensity.end());
  CHECK(peak == doctest::Approx(100000.0).epsilon(0.05));
  size_t first = 0;
  size_t second = 0;
  for (size_t i = 0; i < scan.intensity.size(); ++i) {
    if (scan.intensity[i] > 0.6 * peak) {
      if (first == 0)
        first = i;
      else if (i > first + 100)
        second = second == 0 ? i : second;
    }
  }
  CHECK(second > 0);
  CHECK_THROWS_AS(simulate_fpi_scan(line, 150.0, 0.0, 0.05, 640, 1e5, 1),
                  std::invalid_argument);
}
