#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "doctest.h"
#include "qdmem/detection.hpp"
#include "qdmem/optical_chain.hpp"
#include "qdmem/qd_source.hpp"

using namespace qdmem;

TEST_CASE("tuning curve interpolates between anchors") {
  QdParams qd;
  CHECK(emission_detuning_mhz(qd, 4.0) == doctest::Approx(0.0));
  CHECK(emission_detuning_mhz(qd, 17.0) == doctest::Approx(15000.0));
  CHECK(emission_detuning_mhz(qd, 21.0) == doctest::Approx(45000.0));
  CHECK(emission_detuning_mhz(qd, 19.0) == doctest::Approx(30000.0));
  CHECK(emission_detuning_mhz(qd, 10.5) == doctest::Approx(7500.0));
  CHECK_THROWS_AS(emission_detuning_mhz(qd, 3.5), std::out_of_range);
  CHECK_THROWS_AS(emission_detuning_mhz(qd, 25.0), std::out_of_range);

  QdParams bad = qd;
  bad.tuning_curve = {{4.0, 0.0}};
  CHECK_THROWS_AS(emission_detuning_mhz(bad, 4.0), std::invalid_argument);
  bad.tuning_curve = {{4.0, 10.0}, {17.0, 0.0}};
  CHECK_THROWS_AS(emission_detuning_mhz(bad, 10.0), std::invalid_argument);
}

TEST_CASE("wavepacket lands on resonance at the operating point") {
  QdParams qd;
  PhotonWavepacket wp = build_wavepacket(qd, 17.0);
  CHECK(wp.spectral.kind == LineKind::voigt);
  CHECK(wp.spectral.center_mhz == doctest::Approx(0.0));
  CHECK(wp.spectral.lorentzian_fwhm_mhz == doctest::Approx(400.0));
  CHECK(wp.spectral.gaussian_fwhm_mhz == doctest::Approx(4883.283).epsilon(1e-4));
  CHECK(wp.tau_ns == doctest::Approx(1.39));
  CHECK(wp.mean_photon_flux == doctest::Approx(5e-4));
  CHECK(wp.filters.empty());

  PhotonWavepacket cold = build_wavepacket(qd, 4.0);
  CHECK(cold.spectral.center_mhz == doctest::Approx(15000.0));
}

TEST_CASE("wavepacket degenerates cleanly at the width edges") {
  QdParams qd;
  qd.hom_fwhm_mhz = 0.0;
  CHECK(build_wavepacket(qd, 17.0).spectral.kind == LineKind::gaussian);
  qd.hom_fwhm_mhz = 5100.0;
  CHECK(build_wavepacket(qd, 17.0).spectral.kind == LineKind::lorentzian);
  qd.inhom_fwhm_mhz = 400.0;
  qd.hom_fwhm_mhz = 401.0;
  CHECK_THROWS_AS(build_wavepacket(qd, 17.0), std::invalid_argument);
}

TEST_CASE("saturation curve follows the stated exponents") {
  CHECK(intensity_vs_power(1.0, 0.8) == doctest::Approx(1.0));
  CHECK(intensity_vs_power(2.0, 0.8) == doctest::Approx(std::pow(2.0, 0.8)));
  CHECK(intensity_vs_power(0.5, 1.9) == doctest::Approx(std::pow(0.5, 1.9)));
  CHECK_THROWS_AS(intensity_vs_power(-0.1, 0.8), std::domain_error);
}

TEST_CASE("recapture probability reproduces the target purity") {
  double pr = recapture_probability(0.15, 0.05);
  CHECK(pr == doctest::Approx(0.0037784).epsilon(1e-4));
  CHECK(g2_of_recapture(0.05, pr) == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(recapture_probability(0.0, 0.05) == doctest::Approx(0.0));
  // higher purity target needs more recapture
  CHECK(recapture_probability(0.3, 0.05) > pr);
  CHECK_THROWS_AS(recapture_probability(0.15, 0.0), std::domain_error);
  CHECK_THROWS_AS(recapture_probability(30.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(g2_of_recapture(0.0, 0.1), std::domain_error);
}

TEST_CASE("emission stream carries the requested statistics") {
  QdParams qd;
  qd.mean_photons_per_pulse = 0.05;
  const std::uint64_t n_pulses = 400000;
  auto events = sample_emission_stream(qd, n_pulses, 80.0, 99);
  auto again = sample_emission_stream(qd, n_pulses, 80.0, 99);
  REQUIRE(events.size() == again.size());
  CHECK(events[17].pulse_index == again[17].pulse_index);
  CHECK(events[17].time_ns == again[17].time_ns);

  std::uint64_t n_signal = 0;
  std::uint64_t n_recapture = 0;
  double sum_t = 0.0;
  for (const auto& ev : events) {
    if (ev.kind == EventKind::signal) {
      ++n_signal;
      sum_t += ev.time_ns;
    } else if (ev.kind == EventKind::recapture) {
      ++n_recapture;
    }
  }
  double p1_hat = static_cast<double>(n_signal) / static_cast<double>(n_pulses);
  // five sigma around p1 = 0.05
  CHECK(std::abs(p1_hat - 0.05) < 5.0 * std::sqrt(0.05 * 0.95 / 4e5));
  double pr = recapture_probability(0.15, 0.05);
  double r_hat = static_cast<double>(n_recapture) / static_cast<double>(n_signal);
  CHECK(std::abs(r_hat - pr) <
        5.0 * std::sqrt(pr / static_cast<double>(n_signal)));
  CHECK(sum_t / static_cast<double>(n_signal) ==
        doctest::Approx(1.39).epsilon(0.05));
}

TEST_CASE("pure source emits no recapture events") {
  QdParams qd;
  qd.mean_photons_per_pulse = 0.05;
  qd.purity_g2 = 0.0;
  for (const auto& ev : sample_emission_stream(qd, 100000, 80.0, 7))
    CHECK(ev.kind == EventKind::signal);
}

TEST_CASE("background events appear when enabled") {
  QdParams qd;
  qd.mean_photons_per_pulse = 0.0;
  qd.background_rate_mhz = 1.0;
  auto events = sample_emission_stream(qd, 100000, 80.0, 7);
  CHECK(events.size() > 500);
  for (const auto& ev : events) {
    CHECK(ev.kind == EventKind::background);
    CHECK(ev.time_ns >= 0.0);
    CHECK(ev.time_ns < 12.5);
  }
}

TEST_CASE("loss budget reproduces the published count rates") {
  LossBudget b = default_loss_budget();
  REQUIRE(b.stages.size() == 7);
  CHECK(b.input_rate_cps == doctest::Approx(40e6));
  auto rates = predicted_rates(b);
  auto at = [&](const char* name) -> const StageRate& {
    for (const auto& st : rates)
      if (st.name == name) return st;
    throw std::out_of_range(name);
  };
  CHECK(std::llround(at("qd_source").rate_cps) == 16000000);
  CHECK(std::llround(at("upl_optics").rate_cps) == 1600000);
  CHECK(std::llround(at("polarization_filtering").rate_cps) == 800000);
  CHECK(std::llround(at("fiber_coupling").rate_cps) == 20000);
  CHECK(at("qd_source").assumed);
  CHECK(at("polarization_filtering").assumed);
  CHECK_FALSE(at("upl_optics").assumed);
  CHECK_FALSE(at("fiber_coupling").assumed);
}

TEST_CASE("chain transmission multiplies an inclusive span") {
  LossBudget b = default_loss_budget();
  double t_mem = chain_transmission(b, "memory_unit", "spectral_filtering");
  CHECK(std::abs(t_mem - 0.13 * 0.5 * 0.66) < 1e-15);
  CHECK(std::abs(t_mem - 0.042) < 1e-3);
  CHECK(chain_transmission(b, "qd_source", "fiber_coupling") ==
        doctest::Approx(0.4 * 0.1 * 0.5 * 0.025).epsilon(1e-12));
  CHECK(chain_transmission(b, "etalon", "etalon") == doctest::Approx(0.5));
  CHECK_THROWS_AS(chain_transmission(b, "nope", "etalon"), std::out_of_range);
  CHECK_THROWS_AS(chain_transmission(b, "etalon", "qd_source"),
                  std::invalid_argument);
  LossBudget bad = b;
  bad.stages[0].transmission = 0.0;
  CHECK_THROWS_AS(chain_transmission(bad, "qd_source", "etalon"),
                  std::invalid_argument);
}

TEST_CASE("trigger budget snaps to a power-of-two subdivision") {
  TriggerFraction f = effective_trigger_fraction(SyncChain{80.0, 2, 10.0});
  CHECK(f.picked_rate_mhz == doctest::Approx(40.0));
  CHECK(f.of_picked == doctest::Approx(0.25));
  CHECK(f.of_laser == doctest::Approx(0.125));
  CHECK(effective_trigger_fraction(SyncChain{80.0, 1, 80.0}).of_picked ==
        doctest::Approx(1.0));
  CHECK(effective_trigger_fraction(SyncChain{80.0, 2, 12.0}).of_picked ==
        doctest::Approx(0.25));
  CHECK_THROWS_AS(effective_trigger_fraction(SyncChain{80.0, 0, 10.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(effective_trigger_fraction(SyncChain{0.0, 2, 10.0}),
                  std::invalid_argument);
}

TEST_CASE("etalon filters the spectrum and scales the flux") {
  QdParams qd;
  PhotonWavepacket wp = build_wavepacket(qd, 17.0);
  Lineshape etalon = make_lorentzian(-500.0, 500.0);
  EtalonResult r = apply_etalon(wp, etalon);
  CHECK(r.passed_fraction == doctest::Approx(0.125020).epsilon(2e-4));
  CHECK(r.wavepacket.mean_photon_flux ==
        doctest::Approx(wp.mean_photon_flux * r.passed_fraction));
  REQUIRE(r.wavepacket.filters.size() == 1);
  CHECK(r.wavepacket.filters[0].kind == LineKind::lorentzian);
  // normalization tracks the applied filter
  CHECK(spectral_norm(r.wavepacket) ==
        doctest::Approx(r.passed_fraction).epsilon(1e-6));
  CHECK_THROWS_AS(apply_etalon(wp, make_gaussian(0.0, 500.0)),
                  std::invalid_argument);
}

TEST_CASE("filtered spectral density renormalizes to unit area") {
  PhotonWavepacket wp;
  wp.spectral = make_gaussian(0.0, 5100.0);
  wp.tau_ns = 1.39;
  wp.mean_photon_flux = 5e-4;
  CHECK(spectral_density(wp, 300.0) ==
        doctest::Approx(evaluate(wp.spectral, 300.0)).epsilon(1e-12));

  EtalonResult r = apply_etalon(wp, make_lorentzian(-500.0, 500.0));
  double norm = spectral_norm(r.wavepacket);
  CHECK(norm == doctest::Approx(r.passed_fraction).epsilon(1e-6));
  auto dens = [&](double nu) {
    return evaluate(wp.spectral, nu) *
           evaluate_peak1(r.wavepacket.filters[0], nu) / norm;
  };
  double area = quad::integrate(dens, -60000.0, 60000.0,
                                {-1000.0, -500.0, 0.0, 500.0}, 1e-8, 1e-7)
                    .value;
  CHECK(area == doctest::Approx(1.0).epsilon(0.01));
  CHECK(spectral_density(r.wavepacket, -500.0) ==
        doctest::Approx(dens(-500.0)).epsilon(1e-6));

  // stacking a second filter narrows the admitted fraction further
  auto w2 = spectral_filtered_fraction(r.wavepacket, make_gaussian(-500.0, 560.0));
  CHECK(w2.value > 0.0);
  CHECK(w2.value < 1.0);
  CHECK(w2.value > filtered_fraction(wp.spectral, make_gaussian(-500.0, 560.0)).value);
}

TEST_CASE("dispersive cell stretches the envelope only") {
  QdParams qd;
  PhotonWavepacket wp = build_wavepacket(qd, 17.0);
  PhotonWavepacket out =
      apply_dispersive_cell(wp, DispersiveCell{60.0, 2.23 / 1.47});
  CHECK(out.tau_ns == doctest::Approx(1.39 * 2.23 / 1.47));
  CHECK(out.mean_photon_flux == doctest::Approx(wp.mean_photon_flux));
  CHECK(out.spectral.center_mhz == wp.spectral.center_mhz);
  // the two stretch stages compose to the observed 2.23 ns
  PhotonWavepacket first =
      apply_dispersive_cell(wp, DispersiveCell{22.0, 1.47 / 1.39});
  PhotonWavepacket second =
      apply_dispersive_cell(first, DispersiveCell{60.0, 2.23 / 1.47});
  CHECK(second.tau_ns == doctest::Approx(2.23).epsilon(1e-12));
  CHECK_THROWS_AS(apply_dispersive_cell(wp, DispersiveCell{60.0, 0.9}),
                  std::invalid_argument);
}
