#include "qdmem/optical_chain.hpp"

#include <stdexcept>

namespace qdmem {

namespace {

size_t stage_index(const LossBudget& budget, std::string_view name) {
  for (size_t i = 0; i < budget.stages.size(); ++i)
    if (budget.stages[i].name == name) return i;
  throw std::out_of_range("loss budget has no stage named '" +
                          std::string(name) + "'");
}

void validate_budget(const LossBudget& budget) {
  for (const auto& st : budget.stages)
    if (!(st.transmission > 0.0) || st.transmission > 1.0)
      throw std::invalid_argument("stage '" + st.name +
                                  "' transmission must be in (0, 1]");
}

}  // namespace

LossBudget default_loss_budget() {
  LossBudget b;
  b.input_rate_cps = 40e6;
  b.stages = {
      {"qd_source", 0.40, true},
      {"upl_optics", 0.1, false},
      {"polarization_filtering", 0.5, true},
      {"fiber_coupling", 0.025, false},
      {"memory_unit", 0.13, false},
      {"etalon", 0.5, false},
      {"spectral_filtering", 0.66, false},
  };
  return b;
}

double chain_transmission(const LossBudget& budget, std::string_view from,
                          std::string_view to) {
  validate_budget(budget);
  size_t a = stage_index(budget, from);
  size_t b = stage_index(budget, to);
  if (a > b)
    throw std::invalid_argument("chain_transmission: 'from' must not follow 'to'");
  double t = 1.0;
  for (size_t i = a; i <= b; ++i) t *= budget.stages[i].transmission;
  return t;
}

std::vector<StageRate> predicted_rates(const LossBudget& budget) {
  validate_budget(budget);
  if (!(budget.input_rate_cps > 0.0))
    throw std::invalid_argument("predicted_rates: input rate must be positive");
  std::vector<StageRate> out;
  double rate = budget.input_rate_cps;
  for (const auto& st : budget.stages) {
    rate *= st.transmission;
    out.push_back({st.name, st.transmission, st.assumed, rate});
  }
  return out;
}

EtalonResult apply_etalon(const PhotonWavepacket& wp, const Lineshape& etalon) {
  if (etalon.kind == LineKind::gaussian || etalon.kind == LineKind::voigt)
    throw std::invalid_argument(
        "apply_etalon: etalon must be airy or lorentzian");
  EtalonResult out;
  out.passed_fraction = spectral_filtered_fraction(wp, etalon).value;
  out.wavepacket = wp;
  out.wavepacket.filters.push_back(etalon);
  out.wavepacket.mean_photon_flux = wp.mean_photon_flux * out.passed_fraction;
  return out;
}

PhotonWavepacket apply_dispersive_cell(const PhotonWavepacket& wp,
                                       const DispersiveCell& cell) {
  if (!(cell.effective_delay_stretch >= 1.0))
    throw std::invalid_argument(
        "apply_dispersive_cell: stretch must be at least 1");
  PhotonWavepacket out = wp;
  out.tau_ns = wp.tau_ns * cell.effective_delay_stretch;
  return out;
}

}  // namespace qdmem
