#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qdmem/qd_source.hpp"
#include "qdmem/spectra.hpp"

namespace qdmem {

struct ChainStage {
  std::string name;
  double transmission = 1.0;  // in (0, 1]
  bool assumed = false;       // estimated rather than measured
};

struct LossBudget {
  double input_rate_cps = 40e6;
  std::vector<ChainStage> stages;  // ordered source -> detector
};

// bundled budget: excitation at 40e6/s, source side down to the fiber,
// then the memory-side stages
LossBudget default_loss_budget();

// product of stage transmissions over the inclusive [from, to] span
double chain_transmission(const LossBudget& budget, std::string_view from,
                          std::string_view to);

struct StageRate {
  std::string name;
  double transmission = 1.0;
  bool assumed = false;
  double rate_cps = 0.0;  // cumulative rate after this stage
};

// cumulative count rates through every stage
std::vector<StageRate> predicted_rates(const LossBudget& budget);

struct DispersiveCell {
  double temperature_c = 60.0;
  double effective_delay_stretch = 1.0;  // observed decay / input decay, >= 1
};

struct EtalonResult {
  PhotonWavepacket wavepacket;
  double passed_fraction = 0.0;
};

// spectral filtering only; the technical insertion loss is a LossBudget
// stage. The etalon must be peak-1 (airy, or a lorentzian taken as peak-1).
EtalonResult apply_etalon(const PhotonWavepacket& wp, const Lineshape& etalon);

// stretches the temporal envelope, spectrum untouched
PhotonWavepacket apply_dispersive_cell(const PhotonWavepacket& wp,
                                       const DispersiveCell& cell);

}  // namespace qdmem
