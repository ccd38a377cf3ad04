#include "qdmem/scenario.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qdmem {

namespace {

std::string fmt(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(std::uint64_t v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(int v) {
  char buf[16];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T, class Fn>
std::string join(const std::vector<T>& items, Fn&& piece) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += piece(items[i]);
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  return join(v, [](double x) { return fmt(x); });
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ScenarioParseError(line, msg);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& v, int line) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(line, "bad number '" + v + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& v, int line) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(line, "bad integer '" + v + "'");
  return out;
}

int parse_int(const std::string& v, int line) {
  int out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(line, "bad integer '" + v + "'");
  return out;
}

std::vector<double> parse_list(const std::string& v, int line) {
  std::vector<double> out;
  for (const auto& piece : split(v)) out.push_back(parse_double(piece, line));
  return out;
}

std::vector<bool> parse_flags(const std::string& v, int line) {
  std::vector<bool> out;
  for (const auto& piece : split(v)) {
    if (piece == "0")
      out.push_back(false);
    else if (piece == "1")
      out.push_back(true);
    else
      fail(line, "bad flag '" + piece + "', expected 0 or 1");
  }
  return out;
}

// deferred list keys that must agree in length before assembly
struct PendingLists {
  std::vector<double> tuning_t, tuning_r;
  int tuning_t_line = 0, tuning_r_line = 0;
  std::vector<std::string> stage_names;
  std::vector<double> stage_trans;
  std::vector<bool> stage_assumed;
  int stage_names_line = 0, stage_trans_line = 0, stage_assumed_line = 0;
  std::vector<double> beat_a, beat_f;
  int beat_a_line = 0, beat_f_line = 0;
};

void assemble(Scenario& s, const PendingLists& p) {
  if (p.tuning_t_line || p.tuning_r_line) {
    if (!p.tuning_t_line || !p.tuning_r_line)
      fail(std::max(p.tuning_t_line, p.tuning_r_line),
           "tuning_temperatures_k and tuning_redshifts_mhz must both be set");
    if (p.tuning_t.size() != p.tuning_r.size())
      fail(std::max(p.tuning_t_line, p.tuning_r_line),
           "tuning list lengths differ");
    s.qd.tuning_curve.clear();
    for (std::size_t i = 0; i < p.tuning_t.size(); ++i)
      s.qd.tuning_curve.push_back({p.tuning_t[i], p.tuning_r[i]});
  }
  if (p.stage_names_line || p.stage_trans_line || p.stage_assumed_line) {
    int last = std::max({p.stage_names_line, p.stage_trans_line,
                         p.stage_assumed_line});
    if (!p.stage_names_line || !p.stage_trans_line || !p.stage_assumed_line)
      fail(last, "stage_names, stage_transmissions and stage_assumed must "
                 "all be set");
    if (p.stage_names.size() != p.stage_trans.size() ||
        p.stage_names.size() != p.stage_assumed.size())
      fail(last, "stage list lengths differ");
    s.budget.stages.clear();
    for (std::size_t i = 0; i < p.stage_names.size(); ++i)
      s.budget.stages.push_back(
          {p.stage_names[i], p.stage_trans[i], p.stage_assumed[i]});
  }
  if (p.beat_a_line || p.beat_f_line) {
    int last = std::max(p.beat_a_line, p.beat_f_line);
    if (!p.beat_a_line || !p.beat_f_line)
      fail(last, "beat_amplitudes and beat_frequencies_mhz must both be set");
    if (p.beat_a.size() != p.beat_f.size())
      fail(last, "beat list lengths differ");
    s.memory.beat_components.clear();
    for (std::size_t i = 0; i < p.beat_a.size(); ++i)
      s.memory.beat_components.push_back({p.beat_a[i], p.beat_f[i]});
  }
}

bool known_section(const std::string& name) {
  static const std::set<std::string> sections = {
      "qd", "chain", "etalon", "cell", "memory", "detector", "sync", "run"};
  return sections.count(name) != 0;
}

}  // namespace

ScenarioParseError::ScenarioParseError(int line_no, const std::string& what)
    : std::runtime_error("scenario parse error, line " +
                         std::to_string(line_no) + ": " + what),
      line(line_no) {}

Lineshape EtalonSpec::lineshape() const {
  if (model == "lorentzian") return make_lorentzian(center_mhz, fwhm_mhz);
  if (model == "airy")
    return make_airy(center_mhz, fwhm_mhz, fsr_ghz * 1000.0);
  throw std::invalid_argument("unknown etalon model '" + model + "'");
}

Scenario reference_scenario() { return Scenario{}; }

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> bad;
  auto need = [&bad](bool ok, const char* msg) {
    if (!ok) bad.push_back(msg);
  };

  const QdParams& qd = s.qd;
  need(qd.tau_qd_ns > 0.0, "qd: decay constant must be positive");
  need(qd.hom_fwhm_mhz >= 0.0, "qd: homogeneous width must be >= 0");
  need(qd.inhom_fwhm_mhz > 0.0 && qd.inhom_fwhm_mhz >= qd.hom_fwhm_mhz,
       "qd: total width must be positive and >= the homogeneous width");
  if (qd.tuning_curve.size() < 2) {
    bad.push_back("qd: tuning curve needs at least two anchors");
  } else {
    bool ordered = true, monotone = true;
    for (std::size_t i = 1; i < qd.tuning_curve.size(); ++i) {
      ordered = ordered && qd.tuning_curve[i].temperature_k >
                               qd.tuning_curve[i - 1].temperature_k;
      monotone = monotone && qd.tuning_curve[i].redshift_mhz >=
                                 qd.tuning_curve[i - 1].redshift_mhz;
    }
    need(ordered, "qd: tuning anchors must have increasing temperatures");
    need(monotone, "qd: tuning red shifts must be non-decreasing");
    if (ordered)
      need(s.temperature_k >= qd.tuning_curve.front().temperature_k &&
               s.temperature_k <= qd.tuning_curve.back().temperature_k,
           "operating temperature is outside the tuning curve");
  }
  need(qd.fss_uev >= 0.0, "qd: fine-structure splitting must be >= 0");
  need(qd.power_exponent_x > 0.0 && qd.power_exponent_xx > 0.0,
       "qd: saturation exponents must be positive");
  need(qd.purity_g2 >= 0.0, "qd: target g2 must be >= 0");
  need(qd.recapture_fraction <= 1.0, "qd: recapture fraction must be <= 1");
  need(qd.mean_photons_per_pulse > 0.0 && qd.mean_photons_per_pulse <= 1.0,
       "qd: photons per pulse must be in (0, 1]");
  need(qd.background_rate_mhz >= 0.0, "qd: background rate must be >= 0");

  need(s.budget.input_rate_cps > 0.0, "chain: input rate must be positive");
  if (s.budget.stages.empty()) {
    bad.push_back("chain: at least one stage required");
  } else {
    std::set<std::string> seen;
    bool in_range = true, named = true, unique = true;
    for (const auto& st : s.budget.stages) {
      in_range = in_range && st.transmission > 0.0 && st.transmission <= 1.0;
      named = named && !st.name.empty();
      unique = unique && seen.insert(st.name).second;
    }
    need(in_range, "chain: stage transmissions must be in (0, 1]");
    need(named, "chain: stage names must be non-empty");
    need(unique, "chain: stage names must be unique");
  }

  need(s.etalon.model == "lorentzian" || s.etalon.model == "airy",
       "etalon: model must be lorentzian or airy");
  need(s.etalon.fwhm_mhz > 0.0, "etalon: fwhm must be positive");
  need(s.etalon.fsr_ghz > 0.0, "etalon: free spectral range must be positive");
  if (s.etalon.model == "airy")
    need(s.etalon.fwhm_mhz < s.etalon.fsr_ghz * 500.0,
         "etalon: fwhm must be below half the free spectral range");
  need(s.etalon_decay_stretch >= 1.0,
       "etalon: decay stretch must be >= 1");
  need(s.cell.effective_delay_stretch >= 1.0,
       "cell: decay stretch must be >= 1");

  for (auto& msg : memory_violations(s.memory))
    bad.push_back("memory: " + msg);

  need(s.detector.irf_fwhm_ps > 0.0, "detector: irf fwhm must be positive");
  need(s.detector.dark_rate_cps >= 0.0, "detector: dark rate must be >= 0");
  need(s.detector.efficiency > 0.0 && s.detector.efficiency <= 1.0,
       "detector: efficiency must be in (0, 1]");

  need(s.sync.laser_rate_mhz > 0.0, "sync: laser rate must be positive");
  need(s.sync.pulse_pick_divisor >= 1, "sync: pick divisor must be >= 1");
  need(s.sync.trigger_limit_mhz > 0.0,
       "sync: trigger limit must be positive");

  const RunParams& r = s.run;
  need(r.n_triggers > 0, "run: trigger count must be positive");
  need(r.bin_width_ps > 0.0, "run: bin width must be positive");
  need(r.window_ns > 0.0, "run: window must be positive");
  need(r.background_per_bin >= 0.0, "run: background must be >= 0");
  bool in_window = true;  // an empty list is allowed (manifest-only run)
  for (double tau : r.tau_s_list_ns)
    in_window = in_window && tau >= 0.0 && tau <= r.window_ns;
  need(in_window, "run: storage times must lie within the window");
  need(r.hbt_pulses > 0, "run: correlator pulse count must be positive");
  need(r.hbt_photons_per_pulse > 0.0 && r.hbt_photons_per_pulse <= 1.0,
       "run: correlator brightness must be in (0, 1]");
  need(2.0 * qd.purity_g2 * r.hbt_photons_per_pulse < 1.0,
       "run: g2 target times twice the correlator brightness must stay "
       "below 1");
  need(r.hbt_bin_ns > 0.0, "run: correlator bin must be positive");
  if (s.sync.laser_rate_mhz > 0.0) {
    double period_ns = 1e3 / s.sync.laser_rate_mhz;
    need(r.hbt_span_ns >= 3.0 * period_ns,
         "run: correlator span must cover at least three pulse periods");
  }
  need(r.fpi_fsr_ghz > 0.0, "run: scan free spectral range must be positive");
  need(r.fpi_instrument_fwhm_mhz > 0.0 &&
           r.fpi_instrument_fwhm_mhz < r.fpi_fsr_ghz * 500.0,
       "run: scan instrument width must be positive and below half the "
       "free spectral range");
  need(r.fpi_ghz_per_sample > 0.0, "run: scan step must be positive");
  need(r.fpi_samples >= 16, "run: scan needs at least 16 samples");
  need(r.fpi_samples * r.fpi_ghz_per_sample >= 2.0 * r.fpi_fsr_ghz,
       "run: scan must span at least two transmission orders");
  need(r.fpi_peak_counts > 0.0, "run: scan peak counts must be positive");
  return bad;
}

std::string serialize_scenario(const Scenario& s) {
  std::string out;
  auto kv = [&out](const char* key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };

  out += "[qd]\n";
  kv("tau_qd_ns", fmt(s.qd.tau_qd_ns));
  kv("hom_fwhm_mhz", fmt(s.qd.hom_fwhm_mhz));
  kv("inhom_fwhm_mhz", fmt(s.qd.inhom_fwhm_mhz));
  kv("center_at_base_mhz", fmt(s.qd.center_at_base_mhz));
  kv("tuning_temperatures_k",
     join(s.qd.tuning_curve,
          [](const TuningAnchor& a) { return fmt(a.temperature_k); }));
  kv("tuning_redshifts_mhz",
     join(s.qd.tuning_curve,
          [](const TuningAnchor& a) { return fmt(a.redshift_mhz); }));
  kv("fss_uev", fmt(s.qd.fss_uev));
  kv("power_exponent_x", fmt(s.qd.power_exponent_x));
  kv("power_exponent_xx", fmt(s.qd.power_exponent_xx));
  kv("purity_g2", fmt(s.qd.purity_g2));
  kv("recapture_fraction", fmt(s.qd.recapture_fraction));
  kv("recapture_delay_ns", fmt(s.qd.recapture_delay_ns));
  kv("mean_photons_per_pulse", fmt(s.qd.mean_photons_per_pulse));
  kv("background_rate_mhz", fmt(s.qd.background_rate_mhz));
  kv("temperature_k", fmt(s.temperature_k));

  out += "\n[chain]\n";
  kv("input_rate_cps", fmt(s.budget.input_rate_cps));
  kv("stage_names", join(s.budget.stages, [](const ChainStage& st) {
       return st.name;
     }));
  kv("stage_transmissions", join(s.budget.stages, [](const ChainStage& st) {
       return fmt(st.transmission);
     }));
  kv("stage_assumed", join(s.budget.stages, [](const ChainStage& st) {
       return std::string(st.assumed ? "1" : "0");
     }));

  out += "\n[etalon]\n";
  kv("model", s.etalon.model);
  kv("center_mhz", fmt(s.etalon.center_mhz));
  kv("fwhm_mhz", fmt(s.etalon.fwhm_mhz));
  kv("fsr_ghz", fmt(s.etalon.fsr_ghz));
  kv("decay_stretch", fmt(s.etalon_decay_stretch));

  out += "\n[cell]\n";
  kv("temperature_c", fmt(s.cell.temperature_c));
  kv("decay_stretch", fmt(s.cell.effective_delay_stretch));

  out += "\n[memory]\n";
  kv("acceptance_fwhm_mhz", fmt(s.memory.acceptance_fwhm_mhz));
  kv("acceptance_center_mhz", fmt(s.memory.acceptance_center_mhz));
  kv("intrinsic_efficiency", fmt(s.memory.intrinsic_efficiency));
  kv("readin_share", fmt(s.memory.readin_share));
  kv("temporal_match", fmt(s.memory.temporal_match));
  kv("dephase_time_1e_ns", fmt(s.memory.dephase_time_1e_ns));
  kv("dephase_exponent", fmt(s.memory.dephase_exponent));
  kv("beat_amplitudes",
     join(s.memory.beat_components,
          [](const BeatComponent& c) { return fmt(c.amplitude); }));
  kv("beat_frequencies_mhz",
     join(s.memory.beat_components,
          [](const BeatComponent& c) { return fmt(c.frequency_mhz); }));
  kv("retrieval_sigma_ns", fmt(s.memory.retrieval_sigma_ns));
  kv("cell_temperature_c", fmt(s.memory.cell_temperature_c));

  out += "\n[detector]\n";
  kv("irf_fwhm_ps", fmt(s.detector.irf_fwhm_ps));
  kv("dark_rate_cps", fmt(s.detector.dark_rate_cps));
  kv("efficiency", fmt(s.detector.efficiency));

  out += "\n[sync]\n";
  kv("laser_rate_mhz", fmt(s.sync.laser_rate_mhz));
  kv("pulse_pick_divisor", fmt(s.sync.pulse_pick_divisor));
  kv("trigger_limit_mhz", fmt(s.sync.trigger_limit_mhz));

  out += "\n[run]\n";
  kv("n_triggers", fmt(s.run.n_triggers));
  kv("seed", fmt(s.run.seed));
  kv("tau_s_list_ns", join(s.run.tau_s_list_ns));
  kv("bin_width_ps", fmt(s.run.bin_width_ps));
  kv("window_ns", fmt(s.run.window_ns));
  kv("background_per_bin", fmt(s.run.background_per_bin));
  kv("hbt_pulses", fmt(s.run.hbt_pulses));
  kv("hbt_photons_per_pulse", fmt(s.run.hbt_photons_per_pulse));
  kv("hbt_span_ns", fmt(s.run.hbt_span_ns));
  kv("hbt_bin_ns", fmt(s.run.hbt_bin_ns));
  kv("fpi_fsr_ghz", fmt(s.run.fpi_fsr_ghz));
  kv("fpi_instrument_fwhm_mhz", fmt(s.run.fpi_instrument_fwhm_mhz));
  kv("fpi_ghz_per_sample", fmt(s.run.fpi_ghz_per_sample));
  kv("fpi_samples", fmt(s.run.fpi_samples));
  kv("fpi_peak_counts", fmt(s.run.fpi_peak_counts));
  return out;
}

Scenario parse_scenario(const std::string& text) {
  Scenario s;
  PendingLists lists;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string t = trim(raw);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3)
        fail(line_no, "malformed section header");
      section = t.substr(1, t.size() - 2);
      if (!known_section(section))
        fail(line_no, "unknown section '" + section + "'");
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key=value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (section.empty()) fail(line_no, "key before any section");
    if (key.empty()) fail(line_no, "empty key");

    bool handled = true;
    if (section == "qd") {
      if (key == "tau_qd_ns")
        s.qd.tau_qd_ns = parse_double(value, line_no);
      else if (key == "hom_fwhm_mhz")
        s.qd.hom_fwhm_mhz = parse_double(value, line_no);
      else if (key == "inhom_fwhm_mhz")
        s.qd.inhom_fwhm_mhz = parse_double(value, line_no);
      else if (key == "center_at_base_mhz")
        s.qd.center_at_base_mhz = parse_double(value, line_no);
      else if (key == "tuning_temperatures_k") {
        lists.tuning_t = parse_list(value, line_no);
        lists.tuning_t_line = line_no;
      } else if (key == "tuning_redshifts_mhz") {
        lists.tuning_r = parse_list(value, line_no);
        lists.tuning_r_line = line_no;
      } else if (key == "fss_uev")
        s.qd.fss_uev = parse_double(value, line_no);
      else if (key == "power_exponent_x")
        s.qd.power_exponent_x = parse_double(value, line_no);
      else if (key == "power_exponent_xx")
        s.qd.power_exponent_xx = parse_double(value, line_no);
      else if (key == "purity_g2")
        s.qd.purity_g2 = parse_double(value, line_no);
      else if (key == "recapture_fraction")
        s.qd.recapture_fraction = parse_double(value, line_no);
      else if (key == "recapture_delay_ns")
        s.qd.recapture_delay_ns = parse_double(value, line_no);
      else if (key == "mean_photons_per_pulse")
        s.qd.mean_photons_per_pulse = parse_double(value, line_no);
      else if (key == "background_rate_mhz")
        s.qd.background_rate_mhz = parse_double(value, line_no);
      else if (key == "temperature_k")
        s.temperature_k = parse_double(value, line_no);
      else
        handled = false;
    } else if (section == "chain") {
      if (key == "input_rate_cps")
        s.budget.input_rate_cps = parse_double(value, line_no);
      else if (key == "stage_names") {
        lists.stage_names = split(value);
        lists.stage_names_line = line_no;
      } else if (key == "stage_transmissions") {
        lists.stage_trans = parse_list(value, line_no);
        lists.stage_trans_line = line_no;
      } else if (key == "stage_assumed") {
        lists.stage_assumed = parse_flags(value, line_no);
        lists.stage_assumed_line = line_no;
      } else
        handled = false;
    } else if (section == "etalon") {
      if (key == "model")
        s.etalon.model = value;
      else if (key == "center_mhz")
        s.etalon.center_mhz = parse_double(value, line_no);
      else if (key == "fwhm_mhz")
        s.etalon.fwhm_mhz = parse_double(value, line_no);
      else if (key == "fsr_ghz")
        s.etalon.fsr_ghz = parse_double(value, line_no);
      else if (key == "decay_stretch")
        s.etalon_decay_stretch = parse_double(value, line_no);
      else
        handled = false;
    } else if (section == "cell") {
      if (key == "temperature_c")
        s.cell.temperature_c = parse_double(value, line_no);
      else if (key == "decay_stretch")
        s.cell.effective_delay_stretch = parse_double(value, line_no);
      else
        handled = false;
    } else if (section == "memory") {
      if (key == "acceptance_fwhm_mhz")
        s.memory.acceptance_fwhm_mhz = parse_double(value, line_no);
      else if (key == "acceptance_center_mhz")
        s.memory.acceptance_center_mhz = parse_double(value, line_no);
      else if (key == "intrinsic_efficiency")
        s.memory.intrinsic_efficiency = parse_double(value, line_no);
      else if (key == "readin_share")
        s.memory.readin_share = parse_double(value, line_no);
      else if (key == "temporal_match")
        s.memory.temporal_match = parse_double(value, line_no);
      else if (key == "dephase_time_1e_ns")
        s.memory.dephase_time_1e_ns = parse_double(value, line_no);
      else if (key == "dephase_exponent")
        s.memory.dephase_exponent = parse_double(value, line_no);
      else if (key == "beat_amplitudes") {
        lists.beat_a = parse_list(value, line_no);
        lists.beat_a_line = line_no;
      } else if (key == "beat_frequencies_mhz") {
        lists.beat_f = parse_list(value, line_no);
        lists.beat_f_line = line_no;
      } else if (key == "retrieval_sigma_ns")
        s.memory.retrieval_sigma_ns = parse_double(value, line_no);
      else if (key == "cell_temperature_c")
        s.memory.cell_temperature_c = parse_double(value, line_no);
      else
        handled = false;
    } else if (section == "detector") {
      if (key == "irf_fwhm_ps")
        s.detector.irf_fwhm_ps = parse_double(value, line_no);
      else if (key == "dark_rate_cps")
        s.detector.dark_rate_cps = parse_double(value, line_no);
      else if (key == "efficiency")
        s.detector.efficiency = parse_double(value, line_no);
      else
        handled = false;
    } else if (section == "sync") {
      if (key == "laser_rate_mhz")
        s.sync.laser_rate_mhz = parse_double(value, line_no);
      else if (key == "pulse_pick_divisor")
        s.sync.pulse_pick_divisor = parse_int(value, line_no);
      else if (key == "trigger_limit_mhz")
        s.sync.trigger_limit_mhz = parse_double(value, line_no);
      else
        handled = false;
    } else if (section == "run") {
      if (key == "n_triggers")
        s.run.n_triggers = parse_u64(value, line_no);
      else if (key == "seed")
        s.run.seed = parse_u64(value, line_no);
      else if (key == "tau_s_list_ns")
        s.run.tau_s_list_ns = parse_list(value, line_no);
      else if (key == "bin_width_ps")
        s.run.bin_width_ps = parse_double(value, line_no);
      else if (key == "window_ns")
        s.run.window_ns = parse_double(value, line_no);
      else if (key == "background_per_bin")
        s.run.background_per_bin = parse_double(value, line_no);
      else if (key == "hbt_pulses")
        s.run.hbt_pulses = parse_u64(value, line_no);
      else if (key == "hbt_photons_per_pulse")
        s.run.hbt_photons_per_pulse = parse_double(value, line_no);
      else if (key == "hbt_span_ns")
        s.run.hbt_span_ns = parse_double(value, line_no);
      else if (key == "hbt_bin_ns")
        s.run.hbt_bin_ns = parse_double(value, line_no);
      else if (key == "fpi_fsr_ghz")
        s.run.fpi_fsr_ghz = parse_double(value, line_no);
      else if (key == "fpi_instrument_fwhm_mhz")
        s.run.fpi_instrument_fwhm_mhz = parse_double(value, line_no);
      else if (key == "fpi_ghz_per_sample")
        s.run.fpi_ghz_per_sample = parse_double(value, line_no);
      else if (key == "fpi_samples")
        s.run.fpi_samples = parse_int(value, line_no);
      else if (key == "fpi_peak_counts")
        s.run.fpi_peak_counts = parse_double(value, line_no);
      else
        handled = false;
    }
    if (!handled)
      fail(line_no, "unknown key '" + key + "' in section [" + section + "]");
  }
  assemble(s, lists);
  return s;
}

}  // namespace qdmem
