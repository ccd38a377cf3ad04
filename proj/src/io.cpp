#include "qdmem/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "qdmem/rng.hpp"

namespace qdmem::io {

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

std::string fmt(std::int64_t v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// integral rates print as plain integers, everything else shortest
std::string fmt_count(double v) {
  if (std::abs(v) < 9e15 && v == std::floor(v))
    return fmt(static_cast<std::int64_t>(v));
  return fmt(v);
}

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& msg) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, const std::string& origin,
                    int line) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(origin, line, "bad number '" + v + "'");
  return out;
}

std::int64_t parse_i64(const std::string& v, const std::string& origin,
                       int line) {
  std::int64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(origin, line, "bad integer '" + v + "'");
  return out;
}

std::vector<std::string> split_comma(const std::string& s) {
  std::vector<std::string> out;
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

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

// drained metadata lines plus the verified column header
struct CsvReader {
  std::istringstream in;
  std::string origin;
  int line_no = 0;
  std::map<std::string, std::string> meta;

  CsvReader(const std::string& text, const std::string& origin_,
            const std::string& expected_header)
      : in(text), origin(origin_) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string t = strip_cr(raw);
      if (t.empty()) continue;
      if (t[0] == '#') {
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
          fail(origin, line_no, "metadata line needs key=value");
        std::string key = t.substr(1, eq - 1);
        while (!key.empty() && key.front() == ' ') key.erase(key.begin());
        meta[key] = t.substr(eq + 1);
        continue;
      }
      if (t != expected_header)
        fail(origin, line_no,
             "expected header '" + expected_header + "', got '" + t + "'");
      return;
    }
    fail(origin, line_no, "missing column header");
  }

  double meta_double(const std::string& key) {
    auto it = meta.find(key);
    if (it == meta.end()) fail(origin, 1, "missing metadata key " + key);
    return parse_double(it->second, origin, 1);
  }

  bool next_row(std::vector<std::string>& fields, std::size_t n_fields) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string t = strip_cr(raw);
      if (t.empty()) continue;
      fields = split_comma(t);
      if (fields.size() != n_fields)
        fail(origin, line_no,
             "expected " + std::to_string(n_fields) + " fields");
      return true;
    }
    return false;
  }
};

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::signal: return "signal";
    case EventKind::recapture: return "recapture";
    default: return "background";
  }
}

}  // namespace

std::string histogram_csv(const ArrivalHistogram& h) {
  std::string out;
  out += "# bin_width_ps=" + fmt(h.bin_width_ps) + "\n";
  out += "# t0_ns=" + fmt(h.t0_ns) + "\n";
  out += "# n_triggers=" + fmt(h.n_triggers) + "\n";
  out += "# background_per_bin=" + fmt(h.background_per_bin) + "\n";
  out += "# tau_s_ns=" + fmt(h.tau_s_ns) + "\n";
  out += "bin_start_ns,counts\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out += fmt(h.t0_ns + static_cast<double>(i) * h.bin_width_ps * 1e-3);
    out += ',';
    out += fmt(h.counts[i]);
    out += '\n';
  }
  return out;
}

ArrivalHistogram parse_histogram_csv(const std::string& text,
                                     const std::string& origin) {
  CsvReader r(text, origin, "bin_start_ns,counts");
  ArrivalHistogram h;
  h.bin_width_ps = r.meta_double("bin_width_ps");
  h.t0_ns = r.meta_double("t0_ns");
  double trig = r.meta_double("n_triggers");
  if (trig < 0) fail(origin, 1, "n_triggers must be >= 0");
  h.n_triggers = static_cast<std::uint64_t>(trig);
  h.background_per_bin = r.meta_double("background_per_bin");
  h.tau_s_ns = r.meta_double("tau_s_ns");
  if (!(h.bin_width_ps > 0.0)) fail(origin, 1, "bin width must be positive");
  std::vector<std::string> f;
  while (r.next_row(f, 2)) {
    std::int64_t c = parse_i64(f[1], origin, r.line_no);
    if (c < 0) fail(origin, r.line_no, "negative count");
    h.counts.push_back(static_cast<std::uint64_t>(c));
  }
  if (h.counts.empty()) fail(origin, r.line_no, "histogram has no bins");
  return h;
}

std::string events_csv(const std::vector<EmissionEvent>& events) {
  std::string out = "pulse_index,timestamp_ns,kind\n";
  for (const auto& e : events) {
    out += fmt(e.pulse_index);
    out += ',';
    out += fmt(e.time_ns);
    out += ',';
    out += kind_name(e.kind);
    out += '\n';
  }
  return out;
}

std::vector<EmissionEvent> parse_events_csv(const std::string& text,
                                            const std::string& origin) {
  CsvReader r(text, origin, "pulse_index,timestamp_ns,kind");
  std::vector<EmissionEvent> out;
  std::vector<std::string> f;
  while (r.next_row(f, 3)) {
    EmissionEvent e;
    std::int64_t idx = parse_i64(f[0], origin, r.line_no);
    if (idx < 0) fail(origin, r.line_no, "negative pulse index");
    e.pulse_index = static_cast<std::uint64_t>(idx);
    e.time_ns = parse_double(f[1], origin, r.line_no);
    if (f[2] == "signal")
      e.kind = EventKind::signal;
    else if (f[2] == "recapture")
      e.kind = EventKind::recapture;
    else if (f[2] == "background")
      e.kind = EventKind::background;
    else
      fail(origin, r.line_no, "unknown event kind '" + f[2] + "'");
    out.push_back(e);
  }
  return out;
}

std::string sweep_csv(const std::vector<std::pair<double, double>>& rows) {
  std::string out = "tau_ns,eta_internal\n";
  for (const auto& [tau, eta] : rows)
    out += fmt(tau) + "," + fmt(eta) + "\n";
  return out;
}

std::vector<std::pair<double, double>> parse_sweep_csv(
    const std::string& text, const std::string& origin) {
  CsvReader r(text, origin, "tau_ns,eta_internal");
  std::vector<std::pair<double, double>> out;
  std::vector<std::string> f;
  while (r.next_row(f, 2))
    out.emplace_back(parse_double(f[0], origin, r.line_no),
                     parse_double(f[1], origin, r.line_no));
  return out;
}

std::string rates_csv(const std::vector<StageRate>& rows) {
  std::string out = "part,transmission,assumed,count_rate\n";
  for (const auto& st : rows) {
    out += st.name;
    out += ',';
    out += fmt(st.transmission);
    out += ',';
    out += st.assumed ? '1' : '0';
    out += ',';
    out += fmt_count(st.rate_cps);
    out += '\n';
  }
  return out;
}

std::string fpi_csv(const FpiScan& scan) {
  std::string out;
  out += "# true_ghz_per_sample=" + fmt(scan.true_ghz_per_sample) + "\n";
  out += "sample,counts\n";
  for (std::size_t i = 0; i < scan.sample.size(); ++i)
    out += fmt(scan.sample[i]) + "," + fmt_count(scan.intensity[i]) + "\n";
  return out;
}

FpiScan parse_fpi_csv(const std::string& text, const std::string& origin) {
  CsvReader r(text, origin, "sample,counts");
  FpiScan scan;
  scan.true_ghz_per_sample = r.meta_double("true_ghz_per_sample");
  std::vector<std::string> f;
  while (r.next_row(f, 2)) {
    scan.sample.push_back(parse_double(f[0], origin, r.line_no));
    double c = parse_double(f[1], origin, r.line_no);
    if (c < 0) fail(origin, r.line_no, "negative count");
    scan.intensity.push_back(c);
  }
  if (scan.sample.empty()) fail(origin, r.line_no, "scan has no samples");
  return scan;
}

std::string coincidence_csv(const CoincidenceHistogram& h) {
  std::string out;
  out += "# bin_width_ns=" + fmt(h.bin_width_ns) + "\n";
  out += "# span_ns=" + fmt(h.span_ns) + "\n";
  out += "# rep_period_ns=" + fmt(h.rep_period_ns) + "\n";
  out += "# n_pulses=" + fmt(h.n_pulses) + "\n";
  out += "delay_ns,counts\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out += fmt(-h.span_ns + static_cast<double>(i) * h.bin_width_ns);
    out += ',';
    out += fmt(h.counts[i]);
    out += '\n';
  }
  return out;
}

CoincidenceHistogram parse_coincidence_csv(const std::string& text,
                                           const std::string& origin) {
  CsvReader r(text, origin, "delay_ns,counts");
  CoincidenceHistogram h;
  h.bin_width_ns = r.meta_double("bin_width_ns");
  h.span_ns = r.meta_double("span_ns");
  h.rep_period_ns = r.meta_double("rep_period_ns");
  double pulses = r.meta_double("n_pulses");
  if (pulses < 0) fail(origin, 1, "n_pulses must be >= 0");
  h.n_pulses = static_cast<std::uint64_t>(pulses);
  std::vector<std::string> f;
  while (r.next_row(f, 2)) {
    std::int64_t c = parse_i64(f[1], origin, r.line_no);
    if (c < 0) fail(origin, r.line_no, "negative count");
    h.counts.push_back(static_cast<std::uint64_t>(c));
  }
  if (h.counts.empty()) fail(origin, r.line_no, "histogram has no bins");
  return h;
}

namespace {

void append_json_field(std::string& out, const char* key,
                       const std::optional<ValueSigma>& v, bool& first) {
  if (!first) out += ",\n";
  first = false;
  out += "  \"";
  out += key;
  out += "\": ";
  if (v)
    out += "{\"value\": " + fmt(v->value) + ", \"sigma\": " + fmt(v->sigma) +
           "}";
  else
    out += "\"not_computed\"";
}

void append_table_row(std::string& out, const char* key,
                      const std::optional<ValueSigma>& v) {
  std::string label(key);
  label.resize(12, ' ');
  out += label;
  if (v)
    out += fmt(v->value) + " +- " + fmt(v->sigma);
  else
    out += "not computed";
  out += '\n';
}

}  // namespace

std::string report_json(const AnalysisReport& r) {
  std::string out = "{\n";
  out += "  \"tau_s_ns\": " + fmt(r.tau_s_ns);
  bool first = false;
  append_json_field(out, "n_input", r.n_input, first);
  append_json_field(out, "n_ret", r.n_ret, first);
  append_json_field(out, "eta_e2e", r.eta_e2e, first);
  append_json_field(out, "eta_int", r.eta_int, first);
  append_json_field(out, "t_chain", r.t_chain, first);
  append_json_field(out, "g2_zero", r.g2_zero, first);
  append_json_field(out, "tau_fit_ns", r.tau_fit, first);
  append_json_field(out, "leak_tau_ns", r.leak_tau, first);
  append_json_field(out, "fwhm_ghz", r.fwhm_ghz, first);
  append_json_field(out, "tbp", r.tbp, first);
  out += "\n}\n";
  return out;
}

std::string report_table(const AnalysisReport& r) {
  std::string out;
  out += "tau_s_ns    " + fmt(r.tau_s_ns) + "\n";
  append_table_row(out, "n_input", r.n_input);
  append_table_row(out, "n_ret", r.n_ret);
  append_table_row(out, "eta_e2e", r.eta_e2e);
  append_table_row(out, "eta_int", r.eta_int);
  append_table_row(out, "t_chain", r.t_chain);
  append_table_row(out, "g2_zero", r.g2_zero);
  append_table_row(out, "tau_fit_ns", r.tau_fit);
  append_table_row(out, "leak_tau_ns", r.leak_tau);
  append_table_row(out, "fwhm_ghz", r.fwhm_ghz);
  append_table_row(out, "tbp", r.tbp);
  return out;
}

std::string time_tags_bytes(const std::vector<std::int64_t>& stamps_ps) {
  std::string out;
  out.reserve(stamps_ps.size() * 8);
  for (std::int64_t v : stamps_ps) {
    auto u = static_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i)
      out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
  }
  return out;
}

std::vector<std::int64_t> parse_time_tags(const std::string& bytes,
                                          const std::string& origin) {
  if (bytes.size() % 8 != 0)
    throw std::runtime_error(origin + ": size " +
                             std::to_string(bytes.size()) +
                             " is not a multiple of 8");
  std::vector<std::int64_t> out;
  out.reserve(bytes.size() / 8);
  for (std::size_t i = 0; i < bytes.size(); i += 8) {
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b)
      u |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(bytes[i + b]))
           << (8 * b);
    out.push_back(static_cast<std::int64_t>(u));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read failed for " + path);
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create " + path);
  out.write(content.data(),
            static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string fnv1a64_hex(const std::string& content) {
  std::uint64_t h = fnv1a64(std::string_view(content));
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf, 16);
}

}  // namespace qdmem::io
