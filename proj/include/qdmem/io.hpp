#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdmem/analysis.hpp"
#include "qdmem/detection.hpp"
#include "qdmem/optical_chain.hpp"
#include "qdmem/qd_source.hpp"

namespace qdmem::io {

// CSV with `# key=value` metadata lines, then a column header. All writers
// are deterministic; readers reject malformed rows with file:line context.

std::string histogram_csv(const ArrivalHistogram& h);
ArrivalHistogram parse_histogram_csv(const std::string& text,
                                     const std::string& origin);

std::string events_csv(const std::vector<EmissionEvent>& events);
std::vector<EmissionEvent> parse_events_csv(const std::string& text,
                                            const std::string& origin);

std::string sweep_csv(const std::vector<std::pair<double, double>>& rows);
std::vector<std::pair<double, double>> parse_sweep_csv(
    const std::string& text, const std::string& origin);

std::string rates_csv(const std::vector<StageRate>& rows);

std::string fpi_csv(const FpiScan& scan);
FpiScan parse_fpi_csv(const std::string& text, const std::string& origin);

std::string coincidence_csv(const CoincidenceHistogram& h);
CoincidenceHistogram parse_coincidence_csv(const std::string& text,
                                           const std::string& origin);

// report as JSON; fields that could not be computed carry "not_computed"
std::string report_json(const AnalysisReport& report);
// aligned key/value listing of the same content
std::string report_table(const AnalysisReport& report);

// 8-byte little-endian picosecond records
std::string time_tags_bytes(const std::vector<std::int64_t>& stamps_ps);
std::vector<std::int64_t> parse_time_tags(const std::string& bytes,
                                          const std::string& origin);

std::string read_file(const std::string& path);   // throws on I/O failure
void write_file(const std::string& path, const std::string& content);

std::string fnv1a64_hex(const std::string& content);

}  // namespace qdmem::io
