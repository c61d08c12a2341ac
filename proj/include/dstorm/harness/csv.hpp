#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dstorm/decentralized.hpp"

namespace dstorm::harness {

inline constexpr const char* kCsvHeader = "round,comm_total,oracle_calls_per_node,f_gap,consensus_sq,wallclock_ms";

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
/// Like format_double, but small magnitudes use scientific notation and the
/// exponent carries no padding (3.90625e-4).
std::string format_compact(double v);

void write_csv(const RunRecord& record, std::ostream& out);
/// Throws std::runtime_error naming the path on I/O failure.
void write_csv(const RunRecord& record, const std::string& path);

/// Parses the CSV schema above. u_consensus_sq is not stored and reads as 0.
std::vector<MetricRow> read_csv(std::istream& in, const std::string& source = "<csv>");
std::vector<MetricRow> read_csv(const std::string& path);

}  // namespace dstorm::harness
