#include "dstorm/harness/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dstorm::harness {

namespace {

std::string chars(double v, std::chars_format fmt, bool use_fmt) {
  std::array<char, 64> buf{};
  auto res = use_fmt ? std::to_chars(buf.data(), buf.data() + buf.size(), v, fmt)
                     : std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

// "3.90625e-04" -> "3.90625e-4"
std::string trim_exponent(std::string s) {
  const auto e = s.find('e');
  if (e == std::string::npos) return s;
  std::size_t p = e + 1;
  if (p < s.size() && (s[p] == '-' || s[p] == '+')) {
    if (s[p] == '+') {
      s.erase(p, 1);
    } else {
      ++p;
    }
  }
  while (p + 1 < s.size() && s[p] == '0') s.erase(p, 1);
  return s;
}

}  // namespace

std::string format_double(double v) { return chars(v, std::chars_format::general, false); }

std::string format_compact(double v) {
  if (v != 0.0 && std::isfinite(v) && std::abs(v) < 1e-3) {
    return trim_exponent(chars(v, std::chars_format::scientific, true));
  }
  return trim_exponent(format_double(v));
}

void write_csv(const RunRecord& rec, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : rec.rows) {
    out << r.round << ',' << r.comm_total << ',' << r.oracle_calls_per_node << ',';
    if (r.f_gap) out << format_double(*r.f_gap);
    out << ',' << format_double(r.consensus_sq) << ',' << format_double(r.wallclock_ms) << '\n';
  }
}

void write_csv(const RunRecord& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(rec, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

namespace {

template <class T>
T parse_field(const std::string& tok, const std::string& where) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw std::invalid_argument(where + ": bad field '" + tok + "'");
  return v;
}

}  // namespace

std::vector<MetricRow> read_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::invalid_argument(source + ": unexpected header '" + line + "'");
  std::vector<MetricRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw std::invalid_argument(where + ": expected 6 fields");
    MetricRow r;
    r.round = parse_field<long>(f[0], where);
    r.comm_total = parse_field<long>(f[1], where);
    r.oracle_calls_per_node = parse_field<long>(f[2], where);
    if (!f[3].empty()) r.f_gap = parse_field<double>(f[3], where);
    r.consensus_sq = parse_field<double>(f[4], where);
    r.wallclock_ms = parse_field<double>(f[5], where);
    rows.push_back(r);
  }
  return rows;
}

std::vector<MetricRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in, path);
}

}  // namespace dstorm::harness
