#include "duality/counts.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "duality/angles.hpp"

namespace duality {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

// Calls `row(line_number, cells)` for every data line after checking the
// header. Blank and '#' lines are skipped; an empty input has no header.
template <class Row>
void read_csv(std::istream& in, std::string_view header, std::size_t columns, Row row) {
  std::string line;
  std::size_t number = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split(t);
    if (!seen_header) {
      std::string joined;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) joined += ',';
        joined += cells[i];
      }
      if (joined != header) {
        throw ParseError(number, "expected header '" + std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    if (cells.size() != columns) {
      throw ParseError(number, "expected " + std::to_string(columns) + " columns, found " +
                                   std::to_string(cells.size()));
    }
    row(number, cells);
  }
  if (in.bad()) throw IoError("read failed");
}

double parse_decimal(std::size_t line, std::string_view cell, const char* what) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (cell.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(cell) + "'");
  }
  return v;
}

std::int64_t parse_count(std::size_t line, std::string_view cell, const char* what) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw ParseError(line, std::string("invalid count ") + what + " '" + std::string(cell) + "'");
  }
  if (v < 0) throw ParseError(line, std::string("negative count ") + what);
  return v;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

bool same_angle(double a, double b) { return std::abs(a - b) <= 1e-9; }

}  // namespace

std::vector<CoincidenceRecord> parse_counts(std::istream& in) {
  std::vector<CoincidenceRecord> out;
  read_csv(in, kCountsHeader, 7, [&](std::size_t line, const std::vector<std::string_view>& c) {
    CoincidenceRecord r;
    r.theta1 = parse_decimal(line, c[0], "theta1_rad");
    r.theta2 = parse_decimal(line, c[1], "theta2_rad");
    r.phi = parse_decimal(line, c[2], "phi_rad");
    r.n_pp = parse_count(line, c[3], "n_pp");
    r.n_pm = parse_count(line, c[4], "n_pm");
    r.n_mp = parse_count(line, c[5], "n_mp");
    r.n_mm = parse_count(line, c[6], "n_mm");
    out.push_back(r);
  });
  return out;
}

std::vector<CoincidenceRecord> ingest_counts(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_counts(in);
}

void write_counts(std::ostream& out, const std::vector<CoincidenceRecord>& records) {
  out << kCountsHeader << '\n';
  for (const auto& r : records) {
    out << format_g17(r.theta1) << ',' << format_g17(r.theta2) << ',' << format_g17(r.phi) << ','
        << r.n_pp << ',' << r.n_pm << ',' << r.n_mp << ',' << r.n_mm << '\n';
  }
}

hv::SettingsList parse_settings(std::istream& in) {
  hv::SettingsList out;
  read_csv(in, kSettingsHeader, 2, [&](std::size_t line, const std::vector<std::string_view>& c) {
    hv::Setting s;
    try {
      s.theta2 = parse_angle(c[0]);
      s.phi = parse_angle(c[1]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line, e.what());
    }
    out.push_back(s);
  });
  return out;
}

hv::SettingsList ingest_settings(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_settings(in);
}

void write_settings(std::ostream& out, const hv::SettingsList& settings) {
  out << kSettingsHeader << '\n';
  for (const auto& s : settings) out << format_g17(s.theta2) << ',' << format_g17(s.phi) << '\n';
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot replace '" + path.string() + "'");
  }
}

CorrelationResult correlation_with_error(const CoincidenceRecord& r) {
  const std::int64_t total = r.total();
  if (total < 1) throw std::invalid_argument("correlation needs at least one coincidence");
  const double e = static_cast<double>(r.n_pp - r.n_pm - r.n_mp + r.n_mm) / static_cast<double>(total);
  const double sigma = std::sqrt(std::max(0.0, 1.0 - e * e) / static_cast<double>(total));
  return {e, sigma, total};
}

ChshEstimate chsh_from_records(const std::vector<CoincidenceRecord>& records) {
  if (records.size() != 4) throw std::invalid_argument("CHSH needs exactly four records");
  auto distinct = [&](auto member) {
    std::vector<double> v;
    for (const auto& r : records) {
      const double x = r.*member;
      if (std::none_of(v.begin(), v.end(), [&](double y) { return same_angle(x, y); })) v.push_back(x);
    }
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto t1 = distinct(&CoincidenceRecord::theta1);
  const auto t2 = distinct(&CoincidenceRecord::theta2);
  if (t1.size() != 2 || t2.size() != 2) {
    throw std::invalid_argument("CHSH needs two theta1 and two theta2 values");
  }
  for (const auto& r : records) {
    if (!same_angle(r.phi, records.front().phi)) {
      throw std::invalid_argument("CHSH records must share one phi");
    }
  }
  ChshEstimate est;
  est.theta1 = {t1[0], t1[1]};
  est.theta2 = {t2[0], t2[1]};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      int found = 0;
      for (const auto& r : records) {
        if (same_angle(r.theta1, t1[i]) && same_angle(r.theta2, t2[j])) {
          est.terms[2 * i + j] = correlation_with_error(r);
          ++found;
        }
      }
      if (found != 1) throw std::invalid_argument("each setting combination must appear once");
    }
  }
  const auto& e = est.terms;
  est.S = std::abs(e[0].E + e[1].E - e[2].E + e[3].E);
  double var = 0.0;
  for (const auto& t : e) var += t.sigma * t.sigma;
  est.sigma = std::sqrt(var);
  return est;
}

std::vector<CoincidenceRecord> simulate_records(const std::vector<CoincidenceRecord>& settings_and_totals,
                                                const NoiseParams& noise, std::uint64_t seed) {
  std::vector<CoincidenceRecord> out;
  out.reserve(settings_and_totals.size());
  for (std::size_t i = 0; i < settings_and_totals.size(); ++i) {
    const auto& r = settings_and_totals[i];
    const OutcomeDistribution d = coincidence_probabilities(
        {.phi = r.phi, .theta1 = r.theta1, .theta2 = r.theta2, .noise = noise});
    const OutcomeCounts c = sample_counts(d, r.total(), derive_stream_seed(seed, i));
    out.push_back({r.theta1, r.theta2, r.phi, c.pp, c.pm, c.mp, c.mm});
  }
  return out;
}

VisibilityFit fit_visibility(const std::vector<double>& measured, const std::vector<double>& ideal,
                             const std::vector<double>& sigma) {
  if (measured.empty() || measured.size() != ideal.size() || measured.size() != sigma.size()) {
    throw std::invalid_argument("visibility fit needs equal-length nonempty inputs");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw std::invalid_argument("visibility fit needs positive sigmas");
    const double w = 1.0 / (sigma[i] * sigma[i]);
    num += w * measured[i] * ideal[i];
    den += w * ideal[i] * ideal[i];
  }
  if (!(den > 0.0)) throw std::invalid_argument("ideal curve is identically zero");
  return {num / den, std::sqrt(1.0 / den)};
}

}  // namespace duality
