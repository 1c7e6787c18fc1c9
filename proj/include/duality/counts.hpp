#pragma once

// Coincidence-count records, correlation estimates with multinomial error
// bars, and the canonical CSV formats.
//
// Counts CSV: header `theta1_rad,theta2_rad,phi_rad,n_pp,n_pm,n_mp,n_mm`,
// angles in decimal radians, '#' comment lines and blank lines ignored.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "duality/circuit.hpp"
#include "duality/hv.hpp"

namespace duality {

struct CoincidenceRecord {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double phi = 0.0;
  std::int64_t n_pp = 0;
  std::int64_t n_pm = 0;
  std::int64_t n_mp = 0;
  std::int64_t n_mm = 0;

  std::int64_t total() const { return n_pp + n_pm + n_mp + n_mm; }
  bool operator==(const CoincidenceRecord&) const = default;
};

/// Malformed input; `line()` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// The file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCountsHeader = "theta1_rad,theta2_rad,phi_rad,n_pp,n_pm,n_mp,n_mm";
inline constexpr const char* kSettingsHeader = "theta2_rad,phi_rad";

std::vector<CoincidenceRecord> parse_counts(std::istream& in);
std::vector<CoincidenceRecord> ingest_counts(const std::filesystem::path& path);
/// Angles are written with 17 significant digits so that parsing the output
/// returns identical records.
void write_counts(std::ostream& out, const std::vector<CoincidenceRecord>& records);

/// Settings CSV with header `theta2_rad,phi_rad`; angle cells accept the
/// parse_angle forms.
hv::SettingsList parse_settings(std::istream& in);
hv::SettingsList ingest_settings(const std::filesystem::path& path);
void write_settings(std::ostream& out, const hv::SettingsList& settings);

/// Writes `contents` to a temporary sibling of `path` and renames it over
/// `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

struct CorrelationResult {
  double E = 0.0;
  double sigma = 0.0;
  std::int64_t total = 0;
};

/// E = (n_pp - n_pm - n_mp + n_mm) / total, sigma = sqrt((1 - E^2) / total).
/// Throws std::invalid_argument when the total is zero.
CorrelationResult correlation_with_error(const CoincidenceRecord& record);

struct ChshEstimate {
  double S = 0.0;
  double sigma = 0.0;
  /// Settings in ascending order: theta1 = (a, a'), theta2 = (b, b').
  std::array<double, 2> theta1{};
  std::array<double, 2> theta2{};
  /// E(a,b), E(a,b'), E(a',b), E(a',b').
  std::array<CorrelationResult, 4> terms{};
};

/// S = |E(a,b) + E(a,b') - E(a',b) + E(a',b')| with settings sorted
/// ascending; sigma adds the four sigmas in quadrature. Throws
/// std::invalid_argument unless the records cover the four combinations of
/// two theta1 and two theta2 values exactly once at a common phi.
ChshEstimate chsh_from_records(const std::vector<CoincidenceRecord>& records);

/// Records with counts drawn from the model at each setting, seeded per
/// record by derive_stream_seed(seed, index).
std::vector<CoincidenceRecord> simulate_records(const std::vector<CoincidenceRecord>& settings_and_totals,
                                                const NoiseParams& noise, std::uint64_t seed);

struct VisibilityFit {
  double visibility = 0.0;
  double sigma = 0.0;
};

/// Weighted least squares for measured ~ V * ideal with weights 1/sigma^2.
VisibilityFit fit_visibility(const std::vector<double>& measured, const std::vector<double>& ideal,
                             const std::vector<double>& sigma);

}  // namespace duality
