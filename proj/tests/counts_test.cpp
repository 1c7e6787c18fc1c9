#include "duality/counts.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "duality/angles.hpp"

using namespace duality;

namespace {

const std::filesystem::path kTable = std::filesystem::path(DUALITY_DATA_DIR) / "chsh_counts.csv";

std::vector<CoincidenceRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_counts(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

double e_of(std::int64_t pp, std::int64_t pm, std::int64_t mp, std::int64_t mm) {
  return static_cast<double>(pp - pm - mp + mm) / static_cast<double>(pp + pm + mp + mm);
}

}  // namespace

TEST(Angles, ParsesExpressions) {
  EXPECT_DOUBLE_EQ(parse_angle("pi/8"), kPi / 8);
  EXPECT_DOUBLE_EQ(parse_angle(" 3pi/2 "), 3 * kPi / 2);
  EXPECT_DOUBLE_EQ(parse_angle("3*pi/8"), 3 * kPi / 8);
  EXPECT_DOUBLE_EQ(parse_angle("-pi/4"), -kPi / 4);
  EXPECT_DOUBLE_EQ(parse_angle("pi"), kPi);
  EXPECT_DOUBLE_EQ(parse_angle("0.25"), 0.25);
  EXPECT_DOUBLE_EQ(parse_angle("-1e-3"), -1e-3);
  for (const char* bad : {"", "pi/", "pi/0", "2pi3", "abc", "1/", "nan", "inf"}) {
    EXPECT_THROW(parse_angle(bad), std::invalid_argument) << bad;
  }
}

TEST(Angles, ParsesGrid) {
  EXPECT_EQ(parse_grid("9x9"), (std::pair<int, int>{9, 9}));
  EXPECT_EQ(parse_grid("3x17"), (std::pair<int, int>{3, 17}));
  for (const char* bad : {"9", "0x9", "x9", "9x", "9x9x9", "-3x4"}) {
    EXPECT_THROW(parse_grid(bad), std::invalid_argument) << bad;
  }
}

TEST(Parse, TableFile) {
  const auto r = ingest_counts(kTable);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(r[0].n_pp, 577);
  EXPECT_EQ(r[0].n_mm, 542);
  EXPECT_EQ(r[3].n_pm, 2524);
  EXPECT_DOUBLE_EQ(r[2].theta1, kPi / 4);
  EXPECT_DOUBLE_EQ(r[1].theta2, 3 * kPi / 8);
  EXPECT_DOUBLE_EQ(r[0].phi, 3 * kPi / 2);
  EXPECT_EQ(r[0].total(), 5585);
  EXPECT_EQ(r[1].total(), 5747);
  EXPECT_EQ(r[2].total(), 5461);
  EXPECT_EQ(r[3].total(), 5741);
}

TEST(Parse, TableCorrelations) {
  const auto r = ingest_counts(kTable);
  const double printed[] = {-0.5993, -0.5330, 0.5056, -0.5450};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto c = correlation_with_error(r[i]);
    EXPECT_NEAR(c.E, e_of(r[i].n_pp, r[i].n_pm, r[i].n_mp, r[i].n_mm), 1e-15);
    EXPECT_NEAR(c.E, printed[i], 5e-5) << i;
    EXPECT_NEAR(c.sigma, std::sqrt((1 - c.E * c.E) / r[i].total()), 1e-15);
  }
}

TEST(Parse, EmptyAndCommentOnlyInputs) {
  EXPECT_TRUE(parse("").empty());
  EXPECT_TRUE(parse("# nothing\n\n").empty());
  EXPECT_TRUE(parse(std::string(kCountsHeader) + "\n").empty());
}

TEST(Parse, ToleratesWhitespaceAndCrlf) {
  const auto r = parse(std::string(kCountsHeader) + "\r\n 0 , 0.5 ,1, 1,2,3,4 \r\n\r\n");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].n_mm, 4);
  EXPECT_DOUBLE_EQ(r[0].theta2, 0.5);
}

TEST(Parse, ReportsLineNumbers) {
  const std::string h = std::string(kCountsHeader) + "\n";
  EXPECT_EQ(error_line("bad,header\n"), 1u);
  EXPECT_EQ(error_line("# c\n" + h + "0,0,0,1,2,3\n"), 3u);
  EXPECT_EQ(error_line(h + "0,0,0,1,2,3,4\n0,0,x,1,2,3,4\n"), 3u);
  EXPECT_EQ(error_line(h + "\n0,0,0,1,-2,3,4\n"), 3u);
  EXPECT_EQ(error_line(h + "0,0,0,1,2.5,3,4\n"), 2u);
  EXPECT_EQ(error_line(h + "0,0,0,1,2,3,99999999999999999999\n"), 2u);
}

TEST(Io, MissingFile) {
  EXPECT_THROW(ingest_counts("/nonexistent/counts.csv"), IoError);
}

// Property: writing and re-reading returns identical records.
TEST(Properties, CountsRoundTrip) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ang(-7, 7);
  std::uniform_int_distribution<std::int64_t> cnt(0, 1'000'000'000'000);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CoincidenceRecord> r(1 + trial % 5);
    for (auto& x : r) x = {ang(rng), ang(rng), ang(rng), cnt(rng), cnt(rng), cnt(rng), cnt(rng)};
    std::ostringstream out;
    write_counts(out, r);
    EXPECT_EQ(parse(out.str()), r);
  }
}

TEST(Properties, SettingsRoundTrip) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> ang(-7, 7);
  hv::SettingsList s;
  for (int i = 0; i < 10; ++i) s.push_back({ang(rng), ang(rng)});
  std::ostringstream out;
  write_settings(out, s);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_settings(in), s);
}

TEST(Settings, AcceptsAngleExpressions) {
  std::istringstream in("theta2_rad,phi_rad\npi/8,3pi/2\n0,pi/2\n");
  const auto s = parse_settings(in);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s[0].theta2, kPi / 8);
  EXPECT_DOUBLE_EQ(s[1].phi, kPi / 2);
  std::istringstream bad("theta2_rad,phi_rad\npi/8,pie\n");
  EXPECT_THROW(parse_settings(bad), ParseError);
}

TEST(Io, AtomicWriteReplacesFile) {
  const auto dir = std::filesystem::temp_directory_path() / "duality_counts_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.csv";
  write_file_atomic(path, "first\n");
  write_file_atomic(path, "second\n");
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(text, "second\n");
  EXPECT_FALSE(std::filesystem::exists(dir / "out.csv.tmp"));
  EXPECT_THROW(write_file_atomic(dir / "missing" / "x.csv", "x"), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Correlation, ZeroTotalThrows) {
  EXPECT_THROW(correlation_with_error(CoincidenceRecord{}), std::invalid_argument);
}

TEST(Chsh, TableValue) {
  const auto est = chsh_from_records(ingest_counts(kTable));
  EXPECT_NEAR(est.S, 2.1829, 5e-5);
  const double s = std::abs(e_of(577, 2164, 2302, 542) + e_of(454, 2521, 1884, 888) -
                            e_of(2162, 658, 692, 1949) + e_of(402, 2524, 1911, 904));
  EXPECT_NEAR(est.S, s, 1e-14);
  double var = 0;
  for (const auto& t : est.terms) var += t.sigma * t.sigma;
  EXPECT_NEAR(est.sigma, std::sqrt(var), 1e-15);
  EXPECT_GT(est.sigma, 0.01);
  EXPECT_LT(est.sigma, 0.03);
  EXPECT_DOUBLE_EQ(est.theta2[0], kPi / 8);
}

TEST(Chsh, OrderIndependentAndUniformErrors) {
  auto r = ingest_counts(kTable);
  std::reverse(r.begin(), r.end());
  EXPECT_NEAR(chsh_from_records(r).S, 2.1829, 5e-5);
  for (auto& x : r) x.n_pp = x.n_pm = x.n_mp = x.n_mm = 250;
  const auto u = chsh_from_records(r);
  EXPECT_NEAR(u.S, 0.0, 1e-15);
  EXPECT_NEAR(u.sigma, 2.0 / std::sqrt(1000.0), 1e-15);
}

TEST(Chsh, RejectsBadMultiplicities) {
  auto r = ingest_counts(kTable);
  auto dup = r;
  dup[3] = dup[2];
  EXPECT_THROW(chsh_from_records(dup), std::invalid_argument);
  auto three = r;
  three.pop_back();
  EXPECT_THROW(chsh_from_records(three), std::invalid_argument);
  auto mixed = r;
  mixed[1].phi = 0.0;
  EXPECT_THROW(chsh_from_records(mixed), std::invalid_argument);
  auto third = r;
  third[3].theta2 = 0.1;
  EXPECT_THROW(chsh_from_records(third), std::invalid_argument);
}

TEST(Simulate, DeterministicAndTotalsPreserved) {
  const auto r = ingest_counts(kTable);
  const NoiseParams n{0.772, 0.0};
  const auto a = simulate_records(r, n, 5);
  EXPECT_EQ(a, simulate_records(r, n, 5));
  EXPECT_NE(a, simulate_records(r, n, 6));
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_EQ(a[i].total(), r[i].total());
    EXPECT_EQ(a[i].theta2, r[i].theta2);
  }
}

TEST(Visibility, RecoversScale) {
  std::vector<double> ideal, measured, sigma;
  for (int i = 0; i < 20; ++i) {
    ideal.push_back(std::cos(0.3 * i));
    measured.push_back(0.8 * ideal.back());
    sigma.push_back(0.01 + 0.001 * i);
  }
  const auto f = fit_visibility(measured, ideal, sigma);
  EXPECT_NEAR(f.visibility, 0.8, 1e-14);
  double den = 0;
  for (int i = 0; i < 20; ++i) den += ideal[i] * ideal[i] / (sigma[i] * sigma[i]);
  EXPECT_NEAR(f.sigma, 1 / std::sqrt(den), 1e-15);
  EXPECT_THROW(fit_visibility({}, {}, {}), std::invalid_argument);
  EXPECT_THROW(fit_visibility({1}, {1}, {0}), std::invalid_argument);
  EXPECT_THROW(fit_visibility({1}, {0}, {1}), std::invalid_argument);
}
