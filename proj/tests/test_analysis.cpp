#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mir/analysis.hpp"
#include "support.hpp"

using namespace mir;
namespace ts = testing_support;

namespace {
std::string column_text(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (double x : v) os << x << '\n';
  return os.str();
}
}  // namespace

TEST(Ingest, SingleColumn) {
  std::istringstream is(column_text(ts::gaussian(100, 1)));
  EXPECT_EQ(ingest(is).size(), 100u);
}

TEST(Ingest, NamedAndNumberedColumns) {
  std::ostringstream os;
  os << "date,close,volume\n";
  for (int t = 0; t < 60; ++t) os << "2020-01-" << t << "," << 100 + t << "," << 5 * t << "\n";
  std::istringstream a(os.str()), b(os.str()), c(os.str());
  const auto close = ingest(a, "close");
  EXPECT_EQ(close.size(), 60u);
  EXPECT_EQ(close[3], 103.0);
  EXPECT_EQ(ingest(b, "3")[3], 15.0);
  EXPECT_THROW(ingest(c, "price"), Error);
}

TEST(Ingest, ErrorCitesLine) {
  std::string text = column_text(ts::gaussian(6, 2)) + "abc\n" + column_text(ts::gaussian(60, 3));
  std::istringstream is(text);
  try {
    ingest(is, "", "prices.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::parse);
    EXPECT_NE(std::string(e.what()).find("prices.csv:7:"), std::string::npos) << e.what();
  }
}

TEST(Ingest, OtherErrors) {
  std::istringstream shortin(column_text(ts::gaussian(49, 1)));
  try {
    ingest(shortin);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::too_short);
  }
  std::istringstream blank(column_text(ts::gaussian(10, 1)) + "\n" + column_text(ts::gaussian(60, 1)));
  EXPECT_THROW(ingest(blank), Error);
  std::istringstream wide("1,2\n3,4\n");
  EXPECT_THROW(ingest(wide), Error);
  EXPECT_THROW(ingest("/nonexistent/file.csv"), Error);
}

TEST(Transforms, ConstantPricesGiveZeroReturns) {
  for (double r : log_returns(std::vector<double>(20, 42.0))) EXPECT_EQ(r, 0.0);
  EXPECT_THROW(log_returns({1.0, -2.0}), Error);
}

TEST(Transforms, PowerSpecialCases) {
  const auto r = ts::gaussian(500, 4);
  EXPECT_EQ(power_abs(r, 2.0), apply_transform(r, parse_transform("square")));
  EXPECT_EQ(apply_transform(r, parse_transform("power(2)")), apply_transform(r, parse_transform("square")));
  EXPECT_EQ(apply_transform(r, parse_transform("power(1)")), apply_transform(r, parse_transform("abs")));
  for (size_t t = 0; t < r.size(); ++t) EXPECT_EQ(power_abs(r, 1.0)[t], std::abs(r[t]));
}

TEST(Transforms, Parsing) {
  EXPECT_EQ(parse_transform("returns").label(), "r");
  EXPECT_EQ(parse_transform(" abs ").label(), "|r|");
  EXPECT_EQ(parse_transform("power(0.5)").label(), "|r|^0.5");
  EXPECT_EQ(parse_transform("power-search").kind, TransformKind::power_search);
  EXPECT_THROW(parse_transform("power(4)"), Error);
  EXPECT_THROW(parse_transform("log"), Error);
}

TEST(ThetaSearch, DefaultGrid) {
  const auto g = default_theta_grid();
  ASSERT_EQ(g.size(), 60u);
  EXPECT_DOUBLE_EQ(g.front(), 0.05);
  EXPECT_DOUBLE_EQ(g.back(), 3.0);
  for (size_t k = 1; k < g.size(); ++k) EXPECT_NEAR(g[k] - g[k - 1], 0.05, 1e-12);
}

TEST(ThetaSearch, WhiteNoiseBand) {
  const auto r = ts::gaussian(5000, 5);
  const auto s = theta_search(r);
  EXPECT_GT(s.theta_hat, 0.0);
  EXPECT_LE(s.theta_hat, 3.0);
  ASSERT_EQ(s.profile.size(), 60u);
  for (const auto& pt : s.profile) {
    ASSERT_TRUE(pt.ok) << pt.theta;
    EXPECT_LT(std::abs(pt.d), 3.0 * pt.se) << "theta = " << pt.theta;
  }
}

TEST(ThetaSearch, ScaleInvariance) {
  const auto r = simulate(SpectralModel::arfima(0.2), 3000, 6).values;
  std::vector<double> c(r.size());
  for (size_t t = 0; t < r.size(); ++t) c[t] = 2.5 * r[t];
  const auto a = theta_search(r), b = theta_search(c);
  EXPECT_EQ(a.theta_hat, b.theta_hat);
  EXPECT_NEAR(a.d_hat, b.d_hat, 1e-9);
}

TEST(ThetaSearch, Errors) {
  EXPECT_THROW(theta_search(ts::gaussian(500, 1), {}), Error);
  EXPECT_THROW(theta_search(ts::gaussian(500, 1), {3.5}), Error);
}

TEST(Segments, Bounds) {
  const auto b = segment_bounds(5000, {1, 2500, 5000});
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].first, 1u);
  EXPECT_EQ(b[0].second, 2499u);
  EXPECT_EQ(b[1].first, 2500u);
  EXPECT_EQ(b[1].second, 5000u);
  EXPECT_EQ(segment_bounds(100, {}).size(), 1u);
  EXPECT_THROW(segment_bounds(100, {200}), Error);
}

TEST(Analyze, WhiteNoiseReturns) {
  AnalysisConfig cfg;
  cfg.prices = false;
  const auto rep = analyze(cfg, SeriesSample(ts::gaussian(5000, 7)));
  ASSERT_EQ(rep.rows.size(), 1u);
  const auto& row = rep.rows[0];
  EXPECT_FALSE(row.reject_S);
  EXPECT_TRUE(row.reject_T);
  EXPECT_LT(std::abs(row.d), 3.0 * row.se);
  EXPECT_NEAR(row.kurtosis, 3.0, 0.3);
  EXPECT_NEAR(row.skewness, 0.0, 0.2);
}

TEST(Analyze, SegmentsPerTransform) {
  AnalysisConfig cfg;
  cfg.prices = false;
  cfg.transforms = {parse_transform("returns"), parse_transform("abs")};
  cfg.breakpoints = {1, 2500, 5000};
  const auto rep = analyze(cfg, SeriesSample(ts::gaussian(5000, 8)));
  EXPECT_EQ(rep.segments, 2u);
  EXPECT_EQ(rep.rows.size(), 4u);
  const auto md = analysis_markdown(rep);
  size_t blocks = 0;
  for (size_t at = md.find("### segment"); at != std::string::npos; at = md.find("### segment", at + 1)) ++blocks;
  EXPECT_EQ(blocks, 2u);
  const auto csv = analysis_csv(rep);
  EXPECT_EQ(static_cast<size_t>(std::count(csv.begin(), csv.end(), '\n')), 5u);
}

TEST(Analyze, LongMemoryProxy) {
  AnalysisConfig cfg;
  cfg.prices = false;
  cfg.d0 = 0.0;
  const auto rep = analyze(cfg, simulate(SpectralModel::arfima(0.3), 5000, 9));
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_FALSE(rep.rows[0].reject_S);
  ASSERT_TRUE(rep.rows[0].reject_threshold.has_value());
  EXPECT_TRUE(*rep.rows[0].reject_threshold);
}

TEST(Analyze, PricesAndPowerSearch) {
  const auto r = ts::gaussian(3000, 10);
  std::vector<double> prices{100.0};
  for (double v : r) prices.push_back(prices.back() * std::exp(0.01 * v));
  AnalysisConfig cfg;
  cfg.transforms = {parse_transform("power-search")};
  cfg.theta_grid = {0.5, 1.0, 2.0};
  const auto rep = analyze(cfg, SeriesSample(prices));
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].n, 3000u);
  EXPECT_TRUE(rep.rows[0].theta == 0.5 || rep.rows[0].theta == 1.0 || rep.rows[0].theta == 2.0);
}

TEST(Analyze, ShortSegmentIsAnError) {
  AnalysisConfig cfg;
  cfg.prices = false;
  cfg.breakpoints = {30};
  EXPECT_THROW(analyze(cfg, SeriesSample(ts::gaussian(500, 1))), Error);
}

TEST(Analyze, FromConfig) {
  const auto c = FlatConfig::parse_string(
      "input = data.csv\ncolumn = close\ninput_kind = returns\ntransforms = returns, abs; power(0.5)\n"
      "breakpoints = 100 200\nlevel = 0.1\nformat = both\nd0 = 0.1\n");
  const auto a = analysis_from_config(c);
  EXPECT_EQ(a.input, "data.csv");
  EXPECT_FALSE(a.prices);
  EXPECT_EQ(a.transforms.size(), 3u);
  EXPECT_EQ(a.breakpoints, (std::vector<size_t>{100, 200}));
  EXPECT_DOUBLE_EQ(a.level, 0.1);
  EXPECT_EQ(a.format, "both");
  EXPECT_TRUE(c.unused().empty());
  EXPECT_THROW(analysis_from_config(FlatConfig::parse_string("column = 1\n")), Error);
  EXPECT_THROW(analysis_from_config(FlatConfig::parse_string("input = x\ninput_kind = volumes\n")), Error);
  EXPECT_THROW(analysis_from_config(FlatConfig::parse_string("input = x\nbreakpoints = 5 3\n")), Error);
}
