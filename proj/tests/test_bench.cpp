#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mir/bench.hpp"

using namespace mir;

namespace {
ExperimentSpec small_spec(unsigned threads) {
  ExperimentSpec s;
  s.models = {SpectralModel::arfima(0.0), SpectralModel::arfima(0.3, {-0.5}), SpectralModel::fgn(0.8)};
  s.Ns = {300, 1000};
  s.R = 12;
  s.seed = 99;
  s.threads = threads;
  return s;
}

size_t count_lines(const std::string& s) { return static_cast<size_t>(std::count(s.begin(), s.end(), '\n')); }
}  // namespace

TEST(Bench, SmokeTwoReplications) {
  ExperimentSpec s;
  s.models = {SpectralModel::arfima(0.0)};
  s.Ns = {200};
  s.R = 2;
  const auto t = run_experiment(s);
  ASSERT_EQ(t.rows.size(), 1u);
  const auto& r = t.rows[0];
  EXPECT_EQ(r.failures, 0);
  EXPECT_EQ(r.R, 2);
  for (double v : {r.rmse, r.mean_d, r.se_rmse, r.se_mean, r.acc_S, r.rej_T, r.se_acc, r.se_rej}) EXPECT_TRUE(std::isfinite(v));
  EXPECT_GE(r.rmse, 0.0);
  for (double f : {r.acc_S, r.rej_T}) {
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(Bench, EmptySpecIsHeaderOnly) {
  const auto t = run_experiment(ExperimentSpec{});
  EXPECT_EQ(emit_csv(t), std::string(kBenchCsvHeader) + "\n");
  EXPECT_EQ(count_lines(emit_markdown(t)), 2u);
}

TEST(Bench, SerialEqualsParallel) {
  const auto a = emit_csv(run_experiment(small_spec(1)));
  const auto b = emit_csv(run_experiment(small_spec(4)));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, emit_csv(run_experiment(small_spec(1))));
}

TEST(Bench, SeedsChangeResults) {
  auto s = small_spec(1);
  const auto a = emit_csv(run_experiment(s));
  s.seed = 100;
  EXPECT_NE(a, emit_csv(run_experiment(s)));
}

TEST(Bench, CsvRoundTrip) {
  const auto t = run_experiment(small_spec(1));
  const std::string csv = emit_csv(t);
  const auto back = parse_bench_csv(csv);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  EXPECT_EQ(emit_csv(back), csv);
  for (size_t k = 0; k < t.rows.size(); ++k) {
    EXPECT_EQ(back.rows[k].model, t.rows[k].model);
    EXPECT_NEAR(back.rows[k].rmse, t.rows[k].rmse, 1e-5 * std::abs(t.rows[k].rmse));
    EXPECT_NEAR(back.rows[k].se_acc, t.rows[k].se_acc, 1e-5 * std::abs(t.rows[k].se_acc) + 1e-300);
    EXPECT_DOUBLE_EQ(back.rows[k].d, t.rows[k].d);
  }
}

TEST(Bench, CsvQuotedModelNames) {
  ExperimentSpec s;
  s.models = {SpectralModel::arfima(0.2, {-0.3, 0.1}, {0.7})};
  s.Ns = {300};
  s.R = 3;
  const auto csv = emit_csv(run_experiment(s));
  EXPECT_NE(csv.find('"'), std::string::npos);
  const auto back = parse_bench_csv(csv);
  ASSERT_EQ(back.rows.size(), 1u);
  EXPECT_EQ(back.rows[0].model, s.models[0].to_string());
}

TEST(Bench, CsvParseErrors) {
  EXPECT_THROW(parse_bench_csv("nonsense\n"), Error);
  try {
    parse_bench_csv(std::string(kBenchCsvHeader) + "\nx,1,2\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Bench, MarkdownOneRowPerCell) {
  const auto s = small_spec(1);
  const auto md = emit_markdown(run_experiment(s));
  EXPECT_EQ(count_lines(md), 2 + s.models.size() * s.Ns.size());
  EXPECT_NE(md.find("RMSE"), std::string::npos);
  auto t = run_experiment(s);
  t.rmse = false;
  EXPECT_EQ(emit_markdown(t).find("RMSE"), std::string::npos);
  EXPECT_THROW(emit(t, "xml"), Error);
}

TEST(Bench, TimingColumnIsOptIn) {
  const auto t = run_experiment(small_spec(1));
  const auto off = emit_csv(t);
  EXPECT_EQ(off.substr(off.size() - 3), ",0\n");
  EXPECT_GT(t.wall_ms, 0.0);
}

TEST(Bench, SpecValidation) {
  ExperimentSpec s;
  s.R = 1;
  EXPECT_THROW(s.validate(), Error);
  s.R = 5;
  s.Ns = {40};
  EXPECT_THROW(s.validate(), Error);
  s.Ns = {100};
  s.level = 0.7;
  EXPECT_THROW(s.validate(), Error);
}

TEST(Bench, FromConfig) {
  const auto c = FlatConfig::parse_string(
      "models = arfima(d=0.2); fgn(h=0.7)\nN = 500, 1000\nR = 7\nseed = 3\noutputs = rmse\nthreads = 1\n");
  const auto s = experiment_from_config(c);
  EXPECT_EQ(s.models.size(), 2u);
  EXPECT_EQ(s.Ns, (std::vector<size_t>{500, 1000}));
  EXPECT_EQ(s.R, 7);
  EXPECT_EQ(s.seed, 3u);
  EXPECT_TRUE(s.rmse);
  EXPECT_FALSE(s.test_frequencies);
  EXPECT_TRUE(c.unused().empty());
  EXPECT_EQ(experiment_from_config(FlatConfig::parse_string("full = on\n")).R, 300);
  EXPECT_THROW(experiment_from_config(FlatConfig::parse_string("outputs = everything\n")), Error);
  EXPECT_THROW(experiment_from_config(FlatConfig::parse_string("N = 12.5\n")), Error);
}

TEST(Bench, StrongNonstationarityIsRejected) {
  ExperimentSpec s;
  s.models = {SpectralModel::arfima(1.2, {-0.3}, {0.7})};
  s.Ns = {500};
  s.R = 100;
  const auto t = run_experiment(s);
  EXPECT_EQ(t.rows[0].failures, 0);
  EXPECT_NEAR(t.rows[0].acc_S, 0.0, 0.03);
}
