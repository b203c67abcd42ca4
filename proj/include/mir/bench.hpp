#pragma once

// Monte Carlo harness: R paths per (model, N), the adaptive estimate and both
// tests on each, aggregated into one row per pair.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/tokenizer.hpp>

#include "mir/config.hpp"
#include "mir/error.hpp"
#include "mir/estimator.hpp"
#include "mir/hypothesis.hpp"
#include "mir/model.hpp"
#include "mir/rng.hpp"
#include "mir/sim.hpp"

namespace mir {

struct ExperimentSpec {
  std::vector<SpectralModel> models;
  std::vector<size_t> Ns;
  int R = 100;
  std::uint64_t seed = 1;
  double level = 0.05;
  bool rmse = true;
  bool test_frequencies = true;
  std::optional<int> p;
  unsigned threads = 0;  // 0: all cores

  void validate() const {
    if (R < 2) throw Error(Errc::config, "bench: R must be >= 2");
    if (!(level > 0.0 && level < 0.5)) throw Error(Errc::config, "bench: level must lie in (0, 0.5)");
    for (size_t N : Ns)
      if (N < kMinLength) throw Error(Errc::config, "bench: N = " + std::to_string(N) + " is below the minimum length 50");
    for (const auto& m : models) m.validate();
  }
};

struct ResultRow {
  std::string model;
  double d = 0.0;  // true memory parameter
  size_t N = 0;
  int R = 0;
  double rmse = 0.0, mean_d = 0.0, se_rmse = 0.0, se_mean = 0.0;
  double acc_S = 0.0, rej_T = 0.0, se_acc = 0.0, se_rej = 0.0;
  int failures = 0;
  double wall_ms = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  int R = 0;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
  bool rmse = true, test_frequencies = true;  // columns shown by emit_markdown
};

struct RepOutcome {
  bool ok = false;
  double d = 0.0;
  bool acc_S = false, rej_T = false;
};

namespace detail {

inline void aggregate(ResultRow& row, const std::vector<RepOutcome>& reps) {
  std::vector<double> err2, est;
  int acc = 0, rej = 0;
  for (const auto& o : reps) {
    if (!o.ok) {
      ++row.failures;
      continue;
    }
    est.push_back(o.d);
    err2.push_back((o.d - row.d) * (o.d - row.d));
    acc += o.acc_S;
    rej += o.rej_T;
  }
  const double n = static_cast<double>(est.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (est.empty()) {
    row.rmse = row.mean_d = row.se_rmse = row.se_mean = row.acc_S = row.rej_T = row.se_acc = row.se_rej = nan;
    return;
  }
  double mse = 0.0, mean = 0.0;
  for (size_t k = 0; k < est.size(); ++k) {
    mse += err2[k];
    mean += est[k];
  }
  mse /= n;
  mean /= n;
  double v_e2 = 0.0, v_d = 0.0;
  for (size_t k = 0; k < est.size(); ++k) {
    v_e2 += (err2[k] - mse) * (err2[k] - mse);
    v_d += (est[k] - mean) * (est[k] - mean);
  }
  const double dof = std::max(1.0, n - 1.0);
  row.rmse = std::sqrt(mse);
  row.mean_d = mean;
  // delta method on sqrt(MSE)
  row.se_rmse = row.rmse > 0.0 ? std::sqrt(v_e2 / dof / n) / (2.0 * row.rmse) : 0.0;
  row.se_mean = std::sqrt(v_d / dof / n);
  row.acc_S = acc / n;
  row.rej_T = rej / n;
  row.se_acc = std::sqrt(row.acc_S * (1.0 - row.acc_S) / n);
  row.se_rej = std::sqrt(row.rej_T * (1.0 - row.rej_T) / n);
}

}  // namespace detail

// one path: simulate, estimate, test; failures are reported, not thrown
inline RepOutcome run_replication(const CirculantSampler& sampler, std::uint64_t seed, double level, std::optional<int> p) {
  RepOutcome o;
  try {
    const SeriesSample x = sampler.draw(seed);
    const int pp = p.value_or(select_p(x.size()));
    const GammaTable& t = default_table(pp);
    const EstimationReport r = adaptive_estimate(x.values, level, pp, t);
    o.d = r.d;
    o.acc_S = !stationarity_test(r, level, t).reject;
    o.rej_T = nonstationarity_test(r, level, t).reject;
    o.ok = std::isfinite(o.d);
  } catch (const Error&) {
    o.ok = false;
  }
  return o;
}

// seeds are derive_seed(master, {model index, N, rep}); work order does not affect results
inline ResultTable run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ResultTable table;
  table.R = spec.R;
  table.seed = spec.seed;
  table.rmse = spec.rmse;
  table.test_frequencies = spec.test_frequencies;
  struct Cell {
    size_t model, n;
    std::unique_ptr<CirculantSampler> sampler;
    std::vector<RepOutcome> reps;
  };
  std::vector<Cell> cells;
  for (size_t mi = 0; mi < spec.models.size(); ++mi)
    for (size_t ni = 0; ni < spec.Ns.size(); ++ni) {
      Cell c{mi, ni, std::make_unique<CirculantSampler>(spec.models[mi], spec.Ns[ni]), {}};
      c.reps.resize(static_cast<size_t>(spec.R));
      cells.push_back(std::move(c));
    }
  // warm the table cache once so workers only read it
  for (size_t N : spec.Ns) (void)default_table(spec.p.value_or(select_p(N)));

  const size_t R = static_cast<size_t>(spec.R), total = cells.size() * R;
  std::vector<double> task_ms(total, 0.0);
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (;;) {
      const size_t k = next.fetch_add(1);
      if (k >= total) return;
      Cell& c = cells[k / R];
      const size_t rep = k % R;
      const auto s0 = std::chrono::steady_clock::now();
      const std::uint64_t seed =
          derive_seed(spec.seed, {static_cast<std::uint64_t>(c.model), static_cast<std::uint64_t>(spec.Ns[c.n]),
                                  static_cast<std::uint64_t>(rep)});
      c.reps[rep] = run_replication(*c.sampler, seed, spec.level, spec.p);
      task_ms[k] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - s0).count();
    }
  };
  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<size_t>(threads, std::max<size_t>(1, total)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < threads; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  for (size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell& c = cells[ci];
    ResultRow row;
    row.model = spec.models[c.model].to_string();
    row.d = spec.models[c.model].memory();
    row.N = spec.Ns[c.n];
    row.R = spec.R;
    detail::aggregate(row, c.reps);
    for (size_t r = 0; r < R; ++r) row.wall_ms += task_ms[ci * R + r];
    table.rows.push_back(std::move(row));
  }
  table.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return table;
}

// ---- config ----------------------------------------------------------------

// keys: models (separated by ';'), N, R, seed, level, outputs, p, threads, full
inline ExperimentSpec experiment_from_config(const FlatConfig& c) {
  ExperimentSpec s;
  for (const auto& m : c.list("models", ";")) s.models.push_back(parse_model(m));
  for (double n : c.nums("N")) {
    if (!(n >= 1.0) || n != std::floor(n)) throw Error(Errc::config, c.name() + ": N values must be positive integers");
    s.Ns.push_back(static_cast<size_t>(n));
  }
  s.R = static_cast<int>(c.integer("R", 100));
  if (c.flag("full", false)) s.R = 300;
  s.seed = static_cast<std::uint64_t>(c.integer("seed", 1));
  s.level = c.num("level", 0.05);
  if (c.has("p")) s.p = static_cast<int>(c.integer("p", 0));
  s.threads = static_cast<unsigned>(c.integer("threads", 0));
  if (c.has("outputs")) {
    s.rmse = s.test_frequencies = false;
    for (const auto& o : c.list("outputs")) {
      if (o == "rmse")
        s.rmse = true;
      else if (o == "test-frequencies")
        s.test_frequencies = true;
      else
        throw Error(Errc::config, c.name() + ": unknown output '" + o + "'");
    }
  }
  s.validate();
  return s;
}

// ---- emit / parse ----------------------------------------------------------

inline constexpr const char* kBenchCsvHeader = "model,N,R,rmse,se_rmse,mean_d,se_mean,acc_S,se_acc,rej_T,se_rej,failures,wall_ms";

namespace detail {
inline std::string g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}
inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '\\';
    out += ch;
  }
  return out + '"';
}
}  // namespace detail

struct EmitOptions {
  bool timing = false;  // wall_ms is written as 0 when off, keeping the output reproducible
};

inline std::string emit_csv(const ResultTable& t, EmitOptions opt = {}) {
  std::ostringstream os;
  os << kBenchCsvHeader << '\n';
  for (const auto& r : t.rows) {
    using detail::g6;
    os << detail::csv_quote(r.model) << ',' << r.N << ',' << r.R << ',' << g6(r.rmse) << ',' << g6(r.se_rmse) << ','
       << g6(r.mean_d) << ',' << g6(r.se_mean) << ',' << g6(r.acc_S) << ',' << g6(r.se_acc) << ',' << g6(r.rej_T) << ','
       << g6(r.se_rej) << ',' << r.failures << ',' << g6(opt.timing ? r.wall_ms : 0.0) << '\n';
  }
  return os.str();
}

inline std::string emit_markdown(const ResultTable& t, EmitOptions opt = {}) {
  std::ostringstream os;
  using detail::g6;
  os << "| model | N | R |";
  if (t.rmse) os << " RMSE (se) | mean d (se) |";
  if (t.test_frequencies) os << " accept S (se) | reject T (se) |";
  os << " failures |";
  if (opt.timing) os << " ms |";
  os << "\n|---|---|---|";
  if (t.rmse) os << "---|---|";
  if (t.test_frequencies) os << "---|---|";
  os << "---|";
  if (opt.timing) os << "---|";
  os << '\n';
  for (const auto& r : t.rows) {
    os << "| " << r.model << " | " << r.N << " | " << r.R << " |";
    if (t.rmse) os << ' ' << g6(r.rmse) << " (" << g6(r.se_rmse) << ") | " << g6(r.mean_d) << " (" << g6(r.se_mean) << ") |";
    if (t.test_frequencies)
      os << ' ' << g6(r.acc_S) << " (" << g6(r.se_acc) << ") | " << g6(r.rej_T) << " (" << g6(r.se_rej) << ") |";
    os << ' ' << r.failures << " |";
    if (opt.timing) os << ' ' << g6(r.wall_ms) << " |";
    os << '\n';
  }
  return os.str();
}

inline std::string emit(const ResultTable& t, const std::string& format, EmitOptions opt = {}) {
  if (format == "csv") return emit_csv(t, opt);
  if (format == "markdown" || format == "md") return emit_markdown(t, opt);
  throw Error(Errc::domain, "bench: unknown format '" + format + "'");
}

// reads emit_csv output back
inline ResultTable parse_bench_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  ResultTable t;
  if (!std::getline(is, line) || line != kBenchCsvHeader) throw Error(Errc::parse, "bench csv: line 1: unexpected header");
  size_t ln = 1;
  using Tok = boost::tokenizer<boost::escaped_list_separator<char>>;
  while (std::getline(is, line)) {
    ++ln;
    if (line.empty()) continue;
    std::vector<std::string> f;
    try {
      Tok tok(line);
      f.assign(tok.begin(), tok.end());
    } catch (const boost::escaped_list_error& e) {
      throw Error(Errc::parse, "bench csv: line " + std::to_string(ln) + ": " + e.what());
    }
    if (f.size() != 13) throw Error(Errc::parse, "bench csv: line " + std::to_string(ln) + ": expected 13 fields");
    auto num = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0')
        throw Error(Errc::parse, "bench csv: line " + std::to_string(ln) + ": bad number '" + s + "'");
      return v;
    };
    ResultRow r;
    r.model = f[0];
    r.N = static_cast<size_t>(num(f[1]));
    r.R = static_cast<int>(num(f[2]));
    r.rmse = num(f[3]);
    r.se_rmse = num(f[4]);
    r.mean_d = num(f[5]);
    r.se_mean = num(f[6]);
    r.acc_S = num(f[7]);
    r.se_acc = num(f[8]);
    r.rej_T = num(f[9]);
    r.se_rej = num(f[10]);
    r.failures = static_cast<int>(num(f[11]));
    r.wall_ms = num(f[12]);
    try {
      r.d = parse_model(r.model).memory();
    } catch (const Error&) {
      r.d = std::numeric_limits<double>::quiet_NaN();
    }
    t.R = r.R;
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace mir
