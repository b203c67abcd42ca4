#pragma once

// Data workflow for financial series: ingest a column, take log-returns and
// their |r|, r^2, |r|^theta transforms, estimate and test segment by segment.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/math/statistics/univariate_statistics.hpp>
#include <boost/tokenizer.hpp>

#include "mir/config.hpp"
#include "mir/error.hpp"
#include "mir/estimator.hpp"
#include "mir/gamma_table.hpp"
#include "mir/hypothesis.hpp"
#include "mir/sim.hpp"

namespace mir {

// ---- ingest ----------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, const std::string& name, size_t ln) {
  using Tok = boost::tokenizer<boost::escaped_list_separator<char>>;
  try {
    Tok tok(line);
    std::vector<std::string> out(tok.begin(), tok.end());
    for (auto& f : out) boost::algorithm::trim(f);
    return out;
  } catch (const boost::escaped_list_error& e) {
    throw Error(Errc::parse, name + ":" + std::to_string(ln) + ": " + e.what());
  }
}

inline bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0';
}

}  // namespace detail

// CSV with a header row, or headerless. `column` is a header name or a 1-based
// index; empty selects the only column.
inline SeriesSample ingest(std::istream& is, const std::string& column = "", const std::string& name = "input") {
  std::string line;
  size_t ln = 0, col = 0;
  bool have_col = false;
  std::vector<double> values;
  auto select_index = [&](size_t width) {
    if (column.empty()) {
      if (width != 1) throw Error(Errc::config, name + ": " + std::to_string(width) + " columns; choose one with a column selector");
      col = 0;
    } else {
      double k;
      if (!detail::parse_double(column, k) || k < 1 || k != std::floor(k) || k > static_cast<double>(width))
        throw Error(Errc::config, name + ": no column '" + column + "'");
      col = static_cast<size_t>(k) - 1;
    }
    have_col = true;
  };
  while (std::getline(is, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (boost::algorithm::trim_copy(line).empty()) throw Error(Errc::parse, name + ":" + std::to_string(ln) + ": blank row");
    const std::vector<std::string> f = detail::split_csv_line(line, name, ln);
    if (!have_col) {
      double probe;
      bool header = false;
      for (const auto& s : f)
        if (!detail::parse_double(s, probe)) header = true;
      if (header) {
        if (column.empty() && f.size() == 1) {
          col = 0;
          have_col = true;
        } else {
          for (size_t k = 0; k < f.size() && !have_col; ++k)
            if (f[k] == column) {
              col = k;
              have_col = true;
            }
          if (!have_col) select_index(f.size());
        }
        continue;
      }
      select_index(f.size());
    }
    if (col >= f.size()) throw Error(Errc::parse, name + ":" + std::to_string(ln) + ": missing column " + std::to_string(col + 1));
    double v;
    if (!detail::parse_double(f[col], v))
      throw Error(Errc::parse, name + ":" + std::to_string(ln) + ": '" + f[col] + "' is not a number");
    if (!std::isfinite(v)) throw Error(Errc::parse, name + ":" + std::to_string(ln) + ": value is not finite");
    values.push_back(v);
  }
  if (values.size() < kMinLength)
    throw Error(Errc::too_short, name + ": " + std::to_string(values.size()) + " values, at least 50 needed");
  return SeriesSample(std::move(values));
}

inline SeriesSample ingest(const std::string& path, const std::string& column = "") {
  std::ifstream is(path);
  if (!is) throw Error(Errc::io, "cannot open " + path);
  return ingest(is, column, path);
}

// ---- transforms ------------------------------------------------------------

enum class TransformKind { returns, abs, square, power, power_search };

struct Transform {
  TransformKind kind = TransformKind::returns;
  double theta = 1.0;  // power only

  std::string label() const {
    switch (kind) {
      case TransformKind::returns: return "r";
      case TransformKind::abs: return "|r|";
      case TransformKind::square: return "r^2";
      case TransformKind::power: {
        char buf[48];
        std::snprintf(buf, sizeof buf, "|r|^%g", theta);
        return buf;
      }
      case TransformKind::power_search: return "|r|^theta*";
    }
    return "?";
  }
};

inline Transform parse_transform(const std::string& s) {
  const std::string t = boost::algorithm::trim_copy(s);
  if (t == "returns" || t == "r") return {TransformKind::returns, 1.0};
  if (t == "abs") return {TransformKind::abs, 1.0};
  if (t == "square") return {TransformKind::square, 2.0};
  if (t == "power-search") return {TransformKind::power_search, 0.0};
  if (boost::algorithm::starts_with(t, "power(") && boost::algorithm::ends_with(t, ")")) {
    double th;
    if (!detail::parse_double(t.substr(6, t.size() - 7), th) || !(th > 0.0 && th <= 3.0))
      throw Error(Errc::config, "transform '" + t + "': theta must be a number in (0, 3]");
    return {TransformKind::power, th};
  }
  throw Error(Errc::config, "unknown transform '" + t + "' (returns, abs, square, power(theta), power-search)");
}

inline std::vector<double> log_returns(const std::vector<double>& prices) {
  std::vector<double> r;
  if (prices.size() < 2) throw Error(Errc::too_short, "returns need at least 2 prices");
  for (size_t t = 0; t < prices.size(); ++t)
    if (!(prices[t] > 0.0)) throw Error(Errc::domain, "returns: price " + std::to_string(t + 1) + " is not positive");
  for (size_t t = 0; t + 1 < prices.size(); ++t) r.push_back(std::log(prices[t + 1]) - std::log(prices[t]));
  return r;
}

inline std::vector<double> power_abs(const std::vector<double>& x, double theta) {
  std::vector<double> y(x.size());
  for (size_t t = 0; t < x.size(); ++t) {
    const double a = std::abs(x[t]);
    y[t] = theta == 1.0 ? a : theta == 2.0 ? x[t] * x[t] : std::pow(a, theta);
  }
  return y;
}

// returns is applied to prices; the others act pointwise on their input
inline std::vector<double> apply_transform(const std::vector<double>& x, const Transform& tr) {
  switch (tr.kind) {
    case TransformKind::returns: return log_returns(x);
    case TransformKind::abs: return power_abs(x, 1.0);
    case TransformKind::square: return power_abs(x, 2.0);
    case TransformKind::power: return power_abs(x, tr.theta);
    case TransformKind::power_search: throw Error(Errc::domain, "power-search is not a pointwise transform");
  }
  return {};
}

inline SeriesSample transform(const SeriesSample& x, const Transform& tr) { return SeriesSample(apply_transform(x.values, tr)); }

// ---- theta search ----------------------------------------------------------

// 0.05, 0.10, ..., 3.00
inline std::vector<double> default_theta_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 60; ++k) g.push_back(k / 20.0);
  return g;
}

struct ThetaPoint {
  double theta = 0.0;
  bool ok = false;
  double d = 0.0, se = 0.0;
  std::string error;
};

struct ThetaSearch {
  double theta_hat = std::numeric_limits<double>::quiet_NaN();
  double d_hat = std::numeric_limits<double>::quiet_NaN();
  std::vector<ThetaPoint> profile;
};

// argmax over the grid of the adaptive estimate on |r|^theta; ties go to the smaller theta
inline ThetaSearch theta_search(const std::vector<double>& r, const std::vector<double>& grid, double level, int p,
                                const GammaTable& table) {
  if (grid.empty()) throw Error(Errc::domain, "theta_search: empty grid");
  for (double th : grid)
    if (!(th > 0.0 && th <= 3.0)) throw Error(Errc::domain, "theta_search: grid must lie in (0, 3]");
  ThetaSearch out;
  for (double th : grid) {
    ThetaPoint pt;
    pt.theta = th;
    try {
      const EstimationReport rep = adaptive_estimate(power_abs(r, th), level, p, table);
      pt.d = rep.d;
      pt.se = rep.se;
      pt.ok = std::isfinite(rep.d);
    } catch (const Error& e) {
      pt.error = e.what();
    }
    if (pt.ok && (std::isnan(out.d_hat) || pt.d > out.d_hat ||
                  (pt.d == out.d_hat && th < out.theta_hat))) {
      out.d_hat = pt.d;
      out.theta_hat = th;
    }
    out.profile.push_back(std::move(pt));
  }
  if (std::isnan(out.theta_hat)) throw Error(Errc::numeric, "theta_search: the estimator failed at every theta");
  return out;
}

inline ThetaSearch theta_search(const std::vector<double>& r, const std::vector<double>& grid = default_theta_grid(),
                                double level = 0.05) {
  const int p = select_p(r.size());
  return theta_search(r, grid, level, p, default_table(p));
}

// ---- analyze ---------------------------------------------------------------

struct AnalysisConfig {
  std::string input;
  std::string column;
  bool prices = true;  // false: the input already holds returns
  std::vector<Transform> transforms{{TransformKind::returns, 1.0}};
  std::vector<size_t> breakpoints;  // 1-based input rows
  double level = 0.05;
  std::optional<int> p;
  std::string gamma;  // table path; empty for the shipped tables
  std::string format = "markdown";
  std::vector<double> theta_grid = default_theta_grid();
  std::optional<double> d0;  // adds the threshold test H0: d < d0

  void validate() const {
    if (!(level > 0.0 && level < 0.5)) throw Error(Errc::config, "analyze: level must lie in (0, 0.5)");
    for (size_t k = 0; k < breakpoints.size(); ++k) {
      if (breakpoints[k] < 1) throw Error(Errc::config, "analyze: breakpoints are 1-based");
      if (k && breakpoints[k] <= breakpoints[k - 1]) throw Error(Errc::config, "analyze: breakpoints must be strictly increasing");
    }
    for (double th : theta_grid)
      if (!(th > 0.0 && th <= 3.0)) throw Error(Errc::config, "analyze: theta grid must lie in (0, 3]");
    if (theta_grid.empty()) throw Error(Errc::config, "analyze: empty theta grid");
    if (format != "markdown" && format != "csv" && format != "both")
      throw Error(Errc::config, "analyze: format must be markdown, csv or both");
    if (transforms.empty()) throw Error(Errc::config, "analyze: no transforms");
    if (p && *p < 1) throw Error(Errc::config, "analyze: p must be >= 1");
  }
};

// keys: input, column, input_kind (prices|returns), transforms, breakpoints,
// level, p, gamma, format, theta_grid, d0
inline AnalysisConfig analysis_from_config(const FlatConfig& c) {
  AnalysisConfig a;
  a.input = c.required("input");
  a.column = c.str("column", "");
  const std::string kind = c.str("input_kind", "prices");
  if (kind == "prices")
    a.prices = true;
  else if (kind == "returns")
    a.prices = false;
  else
    throw Error(Errc::config, c.name() + ": input_kind must be prices or returns");
  if (c.has("transforms")) {
    a.transforms.clear();
    for (const auto& t : c.list("transforms", ",;")) a.transforms.push_back(parse_transform(t));
  }
  for (double b : c.nums("breakpoints")) {
    if (!(b >= 1.0) || b != std::floor(b)) throw Error(Errc::config, c.name() + ": breakpoints must be positive integers");
    a.breakpoints.push_back(static_cast<size_t>(b));
  }
  a.level = c.num("level", 0.05);
  if (c.has("p")) a.p = static_cast<int>(c.integer("p", 0));
  a.gamma = c.str("gamma", "");
  a.format = c.str("format", "markdown");
  if (c.has("theta_grid")) a.theta_grid = c.nums("theta_grid");
  if (c.has("d0")) a.d0 = c.num("d0", 0.0);
  a.validate();
  return a;
}

struct AnalysisRow {
  size_t segment = 0, first = 0, last = 0;  // 1-based input rows, inclusive
  std::string transform;
  size_t n = 0;
  double d = 0.0, se = 0.0, ci_lo = 0.0, ci_hi = 0.0;
  bool has_ci = true;
  bool reject_S = false, reject_T = false;
  std::optional<bool> reject_threshold;
  double kurtosis = 0.0, skewness = 0.0;
  double theta = std::numeric_limits<double>::quiet_NaN();
};

struct AnalysisReport {
  std::vector<AnalysisRow> rows;
  size_t segments = 0;
  double level = 0.05;
  std::optional<double> d0;
};

// segment bounds from {1} u breakpoints u {N}: [b_k, b_{k+1}) with the last one closed
inline std::vector<std::pair<size_t, size_t>> segment_bounds(size_t N, const std::vector<size_t>& breakpoints) {
  std::vector<size_t> b{1};
  for (size_t v : breakpoints) {
    if (v > N) throw Error(Errc::config, "analyze: breakpoint " + std::to_string(v) + " beyond the series length " + std::to_string(N));
    if (v > b.back()) b.push_back(v);
  }
  if (b.back() != N) b.push_back(N);
  std::vector<std::pair<size_t, size_t>> out;
  for (size_t k = 0; k + 1 < b.size(); ++k) out.emplace_back(b[k], k + 2 == b.size() ? b[k + 1] : b[k + 1] - 1);
  return out;
}

inline AnalysisReport analyze(const AnalysisConfig& cfg, const SeriesSample& input) {
  cfg.validate();
  std::optional<GammaTable> user_table;
  if (!cfg.gamma.empty()) user_table = load_gamma_table(cfg.gamma);
  std::map<int, GammaTable> cut;
  auto table_for = [&](int p) -> const GammaTable& {
    if (!user_table) return default_table(p);
    if (user_table->p == p) return *user_table;
    auto it = cut.find(p);
    if (it == cut.end()) it = cut.emplace(p, user_table->leading(p)).first;
    return it->second;
  };

  AnalysisReport rep;
  rep.level = cfg.level;
  rep.d0 = cfg.d0;
  const auto bounds = segment_bounds(input.size(), cfg.breakpoints);
  rep.segments = bounds.size();
  for (size_t s = 0; s < bounds.size(); ++s) {
    const auto [lo, hi] = bounds[s];
    std::vector<double> seg(input.values.begin() + static_cast<long>(lo - 1), input.values.begin() + static_cast<long>(hi));
    const std::vector<double> r = cfg.prices ? log_returns(seg) : seg;
    if (r.size() < kMinLength)
      throw Error(Errc::too_short, "analyze: segment " + std::to_string(s + 1) + " (rows " + std::to_string(lo) + "-" +
                                       std::to_string(hi) + ") has " + std::to_string(r.size()) + " values, at least 50 needed");
    const int p = cfg.p.value_or(select_p(r.size()));
    const GammaTable& tab = table_for(p);
    for (const Transform& tr : cfg.transforms) {
      AnalysisRow row;
      row.segment = s + 1;
      row.first = lo;
      row.last = hi;
      row.transform = tr.label();
      std::vector<double> y;
      if (tr.kind == TransformKind::power_search) {
        const ThetaSearch ts = theta_search(r, cfg.theta_grid, cfg.level, p, tab);
        row.theta = ts.theta_hat;
        y = power_abs(r, ts.theta_hat);
      } else if (tr.kind == TransformKind::returns) {
        y = r;
      } else {
        y = apply_transform(r, tr);
        if (tr.kind == TransformKind::power) row.theta = tr.theta;
      }
      const EstimationReport e = adaptive_estimate(y, cfg.level, p, tab);
      row.n = y.size();
      row.d = e.d;
      row.se = e.se;
      row.has_ci = e.has_ci;
      const double z = normal_quantile(1.0 - 0.5 * cfg.level);
      row.ci_lo = e.d - z * e.se;
      row.ci_hi = e.d + z * e.se;
      row.reject_S = stationarity_test(e, cfg.level, tab).reject;
      row.reject_T = nonstationarity_test(e, cfg.level, tab).reject;
      if (cfg.d0) row.reject_threshold = threshold_test(e, *cfg.d0, cfg.level, tab).reject;
      row.kurtosis = boost::math::statistics::kurtosis(y);
      row.skewness = boost::math::statistics::skewness(y);
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

inline AnalysisReport analyze(const AnalysisConfig& cfg) { return analyze(cfg, ingest(cfg.input, cfg.column)); }

namespace detail {
inline std::string f6(double v) {
  if (std::isnan(v)) return "-";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}
}  // namespace detail

inline std::string analysis_markdown(const AnalysisReport& rep) {
  using detail::f6;
  std::ostringstream os;
  size_t seg = 0;
  for (const auto& r : rep.rows) {
    if (r.segment != seg) {
      seg = r.segment;
      os << (seg > 1 ? "\n" : "") << "### segment " << seg << ": rows " << r.first << "-" << r.last << "\n\n";
      os << "| series | n | d | se | CI | S test | T test |";
      if (rep.d0) os << " d < " << f6(*rep.d0) << " |";
      os << " kurtosis | skewness | theta |\n|---|---|---|---|---|---|---|";
      if (rep.d0) os << "---|";
      os << "---|---|---|\n";
    }
    os << "| " << r.transform << " | " << r.n << " | " << f6(r.d) << " | " << f6(r.se) << " | ";
    if (r.has_ci)
      os << "[" << f6(r.ci_lo) << ", " << f6(r.ci_hi) << "]";
    else
      os << "n/a";
    os << " | " << (r.reject_S ? "reject stationarity" : "accept stationarity") << " | "
       << (r.reject_T ? "reject nonstationarity" : "accept nonstationarity") << " |";
    if (rep.d0) os << ' ' << (r.reject_threshold.value_or(false) ? "reject" : "accept") << " |";
    os << ' ' << f6(r.kurtosis) << " | " << f6(r.skewness) << " | " << f6(r.theta) << " |\n";
  }
  return os.str();
}

inline std::string analysis_csv(const AnalysisReport& rep) {
  using detail::f6;
  std::ostringstream os;
  os << "segment,first,last,series,n,d,se,ci_lo,ci_hi,reject_S,reject_T";
  if (rep.d0) os << ",reject_threshold";
  os << ",kurtosis,skewness,theta\n";
  for (const auto& r : rep.rows) {
    os << r.segment << ',' << r.first << ',' << r.last << ',' << r.transform << ',' << r.n << ',' << f6(r.d) << ','
       << f6(r.se) << ',' << (r.has_ci ? f6(r.ci_lo) : "-") << ',' << (r.has_ci ? f6(r.ci_hi) : "-") << ','
       << r.reject_S << ',' << r.reject_T;
    if (rep.d0) os << ',' << r.reject_threshold.value_or(false);
    os << ',' << f6(r.kurtosis) << ',' << f6(r.skewness) << ',' << f6(r.theta) << '\n';
  }
  return os.str();
}

}  // namespace mir
