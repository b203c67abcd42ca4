#pragma once

// Semiparametric tests on the adaptive estimate:
//   stationarity     H0: d < d0  rejected when d > d0 + sigma_p(d0) q_{1-a} N^{(alpha-1)/2}
//   nonstationarity  H0': d >= d0 rejected when d < d0 - sigma_p(d0) q_{1-a} N^{(alpha-1)/2}
// with d0 = 1/2 for the two named tests.

#include <cmath>
#include <string>

#include "mir/error.hpp"
#include "mir/estimator.hpp"
#include "mir/gamma_table.hpp"

namespace mir {

enum class TestKind { stationarity, nonstationarity, threshold };

inline const char* to_string(TestKind k) {
  switch (k) {
    case TestKind::stationarity: return "stationarity";
    case TestKind::nonstationarity: return "nonstationarity";
    case TestKind::threshold: return "threshold";
  }
  return "?";
}

struct TestDecision {
  TestKind kind = TestKind::stationarity;
  double d0 = 0.5;
  double statistic = 0.0;  // the adaptive estimate
  double threshold = 0.0;
  double level = 0.05;
  bool reject = false;
  double p_value = 1.0;
  size_t N = 0;
  int p = 0;
  double alpha_tilde = 0.0;
  double sigma = 0.0;  // sigma_p(d0)
  bool clt_valid = true;

  std::string verdict() const {
    switch (kind) {
      case TestKind::stationarity: return reject ? "reject stationarity" : "accept stationarity";
      case TestKind::nonstationarity: return reject ? "reject nonstationarity" : "accept nonstationarity";
      case TestKind::threshold: return reject ? "reject d < d0" : "accept d < d0";
    }
    return "?";
  }
};

namespace detail {

inline TestDecision one_sided(const EstimationReport& r, double d0, double level, bool upper, const GammaTable& t) {
  if (!(level > 0.0 && level < 0.5)) throw Error(Errc::domain, "test level must lie in (0, 0.5)");
  if (!(d0 > -0.5 && d0 < 1.25)) throw Error(Errc::domain, "threshold d0 must lie in (-0.5, 1.25)");
  TestDecision out;
  out.d0 = d0;
  out.statistic = r.d;
  out.level = level;
  out.N = r.N;
  out.p = r.p;
  out.alpha_tilde = r.alpha_tilde;
  out.sigma = sigma_p(t, d0);
  out.clt_valid = r.has_ci;
  const double scale = out.sigma * std::pow(static_cast<double>(r.N), 0.5 * (r.alpha_tilde - 1.0));
  const double q = normal_quantile(1.0 - level);
  const double z = (r.d - d0) / scale;
  if (upper) {
    out.threshold = d0 + scale * q;
    out.reject = r.d > out.threshold;
    out.p_value = 1.0 - normal_cdf(z);
  } else {
    out.threshold = d0 - scale * q;
    out.reject = r.d < out.threshold;
    out.p_value = normal_cdf(z);
  }
  return out;
}

}  // namespace detail

// H0: d < d0 against d >= d0
inline TestDecision threshold_test(const EstimationReport& r, double d0, double level, const GammaTable& t) {
  TestDecision out = detail::one_sided(r, d0, level, true, t);
  out.kind = TestKind::threshold;
  return out;
}

inline TestDecision stationarity_test(const EstimationReport& r, double level, const GammaTable& t) {
  TestDecision out = detail::one_sided(r, 0.5, level, true, t);
  out.kind = TestKind::stationarity;
  return out;
}

inline TestDecision nonstationarity_test(const EstimationReport& r, double level, const GammaTable& t) {
  TestDecision out = detail::one_sided(r, 0.5, level, false, t);
  out.kind = TestKind::nonstationarity;
  return out;
}

inline TestDecision threshold_test(const EstimationReport& r, double d0, double level = 0.05) {
  return threshold_test(r, d0, level, default_table(r.p));
}
inline TestDecision stationarity_test(const EstimationReport& r, double level = 0.05) {
  return stationarity_test(r, level, default_table(r.p));
}
inline TestDecision nonstationarity_test(const EstimationReport& r, double level = 0.05) {
  return nonstationarity_test(r, level, default_table(r.p));
}

}  // namespace mir
