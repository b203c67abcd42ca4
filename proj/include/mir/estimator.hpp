#pragma once

// Adaptive multiscale IR estimator: per-scale estimates, pseudo-GLS
// aggregation, the Q_N scan over the scale grid and the corrected scale.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mir/error.hpp"
#include "mir/gamma_table.hpp"
#include "mir/ir.hpp"
#include "mir/lambda.hpp"

namespace mir {

inline constexpr size_t kMinLength = 50;

// 5 below 120, 10 below 800, 15 below 10000, else 20
inline int select_p(size_t N) {
  if (N < 120) return 5;
  if (N < 800) return 10;
  if (N < 10000) return 15;
  return 20;
}

// inverse standard normal CDF: Acklam's rational approximation and one Newton step
inline double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error(Errc::domain, "normal_quantile: q outside (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double dd[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                  3.754408661907416e+00};
  double x;
  if (q < 0.02425) {
    const double t = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
        ((((dd[0] * t + dd[1]) * t + dd[2]) * t + dd[3]) * t + 1.0);
  } else if (q > 1.0 - 0.02425) {
    const double t = std::sqrt(-2.0 * std::log1p(-q));
    x = -(((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
        ((((dd[0] * t + dd[1]) * t + dd[2]) * t + dd[3]) * t + 1.0);
  } else {
    const double t = q - 0.5, r = t * t;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * t /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return x - (cdf - q) / pdf;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

struct DhatProfile {
  IrProfile ir;
  std::vector<double> d;
  std::vector<bool> clamped;
  bool any_clamped() const {
    for (bool c : clamped)
      if (c) return true;
    return false;
  }
};

inline DhatProfile dhat_profile(const std::vector<double>& x, long m, int p) {
  DhatProfile out;
  out.ir = ir_profile(x, m, p);
  for (double v : out.ir.values) {
    const Lambda0Inverse inv = lambda0_inverse(v);
    out.d.push_back(inv.d);
    out.clamped.push_back(inv.clamped);
  }
  return out;
}

inline DhatProfile dhat_profile(const SeriesSample& x, long m, int p) { return dhat_profile(x.values, m, p); }

namespace detail {
inline Eigen::LLT<Eigen::MatrixXd> factor_with_ridge(const Eigen::MatrixXd& S) {
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() == Eigen::Success) return llt;
  Eigen::MatrixXd R = S;
  R.diagonal().array() += 1e-8 * S.trace() / S.rows();
  llt.compute(R);
  if (llt.info() != Eigen::Success) throw Error(Errc::not_pd, "GLS: covariance not positive definite after ridge");
  return llt;
}
}  // namespace detail

// (J' S^-1 J)^-1 J' S^-1 dhat
inline double gls_estimate(const std::vector<double>& dhat, const Eigen::MatrixXd& S) {
  const int p = static_cast<int>(dhat.size());
  if (S.rows() != p || S.cols() != p) throw Error(Errc::domain, "gls_estimate: dimension mismatch");
  const auto llt = detail::factor_with_ridge(S);
  const Eigen::VectorXd J = Eigen::VectorXd::Ones(p);
  const Eigen::VectorXd w = llt.solve(J);
  const Eigen::Map<const Eigen::VectorXd> y(dhat.data(), p);
  return w.dot(y) / w.dot(J);
}

// base scale for alpha: floor(N^alpha), computed in log space so k / log N gives floor(e^k)
inline long scale_for(size_t N, double alpha) {
  return static_cast<long>(std::floor(std::exp(alpha * std::log(static_cast<double>(N))) * (1.0 + 1e-14)));
}

struct QnValue {
  double alpha = 0.0;
  long m = 0;
  double q = 0.0;
  double d_gls = 0.0;
  DhatProfile dhat;
};

inline QnValue qn_at_scale(const std::vector<double>& x, long m, int p, const GammaTable& table) {
  QnValue out;
  out.m = m;
  out.alpha = std::log(static_cast<double>(m)) / std::log(static_cast<double>(x.size()));
  out.dhat = dhat_profile(x, m, p);
  const Eigen::MatrixXd S = sigma_hat(m, out.dhat.d[0], table);
  out.d_gls = gls_estimate(out.dhat.d, S);
  Eigen::VectorXd r(p);
  for (int j = 0; j < p; ++j) r(j) = out.dhat.d[j] - out.d_gls;
  out.q = r.dot(detail::factor_with_ridge(S).solve(r));
  if (p == 1) out.q = 0.0;
  return out;
}

inline double qn(double alpha, const std::vector<double>& x, int p, const GammaTable& table) {
  return qn_at_scale(x, scale_for(x.size(), alpha), p, table).q;
}

struct AlphaScan {
  double alpha_hat = 0.0;
  long m_hat = 0;
  std::vector<QnValue> log;  // feasible candidates in increasing alpha
  bool truncated = false;    // some of the grid was infeasible
  bool fallback = false;     // no grid point feasible; the largest feasible scale was used
  bool tie = false;
};

// argmin of Q_N over alpha = k / log N, k = 2 .. floor(log(N / p)), kept where N - 3 p m >= 20
inline AlphaScan select_alpha(const std::vector<double>& x, int p, const GammaTable& table) {
  const size_t N = x.size();
  const double lN = std::log(static_cast<double>(N));
  const int kmax = static_cast<int>(std::floor(std::log(static_cast<double>(N) / p)));
  AlphaScan out;
  for (int k = 2; k <= kmax; ++k) {
    const double alpha = k / lN;
    const long m = scale_for(N, alpha);
    if (!profile_feasible(N, m, p)) {
      out.truncated = true;
      continue;
    }
    QnValue v = qn_at_scale(x, m, p, table);
    v.alpha = alpha;
    out.log.push_back(std::move(v));
  }
  if (out.log.empty()) {
    const long m = (static_cast<long>(N) - kMinTerms) / (3L * p);
    if (m < 1) throw Error(Errc::too_short, "no feasible scale for N = " + std::to_string(N) + ", p = " + std::to_string(p));
    out.fallback = true;
    out.log.push_back(qn_at_scale(x, m, p, table));
  }
  size_t best = 0;
  for (size_t k = 1; k < out.log.size(); ++k) {
    if (out.log[k].q < out.log[best].q) best = k;
  }
  for (size_t k = 0; k < out.log.size(); ++k)
    if (k != best && out.log[k].q == out.log[best].q) out.tie = true;
  out.alpha_hat = out.log[best].alpha;
  out.m_hat = out.log[best].m;
  return out;
}

struct EstimationReport {
  size_t N = 0;
  int p = 0;
  double d = 0.0;  // adaptive estimate
  double alpha_hat = 0.0, alpha_tilde = 0.0;
  long m_hat = 0, m_tilde = 0;
  std::vector<double> dhat, ir;
  double sigma = 0.0;  // sigma_p(d) from the table
  double se = 0.0;
  double level = 0.05;
  double ci_lo = 0.0, ci_hi = 0.0;
  bool has_ci = true;
  std::vector<QnValue> scan;
  // flags
  bool ir_clamped = false;
  bool grid_truncated = false;
  bool scale_fallback = false;
  bool alpha_clamped = false;
  bool scan_tie = false;
  bool sigma_clamped = false;
};

inline EstimationReport adaptive_estimate(const std::vector<double>& x, double level, std::optional<int> p_override,
                                          const GammaTable& table) {
  const size_t N = x.size();
  if (N < kMinLength) throw Error(Errc::too_short, "estimate: need at least 50 values, got " + std::to_string(N));
  if (!(level > 0.0 && level < 1.0)) throw Error(Errc::domain, "estimate: level outside (0, 1)");
  for (size_t t = 0; t < N; ++t)
    if (!std::isfinite(x[t])) throw Error(Errc::domain, "estimate: value " + std::to_string(t + 1) + " is not finite");
  const int p = p_override.value_or(select_p(N));
  if (p < 1) throw Error(Errc::domain, "estimate: p must be >= 1");
  const GammaTable& tab = table;
  if (tab.p != p) throw Error(Errc::table, "estimate: table has p = " + std::to_string(tab.p) + ", need " + std::to_string(p));

  EstimationReport rep;
  rep.N = N;
  rep.p = p;
  rep.level = level;
  const AlphaScan scan = select_alpha(x, p, tab);
  rep.alpha_hat = scan.alpha_hat;
  rep.m_hat = scan.m_hat;
  rep.scan = scan.log;
  rep.grid_truncated = scan.truncated;
  rep.scale_fallback = scan.fallback;
  rep.scan_tie = scan.tie;

  const double lN = std::log(static_cast<double>(N));
  const double a = scan.alpha_hat;
  double at = a;
  if (p > 2) at = a + 6.0 * a / ((p - 2) * (1.0 - a)) * std::log(lN) / lN;
  long mt = scale_for(N, at);
  if (!profile_feasible(N, mt, p)) {
    mt = std::max(1L, (static_cast<long>(N) - kMinTerms) / (3L * p));
    at = std::log(static_cast<double>(mt)) / lN;
    rep.alpha_clamped = true;
  }
  rep.alpha_tilde = at;
  rep.m_tilde = mt;

  const QnValue fin = qn_at_scale(x, mt, p, tab);
  rep.d = fin.d_gls;
  rep.dhat = fin.dhat.d;
  rep.ir = fin.dhat.ir.values;
  rep.ir_clamped = fin.dhat.any_clamped();

  const GammaAt g = gamma_interp(tab, rep.d);
  rep.sigma_clamped = g.clamped;
  rep.sigma = sigma_p_from_gamma(g.G, g.d);
  rep.se = rep.sigma * std::pow(static_cast<double>(N), 0.5 * (at - 1.0));
  rep.has_ci = rep.d < 1.25 && !rep.ir_clamped;
  const double z = normal_quantile(1.0 - 0.5 * level);
  rep.ci_lo = rep.d - z * rep.se;
  rep.ci_hi = rep.d + z * rep.se;
  return rep;
}

inline EstimationReport adaptive_estimate(const std::vector<double>& x, double level = 0.05,
                                          std::optional<int> p_override = std::nullopt) {
  const int p = p_override.value_or(select_p(x.size()));
  return adaptive_estimate(x, level, p, default_table(p));
}

inline EstimationReport adaptive_estimate(const SeriesSample& x, double level = 0.05,
                                          std::optional<int> p_override = std::nullopt) {
  return adaptive_estimate(x.values, level, p_override);
}

}  // namespace mir
