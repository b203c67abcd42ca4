#pragma once

// Increment-ratio statistic
//   IR_N(l) = 1/(N - 3l) sum_{k=0}^{N-3l-1} |A_k + B_k| / (|A_k| + |B_k|)
// with A_k the sum of the l lag-l increments starting at k+1 and B_k = A_{k+l}.

#include <cmath>
#include <string>
#include <vector>

#include "mir/error.hpp"
#include "mir/sim.hpp"

namespace mir {

inline constexpr long kMinTerms = 20;

struct IrProfile {
  long m = 0;
  int p = 0;
  std::vector<double> values;  // values[j-1] = IR_N(j m)
  std::vector<long> terms;     // N - 3 j m
};

namespace detail {

inline void check_scale(size_t N, long l) {
  if (l < 1) throw Error(Errc::domain, "IR: scale must be >= 1");
  if (static_cast<long>(N) - 3 * l < 1)
    throw Error(Errc::too_short, "IR: series of length " + std::to_string(N) + " too short for scale " + std::to_string(l));
}

// compensated running sum
struct Neumaier {
  double s = 0.0, c = 0.0;
  void add(double v) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

inline double ratio(double a, double b) {
  const double den = std::abs(a) + std::abs(b);
  return den > 0.0 ? std::abs(a + b) / den : 1.0;
}

}  // namespace detail

inline double ir_single(const std::vector<double>& x, long l) {
  const size_t N = x.size();
  detail::check_scale(N, l);
  const size_t L = static_cast<size_t>(l);
  const size_t nA = N - 2 * L + 1;  // A_0 .. A_{N-2l}
  // A_k = sum_{s=k}^{k+l-1} D_s, D_s = x[s+l] - x[s] (0-based)
  std::vector<double> A(nA);
  detail::Neumaier run;
  for (size_t s = 0; s < L; ++s) run.add(x[s + L] - x[s]);
  A[0] = run.value();
  for (size_t k = 1; k < nA; ++k) {
    run.add(x[k + 2 * L - 1] - x[k + L - 1]);
    run.add(-(x[k - 1 + L] - x[k - 1]));
    A[k] = run.value();
  }
  const size_t n = N - 3 * L;
  detail::Neumaier acc;
  for (size_t k = 0; k < n; ++k) acc.add(detail::ratio(A[k], A[k + L]));
  return acc.value() / static_cast<double>(n);
}

// direct double sum, no running updates
inline double ir_single_naive(const std::vector<double>& x, long l) {
  const size_t N = x.size();
  detail::check_scale(N, l);
  const size_t L = static_cast<size_t>(l);
  const size_t n = N - 3 * L;
  double acc = 0.0;
  for (size_t k = 0; k < n; ++k) {
    double a = 0.0, b = 0.0;
    for (size_t t = k; t < k + L; ++t) a += x[t + L] - x[t];
    for (size_t t = k + L; t < k + 2 * L; ++t) b += x[t + L] - x[t];
    acc += detail::ratio(a, b);
  }
  return acc / static_cast<double>(n);
}

inline double ir_single(const SeriesSample& x, long l) { return ir_single(x.values, l); }
inline double ir_single_naive(const SeriesSample& x, long l) { return ir_single_naive(x.values, l); }

inline bool profile_feasible(size_t N, long m, int p) {
  return m >= 1 && p >= 1 && static_cast<long>(N) - 3L * p * m >= kMinTerms;
}

inline IrProfile ir_profile(const std::vector<double>& x, long m, int p) {
  if (m < 1 || p < 1) throw Error(Errc::domain, "ir_profile: m and p must be >= 1");
  if (!profile_feasible(x.size(), m, p))
    throw Error(Errc::too_short, "ir_profile: N = " + std::to_string(x.size()) + " leaves fewer than " +
                                     std::to_string(kMinTerms) + " terms at scale " + std::to_string(p * m));
  IrProfile out;
  out.m = m;
  out.p = p;
  for (int j = 1; j <= p; ++j) {
    out.values.push_back(ir_single(x, j * m));
    out.terms.push_back(static_cast<long>(x.size()) - 3L * j * m);
  }
  return out;
}

inline IrProfile ir_profile(const SeriesSample& x, long m, int p) { return ir_profile(x.values, m, p); }

}  // namespace mir
