#pragma once

// rho(d), Lambda(r) and the composition Lambda0 = Lambda o rho.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mir/error.hpp"

namespace mir {

inline constexpr double kRhoHalfEps = 1e-12;
inline constexpr double kInverseLo = -0.499;
inline constexpr double kInverseHi = 1.499;

// 9 log 3 / (8 log 2) - 2
inline double rho_half() { return 9.0 * std::log(3.0) / (8.0 * std::log(2.0)) - 2.0; }

// lag-one correlation of normalized second differences.
// written in e = d - 1/2 so the removable singularity at 1/2 stays accurate:
// rho = (16 (4^e - 1) - 9 (9^e - 1)) / (-8 (4^e - 1)) = 9 (9^e - 1) / (8 (4^e - 1)) - 2 near e = 0
inline double rho(double d) {
  if (!(d > -0.5 && d < 1.5)) throw Error(Errc::domain, "rho: d outside (-0.5, 1.5)");
  const double e = d - 0.5;
  if (std::abs(e) < kRhoHalfEps) return rho_half();
  if (std::abs(e) >= 0.1) {
    // direct form; the integer powers at d = 0 and d = 1 make those anchors exact
    const double num = std::pow(4.0, d + 1.5) - std::pow(9.0, d + 0.5) - 7.0;
    return num / (2.0 * (4.0 - std::pow(4.0, d + 0.5)));
  }
  const double a = std::expm1(e * std::log(4.0));
  const double b = std::expm1(e * std::log(9.0));
  return 9.0 * b / (8.0 * a) - 2.0;
}

// E|X+Y|/(|X|+|Y|) for a standardized Gaussian pair with correlation r
inline double lambda(double r) {
  if (!(r >= -1.0 && r <= 1.0)) throw Error(Errc::domain, "lambda: |r| > 1");
  if (r == -1.0) return 0.0;
  if (r == 1.0) return 1.0;
  const double s = std::sqrt((1.0 + r) / (1.0 - r));
  const double lg = -std::log1p(0.5 * (r - 1.0));  // log(2/(1+r))
  return (2.0 / std::numbers::pi) * std::atan(s) + s * lg / std::numbers::pi;
}

inline double lambda0(double d) { return lambda(rho(d)); }

inline double lambda0_prime(double d) {
  if (!(d > -0.5 && d < 1.5)) throw Error(Errc::domain, "lambda0_prime: d outside (-0.5, 1.5)");
  constexpr double h = 1e-5;
  // keep the stencil inside the open domain
  const double c = std::clamp(d, -0.5 + 2.5 * h, 1.5 - 2.5 * h);
  auto central = [c](double step) { return (lambda0(c + step) - lambda0(c - step)) / (2.0 * step); };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

struct Lambda0Inverse {
  double d = 0.0;
  bool clamped = false;
};

inline Lambda0Inverse lambda0_inverse(double v) {
  Lambda0Inverse out;
  double lo = kInverseLo, hi = kInverseHi;
  const double vlo = lambda0(lo), vhi = lambda0(hi);
  if (!(v > vlo)) {
    out.d = lo;
    out.clamped = true;
    return out;
  }
  if (!(v < vhi)) {
    out.d = hi;
    out.clamped = true;
    return out;
  }
  while (hi - lo > 1e-11) {
    const double mid = 0.5 * (lo + hi);
    if (lambda0(mid) < v)
      lo = mid;
    else
      hi = mid;
  }
  out.d = 0.5 * (lo + hi);
  return out;
}

}  // namespace mir
