#pragma once

// Numerical checks of the expansions behind the bias of E[IR_N(m)]:
//   J_j(a, m) = int_0^pi x^a sin^j(m x / 2) / sin^4(x / 2) dx,  j = 4, 6
// and its leading constants, the power-sine integral identities, and
//   E[IR_N(m)] = Lambda(R_m / V_m^2),
//   R_m / V_m^2 = 1 - 2 int f sin^6(m x/2)/sin^2(x/2) / int f sin^4(m x/2)/sin^2(x/2).

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mir/error.hpp"
#include "mir/lambda.hpp"
#include "mir/model.hpp"
#include "mir/quadrature.hpp"
#include "mir/sim.hpp"

namespace mir::theory {

namespace detail {

// int_a^b f over panels of width at most w; the first panel may carry an endpoint singularity at a
template <class F>
double panels(F&& f, double a, double b, double w, bool singular_start, int nodes = 16) {
  const long n = std::max(1L, static_cast<long>(std::ceil((b - a) / w - 1e-9)));
  double total = 0.0;
  for (long k = 0; k < n; ++k) {
    const double lo = a + k * w, hi = std::min(b, a + (k + 1) * w);
    if (hi <= lo) break;
    if (k == 0 && singular_start) {
      boost::math::quadrature::tanh_sinh<double> ts;
      total += ts.integrate(f, lo, hi);
    } else {
      total += quad::gl(f, lo, hi, nodes);
    }
  }
  return total;
}

// int_X^inf e^{i w x} x^{-s} dx by repeated integration by parts (w X large)
inline std::complex<double> oscillatory_tail(double w, double s, double X) {
  using C = std::complex<double>;
  const C iwX(0.0, w * X);
  C sum = 0.0, term = 1.0;
  for (int n = 0; n < 500; ++n) {
    sum += term;
    const C next = term * (s + n) / iwX;
    if (std::abs(next) < 1e-17 * std::abs(sum) || std::abs(next) > std::abs(term)) break;
    term = next;
  }
  return -std::exp(iwX) * std::pow(X, -s) / C(0.0, w) * sum;
}

// harmonic expansion of sin^k(y): constant term and cos/sin coefficients of y, 2y, ..., ky
struct Harmonics {
  double c0 = 0.0;
  std::vector<double> cosc, sinc;  // index h means frequency h
};

inline Harmonics sin_power(int k) {
  Harmonics h;
  h.cosc.assign(7, 0.0);
  h.sinc.assign(7, 0.0);
  switch (k) {
    case 1: h.sinc[1] = 1.0; break;
    case 2: h.c0 = 0.5; h.cosc[2] = -0.5; break;
    case 4: h.c0 = 3.0 / 8; h.cosc[2] = -4.0 / 8; h.cosc[4] = 1.0 / 8; break;
    case 6: h.c0 = 10.0 / 32; h.cosc[2] = -15.0 / 32; h.cosc[4] = 6.0 / 32; h.cosc[6] = -1.0 / 32; break;
    default: throw Error(Errc::domain, "sin power must be 1, 2, 4 or 6");
  }
  return h;
}

}  // namespace detail

// int_0^inf sin^k(lambda x) / x^s dx, k in {1, 2, 4, 6}, where it converges
inline double sin_power_integral(int k, double s, double lambda) {
  if (!(lambda > 0.0)) throw Error(Errc::domain, "sin_power_integral: lambda must be > 0");
  if (!(s < k + 1.0) || !(s > (k == 1 ? 0.0 : 1.0))) throw Error(Errc::domain, "sin_power_integral: divergent");
  const detail::Harmonics h = detail::sin_power(k);
  const double pi = std::numbers::pi;
  const double X = 128.0 * pi / lambda;
  auto f = [&](double x) { return x > 0.0 ? std::pow(x > 1e-100 ? std::sin(lambda * x) / x : lambda, k) * std::pow(x, k - s) : 0.0; };
  double total = detail::panels(f, 0.0, X, pi / (2.0 * lambda), true, 20);
  if (h.c0 != 0.0) total += h.c0 * std::pow(X, 1.0 - s) / (s - 1.0);
  for (int q = 1; q <= 6; ++q) {
    if (h.cosc[q] == 0.0 && h.sinc[q] == 0.0) continue;
    const std::complex<double> t = detail::oscillatory_tail(q * lambda, s, X);
    total += h.cosc[q] * t.real() + h.sinc[q] * t.imag();
  }
  return total;
}

// J_j(a, m); panels follow the zeros of sin(m x / 2)
inline double j_integral(int j, double a, double m) {
  if (j != 4 && j != 6) throw Error(Errc::domain, "j_integral: j must be 4 or 6");
  if (!(a > -1.0)) throw Error(Errc::domain, "j_integral: a must be > -1");
  if (!(m >= 1.0)) throw Error(Errc::domain, "j_integral: m must be >= 1");
  auto f = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double sm = std::sin(0.5 * m * x), q = x > 1e-100 ? sm / std::sin(0.5 * x) : m;
    return std::pow(x, a) * q * q * q * q * std::pow(sm, j - 4);
  };
  const double pi = std::numbers::pi;
  return detail::panels(f, 0.0, pi, std::min(pi, pi / m), true, 16);
}

// closed forms of the leading constants; nullopt where a constant is not defined
struct ExpansionConstants {
  double a = 0.0;
  std::optional<double> C41, C61;      // -1 < a < 1
  std::optional<double> Cp41, Cp61;    // 1 <= a < 3
  std::optional<double> Cp42, Cp62;    // a = 1 or a = 3
  std::optional<double> Cpp41, Cpp61;  // a > 3
};

inline double C41(double a) {
  const double pi = std::numbers::pi, b = 3.0 - a;
  return 4.0 * pi * (1.0 - std::pow(2.0, b) / 4.0) / (b * std::tgamma(b) * std::sin(b * pi / 2.0));
}

inline double C61(double a) {
  const double pi = std::numbers::pi, b = 3.0 - a;
  return pi * (15.0 - 6.0 * std::pow(2.0, b) + std::pow(3.0, b)) / (4.0 * b * std::tgamma(b) * std::sin(b * pi / 2.0));
}

namespace detail {
// int_1^inf x^{-s} sum_h c_h cos(h x) dx
inline double cos_tail_from_one(const std::vector<std::pair<int, double>>& terms, double s) {
  const double pi = std::numbers::pi;
  const double X = 256.0 * pi;
  double total = 0.0;
  auto f = [&](double x) {
    double v = 0.0;
    for (auto [h, c] : terms) v += c * std::cos(h * x);
    return v * std::pow(x, -s);
  };
  total += panels(f, 1.0, X, pi / 4.0, false, 16);
  for (auto [h, c] : terms) total += c * oscillatory_tail(h, s, X).real();
  return total;
}
}  // namespace detail

inline double Cp41(double a) {
  const double s = 4.0 - a;
  const bool mid = a >= 1.0 && a < 3.0;
  auto head = [&](double y) {
    if (y <= 0.0) return 0.0;
    const double t = y > 1e-100 ? std::sin(0.5 * y) / y : 0.5;
    return t * t * t * t * std::pow(y, 4.0 - s);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  return (mid ? 6.0 / (3.0 - a) : 0.0) + 16.0 * ts.integrate(head, 0.0, 1.0) +
         2.0 * detail::cos_tail_from_one({{1, -4.0}, {2, 1.0}}, s);
}

inline double Cp61(double a) {
  const double s = 4.0 - a;
  const bool mid = a >= 1.0 && a < 3.0;
  auto head = [&](double y) {
    if (y <= 0.0) return 0.0;
    const double t = y > 1e-100 ? std::sin(0.5 * y) / y : 0.5;
    return t * t * t * t * t * t * std::pow(y, 6.0 - s);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  return 16.0 * ts.integrate(head, 0.0, 1.0) + (mid ? 5.0 / (3.0 - a) : 0.0) +
         0.5 * detail::cos_tail_from_one({{1, -15.0}, {2, 6.0}, {3, -1.0}}, s);
}

inline double Cp42(double a) { return (a == 3.0 ? 6.0 : 0.0) + (a == 1.0 ? 1.0 : 0.0); }
inline double Cp62(double a) { return (a == 3.0 ? 5.0 : 0.0) + (a == 1.0 ? 5.0 / 6.0 : 0.0); }

namespace detail {
inline double inverse_sin4_moment(double a) {
  auto f = [a](double x) {
    if (x <= 0.0) return 0.0;
    const double q = x > 1e-100 ? x / std::sin(0.5 * x) : 2.0;
    return q * q * q * q * std::pow(x, a - 4.0);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, 0.0, std::numbers::pi);
}
}  // namespace detail

inline double Cpp41(double a) { return 3.0 / 8.0 * detail::inverse_sin4_moment(a); }
inline double Cpp61(double a) { return 5.0 / 16.0 * detail::inverse_sin4_moment(a); }

inline ExpansionConstants expansion_constants(double a) {
  if (!(a > -1.0)) throw Error(Errc::domain, "expansion_constants: a must be > -1");
  ExpansionConstants c;
  c.a = a;
  if (a < 1.0) {
    c.C41 = C41(a);
    c.C61 = C61(a);
  }
  if (a >= 1.0 && a < 3.0) {
    c.Cp41 = Cp41(a);
    c.Cp61 = Cp61(a);
  }
  if (a == 1.0 || a == 3.0) {
    c.Cp42 = Cp42(a);
    c.Cp62 = Cp62(a);
  }
  if (a > 3.0) {
    c.Cpp41 = Cpp41(a);
    c.Cpp61 = Cpp61(a);
  }
  for (const auto* v : {&c.C41, &c.C61, &c.Cp41, &c.Cp61, &c.Cp42, &c.Cp62, &c.Cpp41, &c.Cpp61})
    if (v->has_value() && **v == 0.0) throw Error(Errc::numeric, "expansion constant vanishes at a = " + std::to_string(a));
  return c;
}

// the three expressions of each power-sine identity; they should agree
struct IdentityChain {
  std::string name;
  std::vector<double> values;
  double spread() const {
    double lo = values.front(), hi = values.front();
    for (double v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return (hi - lo) / std::abs(hi);
  }
};

// a in (0, 2)
inline IdentityChain sine_identity(double a, double lambda) {
  if (!(a > 0.0 && a < 2.0)) throw Error(Errc::domain, "sine_identity: a outside (0, 2)");
  const double pi = std::numbers::pi;
  IdentityChain c;
  c.name = "sine a=" + std::to_string(a) + " lambda=" + std::to_string(lambda);
  c.values.push_back(2.0 / std::pow(lambda, a - 1.0) * sin_power_integral(1, a, lambda));
  c.values.push_back(4.0 * a / (std::pow(2.0, a) * std::pow(lambda, a)) * sin_power_integral(2, a + 1.0, lambda));
  c.values.push_back(pi / (std::tgamma(a) * std::sin(a * pi / 2.0)));
  return c;
}

// b in (-1, 1) or (1, 3)
inline IdentityChain sin46_identity(double b, double lambda) {
  const double pi = std::numbers::pi;
  const double t = std::pow(2.0, 3.0 - b), u = std::pow(3.0, 3.0 - b);
  const double rhs_num = t * std::pow(lambda, 3.0 - b) * pi;
  IdentityChain c;
  c.name = "sin4/sin6 b=" + std::to_string(b) + " lambda=" + std::to_string(lambda);
  const double i4 = sin_power_integral(4, 4.0 - b, lambda), i6 = sin_power_integral(6, 4.0 - b, lambda);
  if (b > -1.0 && b < 1.0) {
    c.values.push_back(i4 / (std::pow(2.0, 1.0 - b) - 1.0));
    c.values.push_back(16.0 / (-15.0 + 6.0 * t - u) * i6);
    c.values.push_back(rhs_num / (4.0 * std::tgamma(4.0 - b) * std::sin((1.0 - b) * pi / 2.0)));
  } else if (b > 1.0 && b < 3.0) {
    c.values.push_back(i4 / (1.0 - std::pow(2.0, 1.0 - b)));
    c.values.push_back(16.0 / (15.0 - 6.0 * t + u) * i6);
    c.values.push_back(rhs_num / (4.0 * std::tgamma(4.0 - b) * std::sin((3.0 - b) * pi / 2.0)));
  } else {
    throw Error(Errc::domain, "sin46_identity: b outside (-1, 1) and (1, 3)");
  }
  return c;
}

// int_0^pi f(x) sin^j(m x / 2) / sin^2(x / 2) dx
inline double spectral_kernel_integral(const SpectralModel& model, int j, double m) {
  auto f = [&](double x) {
    if (x <= 1e-100) return 0.0;
    const double sm = std::sin(0.5 * m * x), q = sm / std::sin(0.5 * x);
    return spectral_density(model, x) * q * q * std::pow(sm, j - 2);
  };
  const double pi = std::numbers::pi;
  return detail::panels(f, 0.0, pi, std::min(pi, pi / m), true, 16);
}

inline double rm_vm_ratio(const SpectralModel& model, double m) {
  model.validate();
  if (!(m >= 1.0)) throw Error(Errc::domain, "rm_vm_ratio: m must be >= 1");
  const double i4 = spectral_kernel_integral(model, 4, m);
  const double i6 = spectral_kernel_integral(model, 6, m);
  if (!(i4 > 0.0) || !std::isfinite(i6)) throw Error(Errc::numeric, "rm_vm_ratio: quadrature failed");
  return std::clamp(1.0 - 2.0 * i6 / i4, -1.0, 1.0);
}

inline double expected_ir(const SpectralModel& model, double m) { return lambda(rm_vm_ratio(model, m)); }

// 1 - 2 J_6(2 - 2d, m) / J_4(2 - 2d, m), which tends to rho(d)
inline double step1_ratio(double d, double m) {
  const double a = 2.0 - 2.0 * d;
  return 1.0 - 2.0 * j_integral(6, a, m) / j_integral(4, a, m);
}

enum class Regime { below, boundary_low, middle, boundary_high, other };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::below: return "beta<2d-1";
    case Regime::boundary_low: return "beta=2d-1";
    case Regime::middle: return "2d-1<beta<2d+1";
    case Regime::boundary_high: return "beta=2d+1";
    case Regime::other: return "other";
  }
  return "?";
}

inline Regime regime(double d, double beta) {
  const double lo = 2.0 * d - 1.0, hi = 2.0 * d + 1.0;
  if (beta < lo) return Regime::below;
  if (beta == lo) return Regime::boundary_low;
  if (beta < hi) return Regime::middle;
  if (beta == hi) return Regime::boundary_high;
  return Regime::other;
}

struct ExpansionReport {
  double d = 0.0, beta = 0.0;
  Regime regime = Regime::other;
  std::vector<double> m, expected, bias;
  double slope = 0.0;     // fitted d log|bias| / d log m over the last decade
  double constant = 0.0;  // signed K with bias ~ K m^slope
  double predicted = 0.0;
  bool numerically_zero = false;
};

// log-spaced grid from lo to hi with `per_octave` points per doubling
inline std::vector<double> log_grid(double lo, double hi, int per_octave) {
  std::vector<double> g;
  for (int k = 0;; ++k) {
    const double v = lo * std::pow(2.0, static_cast<double>(k) / per_octave);
    if (v > hi * (1.0 + 1e-12)) break;
    g.push_back(v);
  }
  return g;
}

inline ExpansionReport bias_rate_check(const SpectralModel& model, double beta, const std::vector<double>& mgrid) {
  if (mgrid.size() < 4) throw Error(Errc::domain, "bias_rate_check: need at least 4 scales");
  ExpansionReport r;
  r.d = model.memory();
  r.beta = beta;
  r.regime = regime(r.d, beta);
  r.predicted = r.regime == Regime::boundary_high ? -(2.0 * r.d + 1.0) : -std::min(beta, 2.0 * r.d + 1.0);
  const double l0 = lambda0(r.d);
  for (double m : mgrid) {
    const double e = expected_ir(model, m);
    r.m.push_back(m);
    r.expected.push_back(e);
    r.bias.push_back(e - l0);
  }
  const double top = mgrid.back();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t k = 0; k < r.m.size(); ++k) {
    if (r.m[k] < top / 10.0 * (1.0 - 1e-12)) continue;
    if (std::abs(r.bias[k]) < 1e-12) {
      r.numerically_zero = true;
      continue;
    }
    const double x = std::log(r.m[k]), y = std::log(std::abs(r.bias[k]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) {
    r.numerically_zero = true;
    return r;
  }
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - r.slope * sx) / n;
  r.constant = std::exp(icpt) * (r.bias.back() < 0.0 ? -1.0 : 1.0);
  return r;
}

}  // namespace mir::theory
