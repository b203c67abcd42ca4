#pragma once

// Table of numerical identity checks run by `mir verify`.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "mir/lambda.hpp"
#include "mir/theory.hpp"

namespace mir {

struct CheckRow {
  std::string name;
  double measured = 0.0;
  double target = 0.0;
  double error = 0.0;  // absolute or relative, see `relative`
  double tol = 0.0;
  bool relative = false;
  bool pass = false;
};

namespace detail {

inline CheckRow make_check(std::string name, double measured, double target, double tol, bool relative) {
  CheckRow r;
  r.name = std::move(name);
  r.measured = measured;
  r.target = target;
  r.tol = tol;
  r.relative = relative;
  r.error = relative ? std::abs(measured / target - 1.0) : std::abs(measured - target);
  r.pass = std::isfinite(r.error) && r.error <= tol;
  return r;
}

// 1 - 2 I6 / I4 with the differenced density and sin^4 denominators
inline double rm_vm_ratio_differenced(const SpectralModel& model, double m) {
  auto integral = [&](int j) {
    auto f = [&](double x) {
      if (x <= 1e-100) return 0.0;
      const double s2 = std::sin(0.5 * x), sm = std::sin(0.5 * m * x), q = sm / s2;
      const double fu = 4.0 * s2 * s2 * spectral_density(model, x);
      return fu * q * q * q * q * std::pow(sm, j - 4);
    };
    const double pi = std::numbers::pi;
    return theory::detail::panels(f, 0.0, pi, std::min(pi, pi / m), true, 16);
  };
  return 1.0 - 2.0 * integral(6) / integral(4);
}

}  // namespace detail

// `quick` drops the bias-rate fits, which dominate the run time
inline std::vector<CheckRow> verification_suite(bool quick = false) {
  using namespace theory;
  using mir::detail::make_check;
  const double pi = std::numbers::pi;
  std::vector<CheckRow> rows;

  for (double a : {0.5, 1.0, 1.5})
    for (double l : {1.0, 2.0}) {
      const IdentityChain c = sine_identity(a, l);
      rows.push_back(make_check("identity " + c.name, c.spread(), 0.0, 1e-6, false));
    }
  for (double b : {-0.5, 0.0, 0.5, 1.5, 2.5}) {
    const IdentityChain c = sin46_identity(b, 1.0);
    rows.push_back(make_check("identity " + c.name, c.spread(), 0.0, 1e-6, false));
  }
  rows.push_back(make_check("int sin^4 x / x^4 = pi/3", sin_power_integral(4, 4.0, 1.0), pi / 3.0, 1e-6, true));
  rows.push_back(make_check("J4(0, 1) = pi", j_integral(4, 0.0, 1.0), pi, 1e-10, true));

  for (double a : {-0.5, 0.0, 0.5}) {
    const double m = 1e4;
    rows.push_back(make_check("J4(" + std::to_string(a) + ", 1e4) m^(a-3) / C41", j_integral(4, a, m) * std::pow(m, a - 3.0),
                              C41(a), 1e-2, true));
    rows.push_back(make_check("J6(" + std::to_string(a) + ", 1e4) m^(a-3) / C61", j_integral(6, a, m) * std::pow(m, a - 3.0),
                              C61(a), 1e-2, true));
  }
  // the log coefficient at a = 3, read off as the slope in log m over a decade
  rows.push_back(make_check("dJ4(3, m) / dlog m on [1e4, 1e5] = C'42(3)",
                            (j_integral(4, 3.0, 1e5) - j_integral(4, 3.0, 1e4)) / std::log(10.0), Cp42(3.0), 5e-2, true));
  rows.push_back(make_check("dJ6(3, m) / dlog m on [1e4, 1e5] = C'62(3)",
                            (j_integral(6, 3.0, 1e5) - j_integral(6, 3.0, 1e4)) / std::log(10.0), Cp62(3.0), 5e-2, true));

  for (double d : {0.6, 0.9, 1.2}) {
    const double a = 2.0 - 2.0 * d;
    rows.push_back(make_check("1 - 2 C61/C41 at d=" + std::to_string(d), 1.0 - 2.0 * C61(a) / C41(a), rho(d), 1e-9, false));
  }
  for (double d : {0.6, 0.8, 1.0, 1.2})
    rows.push_back(make_check("1 - 2 J6/J4 at m=1e3, d=" + std::to_string(d), step1_ratio(d, 1e3), rho(d), 1e-3, false));

  const SpectralModel wn = SpectralModel::arfima(0.0);
  rows.push_back(make_check("R/V^2 white noise m=500", rm_vm_ratio(wn, 500.0), rho(0.0), 1e-3, false));
  rows.push_back(make_check("R/V^2 arfima d=0.8 m=200", rm_vm_ratio(SpectralModel::arfima(0.8), 200.0), rho(0.8), 1e-2, false));
  rows.push_back(make_check("E[IR] white noise m=50", expected_ir(wn, 50.0), lambda(-0.5), 1e-3, false));
  {
    const SpectralModel m = SpectralModel::arfima(0.3, {-0.5});
    rows.push_back(make_check("R/V^2 sin^2 form = differenced sin^4 form", rm_vm_ratio(m, 40.0),
                              mir::detail::rm_vm_ratio_differenced(m, 40.0), 1e-10, false));
  }
  if (!quick) {
    const std::vector<double> grid = log_grid(100.0, 3200.0, 4);
    const ExpansionReport r1 = bias_rate_check(SpectralModel::powerlaw(0.8, 5.0, 0.5), 0.5, grid);
    rows.push_back(make_check("bias slope powerlaw(0.8, 5, 0.5)", r1.slope, -0.5, 0.15, false));
    const ExpansionReport r2 = bias_rate_check(SpectralModel::arfima(0.9), 2.0, grid);
    rows.push_back(make_check("bias slope arfima(0.9)", r2.slope, -2.0, 0.3, false));
  }
  return rows;
}

inline void print_checks(const std::vector<CheckRow>& rows, std::ostream& os) {
  size_t w = 4;
  for (const auto& r : rows) w = std::max(w, r.name.size());
  for (const auto& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-14.8g %-14.8g %-10.3g %-8.2g %s", r.measured, r.target, r.error, r.tol,
                  r.pass ? "PASS" : "FAIL");
    os << r.name << std::string(w - r.name.size(), ' ') << buf << '\n';
  }
}

}  // namespace mir
