#pragma once

// Autocovariances and exact Gaussian simulation by circulant embedding.
// Convention: gamma(k) = int_{-pi}^{pi} f(l) cos(k l) dl, white noise f = var / (2 pi).

#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <fftw3.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mir/error.hpp"
#include "mir/model.hpp"
#include "mir/quadrature.hpp"

namespace mir {

struct Provenance {
  std::string model;
  std::uint64_t seed = 0;
};

struct SeriesSample {
  std::vector<double> values;
  std::optional<Provenance> provenance;

  SeriesSample() = default;
  explicit SeriesSample(std::vector<double> v, std::optional<Provenance> p = std::nullopt)
      : values(std::move(v)), provenance(std::move(p)) {
    validate();
  }

  size_t size() const { return values.size(); }
  double operator[](size_t t) const { return values[t]; }

  void validate() const {
    if (values.empty()) throw Error(Errc::too_short, "series is empty");
    for (size_t t = 0; t < values.size(); ++t)
      if (!std::isfinite(values[t])) throw Error(Errc::domain, "series value " + std::to_string(t + 1) + " is not finite");
  }
};

// spectral density of the model as written (not integrable at 0 when d >= 1/2)
inline double spectral_density(const SpectralModel& m, double l) {
  const double al = std::abs(l);
  switch (m.kind) {
    case ModelKind::arfima: {
      const std::complex<double> z = std::polar(1.0, -al);
      std::complex<double> ph = 1.0, th = 1.0, zk = 1.0;
      for (double a : m.ar) {
        zk *= z;
        ph += a * zk;
      }
      zk = 1.0;
      for (double b : m.ma) {
        zk *= z;
        th += b * zk;
      }
      const double two_sin = 2.0 * std::sin(0.5 * al);
      return m.var / (2.0 * std::numbers::pi) * std::norm(th) / std::norm(ph) * std::pow(two_sin, -2.0 * m.d);
    }
    case ModelKind::fgn: {
      const double H = m.hurst, a = 2.0 * H + 1.0, tp = 2.0 * std::numbers::pi;
      double s = 0.0;
      constexpr int J = 200;
      for (int j = 1; j <= J; ++j) s += std::pow(tp * j + al, -a) + std::pow(tp * j - al, -a);
      // remaining terms by their integral from J + 1/2
      const double x = tp * (J + 0.5);
      s += (std::pow(x + al, 1.0 - a) + std::pow(x - al, 1.0 - a)) / (tp * (a - 1.0));
      // the j = 0 term as (2 sin^2(l/2) / l^2) l^{2-a}, finite as l -> 0
      const double sh = std::sin(0.5 * al), two_sin2 = 2.0 * sh * sh;
      const double ratio = al < 1e-4 ? 0.5 * (1.0 - al * al / 12.0) : two_sin2 / (al * al);
      const double lead = ratio * std::pow(al, 2.0 - a);
      return std::sin(std::numbers::pi * H) * std::tgamma(a) / std::numbers::pi * (lead + two_sin2 * s);
    }
    case ModelKind::powerlaw:
      return std::pow(al, -2.0 * m.d) * (1.0 + m.c1 * std::pow(al, m.beta));
  }
  return 0.0;
}

namespace detail {

inline void require_stationary(const SpectralModel& m) {
  if (m.memory() >= 0.5) throw Error(Errc::domain, "autocovariance: model is not stationary (d >= 0.5)");
}

// gamma(0..n) of (1 - B)^{-d} eps with unit innovation variance
inline std::vector<double> fi_autocovariance(double d, size_t n) {
  std::vector<double> g(n + 1);
  g[0] = std::exp(std::lgamma(1.0 - 2.0 * d) - 2.0 * std::lgamma(1.0 - d));
  for (size_t k = 1; k <= n; ++k) g[k] = g[k - 1] * (k - 1.0 + d) / (k - d);
  return g;
}

// autocovariance of the ARMA part, c(h) for h = 0..H
inline std::vector<double> arma_autocovariance(const SpectralModel& m) {
  std::vector<double> psi{1.0};
  double peak = 1.0;
  int quiet = 0;
  for (size_t k = 1; k < 200000 && quiet < 20; ++k) {
    double v = k <= m.ma.size() ? m.ma[k - 1] : 0.0;
    for (size_t l = 1; l <= m.ar.size() && l <= k; ++l) v -= m.ar[l - 1] * psi[k - l];
    psi.push_back(v);
    peak = std::max(peak, std::abs(v));
    quiet = (std::abs(v) < 1e-18 * peak && k > m.ma.size()) ? quiet + 1 : 0;
  }
  const size_t K = psi.size();
  std::vector<double> c(K);
  for (size_t h = 0; h < K; ++h) {
    double s = 0.0;
    for (size_t k = 0; k + h < K; ++k) s += psi[k] * psi[k + h];
    c[h] = m.var * s;
  }
  return c;
}

// int_0^1 t^s cos(w t) dt, s > -1
inline double power_cos_moment(double s, double w) {
  if (w == 0.0) return 1.0 / (s + 1.0);
  if (w < 100.0) {
    // panels of less than half a period; the first carries the endpoint singularity
    const int panels = static_cast<int>(std::ceil(w / std::numbers::pi)) + 1;
    const double h = 1.0 / panels;
    auto f = [s, w](double t) { return t > 0.0 ? std::pow(t, s) * std::cos(w * t) : (s == 0.0 ? 1.0 : 0.0); };
    boost::math::quadrature::tanh_sinh<double> ts;
    double total = ts.integrate(f, 0.0, h);
    for (int p = 1; p < panels; ++p) total += quad::gl(f, p * h, (p + 1) * h, 24);
    return total;
  }
  // int_0^inf minus the integration-by-parts tail from 1
  using C = std::complex<double>;
  const C I(0.0, 1.0);
  C full = std::exp(std::lgamma(s + 1.0)) * std::exp(I * (std::numbers::pi * 0.5 * (s + 1.0))) * std::pow(w, -s - 1.0);
  C sum = 0.0, term = 1.0 / (I * w);
  for (int n = 0; n < 400; ++n) {
    sum += term;
    const C next = term * (-(s - n)) / (I * w);
    if (std::abs(next) < 1e-18 * std::abs(sum) || std::abs(next) > std::abs(term)) break;
    term = next;
  }
  return (full + std::exp(I * w) * sum).real();
}

}  // namespace detail

// gamma(0..maxlag) for a stationary model (memory < 1/2), exact where possible
inline std::vector<double> autocovariance(const SpectralModel& m, size_t maxlag) {
  m.validate(true);
  detail::require_stationary(m);
  std::vector<double> g(maxlag + 1);
  switch (m.kind) {
    case ModelKind::fgn: {
      const double h2 = 2.0 * m.hurst;
      for (size_t k = 0; k <= maxlag; ++k) {
        const double x = static_cast<double>(k);
        g[k] = 0.5 * (std::pow(x + 1.0, h2) + std::pow(std::abs(x - 1.0), h2) - 2.0 * std::pow(x, h2));
      }
      return g;
    }
    case ModelKind::powerlaw: {
      const double pi = std::numbers::pi;
      const double s0 = -2.0 * m.d, s1 = m.beta - 2.0 * m.d;
      for (size_t k = 0; k <= maxlag; ++k) {
        const double w = pi * static_cast<double>(k);
        double v = 2.0 * std::pow(pi, s0 + 1.0) * detail::power_cos_moment(s0, w);
        if (m.c1 != 0.0) v += m.c1 * 2.0 * std::pow(pi, s1 + 1.0) * detail::power_cos_moment(s1, w);
        g[k] = v;
      }
      return g;
    }
    case ModelKind::arfima: {
      if (m.ar.empty() && m.ma.empty()) {
        g = detail::fi_autocovariance(m.d, maxlag);
        for (double& v : g) v *= m.var;
        return g;
      }
      // gamma_X = c_ARMA * gamma_FI (convolution over the two-sided lag)
      const std::vector<double> c = detail::arma_autocovariance(m);
      const size_t H = c.size() - 1;
      const std::vector<double> fi = detail::fi_autocovariance(m.d, maxlag + H);
      for (size_t k = 0; k <= maxlag; ++k) {
        double s = c[0] * fi[k];
        for (size_t h = 1; h <= H; ++h) {
          const size_t lo = k >= h ? k - h : h - k;
          s += c[h] * (fi[lo] + fi[k + h]);
        }
        g[k] = s;
      }
      return g;
    }
  }
  return g;
}

// gamma(k) by adaptive quadrature of the spectral density; independent route
inline std::vector<double> autocovariance_quadrature(const SpectralModel& m, size_t maxlag) {
  m.validate(true);
  detail::require_stationary(m);
  std::vector<double> g(maxlag + 1);
  boost::math::quadrature::tanh_sinh<double> ts(15);
  for (size_t k = 0; k <= maxlag; ++k) {
    auto f = [&](double l) { return l > 0.0 ? spectral_density(m, l) * std::cos(k * l) : 0.0; };
    const int panels = static_cast<int>(k) + 1;
    const double h = std::numbers::pi / panels;
    double err = 0.0;
    double total = ts.integrate(f, 0.0, h, 1e-12, &err);
    if (!(err <= 1e-6 * std::max(1.0, std::abs(total)))) throw Error(Errc::numeric, "autocovariance quadrature did not converge");
    for (int p = 1; p < panels; ++p) {
      double e2 = 0.0;
      total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, p * h, (p + 1) * h, 12, 1e-12, &e2);
    }
    g[k] = 2.0 * total;
  }
  return g;
}

struct EmbeddingInfo {
  size_t size = 0;              // circulant length
  int doublings = 0;            // beyond the first power of two >= 2n
  double min_ratio = 0.0;       // smallest eigenvalue over the largest, before clipping
  double clipped_fraction = 0.0;  // clipped negative mass over total mass
  bool clipped = false;
};

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

struct FftwBuffer {
  fftw_complex* p = nullptr;
  explicit FftwBuffer(size_t n) : p(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!p) throw Error(Errc::numeric, "fftw_malloc failed");
  }
  ~FftwBuffer() { fftw_free(p); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

// in-place forward DFT
inline void dft(fftw_complex* data, size_t n) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}
}  // namespace detail

// precomputes the circulant spectrum for (model, N); draw() is const and thread safe
class CirculantSampler {
 public:
  CirculantSampler(const SpectralModel& model, size_t N) : model_(model), N_(N) {
    model.validate();
    if (N < 2) throw Error(Errc::too_short, "simulate: N must be >= 2");
    const SpectralModel st = model.stationary_form();
    size_t M = 1;
    while (M < 2 * N) M <<= 1;
    const size_t cap = std::max<size_t>(8 * N, M);
    for (;;) {
      const std::vector<double> g = autocovariance(st, M / 2);
      detail::FftwBuffer buf(M);
      for (size_t k = 0; k < M; ++k) {
        const size_t lag = k <= M / 2 ? k : M - k;
        buf.p[k][0] = g[lag];
        buf.p[k][1] = 0.0;
      }
      detail::dft(buf.p, M);
      eig_.assign(M, 0.0);
      double lmax = 0.0, lmin = 0.0;
      for (size_t k = 0; k < M; ++k) {
        eig_[k] = buf.p[k][0];
        lmax = std::max(lmax, eig_[k]);
        lmin = std::min(lmin, eig_[k]);
      }
      info_.size = M;
      info_.min_ratio = lmin / lmax;
      if (lmin >= -1e-8 * lmax) break;
      if (2 * M > cap) {
        double neg = 0.0, tot = 0.0;
        for (double& v : eig_) {
          tot += std::abs(v);
          if (v < 0.0) {
            neg -= v;
            v = 0.0;
          }
        }
        info_.clipped = true;
        info_.clipped_fraction = neg / tot;
        break;
      }
      M <<= 1;
      ++info_.doublings;
    }
    for (double& v : eig_) v = std::sqrt(std::max(v, 0.0) / static_cast<double>(eig_.size()));
  }

  const EmbeddingInfo& info() const { return info_; }
  size_t length() const { return N_; }

  SeriesSample draw(std::uint64_t seed) const {
    const size_t M = eig_.size();
    detail::FftwBuffer buf(M);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    for (size_t k = 0; k < M; ++k) {
      const double a = nd(gen), b = nd(gen);
      buf.p[k][0] = eig_[k] * a;
      buf.p[k][1] = eig_[k] * b;
    }
    detail::dft(buf.p, M);
    std::vector<double> x(N_);
    for (size_t t = 0; t < N_; ++t) x[t] = buf.p[t][0];
    if (model_.integrated()) {
      double s = 0.0;
      for (double& v : x) {
        s += v;
        v = s;
      }
    }
    return SeriesSample(std::move(x), Provenance{model_.to_string(), seed});
  }

 private:
  SpectralModel model_;
  size_t N_;
  std::vector<double> eig_;
  EmbeddingInfo info_;
};

inline SeriesSample simulate(const SpectralModel& model, size_t N, std::uint64_t seed) {
  return CirculantSampler(model, N).draw(seed);
}

}  // namespace mir
