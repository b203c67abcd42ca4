#pragma once

// Covariances of the limit process Z_d and the asymptotic covariance
// sigma_ij(d) of the normalized IR vector.
//
// Z_d^{(j)}(u) is the lag-j second difference of a self-similar Gaussian
// process G with generalized covariance built on K(x) = x^2 |x|^{2e} / c(e),
// e = d - 1/2.  The same kernel works on both sides of d = 1/2 (second
// differences kill the x^2 term), so
//   Cov(Z_i(u), Z_j(v)) = sum_{a,b in 0..2} w_a w_b K(u + a i - v - b j),
// with w = (1, -2, 1) and K normalized so that Var Z_1 = 1.
//
// The "unit" window keeps the increment averaging window at 1 for every
// scale (the D / h closed forms).  It agrees with the matched window for
// d < 1/2 and for i = j = 1, and differs for larger scales when d >= 1/2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mir/error.hpp"
#include "mir/lambda.hpp"
#include "mir/quadrature.hpp"

namespace mir {

enum class ZWindow { matched, unit };
enum class InnerMethod { angular, gauss_hermite, monte_carlo };

inline const char* to_string(ZWindow w) { return w == ZWindow::matched ? "matched" : "unit"; }
inline const char* to_string(InnerMethod m) {
  switch (m) {
    case InnerMethod::angular: return "angular";
    case InnerMethod::gauss_hermite: return "gauss-hermite";
    case InnerMethod::monte_carlo: return "monte-carlo";
  }
  return "?";
}

struct QuadratureSettings {
  InnerMethod inner = InnerMethod::angular;
  ZWindow window = ZWindow::matched;
  int angular_order = 12;  // nodes per half panel; raised near degenerate 4x4 covariances
  int gh_order = 24;
  long mc_samples = 200000;
  std::uint64_t mc_seed = 20240601;
  int tau_nodes = 12;         // Legendre nodes per unit panel across the overlap region
  double tail_extent = 4096;  // geometric panels reach this many times max(i, j)

  std::string describe() const {
    std::ostringstream os;
    os << "inner=" << to_string(inner) << " window=" << to_string(window)
       << " angular_order=" << angular_order << " gh_order=" << gh_order
       << " mc_samples=" << mc_samples << " mc_seed=" << mc_seed << " tau_nodes=" << tau_nodes
       << " tail_extent=" << tail_extent;
    return os.str();
  }

  void validate() const {
    if (angular_order < 4) throw Error(Errc::config, "angular_order must be >= 4");
    if (gh_order < 8) throw Error(Errc::config, "gh_order must be >= 8");
    if (mc_samples < 1000) throw Error(Errc::config, "mc_samples must be >= 1000");
    if (tau_nodes < 2) throw Error(Errc::config, "tau_nodes must be >= 2");
    if (!(tail_extent >= 8)) throw Error(Errc::config, "tail_extent must be >= 8");
  }
};

// FNV-1a, printed as 16 hex digits
inline std::string fingerprint(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

namespace detail {

struct ZKernel {
  double eps = 0.0;
  double scale = 0.0;
  bool at_half = false;

  explicit ZKernel(double d) : eps(d - 0.5) {
    at_half = std::abs(eps) < kRhoHalfEps;
    scale = at_half ? 1.0 / (8.0 * std::numbers::ln2) : 1.0 / (8.0 * std::expm1(eps * std::log(4.0)));
  }

  // x^2 (|x|^{2e} - 1) / (8 (4^e - 1)), and x^2 log|x| / (8 log 2) at e = 0
  double operator()(double x) const {
    const double ax = std::abs(x);
    if (ax == 0.0) return 0.0;
    const double lg = std::log(ax);
    if (at_half) return x * x * lg * scale;
    return x * x * std::expm1(2.0 * eps * lg) * scale;
  }

  double second_diff(double x) const { return (*this)(x + 1.0) - 2.0 * (*this)(x) + (*this)(x - 1.0); }
};

// a weighted set of kernel evaluations sum_k wt_k K(x + off_k).  far from the
// offsets the direct sum cancels catastrophically, so it switches to the
// binomial series of |x_c + delta|^{2+2e} in the even moments of the offsets
// (moments of order < 4 vanish for every second-difference stencil).
struct Stencil {
  std::vector<double> wt, off;
  double center = 0.0, reach = 0.0;
  std::vector<double> coef;  // coef[n] = scale binom(2 + 2e, n) M_n for even n >= 4
  ZKernel K;

  Stencil(const ZKernel& k, std::vector<double> w, std::vector<double> o) : wt(std::move(w)), off(std::move(o)), K(k) {
    const auto [lo, hi] = std::minmax_element(off.begin(), off.end());
    center = 0.5 * (*lo + *hi);
    reach = 0.5 * (*hi - *lo);
    const double e = K.eps;
    const double r = K.at_half ? 1.0 / (4.0 * std::log(4.0)) : 2.0 * e / (8.0 * std::expm1(e * std::log(4.0)));
    coef.assign(41, 0.0);
    // running scale * binom(gamma, n); the factor (gamma - 2) = 2e is folded into r
    double sb = (2.0 + 2.0 * e) * (1.0 + 2.0 * e) * r / 6.0;
    for (int n = 4; n <= 40; ++n) {
      sb *= (2.0 + 2.0 * e - (n - 1)) / n;
      if (n % 2) continue;
      double M = 0.0;
      for (size_t t = 0; t < off.size(); ++t) M += wt[t] * std::pow(off[t] - center, n);
      coef[n] = sb * M;
    }
  }

  double operator()(double x) const {
    const double xc = x + center;
    const double ax = std::abs(xc);
    if (ax > 4.0 * reach && reach > 0.0) {
      const double lg = std::log(ax);
      const double g = K.at_half ? 2.0 : 2.0 + 2.0 * K.eps;
      double s = 0.0;
      const double inv2 = 1.0 / (ax * ax);
      double pw = std::exp((g - 4.0) * lg);
      for (int n = 4; n <= 40; n += 2) {
        const double t = coef[n] * pw;
        s += t;
        if (std::abs(t) < 1e-18 * std::abs(s)) break;
        pw *= inv2;
      }
      return s;
    }
    double s = 0.0;
    for (size_t t = 0; t < off.size(); ++t) s += wt[t] * K(x + off[t]);
    return s;
  }
};

// stencil of Cov(Z_i(u), Z_j(v)) in x = u - v
inline Stencil z_stencil(const ZKernel& K, ZWindow window, double i, double j) {
  std::vector<double> w, o;
  const bool unit = window == ZWindow::unit && K.eps > -kRhoHalfEps;
  if (!unit) {
    static constexpr double c[3] = {1.0, -2.0, 1.0};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        w.push_back(c[a] * c[b]);
        o.push_back(a * i - b * j);
      }
  } else {
    const double outer_off[4] = {i, -j, i - j, 0.0};
    const double outer_wt[4] = {1.0, 1.0, -1.0, -1.0};
    static constexpr double c[3] = {1.0, -2.0, 1.0};
    for (int t = 0; t < 4; ++t)
      for (int s = -1; s <= 1; ++s) {
        w.push_back(outer_wt[t] * c[s + 1]);
        o.push_back(outer_off[t] + s);
      }
  }
  return Stencil(K, std::move(w), std::move(o));
}

inline double z_cov_kernel(const ZKernel& K, ZWindow window, double i, double j, double u, double v) {
  return z_stencil(K, window, i, j)(u - v);
}

}  // namespace detail

// Cov(Z_d^{(i)}(u), Z_d^{(j)}(v))
inline double z_cov(double d, double i, double j, double u, double v, ZWindow window = ZWindow::matched) {
  if (!(d > -0.5 && d < 1.25)) throw Error(Errc::domain, "z_cov: d outside (-0.5, 1.25)");
  if (!(i >= 1 && j >= 1)) throw Error(Errc::domain, "z_cov: scales must be >= 1");
  return detail::z_cov_kernel(detail::ZKernel(d), window, i, j, u, v);
}

// psi(x, y) = |x + y| / (|x| + |y|), 0/0 read as 1
inline double psi(double x, double y) {
  const double den = std::abs(x) + std::abs(y);
  return den > 0.0 ? std::abs(x + y) / den : 1.0;
}

namespace detail {

// nodes on (pi/2, pi) split at the kink 3pi/4; outside this arc 1 - psi vanishes
struct ArcNodes {
  std::vector<double> w, k, c, s;
};

inline const ArcNodes& arc_nodes(int n) {
  static std::map<int, std::unique_ptr<ArcNodes>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;
  auto out = std::make_unique<ArcNodes>();
  const quad::Rule& r = quad::legendre(n);
  const double pi = std::numbers::pi;
  for (int half = 0; half < 2; ++half) {
    const double a = pi / 2 + half * pi / 4, b = a + pi / 4;
    for (int q = 0; q < n; ++q) {
      const double th = 0.5 * (a + b) + 0.5 * (b - a) * r.x[q];
      const double c = std::cos(th), s = std::sin(th);
      out->w.push_back(0.5 * (b - a) * r.w[q]);
      out->k.push_back(2.0 * std::min(std::abs(c), std::abs(s)) / (std::abs(c) + std::abs(s)));
      out->c.push_back(c);
      out->s.push_back(s);
    }
  }
  return *cache.emplace(n, std::move(out)).first->second;
}

// sum over the four sign choices of the radial integral, with r = b / sqrt(ac):
// 2 (1 + r asin r / sqrt(1 - r^2)) / (1 - r^2)
inline double radial_fold(double r) {
  const double q = 1.0 - r * r;
  if (q <= 0.0) return 1e300;
  return 2.0 * (1.0 + r * std::asin(r) / std::sqrt(q)) / q;
}

inline Eigen::Matrix4d pair_correlation(const Eigen::Matrix4d& S) {
  // one scale per pair keeps psi unchanged
  const double s1 = 1.0 / std::sqrt(S(0, 0)), s2 = 1.0 / std::sqrt(S(2, 2));
  const Eigen::Vector4d g(s1, s1, s2, s2);
  return g.asDiagonal() * S * g.asDiagonal();
}

inline Eigen::LLT<Eigen::Matrix4d> factor_or_throw(Eigen::Matrix4d& R) {
  Eigen::LLT<Eigen::Matrix4d> llt(R);
  if (llt.info() != Eigen::Success) {
    R.diagonal().array() += 1e-10;
    llt.compute(R);
    if (llt.info() != Eigen::Success)
      throw Error(Errc::not_pd, "psi covariance: 4x4 covariance is not positive semidefinite");
  }
  return llt;
}

// Cov(psi(X1, X2), psi(X3, X4)) by integrating the folded angular density of
// the two pair directions; the radial parts integrate in closed form.
inline double psi_cov_angular(const Eigen::Matrix4d& S, int base_order) {
  Eigen::Matrix4d R = pair_correlation(S);
  auto llt = factor_or_throw(R);
  const Eigen::Matrix4d P = llt.solve(Eigen::Matrix4d::Identity());
  double sqrt_det = 1.0;
  for (int t = 0; t < 4; ++t) sqrt_det *= llt.matrixL()(t, t);

  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(R, Eigen::EigenvaluesOnly).eigenvalues()(0);
  int n = base_order;
  if (lmin < 1e-2) n *= 2;
  if (lmin < 1e-3) n *= 2;
  if (lmin < 1e-4) n *= 2;
  if (lmin < 1e-5) n *= 2;
  const ArcNodes& A = arc_nodes(n);
  const size_t m = A.w.size();

  const double r1 = R(0, 1), r2 = R(2, 3);
  std::vector<double> ia(m), ic(m), al(m), ga(m), v1(m), v2(m);
  double e1 = 0.0, e2 = 0.0;
  for (size_t q = 0; q < m; ++q) {
    const double c = A.c[q], s = A.s[q];
    const double a = P(0, 0) * c * c + 2.0 * P(0, 1) * c * s + P(1, 1) * s * s;
    const double cc = P(2, 2) * c * c + 2.0 * P(2, 3) * c * s + P(3, 3) * s * s;
    ia[q] = 1.0 / std::sqrt(a);
    ic[q] = 1.0 / std::sqrt(cc);
    al[q] = A.w[q] * A.k[q] / a;
    ga[q] = A.w[q] * A.k[q] / cc;
    v1[q] = P(0, 2) * c + P(1, 2) * s;
    v2[q] = P(0, 3) * c + P(1, 3) * s;
    // marginal folded angle density 1 / (pi sqrt(det) u' S^-1 u)
    const double m1 = (1.0 - 2.0 * r1 * c * s) / (1.0 - r1 * r1);
    const double m2 = (1.0 - 2.0 * r2 * c * s) / (1.0 - r2 * r2);
    e1 += A.w[q] * A.k[q] / (std::numbers::pi * std::sqrt(1.0 - r1 * r1) * m1);
    e2 += A.w[q] * A.k[q] / (std::numbers::pi * std::sqrt(1.0 - r2 * r2) * m2);
  }
  double joint = 0.0;
  for (size_t p = 0; p < m; ++p) {
    double row = 0.0;
    const double x1 = v1[p] * ia[p], x2 = v2[p] * ia[p];
    for (size_t q = 0; q < m; ++q) {
      const double rr = (x1 * A.c[q] + x2 * A.s[q]) * ic[q];
      row += ga[q] * radial_fold(rr);
    }
    joint += al[p] * row;
  }
  joint *= 2.0 / (4.0 * std::numbers::pi * std::numbers::pi * sqrt_det);
  return joint - e1 * e2;
}

// Var psi(X1, X2) for a pair with correlation r: the tau -> 0 limit for i = j
inline double psi_var_angular(double r, int order) {
  const ArcNodes& A = arc_nodes(order);
  double e = 0.0, e2 = 0.0;
  for (size_t q = 0; q < A.w.size(); ++q) {
    const double m = (1.0 - 2.0 * r * A.c[q] * A.s[q]) / (1.0 - r * r);
    const double dens = 1.0 / (std::numbers::pi * std::sqrt(1.0 - r * r) * m);
    e += A.w[q] * A.k[q] * dens;
    e2 += A.w[q] * A.k[q] * A.k[q] * dens;
  }
  return e2 - e * e;
}

inline double min_pair_eigen(const Eigen::Matrix4d& S) {
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(pair_correlation(S), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

// a fixed rotation of the standard normal frame; the plain tensor grid puts
// whole node lines on the kinks of psi and is biased.  it acts within the
// (z1, z2) and (z3, z4) blocks only, so with the lower Cholesky factor the grid
// still factorizes when the pairs are independent and the covariance is exactly 0
inline const Eigen::Matrix4d& gh_rotation() {
  static const Eigen::Matrix4d Q = [] {
    const double a = 0.37, b = 1.13;
    Eigen::Matrix4d R = Eigen::Matrix4d::Zero();
    R(0, 0) = R(1, 1) = std::cos(a);
    R(0, 1) = -std::sin(a);
    R(1, 0) = std::sin(a);
    R(2, 2) = R(3, 3) = std::cos(b);
    R(2, 3) = -std::sin(b);
    R(3, 2) = std::sin(b);
    return R;
  }();
  return Q;
}

inline double psi_cov_gauss_hermite(const Eigen::Matrix4d& S, int order) {
  Eigen::Matrix4d R = pair_correlation(S);
  auto llt = factor_or_throw(R);
  const Eigen::Matrix4d L = Eigen::Matrix4d(llt.matrixL()) * gh_rotation();
  const quad::Rule& g = quad::hermite_prob(order);
  const int n = order;
  double e12 = 0.0, e1 = 0.0, e2 = 0.0;
  for (int a = 0; a < n; ++a) {
    const Eigen::Vector4d ya = L.col(0) * g.x[a];
    for (int b = 0; b < n; ++b) {
      const Eigen::Vector4d yb = ya + L.col(1) * g.x[b];
      const double wab = g.w[a] * g.w[b];
      for (int c = 0; c < n; ++c) {
        const Eigen::Vector4d yc = yb + L.col(2) * g.x[c];
        const double wabc = wab * g.w[c];
        for (int e = 0; e < n; ++e) {
          const Eigen::Vector4d x = yc + L.col(3) * g.x[e];
          const double w = wabc * g.w[e];
          const double p1 = psi(x(0), x(1)), p2 = psi(x(2), x(3));
          e12 += w * p1 * p2;
          e1 += w * p1;
          e2 += w * p2;
        }
      }
    }
  }
  return e12 - e1 * e2;
}

// common random numbers: the same draws for every covariance passed in
inline const std::vector<Eigen::Vector4d>& crn_draws(long n, std::uint64_t seed) {
  static std::map<std::pair<long, std::uint64_t>, std::unique_ptr<std::vector<Eigen::Vector4d>>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, seed);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  auto v = std::make_unique<std::vector<Eigen::Vector4d>>(n);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  for (auto& z : *v)
    for (int t = 0; t < 4; ++t) z(t) = nd(gen);
  return *cache.emplace(key, std::move(v)).first->second;
}

inline double psi_cov_monte_carlo(const Eigen::Matrix4d& S, long n, std::uint64_t seed) {
  Eigen::Matrix4d R = pair_correlation(S);
  auto llt = factor_or_throw(R);
  const Eigen::Matrix4d L = llt.matrixL();
  const auto& Z = crn_draws(n, seed);
  double e12 = 0.0, e1 = 0.0, e2 = 0.0;
  for (const auto& z : Z) {
    const Eigen::Vector4d x = L * z;
    const double p1 = psi(x(0), x(1)), p2 = psi(x(2), x(3));
    e12 += p1 * p2;
    e1 += p1;
    e2 += p2;
  }
  const double inv = 1.0 / static_cast<double>(n);
  return e12 * inv - (e1 * inv) * (e2 * inv);
}

}  // namespace detail

// Cov(psi(X1, X2), psi(X3, X4)) for X ~ N(0, S), S 4x4
inline double psi_cov(const Eigen::Matrix4d& S, const QuadratureSettings& qs) {
  switch (qs.inner) {
    case InnerMethod::angular: return detail::psi_cov_angular(S, qs.angular_order);
    case InnerMethod::gauss_hermite: return detail::psi_cov_gauss_hermite(S, qs.gh_order);
    case InnerMethod::monte_carlo: return detail::psi_cov_monte_carlo(S, qs.mc_samples, qs.mc_seed);
  }
  return 0.0;
}

// the covariance of (Z_i(0), Z_i(i), Z_j(tau), Z_j(tau + j)) as a function of tau
class PairCovariance {
 public:
  PairCovariance(double d, int i, int j, ZWindow window) : i_(i), j_(j) {
    if (!(d > -0.5 && d < 1.25)) throw Error(Errc::domain, "sigma_ij: d outside (-0.5, 1.25)");
    if (i < 1 || j < 1) throw Error(Errc::domain, "sigma_ij: scales must be >= 1");
    const detail::ZKernel K(d);
    const detail::Stencil si = detail::z_stencil(K, window, i, i), sj = detail::z_stencil(K, window, j, j);
    cross_.emplace(detail::z_stencil(K, window, i, j));
    base_.setZero();
    base_(0, 0) = base_(1, 1) = si(0.0);
    base_(0, 1) = base_(1, 0) = si(-i);
    base_(2, 2) = base_(3, 3) = sj(0.0);
    base_(2, 3) = base_(3, 2) = sj(-j);
  }

  Eigen::Matrix4d at(double tau) const {
    Eigen::Matrix4d S = base_;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double c = (*cross_)(a * i_ - tau - b * j_);
        S(a, 2 + b) = S(2 + b, a) = c;
      }
    return S;
  }

 private:
  int i_, j_;
  std::optional<detail::Stencil> cross_;
  Eigen::Matrix4d base_;
};

// integral over tau of Cov(psi(Z_i(0), Z_i(i)), psi(Z_j(tau), Z_j(tau + j)))
// only the angular inner rule is noise free; the geometric tail panels
// multiply any pointwise floor (Gauss-Hermite, Monte Carlo) by their width
inline double sigma_ij(double d, int i, int j, const QuadratureSettings& qs = {}) {
  qs.validate();
  if (qs.inner != InnerMethod::angular)
    throw Error(Errc::config, std::string("sigma_ij: inner method ") + to_string(qs.inner) + " is for psi_cov cross-checks only");
  const PairCovariance pc(d, i, j, qs.window);
  auto f = [&](double tau) { return psi_cov(pc.at(tau), qs); };

  // the covariance entries are smooth except at integer tau inside the overlap
  // |tau - n|^{2H} endpoint behaviour is flattened by the quintic smoothstep map
  auto graded = [&](double a) {
    auto g = [&](double t) {
      const double t2 = t * t, u = 1.0 - t;
      return f(a + t2 * t * (10.0 - 15.0 * t + 6.0 * t2)) * 30.0 * t2 * u * u;
    };
    return quad::gl(g, 0.0, 1.0, qs.tau_nodes);
  };
  const double lo = -3.0 * j - 1.0, hi = 3.0 * i + 1.0;
  double total = 0.0;
  for (double a = lo; a < hi; a += 1.0) {
    if (i != j || (a != -1.0 && a != 0.0)) {
      total += graded(a);
      continue;
    }
    // identical pairs at tau = 0: the 4x4 covariance degenerates.  stay where
    // the smallest eigenvalue is >= 1e-4, bridge [0, t0] by a trapezoid to the
    // exact limit Var psi, and refine geometrically towards 0.
    const double sg = a == 0.0 ? 1.0 : -1.0;
    double t0 = 0.5;
    while (t0 > 1e-7 && detail::min_pair_eigen(pc.at(sg * t0)) >= 1e-4) t0 *= 0.5;
    t0 *= 2.0;
    if (t0 > 0.5) t0 = 0.5;
    const Eigen::Matrix4d S0 = pc.at(sg * t0);
    const double r = S0(0, 1) / S0(0, 0);
    const double f0 = detail::psi_var_angular(r, 4 * qs.angular_order);
    total += 0.5 * t0 * (f0 + f(sg * t0));
    for (double t = t0; t < 0.5; t *= 2.0) {
      const double b = std::min(2.0 * t, 0.5);
      total += quad::gl(f, std::min(sg * t, sg * b), std::max(sg * t, sg * b), qs.tau_nodes);
    }
    // the far half carries the kernel kink at |tau| = 1
    auto g = [&](double t) {
      const double t2 = t * t, u = 1.0 - t;
      return f(sg * (0.5 + 0.5 * t2 * t * (10.0 - 15.0 * t + 6.0 * t2))) * 15.0 * t2 * u * u;
    };
    total += quad::gl(g, 0.0, 1.0, qs.tau_nodes);
  }

  // geometric panels, then an analytic tail from the tau^{4d-6} decay
  const double reach = qs.tail_extent * std::max(i, j);
  const double center = 1.5 * (i - j);
  const double q = 4.0 * d - 6.0;
  for (int side = -1; side <= 1; side += 2) {
    const double start = side > 0 ? hi : lo;
    double off = 0.0, width = 1.0;
    while (off < reach) {
      const double a = start + side * off, b = start + side * (off + width);
      total += quad::gl(f, std::min(a, b), std::max(a, b), qs.tau_nodes);
      off += width;
      width *= 2.0;
    }
    const double tau_end = start + side * off;
    const double s_end = std::abs(tau_end - center);
    total += f(tau_end) * s_end / (-q - 1.0);
  }
  return total;
}

// Gamma_p(d); for the matched window sigma_{gi,gj} = g sigma_{i,j}
inline Eigen::MatrixXd gamma_matrix(double d, int p, const QuadratureSettings& qs = {}) {
  if (p < 1) throw Error(Errc::domain, "gamma_matrix: p must be >= 1");
  Eigen::MatrixXd G(p, p);
  std::map<std::pair<int, int>, double> reduced;
  for (int i = 1; i <= p; ++i)
    for (int j = i; j <= p; ++j) {
      double v;
      if (qs.window == ZWindow::matched) {
        const int g = std::gcd(i, j);
        auto key = std::make_pair(i / g, j / g);
        auto it = reduced.find(key);
        if (it == reduced.end()) it = reduced.emplace(key, sigma_ij(d, key.first, key.second, qs)).first;
        v = g * it->second;
      } else {
        v = sigma_ij(d, i, j, qs);
      }
      G(i - 1, j - 1) = G(j - 1, i - 1) = v;
    }
  return G;
}

// (Lambda0'(d)^-2 (J' Gamma^-1 J)^-1)^{1/2}
inline double sigma_p_from_gamma(const Eigen::MatrixXd& G, double d) {
  const Eigen::VectorXd J = Eigen::VectorXd::Ones(G.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) throw Error(Errc::not_pd, "sigma_p: Gamma is not positive definite");
  const double q = J.dot(llt.solve(J));
  const double lp = lambda0_prime(d);
  return std::sqrt(1.0 / (lp * lp * q));
}

}  // namespace mir
