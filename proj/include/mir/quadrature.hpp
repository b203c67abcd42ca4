#pragma once

// Gauss rules from the Golub-Welsch eigenproblem, cached per order.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mir::quad {

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

namespace detail {

// Jacobi matrix with zero diagonal and off-diagonal beta(k); mu0 is the total weight
template <class Beta>
Rule golub_welsch(int n, Beta beta, double mu0) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = beta(k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    r.x[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    r.w[i] = mu0 * v0 * v0;
  }
  // symmetrize: the rules are exactly symmetric in exact arithmetic
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (r.x[j] - r.x[i]);
    const double w = 0.5 * (r.w[i] + r.w[j]);
    r.x[i] = -x;
    r.x[j] = x;
    r.w[i] = r.w[j] = w;
  }
  if (n % 2) r.x[n / 2] = 0.0;
  return r;
}

template <class Make>
const Rule& cached(std::map<int, std::unique_ptr<Rule>>& cache, std::mutex& mu, int n, Make make) {
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<Rule>(make(n))).first;
  return *it->second;
}

// refine Legendre nodes by Newton on P_n; eigenvalues alone lose a few digits at large n
inline void polish_legendre(Rule& r) {
  const int n = static_cast<int>(r.x.size());
  for (int i = 0; i < n; ++i) {
    double x = r.x[i], dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
    }
    if (n == 1) dp = 1.0;
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace detail

// Gauss-Legendre on [-1, 1]
inline const Rule& legendre(int n) {
  static std::map<int, std::unique_ptr<Rule>> cache;
  static std::mutex mu;
  return detail::cached(cache, mu, n, [](int m) {
    Rule r = detail::golub_welsch(
        m, [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); }, 2.0);
    if (m > 1) detail::polish_legendre(r);
    return r;
  });
}

// Gauss-Hermite for the standard normal weight: sum w f(x) ~ E f(Z)
inline const Rule& hermite_prob(int n) {
  static std::map<int, std::unique_ptr<Rule>> cache;
  static std::mutex mu;
  return detail::cached(cache, mu, n, [](int m) {
    return detail::golub_welsch(m, [](int k) { return std::sqrt(static_cast<double>(k)); }, 1.0);
  });
}

// integrate f over [a, b] with an n-point Legendre rule
template <class F>
double gl(F&& f, double a, double b, int n) {
  const Rule& r = legendre(n);
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  double s = 0.0;
  for (size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + h * r.x[i]);
  return s * h;
}

}  // namespace mir::quad
