#pragma once

// Persisted d -> Gamma_p(d) tables, interpolation, the plug-in Sigma_hat and
// the simulation estimate of Gamma_p.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/fpclassify.hpp>  // pchip.hpp in 1.74 needs isnan declared first
#include <boost/math/interpolators/pchip.hpp>

#include "mir/asymcov.hpp"
#include "mir/error.hpp"
#include "mir/ir.hpp"
#include "mir/lambda.hpp"
#include "mir/rng.hpp"
#include "mir/sim.hpp"

#ifndef MIR_DATA_DIR
#define MIR_DATA_DIR "data"
#endif

namespace mir {

enum class GammaMethod { analytic, empirical };

inline const char* to_string(GammaMethod m) { return m == GammaMethod::analytic ? "analytic" : "empirical"; }

inline constexpr double kGridLo = -0.49;
inline constexpr double kGridHi = 1.24;

// -0.49, -0.48, ..., 1.24
inline std::vector<double> default_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 173; ++k) g.push_back((k - 49) / 100.0);
  return g;
}

struct GammaTable {
  int p = 0;
  std::vector<double> grid;
  std::vector<Eigen::MatrixXd> mats;
  GammaMethod method = GammaMethod::analytic;
  std::string fingerprint;
  int version = 1;
  std::vector<std::string> notes;  // "# key=value" lines

  void validate() const {
    if (p < 1) throw Error(Errc::table, "gamma table: p must be >= 1");
    if (grid.size() != mats.size()) throw Error(Errc::table, "gamma table: grid and matrices differ in length");
    if (grid.size() < 4) throw Error(Errc::table, "gamma table: at least 4 nodes needed");
    for (size_t k = 0; k < grid.size(); ++k) {
      if (k && !(grid[k] > grid[k - 1])) throw Error(Errc::table, "gamma table: grid not strictly increasing");
      const Eigen::MatrixXd& G = mats[k];
      if (G.rows() != p || G.cols() != p) throw Error(Errc::table, "gamma table: matrix size mismatch");
      if (!G.allFinite()) throw Error(Errc::table, "gamma table: non-finite entry");
      const double asym = (G - G.transpose()).norm() / G.norm();
      if (asym > 1e-12) throw Error(Errc::table, "gamma table: matrix not symmetric");
      if (Eigen::LLT<Eigen::MatrixXd>(G).info() != Eigen::Success)
        throw Error(Errc::not_pd, "gamma table: matrix at d = " + std::to_string(grid[k]) + " is not positive definite");
    }
  }

  // Gamma_q is the leading q x q block of Gamma_p
  GammaTable leading(int q) const {
    if (q < 1 || q > p) throw Error(Errc::table, "gamma table: cannot take a " + std::to_string(q) + " block of p = " + std::to_string(p));
    GammaTable t = *this;
    t.p = q;
    for (auto& G : t.mats) G = Eigen::MatrixXd(G.topLeftCorner(q, q));
    t.interp_.reset();
    t.once_ = std::make_shared<std::once_flag>();
    return t;
  }

  struct Interp {
    std::vector<boost::math::interpolators::pchip<std::vector<double>>> entries;
  };

  const Interp& interpolator() const {
    std::call_once(*once_, [this] {
      auto in = std::make_shared<Interp>();
      for (int i = 0; i < p; ++i)
        for (int j = i; j < p; ++j) {
          std::vector<double> x = grid, y(grid.size());
          for (size_t k = 0; k < grid.size(); ++k) y[k] = mats[k](i, j);
          in->entries.emplace_back(std::move(x), std::move(y));
        }
      interp_ = in;
    });
    return *interp_;
  }

 private:
  mutable std::shared_ptr<std::once_flag> once_ = std::make_shared<std::once_flag>();
  mutable std::shared_ptr<const Interp> interp_;
};

inline void write_gamma_table(const GammaTable& t, std::ostream& os) {
  os << "#mir-gamma-table v" << t.version << '\n';
  os << "p=" << t.p << " method=" << to_string(t.method) << " fingerprint=" << t.fingerprint << '\n';
  for (const auto& n : t.notes) os << "# " << n << '\n';
  os << std::setprecision(17);
  for (size_t k = 0; k < t.grid.size(); ++k) {
    os << t.grid[k];
    for (int i = 0; i < t.p; ++i)
      for (int j = i; j < t.p; ++j) os << ' ' << t.mats[k](i, j);
    os << '\n';
  }
}

inline void save_gamma_table(const GammaTable& t, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::io, "cannot write " + path);
  write_gamma_table(t, os);
  if (!os) throw Error(Errc::io, "write failed: " + path);
}

inline GammaTable load_gamma_table(std::istream& is, const std::string& name = "gamma table") {
  auto fail = [&](int line, const std::string& msg) -> Error {
    return Error(Errc::table, name + " line " + std::to_string(line) + ": " + msg);
  };
  GammaTable t;
  std::string line;
  int ln = 1;
  if (!std::getline(is, line) || line != "#mir-gamma-table v1") throw fail(ln, "expected '#mir-gamma-table v1'");
  ++ln;
  if (!std::getline(is, line)) throw fail(ln, "missing header");
  {
    std::istringstream hs(line);
    std::string tok;
    bool have_p = false, have_m = false;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw fail(ln, "bad header token '" + tok + "'");
      const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
      if (k == "p") {
        try {
          t.p = std::stoi(v);
        } catch (...) {
          throw fail(ln, "bad p");
        }
        have_p = true;
      } else if (k == "method") {
        if (v == "analytic")
          t.method = GammaMethod::analytic;
        else if (v == "empirical")
          t.method = GammaMethod::empirical;
        else
          throw fail(ln, "unknown method '" + v + "'");
        have_m = true;
      } else if (k == "fingerprint") {
        t.fingerprint = v;
      }
    }
    if (!have_p || !have_m || t.p < 1) throw fail(ln, "header needs p and method");
  }
  const size_t n = static_cast<size_t>(t.p) * (t.p + 1) / 2;
  while (std::getline(is, line)) {
    ++ln;
    if (line.empty()) continue;
    if (line[0] == '#') {
      size_t b = line.find_first_not_of("# ");
      t.notes.push_back(b == std::string::npos ? "" : line.substr(b));
      continue;
    }
    std::istringstream ls(line);
    double d;
    if (!(ls >> d)) throw fail(ln, "expected d");
    std::vector<double> v;
    double x;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) throw fail(ln, "unparseable entry");
    if (v.size() != n) throw fail(ln, "expected " + std::to_string(n) + " entries, found " + std::to_string(v.size()));
    Eigen::MatrixXd G(t.p, t.p);
    size_t c = 0;
    for (int i = 0; i < t.p; ++i)
      for (int j = i; j < t.p; ++j) G(i, j) = G(j, i) = v[c++];
    t.grid.push_back(d);
    t.mats.push_back(G);
  }
  t.validate();
  return t;
}

inline GammaTable load_gamma_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::io, "cannot open gamma table " + path);
  return load_gamma_table(is, path);
}

inline std::string default_table_path(int p) { return std::string(MIR_DATA_DIR) + "/gamma_p" + std::to_string(p) + ".txt"; }

// the shipped table for p: the smallest stored table with at least p scales, cut to p
inline const GammaTable& default_table(int p) {
  static std::map<int, std::unique_ptr<GammaTable>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(p);
  if (it != cache.end()) return *it->second;
  for (int stored : {5, 10, 15, 20}) {
    if (stored < p) continue;
    std::ifstream probe(default_table_path(stored));
    if (!probe) continue;
    GammaTable t = load_gamma_table(default_table_path(stored));
    if (t.p < p) continue;
    return *cache.emplace(p, std::make_unique<GammaTable>(t.p == p ? t : t.leading(p))).first->second;
  }
  throw Error(Errc::table, "no gamma table for p = " + std::to_string(p) + " under " + MIR_DATA_DIR);
}

struct GammaAt {
  Eigen::MatrixXd G;
  double d = 0.0;  // after clamping to the grid hull
  bool clamped = false;
  bool floored = false;
};

inline GammaAt gamma_interp(const GammaTable& t, double d) {
  GammaAt out;
  out.d = d;
  if (!(d >= t.grid.front())) {
    out.d = t.grid.front();
    out.clamped = true;
  } else if (!(d <= t.grid.back())) {
    out.d = t.grid.back();
    out.clamped = true;
  }
  const auto hit = std::lower_bound(t.grid.begin(), t.grid.end(), out.d);
  if (hit != t.grid.end() && *hit == out.d) {
    out.G = t.mats[static_cast<size_t>(hit - t.grid.begin())];
    return out;
  }
  const auto& in = t.interpolator();
  out.G.resize(t.p, t.p);
  size_t c = 0;
  for (int i = 0; i < t.p; ++i)
    for (int j = i; j < t.p; ++j) out.G(i, j) = out.G(j, i) = in.entries[c++](out.d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.G);
  const double floor = 1e-10 * out.G.trace() / t.p;
  if (es.eigenvalues().minCoeff() < floor) {
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
    out.G = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    out.G = 0.5 * (out.G + out.G.transpose()).eval();
    out.floored = true;
    if (Eigen::LLT<Eigen::MatrixXd>(out.G).info() != Eigen::Success)
      throw Error(Errc::not_pd, "gamma_interp: not positive definite after flooring");
  }
  return out;
}

// Lambda0'(d)^-2 Gamma_p(d); m only names the scale the plug-in belongs to
inline Eigen::MatrixXd sigma_hat(long m, double dhat, const GammaTable& t) {
  (void)m;
  const GammaAt g = gamma_interp(t, dhat);
  const double lp = lambda0_prime(g.d);
  return g.G / (lp * lp);
}

inline double sigma_p(const GammaTable& t, double d) {
  const GammaAt g = gamma_interp(t, d);
  return sigma_p_from_gamma(g.G, g.d);
}

// Gamma tables at every grid node; nodes are spread over worker threads
inline GammaTable build_gamma_table(int p, const std::vector<double>& grid, const QuadratureSettings& qs,
                                    unsigned threads = 0, std::ostream* progress = nullptr) {
  qs.validate();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  GammaTable t;
  t.p = p;
  t.grid = grid;
  t.mats.assign(grid.size(), Eigen::MatrixXd());
  t.method = GammaMethod::analytic;
  t.fingerprint = fingerprint(qs.describe());
  const auto t0 = std::chrono::steady_clock::now();
  std::mutex mu;
  size_t next = 0, done = 0;
  std::exception_ptr err;
  auto work = [&] {
    for (;;) {
      size_t k;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= grid.size() || err) return;
        k = next++;
      }
      try {
        Eigen::MatrixXd G = gamma_matrix(grid[k], p, qs);
        std::lock_guard<std::mutex> lock(mu);
        t.mats[k] = std::move(G);
        ++done;
        if (progress) *progress << "d=" << grid[k] << " (" << done << "/" << grid.size() << ")\n" << std::flush;
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < threads; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  t.notes.push_back("settings " + qs.describe());
  std::ostringstream bs;
  bs << "build_seconds=" << std::fixed << std::setprecision(1) << secs;
  t.notes.push_back(bs.str());
  t.validate();
  return t;
}

// sample covariance of sqrt(N/m) (IR_N(j m))_j over simulated ARFIMA(0, d, 0) paths, m = floor(N^0.3)
inline Eigen::MatrixXd gamma_empirical(double d, int p, size_t N, int reps, std::uint64_t seed, long m = 0) {
  if (reps < 2) throw Error(Errc::domain, "gamma_empirical: reps must be >= 2");
  if (m <= 0) m = static_cast<long>(std::floor(std::pow(static_cast<double>(N), 0.3)));
  if (!profile_feasible(N, m, p)) throw Error(Errc::too_short, "gamma_empirical: N too short for p m");
  const CirculantSampler sampler(SpectralModel::arfima(d), N);
  const double scale = std::sqrt(static_cast<double>(N) / m);
  Eigen::MatrixXd V(reps, p);
  for (int r = 0; r < reps; ++r) {
    const SeriesSample x = sampler.draw(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    const IrProfile ir = ir_profile(x, m, p);
    for (int j = 0; j < p; ++j) V(r, j) = scale * ir.values[j];
  }
  const Eigen::RowVectorXd mean = V.colwise().mean();
  const Eigen::MatrixXd C = V.rowwise() - mean;
  return (C.transpose() * C) / static_cast<double>(reps - 1);
}

// empirical table: gamma_empirical at every node, node k seeded with derive_seed(seed, {k})
inline GammaTable build_gamma_table_empirical(int p, const std::vector<double>& grid, size_t N, int reps,
                                              std::uint64_t seed, std::ostream* progress = nullptr) {
  GammaTable t;
  t.p = p;
  t.grid = grid;
  t.method = GammaMethod::empirical;
  std::ostringstream desc;
  desc << "N=" << N << " reps=" << reps << " seed=" << seed;
  t.fingerprint = fingerprint(desc.str());
  for (size_t k = 0; k < grid.size(); ++k) {
    // the simulator takes d < 1.5 directly; integrated paths are handled by its cumsum
    t.mats.push_back(gamma_empirical(grid[k], p, N, reps, derive_seed(seed, {static_cast<std::uint64_t>(k)})));
    if (progress) *progress << "d=" << grid[k] << " (" << k + 1 << "/" << grid.size() << ")\n" << std::flush;
  }
  t.notes.push_back("settings empirical " + desc.str());
  t.validate();
  return t;
}

}  // namespace mir
