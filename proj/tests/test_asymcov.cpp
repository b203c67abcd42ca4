#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "mir/asymcov.hpp"
#include "mir/gamma_table.hpp"
#include "mir/lambda.hpp"

using namespace mir;

namespace {

// Cov of second differences of an fBm with index H, lags i and j, offset x = u - v
double fbm_second_diff_cov(double H, int i, int j, double x) {
  const double w[3] = {1.0, -2.0, 1.0};
  double s = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) s += w[a] * w[b] * std::pow(std::abs(x + a * i - b * j), 2 * H);
  return -0.5 * s;
}

// d > 1/2: Z_i(u) = int_0^i (B(u+i+s) - B(u+s)) ds with B an fBm of index d - 1/2.
// the t integral is done in closed form, the s integral by tanh-sinh split at the kinks
double integrated_cov(double d, int i, int j, double x) {
  const double p = 2.0 * (d - 0.5);
  auto phi = [p](double y) { return (y < 0 ? -1.0 : 1.0) * std::pow(std::abs(y), p + 1.0); };
  // int_0^j |y - t|^p dt
  auto inner = [&](double y) { return (phi(y) - phi(y - j)) / (p + 1.0); };
  const double deltas[4] = {x + i, x - j, x + i - j, x};
  const double wts[4] = {0.5, 0.5, -0.5, -0.5};
  boost::math::quadrature::tanh_sinh<double> ts;
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double dl = deltas[k];
    std::vector<double> cut{0.0, static_cast<double>(i)};
    for (double c : {-dl, j - dl})
      if (c > 0.0 && c < i) cut.push_back(c);
    std::sort(cut.begin(), cut.end());
    for (size_t c = 0; c + 1 < cut.size(); ++c) {
      if (cut[c + 1] - cut[c] < 1e-14) continue;
      total += wts[k] * ts.integrate([&](double s) { return inner(dl + s); }, cut[c], cut[c + 1], 1e-14);
    }
  }
  return total;
}

double oracle_cov(double d, int i, int j, double x) {
  if (d < 0.5) return fbm_second_diff_cov(d + 0.5, i, j, x) / fbm_second_diff_cov(d + 0.5, 1, 1, 0.0);
  return integrated_cov(d, i, j, x) / integrated_cov(d, 1, 1, 0.0);
}

}  // namespace

TEST(ZCov, UnitVariance) {
  for (double d : {-0.4, -0.1, 0.2, 0.45, 0.5, 0.7, 1.0, 1.2}) EXPECT_NEAR(z_cov(d, 1, 1, 0.3, 0.3), 1.0, 1e-12) << d;
}

TEST(ZCov, HalfAnchor) {
  EXPECT_NEAR(z_cov(0.5, 1, 1, 0.0, 1.0), rho_half(), 1e-12);
  EXPECT_NEAR(z_cov(0.5, 1, 1, 0.0, 1.0), -0.216917, 1e-6);
}

TEST(ZCov, RhoIdentity) {
  for (int k = 1; k <= 20; ++k) {
    const double below = 0.5 - 0.99 * k / 20.0, above = 0.5 + 0.745 * k / 20.0;
    EXPECT_NEAR(z_cov(below, 1, 1, 0.0, 1.0), rho(below), 1e-9) << below;
    EXPECT_NEAR(z_cov(above, 1, 1, 0.0, 1.0), rho(above), 1e-9) << above;
  }
  for (double d : {0.6, 0.8, 1.0, 1.2}) EXPECT_NEAR(z_cov(d, 1, 1, 0.0, 1.0), rho(d), 1e-10) << d;
}

TEST(ZCov, SelfSimilarity) {
  for (double d : {0.2, 0.8}) {
    const double g = 3.0, H2 = 2.0 * d + 1.0;
    EXPECT_NEAR(z_cov(d, 3, 6, 0.0, 4.5), std::pow(g, H2) * z_cov(d, 1, 2, 0.0, 1.5), 1e-9 * std::pow(g, H2)) << d;
  }
}

TEST(ZCov, BruteForceOracle) {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> ud(0.52, 1.23), ux(-5.0, 5.0);
  for (int c = 0; c < 50; ++c) {
    const double d = ud(g), x = ux(g);
    const int i = 1 + static_cast<int>(g() % 3), j = 1 + static_cast<int>(g() % 3);
    const double scale = std::sqrt(z_cov(d, i, i, 0, 0) * z_cov(d, j, j, 0, 0));
    EXPECT_NEAR(z_cov(d, i, j, x, 0.0), oracle_cov(d, i, j, x), 1e-8 * scale)
        << "d=" << d << " i=" << i << " j=" << j << " x=" << x;
  }
  // below 1/2 the process is a plain fBm second difference
  std::uniform_real_distribution<double> ul(-0.45, 0.45);
  for (int c = 0; c < 20; ++c) {
    const double d = ul(g), x = ux(g);
    const int i = 1 + static_cast<int>(g() % 3), j = 1 + static_cast<int>(g() % 3);
    const double scale = std::sqrt(z_cov(d, i, i, 0, 0) * z_cov(d, j, j, 0, 0));
    EXPECT_NEAR(z_cov(d, i, j, x, 0.0), oracle_cov(d, i, j, x), 1e-9 * scale) << d;
  }
}

TEST(ZCov, Errors) {
  EXPECT_THROW(z_cov(1.25, 1, 1, 0, 0), Error);
  EXPECT_THROW(z_cov(0.2, 0, 1, 0, 0), Error);
}

TEST(Psi, Values) {
  EXPECT_EQ(psi(0.0, 0.0), 1.0);
  EXPECT_EQ(psi(1.0, -1.0), 0.0);
  EXPECT_EQ(psi(2.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(psi(3.0, -1.0), 0.5);
}

TEST(SigmaIJ, VarianceAnchorAtHalf) {
  const double s = sigma_ij(0.5, 1, 1);
  EXPECT_NEAR(s / (0.2524 * 0.2524), 1.0, 0.05) << s;
}

TEST(SigmaIJ, Symmetry) {
  for (int i = 1; i <= 3; ++i)
    for (int j = i + 1; j <= 3; ++j) EXPECT_NEAR(sigma_ij(0.2, i, j), sigma_ij(0.2, j, i), 1e-3) << i << "," << j;
}

TEST(SigmaIJ, PositiveVariance) {
  for (double d : {-0.4, 0.0, 0.4, 0.6, 1.0, 1.2}) EXPECT_GT(sigma_ij(d, 1, 1), 0.0) << d;
}

// the inner 4-D expectation along the tau path of sigma_{1,2}(0.2)
TEST(PsiCov, InnerMethodsAgree) {
  const PairCovariance pc(0.2, 1, 2, ZWindow::matched);
  QuadratureSettings ang, mc;
  mc.inner = InnerMethod::monte_carlo;
  mc.mc_samples = 4000000;  // SE about 3e-5
  for (double t : {-3.3, -1.5, -0.7, 0.2, 1.1, 2.5, 10.0}) {
    const Eigen::Matrix4d S = pc.at(t);
    EXPECT_NEAR(psi_cov(S, ang), psi_cov(S, mc), 2e-4) << t;
  }
}

// the tensor rule converges slowly over the kinks of psi, but it converges
TEST(PsiCov, GaussHermiteConverges) {
  const PairCovariance pc(0.2, 1, 2, ZWindow::matched);
  QuadratureSettings ang, g24, g48;
  g24.inner = g48.inner = InnerMethod::gauss_hermite;
  g24.gh_order = 24;
  g48.gh_order = 48;
  double e24 = 0.0, e48 = 0.0;
  for (double t : {-3.3, -1.5, -0.7, 0.2, 1.1, 2.5}) {
    const Eigen::Matrix4d S = pc.at(t);
    const double a = psi_cov(S, ang);
    e24 += std::abs(psi_cov(S, g24) - a);
    e48 += std::abs(psi_cov(S, g48) - a);
  }
  EXPECT_LT(e48, 0.6 * e24);
  EXPECT_LT(e48, 3e-3);
  // independent pairs give exactly zero on the block-rotated grid
  EXPECT_NEAR(psi_cov(pc.at(1e4), g24), 0.0, 1e-9);
}

TEST(SigmaIJ, RejectsNoisyInnerMethods) {
  QuadratureSettings gh;
  gh.inner = InnerMethod::gauss_hermite;
  EXPECT_THROW(sigma_ij(0.2, 1, 2, gh), Error);
}

TEST(SigmaIJ, MatchedSelfSimilarity) {
  // the matched window scales exactly: sigma_{2i,2j} = 2 sigma_ij
  EXPECT_NEAR(sigma_ij(0.8, 2, 4), 2.0 * sigma_ij(0.8, 1, 2), 2e-3 * std::abs(sigma_ij(0.8, 1, 2)) + 1e-5);
}

TEST(SigmaIJ, TailDecays) {
  const PairCovariance pc(0.3, 1, 1, ZWindow::matched);
  QuadratureSettings qs;
  const double at50 = std::abs(psi_cov(pc.at(50.0), qs));
  EXPECT_LT(at50, 1e-4 * sigma_ij(0.3, 1, 1));
}

TEST(GammaMatrix, SymmetricPositiveDefinite) {
  for (double d : {-0.3, 0.3, 0.9}) {
    const Eigen::MatrixXd G = gamma_matrix(d, 3, QuadratureSettings{});
    EXPECT_LT((G - G.transpose()).norm(), 1e-12 * G.norm());
    EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(G).info(), Eigen::Success);
  }
}

TEST(GammaTable, ShippedTablesValid) {
  for (int p : {5, 10, 15, 20}) {
    const GammaTable& t = default_table(p);
    EXPECT_EQ(t.p, p);
    EXPECT_NO_THROW(t.validate());
    EXPECT_LE(t.grid.front(), -0.49 + 1e-12);
    EXPECT_GE(t.grid.back(), 1.24 - 1e-12);
  }
}

TEST(GammaTable, SigmaPConstants) {
  const std::pair<int, double> anchors[] = {{5, 0.9082}, {10, 0.8289}, {15, 0.8016}, {20, 0.7861}};
  for (auto [p, target] : anchors) EXPECT_NEAR(sigma_p(default_table(p), 0.5) / target, 1.0, 0.05) << p;
}

TEST(GammaTable, InterpolationAtNodes) {
  const GammaTable& t = default_table(5);
  for (size_t k = 0; k < t.grid.size(); k += 17) {
    const GammaAt g = gamma_interp(t, t.grid[k]);
    EXPECT_EQ(g.G, t.mats[k]);
    EXPECT_FALSE(g.clamped);
  }
  EXPECT_TRUE(gamma_interp(t, 1.4).clamped);
}

TEST(GammaTable, SigmaHatScaling) {
  const GammaTable& t = default_table(5);
  for (double d : {t.grid[30], 0.137, 0.73}) {
    const Eigen::MatrixXd S = sigma_hat(10, d, t);
    const Eigen::MatrixXd G = gamma_interp(t, d).G;
    const double lp = lambda0_prime(d);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) EXPECT_NEAR(S(i, j), G(i, j) / (lp * lp), 1e-14 * std::abs(S(i, j)) + 1e-300);
  }
  const Eigen::MatrixXd S = sigma_hat(10, 0.5, t);
  const Eigen::VectorXd J = Eigen::VectorXd::Ones(5);
  EXPECT_NEAR(1.0 / std::sqrt(J.dot(S.llt().solve(J))) / 0.9082, 1.0, 0.05);
}

// the tau tail decays like tau^{4d-6}, so Gamma grows like 1/(1.25 - d);
// past 1.2 the rescaled (1.25 - d) Gamma is the smooth quantity
TEST(GammaTable, Smoothness) {
  const GammaTable& t = default_table(5);
  for (size_t k = 1; k < t.grid.size(); ++k) {
    if (std::abs(t.grid[k] - 0.5) < 0.05 || std::abs(t.grid[k - 1] - 0.5) < 0.05) continue;
    const bool edge = t.grid[k] > 1.2 + 1e-9;
    const double wa = edge ? 1.25 - t.grid[k] : 1.0, wb = edge ? 1.25 - t.grid[k - 1] : 1.0;
    const double jump = (wa * t.mats[k] - wb * t.mats[k - 1]).cwiseAbs().maxCoeff();
    EXPECT_LT(jump, 0.05) << "between " << t.grid[k - 1] << " and " << t.grid[k];
  }
}

TEST(GammaTable, DivergesTowardsUpperEdge) {
  const GammaTable& t = default_table(5);
  const size_t n = t.grid.size();
  ASSERT_NEAR(t.grid[n - 1], 1.24, 1e-9);
  EXPECT_GT(t.mats[n - 1](0, 0), 2.0 * t.mats[n - 6](0, 0));
}

TEST(GammaTable, LeadingBlockIsSmallerTable) {
  const GammaTable& t10 = default_table(10);
  const GammaTable& t5 = default_table(5);
  const GammaTable cut = t10.leading(5);
  ASSERT_EQ(cut.grid, t5.grid);
  for (size_t k = 0; k < cut.grid.size(); k += 9) EXPECT_LT((cut.mats[k] - t5.mats[k]).norm(), 1e-6 * t5.mats[k].norm());
  EXPECT_THROW(t5.leading(6), Error);
}

TEST(GammaTable, WriteLoadRoundTrip) {
  const GammaTable t = default_table(5);
  std::stringstream ss;
  write_gamma_table(t, ss);
  const GammaTable u = load_gamma_table(ss);
  ASSERT_EQ(u.grid, t.grid);
  ASSERT_EQ(u.p, t.p);
  EXPECT_EQ(u.fingerprint, t.fingerprint);
  for (size_t k = 0; k < t.grid.size(); ++k) EXPECT_EQ(u.mats[k], t.mats[k]);
}

TEST(GammaTable, LoadErrorsCiteLines) {
  std::istringstream bad("# mir gamma table\nthis is not a table\n");
  try {
    load_gamma_table(bad, "bad.txt");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == Errc::table || e.code() == Errc::parse);
    EXPECT_NE(std::string(e.what()).find("bad.txt"), std::string::npos);
  }
}

TEST(GammaEmpirical, ScalarPositive) {
  const Eigen::MatrixXd G = gamma_empirical(0.0, 1, 20000, 50, 5);
  ASSERT_EQ(G.rows(), 1);
  EXPECT_GT(G(0, 0), 0.0);
}

TEST(GammaEmpirical, AgreesWithAnalytic) {
  for (double d : {0.0, 0.8}) {
    const Eigen::MatrixXd E = gamma_empirical(d, 3, 100000, 400, 17);
    const Eigen::MatrixXd A = gamma_matrix(d, 3, QuadratureSettings{});
    EXPECT_LT((E - A).norm(), 0.15 * A.norm()) << "d = " << d << "\nE=\n" << E << "\nA=\n" << A;
  }
}

TEST(Fingerprint, StableAndDistinct) {
  EXPECT_EQ(fingerprint("abc"), fingerprint("abc"));
  EXPECT_NE(fingerprint("abc"), fingerprint("abd"));
  QuadratureSettings a, b;
  b.tau_nodes = 16;
  EXPECT_NE(a.describe(), b.describe());
}
