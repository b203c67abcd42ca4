// Simulate an ARFIMA(1, d, 0) path, estimate d and run both tests.

#include <cstdio>

#include "mir/mir.hpp"

int main() {
  const mir::SpectralModel model = mir::SpectralModel::arfima(0.3, {-0.5});
  const mir::SeriesSample x = mir::simulate(model, 5000, 42);

  const mir::EstimationReport r = mir::adaptive_estimate(x);
  std::printf("true d = %.2f\n", model.d);
  std::printf("estimate %.4f, 95%% CI [%.4f, %.4f], p = %d, m = %ld\n", r.d, r.ci_lo, r.ci_hi, r.p, r.m_tilde);

  const mir::TestDecision s = mir::stationarity_test(r);
  const mir::TestDecision t = mir::nonstationarity_test(r);
  std::printf("%s (threshold %.4f)\n", s.verdict().c_str(), s.threshold);
  std::printf("%s (threshold %.4f)\n", t.verdict().c_str(), t.threshold);

  // the same path integrated once has d + 1
  std::vector<double> y(x.values);
  for (size_t k = 1; k < y.size(); ++k) y[k] += y[k - 1];
  const mir::EstimationReport ri = mir::adaptive_estimate(y);
  std::printf("integrated: estimate %.4f, %s\n", ri.d, mir::stationarity_test(ri).verdict().c_str());
  return 0;
}
