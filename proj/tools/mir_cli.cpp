// mir: command-line front end.
// Errors print one line "E_CODE: message" on stderr and exit nonzero.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mir/mir.hpp"

namespace {

using nlohmann::json;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw mir::Error(mir::Errc::io, "cannot write " + path);
  os << text;
  if (!os) throw mir::Error(mir::Errc::io, "write failed: " + path);
}

const mir::GammaTable& pick_table(int p, const std::string& path, std::optional<mir::GammaTable>& hold) {
  if (path.empty()) return mir::default_table(p);
  mir::GammaTable t = mir::load_gamma_table(path);
  if (t.p < p) throw mir::Error(mir::Errc::table, path + " has p = " + std::to_string(t.p) + ", need " + std::to_string(p));
  hold = t.p == p ? t : t.leading(p);
  return *hold;
}

json report_json(const mir::EstimationReport& r) {
  json j;
  j["N"] = r.N;
  j["p"] = r.p;
  j["d"] = r.d;
  j["se"] = r.se;
  j["level"] = r.level;
  if (r.has_ci)
    j["ci"] = {r.ci_lo, r.ci_hi};
  else
    j["ci"] = nullptr;
  j["alpha_hat"] = r.alpha_hat;
  j["alpha_tilde"] = r.alpha_tilde;
  j["m_hat"] = r.m_hat;
  j["m_tilde"] = r.m_tilde;
  j["sigma"] = r.sigma;
  j["dhat"] = r.dhat;
  j["flags"] = {{"ir_clamped", r.ir_clamped},       {"grid_truncated", r.grid_truncated},
                {"scale_fallback", r.scale_fallback}, {"alpha_clamped", r.alpha_clamped},
                {"scan_tie", r.scan_tie},           {"sigma_clamped", r.sigma_clamped}};
  json scan = json::array();
  for (const auto& q : r.scan) scan.push_back({{"alpha", q.alpha}, {"m", q.m}, {"Q", q.q}, {"d", q.d_gls}});
  j["scan"] = scan;
  return j;
}

std::string report_text(const mir::EstimationReport& r) {
  std::ostringstream os;
  os << "N            " << r.N << "\n"
     << "p            " << r.p << "\n"
     << "d            " << g17(r.d) << "\n"
     << "se           " << g17(r.se) << "\n";
  if (r.has_ci)
    os << "ci           " << g17(r.ci_lo) << " " << g17(r.ci_hi) << "  (level " << r.level << ")\n";
  else
    os << "ci           n/a (estimate outside the range of the limit theorem)\n";
  os << "alpha_hat    " << g17(r.alpha_hat) << "  m = " << r.m_hat << "\n"
     << "alpha_tilde  " << g17(r.alpha_tilde) << "  m = " << r.m_tilde << "\n"
     << "sigma_p      " << g17(r.sigma) << "\n";
  std::string flags;
  auto add = [&](bool on, const char* name) {
    if (on) flags += std::string(flags.empty() ? "" : " ") + name;
  };
  add(r.ir_clamped, "ir_clamped");
  add(r.grid_truncated, "grid_truncated");
  add(r.scale_fallback, "scale_fallback");
  add(r.alpha_clamped, "alpha_clamped");
  add(r.scan_tie, "scan_tie");
  add(r.sigma_clamped, "sigma_clamped");
  os << "flags        " << (flags.empty() ? "-" : flags) << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive multiscale increment-ratio estimation of the memory parameter d"};
  app.require_subcommand(1);

  // simulate
  std::string model_spec, out_path;
  size_t n = 0;
  std::uint64_t seed = 1;
  auto* sim = app.add_subcommand("simulate", "draw one Gaussian path");
  sim->add_option("--model", model_spec, "e.g. arfima(d=0.3,ar=[-0.5]), fgn(h=0.7), powerlaw(d=0.2,c1=5,beta=0.5)")->required();
  sim->add_option("--n", n, "length")->required();
  sim->add_option("--seed", seed, "seed");
  sim->add_option("--out", out_path, "output file, '-' for stdout")->required();

  // estimate
  std::string in_path, column, gamma_path;
  std::optional<int> p_opt;
  double level = 0.05;
  bool as_json = false;
  auto* est = app.add_subcommand("estimate", "adaptive estimate of d with its confidence interval");
  est->add_option("--in", in_path, "input file")->required();
  est->add_option("--column", column, "column name or 1-based index");
  est->add_option("--p", p_opt, "number of scales");
  est->add_option("--gamma", gamma_path, "Gamma table file");
  est->add_option("--level", level, "1 - confidence");
  est->add_flag("--json", as_json, "JSON output");

  // test
  std::string kind = "stat";
  std::optional<double> d0;
  auto* tst = app.add_subcommand("test", "stationarity, nonstationarity or threshold test");
  tst->add_option("--in", in_path, "input file")->required();
  tst->add_option("--column", column, "column name or 1-based index");
  tst->add_option("--kind", kind, "stat, nonstat or threshold")->check(CLI::IsMember({"stat", "nonstat", "threshold"}));
  tst->add_option("--d0", d0, "threshold for --kind threshold");
  tst->add_option("--p", p_opt, "number of scales");
  tst->add_option("--gamma", gamma_path, "Gamma table file");
  tst->add_option("--level", level, "test level");
  tst->add_flag("--json", as_json, "JSON output");

  // gamma-table
  int gp = 10;
  std::string method = "analytic";
  size_t emp_n = 10000;
  int emp_reps = 200;
  unsigned threads = 0;
  auto* gt = app.add_subcommand("gamma-table", "build a Gamma_p table");
  gt->add_option("--p", gp, "number of scales")->required()->check(CLI::Range(1, 60));
  gt->add_option("--method", method, "analytic or empirical")->check(CLI::IsMember({"analytic", "empirical"}));
  gt->add_option("--out", out_path, "output file")->required();
  gt->add_option("--n", emp_n, "empirical: path length");
  gt->add_option("--reps", emp_reps, "empirical: paths per node");
  gt->add_option("--seed", seed, "empirical: seed");
  gt->add_option("--threads", threads, "analytic: worker threads (0 = all cores)");

  // bench
  std::string spec_path;
  auto* bn = app.add_subcommand("bench", "Monte Carlo tables from a config file");
  bn->add_option("--spec", spec_path, "config file")->required();

  // verify
  bool quick = false;
  auto* vf = app.add_subcommand("verify", "numerical checks of the expansions and identities");
  vf->add_flag("--quick", quick, "skip the bias-rate fits");

  // analyze
  std::string config_path;
  auto* an = app.add_subcommand("analyze", "segment-wise analysis of a price or return series");
  an->add_option("--config", config_path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "E_USAGE: " << e.what() << '\n';
    return 64;
  }

  try {
    if (*sim) {
      const mir::SpectralModel m = mir::parse_model(model_spec);
      const mir::SeriesSample x = mir::simulate(m, n, seed);
      std::string text;
      text.reserve(x.size() * 24);
      for (double v : x.values) text += g17(v) + "\n";
      write_text(out_path, text);
    } else if (*est || *tst) {
      const mir::SeriesSample x = mir::ingest(in_path, column);
      const int p = p_opt.value_or(mir::select_p(x.size()));
      std::optional<mir::GammaTable> hold;
      const mir::GammaTable& t = pick_table(p, gamma_path, hold);
      if (*est) {
        const mir::EstimationReport r = mir::adaptive_estimate(x.values, level, p, t);
        std::cout << (as_json ? report_json(r).dump(2) + "\n" : report_text(r));
      } else {
        const mir::EstimationReport r = mir::adaptive_estimate(x.values, level, p, t);
        mir::TestDecision dcs;
        if (kind == "stat") {
          dcs = mir::stationarity_test(r, level, t);
        } else if (kind == "nonstat") {
          dcs = mir::nonstationarity_test(r, level, t);
        } else {
          if (!d0) throw mir::Error(mir::Errc::config, "--kind threshold needs --d0");
          dcs = mir::threshold_test(r, *d0, level, t);
        }
        if (as_json) {
          json j{{"kind", mir::to_string(dcs.kind)}, {"d0", dcs.d0},         {"statistic", dcs.statistic},
                 {"threshold", dcs.threshold},       {"level", dcs.level},   {"reject", dcs.reject},
                 {"p_value", dcs.p_value},           {"N", dcs.N},           {"p", dcs.p},
                 {"alpha_tilde", dcs.alpha_tilde},   {"sigma", dcs.sigma},   {"clt_valid", dcs.clt_valid},
                 {"verdict", dcs.verdict()}};
          std::cout << j.dump(2) << '\n';
        } else {
          std::cout << dcs.verdict() << "\n"
                    << "d          " << g17(dcs.statistic) << "\n"
                    << "threshold  " << g17(dcs.threshold) << "\n"
                    << "p_value    " << g17(dcs.p_value) << "\n"
                    << "level      " << dcs.level << "\n";
          if (!dcs.clt_valid) std::cout << "note       estimate outside the range of the limit theorem\n";
        }
      }
    } else if (*gt) {
      mir::GammaTable t;
      if (method == "analytic") {
        t = mir::build_gamma_table(gp, mir::default_grid(), mir::QuadratureSettings{}, threads, &std::cerr);
      } else {
        t = mir::build_gamma_table_empirical(gp, mir::default_grid(), emp_n, emp_reps, seed, &std::cerr);
      }
      mir::save_gamma_table(t, out_path);
      std::cout << out_path << "  sigma_p(0.5) = " << g17(mir::sigma_p(t, 0.5)) << '\n';
    } else if (*bn) {
      const mir::FlatConfig c = mir::FlatConfig::load(spec_path);
      const std::string format = c.str("format", "csv");
      const bool timing = c.flag("timing", false);
      const std::string out = c.str("out", "");
      const mir::ExperimentSpec spec = mir::experiment_from_config(c);
      c.reject_unused();
      const mir::ResultTable t = mir::run_experiment(spec);
      write_text(out, mir::emit(t, format, {timing}));
    } else if (*vf) {
      const auto rows = mir::verification_suite(quick);
      mir::print_checks(rows, std::cout);
      for (const auto& r : rows)
        if (!r.pass) return 1;
    } else if (*an) {
      const mir::FlatConfig c = mir::FlatConfig::load(config_path);
      const std::string out = c.str("out", "");
      const mir::AnalysisConfig cfg = mir::analysis_from_config(c);
      c.reject_unused();
      const mir::AnalysisReport rep = mir::analyze(cfg);
      std::string text;
      if (cfg.format == "markdown" || cfg.format == "both") text += mir::analysis_markdown(rep);
      if (cfg.format == "both") text += "\n";
      if (cfg.format == "csv" || cfg.format == "both") text += mir::analysis_csv(rep);
      write_text(out, text);
    }
  } catch (const mir::Error& e) {
    std::cerr << mir::errc_tag(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
