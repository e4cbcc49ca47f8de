#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqan/errors.hpp"
#include "sqan/experiment/config.hpp"
#include "sqan/experiment/io.hpp"
#include "sqan/integrators.hpp"
#include "sqan/linear_analytics.hpp"
#include "sqan/measurement.hpp"
#include "sqan/metrics.hpp"
#include "sqan/perturbative.hpp"
#include "sqan/snail_conversion.hpp"
#include "sqan/version.hpp"

namespace sqan {

// Scenario drivers behind the CLI. Each returns its results and a JSON report;
// run_scenario dispatches, writes the output files, and is the single place
// that touches the filesystem.

namespace runner_detail {

inline Eigen::Vector2d quadrature_mean(const CumulantState& x) {
  const cplx i(0.0, 1.0);
  const cplx iq = (x.s2() + x.s2d()) / std::sqrt(2.0);
  const cplx qq = -i * (x.s2() - x.s2d()) / std::sqrt(2.0);
  return {iq.real(), qq.real()};
}

inline nlohmann::json mat2_json(const Eigen::Matrix2d& m) {
  return nlohmann::json::array({{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}});
}

inline nlohmann::json vec2_json(const Eigen::Vector2d& v) {
  return nlohmann::json::array({v(0), v(1)});
}

}  // namespace runner_detail

// Filtering-time-normalized figure-of-merit pair computed from the TEOM steady
// states of the two classes through the intracavity covariance proxy:
// delta_mu_norm = |dmu|/sqrt(T) and fisher_norm = D_F/T.
struct ProxyMetrics {
  double delta_mu_norm = 0.0;
  double fisher_norm = 0.0;
  Eigen::Vector2d delta_mu_hat = Eigen::Vector2d::Zero();
  Eigen::Matrix2d V_hat = Eigen::Matrix2d::Zero();
};

inline ProxyMetrics teom_proxy_metrics(const ChainParams& base, const SimControls& c,
                                       ClassEncoding enc = ClassEncoding::pump_phase,
                                       double chi = 0.0) {
  const CumulantState st1 = solve_steady(apply_class(base, 1, enc, chi), c);
  const CumulantState st2 = solve_steady(apply_class(base, 2, enc, chi), c);
  ProxyMetrics pm;
  pm.delta_mu_hat = runner_detail::quadrature_mean(st1) - runner_detail::quadrature_mean(st2);
  pm.delta_mu_norm = pm.delta_mu_hat.norm();
  const Eigen::Matrix2d V0 =
      0.5 * (intracavity_covariance_proxy(st1) + intracavity_covariance_proxy(st2));
  pm.V_hat = augment_classical_noise(V0, base.n_cl);
  pm.fisher_norm = fisher_discriminant(pm.delta_mu_hat, pm.V_hat);
  return pm;
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

struct ClassifyResult {
  std::vector<ShotRecord> shots1, shots2;
  ClassStats stats;
  double resolved_g1 = 0.0;
  nlohmann::json report;
};

inline ClassifyResult run_classify(const ExperimentConfig& cfg, int n_workers = 1) {
  ChainParams p = cfg.chain;
  if (cfg.classify.g1_frac) {
    ChainParams pth = p;
    p.g1 = *cfg.classify.g1_frac * threshold(pth, Mode::squeezer);
  }
  ClassifyResult r;
  r.resolved_g1 = p.g1;
  r.shots1 = shots_for_class(p, cfg.controls, 1, cfg.classify.encoding, cfg.classify.chi, n_workers);
  r.shots2 = shots_for_class(p, cfg.controls, 2, cfg.classify.encoding, cfg.classify.chi, n_workers);
  r.stats = class_stats(r.shots1, r.shots2);
  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = config_echo(cfg);
  j["resolved_g1"] = r.resolved_g1;
  j["n_shots_per_class"] = cfg.controls.n_traj;
  j["delta_mu"] = runner_detail::vec2_json(r.stats.delta_mu);
  j["delta_mu_norm"] = r.stats.delta_mu_norm;
  j["fisher"] = r.stats.fisher;
  j["fidelity"] = r.stats.fidelity;
  j["mu1"] = runner_detail::vec2_json(r.stats.mu1);
  j["mu2"] = runner_detail::vec2_json(r.stats.mu2);
  j["sigma1"] = runner_detail::mat2_json(r.stats.sigma1);
  j["sigma2"] = runner_detail::mat2_json(r.stats.sigma2);
  j["V"] = runner_detail::mat2_json(r.stats.V);
  r.report = j;
  return r;
}

// ---------------------------------------------------------------------------
// grids
// ---------------------------------------------------------------------------

struct GridResult {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // row-major in axis order
  std::vector<std::string> log;           // one entry per failed point
  nlohmann::json report;
};

namespace runner_detail {

// Stochastic end-to-end check at one operating point; used for the opt-in
// spot checks of the sweep grids.
inline nlohmann::json stochastic_spot_check(const ChainParams& p, const SimControls& c,
                                            ClassEncoding enc, double chi, int n_workers) {
  const auto shots1 = shots_for_class(p, c, 1, enc, chi, n_workers);
  const auto shots2 = shots_for_class(p, c, 2, enc, chi, n_workers);
  const ClassStats st = class_stats(shots1, shots2);
  nlohmann::json j;
  j["fidelity"] = st.fidelity;
  j["delta_mu_norm"] = st.delta_mu_norm;
  j["fisher"] = st.fisher;
  return j;
}

}  // namespace runner_detail

inline GridResult run_sweep2d(const ExperimentConfig& cfg, int n_workers = 1) {
  if (!cfg.axis1 || !cfg.axis2) throw config_error("sweep2d requires both sweep axes");
  const SweepAxis& a1 = *cfg.axis1;
  const SweepAxis& a2 = *cfg.axis2;
  const int n1 = a1.steps, n2 = a2.steps;
  GridResult g;
  g.columns = {"axis1", "axis2", "delta_mu_norm", "fisher_norm"};
  g.rows.assign(static_cast<std::size_t>(n1) * n2, {});
  std::vector<std::string> logs(g.rows.size());
  parallel_for_index(static_cast<std::int64_t>(g.rows.size()), n_workers, [&](std::int64_t idx) {
    const int i = static_cast<int>(idx) / n2;
    const int k = static_cast<int>(idx) % n2;
    const double v1 = a1.value(i);
    const double v2 = a2.value(k);
    ChainParams p = cfg.chain;
    set_chain_param(p, a1.param, v1);
    set_chain_param(p, a2.param, v2);
    double dmu = std::nan(""), df = std::nan("");
    try {
      const ProxyMetrics pm = teom_proxy_metrics(p, cfg.controls, cfg.classify.encoding,
                                                 cfg.classify.chi);
      dmu = pm.delta_mu_norm;
      df = pm.fisher_norm;
    } catch (const std::exception& e) {
      logs[static_cast<std::size_t>(idx)] =
          a1.param + "=" + std::to_string(v1) + ", " + a2.param + "=" + std::to_string(v2) + ": " +
          e.what();
    }
    g.rows[static_cast<std::size_t>(idx)] = {v1, v2, dmu, df};
  });
  for (auto& l : logs)
    if (!l.empty()) g.log.push_back(std::move(l));

  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = config_echo(cfg);
  j["failed_points"] = g.log;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& sc : cfg.spot_checks) {
    ChainParams p = cfg.chain;
    set_chain_param(p, a1.param, sc.axis1);
    set_chain_param(p, a2.param, sc.axis2);
    nlohmann::json entry = {{"axis1", sc.axis1}, {"axis2", sc.axis2}};
    try {
      entry.update(runner_detail::stochastic_spot_check(p, cfg.controls, cfg.classify.encoding,
                                                        cfg.classify.chi, n_workers));
    } catch (const std::exception& e) {
      entry["error"] = e.what();
    }
    checks.push_back(entry);
  }
  j["spot_checks"] = checks;
  g.report = j;
  return g;
}

inline GridResult run_noise_study(const ExperimentConfig& cfg, int n_workers = 1) {
  SweepAxis axis;
  if (cfg.axis1) {
    axis = *cfg.axis1;
  } else {
    axis = SweepAxis{"phi2", 0.0, 2.0 * M_PI, 41};
  }
  const int n_phase = axis.steps;
  // quantum part once per phase point; classical noise enters only the metric
  std::vector<ProxyMetrics> base(static_cast<std::size_t>(n_phase));
  std::vector<std::string> logs(static_cast<std::size_t>(n_phase));
  ChainParams chain0 = cfg.chain;
  chain0.n_cl = 0.0;
  parallel_for_index(n_phase, n_workers, [&](std::int64_t k) {
    ChainParams p = chain0;
    set_chain_param(p, axis.param, axis.value(static_cast<int>(k)));
    try {
      base[static_cast<std::size_t>(k)] =
          teom_proxy_metrics(p, cfg.controls, cfg.classify.encoding, cfg.classify.chi);
    } catch (const std::exception& e) {
      base[static_cast<std::size_t>(k)].delta_mu_norm = std::nan("");
      logs[static_cast<std::size_t>(k)] =
          axis.param + "=" + std::to_string(axis.value(static_cast<int>(k))) + ": " + e.what();
    }
  });

  GridResult g;
  g.columns = {"n_cl", axis.param, "delta_mu_norm", "fisher_norm"};
  nlohmann::json argmax = nlohmann::json::array();
  for (double ncl : cfg.noise.n_cl_values) {
    double best_df = -1.0, best_df_phase = std::nan("");
    double best_dmu = -1.0, best_dmu_phase = std::nan("");
    for (int k = 0; k < n_phase; ++k) {
      const double phase = axis.value(k);
      const ProxyMetrics& pm = base[static_cast<std::size_t>(k)];
      double df = std::nan("");
      if (std::isfinite(pm.delta_mu_norm)) {
        df = fisher_discriminant(pm.delta_mu_hat, augment_classical_noise(pm.V_hat, ncl));
        if (df > best_df) {
          best_df = df;
          best_df_phase = phase;
        }
        if (pm.delta_mu_norm > best_dmu) {
          best_dmu = pm.delta_mu_norm;
          best_dmu_phase = phase;
        }
      }
      g.rows.push_back({ncl, phase, pm.delta_mu_norm, df});
    }
    argmax.push_back({{"n_cl", ncl},
                      {"argmax_fisher_phase", best_df_phase},
                      {"max_fisher_norm", best_df},
                      {"argmax_delta_mu_phase", best_dmu_phase},
                      {"max_delta_mu_norm", best_dmu}});
  }
  for (auto& l : logs)
    if (!l.empty()) g.log.push_back(std::move(l));
  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = config_echo(cfg);
  j["failed_points"] = g.log;
  j["argmax"] = argmax;
  g.report = j;
  return g;
}

// Base parameters of the displacement-free readout scenario: both pumps fixed
// at g_frac of their zero-detuning thresholds, the signal drive phase locked
// to the analyzer amplification axis (phi_d2 = -pi/4 + phi2/2).
inline ChainParams readout_base_params(const ExperimentConfig& cfg) {
  ChainParams p = cfg.chain;
  ChainParams zero_det = p;
  zero_det.delta1 = 0.0;
  zero_det.delta2 = 0.0;
  p.g1 = cfg.readout.g_frac * threshold(zero_det, Mode::squeezer);
  p.g2 = cfg.readout.g_frac * threshold(zero_det, Mode::analyzer);
  p.phi_d2 = -M_PI / 4.0 + p.phi2 / 2.0;
  return p;
}

inline GridResult run_readout_map(const ExperimentConfig& cfg, int n_workers = 1) {
  const ChainParams base = readout_base_params(cfg);
  const int n1 = cfg.readout.phi1_steps;
  const int n2 = cfg.readout.chi_steps;
  auto phi1_at = [&](int i) {
    return cfg.readout.phi1_min + (cfg.readout.phi1_max - cfg.readout.phi1_min) *
                                      static_cast<double>(i) / static_cast<double>(n1 - 1);
  };
  auto chi_at = [&](int k) {
    return cfg.readout.chi_min + (cfg.readout.chi_max - cfg.readout.chi_min) *
                                     static_cast<double>(k) / static_cast<double>(n2 - 1);
  };
  GridResult g;
  g.columns = {"phi1", "chi", "delta_mu_norm", "fisher_norm"};
  g.rows.assign(static_cast<std::size_t>(n1) * n2, {});
  std::vector<std::string> logs(g.rows.size());
  parallel_for_index(static_cast<std::int64_t>(g.rows.size()), n_workers, [&](std::int64_t idx) {
    const int i = static_cast<int>(idx) / n2;
    const int k = static_cast<int>(idx) % n2;
    const double phi1 = phi1_at(i);
    const double chi = chi_at(k);
    ChainParams p = base;
    p.phi1 = phi1;
    double dmu = std::nan(""), df = std::nan("");
    try {
      const PerturbativeSolution sol =
          build_perturbative_solution(p, ClassEncoding::dispersive_shift, chi);
      dmu = perturbative_delta_mu(sol, 1.0).norm();  // already the sqrt(T)-normalized value
      df = perturbative_fisher(sol, 1.0);
    } catch (const std::exception& e) {
      logs[static_cast<std::size_t>(idx)] =
          "phi1=" + std::to_string(phi1) + ", chi=" + std::to_string(chi) + ": " + e.what();
    }
    g.rows[static_cast<std::size_t>(idx)] = {phi1, chi, dmu, df};
  });
  for (auto& l : logs)
    if (!l.empty()) g.log.push_back(std::move(l));

  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = config_echo(cfg);
  j["failed_points"] = g.log;
  j["resolved_g1"] = base.g1;
  j["resolved_g2"] = base.g2;
  j["resolved_phi_d2"] = base.phi_d2;
  // grid optimum
  double best = -1.0;
  nlohmann::json opt;
  for (const auto& row : g.rows) {
    if (std::isfinite(row[3]) && row[3] > best) {
      best = row[3];
      opt = {{"phi1", row[0]}, {"chi", row[1]}, {"fisher_norm", row[3]}, {"delta_mu_norm", row[2]}};
    }
  }
  j["optimum"] = opt;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& sc : cfg.spot_checks) {
    ChainParams p = base;
    p.phi1 = sc.axis1;
    nlohmann::json entry = {{"phi1", sc.axis1}, {"chi", sc.axis2}};
    try {
      entry.update(runner_detail::stochastic_spot_check(p, cfg.controls,
                                                        ClassEncoding::dispersive_shift, sc.axis2,
                                                        n_workers));
    } catch (const std::exception& e) {
      entry["error"] = e.what();
    }
    checks.push_back(entry);
  }
  j["spot_checks"] = checks;
  g.report = j;
  return g;
}

// ---------------------------------------------------------------------------
// linear analysis & parameter conversion
// ---------------------------------------------------------------------------

inline nlohmann::json run_linear_analysis(const ExperimentConfig& cfg) {
  const ChainParams& p = cfg.chain;
  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = config_echo(cfg);
  j["threshold_squeezer"] = threshold(p, Mode::squeezer);
  j["threshold_analyzer"] = threshold(p, Mode::analyzer);
  const double half_kappa_an = 0.5 * (p.kappa2 + p.gamma);
  const double g2_20db = half_kappa_an * (std::pow(10.0, 1.0) - 1.0) / (std::pow(10.0, 1.0) + 1.0);
  j["g2_for_20db_gain"] = g2_20db;
  {
    ChainParams q = p;
    q.g2 = g2_20db;
    j["gain_check_db"] = analyzer_gain_db(q);
  }
  if (p.g2 < half_kappa_an) j["gain_db_at_g2"] = analyzer_gain_db(p);
  nlohmann::json axes = nlohmann::json::array();
  for (double phi1 : {0.0, M_PI / 2.0, M_PI, 3.0 * M_PI / 2.0})
    axes.push_back({{"phi1", phi1}, {"squeezing_axis", squeezing_axis(phi1)}});
  j["squeezing_axes"] = axes;
  const LinearSystem sys = build_linear_system(p);
  j["max_real_eigenvalue"] = max_real_eigenvalue(sys.J);
  if (max_real_eigenvalue(sys.J) < 0.0) {
    const Eigen::Matrix4cd C = lyapunov_covariance(sys);
    j["steady_photon_number_squeezer"] = C(0, 1).real();
    j["steady_photon_number_analyzer"] = C(2, 3).real();
    const Eigen::MatrixXd S = filtered_covariance(sys, cfg.controls.t_filter, p.n_cl);
    nlohmann::json sm = nlohmann::json::array();
    for (int r = 0; r < S.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < S.cols(); ++c) row.push_back(S(r, c));
      sm.push_back(row);
    }
    j["filtered_covariance"] = sm;
    j["t_filter"] = cfg.controls.t_filter;
  }
  return j;
}

inline nlohmann::json run_convert(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = config_echo(cfg);
  const ConvertOptions& c = cfg.convert;
  if (c.direction == "to_effective") {
    PhysicalSnailParams ph;
    ph.omega_s = c.omega_s;
    ph.omega_p = 2.0 * c.omega_s;
    ph.g3 = c.g3;
    ph.g4 = c.g4;
    ph.kappa_s = c.kappa_s;
    ph.eps_p = c.eps_p;
    ph.phi_p = c.phi_p;
    ph.eta_sig = c.eta_sig;
    ph.phi_sig = c.phi_sig;
    const EffectiveParams eff = to_effective(ph);
    j["effective"] = {{"delta2", eff.delta2}, {"lambda", eff.lambda}, {"g2", eff.g2},
                      {"phi2", eff.phi2},     {"eta_d2", eff.eta_d2}, {"phi_d2", eff.phi_d2}};
  } else {
    const PhysicalSnailParams ph =
        from_effective(cfg.chain, c.g3, c.g4, c.omega_s, c.kappa_s);
    j["physical"] = {{"omega_s", ph.omega_s}, {"omega_p", ph.omega_p}, {"g3", ph.g3},
                     {"g4", ph.g4},           {"kappa_s", ph.kappa_s}, {"eps_p", ph.eps_p},
                     {"phi_p", ph.phi_p},     {"eta_sig", ph.eta_sig}, {"phi_sig", ph.phi_sig}};
    const EffectiveParams back = to_effective(ph);
    j["round_trip"] = {{"delta2", back.delta2}, {"lambda", back.lambda}, {"g2", back.g2},
                       {"phi2", back.phi2},     {"eta_d2", back.eta_d2}, {"phi_d2", back.phi_d2}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// dispatch + persistence
// ---------------------------------------------------------------------------

inline void run_scenario(const ExperimentConfig& cfg, int n_workers = 1) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output.dir);
  const nlohmann::json echo = config_echo(cfg);
  switch (cfg.scenario) {
    case Scenario::classify: {
      const ClassifyResult r = run_classify(cfg, n_workers);
      if (cfg.output.emit_csv) write_shots_csv(dir / "shots.csv", r.shots1, r.shots2, echo);
      if (cfg.output.emit_json) write_json_file(dir / "metrics.json", r.report);
      break;
    }
    case Scenario::sweep2d: {
      const GridResult g = run_sweep2d(cfg, n_workers);
      if (cfg.output.emit_csv) write_grid_csv(dir / "grid.csv", g.columns, g.rows, echo);
      if (cfg.output.emit_json) write_json_file(dir / "sweep.json", g.report);
      break;
    }
    case Scenario::noise_study: {
      const GridResult g = run_noise_study(cfg, n_workers);
      if (cfg.output.emit_csv) write_grid_csv(dir / "noise.csv", g.columns, g.rows, echo);
      if (cfg.output.emit_json) write_json_file(dir / "noise.json", g.report);
      break;
    }
    case Scenario::readout_map: {
      const GridResult g = run_readout_map(cfg, n_workers);
      if (cfg.output.emit_csv) write_grid_csv(dir / "readout.csv", g.columns, g.rows, echo);
      if (cfg.output.emit_json) write_json_file(dir / "readout.json", g.report);
      break;
    }
    case Scenario::linear_analysis:
      write_json_file(dir / "linear.json", run_linear_analysis(cfg));
      break;
    case Scenario::convert_params:
      write_json_file(dir / "convert.json", run_convert(cfg));
      break;
  }
}

}  // namespace sqan
