#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sqan/integrators.hpp"
#include "sqan/params.hpp"
#include "sqan/rng.hpp"

namespace sqan {

// Demodulated quadrature record and boxcar filtering.
//
// The detected rates are
//   I(t) = dW_I/dt + sqrt(kappa2/2) <s2 + s2^dag>^c + sqrt(n_cl) xi_cl,I
// (and likewise Q with -i<s2 - s2^dag>^c), where the dW are exactly the
// increments that drove the trajectory. The trace stores the integrated
// per-step increments dI = I(t) dt so that the singular dW/dt part telescopes
// exactly into sums of Wiener increments when filtering; per-sample rates are
// available through i_rate()/q_rate().

struct QuadratureTrace {
  double dt = 0.0;
  std::vector<double> t;   // same grid as the source trajectory record
  std::vector<double> dI;  // integrated increment of the I rate over [t[k], t[k]+dt)
  std::vector<double> dQ;

  std::size_t size() const { return t.size(); }
  double i_rate(std::size_t k) const { return dI[k] / dt; }
  double q_rate(std::size_t k) const { return dQ[k] / dt; }
};

struct ShotRecord {
  double I = 0.0;
  double Q = 0.0;
  int class_label = 0;
  std::uint64_t seed = 0;  // substream seed of the generating trajectory
  double t_filter = 0.0;
};

namespace detail {

// Per-step trace increments; s2/s2d are the pre-step conditional means that
// pair with the increments consumed over the same step (Ito convention).
// Both the stored-trace and the streaming shot paths go through this helper
// so that they agree bitwise.
inline void trace_increments(cplx s2, cplx s2d, double dwi, double dwq, double dt, double kappa2,
                             double n_cl, double dwcl_i, double dwcl_q, double& di, double& dq) {
  const double a = std::sqrt(kappa2 / 2.0);
  const double sig_i = a * (s2 + s2d).real();
  const double sig_q = a * (cplx(0.0, -1.0) * (s2 - s2d)).real();
  di = dwi + sig_i * dt + std::sqrt(n_cl) * dwcl_i;
  dq = dwq + sig_q * dt + std::sqrt(n_cl) * dwcl_q;
}

}  // namespace detail

// Classical noise (lanes 2 and 3) is drawn fresh from noise_seed, so the same
// quantum trajectory can be re-detected under different noise realizations;
// the quantum dW are reused from the record.
inline QuadratureTrace synthesize_trace(const TrajectoryRecord& traj, const ChainParams& p,
                                        std::uint64_t noise_seed) {
  if (traj.size() == 0 || traj.dW_I.size() != traj.size() || traj.dW_Q.size() != traj.size())
    throw std::invalid_argument("synthesize_trace: record has no stored dW increments");
  QuadratureTrace tr;
  tr.dt = traj.dt;
  tr.t = traj.t;
  tr.dI.resize(traj.size());
  tr.dQ.resize(traj.size());
  const double sqrt_dt = std::sqrt(traj.dt);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double dwcl_i = (p.n_cl > 0.0) ? sqrt_dt * rng::normal(noise_seed, k, 2) : 0.0;
    const double dwcl_q = (p.n_cl > 0.0) ? sqrt_dt * rng::normal(noise_seed, k, 3) : 0.0;
    detail::trace_increments(traj.s2[k], std::conj(traj.s2[k]), traj.dW_I[k], traj.dW_Q[k],
                             traj.dt, p.kappa2, p.n_cl, dwcl_i, dwcl_q, tr.dI[k], tr.dQ[k]);
  }
  return tr;
}

// Boxcar filter over the last window of length t_filter:
//   I = (1/sqrt(2 T)) * sum of dI over the window.
inline ShotRecord boxcar_filter(const QuadratureTrace& tr, double t_filter) {
  if (!(t_filter > 0.0)) throw std::invalid_argument("boxcar_filter: t_filter must be > 0");
  if (tr.size() == 0 || !(tr.dt > 0.0)) throw std::invalid_argument("boxcar_filter: empty trace");
  const auto n_window = static_cast<std::size_t>(std::llround(t_filter / tr.dt));
  if (n_window == 0 || n_window > tr.size())
    throw std::invalid_argument("boxcar_filter: filter window exceeds the trace span");
  const double T = static_cast<double>(n_window) * tr.dt;
  const std::size_t first = tr.size() - n_window;
  double sum_i = 0.0, sum_q = 0.0;
  for (std::size_t k = first; k < tr.size(); ++k) {
    sum_i += tr.dI[k];
    sum_q += tr.dQ[k];
  }
  ShotRecord shot;
  shot.I = sum_i / std::sqrt(2.0 * T);
  shot.Q = sum_q / std::sqrt(2.0 * T);
  shot.t_filter = T;
  return shot;
}

// End-to-end pipeline for one class of input states: steady state ->
// conditioned trajectories -> detected traces -> filtered shots. Runs in
// streaming form (no per-step storage); the arithmetic matches
// synthesize_trace + boxcar_filter sample for sample.
inline std::vector<ShotRecord> shots_for_class(const ChainParams& base, const SimControls& c,
                                               int class_label,
                                               ClassEncoding enc = ClassEncoding::pump_phase,
                                               double chi = 0.0, int n_workers = 1) {
  const ChainParams p = apply_class(base, class_label, enc, chi);
  p.validate();
  c.validate();
  const CumulantState init = solve_steady(p, c);
  const auto n_settle = static_cast<std::uint64_t>(std::llround(c.t_settle / c.dt));
  const auto n_filter = static_cast<std::uint64_t>(std::llround(c.t_filter / c.dt));
  const double T = static_cast<double>(n_filter) * c.dt;
  const double sqrt_dt = std::sqrt(c.dt);

  std::vector<ShotRecord> shots(static_cast<std::size_t>(c.n_traj));
  parallel_for_index(c.n_traj, n_workers, [&](std::int64_t idx) {
    const std::uint64_t substream = rng::substream_seed(c.seed, static_cast<std::uint64_t>(idx));
    double sum_i = 0.0, sum_q = 0.0;
    try {
      integrate_steom(
          p, c.dt, init, substream, 0, n_settle + n_filter, 0.0,
          [&](std::uint64_t step, double, const CumulantState& x, double dwi, double dwq) {
            if (step < n_settle) return;
            const double dwcl_i = (p.n_cl > 0.0) ? sqrt_dt * rng::normal(substream, step, 2) : 0.0;
            const double dwcl_q = (p.n_cl > 0.0) ? sqrt_dt * rng::normal(substream, step, 3) : 0.0;
            double di = 0.0, dq = 0.0;
            detail::trace_increments(x.s2(), std::conj(x.s2()), dwi, dwq, c.dt, p.kappa2, p.n_cl,
                                     dwcl_i, dwcl_q, di, dq);
            sum_i += di;
            sum_q += dq;
          });
    } catch (const physics_error& e) {
      throw physics_error("class " + std::to_string(class_label) + ", trajectory " +
                          std::to_string(idx) + ": " + e.what());
    }
    ShotRecord shot;
    shot.I = sum_i / std::sqrt(2.0 * T);
    shot.Q = sum_q / std::sqrt(2.0 * T);
    shot.class_label = class_label;
    shot.seed = substream;
    shot.t_filter = T;
    shots[static_cast<std::size_t>(idx)] = shot;
  });
  return shots;
}

}  // namespace sqan
