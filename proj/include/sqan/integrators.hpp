#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "sqan/errors.hpp"
#include "sqan/linear_analytics.hpp"
#include "sqan/model.hpp"
#include "sqan/params.hpp"
#include "sqan/rng.hpp"

namespace sqan {

// ---------------------------------------------------------------------------
// Deterministic steady state of the TEOMs.
//
// Classic RK4 marching with step halving on non-finite evaluations; "steady"
// means ||rhs||_inf < steady_tol sustained over 10 consecutive steps. The
// Kerr-off drift matrix serves as a stability pre-check so that instability is
// reported with the offending eigenvalue instead of a divergence.
// ---------------------------------------------------------------------------

inline CumulantState solve_steady(const ChainParams& p, const SimControls& c) {
  p.validate();
  {
    const double g_th = threshold(p, Mode::squeezer);
    if (!(p.g1 < g_th))
      throw physics_error("solve_steady: squeezer pump at or above threshold (g1 = " +
                          std::to_string(p.g1) + ", g_th = " + std::to_string(g_th) + ")");
    const double max_re = max_real_eigenvalue(build_linear_system(p).J);
    if (max_re >= 0.0)
      throw physics_error("solve_steady: linearized chain unstable (max Re eig = " +
                          std::to_string(max_re) + ")");
  }

  const double t_max = 50000.0 / p.kappa2;
  double dt = 0.02 / p.kappa2;
  const detail::ModelCoeffs coeffs(p);
  const auto rhs = [&](const CumulantState& s) { return detail::teom_rhs_unchecked(s, coeffs); };
  CumulantState x{};  // vacuum start
  double t = 0.0;
  int quiet = 0;
  int halvings = 0;
  while (t < t_max) {
    const CumulantState k1 = rhs(x);
    if (k1.norm_inf() < c.steady_tol) {
      if (++quiet >= 10) return x;
    } else {
      quiet = 0;
    }
    const CumulantState k2 = rhs(x + (0.5 * dt) * k1);
    const CumulantState k3 = rhs(x + (0.5 * dt) * k2);
    const CumulantState k4 = rhs(x + dt * k3);
    CumulantState next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.finite()) {
      dt *= 0.5;
      if (++halvings > 48)
        throw physics_error("solve_steady: step halving exhausted at t = " + std::to_string(t));
      continue;
    }
    x = next;
    t += dt;
  }
  const double max_re = max_real_eigenvalue(build_linear_system(p).J);
  throw physics_error("solve_steady: no steady state within t_max = " + std::to_string(t_max) +
                      " (Kerr-off max Re eig = " + std::to_string(max_re) + ")");
}

// ---------------------------------------------------------------------------
// Stochastic trajectories (Euler-Maruyama on the STEOMs).
// ---------------------------------------------------------------------------

struct TrajectoryRecord {
  double dt = 0.0;
  double t0 = 0.0;
  std::uint64_t master_seed = 0;
  std::uint64_t traj_index = 0;
  std::uint64_t substream = 0;  // per-trajectory derived seed (rng substream key)
  std::vector<double> t;        // sample times; entry k is the pre-step time t0 + k*dt
  std::vector<cplx> s2;         // conditional <s2> at t[k], before the step over [t[k], t[k]+dt)
  std::vector<double> dW_I;     // Wiener increments consumed by that step
  std::vector<double> dW_Q;
  CumulantState final_state;

  std::size_t size() const { return t.size(); }
};

// One Euler-Maruyama step stream. The observer sees the pre-step state and the
// exact Wiener increments the integrator is about to consume, which is what
// ties the detected record to the backaction.
template <class Observer>
inline CumulantState integrate_steom(const ChainParams& p, double dt, CumulantState x,
                                     std::uint64_t substream, std::uint64_t first_step,
                                     std::uint64_t n_steps, double t0, Observer&& observe) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_steom: dt must be > 0");
  if (!x.finite()) throw std::invalid_argument("integrate_steom: non-finite initial state");
  const detail::ModelCoeffs coeffs(p);
  const double sqrt_dt = std::sqrt(dt);
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    const std::uint64_t step = first_step + k;
    const double dwi = sqrt_dt * rng::normal(substream, step, 0);
    const double dwq = sqrt_dt * rng::normal(substream, step, 1);
    observe(step, t0 + static_cast<double>(k) * dt, x, dwi, dwq);
    x += detail::steom_increment_unchecked(x, coeffs, dwi, dwq, dt);
    if (!x.finite())
      throw physics_error("integrate_steom: trajectory diverged at t = " +
                          std::to_string(t0 + static_cast<double>(k + 1) * dt));
  }
  return x;
}

// Runs fn(traj_index) for every index on a small worker pool. Results must be
// written to per-index slots by fn; the pool imposes no ordering.
template <class Fn>
inline void parallel_for_index(std::int64_t n, int n_workers, Fn&& fn) {
  if (n_workers <= 0) n_workers = static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  if (n_workers == 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  std::mutex err_mutex;
  auto work = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!failed.exchange(true)) err = std::current_exception();
        return;
      }
    }
  };
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failed.load()) std::rethrow_exception(err);
}

// Batch of independent conditioned trajectories, each started from `init`,
// settled for t_settle and then recorded over t_filter. Record storage grows
// as (t_settle + t_filter)/dt samples per trajectory; the measurement-chain
// pipeline uses the streaming variant instead when only shots are needed.
inline std::vector<TrajectoryRecord> run_trajectories(const ChainParams& p, const SimControls& c,
                                                      const CumulantState& init,
                                                      int n_workers = 1) {
  p.validate();
  c.validate();
  const auto n_settle = static_cast<std::uint64_t>(std::llround(c.t_settle / c.dt));
  const auto n_filter = static_cast<std::uint64_t>(std::llround(c.t_filter / c.dt));
  const std::uint64_t n_steps = n_settle + n_filter;
  std::vector<TrajectoryRecord> out(static_cast<std::size_t>(c.n_traj));
  parallel_for_index(c.n_traj, n_workers, [&](std::int64_t idx) {
    TrajectoryRecord rec;
    rec.dt = c.dt;
    rec.t0 = 0.0;
    rec.master_seed = c.seed;
    rec.traj_index = static_cast<std::uint64_t>(idx);
    rec.substream = rng::substream_seed(c.seed, rec.traj_index);
    rec.t.reserve(n_steps);
    rec.s2.reserve(n_steps);
    rec.dW_I.reserve(n_steps);
    rec.dW_Q.reserve(n_steps);
    try {
      rec.final_state = integrate_steom(
          p, c.dt, init, rec.substream, 0, n_steps, 0.0,
          [&](std::uint64_t, double t, const CumulantState& x, double dwi, double dwq) {
            rec.t.push_back(t);
            rec.s2.push_back(x.s2());
            rec.dW_I.push_back(dwi);
            rec.dW_Q.push_back(dwq);
          });
    } catch (const physics_error& e) {
      throw physics_error("trajectory " + std::to_string(idx) + ": " + e.what());
    }
    out[static_cast<std::size_t>(idx)] = std::move(rec);
  });
  return out;
}

}  // namespace sqan
