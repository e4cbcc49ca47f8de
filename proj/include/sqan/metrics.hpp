#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sqan/cumulant_state.hpp"
#include "sqan/measurement.hpp"

namespace sqan {

// Binary-classification metrics on filtered (I, Q) shots: mean separation,
// per-class covariances, combined variance, Fisher discriminant, and QDA
// classification fidelity. All statistics use the unbiased (N-1) covariance.

struct ClassStats {
  Eigen::Vector2d mu1 = Eigen::Vector2d::Zero();
  Eigen::Vector2d mu2 = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sigma1 = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d sigma2 = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d V = Eigen::Matrix2d::Zero();  // (sigma1 + sigma2)/2
  Eigen::Vector2d delta_mu = Eigen::Vector2d::Zero();
  double delta_mu_norm = 0.0;
  double fisher = 0.0;
  double fidelity = 0.0;
};

namespace detail {

inline Eigen::Vector2d shot_mean(const std::vector<ShotRecord>& shots) {
  Eigen::Vector2d m = Eigen::Vector2d::Zero();
  for (const auto& s : shots) m += Eigen::Vector2d(s.I, s.Q);
  return m / static_cast<double>(shots.size());
}

inline Eigen::Matrix2d shot_covariance(const std::vector<ShotRecord>& shots,
                                       const Eigen::Vector2d& mean) {
  Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
  for (const auto& s : shots) {
    const Eigen::Vector2d d = Eigen::Vector2d(s.I, s.Q) - mean;
    c += d * d.transpose();
  }
  return c / static_cast<double>(shots.size() - 1);
}

// Regularization applied before inverting a fitted covariance.
inline Eigen::Matrix2d regularized(const Eigen::Matrix2d& sigma) {
  return sigma + (1e-9 * sigma.trace() / 2.0) * Eigen::Matrix2d::Identity();
}

inline void require_two_shots(const std::vector<ShotRecord>& shots, const char* who) {
  if (shots.size() < 2) throw std::invalid_argument(std::string(who) + ": need >= 2 shots per class");
}

}  // namespace detail

// Componentwise mean difference (class 1 minus class 2) and its l2 norm.
inline std::pair<Eigen::Vector2d, double> mean_separation(const std::vector<ShotRecord>& shots1,
                                                          const std::vector<ShotRecord>& shots2) {
  if (shots1.empty() || shots2.empty())
    throw std::invalid_argument("mean_separation: empty shot class");
  const Eigen::Vector2d d = detail::shot_mean(shots1) - detail::shot_mean(shots2);
  return {d, d.norm()};
}

inline double fisher_discriminant(const Eigen::Vector2d& delta_mu, const Eigen::Matrix2d& V) {
  if (delta_mu.squaredNorm() == 0.0) return 0.0;
  const Eigen::Matrix2d Vr = detail::regularized(V);
  const double det = Vr.determinant();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det))
    throw std::invalid_argument("fisher_discriminant: singular combined variance");
  const double d = delta_mu.dot(Vr.inverse() * delta_mu);
  if (!std::isfinite(d)) throw std::invalid_argument("fisher_discriminant: non-finite result");
  return d;
}

inline double fisher_discriminant(const ClassStats& stats) {
  return fisher_discriminant(stats.delta_mu, stats.V);
}

// Detected covariance under added electronic amplification noise.
inline Eigen::Matrix2d augment_classical_noise(const Eigen::Matrix2d& sigma, double n_cl) {
  if (n_cl < 0.0) throw std::invalid_argument("augment_classical_noise: n_cl must be >= 0");
  return sigma + n_cl * Eigen::Matrix2d::Identity();
}

// Per-class Gaussian likelihood classification with equal priors, trained and
// evaluated on the same shot sets; ties go to class 1.
inline double qda_fidelity(const std::vector<ShotRecord>& shots1,
                           const std::vector<ShotRecord>& shots2) {
  detail::require_two_shots(shots1, "qda_fidelity");
  detail::require_two_shots(shots2, "qda_fidelity");
  const Eigen::Vector2d m1 = detail::shot_mean(shots1);
  const Eigen::Vector2d m2 = detail::shot_mean(shots2);
  const Eigen::Matrix2d s1 = detail::regularized(detail::shot_covariance(shots1, m1));
  const Eigen::Matrix2d s2 = detail::regularized(detail::shot_covariance(shots2, m2));
  const double det1 = s1.determinant();
  const double det2 = s2.determinant();
  if (!(det1 > 0.0) || !(det2 > 0.0))
    throw std::invalid_argument("qda_fidelity: degenerate class covariance");
  const Eigen::Matrix2d p1 = s1.inverse();
  const Eigen::Matrix2d p2 = s2.inverse();
  const double log_det1 = std::log(det1);
  const double log_det2 = std::log(det2);
  auto log_lik = [](const Eigen::Vector2d& x, const Eigen::Vector2d& m, const Eigen::Matrix2d& p,
                    double log_det) {
    const Eigen::Vector2d d = x - m;
    return -0.5 * (d.dot(p * d) + log_det);
  };
  std::size_t correct = 0;
  for (const auto& s : shots1) {
    const Eigen::Vector2d x(s.I, s.Q);
    if (log_lik(x, m1, p1, log_det1) >= log_lik(x, m2, p2, log_det2)) ++correct;
  }
  for (const auto& s : shots2) {
    const Eigen::Vector2d x(s.I, s.Q);
    if (!(log_lik(x, m1, p1, log_det1) >= log_lik(x, m2, p2, log_det2))) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(shots1.size() + shots2.size());
}

// Symmetrized intracavity covariance of the analyzer quadratures built from a
// steady cumulant state; the infinite-shot proxy used by the parameter scans.
inline Eigen::Matrix2d intracavity_covariance_proxy(const CumulantState& x) {
  if (!x.finite()) throw std::invalid_argument("intracavity_covariance_proxy: non-finite state");
  const cplx i(0.0, 1.0);
  Eigen::Matrix2cd U;
  U << 1.0, 1.0, -i, i;
  U /= std::sqrt(2.0);
  Eigen::Matrix2cd M;
  M << x.c_s2s2(), x.c_s2d_s2(), x.c_s2d_s2(), x.c_s2d_s2d();
  const Eigen::Matrix2cd S = U * M * U.transpose();
  return 0.5 * Eigen::Matrix2d::Identity() + S.real();
}

inline ClassStats class_stats(const std::vector<ShotRecord>& shots1,
                              const std::vector<ShotRecord>& shots2) {
  detail::require_two_shots(shots1, "class_stats");
  detail::require_two_shots(shots2, "class_stats");
  ClassStats st;
  st.mu1 = detail::shot_mean(shots1);
  st.mu2 = detail::shot_mean(shots2);
  st.sigma1 = detail::shot_covariance(shots1, st.mu1);
  st.sigma2 = detail::shot_covariance(shots2, st.mu2);
  st.V = 0.5 * (st.sigma1 + st.sigma2);
  st.delta_mu = st.mu1 - st.mu2;
  st.delta_mu_norm = st.delta_mu.norm();
  st.fisher = fisher_discriminant(st.delta_mu, st.V);
  st.fidelity = qda_fidelity(shots1, shots2);
  return st;
}

}  // namespace sqan
