#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>

#include "sqan/cumulant_state.hpp"
#include "sqan/errors.hpp"
#include "sqan/expm.hpp"
#include "sqan/params.hpp"

namespace sqan {

// Closed-form machinery for the linear (Kerr-off) chain: drift matrix,
// instability thresholds, steady covariance via a Lyapunov solve, and the
// finite-window filtered covariance of the detected quadratures.
//
// State ordering for all 4x4 objects: z = (s1, s1^dag, s2, s2^dag).

struct LinearSystem {
  Eigen::Matrix4cd J;  // mean-field drift: d<z>/dt = J <z> + const
  Eigen::Matrix4cd D;  // inhomogeneity of the covariance flow: dC/dt = JC + CJ^T + D
  double gamma_H = 1.0;  // homodyne rate entering the trace model (= kappa2)
  int n_modes = 2;

  // Quadrature-extraction matrix for mode k (0-based): rows are (I, Q).
  Eigen::Matrix<cplx, 2, 4> M(int k) const {
    Eigen::Matrix<cplx, 2, 4> m = Eigen::Matrix<cplx, 2, 4>::Zero();
    const double a = std::sqrt(gamma_H) / std::sqrt(2.0);
    const cplx i(0.0, 1.0);
    m(0, 2 * k) = a;
    m(0, 2 * k + 1) = a;
    m(1, 2 * k) = -i * a;
    m(1, 2 * k + 1) = i * a;
    return m;
  }
};

inline LinearSystem build_linear_system(const ChainParams& p) {
  const cplx i(0.0, 1.0);
  const cplx p1 = p.g1 * std::polar(1.0, p.phi1);
  const cplx p2 = p.g2 * std::polar(1.0, p.phi2);
  LinearSystem sys;
  sys.gamma_H = p.kappa2;
  sys.J.setZero();
  sys.J(0, 0) = i * p.delta1 - 0.5 * (p.kappa1 + p.gamma);
  sys.J(0, 1) = -i * p1;
  sys.J(1, 0) = i * std::conj(p1);
  sys.J(1, 1) = -i * p.delta1 - 0.5 * (p.kappa1 + p.gamma);
  sys.J(2, 0) = -p.gamma;   // one-way squeezer -> analyzer
  sys.J(3, 1) = -p.gamma;
  sys.J(2, 2) = i * p.delta2 - 0.5 * (p.kappa2 + p.gamma);
  sys.J(2, 3) = -i * p2;
  sys.J(3, 2) = i * std::conj(p2);
  sys.J(3, 3) = -i * p.delta2 - 0.5 * (p.kappa2 + p.gamma);
  sys.D.setZero();
  sys.D(0, 0) = -i * p1;
  sys.D(1, 1) = i * std::conj(p1);
  sys.D(2, 2) = -i * p2;
  sys.D(3, 3) = i * std::conj(p2);
  return sys;
}

// Largest real part over the spectrum of a block-lower-triangular 4x4 drift
// (the coupler is one-way, so the spectrum is that of the two 2x2 blocks).
inline double max_real_eigenvalue(const Eigen::Matrix4cd& J) {
  auto block_max = [](cplx a, cplx b, cplx c, cplx d) {
    const cplx half_tr = 0.5 * (a + d);
    const cplx disc = std::sqrt(half_tr * half_tr - (a * d - b * c));
    return std::max((half_tr + disc).real(), (half_tr - disc).real());
  };
  const double m1 = block_max(J(0, 0), J(0, 1), J(1, 0), J(1, 1));
  const double m2 = block_max(J(2, 2), J(2, 3), J(3, 2), J(3, 3));
  return std::max(m1, m2);
}

enum class Mode { squeezer, analyzer };

// Smallest pump strength at which the chosen mode's 2x2 block acquires a zero
// real-part eigenvalue. Bisection to 1e-10 absolute.
inline double threshold(const ChainParams& p, Mode which) {
  const double delta = (which == Mode::squeezer) ? p.delta1 : p.delta2;
  const double kappa_tot = (which == Mode::squeezer) ? p.kappa1 + p.gamma : p.kappa2 + p.gamma;
  auto max_re = [&](double g) {
    const cplx i(0.0, 1.0);
    const cplx a = i * delta - 0.5 * kappa_tot;
    const cplx d = -i * delta - 0.5 * kappa_tot;
    const cplx bc = (-i * g) * (i * g);  // phase drops out of b*c
    const cplx half_tr = 0.5 * (a + d);
    const cplx disc = std::sqrt(half_tr * half_tr - (a * d - bc));
    return std::max((half_tr + disc).real(), (half_tr - disc).real());
  };
  double lo = 0.0;
  double hi = 0.5 * kappa_tot + std::abs(delta) + 1.0;
  while (max_re(hi) < 0.0) hi *= 2.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (max_re(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Steady normal-ordered covariance: solves J C + C J^T + D = 0 directly
// (Kronecker form). Throws physics_error if J is not strictly stable.
inline Eigen::Matrix4cd solve_lyapunov(const Eigen::Matrix4cd& J, const Eigen::Matrix4cd& D) {
  if (max_real_eigenvalue(J) >= 0.0)
    throw physics_error("solve_lyapunov: drift matrix is not stable (max Re eig = " +
                        std::to_string(max_real_eigenvalue(J)) + ")");
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(16, 16);
  Eigen::VectorXcd rhs(16);
  // row-major vec: X(i,j) -> index 4*i + j; (J X + X J^T)(i,j) = sum_k J(i,k) X(k,j) + X(i,k) J(j,k)
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const int r = 4 * i + j;
      for (int k = 0; k < 4; ++k) {
        A(r, 4 * k + j) += J(i, k);
        A(r, 4 * i + k) += J(j, k);
      }
      rhs(r) = -D(i, j);
    }
  }
  const Eigen::VectorXcd x = A.partialPivLu().solve(rhs);
  Eigen::Matrix4cd C;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) C(i, j) = x(4 * i + j);
  return C;
}

inline Eigen::Matrix4cd lyapunov_covariance(const LinearSystem& sys) {
  return solve_lyapunov(sys.J, sys.D);
}

// Pack a 4x4 covariance matrix in z-ordering from a cumulant state.
inline Eigen::Matrix4cd covariance_from_state(const CumulantState& x) {
  Eigen::Matrix4cd C;
  C(0, 0) = x.c_s1s1();
  C(0, 1) = x.c_s1d_s1();
  C(0, 2) = x.c_s1s2();
  C(0, 3) = x.c_s2d_s1();
  C(1, 1) = x.c_s1d_s1d();
  C(1, 2) = x.c_s1d_s2();
  C(1, 3) = x.c_s1d_s2d();
  C(2, 2) = x.c_s2s2();
  C(2, 3) = x.c_s2d_s2();
  C(3, 3) = x.c_s2d_s2d();
  C(1, 0) = C(0, 1);
  C(2, 0) = C(0, 2);
  C(3, 0) = C(0, 3);
  C(2, 1) = C(1, 2);
  C(3, 1) = C(1, 3);
  C(3, 2) = C(2, 3);
  return C;
}

namespace lin_detail {

inline Eigen::MatrixXd assemble_filtered(const LinearSystem& sys, const Eigen::Matrix4cd& X,
                                         double n_cl) {
  const int K = sys.n_modes;
  Eigen::MatrixXd out(2 * K, 2 * K);
  for (int j = 0; j < K; ++j) {
    for (int k = 0; k < K; ++k) {
      Eigen::Matrix2cd blk = -0.5 * (sys.M(j) * X * sys.M(k).transpose());
      if (j == k) blk += 0.5 * (1.0 + n_cl) * Eigen::Matrix2cd::Identity();
      out.block<2, 2>(2 * j, 2 * k) = blk.real();
    }
  }
  return out;
}

}  // namespace lin_detail

// Long-filtering-time limit of the detected covariance: the two-term form with
// the O(1/T) corrections dropped.
inline Eigen::MatrixXd filtered_covariance_longtime(const LinearSystem& sys, double n_cl) {
  if (n_cl < 0.0) throw std::invalid_argument("filtered_covariance_longtime: n_cl must be >= 0");
  const Eigen::Matrix4cd C = lyapunov_covariance(sys);
  const Eigen::PartialPivLU<Eigen::Matrix4cd> luJ(sys.J);
  const Eigen::Matrix4cd CJTinv = luJ.solve(C.transpose()).transpose();
  const Eigen::Matrix4cd JinvC = luJ.solve(C);
  return lin_detail::assemble_filtered(sys, CJTinv + JinvC, n_cl);
}

// Covariance matrix of the boxcar-filtered single-shot (I, Q) outcomes for all
// mode pairs, at finite filtering window T. Returns the real 2K x 2K matrix in
// mode-major blocks; block (j, k) relates mode j's and mode k's detected
// quadratures. Classical noise enters the diagonal blocks only.
inline Eigen::MatrixXd filtered_covariance(const LinearSystem& sys, double T, double n_cl) {
  if (!(T > 0.0)) throw std::invalid_argument("filtered_covariance: T must be > 0");
  if (n_cl < 0.0) throw std::invalid_argument("filtered_covariance: n_cl must be >= 0");
  const Eigen::Matrix4cd C = lyapunov_covariance(sys);
  const Eigen::Matrix4cd J = sys.J;
  const Eigen::PartialPivLU<Eigen::Matrix4cd> luJ(J);
  const Eigen::Matrix4cd I4 = Eigen::Matrix4cd::Identity();

  // A * JT^{-n} = (J^{-n} A^T)^T since (J^T)^T = J
  const auto rsolve = [&](const Eigen::Matrix4cd& A) {
    return Eigen::Matrix4cd(luJ.solve(A.transpose()).transpose());
  };
  const Eigen::Matrix4cd CJTinv = rsolve(C);
  const Eigen::Matrix4cd JinvC = luJ.solve(C);
  const Eigen::Matrix4cd eJT = expm(Eigen::MatrixXcd(J.transpose() * T));
  const Eigen::Matrix4cd eJ = expm(Eigen::MatrixXcd(J * T));
  const Eigen::Matrix4cd CJTinv2 = rsolve(CJTinv);
  const Eigen::Matrix4cd Jinv2_IeJ_C = luJ.solve(luJ.solve((I4 - eJ) * C));

  const Eigen::Matrix4cd X =
      CJTinv + JinvC + (1.0 / T) * (CJTinv2 * (I4 - eJT) + Jinv2_IeJ_C);
  return lin_detail::assemble_filtered(sys, X, n_cl);
}

// Squeezed-axis angle of the detected (I, Q) distribution as a function of the
// squeezer pump phase, wrapped to (-pi/2, pi/2].
inline double squeezing_axis(double phi1) {
  double a = M_PI / 4.0 - phi1 / 2.0;
  a = std::remainder(a, M_PI);
  if (a <= -M_PI / 2.0) a += M_PI;
  if (a > M_PI / 2.0) a -= M_PI;
  return a;
}

// Phase-sensitive power gain of the isolated analyzer in dB: steady response
// ratio of the amplified quadrature, with the coupler included in the
// linewidth. 0 dB at g2 = 0; diverges at threshold.
inline double analyzer_gain_db(const ChainParams& p) {
  const double half_kappa = 0.5 * (p.kappa2 + p.gamma);
  if (!(p.g2 < half_kappa))
    throw physics_error("analyzer_gain_db: g2 at or above the zero-detuning threshold");
  return 20.0 * std::log10((half_kappa + p.g2) / (half_kappa - p.g2));
}

}  // namespace sqan
