#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>

#include "sqan/errors.hpp"
#include "sqan/linear_analytics.hpp"
#include "sqan/params.hpp"

namespace sqan {

// Weak-nonlinearity hierarchy for the analyzer Kerr term, in the scaled
// variables where the mean carries a 1/sqrt(lambda) amplitude and the drive is
// normalized as eta' = eta * sqrt(lambda):
//
//   <s2>  = lambda^(-1/2) * (s2_bar + lambda * s2_first + ...),
//   C     = C_bar + lambda * C_first + ...
//
// The zeroth-order mean solves a classical Kerr fixed point (the only
// nonlinear solve); every later stage is linear with s2_bar-dressed
// coefficients. Closed forms for the class mean separation and combined
// variance follow from the zeroth-order quantities.

struct PerturbativeSolution {
  // expansion exponents of the scaled ansatz
  static constexpr double kAlpha = -0.5;
  static constexpr double kBeta = 0.5;
  static constexpr int kP = 0;
  static constexpr int kQ = 1;

  double lambda = 0.0;
  cplx s2_bar{0.0, 0.0};
  bool multistable_flagged = false;   // another stable Kerr root was detected
  Eigen::Matrix2cd J_bar;             // dressed analyzer Jacobian
  Eigen::Matrix4cd cbar_full_1, cbar_full_2;  // zeroth-order covariance, per class

  struct CumulantTriple {
    cplx c_ss{}, c_ds{}, c_dd{};  // C_{s2 s2}, C_{s2^dag s2}, C_{s2^dag s2^dag}
  };
  CumulantTriple cbar1, cbar2;

  Eigen::Vector2cd first_order_mean_1 = Eigen::Vector2cd::Zero();  // (s2, s2^dag) corrections
  Eigen::Vector2cd first_order_mean_2 = Eigen::Vector2cd::Zero();
};

namespace pert_detail {

inline Eigen::Matrix2cd quad_map() {
  const cplx i(0.0, 1.0);
  Eigen::Matrix2cd U;
  U << 1.0, 1.0, -i, i;
  return U / std::sqrt(2.0);
}

inline Eigen::Matrix2cd dressed_jacobian(const ChainParams& p, cplx s2bar) {
  const cplx i(0.0, 1.0);
  const cplx p2 = p.g2 * std::polar(1.0, p.phi2);
  Eigen::Matrix2cd J;
  J(0, 0) = i * p.delta2 - 0.5 * (p.kappa2 + p.gamma) + i * 2.0 * s2bar * std::conj(s2bar);
  J(0, 1) = -i * p2 + i * s2bar * s2bar;
  J(1, 0) = i * std::conj(p2) - i * std::conj(s2bar) * std::conj(s2bar);
  J(1, 1) = -i * p.delta2 - 0.5 * (p.kappa2 + p.gamma) - i * 2.0 * s2bar * std::conj(s2bar);
  return J;
}

// 4x4 drift with the analyzer block dressed by the zeroth-order mean; the
// squeezer block and the one-way coupling are unchanged.
inline LinearSystem dressed_system(const ChainParams& p, cplx s2bar) {
  const cplx i(0.0, 1.0);
  LinearSystem sys = build_linear_system(p);
  const Eigen::Matrix2cd Jan = dressed_jacobian(p, s2bar);
  sys.J.block<2, 2>(2, 2) = Jan;
  sys.D(2, 2) += i * s2bar * s2bar;
  sys.D(3, 3) += -i * std::conj(s2bar) * std::conj(s2bar);
  return sys;
}

// rhs of the scaled classical fixed-point equation and the Wirtinger
// derivatives (d/ds, d/ds*), which coincide with the dressed Jacobian row.
inline cplx scaled_mean_rhs(const ChainParams& p, double eta_scaled, cplx s) {
  const cplx i(0.0, 1.0);
  const cplx p2 = p.g2 * std::polar(1.0, p.phi2);
  return (i * p.delta2 - 0.5 * (p.kappa2 + p.gamma)) * s - i * p2 * std::conj(s) -
         std::sqrt(p.kappa2) * eta_scaled * std::polar(1.0, p.phi_d2) +
         i * s * s * std::conj(s);
}

inline bool newton_scaled_mean(const ChainParams& p, double eta_scaled, cplx& s) {
  for (int it = 0; it < 200; ++it) {
    const cplx F = scaled_mean_rhs(p, eta_scaled, s);
    const double fn = std::abs(F);
    if (fn < 1e-13 * (1.0 + std::abs(s))) return true;
    const cplx i(0.0, 1.0);
    const cplx p2 = p.g2 * std::polar(1.0, p.phi2);
    const cplx dF_ds = i * p.delta2 - 0.5 * (p.kappa2 + p.gamma) + i * 2.0 * s * std::conj(s);
    const cplx dF_dsc = -i * p2 + i * s * s;
    // real 2x2 Newton system in (Re s, Im s)
    const cplx dx = dF_ds + dF_dsc;
    const cplx dy = i * (dF_ds - dF_dsc);
    Eigen::Matrix2d Jr;
    Jr << dx.real(), dy.real(), dx.imag(), dy.imag();
    if (!Jr.allFinite() || std::abs(Jr.determinant()) < 1e-300) return false;
    const Eigen::Vector2d step = Jr.partialPivLu().solve(Eigen::Vector2d(-F.real(), -F.imag()));
    double alpha = 1.0;
    for (int h = 0; h < 60; ++h) {
      const cplx trial = s + alpha * cplx(step(0), step(1));
      if (std::abs(scaled_mean_rhs(p, eta_scaled, trial)) < (1.0 - 1e-4 * alpha) * fn) {
        s = trial;
        break;
      }
      alpha *= 0.5;
      if (h == 59) return false;
    }
  }
  return std::abs(scaled_mean_rhs(p, eta_scaled, s)) < 1e-10 * (1.0 + std::abs(s));
}

}  // namespace pert_detail

// Zeroth-order scaled analyzer mean: the Kerr fixed point reached by ramping
// the scaled drive up from zero in 32 continuation steps (this mirrors the
// branch reached by integrating the full TEOMs from vacuum).
inline cplx solve_zeroth_mean(const ChainParams& p, bool* multistable_flag = nullptr) {
  p.validate();
  if (multistable_flag) *multistable_flag = false;
  const double eta_scaled = p.eta_d2 * std::sqrt(p.lambda);
  cplx s(0.0, 0.0);
  constexpr int kRampSteps = 32;
  for (int r = 1; r <= kRampSteps; ++r) {
    const double eta_r = eta_scaled * static_cast<double>(r) / kRampSteps;
    if (!pert_detail::newton_scaled_mean(p, eta_r, s))
      throw physics_error("solve_zeroth_mean: Newton did not converge at ramp step " +
                          std::to_string(r));
  }
  if (multistable_flag && eta_scaled > 0.0) {
    // probe a few alternative starts for another stable fixed point
    for (const cplx& start :
         {2.0 * s + cplx(1.0, 0.0), -s + cplx(0.0, 1.0), cplx(3.0, -3.0)}) {
      cplx alt = start;
      if (!pert_detail::newton_scaled_mean(p, eta_scaled, alt)) continue;
      if (std::abs(alt - s) > 1e-6 * (1.0 + std::abs(s)) &&
          max_real_eigenvalue(pert_detail::dressed_system(p, alt).J) < 0.0) {
        *multistable_flag = true;
        break;
      }
    }
  }
  return s;
}

// Zeroth-order second cumulants for one class: the steady covariance of the
// s2_bar-dressed linear chain. Throws if the dressed drift is unstable.
inline Eigen::Matrix4cd zeroth_cumulants_full(const ChainParams& class_params, cplx s2bar) {
  const LinearSystem sys = pert_detail::dressed_system(class_params, s2bar);
  const double max_re = max_real_eigenvalue(sys.J);
  if (max_re >= 0.0)
    throw physics_error("zeroth_cumulants: dressed drift unstable (max Re eig = " +
                        std::to_string(max_re) + ")");
  return solve_lyapunov(sys.J, sys.D);
}

inline PerturbativeSolution::CumulantTriple zeroth_cumulants(const ChainParams& class_params,
                                                             cplx s2bar) {
  const Eigen::Matrix4cd C = zeroth_cumulants_full(class_params, s2bar);
  return {C(2, 2), C(2, 3), C(3, 3)};
}

// First-order mean correction for one class (the beta-order term), from the
// dressed Jacobian and that class's zeroth cumulants.
inline Eigen::Vector2cd first_order_mean(const Eigen::Matrix2cd& J_bar,
                                         const PerturbativeSolution::CumulantTriple& cbar,
                                         cplx s2bar) {
  const cplx i(0.0, 1.0);
  Eigen::Matrix2cd M;
  M << 2.0 * cbar.c_ds, cbar.c_ss, -cbar.c_dd, -2.0 * cbar.c_ds;
  const Eigen::Vector2cd z(s2bar, std::conj(s2bar));
  return -i * (J_bar.partialPivLu().solve(M * z));
}

// First-order cumulant correction (the q-order term) for one class: a linear
// solve against the same dressed drift, sourced by the zeroth-order cumulants
// and the first-order mean.
inline Eigen::Matrix4cd first_order_cumulants(const ChainParams& class_params, cplx s2bar,
                                              const Eigen::Matrix4cd& cbar,
                                              const Eigen::Vector2cd& mean1) {
  const cplx i(0.0, 1.0);
  const cplx sb = s2bar, sbc = std::conj(s2bar);
  const cplx v = mean1(0), vd = mean1(1);
  const cplx sq1 = 2.0 * sb * v;          // first-order part of <s2>^2
  const cplx sq2 = sb * vd + sbc * v;     // first-order part of <s2><s2^dag>
  const cplx sq3 = 2.0 * sbc * vd;        // first-order part of <s2^dag>^2
  const cplx c12 = cbar(0, 2), c22 = cbar(2, 2);
  const cplx d12 = cbar(1, 2), d21 = cbar(0, 3), d22 = cbar(2, 3);
  const cplx e12 = cbar(1, 3), e22 = cbar(3, 3);

  Eigen::Matrix4cd S = Eigen::Matrix4cd::Zero();
  S(0, 2) = i * (d21 * c22 + 2.0 * c12 * d22 + d21 * sq1 + 2.0 * c12 * sq2);
  S(2, 2) = i * (c22 + 6.0 * c22 * d22 + sq1 + 2.0 * d22 * sq1 + 4.0 * c22 * sq2);
  S(1, 2) = i * (2.0 * d12 * d22 + e12 * c22 + e12 * sq1 + 2.0 * d12 * sq2);
  S(0, 3) = -i * (2.0 * d21 * d22 + c12 * e22 + 2.0 * d21 * sq2 + c12 * sq3);
  S(2, 3) = i * (e22 * sq1 - c22 * sq3);
  S(1, 3) = -i * (2.0 * e12 * d22 + d12 * e22 + 2.0 * e12 * sq2 + d12 * sq3);
  S(3, 3) = -i * (e22 + 6.0 * d22 * e22 + 4.0 * e22 * sq2 + sq3 + 2.0 * d22 * sq3);
  S(2, 0) = S(0, 2);
  S(2, 1) = S(1, 2);
  S(3, 0) = S(0, 3);
  S(3, 2) = S(2, 3);
  S(3, 1) = S(1, 3);

  const LinearSystem sys = pert_detail::dressed_system(class_params, s2bar);
  return solve_lyapunov(sys.J, S);
}

// The two class parameter sets must share the analyzer side (pump, drive,
// Kerr); they may differ in the squeezer pump phase or detuning.
inline PerturbativeSolution build_perturbative_solution(const ChainParams& class1,
                                                        const ChainParams& class2) {
  if (class1.g2 != class2.g2 || class1.phi2 != class2.phi2 || class1.lambda != class2.lambda ||
      class1.eta_d2 != class2.eta_d2 || class1.phi_d2 != class2.phi_d2 ||
      class1.delta2 != class2.delta2)
    throw std::invalid_argument("build_perturbative_solution: classes differ on the analyzer side");
  PerturbativeSolution sol;
  sol.lambda = class1.lambda;
  sol.s2_bar = solve_zeroth_mean(class1, &sol.multistable_flagged);
  sol.J_bar = pert_detail::dressed_jacobian(class1, sol.s2_bar);
  sol.cbar_full_1 = zeroth_cumulants_full(class1, sol.s2_bar);
  sol.cbar_full_2 = zeroth_cumulants_full(class2, sol.s2_bar);
  sol.cbar1 = {sol.cbar_full_1(2, 2), sol.cbar_full_1(2, 3), sol.cbar_full_1(3, 3)};
  sol.cbar2 = {sol.cbar_full_2(2, 2), sol.cbar_full_2(2, 3), sol.cbar_full_2(3, 3)};
  sol.first_order_mean_1 = first_order_mean(sol.J_bar, sol.cbar1, sol.s2_bar);
  sol.first_order_mean_2 = first_order_mean(sol.J_bar, sol.cbar2, sol.s2_bar);
  return sol;
}

inline PerturbativeSolution build_perturbative_solution(const ChainParams& base,
                                                        ClassEncoding enc = ClassEncoding::pump_phase,
                                                        double chi = 0.0) {
  return build_perturbative_solution(apply_class(base, 1, enc, chi),
                                     apply_class(base, 2, enc, chi));
}

// Closed-form mean separation of the filtered shots (class 1 minus class 2),
// linear in sqrt(lambda * T).
inline Eigen::Vector2d perturbative_delta_mu(const PerturbativeSolution& sol, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("perturbative_delta_mu: T must be > 0");
  if (sol.lambda == 0.0) return Eigen::Vector2d::Zero();
  const cplx i(0.0, 1.0);
  const cplx dcss = sol.cbar2.c_ss - sol.cbar1.c_ss;
  const cplx dcds = sol.cbar2.c_ds - sol.cbar1.c_ds;
  const cplx dcdd = sol.cbar2.c_dd - sol.cbar1.c_dd;
  Eigen::Matrix2cd dM;
  dM << 2.0 * dcds, dcss, -dcdd, -2.0 * dcds;
  const Eigen::Vector2cd z(sol.s2_bar, std::conj(sol.s2_bar));
  const Eigen::Vector2cd dmu =
      i * std::sqrt(sol.lambda * T) *
      (pert_detail::quad_map() * sol.J_bar.partialPivLu().solve(dM * z));
  const double scale = 1.0 + dmu.norm();
  if (std::abs(dmu(0).imag()) > 1e-10 * scale || std::abs(dmu(1).imag()) > 1e-10 * scale)
    throw physics_error("perturbative_delta_mu: non-real result, imaginary residue " +
                        std::to_string(std::max(std::abs(dmu(0).imag()), std::abs(dmu(1).imag()))));
  return Eigen::Vector2d(dmu(0).real(), dmu(1).real());
}

// Combined variance of the two classes: the average of the per-class
// intracavity quadrature covariances evaluated with the zeroth-order
// cumulants. The vacuum floor keeps V positive definite; dropping it (the
// bare quarter-form of the cumulant block) makes V indefinite deep in the
// squeezed regime and produces negative discriminants.
inline Eigen::Matrix2d perturbative_V(const PerturbativeSolution& sol) {
  Eigen::Matrix2cd S;
  S << sol.cbar1.c_ss + sol.cbar2.c_ss, sol.cbar1.c_ds + sol.cbar2.c_ds,
      sol.cbar1.c_ds + sol.cbar2.c_ds, sol.cbar1.c_dd + sol.cbar2.c_dd;
  const Eigen::Matrix2cd U = pert_detail::quad_map();
  const Eigen::Matrix2cd V = 0.5 * U * S * U.transpose();
  const double residue = std::max(std::abs(V(0, 0).imag()),
                                  std::max(std::abs(V(0, 1).imag()), std::abs(V(1, 1).imag())));
  if (residue > 1e-10 * (1.0 + V.cwiseAbs().maxCoeff()))
    throw physics_error("perturbative_V: non-real combined variance");
  return 0.5 * Eigen::Matrix2d::Identity() + V.real();
}

inline double perturbative_fisher(const PerturbativeSolution& sol, double T) {
  const Eigen::Vector2d dmu = perturbative_delta_mu(sol, T);
  if (dmu.squaredNorm() == 0.0) return 0.0;
  const Eigen::Matrix2d V = perturbative_V(sol);
  const double det = V.determinant();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det))
    throw physics_error("perturbative_fisher: singular combined variance");
  return dmu.dot(V.inverse() * dmu);
}

}  // namespace sqan
