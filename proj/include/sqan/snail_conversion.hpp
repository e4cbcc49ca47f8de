#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "sqan/cumulant_state.hpp"
#include "sqan/params.hpp"

namespace sqan {

// Mapping between the physical single-SNAIL description (third/fourth-order
// nonlinearities, pump tone at twice the resonance) and the effective
// stiff-pump parameters of the analyzer mode. Pure algebra, no dynamics.
//
// Sign convention: a positive effective Kerr strength (lambda = -12 g4)
// corresponds to g4 < 0.

struct PhysicalSnailParams {
  double omega_s = 0.0;  // SNAIL resonance
  double omega_p = 0.0;  // pump tone, fixed at 2 * omega_s
  double g3 = 0.0;
  double g4 = 0.0;
  double kappa_s = 0.0;  // linewidth
  double eps_p = 0.0;    // pump amplitude
  double phi_p = 0.0;    // pump phase
  double eta_sig = 0.0;  // signal drive amplitude
  double phi_sig = 0.0;  // signal drive phase

  void validate() const {
    if (!(kappa_s > 0.0)) throw std::invalid_argument("PhysicalSnailParams: kappa_s must be > 0");
    if (std::abs(omega_p - 2.0 * omega_s) > 1e-9 * std::max(1.0, std::abs(omega_s)))
      throw std::invalid_argument("PhysicalSnailParams: omega_p must equal 2 * omega_s");
  }
};

struct EffectiveParams {
  double delta2 = 0.0;
  double lambda = 0.0;
  double g2 = 0.0;
  double phi2 = 0.0;
  double eta_d2 = 0.0;
  double phi_d2 = 0.0;
};

namespace snail_detail {

// Steady pump-mode amplitude under the stiff-pump elimination.
inline cplx pump_amplitude(const PhysicalSnailParams& ph) {
  const cplx i(0.0, 1.0);
  return i * std::sqrt(ph.kappa_s) * ph.eps_p * std::polar(1.0, -ph.phi_p) /
         (i * ph.omega_s - 0.5 * ph.kappa_s);
}

inline double wrap_pi(double a) { return std::remainder(a, 2.0 * M_PI); }

}  // namespace snail_detail

inline EffectiveParams to_effective(const PhysicalSnailParams& ph) {
  ph.validate();
  const cplx P = snail_detail::pump_amplitude(ph);
  EffectiveParams eff;
  eff.delta2 = -24.0 * ph.g4 * (1.0 + std::norm(P));
  eff.lambda = -12.0 * ph.g4;
  const cplx pump = 6.0 * ph.g3 * P;  // g2 * e^{i phi2}
  eff.g2 = std::abs(pump);
  eff.phi2 = (eff.g2 > 0.0) ? std::arg(pump) : 0.0;
  eff.eta_d2 = ph.eta_sig;
  eff.phi_d2 = snail_detail::wrap_pi(ph.phi_sig + M_PI / 2.0);
  return eff;
}

// Physical pump and signal drive realizing the requested effective analyzer
// parameters, for a SNAIL with the given (g3, g4, omega_s, kappa_s). Requires
// three-wave mixing (g3 != 0), and checks that the requested Kerr strength is
// consistent with g4.
inline PhysicalSnailParams from_effective(const ChainParams& p, double g3, double g4,
                                          double omega_s, double kappa_s) {
  if (g3 == 0.0)
    throw std::invalid_argument("from_effective: g3 must be nonzero (no three-wave mixing)");
  if (!(kappa_s > 0.0)) throw std::invalid_argument("from_effective: kappa_s must be > 0");
  if (std::abs(p.lambda - (-12.0 * g4)) > 1e-9 * std::max(1.0, std::abs(p.lambda)))
    throw std::invalid_argument("from_effective: lambda inconsistent with -12 * g4");
  PhysicalSnailParams ph;
  ph.omega_s = omega_s;
  ph.omega_p = 2.0 * omega_s;
  ph.g3 = g3;
  ph.g4 = g4;
  ph.kappa_s = kappa_s;
  const cplx i(0.0, 1.0);
  const cplx P = p.g2 * std::polar(1.0, p.phi2) / (6.0 * g3);
  // invert P = i sqrt(kappa_s) eps_p e^{-i phi_p} / (i omega_s - kappa_s/2)
  const cplx drive = P * (i * omega_s - 0.5 * kappa_s) / (i * std::sqrt(kappa_s));
  ph.eps_p = std::abs(drive);
  ph.phi_p = (ph.eps_p > 0.0) ? -std::arg(drive) : 0.0;
  ph.eta_sig = p.eta_d2;
  ph.phi_sig = snail_detail::wrap_pi(p.phi_d2 - M_PI / 2.0);
  return ph;
}

}  // namespace sqan
