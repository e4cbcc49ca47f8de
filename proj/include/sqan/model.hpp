#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "sqan/cumulant_state.hpp"
#include "sqan/params.hpp"

namespace sqan {

// Right-hand sides of the truncated cumulant equations for the two-mode chain.
//
// teom_rhs       : noise-averaged (unconditional) drift of all 14 cumulants.
// steom_drift    : conditional drift = teom drift + the measurement-induced
//                  Riccati terms on the second cumulants.
// steom_increment: full Euler-Maruyama increment, drift*dt plus the Wiener
//                  diffusion terms that only the mean equations carry.
//
// The squeezer sector never references analyzer variables (the coupler is
// one-way), and the whole set preserves the conjugate-pair structure exactly
// for real dW; both facts are asserted by the test suite.

namespace detail {

struct ModelCoeffs {
  cplx i{0.0, 1.0};
  cplx p1, p1c;   // g1 e^{+/- i phi1}
  cplx p2, p2c;   // g2 e^{+/- i phi2}
  cplx drv, drvc; // sqrt(kappa2) eta e^{+/- i phi_d2}
  double G, k1, k2, L, D1, D2;
  double sqrt_k2_half;

  explicit ModelCoeffs(const ChainParams& p)
      : G(p.gamma), k1(p.kappa1), k2(p.kappa2), L(p.lambda), D1(p.delta1), D2(p.delta2) {
    p1 = p.g1 * std::polar(1.0, p.phi1);
    p1c = std::conj(p1);
    p2 = p.g2 * std::polar(1.0, p.phi2);
    p2c = std::conj(p2);
    drv = std::sqrt(p.kappa2) * p.eta_d2 * std::polar(1.0, p.phi_d2);
    drvc = std::conj(drv);
    sqrt_k2_half = std::sqrt(p.kappa2 / 2.0);
  }
};

inline CumulantState teom_rhs_unchecked(const CumulantState& x, const ModelCoeffs& m) {
  const cplx i = m.i;
  const cplx s1 = x.s1(), s2 = x.s2(), s1d = x.s1d(), s2d = x.s2d();
  const cplx c11 = x.c_s1s1(), c12 = x.c_s1s2(), c22 = x.c_s2s2();
  const cplx d11 = x.c_s1d_s1(), d12 = x.c_s1d_s2(), d21 = x.c_s2d_s1(), d22 = x.c_s2d_s2();
  const cplx e11 = x.c_s1d_s1d(), e12 = x.c_s1d_s2d(), e22 = x.c_s2d_s2d();
  const double G = m.G, k1 = m.k1, k2 = m.k2, L = m.L, D1 = m.D1, D2 = m.D2;

  CumulantState d;
  d.s1() = (i * D1 - 0.5 * (G + k1)) * s1 - i * m.p1 * s1d;
  d.s2() = -G * s1 + (i * D2 - 0.5 * (k2 + G)) * s2 +
           i * L * (2.0 * d22 * s2 + s2d * (s2 * s2 + c22)) - i * m.p2 * s2d - m.drv;
  d.s1d() = (-i * D1 - 0.5 * (G + k1)) * s1d + i * m.p1c * s1;
  d.s2d() = -G * s1d - (i * D2 + 0.5 * (k2 + G)) * s2d -
            i * L * (2.0 * d22 * s2d + s2 * (s2d * s2d + e22)) + i * m.p2c * s2 - m.drvc;

  d.c_s1s1() = (-G - k1 + 2.0 * i * D1) * c11 - i * m.p1 * (1.0 + 2.0 * d11);
  d.c_s1s2() = -G * c11 + (-G - 0.5 * (k1 + k2) + i * (D1 + D2)) * c12 +
               i * L * (d21 * c22 + 2.0 * c12 * d22 + d21 * s2 * s2 + 2.0 * c12 * s2 * s2d) -
               i * m.p1 * d12 - i * m.p2 * d21;
  d.c_s2s2() = -2.0 * G * c12 + (-G - k2 + 2.0 * i * D2) * c22 +
               i * L * (c22 + 6.0 * c22 * d22 + s2 * s2 + 2.0 * d22 * s2 * s2 + 4.0 * c22 * s2 * s2d) -
               i * m.p2 * (1.0 + 2.0 * d22);
  d.c_s1d_s1() = (-G - k1) * d11 - i * m.p1 * e11 + i * m.p1c * c11;
  d.c_s1d_s2() = -G * d11 + (-G - 0.5 * (k1 + k2) + i * (-D1 + D2)) * d12 +
                 i * L * (2.0 * d12 * d22 + e12 * c22 + e12 * s2 * s2 + 2.0 * d12 * s2 * s2d) +
                 i * m.p1c * c12 - i * m.p2 * e12;
  d.c_s2d_s1() = -G * d11 + (-G - 0.5 * (k1 + k2) + i * (D1 - D2)) * d21 -
                 i * L * (2.0 * d21 * d22 + c12 * e22 + 2.0 * d21 * s2 * s2d + c12 * s2d * s2d) +
                 i * m.p2c * c12 - i * m.p1 * e12;
  d.c_s2d_s2() = -G * (d12 + d21) + (-G - k2) * d22 +
                 i * L * (e22 * s2 * s2 - c22 * s2d * s2d) - i * m.p2 * e22 + i * m.p2c * c22;
  d.c_s1d_s1d() = (-G - k1 - 2.0 * i * D1) * e11 + i * m.p1c * (1.0 + 2.0 * d11);
  d.c_s1d_s2d() = -G * e11 + (-G - 0.5 * (k1 + k2) - i * (D1 + D2)) * e12 -
                  i * L * (2.0 * e12 * d22 + d12 * e22 + 2.0 * e12 * s2 * s2d + d12 * s2d * s2d) +
                  i * m.p2c * d12 + i * m.p1c * d21;
  d.c_s2d_s2d() = -2.0 * G * e12 + (-G - k2 - 2.0 * i * D2) * e22 -
                  i * L * (e22 + 6.0 * d22 * e22 + 4.0 * e22 * s2 * s2d + s2d * s2d + 2.0 * d22 * s2d * s2d) +
                  i * m.p2c * (1.0 + 2.0 * d22);
  return d;
}

// Measurement-conditioning terms: the extra -kappa2 * (cumulant products) that
// appear only in the conditional second-cumulant equations.
inline void add_conditioning_terms(const CumulantState& x, double k2, CumulantState& d) {
  const cplx c12 = x.c_s1s2(), c22 = x.c_s2s2();
  const cplx d12 = x.c_s1d_s2(), d21 = x.c_s2d_s1(), d22 = x.c_s2d_s2();
  const cplx e12 = x.c_s1d_s2d(), e22 = x.c_s2d_s2d();

  d.c_s1s1() += -2.0 * k2 * c12 * d21;
  d.c_s1s2() += -k2 * (c12 * d22 + c22 * d21);
  d.c_s2s2() += -2.0 * k2 * d22 * c22;
  d.c_s1d_s1() += -k2 * (d12 * d21 + c12 * e12);
  d.c_s1d_s2() += -k2 * (d12 * d22 + e12 * c22);
  d.c_s2d_s1() += -k2 * (d21 * d22 + c12 * e22);
  d.c_s2d_s2() += -k2 * (d22 * d22 + c22 * e22);
  d.c_s1d_s1d() += -2.0 * k2 * d12 * e12;
  d.c_s1d_s2d() += -k2 * (e12 * d22 + d12 * e22);
  d.c_s2d_s2d() += -2.0 * k2 * d22 * e22;
}

// Wiener-diffusion coefficients of the four mean equations.
struct MeanDiffusion {
  cplx s1_I, s1_Q, s2_I, s2_Q, s1d_I, s1d_Q, s2d_I, s2d_Q;
};

inline MeanDiffusion mean_diffusion(const CumulantState& x, const ModelCoeffs& m) {
  const cplx i = m.i;
  const double a = m.sqrt_k2_half;
  const cplx c12 = x.c_s1s2(), c22 = x.c_s2s2();
  const cplx d12 = x.c_s1d_s2(), d21 = x.c_s2d_s1(), d22 = x.c_s2d_s2();
  const cplx e12 = x.c_s1d_s2d(), e22 = x.c_s2d_s2d();
  MeanDiffusion b;
  b.s1_I = a * (c12 + d21);
  b.s1_Q = -i * a * (c12 - d21);
  b.s2_I = a * (c22 + d22);
  b.s2_Q = -i * a * (c22 - d22);
  b.s1d_I = a * (d12 + e12);
  b.s1d_Q = -i * a * (d12 - e12);
  b.s2d_I = a * (d22 + e22);
  b.s2d_Q = -i * a * (d22 - e22);
  return b;
}

}  // namespace detail

inline CumulantState teom_rhs(const CumulantState& x, const ChainParams& p) {
  if (!x.finite()) throw std::invalid_argument("teom_rhs: non-finite state");
  return detail::teom_rhs_unchecked(x, detail::ModelCoeffs(p));
}

inline CumulantState steom_drift(const CumulantState& x, const ChainParams& p) {
  if (!x.finite()) throw std::invalid_argument("steom_drift: non-finite state");
  const detail::ModelCoeffs m(p);
  CumulantState d = detail::teom_rhs_unchecked(x, m);
  detail::add_conditioning_terms(x, m.k2, d);
  return d;
}

namespace detail {

inline CumulantState steom_increment_unchecked(const CumulantState& x, const ModelCoeffs& m,
                                               double dW_I, double dW_Q, double dt) {
  CumulantState d = teom_rhs_unchecked(x, m);
  add_conditioning_terms(x, m.k2, d);
  for (cplx& z : d.v) z *= dt;
  const MeanDiffusion b = mean_diffusion(x, m);
  d.s1() += b.s1_I * dW_I + b.s1_Q * dW_Q;
  d.s2() += b.s2_I * dW_I + b.s2_Q * dW_Q;
  d.s1d() += b.s1d_I * dW_I + b.s1d_Q * dW_Q;
  d.s2d() += b.s2d_I * dW_I + b.s2d_Q * dW_Q;
  return d;
}

}  // namespace detail

inline CumulantState steom_increment(const CumulantState& x, const ChainParams& p, double dW_I,
                                     double dW_Q, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("steom_increment: dt must be > 0");
  if (!x.finite()) throw std::invalid_argument("steom_increment: non-finite state");
  return detail::steom_increment_unchecked(x, detail::ModelCoeffs(p), dW_I, dW_Q, dt);
}

}  // namespace sqan
