#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace sqan {

using cplx = std::complex<double>;

// The 14 first- and second-order cumulants of the two-mode chain, evolved as a
// redundant set: conjugate pairs are kept as independent entries and their
// consistency is checked as an invariant rather than being eliminated.
//
// Naming: s1/s2 are the mode means, the "d" suffix marks a daggered operator,
// so e.g. c_s1d_s2 is the cross cumulant <s1^dag s2> - <s1^dag><s2>.
struct CumulantState {
  enum Index : std::size_t {
    kS1 = 0,
    kS2,
    kS1d,
    kS2d,
    kCs1s1,
    kCs1s2,
    kCs2s2,
    kCs1dS1,
    kCs1dS2,
    kCs2dS1,
    kCs2dS2,
    kCs1dS1d,
    kCs1dS2d,
    kCs2dS2d,
    kCount
  };

  std::array<cplx, kCount> v{};

  cplx& s1() { return v[kS1]; }
  cplx& s2() { return v[kS2]; }
  cplx& s1d() { return v[kS1d]; }
  cplx& s2d() { return v[kS2d]; }
  cplx& c_s1s1() { return v[kCs1s1]; }
  cplx& c_s1s2() { return v[kCs1s2]; }
  cplx& c_s2s2() { return v[kCs2s2]; }
  cplx& c_s1d_s1() { return v[kCs1dS1]; }
  cplx& c_s1d_s2() { return v[kCs1dS2]; }
  cplx& c_s2d_s1() { return v[kCs2dS1]; }
  cplx& c_s2d_s2() { return v[kCs2dS2]; }
  cplx& c_s1d_s1d() { return v[kCs1dS1d]; }
  cplx& c_s1d_s2d() { return v[kCs1dS2d]; }
  cplx& c_s2d_s2d() { return v[kCs2dS2d]; }

  const cplx& s1() const { return v[kS1]; }
  const cplx& s2() const { return v[kS2]; }
  const cplx& s1d() const { return v[kS1d]; }
  const cplx& s2d() const { return v[kS2d]; }
  const cplx& c_s1s1() const { return v[kCs1s1]; }
  const cplx& c_s1s2() const { return v[kCs1s2]; }
  const cplx& c_s2s2() const { return v[kCs2s2]; }
  const cplx& c_s1d_s1() const { return v[kCs1dS1]; }
  const cplx& c_s1d_s2() const { return v[kCs1dS2]; }
  const cplx& c_s2d_s1() const { return v[kCs2dS1]; }
  const cplx& c_s2d_s2() const { return v[kCs2dS2]; }
  const cplx& c_s1d_s1d() const { return v[kCs1dS1d]; }
  const cplx& c_s1d_s2d() const { return v[kCs1dS2d]; }
  const cplx& c_s2d_s2d() const { return v[kCs2dS2d]; }

  bool finite() const {
    for (const cplx& z : v) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
  }

  double norm_inf() const {
    double m = 0.0;
    for (const cplx& z : v) m = std::max(m, std::max(std::abs(z.real()), std::abs(z.imag())));
    return m;
  }

  CumulantState& operator+=(const CumulantState& o) {
    for (std::size_t i = 0; i < kCount; ++i) v[i] += o.v[i];
    return *this;
  }
  friend CumulantState operator+(CumulantState a, const CumulantState& b) { return a += b; }
  friend CumulantState operator*(double a, CumulantState x) {
    for (cplx& z : x.v) z *= a;
    return x;
  }
};

// Maximum violation of the conjugate-pair structure (the Hermiticity set).
inline double hermiticity_violation(const CumulantState& x) {
  auto mism = [](const cplx& a, const cplx& b) { return std::abs(a - std::conj(b)); };
  double m = 0.0;
  m = std::max(m, mism(x.s1d(), x.s1()));
  m = std::max(m, mism(x.s2d(), x.s2()));
  m = std::max(m, mism(x.c_s1d_s1d(), x.c_s1s1()));
  m = std::max(m, mism(x.c_s2d_s2d(), x.c_s2s2()));
  m = std::max(m, mism(x.c_s1d_s2d(), x.c_s1s2()));
  m = std::max(m, mism(x.c_s2d_s1(), x.c_s1d_s2()));
  m = std::max(m, std::abs(x.c_s1d_s1().imag()));
  m = std::max(m, std::abs(x.c_s2d_s2().imag()));
  return m;
}

// Project onto the Hermiticity set: averages each conjugate pair. Used by tests
// to construct admissible random states, never inside the integrators.
inline CumulantState symmetrize_hermitian(CumulantState x) {
  auto pair = [](cplx& a, cplx& b) {
    const cplx m = 0.5 * (a + std::conj(b));
    a = m;
    b = std::conj(m);
  };
  pair(x.s1(), x.s1d());
  pair(x.s2(), x.s2d());
  pair(x.c_s1s1(), x.c_s1d_s1d());
  pair(x.c_s2s2(), x.c_s2d_s2d());
  pair(x.c_s1s2(), x.c_s1d_s2d());
  pair(x.c_s1d_s2(), x.c_s2d_s1());
  x.c_s1d_s1() = cplx(x.c_s1d_s1().real(), 0.0);
  x.c_s2d_s2() = cplx(x.c_s2d_s2().real(), 0.0);
  return x;
}

}  // namespace sqan
