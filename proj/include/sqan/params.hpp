#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sqan {

// Physical parameters of the two-mode stiff-pump chain (squeezer -> coupler ->
// analyzer). All rates are in units of the analyzer linewidth kappa2 and all
// times in 1/kappa2; angles in radians.
struct ChainParams {
  double delta1 = 0.0;   // squeezer detuning (takes the value +/- chi in readout mode)
  double delta2 = 0.0;   // analyzer detuning (cross-Kerr shift when converted from SNAIL params)
  double g1 = 0.4;       // squeezer pump strength (0.8 of threshold at the defaults below)
  double phi1 = 0.0;     // squeezer pump phase; 0 -> type-1 input, pi -> type-2 input
  double g2 = 0.0;       // analyzer pump strength
  double phi2 = 0.0;     // analyzer pump phase
  double lambda = 0.01;  // analyzer Kerr strength, >= 0
  double kappa1 = 0.0;   // squeezer bare decay
  double kappa2 = 1.0;   // analyzer bare decay (the unit rate)
  double gamma = 1.0;    // nonreciprocal coupling rate
  double eta_d2 = 0.0;   // analyzer signal drive amplitude
  double phi_d2 = 0.0;   // analyzer signal drive phase
  double n_cl = 0.0;     // classical detection-noise strength, >= 0

  void validate() const {
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0.0)) throw std::invalid_argument(std::string("ChainParams: ") + name + " must be >= 0");
    };
    nonneg(g1, "g1");
    nonneg(g2, "g2");
    nonneg(lambda, "lambda");
    nonneg(kappa1, "kappa1");
    nonneg(kappa2, "kappa2");
    nonneg(gamma, "gamma");
    nonneg(eta_d2, "eta_d2");
    nonneg(n_cl, "n_cl");
    for (double v : {delta1, delta2, phi1, phi2, phi_d2}) {
      if (!std::isfinite(v)) throw std::invalid_argument("ChainParams: non-finite entry");
    }
  }
};

// Numerical controls shared by the deterministic and stochastic solvers.
struct SimControls {
  double dt = 1e-3;          // Euler-Maruyama step, in 1/kappa2
  double t_settle = 10.0;    // conditional-state settling time before the filter window opens
  double t_filter = 800.0;   // boxcar filter window T
  std::int64_t n_traj = 100; // trajectories (= shots) per class
  std::uint64_t seed = 1;    // master seed; per-trajectory substreams are derived from it
  double steady_tol = 1e-10; // max-norm of the TEOM rhs that counts as "steady"

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("SimControls: dt must be > 0");
    if (!(t_filter > 0.0)) throw std::invalid_argument("SimControls: t_filter must be > 0");
    if (!(dt <= t_filter / 100.0))
      throw std::invalid_argument("SimControls: dt must satisfy dt <= t_filter/100");
    if (!(t_settle >= 0.0)) throw std::invalid_argument("SimControls: t_settle must be >= 0");
    if (n_traj < 1) throw std::invalid_argument("SimControls: n_traj must be >= 1");
    if (!(steady_tol > 0.0)) throw std::invalid_argument("SimControls: steady_tol must be > 0");
  }
};

// How the two classes of input states are encoded.
enum class ClassEncoding {
  pump_phase,       // phi1 = 0 (class 1) or pi (class 2)
  dispersive_shift  // delta1 = +chi (class 1) or -chi (class 2)
};

inline ChainParams apply_class(const ChainParams& base, int class_label,
                               ClassEncoding enc = ClassEncoding::pump_phase,
                               double chi = 0.0) {
  if (class_label != 1 && class_label != 2)
    throw std::invalid_argument("apply_class: class_label must be 1 or 2");
  ChainParams p = base;
  if (enc == ClassEncoding::pump_phase) {
    p.phi1 = (class_label == 1) ? 0.0 : M_PI;
  } else {
    p.delta1 = (class_label == 1) ? chi : -chi;
  }
  return p;
}

}  // namespace sqan
