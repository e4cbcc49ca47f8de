#include <catch2/catch.hpp>

#include <random>

#include "sqan/expm.hpp"
#include "sqan/linear_analytics.hpp"

using namespace sqan;

TEST_CASE("matrix exponential against closed forms") {
  // identity on the zero matrix
  REQUIRE((expm(Eigen::MatrixXcd::Zero(4, 4)) - Eigen::MatrixXcd::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  // diagonal
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(3, 3);
  D(0, 0) = cplx(-1.0, 2.0);
  D(1, 1) = cplx(0.5, -0.3);
  D(2, 2) = cplx(-7.0, 0.0);
  const Eigen::MatrixXcd E = expm(D);
  for (int k = 0; k < 3; ++k) REQUIRE(std::abs(E(k, k) - std::exp(D(k, k))) < 1e-13);
  // nilpotent 2x2: exp([[0,a],[0,0]]) = I + A
  Eigen::MatrixXcd N = Eigen::MatrixXcd::Zero(2, 2);
  N(0, 1) = cplx(3.0, 1.0);
  REQUIRE((expm(N) - (Eigen::MatrixXcd::Identity(2, 2) + N)).cwiseAbs().maxCoeff() < 1e-14);
  // random matrix against a scaled Taylor reference
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd A(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) A(r, c) = cplx(n(gen), n(gen));
  A *= 2.0;  // force the scaling branch
  Eigen::MatrixXcd ref = Eigen::MatrixXcd::Identity(4, 4);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(4, 4);
  const Eigen::MatrixXcd As = A / 1024.0;
  for (int k = 1; k <= 30; ++k) {
    term = term * As / static_cast<double>(k);
    ref += term;
  }
  for (int k = 0; k < 10; ++k) ref = ref * ref;
  REQUIRE((expm(A) - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff() < 1e-11);
  // semigroup property
  REQUIRE((expm(A) - expm(A / 2.0) * expm(A / 2.0)).cwiseAbs().maxCoeff() /
              expm(A).cwiseAbs().maxCoeff() <
          1e-11);
}

TEST_CASE("drift matrix structure") {
  SECTION("no pumps, no detunings: pure decay") {
    ChainParams p;
    p.g1 = 0.0;
    p.g2 = 0.0;
    p.kappa1 = 0.2;
    const LinearSystem sys = build_linear_system(p);
    Eigen::Matrix4cd J = sys.J;
    REQUIRE(J(0, 0) == cplx(-0.5 * (p.kappa1 + p.gamma), 0.0));
    REQUIRE(J(2, 2) == cplx(-0.5 * (p.kappa2 + p.gamma), 0.0));
    REQUIRE(std::abs(J(0, 1)) == 0.0);
    REQUIRE(std::abs(J(2, 3)) == 0.0);
  }
  SECTION("analyzer never feeds back into the squeezer") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
      ChainParams p;
      p.delta1 = u(gen) - 1.0;
      p.delta2 = u(gen) - 1.0;
      p.g1 = 0.3 * u(gen);
      p.phi1 = M_PI * u(gen);
      p.g2 = 0.4 * u(gen);
      p.phi2 = M_PI * u(gen);
      p.kappa1 = 0.1 * u(gen);
      p.gamma = 0.5 + u(gen);
      const LinearSystem sys = build_linear_system(p);
      REQUIRE(sys.J.block<2, 2>(0, 2).cwiseAbs().maxCoeff() == 0.0);
      REQUIRE(sys.J.block<2, 2>(2, 0).cwiseAbs().maxCoeff() > 0.0);
    }
  }
  SECTION("zero real-part eigenvalue exactly at the threshold pump") {
    ChainParams p;
    p.delta1 = 0.0;
    const double gth = 0.5 * (p.kappa1 + p.gamma);
    ChainParams q = p;
    q.g1 = gth;
    REQUIRE(max_real_eigenvalue(build_linear_system(q).J) == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("threshold values") {
  ChainParams p;  // kappa1 + gamma = 1
  REQUIRE(threshold(p, Mode::squeezer) == Approx(0.5).margin(1e-9));
  ChainParams q = p;
  q.delta1 = 0.3;
  REQUIRE(threshold(q, Mode::squeezer) ==
          Approx(std::sqrt(0.3 * 0.3 + 0.25)).margin(1e-9));
  ChainParams r = p;
  r.delta1 = -0.3;
  REQUIRE(threshold(r, Mode::squeezer) == Approx(threshold(q, Mode::squeezer)).margin(1e-10));
  ChainParams s = p;
  s.delta2 = 0.1;
  s.kappa2 = 1.0;
  s.gamma = 1.0;
  REQUIRE(threshold(s, Mode::analyzer) == Approx(std::sqrt(0.01 + 1.0)).margin(1e-9));
}

TEST_CASE("Lyapunov covariance") {
  SECTION("all drives off: vacuum") {
    ChainParams p;
    p.g1 = 0.0;
    p.g2 = 0.0;
    const Eigen::Matrix4cd C = lyapunov_covariance(build_linear_system(p));
    REQUIRE(C.cwiseAbs().maxCoeff() < 1e-14);
  }
  SECTION("photon number at 0.9 threshold") {
    ChainParams p;
    p.g1 = 0.45;
    const Eigen::Matrix4cd C = lyapunov_covariance(build_linear_system(p));
    const double vp = 0.5 / (1.0 - 2.0 * p.g1);
    const double vm = 0.5 / (1.0 + 2.0 * p.g1);
    REQUIRE(C(0, 1).real() == Approx(0.5 * (vp + vm - 1.0)).margin(5e-3));
    REQUIRE(C(0, 1).real() == Approx(2.13).margin(0.005));
  }
  SECTION("residual of the steady equation") {
    ChainParams p;
    p.g1 = 0.42;
    p.phi1 = 1.2;
    p.g2 = 0.7;
    p.phi2 = -0.4;
    p.delta1 = 0.2;
    p.delta2 = -0.15;
    const LinearSystem sys = build_linear_system(p);
    const Eigen::Matrix4cd C = lyapunov_covariance(sys);
    const Eigen::Matrix4cd R = sys.J * C + C * sys.J.transpose() + sys.D;
    REQUIRE(R.cwiseAbs().maxCoeff() < 1e-10);
    // covariance in the z ordering is complex symmetric
    REQUIRE((C - C.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("unstable drift is rejected") {
    ChainParams p;
    p.g1 = 0.7;
    REQUIRE_THROWS_AS(lyapunov_covariance(build_linear_system(p)), physics_error);
  }
}

TEST_CASE("filtered covariance") {
  SECTION("vacuum gives the shot-noise floor exactly") {
    ChainParams p;
    p.g1 = 0.0;
    const Eigen::MatrixXd S = filtered_covariance(build_linear_system(p), 37.0, 0.0);
    REQUIRE((S - 0.5 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd Sn = filtered_covariance(build_linear_system(p), 37.0, 3.0);
    REQUIRE(Sn(2, 2) == Approx(0.5 * 4.0).margin(1e-12));
  }
  SECTION("finite-T corrections vanish as 1/T") {
    ChainParams p;
    p.g1 = 0.2;
    p.phi1 = 0.7;
    const LinearSystem sys = build_linear_system(p);
    const Eigen::MatrixXd S_lim = filtered_covariance_longtime(sys, 0.0);
    REQUIRE((filtered_covariance(sys, 1e6, 0.0) - S_lim).cwiseAbs().maxCoeff() < 1e-5);
    // the correction shrinks linearly in 1/T
    const double d1 = (filtered_covariance(sys, 100.0, 0.0) - S_lim).cwiseAbs().maxCoeff();
    const double d2 = (filtered_covariance(sys, 200.0, 0.0) - S_lim).cwiseAbs().maxCoeff();
    REQUIRE(d2 < 0.6 * d1);
  }
}

TEST_CASE("detected minor axis of the analyzer-off chain") {
  // Closed-form filtered covariance of the linear chain: the minor axis
  // coincides with the squeezing_axis formula at phi1 = 0 and pi; at the
  // intermediate pump phases the simulated chain rotates the other way
  // (the ellipse follows pi/4 + phi1/2).
  ChainParams p;
  p.lambda = 0.0;
  p.g1 = 0.8 * threshold(p, Mode::squeezer);
  auto axis_of = [&](double phi1) {
    ChainParams q = p;
    q.phi1 = phi1;
    const Eigen::Matrix2d S =
        filtered_covariance(build_linear_system(q), 200.0, 0.0).block<2, 2>(2, 2);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
    const Eigen::Vector2d v = es.eigenvectors().col(0);
    double a = std::atan2(v(1), v(0));
    if (a <= -M_PI / 2.0) a += M_PI;
    if (a > M_PI / 2.0) a -= M_PI;
    return a;
  };
  REQUIRE(axis_of(0.0) == Approx(squeezing_axis(0.0)).margin(0.02));
  REQUIRE(axis_of(M_PI) == Approx(squeezing_axis(M_PI)).margin(0.02));
  auto wrap_half = [](double a) {
    a = std::remainder(a, M_PI);
    if (a <= -M_PI / 2.0) a += M_PI;
    if (a > M_PI / 2.0) a -= M_PI;
    return a;
  };
  for (double phi1 : {M_PI / 2.0, 3.0 * M_PI / 2.0, 0.7}) {
    REQUIRE(axis_of(phi1) == Approx(wrap_half(M_PI / 4.0 + phi1 / 2.0)).margin(0.02));
  }
}

TEST_CASE("squeezing axis formula") {
  REQUIRE(squeezing_axis(0.0) == Approx(M_PI / 4.0));
  REQUIRE(squeezing_axis(M_PI) == Approx(-M_PI / 4.0));
  REQUIRE(squeezing_axis(M_PI / 2.0) == Approx(0.0).margin(1e-15));
  // wrapped into (-pi/2, pi/2]
  for (double phi = -10.0; phi < 10.0; phi += 0.37) {
    const double a = squeezing_axis(phi);
    REQUIRE(a > -M_PI / 2.0 - 1e-12);
    REQUIRE(a <= M_PI / 2.0 + 1e-12);
  }
}

TEST_CASE("analyzer gain") {
  ChainParams p;  // kappa2 + gamma = 2
  p.g2 = 0.0;
  REQUIRE(analyzer_gain_db(p) == 0.0);
  // monotone in g2
  double prev = -1.0;
  for (double g2 = 0.0; g2 < 0.99; g2 += 0.07) {
    ChainParams q = p;
    q.g2 = g2;
    const double gain = analyzer_gain_db(q);
    REQUIRE(gain > prev);
    prev = gain;
  }
  // 20 dB round trip
  double lo = 0.0, hi = 0.999;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    ChainParams q = p;
    q.g2 = mid;
    (analyzer_gain_db(q) < 20.0 ? lo : hi) = mid;
  }
  ChainParams q = p;
  q.g2 = 0.5 * (lo + hi);
  REQUIRE(analyzer_gain_db(q) == Approx(20.0).margin(1e-9));
  REQUIRE(q.g2 == Approx((9.0 / 11.0)).margin(1e-9));  // kappa/2 * (10-1)/(10+1) at kappa = 2
  ChainParams above = p;
  above.g2 = 1.0;
  REQUIRE_THROWS_AS(analyzer_gain_db(above), physics_error);
}
