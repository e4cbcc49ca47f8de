#include <catch2/catch.hpp>

#include <random>

#include "sqan/integrators.hpp"
#include "sqan/metrics.hpp"

using namespace sqan;

namespace {

std::vector<ShotRecord> gaussian_cloud(std::mt19937_64& gen, Eigen::Vector2d mu,
                                       Eigen::Matrix2d sigma, int n, int label) {
  const Eigen::LLT<Eigen::Matrix2d> llt(sigma);
  const Eigen::Matrix2d L = llt.matrixL();
  std::normal_distribution<double> nrm(0.0, 1.0);
  std::vector<ShotRecord> shots;
  shots.reserve(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector2d z = mu + L * Eigen::Vector2d(nrm(gen), nrm(gen));
    shots.push_back({z(0), z(1), label, 0, 0.0});
  }
  return shots;
}

}  // namespace

TEST_CASE("mean separation basics") {
  std::vector<ShotRecord> a = {{1.0, 0.0, 1, 0, 0}, {1.0, 0.0, 1, 0, 0}};
  std::vector<ShotRecord> b = {{0.0, 1.0, 2, 0, 0}, {0.0, 1.0, 2, 0, 0}};
  auto [dmu, norm] = mean_separation(a, b);
  REQUIRE(dmu(0) == Approx(1.0));
  REQUIRE(dmu(1) == Approx(-1.0));
  REQUIRE(norm == Approx(std::sqrt(2.0)));
  auto [dz, nz] = mean_separation(a, a);
  REQUIRE(nz == 0.0);
  REQUIRE_THROWS_AS(mean_separation({}, b), std::invalid_argument);
}

TEST_CASE("Fisher discriminant closed cases") {
  REQUIRE(fisher_discriminant(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()) == 0.0);
  REQUIRE(fisher_discriminant(Eigen::Vector2d(1.0, 0.0), Eigen::Matrix2d::Identity()) ==
          Approx(1.0));
  Eigen::Matrix2d V = 0.5 * Eigen::Matrix2d::Identity();
  REQUIRE(fisher_discriminant(Eigen::Vector2d(1.0, 0.0), V) == Approx(2.0));
}

TEST_CASE("classical-noise augmentation") {
  Eigen::Matrix2d S;
  S << 1.0, 0.0, 0.0, 2.0;
  REQUIRE(augment_classical_noise(S, 0.0) == S);
  const Eigen::Matrix2d A = augment_classical_noise(S, 3.0);
  REQUIRE(A(0, 0) == Approx(4.0));
  REQUIRE(A(1, 1) == Approx(5.0));
  REQUIRE(A(0, 1) == 0.0);
  REQUIRE_THROWS_AS(augment_classical_noise(S, -1.0), std::invalid_argument);
}

TEST_CASE("augmentation never increases the Fisher discriminant") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::Matrix2d R;
    const double th = u(gen);
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    Eigen::Matrix2d S = R * Eigen::DiagonalMatrix<double, 2>(u(gen), u(gen)) * R.transpose();
    const Eigen::Vector2d dmu(u(gen), -u(gen));
    const double base = fisher_discriminant(dmu, S);
    const double aug = fisher_discriminant(dmu, augment_classical_noise(S, u(gen)));
    REQUIRE(aug <= base + 1e-12);
  }
}

TEST_CASE("QDA on separated and on identical clouds") {
  std::mt19937_64 gen(41);
  const Eigen::Matrix2d S = 0.05 * Eigen::Matrix2d::Identity();
  const auto a = gaussian_cloud(gen, {5.0, 0.0}, S, 200, 1);
  const auto b = gaussian_cloud(gen, {-5.0, 0.0}, S, 200, 2);
  REQUIRE(qda_fidelity(a, b) == 1.0);

  const auto c = gaussian_cloud(gen, {0.0, 0.0}, Eigen::Matrix2d::Identity(), 400, 1);
  const auto d = gaussian_cloud(gen, {0.0, 0.0}, Eigen::Matrix2d::Identity(), 400, 2);
  REQUIRE(qda_fidelity(c, d) == Approx(0.5).margin(0.1));
}

TEST_CASE("QDA is symmetric under swapping the classes") {
  std::mt19937_64 gen(42);
  Eigen::Matrix2d s1;
  s1 << 1.0, 0.3, 0.3, 0.5;
  Eigen::Matrix2d s2;
  s2 << 0.4, -0.1, -0.1, 1.2;
  const auto a = gaussian_cloud(gen, {0.4, 0.0}, s1, 300, 1);
  const auto b = gaussian_cloud(gen, {-0.4, 0.2}, s2, 300, 2);
  REQUIRE(qda_fidelity(a, b) == Approx(qda_fidelity(b, a)).margin(1e-12));
}

TEST_CASE("Fisher discriminant is invariant under a common rotation of the samples") {
  std::mt19937_64 gen(77);
  Eigen::Matrix2d s1;
  s1 << 1.0, 0.2, 0.2, 0.7;
  Eigen::Matrix2d s2;
  s2 << 0.6, -0.2, -0.2, 1.1;
  auto a = gaussian_cloud(gen, {0.7, 0.1}, s1, 10000, 1);
  auto b = gaussian_cloud(gen, {-0.2, -0.4}, s2, 10000, 2);
  const ClassStats st = class_stats(a, b);
  Eigen::Matrix2d R;
  const double th = 0.83;
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  auto rot = [&](std::vector<ShotRecord>& shots) {
    for (auto& s : shots) {
      const Eigen::Vector2d z = R * Eigen::Vector2d(s.I, s.Q);
      s.I = z(0);
      s.Q = z(1);
    }
  };
  rot(a);
  rot(b);
  const ClassStats str = class_stats(a, b);
  REQUIRE(str.fisher == Approx(st.fisher).epsilon(0.02));
}

TEST_CASE("intracavity covariance proxy") {
  // vacuum
  REQUIRE(intracavity_covariance_proxy(CumulantState{}) ==
          (0.5 * Eigen::Matrix2d::Identity()));

  // squeezed linear steady state vs the Lyapunov solution
  ChainParams p;
  p.lambda = 0.0;
  p.g1 = 0.44;
  p.phi1 = 0.3;
  SimControls c;
  const CumulantState x = solve_steady(p, c);
  const Eigen::Matrix4cd C = lyapunov_covariance(build_linear_system(p));
  CumulantState y;
  y.c_s2s2() = C(2, 2);
  y.c_s2d_s2() = C(2, 3);
  y.c_s2d_s2d() = C(3, 3);
  const Eigen::Matrix2d a = intracavity_covariance_proxy(x);
  const Eigen::Matrix2d b = intracavity_covariance_proxy(y);
  REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("rotating the squeezer pump phase by pi rotates the proxy ellipse by pi/2") {
  ChainParams p;
  p.lambda = 0.0;
  p.g1 = 0.42;
  p.phi1 = 0.5;
  SimControls c;
  const Eigen::Matrix2d S0 = intracavity_covariance_proxy(solve_steady(p, c));
  ChainParams q = p;
  q.phi1 += M_PI;
  const Eigen::Matrix2d S1 = intracavity_covariance_proxy(solve_steady(q, c));
  Eigen::Matrix2d R;
  R << 0.0, -1.0, 1.0, 0.0;  // rotation by pi/2
  REQUIRE((S1 - R * S0 * R.transpose()).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("rotating the analyzer pump phase by pi rotates its ellipse by pi/2") {
  ChainParams p;
  p.lambda = 0.0;
  p.g1 = 0.0;
  p.g2 = 0.5;
  p.phi2 = 0.2;
  SimControls c;
  const Eigen::Matrix2d S0 = intracavity_covariance_proxy(solve_steady(p, c));
  ChainParams q = p;
  q.phi2 += M_PI;
  const Eigen::Matrix2d S1 = intracavity_covariance_proxy(solve_steady(q, c));
  Eigen::Matrix2d R;
  R << 0.0, -1.0, 1.0, 0.0;
  REQUIRE((S1 - R * S0 * R.transpose()).cwiseAbs().maxCoeff() < 1e-7);
}
