#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace sqan {

// Dense matrix exponential by scaling and squaring with a diagonal Pade core
// (degree chosen from the 1-norm as in Higham's method). Intended for the
// small drift matrices of this project; accuracy is at the 1e-13 level or
// better for well-scaled inputs.
inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd& A) {
  using Mat = Eigen::MatrixXcd;
  const Eigen::Index n = A.rows();
  if (A.cols() != n) throw std::invalid_argument("expm: matrix must be square");
  if (!A.allFinite()) throw std::invalid_argument("expm: non-finite entries");

  const double norm = A.cwiseAbs().colwise().sum().maxCoeff();  // 1-norm

  const auto pade = [&](const Mat& M, const double* b, int m) {
    // U odd part, V even part of the [m/m] Pade numerator/denominator split
    const Mat M2 = M * M;
    Mat U = Mat::Zero(n, n);
    Mat V = Mat::Zero(n, n);
    if (m <= 9) {
      Mat P = Mat::Identity(n, n);  // powers of M2
      V += b[0] * P;
      U += b[1] * P;
      for (int k = 2; k <= m; k += 2) {
        P = P * M2;
        V += b[k] * P;
        if (k + 1 <= m) U += b[k + 1] * P;
      }
      U = M * U;
    } else {
      const Mat M4 = M2 * M2;
      const Mat M6 = M4 * M2;
      U = M * (M6 * (b[13] * M6 + b[11] * M4 + b[9] * M2) + b[7] * M6 + b[5] * M4 + b[3] * M2 +
               b[1] * Mat::Identity(n, n));
      V = M6 * (b[12] * M6 + b[10] * M4 + b[8] * M2) + b[6] * M6 + b[4] * M4 + b[2] * M2 +
          b[0] * Mat::Identity(n, n);
    }
    return Mat((V - U).partialPivLu().solve(V + U));
  };

  static constexpr std::array<double, 4> b3 = {120., 60., 12., 1.};
  static constexpr std::array<double, 6> b5 = {30240., 15120., 3360., 420., 30., 1.};
  static constexpr std::array<double, 8> b7 = {17297280., 8648640., 1995840., 277200.,
                                               25200.,    1512.,    56.,      1.};
  static constexpr std::array<double, 10> b9 = {17643225600., 8821612800., 2075673600.,
                                                302702400.,   30270240.,   2162160.,
                                                110880.,      3960.,       90.,
                                                1.};
  static constexpr std::array<double, 14> b13 = {64764752532480000., 32382376266240000.,
                                                 7771770303897600.,  1187353796428800.,
                                                 129060195264000.,   10559470521600.,
                                                 670442572800.,      33522128640.,
                                                 1323241920.,        40840800.,
                                                 960960.,            16380.,
                                                 182.,               1.};

  if (norm < 1.495585217958292e-2) return pade(A, b3.data(), 3);
  if (norm < 2.539398330063230e-1) return pade(A, b5.data(), 5);
  if (norm < 9.504178996162932e-1) return pade(A, b7.data(), 7);
  if (norm < 2.097847961257068e0) return pade(A, b9.data(), 9);

  const double theta13 = 5.371920351148152;
  int s = 0;
  if (norm > theta13) s = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  Mat F = pade(Mat(A / std::pow(2.0, s)), b13.data(), 13);
  for (int k = 0; k < s; ++k) F = F * F;
  return F;
}

}  // namespace sqan
