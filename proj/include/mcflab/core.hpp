#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace mcflab {

inline constexpr const char* kVersion = "mcflab 0.1.0";

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

template <int N>
using Mat = Eigen::Matrix<double, N, N>;

using Rng = std::mt19937_64;

// Rigid motion plus uniform scale: x -> scale * rot * x + shift.
template <int N>
struct Similarity {
  Mat<N> rot = Mat<N>::Identity();
  Vec<N> shift = Vec<N>::Zero();
  double scale = 1.0;

  Vec<N> operator()(const Vec<N>& x) const { return scale * (rot * x) + shift; }

  static Similarity translation(const Vec<N>& t) {
    Similarity s;
    s.shift = t;
    return s;
  }
};

inline Mat<2> rotation2(double angle) {
  Mat<2> r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

template <int N>
Mat<N> random_rotation(Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  if constexpr (N == 2) {
    return rotation2(2.0 * kPi * uni(rng));
  } else {
    // uniform quaternion
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    q.normalize();
    return q.toRotationMatrix();
  }
}

inline double sqr(double x) { return x * x; }

}  // namespace mcflab
