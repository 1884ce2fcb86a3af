#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>

namespace seatrack {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

using Rng = std::mt19937_64;

/// log det of a symmetric positive definite matrix via Cholesky.
/// Throws std::invalid_argument if the matrix is not SPD.
template <typename Derived>
double logdet_spd(const Eigen::MatrixBase<Derived>& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("logdet_spd: matrix is not SPD");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

template <typename Derived>
bool is_spd(const Eigen::MatrixBase<Derived>& m, double sym_tol = 1e-9) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

/// Symmetrize in place; keeps long filter runs from drifting off the
/// symmetric manifold through rounding.
template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& m) {
  m = 0.5 * (m + m.transpose()).eval();
}

/// splitmix64 step, used to derive independent seeds from (seed, tag) pairs.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t tag) { return Rng(mix_seed(seed, tag)); }

inline double draw_normal(Rng& rng, double mean, double std) {
  std::normal_distribution<double> d(mean, std);
  return d(rng);
}

inline double draw_uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

inline int draw_poisson(Rng& rng, double rate) {
  if (rate <= 0.0) return 0;
  std::poisson_distribution<int> d(rate);
  return d(rng);
}

inline Vec3 draw_normal_vec3(Rng& rng, double std) {
  return {draw_normal(rng, 0.0, std), draw_normal(rng, 0.0, std), draw_normal(rng, 0.0, std)};
}

// Chi-square quantiles for 3 degrees of freedom.
inline constexpr double kChi2_3_990 = 11.344866730144373;
inline constexpr double kChi2_3_995 = 12.838156466598647;
inline constexpr double kChi2_3_005 = 0.07172177458649197;

}  // namespace seatrack
