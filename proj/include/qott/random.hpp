#pragma once

// Seeded randomness. Per-worker streams are derived from a master seed via a
// splitmix64 counter scheme so Monte Carlo runs are reproducible and
// mergeable by stream index.

#include <random>

#include "qott/core.hpp"

namespace qott {

/// splitmix64 step; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t counter) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 stream_rng(std::uint64_t master, std::uint64_t counter) {
  return std::mt19937_64(mix_seed(master, counter));
}

inline Vec random_gaussian_vec(std::mt19937_64& rng, long n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  for (long i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

inline Mat random_gaussian_mat(std::mt19937_64& rng, long rows, long cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline PureState random_pure_state(std::mt19937_64& rng, const Register& reg) {
  Vec v = random_gaussian_vec(rng, reg.total_dim());
  return PureState(reg, v / v.norm());
}

/// Full-rank random mixed state (Hilbert-Schmidt-like sampling).
inline DensityOperator random_density(std::mt19937_64& rng,
                                      const Register& reg) {
  Mat g = random_gaussian_mat(rng, reg.total_dim(), reg.total_dim());
  Mat rho = g * g.adjoint();
  rho /= rho.trace();
  rho = 0.5 * (rho + Mat(rho.adjoint()));
  return DensityOperator(reg, std::move(rho));
}

/// Haar-distributed unitary via QR of a Ginibre matrix.
inline Mat random_unitary(std::mt19937_64& rng, long n) {
  Mat g = random_gaussian_mat(rng, n, n);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (long i = 0; i < n; ++i) {
    cplx d = r(i, i);
    q.col(i) *= d / std::abs(d);
  }
  return q;
}

}  // namespace qott
