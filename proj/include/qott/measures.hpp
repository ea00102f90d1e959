#pragma once

// Information measures: von Neumann entropy (bits), trace distance,
// Uhlmann fidelity and negativity across a bipartition.

#include <cmath>

#include "qott/core.hpp"

namespace qott {

inline double entropy_of_spectrum(const Eigen::VectorXd& eigs) {
  double s = 0.0;
  for (long i = 0; i < eigs.size(); ++i) {
    double l = eigs(i);
    if (l < -tol::psd_slack)
      throw std::invalid_argument("entropy: spectrum not PSD");
    if (l > 1e-15) s -= l * std::log2(l);
  }
  return s;
}

/// Von Neumann entropy in bits. Eigenvalues clipped at -1e-9.
inline double von_neumann_entropy(const DensityOperator& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho.matrix, Eigen::EigenvaluesOnly);
  return entropy_of_spectrum(es.eigenvalues());
}

/// (1/2) || rho - sigma ||_1.
inline double trace_distance(const DensityOperator& rho,
                             const DensityOperator& sigma) {
  DensityOperator s2 = permute_subsystems(sigma, rho.reg.labels());
  Eigen::SelfAdjointEigenSolver<Mat> es(rho.matrix - s2.matrix,
                                        Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline Mat matrix_sqrt_psd(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  Eigen::VectorXd eigs = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * eigs.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

/// Uhlmann fidelity F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
inline double fidelity(const DensityOperator& rho,
                       const DensityOperator& sigma) {
  DensityOperator s2 = permute_subsystems(sigma, rho.reg.labels());
  Mat sr = matrix_sqrt_psd(rho.matrix);
  Mat inner = sr * s2.matrix * sr;
  Eigen::SelfAdjointEigenSolver<Mat> es(inner, Eigen::EigenvaluesOnly);
  double f = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return f * f;
}

inline double fidelity(const DensityOperator& rho, const PureState& psi) {
  DensityOperator r2 = permute_subsystems(rho, psi.reg.labels());
  return (psi.amps.adjoint() * r2.matrix * psi.amps)(0).real();
}

/// Partial transpose over the labels in `transposed`.
inline Mat partial_transpose(const DensityOperator& rho,
                             const std::vector<std::string>& transposed) {
  DensityOperator t = permute_subsystems(
      rho, detail::front_order(rho.reg, transposed));
  const long dt = rho.reg.dim_of(transposed);
  const long rest = t.reg.total_dim() / dt;
  Mat out(t.matrix.rows(), t.matrix.cols());
  for (long i = 0; i < dt; ++i)
    for (long j = 0; j < dt; ++j)
      for (long r = 0; r < rest; ++r)
        for (long c = 0; c < rest; ++c)
          out(j * rest + r, i * rest + c) = t.matrix(i * rest + r, j * rest + c);
  return out;
}

/// Sum of |negative eigenvalues| of the partial transpose over `part`.
inline double negativity(const DensityOperator& rho,
                         const std::vector<std::string>& part) {
  Mat pt = partial_transpose(rho, part);
  Eigen::SelfAdjointEigenSolver<Mat> es(pt, Eigen::EigenvaluesOnly);
  double n = 0.0;
  for (long i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) < 0.0) n -= es.eigenvalues()(i);
  return n;
}

}  // namespace qott
