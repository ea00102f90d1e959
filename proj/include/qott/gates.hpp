#pragma once

// Generalized Pauli (Weyl) operators, discrete Fourier gate, controlled
// gates, maximally entangled states and the generalized Bell basis.

#include <cmath>
#include <numbers>

#include "qott/core.hpp"

namespace qott {

inline Register single(const std::string& label, int d) {
  return Register({label}, {d});
}

/// Cyclic shift X|j> = |j+1 mod d>.
inline Unitary gen_pauli_x(Dim d, const std::string& label = "q") {
  Mat m = Mat::Zero(d.d, d.d);
  for (int j = 0; j < d.d; ++j) m((j + 1) % d.d, j) = 1.0;
  return Unitary(single(label, d.d), single(label, d.d), std::move(m));
}

/// Phase ladder Z|j> = exp(i 2 pi j / d)|j>.
inline Unitary gen_pauli_z(Dim d, const std::string& label = "q") {
  Mat m = Mat::Zero(d.d, d.d);
  for (int j = 0; j < d.d; ++j)
    m(j, j) = std::exp(cplx(0.0, 2.0 * std::numbers::pi * j / d.d));
  return Unitary(single(label, d.d), single(label, d.d), std::move(m));
}

/// X^a Z^b as a matrix, exponents taken mod d.
inline Mat weyl_op(Dim d, long a, long b) {
  a = ((a % d.d) + d.d) % d.d;
  b = ((b % d.d) + d.d) % d.d;
  Mat m = Mat::Zero(d.d, d.d);
  for (int j = 0; j < d.d; ++j)
    m(static_cast<int>((j + a) % d.d), j) =
        std::exp(cplx(0.0, 2.0 * std::numbers::pi * b * j / d.d));
  return m;
}

/// Discrete Fourier gate H[j,k] = exp(i 2 pi j k / d) / sqrt(d).
inline Unitary fourier(Dim d, const std::string& label = "q") {
  Mat m(d.d, d.d);
  for (int j = 0; j < d.d; ++j)
    for (int k = 0; k < d.d; ++k)
      m(j, k) = std::exp(cplx(0.0, 2.0 * std::numbers::pi * j * k / d.d)) /
                std::sqrt(static_cast<double>(d.d));
  return Unitary(single(label, d.d), single(label, d.d), std::move(m));
}

/// Controlled gate sum_j |j><j| (x) G_j for a list of d gates on the target.
/// Control label first in the result register.
inline Unitary controlled(const std::vector<Mat>& gates, int control_dim,
                          const std::string& control_label,
                          const std::string& target_label) {
  if (static_cast<int>(gates.size()) != control_dim)
    throw std::invalid_argument("controlled: need one gate per control level");
  const long dt = gates.front().rows();
  for (const auto& g : gates)
    if (g.rows() != dt || g.cols() != dt)
      throw std::invalid_argument("controlled: mismatched target dims");
  Mat m = Mat::Zero(control_dim * dt, control_dim * dt);
  for (int j = 0; j < control_dim; ++j)
    m.block(j * dt, j * dt, dt, dt) = gates[j];
  Register reg({control_label, target_label},
               {control_dim, static_cast<int>(dt)});
  return Unitary(reg, reg, std::move(m));
}

/// Controlled powers sum_j |j><j| (x) G^j of a single square gate.
inline Unitary controlled_powers(const Mat& g, int control_dim,
                                 const std::string& control_label,
                                 const std::string& target_label) {
  std::vector<Mat> gates;
  Mat cur = Mat::Identity(g.rows(), g.cols());
  for (int j = 0; j < control_dim; ++j) {
    gates.push_back(cur);
    cur = g * cur;
  }
  return controlled(gates, control_dim, control_label, target_label);
}

/// d^{-1/2} sum_i |ii> on two labels.
inline PureState max_entangled(Dim d, const std::string& label_a,
                               const std::string& label_b) {
  Register reg({label_a, label_b}, {d.d, d.d});
  Vec v = Vec::Zero(reg.total_dim());
  for (int i = 0; i < d.d; ++i)
    v(static_cast<long>(i) * d.d + i) = 1.0 / std::sqrt(d.d);
  return PureState(reg, std::move(v));
}

/// Generalized Bell basis {(X^a Z^b (x) I)|Theta>}, index order a*d + b.
inline std::vector<PureState> bell_basis(Dim d, const std::string& label_a,
                                         const std::string& label_b) {
  PureState theta = max_entangled(d, label_a, label_b);
  std::vector<PureState> basis;
  basis.reserve(static_cast<std::size_t>(d.d) * d.d);
  for (int a = 0; a < d.d; ++a)
    for (int b = 0; b < d.d; ++b) {
      Unitary w(single(label_a, d.d), single(label_a, d.d), weyl_op(d, a, b));
      basis.push_back(apply_unitary(w, theta));
    }
  return basis;
}

}  // namespace qott
