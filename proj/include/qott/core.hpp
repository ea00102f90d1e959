#pragma once

// Dense complex linear algebra over labeled qudit registers: states, tensor
// structure, subsystem permutation, partial trace and projective measurement.

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qott {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RowMat =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace tol {
// Construction-level identities hold at machine precision.
inline constexpr double construct = 1e-12;
// Derived equalities (eigendecompositions, channel algebra).
inline constexpr double derived = 1e-9;
// Eigenvalues of density operators may dip slightly negative.
inline constexpr double psd_slack = 1e-9;
}  // namespace tol

inline bool is_prime(int n) {
  if (n < 2) return false;
  for (int q = 2; q * q <= n; ++q)
    if (n % q == 0) return false;
  return true;
}

/// Qudit dimension. Protocol-facing code additionally requires primality.
struct Dim {
  int d;
  explicit Dim(int dim) : d(dim) {
    if (d < 2) throw std::invalid_argument("Dim: d must be >= 2");
  }
  void require_prime() const {
    if (!is_prime(d)) throw std::invalid_argument("Dim: d must be prime here");
  }
};

/// Ordered list of named subsystems. The first label is the most significant
/// digit of the basis index (row-major / big-endian convention).
class Register {
 public:
  Register() = default;
  Register(std::vector<std::string> labels, std::vector<int> dims)
      : labels_(std::move(labels)), dims_(std::move(dims)) {
    if (labels_.size() != dims_.size())
      throw std::invalid_argument("Register: labels/dims size mismatch");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (dims_[i] < 1) throw std::invalid_argument("Register: dim < 1");
      for (std::size_t j = i + 1; j < labels_.size(); ++j)
        if (labels_[i] == labels_[j])
          throw std::invalid_argument("Register: duplicate label " + labels_[i]);
    }
  }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t size() const { return labels_.size(); }

  long total_dim() const {
    long t = 1;
    for (int d : dims_) t *= d;
    return t;
  }

  bool has(const std::string& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
  }

  std::size_t pos(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end())
      throw std::invalid_argument("Register: no label " + label);
    return static_cast<std::size_t>(it - labels_.begin());
  }

  int dim_of(const std::string& label) const { return dims_[pos(label)]; }

  long dim_of(const std::vector<std::string>& subset) const {
    long t = 1;
    for (const auto& l : subset) t *= dim_of(l);
    return t;
  }

  Register subset(const std::vector<std::string>& keep) const {
    std::vector<int> d;
    for (const auto& l : keep) d.push_back(dim_of(l));
    return Register(keep, d);
  }

  /// Labels not in `drop`, in their current order.
  std::vector<std::string> complement(
      const std::vector<std::string>& drop) const {
    std::vector<std::string> rest;
    for (const auto& l : labels_)
      if (std::find(drop.begin(), drop.end(), l) == drop.end())
        rest.push_back(l);
    return rest;
  }

  bool operator==(const Register& o) const {
    return labels_ == o.labels_ && dims_ == o.dims_;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<int> dims_;
};

inline Register tensor(const Register& a, const Register& b) {
  std::vector<std::string> labels = a.labels();
  std::vector<int> dims = a.dims();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return Register(labels, dims);
}

namespace detail {

/// Flat index -> per-subsystem digits (most significant first).
inline void unflatten(long idx, const std::vector<int>& dims,
                      std::vector<int>& out) {
  out.resize(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    out[k] = static_cast<int>(idx % dims[k]);
    idx /= dims[k];
  }
}

inline long flatten(const std::vector<int>& digits,
                    const std::vector<int>& dims) {
  long idx = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) idx = idx * dims[k] + digits[k];
  return idx;
}

/// Permutation vector p with p[i] = current position of the label that the
/// new order puts at slot i.
inline std::vector<std::size_t> order_positions(
    const Register& reg, const std::vector<std::string>& new_order) {
  if (new_order.size() != reg.size())
    throw std::invalid_argument("permute: label set size mismatch");
  std::vector<std::size_t> p;
  p.reserve(new_order.size());
  for (const auto& l : new_order) p.push_back(reg.pos(l));
  return p;
}

/// Map from old flat index to new flat index under a subsystem reordering.
inline std::vector<long> permutation_index_map(
    const Register& reg, const std::vector<std::string>& new_order) {
  auto p = order_positions(reg, new_order);
  std::vector<int> new_dims(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) new_dims[i] = reg.dims()[p[i]];
  const long n = reg.total_dim();
  std::vector<long> map(n);
  std::vector<int> digits, nd(p.size());
  for (long i = 0; i < n; ++i) {
    unflatten(i, reg.dims(), digits);
    for (std::size_t k = 0; k < p.size(); ++k) nd[k] = digits[p[k]];
    map[i] = flatten(nd, new_dims);
  }
  return map;
}

}  // namespace detail

/// Pure state over a labeled register. Normalized unless flagged otherwise
/// (sub-normalized branch states are used in post-measurement analysis).
struct PureState {
  Register reg;
  Vec amps;
  bool unnormalized = false;

  PureState() = default;
  PureState(Register r, Vec a, bool unnorm = false)
      : reg(std::move(r)), amps(std::move(a)), unnormalized(unnorm) {
    if (amps.size() != reg.total_dim())
      throw std::invalid_argument("PureState: amplitude length mismatch");
    const double n2 = amps.squaredNorm();
    if (!unnormalized) {
      if (std::abs(n2 - 1.0) > 1e-10)
        throw std::invalid_argument("PureState: not normalized");
    } else if (n2 > 1.0 + 1e-9) {
      throw std::invalid_argument("PureState: norm^2 > 1");
    }
  }

  double norm2() const { return amps.squaredNorm(); }

  PureState normalized() const {
    const double n = amps.norm();
    if (n < 1e-300) throw std::runtime_error("PureState: zero norm");
    return PureState(reg, amps / n);
  }
};

/// Density operator over a labeled register. Hermitian, PSD, unit trace
/// unless flagged unnormalized (trace in [0,1]).
struct DensityOperator {
  Register reg;
  Mat matrix;
  bool unnormalized = false;

  DensityOperator() = default;
  DensityOperator(Register r, Mat m, bool unnorm = false)
      : reg(std::move(r)), matrix(std::move(m)), unnormalized(unnorm) {
    const long n = reg.total_dim();
    if (matrix.rows() != n || matrix.cols() != n)
      throw std::invalid_argument("DensityOperator: shape mismatch");
    if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument("DensityOperator: not Hermitian");
    const double tr = matrix.trace().real();
    if (!unnormalized) {
      if (std::abs(tr - 1.0) > 1e-10)
        throw std::invalid_argument("DensityOperator: trace != 1");
    } else if (tr < -1e-9 || tr > 1.0 + 1e-9) {
      throw std::invalid_argument("DensityOperator: trace outside [0,1]");
    }
    // Full spectral PSD validation up to moderate dimension; larger
    // operators only arise from PSD-preserving maps (conjugation,
    // permutation, partial trace) of already-validated ones.
    if (n <= 192) {
      Eigen::SelfAdjointEigenSolver<Mat> es(matrix, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -tol::psd_slack)
        throw std::invalid_argument(
            "DensityOperator: not positive semidefinite");
    } else if (matrix.diagonal().real().minCoeff() < -tol::psd_slack) {
      throw std::invalid_argument("DensityOperator: negative diagonal");
    }
  }

  double trace() const { return matrix.trace().real(); }
};

/// Square matrix mapping one labeled register onto another of equal total
/// dimension, unitary within 1e-10.
struct Unitary {
  Register in_reg;
  Register out_reg;
  Mat matrix;

  Unitary() = default;
  Unitary(Register in, Register out, Mat m)
      : in_reg(std::move(in)), out_reg(std::move(out)), matrix(std::move(m)) {
    const long n = in_reg.total_dim();
    if (out_reg.total_dim() != n)
      throw std::invalid_argument("Unitary: in/out dimension mismatch");
    if (matrix.rows() != n || matrix.cols() != n)
      throw std::invalid_argument("Unitary: shape mismatch");
    if (n <= 512) {
      Mat dev = matrix.adjoint() * matrix - Mat::Identity(n, n);
      if (dev.cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("Unitary: U^dag U != I");
    } else {
      // at this size the full n^3 Gram product dominates construction time;
      // check every column norm plus a strided set of columns against all
      // others instead
      for (long j = 0; j < n; ++j)
        if (std::abs(matrix.col(j).squaredNorm() - 1.0) > 1e-10)
          throw std::invalid_argument("Unitary: column not normalized");
      const long step = std::max<long>(1, n / 48);
      for (long j = 0; j < n; j += step) {
        Vec row = matrix.adjoint() * matrix.col(j);
        row(j) -= 1.0;
        if (row.cwiseAbs().maxCoeff() > 1e-10)
          throw std::invalid_argument("Unitary: U^dag U != I");
      }
    }
  }

  Unitary adjoint() const {
    return Unitary(out_reg, in_reg, matrix.adjoint());
  }
};

// ---------------------------------------------------------------------------
// Construction helpers

inline PureState basis_state(const Register& reg, long index) {
  Vec v = Vec::Zero(reg.total_dim());
  v(index) = 1.0;
  return PureState(reg, v);
}

inline DensityOperator to_density(const PureState& s) {
  return DensityOperator(s.reg, s.amps * s.amps.adjoint(), s.unnormalized);
}

inline DensityOperator maximally_mixed(const Register& reg) {
  const long n = reg.total_dim();
  return DensityOperator(reg, Mat::Identity(n, n) / static_cast<double>(n));
}

inline PureState tensor(const PureState& a, const PureState& b) {
  Vec v(a.amps.size() * b.amps.size());
  for (long i = 0; i < a.amps.size(); ++i)
    v.segment(i * b.amps.size(), b.amps.size()) = a.amps(i) * b.amps;
  return PureState(tensor(a.reg, b.reg), std::move(v),
                   a.unnormalized || b.unnormalized);
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline DensityOperator tensor(const DensityOperator& a,
                              const DensityOperator& b) {
  return DensityOperator(tensor(a.reg, b.reg), kron(a.matrix, b.matrix),
                         a.unnormalized || b.unnormalized);
}

// ---------------------------------------------------------------------------
// Subsystem permutation

inline PureState permute_subsystems(const PureState& s,
                                    const std::vector<std::string>& order) {
  if (order == s.reg.labels()) return s;
  auto map = detail::permutation_index_map(s.reg, order);
  Vec v(s.amps.size());
  for (long i = 0; i < s.amps.size(); ++i) v(map[i]) = s.amps(i);
  return PureState(s.reg.subset(order), std::move(v), s.unnormalized);
}

inline DensityOperator permute_subsystems(
    const DensityOperator& rho, const std::vector<std::string>& order) {
  if (order == rho.reg.labels()) return rho;
  auto map = detail::permutation_index_map(rho.reg, order);
  Mat m(rho.matrix.rows(), rho.matrix.cols());
  for (long i = 0; i < rho.matrix.rows(); ++i)
    for (long j = 0; j < rho.matrix.cols(); ++j)
      m(map[i], map[j]) = rho.matrix(i, j);
  return DensityOperator(rho.reg.subset(order), std::move(m),
                         rho.unnormalized);
}

// ---------------------------------------------------------------------------
// Operator application

namespace detail {

/// Order with `front` first (in the given order) and the remaining labels
/// after, preserving their relative order.
inline std::vector<std::string> front_order(
    const Register& reg, const std::vector<std::string>& front) {
  std::vector<std::string> order = front;
  for (const auto& l : reg.complement(front)) order.push_back(l);
  return order;
}

}  // namespace detail

/// Apply `op` to the ordered subset `in_labels` of a pure state. The operator
/// maps the subset onto `out_sub` (equal or different labels/dimension); the
/// result register is out_sub followed by the untouched labels.
inline PureState apply_op(const Mat& op, const PureState& s,
                          const std::vector<std::string>& in_labels,
                          const Register& out_sub) {
  const long din = s.reg.dim_of(in_labels);
  if (op.cols() != din || op.rows() != out_sub.total_dim())
    throw std::invalid_argument("apply_op: operator shape mismatch");
  PureState t = permute_subsystems(s, detail::front_order(s.reg, in_labels));
  const long rest = t.reg.total_dim() / din;
  Eigen::Map<const RowMat> in_mat(t.amps.data(), din, rest);
  RowMat out_mat = op * in_mat;
  Register out_reg = out_sub;
  for (const auto& l : s.reg.complement(in_labels))
    out_reg = tensor(out_reg, Register({l}, {s.reg.dim_of(l)}));
  Vec v = Eigen::Map<Vec>(out_mat.data(), out_mat.size());
  return PureState(out_reg, std::move(v), true);
}

/// Apply a unitary to a subset of labels. When the unitary preserves its
/// label names the original register order is restored; a renaming unitary
/// leaves the new labels in front.
inline PureState apply_unitary(const Unitary& u, const PureState& s) {
  PureState r = apply_op(u.matrix, s, u.in_reg.labels(), u.out_reg);
  if (u.in_reg.labels() == u.out_reg.labels())
    r = permute_subsystems(r, s.reg.labels());
  r.unnormalized = s.unnormalized;
  return r;
}

inline DensityOperator apply_unitary(const Unitary& u,
                                     const DensityOperator& rho);

/// Contract a bra vector over `labels`: result = (<bra| (x) I) |s>.
inline PureState project_out(const Vec& bra, const PureState& s,
                             const std::vector<std::string>& labels) {
  const long din = s.reg.dim_of(labels);
  if (bra.size() != din)
    throw std::invalid_argument("project_out: bra length mismatch");
  PureState t = permute_subsystems(s, detail::front_order(s.reg, labels));
  const long rest = t.reg.total_dim() / din;
  Eigen::Map<const RowMat> in_mat(t.amps.data(), din, rest);
  Vec v = (bra.adjoint() * in_mat).transpose();
  auto rest_labels = s.reg.complement(labels);
  return PureState(s.reg.subset(rest_labels), std::move(v), true);
}

// ---------------------------------------------------------------------------
// Partial trace and marginals

/// Marginal of a pure state on `keep` (traces out everything else).
inline DensityOperator marginal(const PureState& s,
                                const std::vector<std::string>& keep) {
  PureState t = permute_subsystems(s, detail::front_order(s.reg, keep));
  const long dk = s.reg.dim_of(keep);
  const long rest = t.reg.total_dim() / dk;
  Eigen::Map<const RowMat> m(t.amps.data(), dk, rest);
  Mat rho = m * m.adjoint();
  const bool unnorm =
      s.unnormalized || std::abs(rho.trace().real() - 1.0) > 1e-10;
  return DensityOperator(s.reg.subset(keep), std::move(rho), unnorm);
}

inline DensityOperator partial_trace(const DensityOperator& rho,
                                     const std::vector<std::string>& keep) {
  DensityOperator t =
      permute_subsystems(rho, detail::front_order(rho.reg, keep));
  const long dk = rho.reg.dim_of(keep);
  const long rest = t.reg.total_dim() / dk;
  Mat out = Mat::Zero(dk, dk);
  for (long i = 0; i < dk; ++i)
    for (long j = 0; j < dk; ++j)
      for (long r = 0; r < rest; ++r)
        out(i, j) += t.matrix(i * rest + r, j * rest + r);
  return DensityOperator(rho.reg.subset(keep), std::move(out),
                         rho.unnormalized);
}

// ---------------------------------------------------------------------------
// Embedding small operators into a larger register (density-operator path;
// kept for moderate dimensions only)

inline Mat embed(const Mat& op, const Register& reg,
                 const std::vector<std::string>& in_labels) {
  const long din = reg.dim_of(in_labels);
  if (op.rows() != din || op.cols() != din)
    throw std::invalid_argument("embed: operator must be square on subset");
  auto order = detail::front_order(reg, in_labels);
  auto map = detail::permutation_index_map(reg, order);
  const long n = reg.total_dim();
  const long rest = n / din;
  Mat out = Mat::Zero(n, n);
  for (long i = 0; i < din; ++i)
    for (long j = 0; j < din; ++j) {
      if (op(i, j) == cplx(0.0)) continue;
      for (long r = 0; r < rest; ++r) out(i * rest + r, j * rest + r) = op(i, j);
    }
  // conjugate by the permutation back to the register's own order
  std::vector<long> inv(map.size());
  for (std::size_t k = 0; k < map.size(); ++k) inv[map[k]] = static_cast<long>(k);
  Mat res(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) res(inv[i], inv[j]) = out(i, j);
  return res;
}

inline DensityOperator apply_unitary(const Unitary& u,
                                     const DensityOperator& rho) {
  if (u.in_reg.total_dim() == rho.reg.total_dim() &&
      u.in_reg.labels() == rho.reg.labels()) {
    Mat m = u.matrix * permute_subsystems(rho, u.in_reg.labels()).matrix *
            u.matrix.adjoint();
    return DensityOperator(u.out_reg, std::move(m), rho.unnormalized);
  }
  // unitary on a subset, labels preserved
  Mat big = embed(u.matrix, rho.reg, u.in_reg.labels());
  return DensityOperator(rho.reg, big * rho.matrix * big.adjoint(),
                         rho.unnormalized);
}

// ---------------------------------------------------------------------------
// Projective measurement

struct MeasurementBranch {
  double probability = 0.0;
  DensityOperator post_state;               // normalized (trace 1), if prob > 0
  DensityOperator post_state_unnormalized;  // trace = probability
};

inline std::vector<MeasurementBranch> measure_projective(
    const DensityOperator& rho, const std::vector<Mat>& projectors) {
  const long n = rho.reg.total_dim();
  Mat sum = Mat::Zero(n, n);
  for (const auto& p : projectors) {
    if (p.rows() != n || p.cols() != n)
      throw std::invalid_argument("measure_projective: projector shape");
    if ((p * p - p).cwiseAbs().maxCoeff() > 1e-9 ||
        (p - p.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
      throw std::invalid_argument("measure_projective: not a projector");
    sum += p;
  }
  if ((sum - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("measure_projective: incomplete projector set");
  std::vector<MeasurementBranch> out;
  for (const auto& p : projectors) {
    MeasurementBranch b;
    Mat post = p * rho.matrix * p;
    b.probability = std::max(0.0, post.trace().real());
    if (b.probability > 1e-15) {
      b.post_state = DensityOperator(rho.reg, post / b.probability);
      b.post_state_unnormalized = DensityOperator(rho.reg, post, true);
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace qott
