#pragma once

// Dual-masker synthesis: numerically factor the purified masking isometry
// V : C -> (A, B, K) as (I_A (x) N)(I_C (x) |Psi>_{A,S'}) for any chosen
// share, and (2,3)-threshold secret-sharing checks built on it.

#include "qott/masker.hpp"
#include "qott/random.hpp"

namespace qott {

/// The purified masking isometry. Columns are V|c> on (out_a, out_b, K).
struct MaskerIsometry {
  Register out_reg;
  Mat v;  // (dA*dB*dK) x d
};

inline MaskerIsometry masking_isometry(const Masker& m,
                                       const SafeKeyState& omega) {
  const int d = m.d.d;
  Register c_reg = single("C", d);
  Register out_reg;
  {
    std::vector<std::string> labels = m.out_labels();
    labels.push_back(omega.key_label);
    std::vector<int> dims;
    for (const auto& l : m.out_labels())
      dims.push_back(m.unitary.out_reg.dim_of(l));
    dims.push_back(omega.key_dim);
    out_reg = Register(labels, dims);
  }
  Mat v(out_reg.total_dim(), d);
  for (int c = 0; c < d; ++c) {
    PureState in = tensor(basis_state(c_reg, c), omega.state);
    PureState out = apply_unitary(m.unitary, in);  // (out labels..., K)
    out = permute_subsystems(out, out_reg.labels());
    v.col(c) = out.amps;
  }
  return MaskerIsometry{out_reg, std::move(v)};
}

/// Result of factoring the share group F out of V:
///   V = (I_F (x) N_{C,S' -> rest}) (I_C (x) |Psi>_{F,S'})
struct ShareFactorization {
  Unitary n_unitary;  // (C, S') -> rest labels of V
  PureState partner;  // |Psi> on (F..., S')
  double residual = 0.0;
};

inline ShareFactorization factor_share(
    const MaskerIsometry& iso, int d,
    const std::vector<std::string>& factor_out,
    const std::string& sprime_label = "S'") {
  const Register& out_reg = iso.out_reg;
  const long df = out_reg.dim_of(factor_out);
  auto rest_labels = out_reg.complement(factor_out);
  const long drest = out_reg.dim_of(rest_labels);
  if (drest % d != 0)
    throw std::invalid_argument("factor_share: dimensions do not factor");
  const long dsp = drest / d;

  // constant F-marginal at the maximally mixed input
  Mat sigma = Mat::Zero(df, df);
  for (int c = 0; c < d; ++c) {
    PureState col(out_reg, iso.v.col(c), true);
    sigma += marginal(col, factor_out).matrix;
  }
  sigma /= static_cast<double>(d);

  // canonical purification |Psi>_{F,S'}
  Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
  std::vector<long> keep;
  for (long i = 0; i < df; ++i)
    if (es.eigenvalues()(i) > 1e-12) keep.push_back(i);
  if (static_cast<long>(keep.size()) > dsp)
    throw std::runtime_error("factor_share: marginal rank exceeds S' dim");
  Register psi_reg =
      tensor(out_reg.subset(factor_out), single(sprime_label, static_cast<int>(dsp)));
  Vec psi = Vec::Zero(df * dsp);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const double w = std::sqrt(es.eigenvalues()(keep[k]));
    for (long f = 0; f < df; ++f)
      psi(f * dsp + static_cast<long>(k)) = w * es.eigenvectors()(f, keep[k]);
  }
  PureState partner(psi_reg, psi);

  // Constraints N (|c> (x) |psi_f>) = <f|_F V |c> for all

  // (c, f) pairs.
  const long nin = d * dsp;
  Mat p(nin, d * df), q(drest, d * df);
  long col = 0;
  for (int c = 0; c < d; ++c) {
    PureState vcol(out_reg, iso.v.col(c), true);
    for (long f = 0; f < df; ++f, ++col) {
      Vec pc = Vec::Zero(nin);
      pc.segment(c * dsp, dsp) = psi.segment(f * dsp, dsp);
      p.col(col) = pc;
      Vec bra = Vec::Zero(df);
      bra(f) = 1.0;
      PureState rest = project_out(bra, vcol, factor_out);
      rest = permute_subsystems(rest, rest_labels);
      q.col(col) = rest.amps;
    }
  }

  Eigen::BDCSVD<Mat> svd(p, Eigen::ComputeFullU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  long r = 0;
  while (r < svd.singularValues().size() &&
         svd.singularValues()(r) > 1e-10 * smax)
    ++r;
  // images of the range basis under the (least-squares) solution
  Mat b(drest, r);
  for (long i = 0; i < r; ++i)
    b.col(i) = q * svd.matrixV().col(i) / svd.singularValues()(i);
  // polar orthonormalization (duality makes b near-isometric already)
  {
    Eigen::JacobiSVD<Mat> pol(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    b = pol.matrixU() * pol.matrixV().adjoint();
  }
  Mat u_range = svd.matrixU().leftCols(r);
  Mat n_mat;
  if (r == nin) {
    n_mat = b * u_range.adjoint();
  } else {
    // complete both orthonormal families and map complement to complement
    Mat u_comp = svd.matrixU().rightCols(nin - r);
    Eigen::HouseholderQR<Mat> qr(b);
    Mat q_full = qr.householderQ();
    Mat b_comp = q_full.rightCols(drest - r);
    // project out any residual overlap with b, then renormalize
    b_comp -= b * (b.adjoint() * b_comp);
    for (long i = 0; i < b_comp.cols(); ++i) b_comp.col(i).normalize();
    n_mat = b * u_range.adjoint() + b_comp.leftCols(nin - r) * u_comp.adjoint();
  }

  Register n_in = tensor(single("C", d), single(sprime_label, static_cast<int>(dsp)));
  Unitary n(n_in, out_reg.subset(rest_labels), n_mat);

  // residual of the factorization, after optimal global phase alignment
  Mat rhs(out_reg.total_dim(), d);
  std::vector<std::string> fr_order = factor_out;
  for (const auto& l : rest_labels) fr_order.push_back(l);
  for (int c = 0; c < d; ++c) {
    Vec v_fr = Vec::Zero(df * drest);
    for (long f = 0; f < df; ++f) {
      Vec in = Vec::Zero(nin);
      in.segment(c * dsp, dsp) = psi.segment(f * dsp, dsp);
      v_fr.segment(f * drest, drest) = n_mat * in;
    }
    PureState s(out_reg.subset(fr_order), v_fr, true);
    rhs.col(c) = permute_subsystems(s, out_reg.labels()).amps;
  }
  cplx overlap = (iso.v.adjoint() * rhs).trace();
  cplx phase = std::abs(overlap) > 1e-300 ? overlap / std::abs(overlap) : cplx(1.0);
  double residual = (iso.v - rhs * std::conj(phase)).norm();

  return ShareFactorization{std::move(n), std::move(partner), residual};
}

/// Dual masker: factor out the A share.
struct DualMasker {
  Unitary n_unitary;   // (C, S') -> (out_b..., K)
  PureState partner;   // |Psi> on (out_a..., S')
  double residual = 0.0;
};

inline DualMasker dual_masker(const Masker& m) {
  SafeKeyState omega = purify_safe(m);
  MaskerIsometry iso = masking_isometry(m, omega);
  ShareFactorization f = factor_share(iso, m.d.d, m.out_a);
  if (f.residual > 1e-6)
    throw std::runtime_error(
        "dual_masker: factorization residual too large; input does not mask");
  return DualMasker{std::move(f.n_unitary), std::move(f.partner), f.residual};
}

/// Build a Masker whose masking unitary is the synthesized dual N (shares =
/// the two groups of N's output). Lets verify_masking run on the dual.
inline Masker masker_from_dual(const Masker& m, const DualMasker& dual) {
  // safe state of the dual = S'-marginal of |Psi>
  DensityOperator safe = marginal(dual.partner, {"S'"});
  std::vector<std::string> out = dual.n_unitary.out_reg.labels();
  std::vector<std::string> share_a(out.begin(), out.end() - 1);
  std::vector<std::string> share_b(out.end() - 1, out.end());
  return Masker{m.d, m.family + "-dual-synth", dual.n_unitary, safe,
                {"S'"}, share_a, share_b};
}

// ---------------------------------------------------------------------------
// (2,3)-threshold quantum secret sharing checks on the purified masker

struct Qss23Report {
  double max_single_share_dev = 0.0;  // probe marginal constancy, worst share
  double min_single_share_entropy_bits = 0.0;
  double min_recovery_fidelity_ab = 1.0;
  double min_recovery_fidelity_bk = 1.0;
  double min_recovery_fidelity_ak = 1.0;
  double residual_bk = 0.0;  // factor-out-A residual
  double residual_ak = 0.0;  // factor-out-B residual
  bool pass = false;
};

inline Qss23Report qss23_check(const Masker& m, int n_secrets = 5,
                               std::uint64_t seed = 17) {
  Qss23Report rep;
  const int d = m.d.d;
  SafeKeyState omega = purify_safe(m);
  MaskerIsometry iso = masking_isometry(m, omega);

  std::vector<std::vector<std::string>> shares = {m.out_a, m.out_b, {"K"}};

  // single-share marginal constancy and entropy over the probe set
  rep.min_single_share_entropy_bits = 1e300;
  for (const auto& share : shares) {
    std::vector<DensityOperator> margs;
    for (const auto& probe : masking_probe_states(m.d)) {
      PureState out(iso.out_reg, iso.v * probe.amps);
      margs.push_back(marginal(out, share));
    }
    for (std::size_t i = 0; i < margs.size(); ++i)
      for (std::size_t j = i + 1; j < margs.size(); ++j)
        rep.max_single_share_dev = std::max(
            rep.max_single_share_dev, trace_distance(margs[i], margs[j]));
    // entropy at the maximally mixed input
    Mat avg = Mat::Zero(margs[0].matrix.rows(), margs[0].matrix.cols());
    for (int c = 0; c < d; ++c) {
      PureState col(iso.out_reg, iso.v.col(c), true);
      avg += marginal(col, share).matrix / static_cast<double>(d);
    }
    rep.min_single_share_entropy_bits =
        std::min(rep.min_single_share_entropy_bits,
                 von_neumann_entropy(DensityOperator(iso.out_reg.subset(share),
                                                     std::move(avg))));
  }

  ShareFactorization fac_a = factor_share(iso, d, m.out_a);  // decoder for (B,K)
  ShareFactorization fac_b = factor_share(iso, d, m.out_b);  // decoder for (A,K)
  rep.residual_bk = fac_a.residual;
  rep.residual_ak = fac_b.residual;

  auto rng = stream_rng(seed, 0);
  for (int t = 0; t < n_secrets; ++t) {
    PureState secret = random_pure_state(rng, single("C", d));
    PureState global(iso.out_reg, iso.v * secret.amps);
    DensityOperator ref = to_density(secret);

    // (A,B): direct unmasking by M^dag
    {
      PureState back = apply_unitary(m.unitary.adjoint(), global);
      rep.min_recovery_fidelity_ab = std::min(
          rep.min_recovery_fidelity_ab, fidelity(marginal(back, {"C"}), ref));
    }
    // (B,K): dual unmasking by N^dag from the factor-out-A synthesis
    {
      PureState back = apply_unitary(fac_a.n_unitary.adjoint(), global);
      rep.min_recovery_fidelity_bk = std::min(
          rep.min_recovery_fidelity_bk, fidelity(marginal(back, {"C"}), ref));
    }
    // (A,K): synthesized decoder from the factor-out-B factorization
    {
      PureState back = apply_unitary(fac_b.n_unitary.adjoint(), global);
      rep.min_recovery_fidelity_ak = std::min(
          rep.min_recovery_fidelity_ak, fidelity(marginal(back, {"C"}), ref));
    }
  }

  const double fid_floor = 1.0 - 1e-8;
  rep.pass = rep.max_single_share_dev <= tol::derived &&
             rep.min_single_share_entropy_bits >=
                 std::log2(static_cast<double>(d)) - tol::derived &&
             rep.min_recovery_fidelity_ab >= fid_floor &&
             rep.min_recovery_fidelity_bk >= fid_floor &&
             rep.min_recovery_fidelity_ak >= fid_floor;
  return rep;
}

}  // namespace qott
