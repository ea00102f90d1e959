#pragma once

// SETUP / COMMIT / REVEAL engine with honest and adversarial parties, the
// delayed-teleportation ideal-functionality oracle, and the security
// figures: hiding, the 1/|J| binding bound, dark counts and repetition.

#include <map>
#include <optional>
#include <set>

#include "qott/qott.hpp"

namespace qott {

struct DetectorModel {
  double epsilon = 0.0;  // dark-count probability: accept regardless
  DetectorModel() = default;
  explicit DetectorModel(double e) : epsilon(e) {
    if (e < 0.0 || e >= 1.0)
      throw std::invalid_argument("DetectorModel: epsilon outside [0,1)");
  }
};

// ---------------------------------------------------------------------------
// Party views and access discipline

enum class Role { Ted, Alice, Bob };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::Ted: return "Ted";
    case Role::Alice: return "Alice";
    default: return "Bob";
  }
}

/// Register/card ownership per phase. Out-of-view accesses are recorded in
/// the violation log; they indicate programming errors in a strategy.
struct PartyViews {
  std::map<Role, std::set<std::string>> registers;
  std::map<Role, std::set<std::string>> cards;
  std::vector<std::string> violations;

  void require_registers(Role r, const std::vector<std::string>& labels) {
    for (const auto& l : labels)
      if (!registers[r].count(l))
        violations.push_back(std::string(role_name(r)) +
                             " accessed register " + l);
  }
  void require_card(Role r, const std::string& name) {
    if (!cards[r].count(name))
      violations.push_back(std::string(role_name(r)) + " accessed card " +
                           name);
  }
  void transfer(Role from, Role to, const std::vector<std::string>& labels) {
    for (const auto& l : labels) {
      registers[from].erase(l);
      registers[to].insert(l);
    }
  }
};

// ---------------------------------------------------------------------------
// Teleportation correction convention
//
// The Bell basis fixes the correction only up to exponent signs and operator
// order; the convention is pinned once by a d=2 self-test and then frozen.

namespace detail {

struct CorrectionConvention {
  int sign_a = 1, sign_b = 1;
  bool x_first = true;
};

inline Mat correction_matrix(const CorrectionConvention& c, Dim d, int a,
                             int b) {
  Mat x = weyl_op(d, c.sign_a * a, 0);
  Mat z = weyl_op(d, 0, c.sign_b * b);
  return c.x_first ? Mat(x * z) : Mat(z * x);
}

inline CorrectionConvention pick_correction_convention() {
  const Dim d(2);
  Vec psi(2);
  psi << cplx(1.0, 0.0) / std::sqrt(5.0), cplx(0.0, 2.0) / std::sqrt(5.0);
  PureState secret(single("I", 2), psi);
  PureState global = tensor(secret, max_entangled(d, "E", "C"));
  auto bell = bell_basis(d, "I", "E");
  for (int sa : {1, -1})
    for (int sb : {1, -1})
      for (bool xf : {true, false}) {
        CorrectionConvention c{sa, sb, xf};
        bool ok = true;
        for (int a = 0; a < 2 && ok; ++a)
          for (int b = 0; b < 2 && ok; ++b) {
            PureState branch =
                project_out(bell[a * 2 + b].amps, global, {"I", "E"});
            Vec fixed = correction_matrix(c, d, a, b) * branch.amps;
            double overlap = std::norm(psi.dot(fixed)) / fixed.squaredNorm();
            ok = overlap > 1.0 - 1e-9;
          }
        if (ok) return c;
      }
  throw std::runtime_error("no teleportation correction convention works");
}

inline const CorrectionConvention& correction_convention() {
  static const CorrectionConvention c = pick_correction_convention();
  return c;
}

}  // namespace detail

inline Mat teleport_correction(Dim d, int a, int b) {
  return detail::correction_matrix(detail::correction_convention(), d, a, b);
}

// ---------------------------------------------------------------------------
// Strategies

/// Alice's most general commit behavior: one subchannel per reported (a,b),
/// given as Kraus lists mapping (E, A-shares) onto the A-shares, with the
/// total sum trace-preserving. `xi` is an optional post-commit channel on
/// the A-shares.
struct GenericStrategy {
  int d = 0;
  std::vector<std::vector<Mat>> instrument;  // indexed a*d + b
  std::vector<Mat> xi;                       // empty = identity

  /// max |sum K^dag K - I| deviation.
  double completeness_deviation(long din) const {
    Mat sum = Mat::Zero(din, din);
    for (const auto& branch : instrument)
      for (const auto& k : branch) sum += k.adjoint() * k;
    return (sum - Mat::Identity(din, din)).cwiseAbs().maxCoeff();
  }
};

/// The honest Bell measurement with a pure secret, written as an instrument.
inline GenericStrategy honest_instrument(const PureState& secret, Dim d,
                                         long da) {
  GenericStrategy s;
  s.d = d.d;
  auto bell = bell_basis(d, "I", "E");
  for (int a = 0; a < d.d; ++a)
    for (int b = 0; b < d.d; ++b) {
      // contract the secret into the Bell bra, leaving a bra on E
      Mat c(1, d.d);
      for (int e = 0; e < d.d; ++e) {
        cplx acc = 0.0;
        for (int i = 0; i < d.d; ++i)
          acc += std::conj(bell[a * d.d + b].amps(i * d.d + e)) *
                 secret.amps(i);
        c(0, e) = acc;
      }
      s.instrument.push_back({kron(c, Mat::Identity(da, da))});
    }
  return s;
}

/// Honest measurement but the outcome reported to Bob is shifted.
inline GenericStrategy shifted_report_instrument(const PureState& secret,
                                                 Dim d, long da, int shift_a,
                                                 int shift_b) {
  GenericStrategy h = honest_instrument(secret, d, da);
  GenericStrategy s;
  s.d = d.d;
  s.instrument.resize(h.instrument.size());
  for (int a = 0; a < d.d; ++a)
    for (int b = 0; b < d.d; ++b) {
      int ra = (a + shift_a) % d.d;
      int rb = (b + shift_b) % d.d;
      s.instrument[ra * d.d + rb] = h.instrument[a * d.d + b];
    }
  return s;
}

/// Discard everything, measure (E,A) in a random basis to pick the report,
/// and hand Bob a fresh state.
inline GenericStrategy forge_strategy(Dim d, long da, std::mt19937_64& rng) {
  GenericStrategy s;
  s.d = d.d;
  const long din = d.d * da;
  Mat basis = random_unitary(rng, din);
  Vec eta = random_gaussian_vec(rng, da);
  eta.normalize();
  // spread the din measurement outcomes over the d^2 reports
  std::vector<std::vector<Mat>> inst(static_cast<std::size_t>(d.d) * d.d);
  for (long m = 0; m < din; ++m) {
    Mat k = eta * basis.col(m).adjoint();
    inst[m % (static_cast<long>(d.d) * d.d)].push_back(std::move(k));
  }
  s.instrument = std::move(inst);
  return s;
}

/// Random CPTP instrument with `kraus_per_outcome` Kraus operators each.
inline GenericStrategy random_instrument(Dim d, long da, std::mt19937_64& rng,
                                         int kraus_per_outcome = 1) {
  const long din = d.d * da;
  std::vector<std::vector<Mat>> raw(static_cast<std::size_t>(d.d) * d.d);
  Mat sum = Mat::Zero(din, din);
  for (auto& branch : raw)
    for (int k = 0; k < kraus_per_outcome; ++k) {
      branch.push_back(random_gaussian_mat(rng, da, din));
      sum += branch.back().adjoint() * branch.back();
    }
  // normalize so the total map is trace preserving
  Eigen::SelfAdjointEigenSolver<Mat> es(sum);
  Mat inv_sqrt = es.eigenvectors() *
                 es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                 es.eigenvectors().adjoint();
  GenericStrategy s;
  s.d = d.d;
  for (auto& branch : raw) {
    std::vector<Mat> fixed;
    for (auto& k : branch) fixed.push_back(k * inv_sqrt);
    s.instrument.push_back(std::move(fixed));
  }
  return s;
}

// Channels on the A-shares (Kraus lists)

inline std::vector<Mat> channel_identity(long da) {
  return {Mat::Identity(da, da)};
}

inline std::vector<Mat> channel_replace_with_basis0(long da) {
  std::vector<Mat> ks;
  for (long i = 0; i < da; ++i) {
    Mat k = Mat::Zero(da, da);
    k(0, i) = 1.0;
    ks.push_back(std::move(k));
  }
  return ks;
}

inline std::vector<Mat> channel_depolarizing(Dim d, double lambda) {
  std::vector<Mat> ks;
  for (int a = 0; a < d.d; ++a)
    for (int b = 0; b < d.d; ++b) {
      double w = (a == 0 && b == 0) ? 1.0 - lambda + lambda / (d.d * d.d)
                                    : lambda / (d.d * d.d);
      ks.push_back(std::sqrt(w) * weyl_op(d, a, b));
    }
  return ks;
}

inline std::vector<Mat> channel_random(long da, std::mt19937_64& rng,
                                       int n_kraus = 2) {
  std::vector<Mat> raw;
  Mat sum = Mat::Zero(da, da);
  for (int k = 0; k < n_kraus; ++k) {
    raw.push_back(random_gaussian_mat(rng, da, da));
    sum += raw.back().adjoint() * raw.back();
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(sum);
  Mat inv_sqrt = es.eigenvectors() *
                 es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                 es.eigenvectors().adjoint();
  for (auto& k : raw) k = k * inv_sqrt;
  return raw;
}

// ---------------------------------------------------------------------------
// Phase engine

struct SetupResult {
  QottParams params;
  QottCommodity commodity;
  SafeKeyState omega;
  PartyViews views;
};

/// SETUP: Ted builds the commodity, hands (E, A-shares) to Alice and
/// (B-shares, K) to Bob, delivers the cards privately, and exits.
inline SetupResult run_setup(const QottParams& params,
                             const IndexCards& cards) {
  QottCommodity commodity = build_qott(params, cards);
  PartyViews views;
  views.registers[Role::Alice].insert("E");
  for (const auto& l : params.masker.out_a)
    views.registers[Role::Alice].insert(l);
  for (const auto& l : params.masker.out_b)
    views.registers[Role::Bob].insert(l);
  views.registers[Role::Bob].insert("K");
  views.cards[Role::Alice] = {"i1", "i2"};
  views.cards[Role::Bob] = {"j1", "j2"};
  return SetupResult{params, std::move(commodity), purify_safe(params.masker),
                     std::move(views)};
}

/// One reported outcome (a,b) with its unnormalized post-commit ensemble.
struct Branch {
  int a = 0, b = 0;
  std::vector<PureState> kets;  // unnormalized, shared register

  double weight() const {
    double w = 0.0;
    for (const auto& k : kets) w += k.norm2();
    return w;
  }
};

struct CommitResult {
  std::vector<Branch> branches;  // all d^2 outcomes
  bool has_reference = false;    // branches carry the purification label R
};

inline PureState purify(const DensityOperator& rho, const std::string& ref,
                        const std::string& sys) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho.matrix);
  std::vector<long> keep;
  for (long i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 1e-12) keep.push_back(i);
  const long n = rho.reg.total_dim();
  Register reg({ref, sys}, {static_cast<int>(keep.size()), static_cast<int>(n)});
  Vec v = Vec::Zero(static_cast<long>(keep.size()) * n);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const double w = std::sqrt(es.eigenvalues()(keep[r]));
    for (long i = 0; i < n; ++i)
      v(static_cast<long>(r) * n + i) = w * es.eigenvectors()(i, keep[r]);
  }
  return PureState(reg, std::move(v));
}

/// COMMIT, honest: adjoin the secret (purified to R,I), Bell-measure (I,E).
inline CommitResult run_commit_honest(const SetupResult& setup,
                                      const DensityOperator& secret,
                                      PartyViews* views = nullptr) {
  const Dim d = setup.params.p;
  if (secret.reg.total_dim() != d.d)
    throw std::invalid_argument("commit: secret dimension != p");
  if (views) views->require_registers(Role::Alice, {"E"});
  PureState global = tensor(purify(secret, "R", "I"), setup.commodity.state);
  auto bell = bell_basis(d, "I", "E");
  CommitResult res;
  res.has_reference = true;
  for (int a = 0; a < d.d; ++a)
    for (int b = 0; b < d.d; ++b) {
      Branch br;
      br.a = a;
      br.b = b;
      br.kets.push_back(
          project_out(bell[a * d.d + b].amps, global, {"I", "E"}));
      res.branches.push_back(std::move(br));
    }
  return res;
}

/// COMMIT, generic: apply the strategy's subchannels to (E, A-shares).
inline CommitResult run_commit_generic(const SetupResult& setup,
                                       const GenericStrategy& strategy,
                                       PartyViews* views = nullptr) {
  const Dim d = setup.params.p;
  const auto& out_a = setup.params.masker.out_a;
  std::vector<std::string> in_labels = {"E"};
  in_labels.insert(in_labels.end(), out_a.begin(), out_a.end());
  if (views) views->require_registers(Role::Alice, in_labels);
  const long din = setup.commodity.state.reg.dim_of(in_labels);
  if (strategy.completeness_deviation(din) > tol::derived)
    throw std::invalid_argument("strategy: instrument not trace preserving");
  Register out_sub = setup.commodity.state.reg.subset(out_a);
  CommitResult res;
  for (int a = 0; a < d.d; ++a)
    for (int b = 0; b < d.d; ++b) {
      Branch br;
      br.a = a;
      br.b = b;
      for (const auto& k : strategy.instrument[a * static_cast<long>(d.d) + b])
        br.kets.push_back(
            apply_op(k, setup.commodity.state, in_labels, out_sub));
      res.branches.push_back(std::move(br));
    }
  return res;
}

/// Apply a Kraus channel on the given labels to every ket of a branch.
inline Branch apply_channel(const Branch& br, const std::vector<Mat>& kraus,
                            const std::vector<std::string>& labels) {
  if (kraus.empty()) return br;
  Branch out;
  out.a = br.a;
  out.b = br.b;
  for (const auto& ket : br.kets) {
    Register sub = ket.reg.subset(labels);
    for (const auto& k : kraus) {
      PureState next = apply_op(k, ket, labels, sub);
      next = permute_subsystems(next, ket.reg.labels());
      out.kets.push_back(std::move(next));
    }
  }
  return out;
}

struct RevealResult {
  double branch_weight = 0.0;       // probability of this (a,b) branch
  double accept_probability = 0.0;  // conditional on the branch, detector folded in
  // Unnormalized projective-accept output (trace = branch_weight * projective
  // accept probability), correction applied; labels (C) or (R, C).
  DensityOperator output_unnormalized;
  // Conditional output given acceptance (projective accept + dark counts).
  std::optional<DensityOperator> output;
};

/// REVEAL one branch: unlock K with the revealed indices, unmask, check the
/// safe-key state, apply the teleportation correction on C.
inline RevealResult run_reveal(const Branch& branch, const SetupResult& setup,
                               int revealed_i1, int revealed_i2,
                               const DetectorModel& detector = DetectorModel(),
                               PartyViews* views = nullptr) {
  const Dim p = setup.params.p;
  const Masker& m = setup.params.masker;
  if (views) {
    // Alice has sent the A-shares
    views->transfer(Role::Alice, Role::Bob, m.out_a);
    std::vector<std::string> bob_labels = m.out_labels();
    bob_labels.push_back("K");
    views->require_registers(Role::Bob, bob_labels);
    views->require_card(Role::Bob, "j1");
    views->require_card(Role::Bob, "j2");
  }
  const int j1 = setup.commodity.cards.j1;
  const int j2 = setup.commodity.cards.j2;
  Unitary unlock(single("K", p.d), single("K", p.d),
                 weyl_op(p, static_cast<long>(j1) * revealed_i1,
                         static_cast<long>(j2) * revealed_i2)
                     .adjoint());
  Unitary unmask_u = m.unitary.adjoint();
  std::vector<std::string> sk_labels = m.safe_labels;
  sk_labels.push_back("K");

  RevealResult res;
  if (branch.kets.empty()) return res;
  Mat acc_out, rej_out;
  Register acc_reg;
  const Mat corr = teleport_correction(p, branch.a, branch.b);
  double w_total = 0.0, w_acc = 0.0;
  for (const auto& ket : branch.kets) {
    w_total += ket.norm2();
    PureState s = apply_unitary(unlock, ket);
    s = apply_unitary(unmask_u, s);  // shares -> (C, S...)
    PureState acc = project_out(setup.omega.state.amps, s, sk_labels);
    w_acc += acc.norm2();
    const auto keep = acc.reg.labels();  // (C) or (C, extras)
    if (acc_out.size() == 0) {
      acc_reg = acc.reg;
      acc_out = Mat::Zero(acc.reg.total_dim(), acc.reg.total_dim());
      rej_out = acc_out;
    }
    PureState acc_fixed = apply_op(corr, acc, {"C"}, single("C", p.d));
    acc_fixed = permute_subsystems(acc_fixed, keep);
    acc_out += acc_fixed.amps * acc_fixed.amps.adjoint();
    // residual (rejected) component, reduced to the output labels
    PureState acc_embedded = tensor(acc, setup.omega.state);
    acc_embedded = permute_subsystems(acc_embedded, s.reg.labels());
    PureState rej(s.reg, s.amps - acc_embedded.amps, true);
    PureState rt = permute_subsystems(rej, detail::front_order(rej.reg, keep));
    const long dk = acc.reg.total_dim();
    Eigen::Map<const RowMat> rm(rt.amps.data(), dk, rt.amps.size() / dk);
    Mat big_corr = embed(corr, acc_reg, {"C"});
    rej_out += big_corr * (rm * rm.adjoint()) * big_corr.adjoint();
  }
  res.branch_weight = w_total;
  const double p_acc = w_total > 1e-300 ? w_acc / w_total : 0.0;
  res.accept_probability = p_acc + detector.epsilon * (1.0 - p_acc);
  res.output_unnormalized = DensityOperator(acc_reg, acc_out, true);
  Mat cond = acc_out + detector.epsilon * rej_out;
  const double tr = cond.trace().real();
  if (tr > 1e-14) res.output = DensityOperator(acc_reg, cond / tr);
  return res;
}

// ---------------------------------------------------------------------------
// Honest-run driver

struct HonestRunResult {
  double accept_probability = 0.0;  // summed over branches
  double output_fidelity = 1.0;     // vs the purified secret, worst branch
};

inline HonestRunResult honest_run(const QottParams& params,
                                  const IndexCards& cards,
                                  const DensityOperator& secret,
                                  const DetectorModel& detector = DetectorModel(),
                                  PartyViews* views_out = nullptr) {
  SetupResult setup = run_setup(params, cards);
  PartyViews views = setup.views;
  CommitResult commit = run_commit_honest(setup, secret, &views);
  PureState ref = purify(secret, "R", "I");
  // the revealed state should match the purification on (R, C)
  PureState target(Register({"R", "C"}, ref.reg.dims()), ref.amps);
  HonestRunResult res;
  for (const auto& br : commit.branches) {
    RevealResult r =
        run_reveal(br, setup, cards.i1, cards.i2, detector, &views);
    res.accept_probability += r.branch_weight * r.accept_probability;
    if (r.output) {
      DensityOperator out = permute_subsystems(*r.output, {"R", "C"});
      res.output_fidelity = std::min(res.output_fidelity,
                                     fidelity(out, target));
    }
  }
  if (views_out) *views_out = views;
  return res;
}

// ---------------------------------------------------------------------------
// Bob's post-commit view (hiding)

/// Bob's reduced state after an honest COMMIT, averaged over Alice's card
/// (i1,i2) which Bob does not know; his own card (j1,j2) is fixed. Includes
/// the classical message as an orthogonal tag register T.
inline DensityOperator bob_preview(const QottParams& params, int j1, int j2,
                                   const DensityOperator& secret) {
  const int p = params.p.d;
  std::vector<std::string> bob_labels = params.masker.out_b;
  bob_labels.push_back("K");
  Mat total;
  for (int i1 = 0; i1 < p; ++i1)
    for (int i2 = 0; i2 < p; ++i2) {
      SetupResult setup = run_setup(params, IndexCards{i1, i2, j1, j2});
      CommitResult commit = run_commit_honest(setup, secret);
      for (std::size_t t = 0; t < commit.branches.size(); ++t) {
        Mat block = Mat::Zero(0, 0);
        for (const auto& ket : commit.branches[t].kets) {
          DensityOperator mgl = marginal(ket, bob_labels);
          if (block.size() == 0)
            block = Mat::Zero(mgl.matrix.rows(), mgl.matrix.cols());
          block += mgl.matrix;
        }
        const long db = block.rows();
        if (total.size() == 0)
          total = Mat::Zero(db * static_cast<long>(commit.branches.size()),
                            db * static_cast<long>(commit.branches.size()));
        total.block(t * db, t * db, db, db) += block / (p * p);
      }
    }
  const int d2 = p * p;
  Register reg;
  {
    SetupResult setup = run_setup(params, IndexCards{0, 0, j1, j2});
    Register bk = setup.commodity.state.reg.subset(bob_labels);
    reg = tensor(single("T", d2), bk);
  }
  // reorder blocks: currently indexed (T, BK) with T slow -- already matches
  return DensityOperator(reg, total);
}

/// Closed form for the honest preview: Tr_A[M(rho (x) omega_S)M^dag]
/// (x) I_K/p (x) uniform message tag.
inline DensityOperator bob_preview_closed_form(const QottParams& params,
                                               const DensityOperator& secret) {
  const int p = params.p.d;
  DensityOperator masked = mask(params.masker, secret);
  DensityOperator b_part = partial_trace(masked, params.masker.out_b);
  DensityOperator bk =
      tensor(b_part, DensityOperator(single("K", p),
                                     Mat::Identity(p, p) / p));
  DensityOperator tags = maximally_mixed(single("T", p * p));
  return tensor(tags, bk);
}

// ---------------------------------------------------------------------------
// Binding: the Lambda-state analysis and simulation cross-checks

struct CheatAnalysis {
  double average_acceptance = 0.0;  // over (j1,j2) in J^2
  double max_acceptance = 0.0;
  double lambda_trace = 0.0;
  double lambda_min_eig = 0.0;
};

/// Exact acceptance of a wrong-index reveal via the state Lambda: build the
/// unlocked commodity, apply Alice's channel, unmask, reduce to (S,K), and
/// evaluate the diagonal overlaps with the shifted safe-key basis.
inline CheatAnalysis cheat_analysis(const QottParams& params,
                                    const GenericStrategy& strategy,
                                    int delta1, int delta2) {
  const Dim p = params.p;
  const Masker& m = params.masker;
  SafeKeyState omega = purify_safe(m);
  PureState tau = tensor(max_entangled(p, "E", "C"), omega.state);
  tau = apply_unitary(m.unitary, tau);  // (out..., E order) unlocked commodity

  std::vector<std::string> in_labels = {"E"};
  in_labels.insert(in_labels.end(), m.out_a.begin(), m.out_a.end());
  Register out_sub = tau.reg.subset(m.out_a);

  std::vector<PureState> kets;
  for (const auto& branch : strategy.instrument)
    for (const auto& k : branch)
      kets.push_back(apply_op(k, tau, in_labels, out_sub));
  if (!strategy.xi.empty()) {
    std::vector<PureState> next;
    for (const auto& ket : kets) {
      Register sub = ket.reg.subset(m.out_a);
      for (const auto& k : strategy.xi)
        next.push_back(apply_op(k, ket, m.out_a, sub));
    }
    kets = std::move(next);
  }

  std::vector<std::string> sk_labels = m.safe_labels;
  sk_labels.push_back("K");
  Unitary unmask_u = m.unitary.adjoint();
  Mat lambda;
  for (const auto& ket : kets) {
    PureState s = apply_unitary(unmask_u, ket);
    DensityOperator red = marginal(s, sk_labels);
    if (lambda.size() == 0)
      lambda = Mat::Zero(red.matrix.rows(), red.matrix.cols());
    lambda += red.matrix;
  }

  CheatAnalysis res;
  res.lambda_trace = lambda.trace().real();
  {
    Eigen::SelfAdjointEigenSolver<Mat> es(lambda, Eigen::EigenvaluesOnly);
    res.lambda_min_eig = es.eigenvalues().minCoeff();
  }
  double sum = 0.0;
  for (int j1 : params.j_set)
    for (int j2 : params.j_set) {
      Unitary shift(single("K", p.d), single("K", p.d),
                    weyl_op(p, static_cast<long>(j1) * delta1,
                            static_cast<long>(j2) * delta2));
      PureState phi = apply_unitary(shift, omega.state);
      double val = (phi.amps.adjoint() * lambda * phi.amps)(0).real();
      sum += val;
      res.max_acceptance = std::max(res.max_acceptance, val);
    }
  res.average_acceptance =
      sum / (static_cast<double>(params.j_set.size()) * params.j_set.size());
  return res;
}

/// Exact wrong-index acceptance via full simulation, for one Bob card.
/// Alice reports k = i + delta; the value only depends on (delta, j).
inline double simulated_wrong_index_acceptance(
    const QottParams& params, const GenericStrategy& strategy, int delta1,
    int delta2, int j1, int j2, const DetectorModel& detector = DetectorModel()) {
  const int p = params.p.d;
  IndexCards cards{0, 0, j1, j2};
  SetupResult setup = run_setup(params, cards);
  CommitResult commit = run_commit_generic(setup, strategy);
  double acc = 0.0;
  for (const auto& br : commit.branches) {
    Branch after = apply_channel(br, strategy.xi, params.masker.out_a);
    RevealResult r = run_reveal(after, setup, (cards.i1 + delta1) % p,
                                (cards.i2 + delta2) % p, detector);
    acc += r.branch_weight * r.accept_probability;
  }
  return acc;
}

/// Card-averaged exact wrong-index acceptance (uniform over J^2).
inline double exact_wrong_index_acceptance(
    const QottParams& params, const GenericStrategy& strategy, int delta1,
    int delta2, const DetectorModel& detector = DetectorModel()) {
  double sum = 0.0;
  for (int j1 : params.j_set)
    for (int j2 : params.j_set)
      sum += simulated_wrong_index_acceptance(params, strategy, delta1, delta2,
                                              j1, j2, detector);
  return sum /
         (static_cast<double>(params.j_set.size()) * params.j_set.size());
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long trials = 0;
};

/// Monte Carlo wrong-index acceptance: sample Bob cards, accept by Bernoulli
/// with the per-card acceptance. Per-card values are cached; sampling is
/// driven by counter-derived streams.
inline MonteCarloEstimate monte_carlo_wrong_index(
    const QottParams& params, const GenericStrategy& strategy, int delta1,
    int delta2, long trials, std::uint64_t seed,
    const DetectorModel& detector = DetectorModel()) {
  std::map<std::pair<int, int>, double> cache;
  for (int j1 : params.j_set)
    for (int j2 : params.j_set)
      cache[{j1, j2}] = simulated_wrong_index_acceptance(
          params, strategy, delta1, delta2, j1, j2, detector);
  auto rng = stream_rng(seed, 1);
  std::uniform_int_distribution<std::size_t> js(0, params.j_set.size() - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long hits = 0;
  for (long t = 0; t < trials; ++t) {
    int j1 = params.j_set[js(rng)];
    int j2 = params.j_set[js(rng)];
    if (u(rng) < cache[{j1, j2}]) ++hits;
  }
  MonteCarloEstimate e;
  e.trials = trials;
  e.mean = static_cast<double>(hits) / trials;
  e.std_error = std::sqrt(std::max(e.mean * (1.0 - e.mean), 1e-12) / trials);
  return e;
}

// ---------------------------------------------------------------------------
// Post-commit tampering

struct TamperResult {
  double accept_probability = 0.0;
  double predicted_acceptance = 0.0;  // <Psi|(Xi (x) I)(|Psi><Psi|)|Psi>
  std::optional<DensityOperator> output;  // conditional, on (R, C)
};

/// Honest commit, then a channel Xi on the A-shares before an honest REVEAL
/// with the correct indices. Acceptance drops; the accepted output cannot
/// move away from the committed state.
inline TamperResult post_commit_tamper(const QottParams& params,
                                       const IndexCards& cards,
                                       const DensityOperator& secret,
                                       const std::vector<Mat>& xi) {
  SetupResult setup = run_setup(params, cards);
  CommitResult commit = run_commit_honest(setup, secret);
  TamperResult res;
  Mat cond;
  double w_acc_total = 0.0;
  Register out_reg;
  for (const auto& br : commit.branches) {
    Branch after = apply_channel(br, xi, params.masker.out_a);
    RevealResult r = run_reveal(after, setup, cards.i1, cards.i2);
    res.accept_probability += r.branch_weight * r.accept_probability;
    if (r.output_unnormalized.matrix.size() > 0) {
      DensityOperator o = permute_subsystems(r.output_unnormalized, {"R", "C"});
      if (cond.size() == 0) {
        cond = Mat::Zero(o.matrix.rows(), o.matrix.cols());
        out_reg = o.reg;
      }
      cond += o.matrix;
      w_acc_total += o.matrix.trace().real();
    }
  }
  if (w_acc_total > 1e-14)
    res.output = DensityOperator(out_reg, cond / w_acc_total);
  // prediction from the dual-masker partner state
  DualMasker dual = dual_masker(params.masker);
  double pred = 0.0;
  const auto& psi = dual.partner.amps;
  std::vector<std::string> a_labels = params.masker.out_a;
  for (const auto& k : (xi.empty() ? channel_identity(
                                         dual.partner.reg.dim_of(a_labels))
                                   : xi)) {
    PureState moved = apply_op(k, dual.partner, a_labels,
                               dual.partner.reg.subset(a_labels));
    moved = permute_subsystems(moved, dual.partner.reg.labels());
    pred += std::norm(psi.dot(moved.amps));
  }
  res.predicted_acceptance = pred;
  return res;
}

// ---------------------------------------------------------------------------
// Delayed-teleportation ideal functionality

/// Branch-wise unnormalized C-outputs of plain teleportation over |Theta>_EC
/// with the dual partner |Psi>_{A,S'} as Alice's ancilla, the strategy's
/// subchannels applied, the ancilla post-selected on |Psi>, and the
/// classical message delayed.
inline std::vector<DensityOperator> delayed_teleport_oracle(
    const QottParams& params, const GenericStrategy& strategy) {
  const Dim p = params.p;
  const Masker& m = params.masker;
  DualMasker dual = dual_masker(m);
  PureState init = tensor(max_entangled(p, "E", "C"), dual.partner);
  std::vector<std::string> in_labels = {"E"};
  in_labels.insert(in_labels.end(), m.out_a.begin(), m.out_a.end());
  Register out_sub = init.reg.subset(m.out_a);
  std::vector<std::string> anc_labels = m.out_a;
  anc_labels.push_back("S'");
  std::vector<DensityOperator> outputs;
  for (int a = 0; a < p.d; ++a)
    for (int b = 0; b < p.d; ++b) {
      Mat corr = teleport_correction(p, a, b);
      Mat rho = Mat::Zero(p.d, p.d);
      for (const auto& k :
           strategy.instrument[a * static_cast<long>(p.d) + b]) {
        PureState moved = apply_op(k, init, in_labels, out_sub);
        std::vector<PureState> kets = {std::move(moved)};
        if (!strategy.xi.empty()) {
          std::vector<PureState> next;
          for (const auto& ket : kets) {
            Register sub = ket.reg.subset(m.out_a);
            for (const auto& x : strategy.xi)
              next.push_back(apply_op(x, ket, m.out_a, sub));
          }
          kets = std::move(next);
        }
        for (const auto& ket : kets) {
          PureState c = project_out(dual.partner.amps,
                                    permute_subsystems(ket, ket.reg.labels()),
                                    anc_labels);
          Vec fixed = corr * c.amps;
          rho += fixed * fixed.adjoint();
        }
      }
      outputs.push_back(DensityOperator(single("C", p.d), rho, true));
    }
  return outputs;
}

/// The run_reveal branch outputs (correct indices) for the same strategy,
/// for comparison against the oracle.
inline std::vector<DensityOperator> reveal_branch_outputs(
    const QottParams& params, const IndexCards& cards,
    const GenericStrategy& strategy) {
  SetupResult setup = run_setup(params, cards);
  CommitResult commit = run_commit_generic(setup, strategy);
  std::vector<DensityOperator> outputs;
  for (const auto& br : commit.branches) {
    Branch after = apply_channel(br, strategy.xi, params.masker.out_a);
    RevealResult r = run_reveal(after, setup, cards.i1, cards.i2);
    outputs.push_back(r.output_unnormalized);
  }
  return outputs;
}

// ---------------------------------------------------------------------------
// Repetition mode

/// n independent instances, accept only if all accept; Monte Carlo estimate
/// of a wrong-index strategy's overall success.
inline MonteCarloEstimate repetition_mode(
    int n, const QottParams& params, const GenericStrategy& strategy,
    int delta1, int delta2, const DetectorModel& detector, long trials,
    std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("repetition_mode: n >= 1");
  std::map<std::pair<int, int>, double> cache;
  for (int j1 : params.j_set)
    for (int j2 : params.j_set)
      cache[{j1, j2}] = simulated_wrong_index_acceptance(
          params, strategy, delta1, delta2, j1, j2, detector);
  auto rng = stream_rng(seed, 2);
  std::uniform_int_distribution<std::size_t> js(0, params.j_set.size() - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long hits = 0;
  for (long t = 0; t < trials; ++t) {
    bool all = true;
    for (int inst = 0; inst < n && all; ++inst) {
      int j1 = params.j_set[js(rng)];
      int j2 = params.j_set[js(rng)];
      all = u(rng) < cache[{j1, j2}];
    }
    if (all) ++hits;
  }
  MonteCarloEstimate e;
  e.trials = trials;
  e.mean = static_cast<double>(hits) / trials;
  e.std_error = std::sqrt(std::max(e.mean * (1.0 - e.mean), 1e-12) / trials);
  return e;
}

// ---------------------------------------------------------------------------
// Superdense-coding bit-commitment mode

struct SuperdenseResult {
  double accept_probability = 0.0;
  // decode[a*p+b]: probability Bob's final Bell measurement reports (a,b)
  std::vector<double> decode_distribution;
  int decoded_a = -1, decoded_b = -1;
};

/// Commit to two dits (a0,b0): Alice encodes them on half of |Theta>_{I,G}
/// by superdense coding, sends G to Bob in clear, and commits the I half.
/// On reveal Bob Bell-measures (C,G) and decodes.
inline SuperdenseResult superdense_commit(int a0, int b0,
                                          const QottParams& params,
                                          const IndexCards& cards) {
  const Dim p = params.p;
  if (a0 < 0 || a0 >= p.d || b0 < 0 || b0 >= p.d)
    throw std::invalid_argument("superdense_commit: dits out of range");
  SetupResult setup = run_setup(params, cards);
  PureState pair = max_entangled(p, "I", "G");
  Unitary enc(single("I", p.d), single("I", p.d), weyl_op(p, a0, b0));
  pair = apply_unitary(enc, pair);
  PureState global = tensor(pair, setup.commodity.state);
  auto bell_ie = bell_basis(p, "I", "E");
  auto bell_cg = bell_basis(p, "C", "G");
  SuperdenseResult res;
  res.decode_distribution.assign(static_cast<std::size_t>(p.d) * p.d, 0.0);
  for (int a = 0; a < p.d; ++a)
    for (int b = 0; b < p.d; ++b) {
      Branch br;
      br.a = a;
      br.b = b;
      br.kets.push_back(
          project_out(bell_ie[a * p.d + b].amps, global, {"I", "E"}));
      RevealResult r = run_reveal(br, setup, cards.i1, cards.i2);
      res.accept_probability += r.branch_weight * r.accept_probability;
      if (r.output_unnormalized.matrix.size() == 0) continue;
      DensityOperator out =
          permute_subsystems(r.output_unnormalized, {"C", "G"});
      for (int da = 0; da < p.d; ++da)
        for (int db = 0; db < p.d; ++db) {
          const Vec& bv = bell_cg[da * p.d + db].amps;
          res.decode_distribution[da * p.d + db] +=
              (bv.adjoint() * out.matrix * bv)(0).real();
        }
    }
  auto it = std::max_element(res.decode_distribution.begin(),
                             res.decode_distribution.end());
  long idx = it - res.decode_distribution.begin();
  res.decoded_a = static_cast<int>(idx / p.d);
  res.decoded_b = static_cast<int>(idx % p.d);
  return res;
}

/// Bob's pre-reveal view in superdense mode (his commodity systems, the G
/// half received in clear and the commit message), averaged over Alice's
/// card. Must be independent of the committed dits.
inline DensityOperator superdense_bob_preview(const QottParams& params,
                                              int j1, int j2, int a0, int b0) {
  const int p = params.p.d;
  std::vector<std::string> bob_labels = params.masker.out_b;
  bob_labels.push_back("K");
  bob_labels.push_back("G");
  Mat total;
  Register block_reg;
  auto bell_ie = bell_basis(params.p, "I", "E");
  for (int i1 = 0; i1 < p; ++i1)
    for (int i2 = 0; i2 < p; ++i2) {
      SetupResult setup = run_setup(params, IndexCards{i1, i2, j1, j2});
      PureState pair = max_entangled(params.p, "I", "G");
      Unitary enc(single("I", p), single("I", p), weyl_op(params.p, a0, b0));
      pair = apply_unitary(enc, pair);
      PureState global = tensor(pair, setup.commodity.state);
      for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
          PureState ket =
              project_out(bell_ie[a * p + b].amps, global, {"I", "E"});
          DensityOperator mgl = marginal(ket, bob_labels);
          const long db = mgl.matrix.rows();
          if (total.size() == 0) {
            block_reg = mgl.reg;
            total = Mat::Zero(db * static_cast<long>(p) * p,
                              db * static_cast<long>(p) * p);
          }
          total.block(static_cast<long>(a * p + b) * db,
                      static_cast<long>(a * p + b) * db, db, db) +=
              mgl.matrix / (p * p);
        }
    }
  return DensityOperator(tensor(single("T", p * p), block_reg), total);
}

}  // namespace qott
