// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each block is self-contained and uses fixed seeds.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "qott/baseline.hpp"
#include "qott/protocol.hpp"

using namespace qott;

namespace {

int failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

void report(int idx, const std::string& name, bool pass, double secs) {
  std::printf("[%s] %2d %-34s (%.1fs)\n", pass ? "PASS" : "FAIL", idx,
              name.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++failures;
}

bool masking_universality() {
  for (int d : {3, 5}) {
    for (const Masker& m : {masker_four_qudit(Dim(d)), masker_qotp(Dim(d)),
                            masker_minimal(Dim(d)), masker_minimal_dual(Dim(d))}) {
      MaskingReport rep = verify_masking(m);
      if (!rep.pass || std::max(rep.max_dev_a, rep.max_dev_b) > 1e-9)
        return false;
    }
  }
  for (int d : {2, 4})
    if (verify_masking(masker_minimal(Dim(d))).pass) return false;
  return true;
}

bool entropy_achievability() {
  for (int d : {2, 3, 5, 7}) {
    EntropyAudit fq = entropy_audit(masker_four_qudit(Dim(d)));
    EntropyAudit otp = entropy_audit(masker_qotp(Dim(d)));
    if (!fq.equals_log2_d || !fq.meets_entropy_lower_bound) return false;
    if (!otp.equals_2log2_d || !otp.meets_entropy_lower_bound) return false;
    if (d % 2 == 1) {
      EntropyAudit mn = entropy_audit(masker_minimal(Dim(d)));
      if (!mn.equals_log2_d || !mn.meets_entropy_lower_bound) return false;
    }
  }
  // single-share entropies of the purified schemes
  for (const Masker& m : {masker_minimal(Dim(3)), masker_four_qudit(Dim(2))}) {
    Qss23Report rep = qss23_check(m);
    if (rep.min_single_share_entropy_bits <
        std::log2(static_cast<double>(m.d.d)) - 1e-9)
      return false;
  }
  return true;
}

bool duality_factorization() {
  for (int d : {2, 3, 5}) {
    std::vector<Masker> ms = {masker_four_qudit(Dim(d)), masker_qotp(Dim(d))};
    if (d % 2 == 1) {
      ms.push_back(masker_minimal(Dim(d)));
      ms.push_back(masker_minimal_dual(Dim(d)));
    }
    for (const Masker& m : ms)
      if (dual_masker(m).residual > 1e-8) return false;
  }
  for (const Masker& m : {masker_minimal(Dim(3)), masker_four_qudit(Dim(2))}) {
    Qss23Report rep = qss23_check(m);
    if (rep.min_recovery_fidelity_ab < 1.0 - 1e-8 ||
        rep.min_recovery_fidelity_bk < 1.0 - 1e-8 ||
        rep.min_recovery_fidelity_ak < 1.0 - 1e-8)
      return false;
  }
  return true;
}

bool honest_correctness() {
  auto rng = stream_rng(201, 0);
  for (int p : {3, 5}) {
    QottParams params = default_params(p, {1, 2});
    for (int t = 0; t < 10; ++t) {
      IndexCards cards = random_cards(params, 300 + t);
      DensityOperator secret =
          t % 4 == 3 ? random_density(rng, single("I", p))
                     : to_density(random_pure_state(rng, single("I", p)));
      HonestRunResult r = honest_run(params, cards, secret);
      if (std::abs(r.accept_probability - 1.0) > 1e-10) return false;
      if (r.output_fidelity < 1.0 - 1e-9) return false;
    }
  }
  return true;
}

bool perfect_hiding() {
  auto rng = stream_rng(202, 0);
  for (int p : {3, 5}) {
    QottParams params = default_params(p, {1, 2});
    DensityOperator s0 = to_density(basis_state(single("I", p), 0));
    DensityOperator s1 = to_density(random_pure_state(rng, single("I", p)));
    DensityOperator v0 = bob_preview(params, 1, 2, s0);
    DensityOperator v1 = bob_preview(params, 1, 2, s1);
    if (trace_distance(v0, v1) > 1e-10) return false;
    if (trace_distance(v0, bob_preview_closed_form(params, s0)) > 1e-10)
      return false;
  }
  return true;
}

bool binding_bound() {
  auto rng = stream_rng(203, 0);
  for (const auto& j_set : std::vector<std::vector<int>>{{1, 2}, {1, 2, 3, 4}}) {
    QottParams params = default_params(5, j_set);
    const double bound = 1.0 / j_set.size() + 1e-9;
    std::vector<GenericStrategy> advs;
    advs.push_back(honest_instrument(
        random_pure_state(rng, single("I", 5)), Dim(5), 5));
    advs.push_back(shifted_report_instrument(
        random_pure_state(rng, single("I", 5)), Dim(5), 5, 2, 1));
    advs.push_back(forge_strategy(Dim(5), 5, rng));
    advs.push_back(random_instrument(Dim(5), 5, rng));
    for (const auto& adv : advs) {
      double exact = exact_wrong_index_acceptance(params, adv, 1, 2);
      if (exact > bound) return false;
      MonteCarloEstimate mc =
          monte_carlo_wrong_index(params, adv, 1, 2, 10000, 777);
      if (std::abs(mc.mean - exact) > 3.0 * mc.std_error + 1e-9) return false;
    }
  }
  return true;
}

bool oracle_equivalence() {
  QottParams params = default_params(3, {1, 2});
  IndexCards cards{2, 1, 1, 2};
  auto rng = stream_rng(204, 0);
  for (int t = 0; t < 10; ++t) {
    GenericStrategy adv = t % 2 == 0 ? random_instrument(Dim(3), 3, rng, 2)
                                     : forge_strategy(Dim(3), 3, rng);
    if (t == 5) adv.xi = channel_random(3, rng);
    auto oracle = delayed_teleport_oracle(params, adv);
    auto direct = reveal_branch_outputs(params, cards, adv);
    for (std::size_t k = 0; k < oracle.size(); ++k) {
      Mat diff = oracle[k].matrix - direct[k].matrix;
      // unnormalized branch operators: trace distance on the difference
      Eigen::SelfAdjointEigenSolver<Mat> es(diff, Eigen::EigenvaluesOnly);
      if (0.5 * es.eigenvalues().cwiseAbs().sum() > 1e-9) return false;
    }
  }
  return true;
}

bool noise_and_repetition() {
  QottParams params = default_params(3, {1, 2});
  const double eps = 0.05;
  DetectorModel det(eps);
  auto rng = stream_rng(205, 0);
  GenericStrategy adv = shifted_report_instrument(
      random_pure_state(rng, single("I", 3)), Dim(3), 3, 1, 1);
  double exact = exact_wrong_index_acceptance(params, adv, 1, 1, det);
  if (exact > 0.5 + eps + 1e-9) return false;
  for (int n : {2, 3}) {
    MonteCarloEstimate mc =
        repetition_mode(n, params, adv, 1, 1, det, 20000, 888);
    if (mc.mean > std::pow(0.5 + eps, n) + 3.0 * mc.std_error) return false;
  }
  return true;
}

bool twirl_and_src() {
  for (int p : {3, 5, 7}) {
    QottParams params = default_params(p, {1, 2});
    if (twirl_check(params) > 1e-10) return false;
  }
  for (const auto& [p, js] : std::vector<std::pair<int, std::size_t>>{
           {3, 2}, {5, 4}}) {
    std::vector<int> j_set;
    for (std::size_t k = 0; k < js; ++k) j_set.push_back(static_cast<int>(k) + 1);
    QottParams params = default_params(p, j_set);
    if (std::abs(commodity_entropy(params) -
                 commodity_entropy_closed_form(p, js)) > 1e-9)
      return false;
    SrcReport r = src_report(p, js);
    const double lp = std::log2(static_cast<double>(p));
    const double lj = std::log2(static_cast<double>(js));
    if (std::abs(r.qotp_via_rivest_bits - 6.0 * lp) > 1e-12) return false;
    if (std::abs(r.superdense_bits - (lp + 2.0 * lj)) > 1e-12) return false;
    if (std::abs(r.qott_bits - (2.0 * lp + 2.0 * lj)) > 1e-12) return false;
  }
  return true;
}

bool superdense_mode() {
  QottParams params = default_params(3, {1, 2});
  IndexCards cards{0, 2, 2, 1};
  for (int a0 = 0; a0 < 3; ++a0)
    for (int b0 = 0; b0 < 3; ++b0) {
      SuperdenseResult r = superdense_commit(a0, b0, params, cards);
      if (std::abs(r.accept_probability - 1.0) > 1e-9) return false;
      if (r.decoded_a != a0 || r.decoded_b != b0) return false;
    }
  DensityOperator ref = superdense_bob_preview(params, 1, 2, 0, 0);
  for (int a0 = 0; a0 < 3; ++a0)
    for (int b0 = 0; b0 < 3; ++b0)
      if (trace_distance(ref, superdense_bob_preview(params, 1, 2, a0, b0)) >
          1e-10)
        return false;
  return true;
}

bool classical_baseline() {
  for (int p : {3, 5, 7}) {
    RivestAudit audit = rivest_audit(p);
    if (audit.hiding_mutual_info > 1e-12) return false;
    // with Bob's abscissa restricted to nonzero values (required for zero
    // leakage) the optimal equivocation passes with probability 1/(p-1)
    if (std::abs(audit.best_cheat_acceptance - 1.0 / (p - 1)) > 1e-12)
      return false;
  }
  return true;
}

}  // namespace

int main() {
  struct Item {
    std::string name;
    bool (*fn)();
  };
  const std::vector<Item> items = {
      {"masking universality", masking_universality},
      {"entropy achievability", entropy_achievability},
      {"duality / no-hiding", duality_factorization},
      {"honest protocol correctness", honest_correctness},
      {"perfect hiding", perfect_hiding},
      {"binding bound", binding_bound},
      {"ideal-functionality equivalence", oracle_equivalence},
      {"noise and repetition", noise_and_repetition},
      {"twirl and randomness cost", twirl_and_src},
      {"superdense mode", superdense_mode},
      {"classical baseline", classical_baseline},
  };
  int idx = 0;
  for (const auto& item : items) {
    Timer t;
    bool pass = false;
    try {
      pass = item.fn();
    } catch (const std::exception& e) {
      std::printf("  exception: %s\n", e.what());
    }
    report(++idx, item.name, pass, t.seconds());
  }
  return failures == 0 ? 0 : 1;
}
