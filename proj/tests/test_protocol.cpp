#include <catch_amalgamated.hpp>

#include "qott/protocol.hpp"

using namespace qott;

namespace {

PureState random_secret(std::mt19937_64& rng, int p) {
  return random_pure_state(rng, single("I", p));
}

}  // namespace

TEST_CASE("teleportation correction is consistent beyond d=2") {
  for (int d : {3, 5}) {
    auto rng = stream_rng(101, d);
    PureState secret = random_pure_state(rng, single("I", d));
    PureState global = tensor(secret, max_entangled(Dim(d), "E", "C"));
    auto bell = bell_basis(Dim(d), "I", "E");
    double total = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        PureState br = project_out(bell[a * d + b].amps, global, {"I", "E"});
        Vec fixed = teleport_correction(Dim(d), a, b) * br.amps;
        total += fixed.squaredNorm();
        double overlap = std::norm(secret.amps.dot(fixed)) /
                         fixed.squaredNorm();
        CHECK(overlap > 1.0 - 1e-10);
      }
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("honest protocol accepts and returns the committed state") {
  auto rng = stream_rng(102, 0);
  for (int p : {3, 5}) {
    QottParams params = default_params(p, {1, 2});
    for (int t = 0; t < 8; ++t) {
      IndexCards cards = random_cards(params, 1000 + t);
      DensityOperator secret =
          t % 3 == 2 ? random_density(rng, single("I", p))
                     : to_density(random_secret(rng, p));
      PartyViews views;
      HonestRunResult r = honest_run(params, cards, secret, DetectorModel(),
                                     &views);
      CHECK(std::abs(r.accept_probability - 1.0) < 1e-10);
      CHECK(r.output_fidelity > 1.0 - 1e-9);
      CHECK(views.violations.empty());
    }
  }
}

TEST_CASE("Bob learns nothing before reveal") {
  QottParams params = default_params(3, {1, 2});
  auto rng = stream_rng(103, 0);
  DensityOperator s0 = to_density(basis_state(single("I", 3), 0));
  DensityOperator s1 = to_density(random_secret(rng, 3));
  DensityOperator s2 = random_density(rng, single("I", 3));
  for (const auto& [j1, j2] : std::vector<std::pair<int, int>>{{1, 2}, {2, 2}}) {
    DensityOperator v0 = bob_preview(params, j1, j2, s0);
    DensityOperator v1 = bob_preview(params, j1, j2, s1);
    DensityOperator v2 = bob_preview(params, j1, j2, s2);
    CHECK(trace_distance(v0, v1) <= 1e-10);
    CHECK(trace_distance(v0, v2) <= 1e-10);
    CHECK(trace_distance(v0, bob_preview_closed_form(params, s0)) <= 1e-10);
  }
}

TEST_CASE("wrong-index reveal after an honest commit never passes") {
  QottParams params = default_params(3, {1, 2});
  auto rng = stream_rng(104, 0);
  GenericStrategy honest = honest_instrument(random_secret(rng, 3), Dim(3), 3);
  for (const auto& [d1, d2] :
       std::vector<std::pair<int, int>>{{1, 0}, {0, 1}, {2, 2}})
    CHECK(exact_wrong_index_acceptance(params, honest, d1, d2) <= 1e-12);
}

TEST_CASE("binding bound holds for an adversary family at p=5") {
  auto rng = stream_rng(105, 0);
  for (const auto& j_set :
       std::vector<std::vector<int>>{{1, 2}, {1, 2, 3, 4}}) {
    QottParams params = default_params(5, j_set);
    const double bound = 1.0 / j_set.size() + 1e-9;
    std::vector<GenericStrategy> adversaries;
    adversaries.push_back(
        shifted_report_instrument(random_secret(rng, 5), Dim(5), 5, 1, 0));
    adversaries.push_back(forge_strategy(Dim(5), 5, rng));
    adversaries.push_back(random_instrument(Dim(5), 5, rng));
    bool saw_nonzero = false;
    for (const auto& adv : adversaries) {
      CheatAnalysis ca = cheat_analysis(params, adv, 1, 2);
      CHECK(ca.average_acceptance <= bound);
      CHECK(ca.lambda_min_eig > -1e-10);
      CHECK(std::abs(ca.lambda_trace - 1.0) < 1e-9);
      // the Lambda-state shortcut agrees with the full simulation
      double sim = exact_wrong_index_acceptance(params, adv, 1, 2);
      CHECK(std::abs(ca.average_acceptance - sim) < 1e-9);
      saw_nonzero = saw_nonzero || sim > 1e-6;
    }
    CHECK(saw_nonzero);
  }
}

TEST_CASE("Monte Carlo estimate agrees with the exact acceptance") {
  QottParams params = default_params(3, {1, 2});
  auto rng = stream_rng(106, 0);
  GenericStrategy adv = forge_strategy(Dim(3), 3, rng);
  double exact = exact_wrong_index_acceptance(params, adv, 1, 1);
  MonteCarloEstimate mc =
      monte_carlo_wrong_index(params, adv, 1, 1, 40000, 999);
  CHECK(std::abs(mc.mean - exact) <= 3.0 * mc.std_error + 1e-9);
}

TEST_CASE("dark counts fold in linearly") {
  QottParams params = default_params(3, {1, 2});
  const double eps = 0.05;
  DetectorModel det(eps);
  // honest runs still accept with certainty
  auto rng = stream_rng(107, 0);
  HonestRunResult hr = honest_run(params, IndexCards{1, 2, 1, 2},
                                  to_density(random_secret(rng, 3)), det);
  CHECK(std::abs(hr.accept_probability - 1.0) < 1e-10);
  // an honest commit revealed with wrong indices passes only via dark counts
  GenericStrategy honest = honest_instrument(random_secret(rng, 3), Dim(3), 3);
  CHECK(std::abs(exact_wrong_index_acceptance(params, honest, 1, 0, det) -
                 eps) < 1e-10);
  // generic strategies: accept = p0 + eps (1 - p0)
  GenericStrategy adv = forge_strategy(Dim(3), 3, rng);
  double p0 = exact_wrong_index_acceptance(params, adv, 1, 1);
  double pe = exact_wrong_index_acceptance(params, adv, 1, 1, det);
  CHECK(std::abs(pe - (p0 + eps * (1.0 - p0))) < 1e-10);
  CHECK_THROWS(DetectorModel(1.0));
  CHECK_THROWS(DetectorModel(-0.1));
}

TEST_CASE("repetition suppresses cheating exponentially") {
  QottParams params = default_params(3, {1, 2});
  auto rng = stream_rng(108, 0);
  GenericStrategy adv =
      shifted_report_instrument(random_secret(rng, 3), Dim(3), 3, 0, 1);
  const double eps = 0.05;
  DetectorModel det(eps);
  const double single_bound = 0.5 + eps * 0.5;
  for (int n : {2, 3}) {
    MonteCarloEstimate mc =
        repetition_mode(n, params, adv, 1, 1, det, 40000, 555);
    CHECK(mc.mean <= std::pow(single_bound, n) + 3.0 * mc.std_error + 1e-9);
  }
  CHECK_THROWS(repetition_mode(0, params, adv, 1, 1, det, 10, 1));
}

TEST_CASE("reveal equals the delayed-teleportation functionality") {
  QottParams params = default_params(3, {1, 2});
  IndexCards cards{1, 2, 1, 2};
  auto rng = stream_rng(109, 0);
  for (int t = 0; t < 10; ++t) {
    GenericStrategy adv = t % 2 == 0 ? random_instrument(Dim(3), 3, rng, 2)
                                     : forge_strategy(Dim(3), 3, rng);
    if (t == 4) adv.xi = channel_random(3, rng);
    auto oracle = delayed_teleport_oracle(params, adv);
    auto direct = reveal_branch_outputs(params, cards, adv);
    REQUIRE(oracle.size() == direct.size());
    for (std::size_t k = 0; k < oracle.size(); ++k)
      CHECK((oracle[k].matrix - direct[k].matrix).cwiseAbs().maxCoeff() <
            1e-10);
  }
}

TEST_CASE("post-commit tampering cannot rebind the secret") {
  QottParams params = default_params(3, {1, 2});
  auto rng = stream_rng(110, 0);
  DensityOperator secret = to_density(random_secret(rng, 3));
  PureState target(Register({"R", "C"}, {1, 3}),
                   purify(secret, "R", "I").amps);
  IndexCards cards{2, 1, 2, 1};
  SECTION("identity channel changes nothing") {
    TamperResult r = post_commit_tamper(params, cards, secret,
                                        channel_identity(3));
    CHECK(std::abs(r.accept_probability - 1.0) < 1e-9);
    CHECK(std::abs(r.predicted_acceptance - 1.0) < 1e-9);
  }
  for (const auto& [name, xi] :
       std::vector<std::pair<std::string, std::vector<Mat>>>{
           {"replace", channel_replace_with_basis0(3)},
           {"depolarizing", channel_depolarizing(Dim(3), 0.3)},
           {"random", channel_random(3, rng)}}) {
    INFO(name);
    TamperResult r = post_commit_tamper(params, cards, secret, xi);
    // acceptance drop is predicted by the partner-state overlap
    CHECK(std::abs(r.accept_probability - r.predicted_acceptance) < 1e-9);
    CHECK(r.accept_probability < 1.0 - 1e-3);
    // but whatever survives is still the committed state
    REQUIRE(r.output.has_value());
    CHECK(fidelity(*r.output, target) > 1.0 - 1e-9);
  }
}

TEST_CASE("superdense mode commits two dits at once") {
  QottParams params = default_params(3, {1, 2});
  IndexCards cards{1, 1, 2, 1};
  for (int a0 = 0; a0 < 3; ++a0)
    for (int b0 = 0; b0 < 3; ++b0) {
      SuperdenseResult r = superdense_commit(a0, b0, params, cards);
      CHECK(std::abs(r.accept_probability - 1.0) < 1e-9);
      CHECK(r.decoded_a == a0);
      CHECK(r.decoded_b == b0);
      CHECK(std::abs(r.decode_distribution[a0 * 3 + b0] - 1.0) < 1e-9);
    }
  CHECK_THROWS(superdense_commit(3, 0, params, cards));
  SECTION("Bob's pre-reveal view is independent of the dits") {
    DensityOperator ref = superdense_bob_preview(params, 1, 2, 0, 0);
    for (const auto& [a0, b0] :
         std::vector<std::pair<int, int>>{{1, 0}, {2, 2}, {0, 1}})
      CHECK(trace_distance(ref, superdense_bob_preview(params, 1, 2, a0, b0)) <=
            1e-10);
  }
}

TEST_CASE("view discipline flags out-of-view access") {
  QottParams params = default_params(3, {1, 2});
  SetupResult setup = run_setup(params, IndexCards{0, 0, 1, 2});
  PartyViews views = setup.views;
  CHECK(views.violations.empty());
  views.require_registers(Role::Bob, {"E"});       // Bob touching Alice's half
  views.require_card(Role::Alice, "j1");           // Alice reading Bob's card
  REQUIRE(views.violations.size() == 2);
  CHECK(views.violations[0] == "Bob accessed register E");
  CHECK(views.violations[1] == "Alice accessed card j1");
  // transfers move access rights
  views.transfer(Role::Alice, Role::Bob, {"E"});
  views.require_registers(Role::Bob, {"E"});
  CHECK(views.violations.size() == 2);
}
