// Command-line driver: masker audits, commitment protocol runs, Monte Carlo
// binding estimates, randomness-cost tables, the classical baseline, and
// fixture export. Every command emits a check report; exit code 0 iff all
// checks pass.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qott/baseline.hpp"
#include "qott/io.hpp"
#include "qott/protocol.hpp"
#include "qott/report.hpp"

namespace {

using namespace qott;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("QOTTSIM_SEED"))
    return std::strtoull(env, nullptr, 10);
  return 12345;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

void emit(const ReportEnvelope& env, const std::string& out_path,
          const std::string& format) {
  if (!out_path.empty()) {
    env.write(out_path, format);
  } else if (format == "csv") {
    std::cout << env.to_csv();
  } else {
    std::cout << env.to_json().dump(2) << '\n';
  }
}

Masker masker_by_family(const std::string& family, Dim d) {
  if (family == "four-qudit") return masker_four_qudit(d);
  if (family == "qotp") return masker_qotp(d);
  if (family == "minimal") return masker_minimal(d);
  if (family == "minimal-dual") return masker_minimal_dual(d);
  if (family == "identity") return masker_identity(d);
  throw CLI::ValidationError("unknown masker family: " + family);
}

int cmd_verify_maskers(const std::string& d_list, const std::string& out_path,
                       const std::string& format) {
  std::vector<int> ds = parse_int_list(d_list);
  if (ds.empty()) throw CLI::ValidationError("--d list must be nonempty");
  ReportEnvelope env;
  env.command = "verify-maskers";
  env.parameters["d"] = ds;
  ReportTimer timer(env);
  for (int dv : ds) {
    if (dv > 7) throw CLI::ValidationError("--d values must be <= 7");
    Dim d(dv);
    const std::string tag = "d" + std::to_string(dv) + ".";
    for (const char* family : {"four-qudit", "qotp", "minimal"}) {
      Masker m = masker_by_family(family, d);
      MaskingReport rep = verify_masking(m);
      const std::string pre = tag + family + ".";
      const bool odd_only = std::string(family) == "minimal" && dv % 2 == 0;
      if (odd_only) {
        // even-d minimal masker must fail the B-marginal constancy check
        env.checks.push_back(
            check_ge(pre + "expected_fail_dev_b", rep.max_dev_b, 1e-3));
        continue;
      }
      env.checks.push_back(check_le(pre + "dev_a", rep.max_dev_a, tol::derived));
      env.checks.push_back(check_le(pre + "dev_b", rep.max_dev_b, tol::derived));
      env.checks.push_back(check_ge(pre + "unmask_fidelity",
                                    rep.min_unmask_fidelity, 1.0 - tol::derived));
      EntropyAudit audit = entropy_audit(m);
      env.checks.push_back(check_ge(pre + "safe_entropy_bits",
                                    audit.safe_entropy_bits,
                                    audit.log2_d, tol::derived));
      DualMasker dual = dual_masker(m);
      env.checks.push_back(
          check_le(pre + "dual_residual", dual.residual, 1e-8));
    }
    {
      Masker m = masker_by_family("minimal-dual", d);
      MaskingReport rep = verify_masking(m);
      const std::string pre = tag + "minimal-dual.";
      if (dv % 2 == 0) {
        env.checks.push_back(check_ge(pre + "expected_fail_dev",
                                      std::max(rep.max_dev_a, rep.max_dev_b),
                                      1e-3));
      } else {
        env.checks.push_back(
            check_le(pre + "dev_a", rep.max_dev_a, tol::derived));
        env.checks.push_back(
            check_le(pre + "dev_b", rep.max_dev_b, tol::derived));
        env.checks.push_back(check_ge(pre + "unmask_fidelity",
                                      rep.min_unmask_fidelity,
                                      1.0 - tol::derived));
        DualMasker dual = dual_masker(m);
        env.checks.push_back(
            check_le(pre + "dual_residual", dual.residual, 1e-8));
      }
    }
    {
      // the non-masking reference must fail
      MaskingReport rep = verify_masking(masker_by_family("identity", d));
      env.checks.push_back(check_ge(tag + "identity.expected_fail_dev",
                                    std::max(rep.max_dev_a, rep.max_dev_b),
                                    1e-3));
    }
  }
  emit(env, out_path, format);
  return env.all_pass() ? 0 : 1;
}

int cmd_protocol_run(int p, const std::string& j_list,
                     const std::string& strategy, double epsilon, long trials,
                     std::uint64_t seed, const std::string& out_path,
                     const std::string& format, bool full_branches) {
  QottParams params = default_params(p, parse_int_list(j_list));
  ReportEnvelope env;
  env.command = "protocol run";
  env.seed = seed;
  env.parameters = {{"p", p},
                    {"J", params.j_set},
                    {"strategy", strategy},
                    {"epsilon", epsilon},
                    {"trials", trials}};
  ReportTimer timer(env);
  DetectorModel detector(epsilon);
  IndexCards cards = random_cards(params, seed);
  auto rng = stream_rng(seed, 3);
  const double j_bound = 1.0 / params.j_set.size();

  if (strategy == "honest") {
    DensityOperator secret = random_density(rng, single("I", p));
    PartyViews views;
    HonestRunResult run = honest_run(params, cards, secret, detector, &views);
    env.checks.push_back(
        check_eq("accept_probability", run.accept_probability, 1.0, 1e-9));
    env.checks.push_back(
        check_ge("output_fidelity", run.output_fidelity, 1.0 - 1e-9));
    env.checks.push_back(check_eq("view_violations",
                                  static_cast<double>(views.violations.size()),
                                  0.0, 0.0));
    if (full_branches) {
      SetupResult setup = run_setup(params, cards);
      CommitResult commit = run_commit_honest(setup, secret);
      nlohmann::json branches = nlohmann::json::array();
      for (const auto& br : commit.branches) {
        RevealResult r = run_reveal(br, setup, cards.i1, cards.i2, detector);
        branches.push_back({{"a", br.a},
                            {"b", br.b},
                            {"weight", r.branch_weight},
                            {"accept", r.accept_probability}});
      }
      env.parameters["branches"] = std::move(branches);
    }
  } else if (strategy == "wrong-index") {
    PureState secret = random_pure_state(rng, single("I", p));
    GenericStrategy s = honest_instrument(secret, params.p, p);
    const int delta1 = 1, delta2 = 0;
    CheatAnalysis exact = cheat_analysis(params, s, delta1, delta2);
    env.checks.push_back(check_le("lambda_average_acceptance",
                                  exact.average_acceptance, j_bound, 1e-9));
    double sim = exact_wrong_index_acceptance(params, s, delta1, delta2);
    env.checks.push_back(
        check_eq("simulated_vs_lambda", sim, exact.average_acceptance, 1e-8));
    if (trials > 0) {
      MonteCarloEstimate mc = monte_carlo_wrong_index(params, s, delta1,
                                                      delta2, trials, seed,
                                                      detector);
      const double bound =
          j_bound + epsilon * (1.0 - j_bound) + 3.0 * mc.std_error;
      env.checks.push_back(
          check_le("monte_carlo_acceptance", mc.mean, bound));
      env.parameters["mc_std_error"] = mc.std_error;
    }
  } else if (strategy == "tamper") {
    DensityOperator secret = random_density(rng, single("I", p));
    auto xi = channel_replace_with_basis0(p);
    TamperResult t = post_commit_tamper(params, cards, secret, xi);
    env.checks.push_back(check_eq("accept_vs_partner_overlap",
                                  t.accept_probability,
                                  t.predicted_acceptance, 1e-8));
    env.checks.push_back(
        check_le("accept_probability", t.accept_probability, 1.0 - 1e-3));
    if (t.output) {
      PureState ref = purify(secret, "R", "I");
      PureState target(Register({"R", "C"}, ref.reg.dims()), ref.amps);
      env.checks.push_back(check_ge("accepted_output_fidelity",
                                    fidelity(*t.output, target), 1.0 - 1e-8));
    }
  } else if (strategy == "generic") {
    GenericStrategy s = forge_strategy(params.p, p, rng);
    CheatAnalysis exact = cheat_analysis(params, s, 0, 0);
    env.checks.push_back(check_le("lambda_average_acceptance",
                                  exact.average_acceptance, j_bound, 1e-9));
    GenericStrategy r = random_instrument(params.p, p, rng, 2);
    CheatAnalysis rand_exact = cheat_analysis(params, r, 1, 1);
    env.checks.push_back(check_le("random_instrument_average",
                                  rand_exact.average_acceptance, j_bound,
                                  1e-9));
    // oracle consistency on the correct-index branch outputs
    auto oracle = delayed_teleport_oracle(params, s);
    auto direct = reveal_branch_outputs(params, cards, s);
    double worst = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i)
      worst = std::max(worst, (oracle[i].matrix - direct[i].matrix)
                                  .cwiseAbs()
                                  .maxCoeff());
    env.checks.push_back(check_le("oracle_branch_deviation", worst, 1e-8));
  } else {
    throw CLI::ValidationError("unknown strategy: " + strategy);
  }
  emit(env, out_path, format);
  return env.all_pass() ? 0 : 1;
}

int cmd_montecarlo(int p, const std::string& j_list, long trials, int reps,
                   double epsilon, std::uint64_t seed,
                   const std::string& out_path, const std::string& format) {
  QottParams params = default_params(p, parse_int_list(j_list));
  ReportEnvelope env;
  env.command = "montecarlo";
  env.seed = seed;
  env.parameters = {{"p", p},
                    {"J", params.j_set},
                    {"trials", trials},
                    {"repetitions", reps},
                    {"epsilon", epsilon}};
  ReportTimer timer(env);
  auto rng = stream_rng(seed, 3);
  PureState secret = random_pure_state(rng, single("I", p));
  GenericStrategy s = honest_instrument(secret, params.p, p);
  DetectorModel detector(epsilon);
  const double j_bound = 1.0 / params.j_set.size();
  const double single_round = j_bound + epsilon * (1.0 - j_bound);
  MonteCarloEstimate mc =
      repetition_mode(reps, params, s, 1, 0, detector, trials, seed);
  double bound = std::pow(single_round, reps) + 3.0 * mc.std_error;
  env.checks.push_back(check_le("repetition_acceptance", mc.mean, bound));
  env.parameters["mc_std_error"] = mc.std_error;
  env.parameters["single_round_bound"] = single_round;
  emit(env, out_path, format);
  return env.all_pass() ? 0 : 1;
}

int cmd_src(int p, const std::string& j_list, const std::string& out_path,
            const std::string& format) {
  std::vector<int> j_set = parse_int_list(j_list);
  QottParams params = default_params(p, j_set);
  ReportEnvelope env;
  env.command = "src";
  env.parameters = {{"p", p}, {"J", params.j_set}};
  ReportTimer timer(env);
  SrcReport src = src_report(p, j_set.size());
  double measured = commodity_entropy(params);
  env.checks.push_back(
      check_eq("commodity_entropy_bits", measured, src.qott_bits, 1e-6));
  env.parameters["qott_bits"] = src.qott_bits;
  env.parameters["qotp_via_rivest_bits"] = src.qotp_via_rivest_bits;
  env.parameters["superdense_bits"] = src.superdense_bits;
  env.parameters["rivest_bit_bits"] = src.rivest_bit_bits;
  env.checks.push_back(check_le("qott_leq_qotp_route", src.qott_bits,
                                src.qotp_via_rivest_bits, 1e-12));
  emit(env, out_path, format);
  return env.all_pass() ? 0 : 1;
}

int cmd_baseline(int p, std::uint64_t seed, const std::string& out_path,
                 const std::string& format) {
  ReportEnvelope env;
  env.command = "baseline run";
  env.seed = seed;
  env.parameters = {{"p", p}};
  ReportTimer timer(env);
  RivestScheme scheme(p);
  auto rng = stream_rng(seed, 0);
  RivestCards cards = scheme.deal(rng);
  std::uniform_int_distribution<int> zp(0, p - 1);
  int m = zp(rng);
  int c = scheme.commit(cards, m);
  env.checks.push_back(check_eq(
      "honest_accept",
      scheme.reveal_accept(cards, c, m, cards.a, cards.b) ? 1.0 : 0.0, 1.0,
      0.0));
  RivestAudit audit = rivest_audit(p);
  env.checks.push_back(check_eq(
      "card_entropy_bits", audit.card_entropy_bits,
      std::log2(static_cast<double>(p) * p * (p - 1)), 1e-12));
  env.checks.push_back(
      check_le("hiding_mutual_info", audit.hiding_mutual_info, 1e-12));
  env.checks.push_back(check_eq("best_cheat_acceptance",
                                audit.best_cheat_acceptance, 1.0 / (p - 1),
                                1e-12));
  emit(env, out_path, format);
  return env.all_pass() ? 0 : 1;
}

int cmd_fixture_export(int p, const std::string& j_list, std::uint64_t seed,
                       const std::string& prefix) {
  QottParams params = default_params(p, parse_int_list(j_list));
  QottCommodity c = build_qott(params, seed);
  save_commodity(c, prefix);
  save_masker(params.masker, prefix + ".masker");
  std::cout << "wrote " << prefix << ".json and companions\n";
  return 0;
}

int cmd_fixture_info(const std::string& path) {
  nlohmann::json h = peek_header(path);
  std::cout << h.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qudit one-time-table commitment simulator"};
  app.require_subcommand(1);
  std::string out_path, format = "json";

  std::string d_list;
  auto* verify = app.add_subcommand("verify-maskers", "audit masker families");
  verify->add_option("--d", d_list, "comma list of dimensions")->required();
  verify->add_option("--out", out_path);
  verify->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  int p = 3;
  std::string j_list = "1,2";
  std::string strategy = "honest";
  double epsilon = 0.0;
  long trials = 0;
  int reps = 1;
  std::uint64_t seed = default_seed();
  bool full_branches = false;

  auto* protocol = app.add_subcommand("protocol", "commitment protocol");
  auto* prun = protocol->add_subcommand("run", "run one protocol scenario");
  prun->add_option("--p", p, "prime dimension")->required();
  prun->add_option("--J", j_list, "comma list, subset of 1..p-1")->required();
  prun->add_option("--strategy", strategy)
      ->check(CLI::IsMember({"honest", "wrong-index", "tamper", "generic"}));
  prun->add_option("--epsilon", epsilon);
  prun->add_option("--trials", trials);
  prun->add_option("--seed", seed);
  prun->add_option("--out", out_path);
  prun->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  prun->add_flag("--full-branches", full_branches);

  auto* mc = app.add_subcommand("montecarlo", "repetition-mode estimate");
  mc->add_option("--p", p)->required();
  mc->add_option("--J", j_list)->required();
  mc->add_option("--trials", trials)->required();
  mc->add_option("--repetitions", reps);
  mc->add_option("--epsilon", epsilon);
  mc->add_option("--seed", seed);
  mc->add_option("--out", out_path);
  mc->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  auto* src = app.add_subcommand("src", "shared-randomness-cost table");
  src->add_option("--p", p)->required();
  src->add_option("--J", j_list)->required();
  src->add_option("--out", out_path);
  src->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  auto* baseline = app.add_subcommand("baseline", "classical baseline");
  auto* brun = baseline->add_subcommand("run", "audit the classical scheme");
  brun->add_option("--p", p)->required();
  brun->add_option("--seed", seed);
  brun->add_option("--out", out_path);
  brun->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  std::string prefix = "fixture", info_path;
  auto* fixture = app.add_subcommand("fixture", "state container exchange");
  auto* fexp = fixture->add_subcommand("export", "write commodity + masker");
  fexp->add_option("--p", p)->required();
  fexp->add_option("--J", j_list)->required();
  fexp->add_option("--seed", seed);
  fexp->add_option("--out", prefix);
  auto* finfo = fixture->add_subcommand("info", "print a container header");
  finfo->add_option("--file", info_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(verify))
      return cmd_verify_maskers(d_list, out_path, format);
    if (protocol->got_subcommand(prun))
      return cmd_protocol_run(p, j_list, strategy, epsilon, trials, seed,
                              out_path, format, full_branches);
    if (app.got_subcommand(mc))
      return cmd_montecarlo(p, j_list, trials, reps, epsilon, seed, out_path,
                            format);
    if (app.got_subcommand(src)) return cmd_src(p, j_list, out_path, format);
    if (baseline->got_subcommand(brun))
      return cmd_baseline(p, seed, out_path, format);
    if (fixture->got_subcommand(fexp))
      return cmd_fixture_export(p, j_list, seed, prefix);
    if (fixture->got_subcommand(finfo)) return cmd_fixture_info(info_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cerr << "no command given\n";
  return 2;
}
