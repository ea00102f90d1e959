#include <catch_amalgamated.hpp>

#include "qott/duality.hpp"
#include "qott/random.hpp"

using namespace qott;

namespace {
std::vector<Masker> maskers_at(int d) {
  std::vector<Masker> out;
  out.push_back(masker_four_qudit(Dim(d)));
  out.push_back(masker_qotp(Dim(d)));
  if (d % 2 == 1) {
    out.push_back(masker_minimal(Dim(d)));
    out.push_back(masker_minimal_dual(Dim(d)));
  }
  return out;
}
}  // namespace

TEST_CASE("masking isometry is an isometry") {
  for (int d : {2, 3}) {
    for (const Masker& m : maskers_at(d)) {
      SafeKeyState omega = purify_safe(m);
      MaskerIsometry iso = masking_isometry(m, omega);
      Mat g = iso.v.adjoint() * iso.v;
      INFO(m.family << " d=" << d);
      CHECK((g - Mat::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("every masker factorizes across the A share") {
  for (int d : {2, 3, 5}) {
    for (const Masker& m : maskers_at(d)) {
      INFO(m.family << " d=" << d);
      DualMasker dual = dual_masker(m);
      CHECK(dual.residual <= 1e-8);
      // the partner state carries no secret dependence by construction; the
      // residual above certifies V = (I (x) N)(I (x) |Psi>) globally
      CHECK(dual.n_unitary.matrix.rows() ==
            dual.n_unitary.in_reg.total_dim());
    }
  }
}

TEST_CASE("the synthesized dual is itself a masker") {
  for (int d : {2, 3, 5}) {
    for (const Masker& m : maskers_at(d)) {
      INFO(m.family << " d=" << d);
      DualMasker dual = dual_masker(m);
      Masker dm = masker_from_dual(m, dual);
      MaskingReport rep = verify_masking(dm);
      CHECK(rep.pass);
    }
  }
}

TEST_CASE("identity reference does not factorize") {
  CHECK_THROWS(dual_masker(masker_identity(Dim(3))));
}

TEST_CASE("purified masker is a (2,3) threshold scheme") {
  for (const Masker& m : {masker_minimal(Dim(3)), masker_four_qudit(Dim(2))}) {
    INFO(m.family);
    Qss23Report rep = qss23_check(m);
    CHECK(rep.pass);
    CHECK(rep.max_single_share_dev <= 1e-9);
    CHECK(rep.min_single_share_entropy_bits >=
          std::log2(static_cast<double>(m.d.d)) - 1e-9);
    CHECK(rep.min_recovery_fidelity_ab >= 1.0 - 1e-8);
    CHECK(rep.min_recovery_fidelity_bk >= 1.0 - 1e-8);
    CHECK(rep.min_recovery_fidelity_ak >= 1.0 - 1e-8);
    CHECK(rep.residual_bk <= 1e-8);
    CHECK(rep.residual_ak <= 1e-8);
  }
}

TEST_CASE("dual decoder recovers random secrets from (B,K) alone") {
  Masker m = masker_minimal(Dim(5));
  SafeKeyState omega = purify_safe(m);
  MaskerIsometry iso = masking_isometry(m, omega);
  DualMasker dual = dual_masker(m);
  auto rng = stream_rng(77, 0);
  for (int t = 0; t < 5; ++t) {
    PureState secret = random_pure_state(rng, single("C", 5));
    PureState global(iso.out_reg, iso.v * secret.amps);
    PureState back = apply_unitary(dual.n_unitary.adjoint(), global);
    CHECK(fidelity(marginal(back, {"C"}), to_density(secret)) >= 1.0 - 1e-8);
  }
}
