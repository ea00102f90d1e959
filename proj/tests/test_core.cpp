#include <catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "qott/core.hpp"
#include "qott/gates.hpp"
#include "qott/measures.hpp"
#include "qott/random.hpp"
#include "qott/serialize.hpp"

using namespace qott;

namespace {
constexpr double kEps = 1e-12;

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("dimension and register validation") {
  CHECK_THROWS(Dim(1));
  CHECK_THROWS(Dim(0));
  CHECK_NOTHROW(Dim(2));
  CHECK_THROWS(Dim(4).require_prime());
  CHECK_NOTHROW(Dim(7).require_prime());
  CHECK_THROWS(Register({"a", "a"}, {2, 2}));
  CHECK_THROWS(Register({"a"}, {2, 2}));
  Register r({"x", "y", "z"}, {2, 3, 5});
  CHECK(r.total_dim() == 30);
  CHECK(r.pos("y") == 1);
  CHECK(r.dim_of(std::vector<std::string>{"x", "z"}) == 10);
  CHECK(r.complement({"y"}) == std::vector<std::string>{"x", "z"});
}

TEST_CASE("generalized Pauli operators") {
  SECTION("d=2 reduces to standard Pauli") {
    Mat x = gen_pauli_x(Dim(2)).matrix;
    CHECK(std::abs(x(0, 1) - 1.0) < kEps);
    CHECK(std::abs(x(1, 0) - 1.0) < kEps);
    CHECK(std::abs(x(0, 0)) < kEps);
  }
  for (int d : {2, 3, 5, 7}) {
    Mat x = gen_pauli_x(Dim(d)).matrix;
    Mat z = gen_pauli_z(Dim(d)).matrix;
    Mat xp = Mat::Identity(d, d), zp = xp;
    for (int k = 0; k < d; ++k) {
      xp = x * xp;
      zp = z * zp;
    }
    CHECK(max_abs(xp - Mat::Identity(d, d)) < kEps);
    CHECK(max_abs(zp - Mat::Identity(d, d)) < kEps);
    // Weyl commutation entrywise for all exponents
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        Mat xa = weyl_op(Dim(d), a, 0);
        Mat zb = weyl_op(Dim(d), 0, b);
        cplx phase = std::exp(cplx(
            0.0, 2.0 * std::numbers::pi * static_cast<double>(a) * b / d));
        CHECK(max_abs(zb * xa - phase * xa * zb) < kEps);
        CHECK(max_abs(weyl_op(Dim(d), a, b) - xa * zb) < kEps);
      }
  }
}

TEST_CASE("discrete Fourier gate") {
  SECTION("d=2 is the Hadamard") {
    Mat h = fourier(Dim(2)).matrix;
    double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(h(0, 0) - s) < kEps);
    CHECK(std::abs(h(0, 1) - s) < kEps);
    CHECK(std::abs(h(1, 1) + s) < kEps);
  }
  for (int d : {2, 3, 5, 7}) {
    Mat h = fourier(Dim(d)).matrix;
    CHECK(max_abs(h.adjoint() * h - Mat::Identity(d, d)) < kEps);
    // H X H^-1 = Z in this phase convention
    Mat x = gen_pauli_x(Dim(d)).matrix;
    Mat z = gen_pauli_z(Dim(d)).matrix;
    CHECK(max_abs(h * x * h.adjoint() - z) < 1e-9);
  }
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(std::abs(fourier(Dim(3)).matrix(1, k)) -
                   1.0 / std::sqrt(3.0)) < kEps);
}

TEST_CASE("controlled gates") {
  SECTION("CNOT at d=2") {
    Mat x = gen_pauli_x(Dim(2)).matrix;
    Mat cnot = controlled({Mat::Identity(2, 2), x}, 2, "c", "t").matrix;
    Mat expect(4, 4);
    expect << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0;
    CHECK(max_abs(cnot - expect) < kEps);
  }
  SECTION("identity list") {
    Mat u = controlled({Mat::Identity(3, 3), Mat::Identity(3, 3),
                        Mat::Identity(3, 3)}, 3, "c", "t")
                .matrix;
    CHECK(max_abs(u - Mat::Identity(9, 9)) < kEps);
  }
  SECTION("controlled powers of X at d=3 act as modular addition") {
    Mat u = controlled_powers(gen_pauli_x(Dim(3)).matrix, 3, "c", "t").matrix;
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        CHECK(std::abs(u(j * 3 + (j + k) % 3, j * 3 + k) - 1.0) < kEps);
  }
  CHECK_THROWS(controlled({Mat::Identity(2, 2)}, 2, "c", "t"));
}

TEST_CASE("maximally entangled state and Bell basis") {
  SECTION("d=2 amplitudes") {
    PureState theta = max_entangled(Dim(2), "a", "b");
    double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(theta.amps(0) - s) < kEps);
    CHECK(std::abs(theta.amps(3) - s) < kEps);
    CHECK(std::abs(theta.amps(1)) < kEps);
  }
  for (int d : {2, 3, 5}) {
    PureState theta = max_entangled(Dim(d), "a", "b");
    CHECK(trace_distance(marginal(theta, {"a"}),
                         maximally_mixed(single("a", d))) < 1e-12);
    CHECK(trace_distance(marginal(theta, {"b"}),
                         maximally_mixed(single("b", d))) < 1e-12);
  }
  SECTION("Gram matrix of the Bell family is the identity") {
    for (int d : {2, 3, 5}) {
      auto basis = bell_basis(Dim(d), "a", "b");
      REQUIRE(basis.size() == static_cast<std::size_t>(d) * d);
      for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = 0; j < basis.size(); ++j) {
          cplx g = basis[i].amps.dot(basis[j].amps);
          CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) < 1e-12);
        }
    }
  }
  SECTION("Bell projectors are complete") {
    auto basis = bell_basis(Dim(3), "a", "b");
    Mat sum = Mat::Zero(9, 9);
    for (const auto& s : basis) sum += s.amps * s.amps.adjoint();
    CHECK(max_abs(sum - Mat::Identity(9, 9)) < 1e-12);
  }
}

TEST_CASE("tensor, permutation and partial trace") {
  PureState theta = max_entangled(Dim(3), "a", "b");
  CHECK(trace_distance(partial_trace(to_density(theta), {"a"}),
                       maximally_mixed(single("a", 3))) < 1e-12);
  SECTION("permute round trip is exact") {
    std::mt19937_64 rng(5);
    PureState s = random_pure_state(rng, Register({"x", "y", "z"}, {2, 3, 2}));
    PureState p = permute_subsystems(s, {"z", "x", "y"});
    PureState back = permute_subsystems(p, {"x", "y", "z"});
    CHECK((back.amps - s.amps).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("identity unitary acts trivially") {
    std::mt19937_64 rng(6);
    DensityOperator rho = random_density(rng, Register({"x", "y"}, {2, 3}));
    Unitary id(rho.reg, rho.reg, Mat::Identity(6, 6));
    CHECK(trace_distance(apply_unitary(id, rho), rho) < 1e-14);
  }
  SECTION("partial trace preserves trace and commutes with relabeling") {
    std::mt19937_64 rng(7);
    DensityOperator rho =
        random_density(rng, Register({"x", "y", "z"}, {2, 2, 3}));
    DensityOperator a = partial_trace(rho, {"x", "z"});
    CHECK(std::abs(a.trace() - 1.0) < 1e-12);
    DensityOperator b =
        partial_trace(permute_subsystems(rho, {"z", "y", "x"}), {"x", "z"});
    CHECK(trace_distance(a, b) < 1e-12);
  }
}

TEST_CASE("projective measurement") {
  SECTION("computational basis on |0>") {
    Register q = single("q", 3);
    std::vector<Mat> projs;
    for (int j = 0; j < 3; ++j) {
      Mat p = Mat::Zero(3, 3);
      p(j, j) = 1.0;
      projs.push_back(p);
    }
    auto branches = measure_projective(to_density(basis_state(q, 0)), projs);
    CHECK(std::abs(branches[0].probability - 1.0) < 1e-12);
    CHECK(branches[1].probability < 1e-12);
  }
  SECTION("maximally mixed gives uniform outcomes") {
    Register q = single("q", 5);
    std::vector<Mat> projs;
    for (int j = 0; j < 5; ++j) {
      Mat p = Mat::Zero(5, 5);
      p(j, j) = 1.0;
      projs.push_back(p);
    }
    auto branches = measure_projective(maximally_mixed(q), projs);
    double total = 0.0;
    for (const auto& b : branches) {
      CHECK(std::abs(b.probability - 0.2) < 1e-12);
      total += b.probability;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
  SECTION("Bell measurement branches match the 4-amplitude calculation") {
    // |0>_I |Theta>_EC, Bell-measure (I,E): branch (a,b) leaves
    // (1/2) Z^{-b} X^{-a} |0> on C
    PureState global = tensor(basis_state(single("I", 2), 0),
                              max_entangled(Dim(2), "E", "C"));
    auto bell = bell_basis(Dim(2), "I", "E");
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        PureState br = project_out(bell[a * 2 + b].amps, global, {"I", "E"});
        Vec expect = weyl_op(Dim(2), a, b).adjoint() *
                     basis_state(single("C", 2), 0).amps / 2.0;
        CHECK((br.amps - expect).cwiseAbs().maxCoeff() < 1e-12);
      }
  }
  SECTION("incomplete projector set is rejected") {
    Mat p = Mat::Zero(2, 2);
    p(0, 0) = 1.0;
    CHECK_THROWS(measure_projective(maximally_mixed(single("q", 2)), {p}));
  }
}

TEST_CASE("information measures") {
  for (int d : {2, 3, 5, 7})
    CHECK(std::abs(von_neumann_entropy(maximally_mixed(single("q", d))) -
                   std::log2(static_cast<double>(d))) < 1e-9);
  std::mt19937_64 rng(11);
  PureState psi = random_pure_state(rng, single("q", 5));
  CHECK(von_neumann_entropy(to_density(psi)) < 1e-9);
  SECTION("entropy invariant under unitary conjugation") {
    DensityOperator rho = random_density(rng, single("q", 6));
    Mat u = random_unitary(rng, 6);
    DensityOperator rot(rho.reg, u * rho.matrix * u.adjoint());
    CHECK(std::abs(von_neumann_entropy(rot) - von_neumann_entropy(rho)) <
          1e-9);
  }
  SECTION("negativity of the Bell state at d=2 is 1/2") {
    DensityOperator bell = to_density(max_entangled(Dim(2), "a", "b"));
    CHECK(std::abs(negativity(bell, {"a"}) - 0.5) < 1e-10);
  }
  SECTION("trace distance and fidelity endpoints") {
    DensityOperator z0 = to_density(basis_state(single("q", 2), 0));
    DensityOperator z1 = to_density(basis_state(single("q", 2), 1));
    CHECK(std::abs(trace_distance(z0, z1) - 1.0) < 1e-12);
    CHECK(std::abs(fidelity(z0, z0) - 1.0) < 1e-12);
    CHECK(fidelity(z0, z1) < 1e-12);
  }
}

TEST_CASE("seeded randomness is deterministic") {
  auto a = stream_rng(99, 4);
  auto b = stream_rng(99, 4);
  PureState sa = random_pure_state(a, single("q", 7));
  PureState sb = random_pure_state(b, single("q", 7));
  CHECK((sa.amps - sb.amps).cwiseAbs().maxCoeff() == 0.0);
  auto c = stream_rng(99, 5);
  PureState sc = random_pure_state(c, single("q", 7));
  CHECK((sa.amps - sc.amps).cwiseAbs().maxCoeff() > 1e-3);
  std::mt19937_64 rng(21);
  Mat u = random_unitary(rng, 9);
  CHECK((u.adjoint() * u - Mat::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("binary container round trip") {
  std::mt19937_64 rng(31);
  const std::string dir = std::filesystem::temp_directory_path().string();
  SECTION("pure state") {
    PureState s = random_pure_state(rng, Register({"a", "b"}, {3, 5}));
    std::stringstream buf;
    save(buf, s);
    PureState back = load_pure(buf);
    CHECK(back.reg == s.reg);
    CHECK((back.amps - s.amps).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("density operator") {
    DensityOperator rho = random_density(rng, Register({"a", "b"}, {2, 3}));
    std::stringstream buf;
    save(buf, rho);
    DensityOperator back = load_density(buf);
    CHECK(back.reg == rho.reg);
    CHECK((back.matrix - rho.matrix).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("unitary") {
    Unitary u = fourier(Dim(5), "q");
    std::stringstream buf;
    save(buf, u);
    Unitary back = load_unitary(buf);
    CHECK((back.matrix - u.matrix).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.in_reg == u.in_reg);
  }
  SECTION("bad magic is rejected") {
    std::stringstream buf;
    buf << "NOTMAGIC00000000";
    CHECK_THROWS(load_pure(buf));
  }
}

TEST_CASE("state validation") {
  Register q = single("q", 2);
  Vec big(2);
  big << 2.0, 0.0;
  CHECK_THROWS(PureState(q, big));
  Mat notherm(2, 2);
  notherm << cplx(0.5), cplx(0.2, 0.1), cplx(0.3, 0.2), cplx(0.5);
  CHECK_THROWS(DensityOperator(q, notherm));
  CHECK_THROWS(Unitary(q, q, Mat::Ones(2, 2)));
}
