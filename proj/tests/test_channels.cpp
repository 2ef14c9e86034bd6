#include "doctest.h"
#include "oracles.hpp"
#include "symrb/channels.hpp"
#include "symrb/errors.hpp"
#include "symrb/protocol.hpp"

using namespace symrb;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

TransferMatrix depolarizing(double p) {
  CMatrix m = CMatrix::Identity(4, 4) * p;
  m(0, 0) = 1.0;
  return TransferMatrix(m);
}

Experiment single_t(double eps) {
  ExperimentConfig cfg;
  cfg.gate = GateSpec::copies("T", 1);
  cfg.noise = single_t_noise(eps);
  cfg.states = initial_state_library(StateLibrary::SingleT);
  cfg.lengths = {1};
  cfg.sequences_per_length = 1;
  return Experiment(cfg);
}

}  // namespace

TEST_CASE("standard gates") {
  const CMatrix t = standard_gate("T");
  CHECK(std::abs(t(0, 0) - std::polar(1.0, -M_PI / 8)) < 1e-15);
  CHECK(std::abs(t(1, 1) - std::polar(1.0, M_PI / 8)) < 1e-15);
  CHECK(std::abs(t(0, 1)) == 0.0);
  const CMatrix h = standard_gate("H");
  CHECK(max_abs(h * h - CMatrix::Identity(2, 2)) < 1e-15);
  const auto s = unitary_to_transfer(standard_gate("S"));
  CHECK(max_abs((s * s * s * s).matrix() - CMatrix::Identity(4, 4)) < 1e-14);
  CHECK(max_abs(standard_gate("RZ", 0.3) - oracle::expm_hermitian(0.15 * oracle::pauli(3))) < 1e-14);
  CHECK(is_unitary(standard_gate("CNOT"), 1e-15));
  CHECK_THROWS_AS(standard_gate("Q"), ValidationError);
  CHECK_THROWS_AS(standard_gate("RX"), ValidationError);
}

TEST_CASE("gate specs") {
  const auto spec = GateSpec::parse("RZ(0.3), H");
  REQUIRE(spec.factors.size() == 2);
  CHECK(spec.factors[0].theta.value() == doctest::Approx(0.3));
  CHECK(max_abs(spec.unitary() - oracle::kron(standard_gate("RZ", 0.3), standard_gate("H"))) < 1e-15);
  CHECK(GateSpec::parse("T,T").display() == "T,T");
  CHECK(GateSpec::parse(GateSpec::parse("RZ(0.3),H").display()).display() == GateSpec::parse("RZ(0.3),H").display());
  CHECK_THROWS_AS(GateSpec::parse("T,,T"), ValidationError);
  CHECK_THROWS_AS(GateSpec::parse("RZ(abc)"), ValidationError);
}

TEST_CASE("perturbed gates") {
  const auto spec = GateSpec::copies("T", 1);
  const auto ideal = perturbed_gate(single_t_noise(0.0), spec);
  CHECK(max_abs(ideal.noise.matrix() - CMatrix::Identity(4, 4)) < 1e-14);

  for (double eps : {0.01, 0.1, 0.25}) {
    const auto model = single_t_noise(eps);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(model.generator() + eps * model.perturbation());
    const double w = std::sqrt(M_PI * M_PI / 64 + eps * eps);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-w).epsilon(1e-14));
    CHECK(es.eigenvalues()(1) == doctest::Approx(w).epsilon(1e-14));
    const auto g = perturbed_gate(model, spec);
    CHECK(max_abs((g.noise * g.ideal).matrix() - g.implemented.matrix()) < 1e-12);
    CHECK(max_abs(g.implemented.matrix() -
                  oracle::transfer_from_unitary(oracle::expm_hermitian(M_PI / 8 * oracle::pauli(3) - eps * oracle::pauli(1)), 1)) <
          1e-12);
  }

  const auto two = perturbed_gate(two_t_noise(0.1), GateSpec::copies("T", 2));
  CHECK(two.noise.is_trace_preserving(1e-12));
  CHECK(max_abs((two.noise * two.ideal).matrix() - two.implemented.matrix()) < 1e-12);

  // Off-diagonal part in the ideal eigenbasis grows linearly in epsilon.
  auto offdiag = [&](double eps) {
    const CMatrix u = standard_gate("T");
    const CMatrix ut = oracle::expm_hermitian(M_PI / 8 * oracle::pauli(3) - eps * oracle::pauli(1));
    Eigen::ComplexEigenSolver<CMatrix> es(u);
    const CMatrix b = es.eigenvectors().adjoint() * ut * es.eigenvectors();
    return std::abs(b(0, 1)) + std::abs(b(1, 0));
  };
  const double ratio = offdiag(0.1) / offdiag(0.05);
  CHECK(ratio > 1.5);
  CHECK(ratio < 2.5);

  CHECK_THROWS_AS(perturbed_gate(single_t_noise(0.1), GateSpec::copies("T", 2)), ValidationError);
}

TEST_CASE("twirl properties") {
  std::mt19937_64 rng(17);
  for (int n = 1; n <= 2; ++n) {
    const auto g = build_symmetry_group(GateSpec::copies("T", n).layout());
    const auto id = TransferMatrix::identity(n);
    CHECK(max_abs(twirl(id, g).matrix() - id.matrix()) < 1e-14);
    for (int trial = 0; trial < 5; ++trial) {
      const auto kraus = oracle::random_kraus(1 << n, 2, rng);
      const TransferMatrix lambda(oracle::transfer_from_kraus(kraus, n));
      const auto tw = twirl(lambda, g);
      CHECK(max_abs(twirl(tw, g).matrix() - tw.matrix()) < 1e-12);
      CHECK(std::abs(tw.trace() - lambda.trace()) < 1e-12);
      CHECK(entanglement_fidelity(lambda) == doctest::Approx(oracle::entanglement_fidelity_kraus(kraus)).epsilon(1e-12));
      CHECK(average_fidelity_exact(tw) == doctest::Approx(average_fidelity_exact(lambda)).epsilon(1e-12));
      for (int e = 0; e < int(g.size()); ++e) {
        const CMatrix m = g.transfer(e).to_dense().cast<Complex>();
        CHECK(max_abs(m * tw.matrix() - tw.matrix() * m) < 1e-10);
      }
    }
  }
}

TEST_CASE("twirled noise respects the irrep blocks") {
  const auto exp = single_t(0.1);
  const auto& g = exp.group();
  const auto& table = exp.characters();
  const auto& dec = exp.decomposition();
  const CMatrix tw = exp.twirled_noise().matrix();
  for (const auto& a : dec.components)
    for (const auto& b : dec.components) {
      if (a.irrep == b.irrep) continue;
      const CMatrix block = irrep_projector(g, table, a.irrep) * tw * irrep_projector(g, table, b.irrep);
      CHECK(max_abs(block) < 1e-10);
    }

  // One-dimensional, multiplicity-one irreps carry a scalar.
  const auto& basis = exp.true_basis();
  const CMatrix d = basis.vectors.adjoint() * tw * basis.vectors;
  for (Eigen::Index c = 0; c < d.cols(); ++c)
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
      const auto& sr = basis.slots[std::size_t(basis.column_slot[std::size_t(r)])];
      const auto& sc = basis.slots[std::size_t(basis.column_slot[std::size_t(c)])];
      if (sr.label != sc.label) CHECK(std::abs(d(r, c)) < 1e-10);
    }
}

TEST_CASE("joint diagonalization score") {
  const auto exp0 = single_t(0.0);
  CHECK(joint_diag_score(TransferMatrix::identity(1), exp0.true_basis()) < 1e-14);
  CHECK(joint_diag_score(exp0.gate().noise, exp0.true_basis()) < 1e-12);
  for (double eps : {0.05, 0.02}) {
    const auto a = single_t(eps), b = single_t(eps / 2);
    const double ratio = joint_diag_score(a.gate().noise, a.true_basis()) / joint_diag_score(b.gate().noise, b.true_basis());
    CHECK(ratio > 1.5);
    CHECK(ratio < 2.5);
  }
}

TEST_CASE("fidelity formulas") {
  CHECK(average_fidelity_exact(TransferMatrix::identity(1)) == doctest::Approx(1.0));
  CHECK(entanglement_fidelity(TransferMatrix::identity(2)) == doctest::Approx(1.0));
  CHECK(chi00(TransferMatrix::identity(2)) == doctest::Approx(1.0));
  for (double p : {0.0, 0.5, 0.9, 0.99}) {
    CHECK(average_fidelity_exact(depolarizing(p)) == doctest::Approx((1 + p) / 2).epsilon(1e-14));
    CHECK(fidelity_from_lambdas({1.0, p, p, p}, 2) == doctest::Approx((1 + p) / 2).epsilon(1e-14));
  }
  CHECK(fidelity_from_lambdas({1.0, 1.0, 1.0, 1.0}, 2) == doctest::Approx(1.0));
  CHECK(fidelity_from_lambdas({1.0, 1.0, 1.0, 0.0}, 2) == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("single-gate error bound") {
  const auto collapsed = gate_error_bound(0.97, 1.0);
  CHECK(collapsed.lo == doctest::Approx(0.97).epsilon(1e-12));
  CHECK(collapsed.hi == doctest::Approx(0.97).epsilon(1e-12));

  // Grid scan of the inequality as the oracle.
  const double c = 0.99, n = 0.999;
  double lo = 2, hi = -1;
  for (int i = 0; i <= 1000000; ++i) {
    const double x = i * 1e-6;
    const double rhs = 2 * std::sqrt((1 - x) * x * (1 - n) * n) + (1 - x) * (1 - n);
    if (std::abs(c - x * n) <= rhs) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  const auto b = gate_error_bound(c, n);
  CHECK(std::abs(b.lo - lo) <= 1e-6);
  CHECK(std::abs(b.hi - hi) <= 1e-6);
  CHECK(b.lo < c);
  CHECK(b.hi > c);
  CHECK_THROWS_AS(gate_error_bound(1.5, 0.9), ValidationError);
}
