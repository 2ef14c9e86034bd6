#include "doctest.h"
#include "oracles.hpp"
#include "symrb/channels.hpp"
#include "symrb/errors.hpp"
#include "symrb/groups.hpp"
#include "symrb/superop.hpp"

using namespace symrb;

namespace {

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

CMatrix random_density(int d, std::mt19937_64& rng) {
  const CMatrix a = oracle::random_gaussian(d, d, rng);
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("basis is orthonormal and ordered base 4") {
  const auto b1 = build_basis(1);
  REQUIRE(b1.size() == 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(std::abs((b1[i].adjoint() * b1[j]).trace() - (i == j ? 1.0 : 0.0)) < 1e-14);
  CHECK(std::abs((b1[1] * b1[2]).trace()) < 1e-15);
  CHECK(max_abs(b1[3] * std::sqrt(2.0) - oracle::pauli(3)) < 1e-15);

  const auto b2 = build_basis(2);
  REQUIRE(b2.size() == 16);
  CHECK(pauli_index("ZZ") == 15);
  CHECK(pauli_word(15, 2) == "ZZ");
  CHECK(pauli_index("XZ") == 13);
  for (int i = 0; i < 16; ++i) CHECK(max_abs(b2[i] * 2.0 - oracle::pauli_word(i, 2)) < 1e-14);
}

TEST_CASE("qubit limit") {
  CHECK_NOTHROW(check_qubit_limit(4));
  CHECK_THROWS_AS(check_qubit_limit(5), ResourceLimitError);
  CHECK_THROWS_AS(qubits_for_dimension(3), ValidationError);
}

TEST_CASE("unitary transfer matrices") {
  CHECK(max_abs(unitary_to_transfer(CMatrix::Identity(4, 4)).matrix() - CMatrix::Identity(16, 16)) < 1e-15);

  const auto x = unitary_to_transfer(standard_gate("X")).matrix();
  CMatrix want = CMatrix::Zero(4, 4);
  want.diagonal() << 1, 1, -1, -1;
  CHECK(max_abs(x - want) < 1e-14);

  Eigen::ComplexEigenSolver<CMatrix> es(unitary_to_transfer(standard_gate("T")).matrix());
  std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + 4);
  const Complex w = std::polar(1.0, M_PI / 4);
  for (Complex e : {Complex(1.0), Complex(1.0), w, std::conj(w)}) {
    auto it = std::min_element(ev.begin(), ev.end(), [&](Complex a, Complex b) { return std::abs(a - e) < std::abs(b - e); });
    CHECK(std::abs(*it - e) < 1e-12);
    ev.erase(it);
  }

  std::mt19937_64 rng(3);
  for (int n = 1; n <= 2; ++n) {
    for (int t = 0; t < 5; ++t) {
      const CMatrix u = oracle::random_unitary(1 << n, rng);
      const auto m = unitary_to_transfer(u);
      CHECK(max_abs(m.matrix() - oracle::transfer_from_unitary(u, n)) < 1e-12);
      CHECK(m.is_real(1e-12));
      CHECK(m.is_trace_preserving(1e-12));
      const RMatrix r = m.real();
      CHECK((r.transpose() * r - RMatrix::Identity(r.rows(), r.cols())).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("composition order on Clifford words") {
  const auto& cl = single_qubit_cliffords();
  REQUIRE(cl.size() == 24);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(0, 23);
  for (int t = 0; t < 30; ++t) {
    const CMatrix u = oracle::kron(cl[pick(rng)].unitary, cl[pick(rng)].unitary);
    const CMatrix v = oracle::kron(cl[pick(rng)].unitary, cl[pick(rng)].unitary);
    // rho -> (UV)^dag rho (UV) applies U^dag first.
    const auto lhs = unitary_to_transfer(u * v);
    const auto rhs = unitary_to_transfer(v) * unitary_to_transfer(u);
    CHECK(max_abs(lhs.matrix() - rhs.matrix()) < 1e-10);
  }
}

TEST_CASE("state and effect vectors") {
  CMatrix zero = CMatrix::Zero(2, 2);
  zero(0, 0) = 1;
  const auto v = vectorize_state(zero);
  CHECK(std::abs(v.coeffs[0] - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(v.coeffs[1]) < 1e-15);
  CHECK(std::abs(v.coeffs[2]) < 1e-15);
  CHECK(std::abs(v.coeffs[3] - 1 / std::sqrt(2.0)) < 1e-15);

  const auto mixed = vectorize_state(CMatrix::Identity(4, 4) / 4.0);
  CHECK(std::abs(mixed.coeffs[0] - 0.5) < 1e-15);
  CHECK(mixed.coeffs.tail(15).norm() < 1e-15);

  std::mt19937_64 rng(5);
  for (int n = 1; n <= 2; ++n) {
    const CMatrix rho = random_density(1 << n, rng);
    CHECK(max_abs(devectorize(vectorize_state(rho)) - rho) < 1e-12);
  }

  const auto id = vectorize_effect(CMatrix::Identity(2, 2));
  const auto e0 = vectorize_effect(zero);
  CHECK(std::abs(expect(id, vectorize_state(random_density(2, rng))) - 1.0) < 1e-12);
  CHECK(std::abs(expect(e0, v) - 1.0) < 1e-12);
  CHECK(std::abs(expect(e0, vectorize_state(CMatrix::Identity(2, 2) / 2.0)) - 0.5) < 1e-12);

  CHECK(std::abs(expect(e0, TransferMatrix::identity(1), v) - 1.0) < 1e-12);
  CHECK(std::abs(expect(e0, unitary_to_transfer(standard_gate("X")), v)) < 1e-12);

  const auto t = unitary_to_transfer(standard_gate("T"));
  TransferMatrix t8 = TransferMatrix::identity(1);
  for (int i = 0; i < 8; ++i) t8 = t8 * t;
  const auto plus_y = vectorize_state((CMatrix::Identity(2, 2) + oracle::pauli(2)) / 2.0);
  const auto ex = vectorize_effect((CMatrix::Identity(2, 2) + oracle::pauli(1)) / 2.0);
  CHECK(std::abs(expect(ex, t8, plus_y) - expect(ex, plus_y)) < 1e-12);

  // Probability conservation for a random channel.
  const TransferMatrix ch(oracle::transfer_from_kraus(oracle::random_kraus(4, 3, rng), 2));
  CHECK(std::abs(expect(vectorize_effect(CMatrix::Identity(4, 4)), ch, vectorize_state(random_density(4, rng))) - 1.0) <
        1e-12);
}

TEST_CASE("signed permutations") {
  const auto& cl = single_qubit_cliffords();
  for (std::size_t i = 0; i < cl.size(); ++i) {
    const CMatrix dense = unitary_to_transfer(cl[i].unitary).matrix();
    const auto sp = SignedPermutation::from_matrix(dense, 1e-10);
    REQUIRE(sp.has_value());
    CHECK(*sp == cl[i].transfer);
    CHECK((sp->to_dense() - dense.real()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sp->trace() == int(std::lround(dense.trace().real())));
    CHECK((*sp * sp->inverse()).is_identity());
    for (std::size_t j = 0; j < cl.size(); ++j) {
      const RMatrix prod = (cl[i].transfer * cl[j].transfer).to_dense();
      CHECK((prod - cl[i].transfer.to_dense() * cl[j].transfer.to_dense()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  CHECK_FALSE(SignedPermutation::from_matrix(unitary_to_transfer(standard_gate("T")).matrix(), 1e-10).has_value());
}
