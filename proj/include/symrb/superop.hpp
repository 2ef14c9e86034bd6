#pragma once

// Pauli-Liouville representation of states, effects and channels.
//
// Basis index of a Pauli word w_0 w_1 ... w_{n-1} (qubit 0 is the leftmost
// tensor factor) is sum_q a_q 4^q with I=0, X=1, Y=2, Z=3.  Basis matrices are
// normalized to unit Hilbert-Schmidt norm.
//
// Channels act as U(rho) = U^dag rho U, so transfer(U V) = transfer(V) transfer(U).

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace symrb {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

std::size_t pauli_count(int n);
std::string pauli_word(std::size_t index, int n);
std::size_t pauli_index(const std::string& word);

// Throws ResourceLimitError above numeric_policy().max_qubits.
void check_qubit_limit(int n);
// log2 of a Hilbert-space dimension; throws ValidationError if not a power of two.
int qubits_for_dimension(Eigen::Index d);

std::vector<CMatrix> build_basis(int n);

class TransferMatrix {
 public:
  TransferMatrix() = default;
  explicit TransferMatrix(CMatrix m);

  static TransferMatrix identity(int n);

  const CMatrix& matrix() const { return m_; }
  int qubits() const { return n_; }
  Eigen::Index size() const { return m_.rows(); }
  int hilbert_dim() const { return 1 << n_; }

  TransferMatrix operator*(const TransferMatrix& rhs) const;
  Complex trace() const { return m_.trace(); }
  // Row 0 equals e_0^T.
  bool is_trace_preserving(double tol) const;
  bool is_real(double tol) const;
  RMatrix real() const { return m_.real(); }

 private:
  CMatrix m_;
  int n_ = 0;
};

struct StateVector {
  CVector coeffs;
  int qubits = 0;
};

struct EffectCovector {
  CVector coeffs;
  int qubits = 0;
};

TransferMatrix unitary_to_transfer(const CMatrix& u);
StateVector vectorize_state(const CMatrix& rho);
CMatrix devectorize(const StateVector& v);
EffectCovector vectorize_effect(const CMatrix& e);
// <E| M |rho), clamped to [0,1] after a slack check.
double expect(const EffectCovector& e, const TransferMatrix& m, const StateVector& rho);
double expect(const EffectCovector& e, const StateVector& rho);

bool is_unitary(const CMatrix& u, double tol);
bool is_hermitian(const CMatrix& m, double tol);

// Monomial matrix M with M e_k = sign[k] e_{image[k]}.  Transfer matrices of
// Clifford channels (and of all symmetry-group elements) have this form.
class SignedPermutation {
 public:
  SignedPermutation() = default;
  explicit SignedPermutation(std::size_t n);
  SignedPermutation(std::vector<std::uint32_t> image, std::vector<std::int8_t> sign);

  static std::optional<SignedPermutation> from_matrix(const CMatrix& m, double tol);

  std::size_t size() const { return image_.size(); }
  std::uint32_t image(std::size_t k) const { return image_[k]; }
  int sign(std::size_t k) const { return sign_[k]; }

  SignedPermutation operator*(const SignedPermutation& rhs) const;
  SignedPermutation inverse() const;
  int trace() const;
  bool is_identity() const;
  RMatrix to_dense() const;

  // out = M in
  template <class In, class Out>
  void apply(const In& in, Out& out) const {
    for (std::size_t k = 0; k < image_.size(); ++k) out[image_[k]] = in[k] * double(sign_[k]);
  }
  // acc += M^T L M
  void accumulate_conjugate(const CMatrix& l, CMatrix& acc) const;

  bool operator==(const SignedPermutation& o) const {
    return image_ == o.image_ && sign_ == o.sign_;
  }
  std::size_t hash() const;

 private:
  std::vector<std::uint32_t> image_;
  std::vector<std::int8_t> sign_;
};

struct SignedPermutationHash {
  std::size_t operator()(const SignedPermutation& p) const { return p.hash(); }
};

// Kronecker product helper used throughout.
CMatrix kron(const CMatrix& a, const CMatrix& b);

}  // namespace symrb
