#include "symrb/superop.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "symrb/errors.hpp"
#include "symrb/numeric_policy.hpp"

namespace symrb {

namespace {

NumericPolicy& mutable_policy() {
  static NumericPolicy policy;
  return policy;
}

// Unnormalized Pauli string stored as one entry per row: P[r, col[r]] = phase[r].
struct SparsePauli {
  std::vector<int> col;
  std::vector<Complex> phase;
};

SparsePauli sparse_pauli(std::size_t index, int n) {
  const int d = 1 << n;
  SparsePauli p{std::vector<int>(d), std::vector<Complex>(d, 1.0)};
  for (int r = 0; r < d; ++r) {
    int c = r;
    Complex ph = 1.0;
    for (int q = 0; q < n; ++q) {
      const int a = int((index >> (2 * q)) & 3u);
      const int shift = n - 1 - q;
      const int bit = (r >> shift) & 1;
      switch (a) {
        case 1:
          c ^= 1 << shift;
          break;
        case 2:
          c ^= 1 << shift;
          ph *= bit ? Complex(0, 1) : Complex(0, -1);
          break;
        case 3:
          if (bit) ph = -ph;
          break;
        default:
          break;
      }
    }
    p.col[r] = c;
    p.phase[r] = ph;
  }
  return p;
}

const std::vector<SparsePauli>& sparse_basis(int n) {
  static std::vector<std::vector<SparsePauli>> cache(9);
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto& entry = cache.at(std::size_t(n));
  if (entry.empty()) {
    const std::size_t count = pauli_count(n);
    entry.reserve(count);
    for (std::size_t j = 0; j < count; ++j) entry.push_back(sparse_pauli(j, n));
  }
  return entry;
}

}  // namespace

const NumericPolicy& numeric_policy() { return mutable_policy(); }
void set_numeric_policy(const NumericPolicy& policy) { mutable_policy() = policy; }

std::size_t pauli_count(int n) { return std::size_t(1) << (2 * n); }

std::string pauli_word(std::size_t index, int n) {
  static const char letters[] = {'I', 'X', 'Y', 'Z'};
  if (index >= pauli_count(n)) throw ValidationError("Pauli index out of range");
  std::string w(n, 'I');
  for (int q = 0; q < n; ++q) w[q] = letters[(index >> (2 * q)) & 3u];
  return w;
}

std::size_t pauli_index(const std::string& word) {
  std::size_t idx = 0;
  for (std::size_t q = 0; q < word.size(); ++q) {
    std::size_t a;
    switch (word[q]) {
      case 'I': a = 0; break;
      case 'X': a = 1; break;
      case 'Y': a = 2; break;
      case 'Z': a = 3; break;
      default: throw ValidationError("invalid Pauli letter in '" + word + "'");
    }
    idx |= a << (2 * q);
  }
  return idx;
}

void check_qubit_limit(int n) {
  if (n < 1) throw ValidationError("qubit count must be at least 1");
  if (n > numeric_policy().max_qubits)
    throw ResourceLimitError("qubit count " + std::to_string(n) + " exceeds limit " +
                             std::to_string(numeric_policy().max_qubits));
}

int qubits_for_dimension(Eigen::Index d) {
  int n = 0;
  while ((Eigen::Index(1) << n) < d) ++n;
  if ((Eigen::Index(1) << n) != d || n == 0)
    throw ValidationError("dimension " + std::to_string(d) + " is not a power of two");
  return n;
}

std::vector<CMatrix> build_basis(int n) {
  check_qubit_limit(n);
  const int d = 1 << n;
  const double norm = 1.0 / std::sqrt(double(d));
  const auto& sp = sparse_basis(n);
  std::vector<CMatrix> out;
  out.reserve(sp.size());
  for (const auto& p : sp) {
    CMatrix m = CMatrix::Zero(d, d);
    for (int r = 0; r < d; ++r) m(r, p.col[r]) = p.phase[r] * norm;
    out.push_back(std::move(m));
  }
  return out;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool is_unitary(const CMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  return ((u.adjoint() * u) - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------

TransferMatrix::TransferMatrix(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw ValidationError("transfer matrix must be square");
  int n = 0;
  while (Eigen::Index(pauli_count(n)) < m_.rows()) ++n;
  if (Eigen::Index(pauli_count(n)) != m_.rows() || n == 0)
    throw ValidationError("transfer matrix size must be 4^n");
  n_ = n;
}

TransferMatrix TransferMatrix::identity(int n) {
  check_qubit_limit(n);
  const auto s = Eigen::Index(pauli_count(n));
  return TransferMatrix(CMatrix::Identity(s, s));
}

TransferMatrix TransferMatrix::operator*(const TransferMatrix& rhs) const {
  if (rhs.size() != size()) throw ValidationError("transfer matrix dimension mismatch");
  return TransferMatrix(m_ * rhs.m_);
}

bool TransferMatrix::is_trace_preserving(double tol) const {
  for (Eigen::Index k = 0; k < m_.cols(); ++k) {
    const Complex want = k == 0 ? 1.0 : 0.0;
    if (std::abs(m_(0, k) - want) > tol) return false;
  }
  return true;
}

bool TransferMatrix::is_real(double tol) const { return m_.imag().cwiseAbs().maxCoeff() <= tol; }

TransferMatrix unitary_to_transfer(const CMatrix& u) {
  const int n = qubits_for_dimension(u.rows());
  check_qubit_limit(n);
  if (!is_unitary(u, numeric_policy().equality_tol))
    throw ValidationError("unitary_to_transfer: input is not unitary");
  const int d = 1 << n;
  const auto& sp = sparse_basis(n);
  const auto count = Eigen::Index(sp.size());
  CMatrix m(count, count);
  CMatrix pu(d, d);
  const CMatrix ud = u.adjoint();
  for (Eigen::Index k = 0; k < count; ++k) {
    const auto& pk = sp[k];
    for (int r = 0; r < d; ++r) pu.row(r) = pk.phase[r] * u.row(pk.col[r]);
    const CMatrix w = ud * pu;  // U^dag P_k U
    for (Eigen::Index j = 0; j < count; ++j) {
      const auto& pj = sp[j];
      Complex acc = 0.0;
      for (int r = 0; r < d; ++r) acc += pj.phase[r] * w(pj.col[r], r);
      m(j, k) = acc / double(d);
    }
  }
  return TransferMatrix(std::move(m));
}

StateVector vectorize_state(const CMatrix& rho) {
  const int n = qubits_for_dimension(rho.rows());
  check_qubit_limit(n);
  const double tol = numeric_policy().equality_tol;
  if (!is_hermitian(rho, tol)) throw ValidationError("state is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > tol) throw ValidationError("state trace is not 1");
  const int d = 1 << n;
  const auto& sp = sparse_basis(n);
  StateVector v{CVector(Eigen::Index(sp.size())), n};
  const double norm = 1.0 / std::sqrt(double(d));
  for (std::size_t j = 0; j < sp.size(); ++j) {
    Complex acc = 0.0;
    for (int r = 0; r < d; ++r) acc += sp[j].phase[r] * rho(sp[j].col[r], r);
    v.coeffs[Eigen::Index(j)] = acc * norm;
  }
  return v;
}

CMatrix devectorize(const StateVector& v) {
  const auto basis = build_basis(v.qubits);
  if (Eigen::Index(basis.size()) != v.coeffs.size()) throw ValidationError("state vector size mismatch");
  const int d = 1 << v.qubits;
  CMatrix rho = CMatrix::Zero(d, d);
  for (std::size_t j = 0; j < basis.size(); ++j) rho += v.coeffs[Eigen::Index(j)] * basis[j];
  return rho;
}

EffectCovector vectorize_effect(const CMatrix& e) {
  const int n = qubits_for_dimension(e.rows());
  check_qubit_limit(n);
  const double tol = numeric_policy().equality_tol;
  if (!is_hermitian(e, tol)) throw ValidationError("effect is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(e);
  const double slack = numeric_policy().probability_slack;
  if (es.eigenvalues().minCoeff() < -slack || es.eigenvalues().maxCoeff() > 1.0 + slack)
    throw ValidationError("effect eigenvalues outside [0,1]");
  const int d = 1 << n;
  const auto& sp = sparse_basis(n);
  EffectCovector c{CVector(Eigen::Index(sp.size())), n};
  const double norm = 1.0 / std::sqrt(double(d));
  for (std::size_t j = 0; j < sp.size(); ++j) {
    Complex acc = 0.0;
    for (int r = 0; r < d; ++r) acc += sp[j].phase[r] * e(sp[j].col[r], r);
    c.coeffs[Eigen::Index(j)] = acc * norm;
  }
  return c;
}

namespace {
double clamp_probability(Complex p) { return std::clamp(p.real(), 0.0, 1.0); }
}  // namespace

double expect(const EffectCovector& e, const TransferMatrix& m, const StateVector& rho) {
  if (e.coeffs.size() != m.size() || rho.coeffs.size() != m.size())
    throw ValidationError("expect: dimension mismatch");
  return clamp_probability(e.coeffs.transpose() * (m.matrix() * rho.coeffs));
}

double expect(const EffectCovector& e, const StateVector& rho) {
  if (e.coeffs.size() != rho.coeffs.size()) throw ValidationError("expect: dimension mismatch");
  return clamp_probability(e.coeffs.transpose() * rho.coeffs);
}

// ---------------------------------------------------------------------------

SignedPermutation::SignedPermutation(std::size_t n) : image_(n), sign_(n, 1) {
  for (std::size_t k = 0; k < n; ++k) image_[k] = std::uint32_t(k);
}

SignedPermutation::SignedPermutation(std::vector<std::uint32_t> image, std::vector<std::int8_t> sign)
    : image_(std::move(image)), sign_(std::move(sign)) {
  if (image_.size() != sign_.size()) throw ValidationError("signed permutation size mismatch");
  std::vector<bool> seen(image_.size(), false);
  for (auto i : image_) {
    if (i >= image_.size() || seen[i]) throw ValidationError("signed permutation image is not a bijection");
    seen[i] = true;
  }
}

std::optional<SignedPermutation> SignedPermutation::from_matrix(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return std::nullopt;
  const auto n = std::size_t(m.cols());
  std::vector<std::uint32_t> image(n);
  std::vector<std::int8_t> sign(n);
  std::vector<bool> used(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    int found = -1;
    for (std::size_t r = 0; r < n; ++r) {
      const Complex v = m(Eigen::Index(r), Eigen::Index(k));
      if (std::abs(v) <= tol) continue;
      if (found >= 0 || std::abs(v.imag()) > tol || std::abs(std::abs(v.real()) - 1.0) > tol) return std::nullopt;
      found = int(r);
      sign[k] = v.real() > 0 ? 1 : -1;
    }
    if (found < 0 || used[std::size_t(found)]) return std::nullopt;
    used[std::size_t(found)] = true;
    image[k] = std::uint32_t(found);
  }
  return SignedPermutation(std::move(image), std::move(sign));
}

SignedPermutation SignedPermutation::operator*(const SignedPermutation& rhs) const {
  if (rhs.size() != size()) throw ValidationError("signed permutation size mismatch");
  SignedPermutation out;
  out.image_.resize(size());
  out.sign_.resize(size());
  for (std::size_t k = 0; k < size(); ++k) {
    const auto mid = rhs.image_[k];
    out.image_[k] = image_[mid];
    out.sign_[k] = std::int8_t(rhs.sign_[k] * sign_[mid]);
  }
  return out;
}

SignedPermutation SignedPermutation::inverse() const {
  SignedPermutation out;
  out.image_.resize(size());
  out.sign_.resize(size());
  for (std::size_t k = 0; k < size(); ++k) {
    out.image_[image_[k]] = std::uint32_t(k);
    out.sign_[image_[k]] = sign_[k];
  }
  return out;
}

int SignedPermutation::trace() const {
  int t = 0;
  for (std::size_t k = 0; k < size(); ++k)
    if (image_[k] == k) t += sign_[k];
  return t;
}

bool SignedPermutation::is_identity() const {
  for (std::size_t k = 0; k < size(); ++k)
    if (image_[k] != k || sign_[k] != 1) return false;
  return true;
}

RMatrix SignedPermutation::to_dense() const {
  RMatrix m = RMatrix::Zero(Eigen::Index(size()), Eigen::Index(size()));
  for (std::size_t k = 0; k < size(); ++k) m(image_[k], Eigen::Index(k)) = sign_[k];
  return m;
}

void SignedPermutation::accumulate_conjugate(const CMatrix& l, CMatrix& acc) const {
  const auto n = Eigen::Index(size());
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto pj = Eigen::Index(image_[std::size_t(j)]);
    const double sj = sign_[std::size_t(j)];
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto pi = Eigen::Index(image_[std::size_t(i)]);
      acc(i, j) += (sj * sign_[std::size_t(i)]) * l(pi, pj);
    }
  }
}

std::size_t SignedPermutation::hash() const {
  std::size_t h = 1469598103934665603ull;
  for (std::size_t k = 0; k < size(); ++k) {
    h ^= (std::size_t(image_[k]) << 1) | (sign_[k] < 0 ? 1u : 0u);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace symrb
