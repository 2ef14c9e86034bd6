#include "symrb/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "symrb/errors.hpp"
#include "symrb/numeric_policy.hpp"

namespace symrb {

namespace {
constexpr double kPi = 3.14159265358979323846;
const Complex kI(0.0, 1.0);

CMatrix pauli(char p) {
  CMatrix m(2, 2);
  switch (p) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -kI, kI, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m = CMatrix::Identity(2, 2);
  }
  return m;
}
}  // namespace

CMatrix standard_gate(const std::string& name, std::optional<double> theta) {
  const bool rotation = name == "RX" || name == "RY" || name == "RZ";
  if (rotation != theta.has_value())
    throw ValidationError(rotation ? "gate " + name + " needs an angle" : "gate " + name + " takes no angle");
  if (rotation) return hermitian_exp(pauli(name[1]), *theta / 2.0);
  if (name == "I" || name == "X" || name == "Y" || name == "Z") return pauli(name[0]);
  CMatrix m(2, 2);
  if (name == "H") {
    const double r = 1.0 / std::sqrt(2.0);
    m << r, r, r, -r;
    return m;
  }
  if (name == "S") {
    m << 1, 0, 0, kI;
    return m;
  }
  if (name == "T") {
    m << std::polar(1.0, -kPi / 8), 0, 0, std::polar(1.0, kPi / 8);
    return m;
  }
  if (name == "CNOT") {
    CMatrix c = CMatrix::Zero(4, 4);
    c(0, 0) = c(1, 1) = c(2, 3) = c(3, 2) = 1.0;
    return c;
  }
  throw ValidationError("unknown gate '" + name + "'");
}

std::string GateFactor::display() const {
  if (!theta) return name;
  std::ostringstream os;
  os.precision(17);
  os << name << "(" << *theta << ")";
  return os.str();
}

Layout GateSpec::layout() const {
  std::vector<std::pair<std::string, CMatrix>> f;
  for (const auto& g : factors) f.emplace_back(g.display(), standard_gate(g.name, g.theta));
  return Layout(std::move(f));
}

CMatrix GateSpec::unitary() const { return layout().unitary(); }

std::string GateSpec::display() const {
  std::string s;
  for (std::size_t i = 0; i < factors.size(); ++i) s += (i ? "," : "") + factors[i].display();
  return s;
}

GateSpec GateSpec::parse(const std::string& text) {
  GateSpec spec;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
    if (tok.empty()) throw ValidationError("empty gate factor in '" + text + "'");
    GateFactor f;
    const auto open = tok.find('(');
    if (open == std::string::npos) {
      f.name = tok;
    } else {
      if (tok.back() != ')') throw ValidationError("malformed gate factor '" + tok + "'");
      f.name = tok.substr(0, open);
      try {
        f.theta = std::stod(tok.substr(open + 1, tok.size() - open - 2));
      } catch (const std::exception&) {
        throw ValidationError("malformed angle in '" + tok + "'");
      }
    }
    standard_gate(f.name, f.theta);  // validates the name
    spec.factors.push_back(f);
  }
  if (spec.factors.empty()) throw ValidationError("empty gate specification");
  return spec;
}

GateSpec GateSpec::copies(const std::string& name, int n) {
  GateSpec spec;
  for (int i = 0; i < n; ++i) spec.factors.push_back({name, std::nullopt});
  return spec;
}

CMatrix hermitian_exp(const CMatrix& h, double t) {
  if (!is_hermitian(h, numeric_policy().equality_tol)) throw ValidationError("generator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  CVector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases[i] = std::polar(1.0, -t * es.eigenvalues()[i]);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// ---------------------------------------------------------------------------

NoiseModel NoiseModel::hamiltonian(CMatrix h0, CMatrix v, double epsilon) {
  const double tol = numeric_policy().equality_tol;
  if (!is_hermitian(h0, tol) || !is_hermitian(v, tol)) throw ValidationError("noise generator is not Hermitian");
  if (h0.rows() != v.rows()) throw ValidationError("generator and perturbation dimensions differ");
  NoiseModel m;
  m.kind_ = Kind::Hamiltonian;
  m.h0_ = std::move(h0);
  m.v_ = std::move(v);
  m.epsilon_ = epsilon;
  return m;
}

NoiseModel NoiseModel::explicit_channel(TransferMatrix lambda) {
  if (!lambda.is_trace_preserving(numeric_policy().equality_tol))
    throw ValidationError("explicit noise channel is not trace preserving");
  NoiseModel m;
  m.kind_ = Kind::Explicit;
  m.channel_ = std::move(lambda);
  return m;
}

NoiseModel single_t_noise(double epsilon) {
  return NoiseModel::hamiltonian(kPi / 8 * pauli('Z'), -pauli('X'), epsilon);
}

NoiseModel two_t_noise(double epsilon) {
  const CMatrix id = CMatrix::Identity(2, 2);
  const CMatrix h0 = kPi / 8 * (kron(pauli('Z'), id) + kron(id, pauli('Z')));
  const CMatrix v = -kPi / 8 * kron(pauli('X'), pauli('X'));
  return NoiseModel::hamiltonian(h0, v, epsilon);
}

NoisyGate perturbed_gate(const NoiseModel& model, const GateSpec& spec, std::optional<TransferMatrix> inversion_noise) {
  const double tol = numeric_policy().equality_tol;
  NoisyGate out;
  out.ideal = unitary_to_transfer(spec.unitary());
  const CMatrix ideal_inv = out.ideal.matrix().adjoint();
  if (model.kind() == NoiseModel::Kind::Hamiltonian) {
    if (model.generator().rows() != spec.unitary().rows())
      throw ValidationError("noise generator dimension does not match the gate");
    const TransferMatrix generated = unitary_to_transfer(hermitian_exp(model.generator()));
    if ((generated.matrix() - out.ideal.matrix()).cwiseAbs().maxCoeff() > 1e-9)
      throw ValidationError("noise generator does not reproduce the ideal gate at zero strength");
    out.implemented =
        unitary_to_transfer(hermitian_exp(model.generator() + model.epsilon() * model.perturbation()));
    out.noise = TransferMatrix(out.implemented.matrix() * ideal_inv);
  } else {
    if (model.channel().size() != out.ideal.size()) throw ValidationError("noise channel dimension mismatch");
    out.noise = model.channel();
    out.implemented = out.noise * out.ideal;
  }
  if (inversion_noise) {
    if (inversion_noise->size() != out.ideal.size()) throw ValidationError("inversion noise dimension mismatch");
    if (!inversion_noise->is_trace_preserving(tol)) throw ValidationError("inversion noise is not trace preserving");
    out.inversion_noise = *inversion_noise;
  } else {
    out.inversion_noise = TransferMatrix::identity(out.ideal.qubits());
  }
  return out;
}

TransferMatrix twirl(const TransferMatrix& lambda, const SymmetryGroup& g) {
  if (lambda.qubits() != g.num_qubits()) throw ValidationError("twirl: dimension mismatch");
  CMatrix acc = CMatrix::Zero(lambda.size(), lambda.size());
  for (int e = 0; e < int(g.size()); ++e) g.transfer(e).accumulate_conjugate(lambda.matrix(), acc);
  return TransferMatrix(acc / double(g.size()));
}

double entanglement_fidelity(const TransferMatrix& lambda) {
  const double d = lambda.hilbert_dim();
  return lambda.trace().real() / (d * d);
}

double average_fidelity_exact(const TransferMatrix& lambda) {
  const double d = lambda.hilbert_dim();
  return (lambda.trace().real() + d) / (d * (d + 1));
}

double fidelity_from_lambdas(const std::vector<Complex>& lambdas, int d) {
  Complex s = std::accumulate(lambdas.begin(), lambdas.end(), Complex(0.0));
  return (s.real() + d) / (double(d) * (d + 1));
}

double chi00(const TransferMatrix& lambda) { return entanglement_fidelity(lambda); }

// ---------------------------------------------------------------------------

const Slot& JointBasis::slot(const std::string& key) const {
  for (const auto& s : slots)
    if (s.key() == key) return s;
  throw ValidationError("unknown slot '" + key + "'");
}

JointBasis joint_basis(const TransferMatrix& twirled_noise, const TransferMatrix& ideal, const SymmetryGroup& g,
                       const CharacterTable& table, const IrrepDecomposition& dec) {
  const Eigen::Index dim = ideal.size();
  if (twirled_noise.size() != dim || Eigen::Index(pauli_count(g.num_qubits())) != dim)
    throw ValidationError("joint_basis: dimension mismatch");
  JointBasis out;
  out.vectors.resize(dim, dim);
  Eigen::Index col = 0;
  for (const auto& comp : dec.components) {
    const CMatrix p = irrep_projector(g, table, comp.irrep);
    Eigen::SelfAdjointEigenSolver<CMatrix> es((p + p.adjoint()) / 2.0);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < dim; ++i)
      if (es.eigenvalues()[i] > 0.5) keep.push_back(i);
    if (int(keep.size()) != comp.dim * comp.multiplicity)
      throw ConsistencyError("projector rank differs from m*d for " + comp.label);
    CMatrix q(dim, Eigen::Index(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) q.col(Eigen::Index(i)) = es.eigenvectors().col(keep[i]);

    const CMatrix u = q.adjoint() * ideal.matrix() * q;
    Eigen::ComplexEigenSolver<CMatrix> ues(u);
    std::vector<Complex> ev(ues.eigenvalues().data(), ues.eigenvalues().data() + ues.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) { return std::arg(a) < std::arg(b); });
    std::vector<std::pair<Complex, int>> clusters;
    for (const auto& z : ev) {
      if (!clusters.empty() && std::abs(z - clusters.back().first) < 1e-6) {
        ++clusters.back().second;
      } else {
        clusters.emplace_back(z, 1);
      }
    }
    int copy = 0;
    for (const auto& [mu0, k] : clusters) {
      const Complex mu = std::polar(1.0, std::arg(mu0));
      if (k % comp.dim != 0) throw ConsistencyError("gate eigenspace is not a union of irrep copies");
      const Eigen::Index m = u.rows();
      Eigen::JacobiSVD<CMatrix> svd(u - mu * CMatrix::Identity(m, m), Eigen::ComputeFullV);
      const CMatrix e = q * svd.matrixV().rightCols(k);
      Eigen::ComplexSchur<CMatrix> schur(e.adjoint() * twirled_noise.matrix() * e);
      const CMatrix cols = e * schur.matrixU();
      const CMatrix& t = schur.matrixT();
      std::vector<int> order(static_cast<std::size_t>(k));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const Complex ta = t(a, a), tb = t(b, b);
        if (std::abs(ta.real() - tb.real()) > 1e-12) return ta.real() > tb.real();
        return ta.imag() > tb.imag();
      });
      for (int s = 0; s < k / comp.dim; ++s) {
        Slot slot;
        slot.irrep = comp.irrep;
        slot.label = comp.label;
        slot.copy = copy++;
        slot.dim = comp.dim;
        slot.gate_eigenvalue = mu;
        Complex sum = 0.0;
        for (int j = 0; j < comp.dim; ++j) {
          const int c = order[std::size_t(s * comp.dim + j)];
          sum += t(c, c);
          out.vectors.col(col) = cols.col(c);
          out.column_slot.push_back(int(out.slots.size()));
          ++col;
        }
        slot.lambda = sum / double(comp.dim);
        out.slots.push_back(slot);
      }
    }
  }
  if (col != dim) throw ConsistencyError("joint basis does not span the full space");
  return out;
}

double joint_diag_score(const TransferMatrix& m, const JointBasis& basis) {
  const CMatrix b = basis.vectors.adjoint() * m.matrix() * basis.vectors;
  const double diag = b.diagonal().norm();
  const double total = b.norm();
  const double off = std::sqrt(std::max(0.0, total * total - diag * diag));
  return diag > 0 ? off / diag : 0.0;
}

// ---------------------------------------------------------------------------

bool gate_error_feasible(double x, double c, double n) {
  const double bound = 2.0 * std::sqrt(std::max(0.0, (1 - x) * x * (1 - n) * n)) + (1 - x) * (1 - n);
  return std::abs(c - x * n) <= bound + 1e-15;
}

Interval gate_error_bound(double c, double n) {
  if (c < 0 || c > 1 || n < 0 || n > 1) throw ValidationError("chi00 values must lie in [0,1]");
  double x0 = n > 0 ? std::min(c / n, 1.0) : 0.0;
  if (!gate_error_feasible(x0, c, n)) {
    bool found = false;
    for (int i = 0; i <= 100000 && !found; ++i) {
      const double x = i / 100000.0;
      if (gate_error_feasible(x, c, n)) {
        x0 = x;
        found = true;
      }
    }
    if (!found) throw ConsistencyError("gate error bound: no feasible chi00");
  }
  Interval out{x0, x0};
  if (gate_error_feasible(0.0, c, n)) {
    out.lo = 0.0;
  } else {
    double a = 0.0, b = x0;  // a infeasible, b feasible
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      (gate_error_feasible(mid, c, n) ? b : a) = mid;
    }
    out.lo = b;
  }
  if (gate_error_feasible(1.0, c, n)) {
    out.hi = 1.0;
  } else {
    double a = x0, b = 1.0;  // a feasible, b infeasible
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      (gate_error_feasible(mid, c, n) ? a : b) = mid;
    }
    out.hi = a;
  }
  return out;
}

}  // namespace symrb
