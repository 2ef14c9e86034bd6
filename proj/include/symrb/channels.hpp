#pragma once

// Gate library, Hamiltonian-perturbation noise, twirling and fidelity formulas.

#include <optional>
#include <string>
#include <vector>

#include "symrb/groups.hpp"
#include "symrb/superop.hpp"

namespace symrb {

// I, X, Y, Z, H, S, T, CNOT, RX, RY, RZ.  Rotations are exp(-i theta P / 2).
CMatrix standard_gate(const std::string& name, std::optional<double> theta = std::nullopt);

struct GateFactor {
  std::string name;
  std::optional<double> theta;
  std::string display() const;
};

struct GateSpec {
  std::vector<GateFactor> factors;

  Layout layout() const;
  CMatrix unitary() const;
  std::string display() const;
  // "T,T" or "RZ(0.3),H".
  static GateSpec parse(const std::string& text);
  static GateSpec copies(const std::string& name, int n);
};

// exp(-i t H) for Hermitian H.
CMatrix hermitian_exp(const CMatrix& h, double t = 1.0);

class NoiseModel {
 public:
  enum class Kind { Hamiltonian, Explicit };

  // Implemented gate exp(-i (h0 + eps v)).
  static NoiseModel hamiltonian(CMatrix h0, CMatrix v, double epsilon);
  // Implemented gate channel lambda * ideal.
  static NoiseModel explicit_channel(TransferMatrix lambda);

  Kind kind() const { return kind_; }
  double epsilon() const { return epsilon_; }
  const CMatrix& generator() const { return h0_; }
  const CMatrix& perturbation() const { return v_; }
  const TransferMatrix& channel() const { return channel_; }

 private:
  Kind kind_ = Kind::Explicit;
  CMatrix h0_, v_;
  double epsilon_ = 0.0;
  TransferMatrix channel_;
};

// pi/8 Z - eps X
NoiseModel single_t_noise(double epsilon);
// pi/8 (ZI + IZ - eps XX)
NoiseModel two_t_noise(double epsilon);

struct NoisyGate {
  TransferMatrix ideal;        // U
  TransferMatrix implemented;  // U~ = Lambda U
  TransferMatrix noise;        // Lambda
  TransferMatrix inversion_noise;
};

NoisyGate perturbed_gate(const NoiseModel& model, const GateSpec& spec,
                         std::optional<TransferMatrix> inversion_noise = std::nullopt);

// |G|^-1 sum_g g^T Lambda g
TransferMatrix twirl(const TransferMatrix& lambda, const SymmetryGroup& g);

double entanglement_fidelity(const TransferMatrix& lambda);
double average_fidelity_exact(const TransferMatrix& lambda);
double fidelity_from_lambdas(const std::vector<Complex>& lambdas, int d);
double chi00(const TransferMatrix& lambda);

// One (irrep, copy) pair of the decomposition together with the target-gate
// eigenvalue on it and the corresponding diagonal value of the twirled noise.
struct Slot {
  std::size_t irrep = 0;
  std::string label;
  int copy = 0;
  int dim = 1;
  Complex gate_eigenvalue = 1.0;
  Complex lambda = 1.0;
  std::string key() const { return label + "#" + std::to_string(copy); }
};

// Unitary basis diagonalizing the ideal gate channel, refined per irrep and
// triangularizing the twirled noise inside degenerate eigenspaces.
struct JointBasis {
  CMatrix vectors;
  std::vector<int> column_slot;
  std::vector<Slot> slots;

  const Slot& slot(const std::string& key) const;
};

JointBasis joint_basis(const TransferMatrix& twirled_noise, const TransferMatrix& ideal, const SymmetryGroup& g,
                       const CharacterTable& table, const IrrepDecomposition& dec);

// |offdiag(V^dag M V)|_F / |diag(V^dag M V)|_F
double joint_diag_score(const TransferMatrix& m, const JointBasis& basis);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Feasible chi00 of the target noise given chi00 of (target noise o symmetry
// noise) and of the symmetry noise alone.
Interval gate_error_bound(double chi00_composite, double chi00_symmetry);
bool gate_error_feasible(double x, double chi00_composite, double chi00_symmetry);

}  // namespace symrb
