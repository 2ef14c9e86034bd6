#pragma once

// Monte-Carlo simulation of the symmetry-benchmarking protocol, the exact
// average-channel oracle and the forward fitting models.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "symrb/channels.hpp"
#include "symrb/groups.hpp"
#include "symrb/superop.hpp"

namespace symrb {

// Irrep copy addressed by an initial state, written "label#copy".
struct SlotRef {
  std::string irrep;
  int copy = 0;
  std::string key() const { return irrep + "#" + std::to_string(copy); }
  static SlotRef parse(const std::string& text);
};

struct InitialState {
  std::string name;
  CMatrix rho;
  std::vector<SlotRef> targets;
};

enum class StateLibrary { SingleT, TwoT };

std::vector<InitialState> initial_state_library(StateLibrary which);

struct ExperimentConfig {
  GateSpec gate;
  NoiseModel noise = NoiseModel::hamiltonian(CMatrix::Zero(2, 2), CMatrix::Zero(2, 2), 0.0);
  std::optional<TransferMatrix> inversion_noise;
  std::vector<InitialState> states;
  // Empty: state i is measured with effect E_i = rho_i.
  std::vector<CMatrix> effects;
  std::vector<int> lengths;
  int sequences_per_length = 100;
  long shots = 0;  // 0 = exact probabilities
  std::uint64_t seed = 1;
  // Generators of local symmetry groups for multi-qubit factors, by factor index.
  std::vector<std::vector<CMatrix>> wide_locals;
};

// Maximum number of records a single experiment may produce.
constexpr std::size_t kMaxRecords = 50'000'000;

// Everything derived from a config: group, characters, noisy gate, vectors.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const SymmetryGroup& group() const { return *group_; }
  const CharacterTable& characters() const { return *table_; }
  const IrrepDecomposition& decomposition() const { return dec_; }
  const NoisyGate& gate() const { return gate_; }
  const TransferMatrix& twirled_noise() const { return twirled_; }
  const std::vector<StateVector>& states() const { return states_; }
  const std::vector<EffectCovector>& effects() const { return effects_; }
  int effect_for_state(int state) const;
  int hilbert_dim() const { return gate_.ideal.hilbert_dim(); }

  // Slots of the ideal gate: labels, dimensions and gate eigenvalues.
  const std::vector<Slot>& ideal_slots() const { return ideal_slots_; }
  // Slots with lambda taken from the twirled noise.
  const JointBasis& true_basis() const { return basis_; }

  double exact_fidelity() const { return average_fidelity_exact(gate_.noise); }

 private:
  ExperimentConfig config_;
  std::shared_ptr<SymmetryGroup> group_;
  std::shared_ptr<CharacterTable> table_;
  IrrepDecomposition dec_;
  NoisyGate gate_;
  TransferMatrix twirled_;
  std::vector<StateVector> states_;
  std::vector<EffectCovector> effects_;
  std::vector<Slot> ideal_slots_;
  JointBasis basis_;
};

struct SequenceOutcome {
  int length = 0;
  int seq_id = 0;
  int state_id = 0;
  int effect_id = 0;
  double survival = 0.0;
  long shots = 0;
  std::uint64_t seed = 0;
};

struct ExperimentDataset {
  static constexpr int kSchemaVersion = 1;
  std::string config_json;  // canonical experiment config snapshot
  std::string config_hash;
  std::vector<SequenceOutcome> records;
};

std::uint64_t record_seed(std::uint64_t master, int length, int seq_id, int state_id);

std::vector<int> draw_sequence(int length, std::size_t group_size, std::mt19937_64& rng);

// Lambda' G_inv U~ G_{k_l} ... U~ G_{k_1}
TransferMatrix compile_sequence(const std::vector<int>& seq, const NoisyGate& gate, const SymmetryGroup& g);
// Group element G_{k_l} o ... o G_{k_1}
int sequence_product(const std::vector<int>& seq, const SymmetryGroup& g);

// Runs the experiment; `config_json` and `config_hash` are copied into the dataset.
ExperimentDataset run_experiment(const Experiment& exp, const std::string& config_json = "",
                                 const std::string& config_hash = "", unsigned threads = 0);

double sequence_average(const ExperimentDataset& data, int length, int state);

struct Series {
  int state = 0;
  std::vector<int> lengths;
  std::vector<double> values;
};

// F_seq(l) for every length present, sorted by length.
Series survival_series(const ExperimentDataset& data, int state);
std::vector<int> dataset_states(const ExperimentDataset& data);

// <E| Lambda' (Lambda^G U)^l |rho)
double exact_average_oracle(const Experiment& exp, int length, int state, int effect);
Series exact_series(const Experiment& exp, int state, const std::vector<int>& lengths);

struct FittingModel {
  std::vector<Complex> lambdas;
  std::vector<Complex> eigenvalues;
  std::vector<Complex> xi;
  CMatrix zeta;  // first-order couplings, empty for zeroth order
};

double model_predict(int order, const FittingModel& model, int length);
// lambda, d, xi and zeta from the joint basis of the experiment.
FittingModel true_fitting_model(const Experiment& exp, int state, double support_tol = 1e-12);

double variance_bound(int d, int length, double r);

}  // namespace symrb
