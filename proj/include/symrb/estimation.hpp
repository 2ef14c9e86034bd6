#pragma once

// Matrix-pencil pole extraction with period subsampling, slot assignment,
// fidelity assembly and bootstrap intervals.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "symrb/protocol.hpp"
#include "symrb/superop.hpp"

namespace symrb {

// Entry (i, k) = series[i + k]; shape (N - P) x (P + 1).
RMatrix build_hankel(const std::vector<double>& series, int pencil);

enum class RankPolicy {
  Significance,  // expected count, then drop poles whose amplitude is not significant
  NoiseFloor,  // count singular values above noise_floor * median of the tail
  Theory,      // expected count
  Fixed,       // fixed_rank
  Threshold,   // sigma > sigma_rel * sigma_1
};

struct PencilConfig {
  RankPolicy policy = RankPolicy::Significance;
  int expected = 0;  // pole count predicted from the decomposition; 0 = use the threshold
  int fixed_rank = 0;
  double noise_floor = 1.5;
  double sigma_rel = 1e-3;     // Threshold policy
  double sigma_floor = 1e-10;  // relative cut applied by every policy
  double significance = 5.0;   // minimum amplitude z-score, Significance policy
};

struct PoleSet {
  std::vector<Complex> poles;
  std::vector<double> singular_values;
  std::vector<double> z_scores;  // amplitude significance per pole, when computed
};

int select_rank(const std::vector<double>& sv, const PencilConfig& cfg);

// Poles from the shift invariance of the right singular vectors.
PoleSet esprit_poles(const RMatrix& hankel, const PencilConfig& cfg);
// Several Hankels sharing their poles, stacked side by side; uses the left
// singular vectors, which are common to all blocks.
PoleSet esprit_poles_stacked(const std::vector<RMatrix>& hankels, const PencilConfig& cfg);

// Poles shared by one or more series of equal length.  With several series
// the Hankels are stacked; with one, the right singular vectors are used.
// Known poles are projected out of the Hankels and kept in the significance fits.
PoleSet extract_poles(const std::vector<std::vector<double>>& series, int pencil, const PencilConfig& cfg,
                      const std::vector<Complex>& known = {});

// Amplitude z-scores of each pole, from a joint least-squares fit of all series.
std::vector<double> pole_significance(const std::vector<std::vector<double>>& series, const std::vector<Complex>& poles);

// Sub-series r = 0..tau-1 holding series[r], series[r + tau], ..., truncated to equal length.
std::vector<std::vector<double>> period_subsample(const std::vector<double>& series, int tau);
// |x|^(1/tau) exp(i arg(x) / tau); imaginary parts below 1e-6 are dropped.
Complex tau_root(Complex x, int tau);
// Smallest tau <= tau_max with d^tau = 1 for every eigenvalue.
int find_period(const std::vector<Complex>& eigenvalues, int tau_max = 64, double tol = 1e-10);
bool has_period(const std::vector<Complex>& eigenvalues, int tau, double tol = 1e-10);

struct AmplitudeFit {
  std::vector<Complex> amplitudes;
  double residual = 0.0;  // RMS misfit
  double condition = 1.0;
  bool ill_conditioned = false;
};

// Least squares for values[i] ~ sum_j xi_j poles_j^lengths[i].
AmplitudeFit fit_amplitudes(const std::vector<int>& lengths, const std::vector<double>& values,
                            const std::vector<Complex>& poles);

struct SlotSpec {
  std::string key;
  int dim = 1;
  Complex gate_eigenvalue = 1.0;
};

struct StateSpec {
  int state_id = 0;
  std::string name;
  std::vector<std::string> targets;  // slot keys
};

// What the estimator needs to know about an experiment.
struct EstimationModel {
  int hilbert_dim = 2;
  std::vector<SlotSpec> slots;
  std::vector<StateSpec> states;

  const SlotSpec& slot(const std::string& key) const;
};

EstimationModel estimation_model(const Experiment& exp);

struct EstimationOptions {
  int tau = 0;  // 0: smallest period of the gate eigenvalues
  double pencil_fraction = 1.0 / 3.0;
  int pencil = 0;  // overrides pencil_fraction when positive
  PencilConfig rank;
  bool multichannel = true;
  // Project out poles of slots fixed by earlier states before the pencil.
  bool deflate_known = true;
  std::vector<int> states;  // subset of state ids to use, empty = all
};

struct StatePoles {
  int state_id = 0;
  std::vector<Complex> poles;  // subsampled poles (lambda d)^(tau * step) of the new slots
  std::vector<Complex> deflated;  // known poles projected out first
  std::vector<double> singular_values;
  int expected = 0;
  bool partial = false;
  std::map<std::string, Complex> assigned;
};

struct LambdaEstimate {
  int tau = 1;
  int step = 1;
  std::vector<StatePoles> states;
  std::map<std::string, Complex> lambdas;
  bool partial = false;
};

LambdaEstimate estimate_lambdas(const std::vector<Series>& series, const EstimationModel& model,
                                const EstimationOptions& opts);

struct Assembly {
  Complex sum_lambda = 0.0;
  double fidelity = 0.0;
};

// Every slot of the model must be present exactly once in `lambdas`.
Assembly assemble_fidelity(const std::map<std::string, Complex>& lambdas, const EstimationModel& model);

// Survivals grouped by state and length, in record order.
struct SurvivalTable {
  std::vector<int> states;
  std::vector<int> lengths;
  std::vector<std::vector<std::vector<double>>> values;  // [state][length][sequence]

  static SurvivalTable from_dataset(const ExperimentDataset& data);
  std::vector<Series> means() const;
};

struct BootstrapOptions {
  int resamples = 200;
  int subset = 0;  // m; 0 = K
  bool with_replacement = true;
  std::uint64_t seed = 7;
  double max_failure_fraction = 0.2;
  unsigned threads = 0;
};

struct FidelityEstimate {
  LambdaEstimate plain;
  Assembly plain_assembly;
  double fidelity = 0.0;  // bootstrap mean, or the plain estimate when no resampling was done
  double ci_low = 0.0;
  double ci_high = 0.0;
  double median = 0.0;
  int samples = 0;
  int failures = 0;
  std::vector<double> resampled;
};

FidelityEstimate bootstrap_fidelity(const SurvivalTable& table, const EstimationModel& model,
                                    const EstimationOptions& opts, const BootstrapOptions& boot);

// Linear-interpolation percentile of a sample, q in [0, 1].
double percentile(std::vector<double> values, double q);

}  // namespace symrb
