#pragma once

// Simulate-then-estimate runs used by the figure reproductions.

#include <string>
#include <vector>

#include "symrb/config_io.hpp"
#include "symrb/estimation.hpp"
#include "symrb/svg.hpp"

namespace symrb {

struct FigureTarget {
  std::string name;
  int copies = 1;
  int max_length = 1000;
  int sequences = 100;
};

// fig1a: one T, lengths up to 1000; fig1b: two T, lengths up to 1600.
FigureTarget figure_target(const std::string& name);
const std::vector<double>& default_epsilons();

struct RunResult {
  double epsilon = 0.0;
  double exact = 0.0;
  std::string config_hash;
  FidelityEstimate estimate;
};

RunResult simulate_and_estimate(const Json& experiment, const EstimationOptions& opts, const BootstrapOptions& boot,
                                unsigned threads = 0);

// Per-state series with the fitted zeroth-order curve.
std::string series_svg(const Experiment& exp, const ExperimentDataset& data, const FidelityEstimate& est,
                       const EstimationModel& model);
std::string figure_svg(const std::string& title, const std::vector<RunResult>& rows, const std::string& comment);

}  // namespace symrb
