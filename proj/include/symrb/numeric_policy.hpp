#pragma once

namespace symrb {

struct NumericPolicy {
  double equality_tol = 1e-10;
  double multiplicity_tol = 1e-8;
  // Slack allowed on probabilities before clamping to [0,1].
  double probability_slack = 1e-9;
  int max_qubits = 4;
};

const NumericPolicy& numeric_policy();
void set_numeric_policy(const NumericPolicy& policy);

}  // namespace symrb
