#include "symrb/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "symrb/errors.hpp"

namespace symrb {

FigureTarget figure_target(const std::string& name) {
  if (name == "fig1a") return {name, 1, 1000, 100};
  if (name == "fig1b") return {name, 2, 1600, 100};
  throw ConfigError("unknown reproduction target '" + name + "' (expected fig1a or fig1b)");
}

const std::vector<double>& default_epsilons() {
  static const std::vector<double> eps = {0.0, 0.001, 0.01, 0.05, 0.1, 0.25};
  return eps;
}

RunResult simulate_and_estimate(const Json& experiment, const EstimationOptions& opts, const BootstrapOptions& boot,
                                unsigned threads) {
  RunResult r;
  const Json norm = normalize_experiment(experiment);
  r.config_hash = config_hash(norm);
  const auto& noise = norm["noise"];
  r.epsilon = noise.contains("epsilon") ? noise["epsilon"].get<double>() : 0.0;
  const Experiment exp(experiment_config(norm));
  r.exact = exp.exact_fidelity();
  const auto data = run_experiment(exp, norm.dump(), r.config_hash, threads);
  BootstrapOptions b = boot;
  b.threads = threads;
  r.estimate = bootstrap_fidelity(SurvivalTable::from_dataset(data), estimation_model(exp), opts, b);
  return r;
}

namespace {
const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
}

std::string series_svg(const Experiment& exp, const ExperimentDataset& data, const FidelityEstimate& est,
                       const EstimationModel& model) {
  std::vector<PlotSeries> plots;
  const auto table = SurvivalTable::from_dataset(data);
  const auto means = table.means();
  for (std::size_t i = 0; i < means.size(); ++i) {
    const auto& s = means[i];
    const std::string color = kColors[i % 8];
    const auto stride = std::max<std::size_t>(1, s.lengths.size() / 250);
    PlotSeries pts;
    pts.label = "state " + std::to_string(s.state);
    for (const auto& st : model.states)
      if (st.state_id == s.state) pts.label = st.name;
    pts.color = color;
    for (std::size_t k = 0; k < s.lengths.size(); k += stride) {
      pts.x.push_back(s.lengths[k]);
      pts.y.push_back(s.values[k]);
    }
    plots.push_back(pts);

    // Model curve: distinct lambda * d over the slots this state addresses.
    std::vector<Complex> poles;
    for (const auto& sp : est.plain.states) {
      if (sp.state_id != s.state) continue;
      for (const auto& [key, lam] : sp.assigned) {
        const Complex a = lam * model.slot(key).gate_eigenvalue;
        if (std::none_of(poles.begin(), poles.end(), [&](Complex p) { return std::abs(p - a) <= 1e-9; }))
          poles.push_back(a);
      }
    }
    if (poles.empty()) continue;
    try {
      const auto fit = fit_amplitudes(s.lengths, s.values, poles);
      PlotSeries curve;
      curve.label = pts.label + " model";
      curve.color = color;
      curve.line = true;
      curve.markers = false;
      for (std::size_t k = 0; k < s.lengths.size(); k += stride) {
        Complex f = 0.0;
        for (std::size_t j = 0; j < poles.size(); ++j) f += fit.amplitudes[j] * std::pow(poles[j], s.lengths[k]);
        curve.x.push_back(s.lengths[k]);
        curve.y.push_back(f.real());
      }
      plots.push_back(curve);
    } catch (const EstimationError&) {
      // no curve for this state
    }
  }
  (void)exp;
  PlotSpec spec;
  spec.title = "Sequence survival and fitted model";
  spec.x_label = "sequence length";
  spec.y_label = "F_seq";
  spec.comment = "config_hash=" + data.config_hash;
  return render_svg(spec, plots);
}

std::string figure_svg(const std::string& title, const std::vector<RunResult>& rows, const std::string& comment) {
  PlotSeries est, exact;
  est.label = "estimate (95% CI)";
  est.color = "#1f77b4";
  exact.label = "exact";
  exact.color = "#d62728";
  exact.line = true;
  for (const auto& r : rows) {
    est.x.push_back(r.epsilon);
    est.y.push_back(r.estimate.fidelity);
    est.y_lo.push_back(r.estimate.ci_low);
    est.y_hi.push_back(r.estimate.ci_high);
    exact.x.push_back(r.epsilon);
    exact.y.push_back(r.exact);
  }
  PlotSpec spec;
  spec.title = title;
  spec.x_label = "epsilon";
  spec.y_label = "average gate fidelity";
  spec.comment = comment;
  return render_svg(spec, {exact, est});
}

}  // namespace symrb
