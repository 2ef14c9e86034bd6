// symrb: decompose, simulate, estimate, reproduce.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "symrb/config_io.hpp"
#include "symrb/errors.hpp"
#include "symrb/pipeline.hpp"

namespace fs = std::filesystem;
using namespace symrb;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitEstimation = 3;
constexpr int kExitResource = 4;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

std::string gate_text(const std::string& gate, int copies) {
  if (copies <= 1) return gate;
  std::string out;
  for (int i = 0; i < copies; ++i) out += (i ? "," : "") + gate;
  return out;
}

// ---------------------------------------------------------------------------

struct DecomposeArgs {
  std::string gate = "T";
  int copies = 1;
  std::string json;
  bool all = false;
};

int cmd_decompose(const DecomposeArgs& a) {
  const auto spec = GateSpec::parse(gate_text(a.gate, a.copies));
  const auto layout = spec.layout();
  check_qubit_limit(layout.num_qubits());
  const auto t0 = std::chrono::steady_clock::now();
  const auto group = build_symmetry_group(layout);
  const auto table = induced_characters(group);
  const auto dec = decompose_transfer_rep(group, table);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::printf("gate %s  |G| = %zu  irreps = %zu  present = %zu  sum m = %d\n", spec.display().c_str(), group.size(),
              dec.total_irreps, dec.components.size(), dec.multiplicity_sum());
  std::printf("%-28s %4s %4s\n", "irrep", "dim", "mult");
  if (a.all) {
    for (std::size_t i = 0; i < table.num_irreps(); ++i) {
      int m = 0;
      for (const auto& c : dec.components)
        if (c.irrep == i) m = c.multiplicity;
      std::printf("%-28s %4d %4d\n", table.labels[i].text.c_str(), table.dims[i], m);
    }
  } else {
    for (const auto& c : dec.components) std::printf("%-28s %4d %4d\n", c.label.c_str(), c.dim, c.multiplicity);
  }
  std::printf("sum m*d = %d  (%.2f s)\n", dec.dimension_sum(), secs);

  if (!a.json.empty()) {
    Json rows = Json::array();
    for (const auto& c : dec.components) rows.push_back({{"label", c.label}, {"dim", c.dim}, {"multiplicity", c.multiplicity}});
    Json doc = {{"gate", spec.display()},
                {"group_order", group.size()},
                {"total_irreps", dec.total_irreps},
                {"components", rows}};
    write_text(a.json, doc.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<long> shots;
};

int cmd_simulate(const SimulateArgs& a) {
  Json doc;
  {
    std::ifstream in(a.config);
    if (!in) throw ConfigError("cannot open config file " + a.config);
    try {
      doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ConfigError(a.config + ": " + e.what());
    }
  }
  if (doc.contains("experiment") && doc["experiment"].is_object()) {
    if (a.seed) doc["experiment"]["seed"] = *a.seed;
    if (a.shots) doc["experiment"]["shots"] = *a.shots;
  }
  const RunConfig rc = parse_run_config(doc);
  const auto dir = prepare_dir(a.out.empty() ? rc.output.dir : a.out);
  const std::string hash = config_hash(rc.experiment);

  const Experiment exp(experiment_config(rc.experiment));
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = run_experiment(exp, rc.experiment.dump(), hash);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_dataset(data, (dir / "dataset.csv").string());

  std::map<int, std::size_t> per_length;
  for (const auto& r : data.records) ++per_length[r.length];
  std::ostringstream log;
  log << "config_hash=" << hash << "\n";
  log << "gate " << exp.config().gate.display() << ", |G| = " << exp.group().size() << ", states "
      << exp.states().size() << ", shots " << exp.config().shots << "\n";
  for (const auto& [l, n] : per_length) log << "length " << l << ": " << n << " records\n";
  log << "total " << data.records.size() << " records in " << secs << " s\n";
  write_text(dir / "simulate.log", log.str());
  std::fprintf(stderr, "simulated %zu records over %zu lengths in %.1f s -> %s\n", data.records.size(),
               per_length.size(), secs, (dir / "dataset.csv").string().c_str());
  std::printf("%s\n", hash.c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string data;
  std::string config;
  std::string out;
  std::optional<int> tau, rank, bootstrap, subset;
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool svg = true;
};

int cmd_estimate(const EstimateArgs& a) {
  const auto data = read_dataset(a.data);
  EstimationOptions opts;
  BootstrapOptions boot;
  std::string out_dir = a.out;
  bool svg = a.svg;
  if (!a.config.empty()) {
    const RunConfig rc = load_run_config(a.config);
    const auto hash = config_hash(rc.experiment);
    if (hash != data.config_hash && !a.force)
      throw ConfigError("dataset hash " + data.config_hash + " does not match config hash " + hash +
                        " (use --force to override)");
    opts = rc.estimation;
    boot = rc.bootstrap;
    if (out_dir.empty()) out_dir = rc.output.dir;
    svg = svg && rc.output.svg;
  }
  if (out_dir.empty()) out_dir = fs::path(a.data).parent_path().string();
  if (out_dir.empty()) out_dir = ".";
  if (a.tau) opts.tau = *a.tau;
  if (a.rank) {
    opts.rank.policy = RankPolicy::Fixed;
    opts.rank.fixed_rank = *a.rank;
  }
  if (a.bootstrap) boot.resamples = *a.bootstrap;
  if (a.subset) boot.subset = *a.subset;
  if (a.seed) boot.seed = *a.seed;
  if (data.config_json.empty()) throw ConfigError("dataset sidecar carries no experiment config");

  const Json experiment = Json::parse(data.config_json);
  const Experiment exp(experiment_config(experiment));
  const auto model = estimation_model(exp);
  const auto est = bootstrap_fidelity(SurvivalTable::from_dataset(data), model, opts, boot);

  Json result = estimate_to_json(est, model);
  result["config_hash"] = data.config_hash;
  const auto& noise = experiment["noise"];
  if (noise.contains("epsilon")) result["epsilon"] = noise["epsilon"];
  result["exact_fidelity"] = exp.exact_fidelity();
  const auto dir = prepare_dir(out_dir);
  write_text(dir / "result.json", result.dump(2) + "\n");
  if (svg) write_text(dir / "result.svg", series_svg(exp, data, est, model));
  std::printf("fidelity %.6f  CI [%.6f, %.6f]  exact %.6f\n", est.fidelity, est.ci_low, est.ci_high,
              exp.exact_fidelity());
  return 0;
}

// ---------------------------------------------------------------------------

struct ReproduceArgs {
  std::string target = "fig1a";
  std::string out = "out";
  std::optional<int> max_length, sequences, bootstrap, tau;
  std::uint64_t seed = 1;
  long shots = 0;
  std::vector<double> epsilons;
};

int cmd_reproduce(const ReproduceArgs& a) {
  auto target = figure_target(a.target);
  if (a.max_length) target.max_length = *a.max_length;
  if (a.sequences) target.sequences = *a.sequences;
  const auto& eps = a.epsilons.empty() ? default_epsilons() : a.epsilons;
  EstimationOptions opts;
  if (a.tau) opts.tau = *a.tau;
  BootstrapOptions boot;
  if (a.bootstrap) boot.resamples = *a.bootstrap;

  const Json settings = {{"target", target.name},     {"copies", target.copies}, {"max_length", target.max_length},
                         {"sequences", target.sequences}, {"shots", a.shots},      {"seed", a.seed},
                         {"bootstrap", boot.resamples},   {"epsilons", eps}};
  const std::string hash = config_hash(settings);
  const auto dir = prepare_dir(a.out);

  std::vector<RunResult> rows;
  std::ostringstream csv;
  csv << "# config_hash=" << hash << "\n";
  csv << "epsilon,estimate,ci_low,ci_high,exact,plain_estimate,run_config_hash\n";
  for (double e : eps) {
    const auto t0 = std::chrono::steady_clock::now();
    const Json experiment = preset_experiment(target.copies, e, target.max_length, target.sequences, a.shots, a.seed);
    rows.push_back(simulate_and_estimate(experiment, opts, boot));
    const auto& r = rows.back();
    char line[256];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", e, r.estimate.fidelity,
                  r.estimate.ci_low, r.estimate.ci_high, r.exact, r.estimate.plain_assembly.fidelity,
                  r.config_hash.c_str());
    csv << line;
    std::fprintf(stderr, "%s eps=%g estimate=%.6f exact=%.6f (%.0f s)\n", target.name.c_str(), e,
                 r.estimate.fidelity, r.exact,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  write_text(dir / (target.name + ".csv"), csv.str());
  write_text(dir / (target.name + ".svg"),
             figure_svg(target.name + ": estimated vs exact average fidelity", rows, "config_hash=" + hash));
  std::printf("%s", csv.str().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry-twirled benchmarking of non-Clifford layers"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "Irrep decomposition of the transfer representation");
  c_dec->add_option("--gate", dec.gate, "Gate name, or a comma list such as T,T");
  c_dec->add_option("--copies", dec.copies, "Number of copies of the gate")->check(CLI::PositiveNumber);
  c_dec->add_option("--json", dec.json, "Write the table as JSON");
  c_dec->add_flag("--all", dec.all, "List every irrep, including absent ones");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Run a simulated experiment");
  c_sim->add_option("--config", sim.config, "Run config (JSON)")->required();
  c_sim->add_option("--out", sim.out, "Output directory");
  c_sim->add_option("--seed", sim.seed, "Override the master seed");
  c_sim->add_option("--shots", sim.shots, "Override shots per point");

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Estimate the average fidelity from a dataset");
  c_est->add_option("--data", est.data, "Dataset CSV")->required();
  c_est->add_option("--config", est.config, "Run config; its hash must match the dataset");
  c_est->add_option("--out", est.out, "Output directory");
  c_est->add_option("--tau", est.tau, "Subsampling period (0 = from the gate)");
  c_est->add_option("--rank", est.rank, "Fixed number of poles per state");
  c_est->add_option("--bootstrap", est.bootstrap, "Bootstrap resamples B");
  c_est->add_option("--subset", est.subset, "Resample size m per length");
  c_est->add_option("--seed", est.seed, "Bootstrap seed");
  c_est->add_flag("--force", est.force, "Accept a dataset whose hash differs from the config");
  bool no_svg = false;
  c_est->add_flag("--no-svg", no_svg, "Skip the SVG plot");

  ReproduceArgs rep;
  auto* c_rep = app.add_subcommand("reproduce", "Fidelity-vs-epsilon sweeps for one or two T gates");
  c_rep->add_option("--target", rep.target, "fig1a or fig1b");
  c_rep->add_option("--out", rep.out, "Output directory");
  c_rep->add_option("--max-length", rep.max_length, "Longest sequence");
  c_rep->add_option("--sequences", rep.sequences, "Sequences per length K");
  c_rep->add_option("--bootstrap", rep.bootstrap, "Bootstrap resamples B");
  c_rep->add_option("--tau", rep.tau, "Subsampling period");
  c_rep->add_option("--seed", rep.seed, "Master seed");
  c_rep->add_option("--shots", rep.shots, "Shots per point (0 = exact probabilities)");
  c_rep->add_option("--eps", rep.epsilons, "Noise strengths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  est.svg = !no_svg;

  try {
    if (*c_dec) return cmd_decompose(dec);
    if (*c_sim) return cmd_simulate(sim);
    if (*c_est) return cmd_estimate(est);
    if (*c_rep) return cmd_reproduce(rep);
  } catch (const ResourceLimitError& e) {
    std::fprintf(stderr, "resource limit: %s\n", e.what());
    return kExitResource;
  } catch (const EstimationError& e) {
    std::fprintf(stderr, "estimation failed: %s\n", e.what());
    return kExitEstimation;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
