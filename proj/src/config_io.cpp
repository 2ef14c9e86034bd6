#include "symrb/config_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "symrb/errors.hpp"

namespace symrb {

namespace {

void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(path + ": unknown key '" + key + "'");
  }
}

double get_number(const Json& obj, const char* key, double fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return v.get<double>();
}

std::int64_t get_int(const Json& obj, const char* key, std::int64_t fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t get_seed(const Json& obj, const char* key, std::uint64_t fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return std::uint64_t(v.get<std::int64_t>());
  throw ConfigError(path + "." + key + ": expected a non-negative integer");
}

bool get_bool(const Json& obj, const char* key, bool fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError(path + "." + key + ": expected true or false");
  return obj[key].get<bool>();
}

std::string get_string(const Json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(path + ": missing '" + key + "'");
  if (!obj[key].is_string()) throw ConfigError(path + "." + key + ": expected a string");
  return obj[key].get<std::string>();
}

RMatrix real_block(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a non-empty array of rows");
  const auto rows = Eigen::Index(j.size());
  const auto cols = j[0].is_array() ? Eigen::Index(j[0].size()) : 0;
  if (cols == 0) throw ConfigError(path + ": expected a non-empty array of rows");
  RMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[std::size_t(r)];
    if (!row.is_array() || Eigen::Index(row.size()) != cols) throw ConfigError(path + ": ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[std::size_t(c)].is_number()) throw ConfigError(path + ": matrix entries must be numbers");
      m(r, c) = row[std::size_t(c)].get<double>();
    }
  }
  return m;
}

Json complex_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

std::vector<int> expand_lengths(const Json& j, const std::string& path) {
  std::vector<int> out;
  if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_number_integer()) throw ConfigError(path + ": lengths must be integers");
      out.push_back(v.get<int>());
    }
  } else {
    check_keys(j, {"min", "max", "step"}, path);
    const auto lo = get_int(j, "min", 1, path), hi = get_int(j, "max", 0, path), step = get_int(j, "step", 1, path);
    if (!j.contains("max")) throw ConfigError(path + ": missing 'max'");
    if (lo < 1 || hi < lo || step < 1) throw ConfigError(path + ": need 1 <= min <= max and step >= 1");
    if ((hi - lo) / step + 1 > 10'000'000) throw ConfigError(path + ": too many lengths");
    for (auto l = lo; l <= hi; l += step) out.push_back(int(l));
  }
  if (out.empty()) throw ConfigError(path + ": no lengths");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 1) throw ConfigError(path + ": lengths must be at least 1");
    if (i > 0 && out[i] <= out[i - 1]) throw ConfigError(path + ": lengths must be strictly increasing");
  }
  return out;
}

}  // namespace

Json matrix_to_json(const CMatrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json rr = Json::array(), ii = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ii.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return Json{{"re", re}, {"im", im}};
}

CMatrix matrix_from_json(const Json& j, const std::string& path) {
  if (j.is_array()) return real_block(j, path).cast<Complex>();
  check_keys(j, {"re", "im"}, path);
  if (!j.contains("re")) throw ConfigError(path + ": missing 're'");
  const RMatrix re = real_block(j["re"], path + ".re");
  RMatrix im = RMatrix::Zero(re.rows(), re.cols());
  if (j.contains("im")) {
    im = real_block(j["im"], path + ".im");
    if (im.rows() != re.rows() || im.cols() != re.cols()) throw ConfigError(path + ": re and im differ in shape");
  }
  CMatrix m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return m;
}

Json normalize_experiment(const Json& e) {
  const std::string p = "experiment";
  check_keys(e, {"gate", "noise", "inversion_noise", "states", "effects", "lengths", "sequences_per_length", "shots",
                 "seed", "local_symmetries"},
             p);
  Json out;
  out["gate"] = get_string(e, "gate", p);

  Json noise = e.contains("noise") ? e["noise"] : Json{{"kind", "none"}};
  const std::string kind = get_string(noise, "kind", p + ".noise");
  if (kind == "none") {
    check_keys(noise, {"kind"}, p + ".noise");
  } else if (kind == "hamiltonian") {
    check_keys(noise, {"kind", "preset", "h0", "v", "epsilon"}, p + ".noise");
    noise["epsilon"] = get_number(noise, "epsilon", 0.0, p + ".noise");
    if (noise.contains("preset")) {
      const auto preset = get_string(noise, "preset", p + ".noise");
      if (preset != "single_t" && preset != "two_t") throw ConfigError(p + ".noise.preset: expected single_t or two_t");
      if (noise.contains("h0") || noise.contains("v"))
        throw ConfigError(p + ".noise: give either a preset or h0 and v");
    } else if (!noise.contains("h0") || !noise.contains("v")) {
      throw ConfigError(p + ".noise: hamiltonian noise needs a preset or both h0 and v");
    }
  } else if (kind == "explicit") {
    check_keys(noise, {"kind", "transfer"}, p + ".noise");
    if (!noise.contains("transfer")) throw ConfigError(p + ".noise: missing 'transfer'");
  } else {
    throw ConfigError(p + ".noise.kind: expected none, hamiltonian or explicit");
  }
  out["noise"] = noise;

  out["inversion_noise"] = nullptr;
  if (e.contains("inversion_noise") && !e["inversion_noise"].is_null()) {
    check_keys(e["inversion_noise"], {"transfer"}, p + ".inversion_noise");
    if (!e["inversion_noise"].contains("transfer")) throw ConfigError(p + ".inversion_noise: missing 'transfer'");
    out["inversion_noise"] = e["inversion_noise"];
  }

  if (!e.contains("states")) throw ConfigError(p + ": missing 'states'");
  const auto& states = e["states"];
  if (states.is_string()) {
    const auto s = states.get<std::string>();
    if (s != "single_t" && s != "two_t") throw ConfigError(p + ".states: expected single_t, two_t or a list");
  } else if (states.is_array() && !states.empty()) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto sp = p + ".states[" + std::to_string(i) + "]";
      check_keys(states[i], {"name", "rho", "targets"}, sp);
      if (!states[i].contains("rho") || !states[i].contains("targets"))
        throw ConfigError(sp + ": needs 'rho' and 'targets'");
      if (!states[i]["targets"].is_array()) throw ConfigError(sp + ".targets: expected a list of strings");
      for (const auto& t : states[i]["targets"])
        if (!t.is_string()) throw ConfigError(sp + ".targets: expected a list of strings");
    }
  } else {
    throw ConfigError(p + ".states: expected single_t, two_t or a non-empty list");
  }
  out["states"] = states;

  out["effects"] = e.contains("effects") ? e["effects"] : Json::array();
  if (!out["effects"].is_array()) throw ConfigError(p + ".effects: expected a list of matrices");

  if (!e.contains("lengths")) throw ConfigError(p + ": missing 'lengths'");
  expand_lengths(e["lengths"], p + ".lengths");
  out["lengths"] = e["lengths"];
  if (out["lengths"].is_object() && !out["lengths"].contains("min")) out["lengths"]["min"] = 1;
  if (out["lengths"].is_object() && !out["lengths"].contains("step")) out["lengths"]["step"] = 1;

  out["sequences_per_length"] = get_int(e, "sequences_per_length", 100, p);
  if (out["sequences_per_length"].get<std::int64_t>() < 1) throw ConfigError(p + ".sequences_per_length: must be >= 1");
  out["shots"] = get_int(e, "shots", 0, p);
  if (out["shots"].get<std::int64_t>() < 0) throw ConfigError(p + ".shots: must be >= 0");
  out["seed"] = get_seed(e, "seed", 1, p);

  out["local_symmetries"] = e.contains("local_symmetries") ? e["local_symmetries"] : Json::array();
  if (!out["local_symmetries"].is_array()) throw ConfigError(p + ".local_symmetries: expected a list");
  for (std::size_t i = 0; i < out["local_symmetries"].size(); ++i) {
    const auto& ls = out["local_symmetries"][i];
    const auto lp = p + ".local_symmetries[" + std::to_string(i) + "]";
    check_keys(ls, {"factor", "generators"}, lp);
    if (!ls.contains("factor") || !ls.contains("generators") || !ls["generators"].is_array())
      throw ConfigError(lp + ": needs 'factor' and a 'generators' list");
    if (get_int(ls, "factor", -1, lp) < 0) throw ConfigError(lp + ".factor: must be >= 0");
  }
  return out;
}

ExperimentConfig experiment_config(const Json& e) {
  const std::string p = "experiment";
  ExperimentConfig c;
  try {
    c.gate = GateSpec::parse(e.at("gate").get<std::string>());
  } catch (const ValidationError& err) {
    throw ConfigError(p + ".gate: " + err.what());
  }
  const auto layout = c.gate.layout();
  const int n = layout.num_qubits();
  check_qubit_limit(n);

  const auto& noise = e.at("noise");
  const auto kind = noise.at("kind").get<std::string>();
  try {
    if (kind == "none") {
      c.noise = NoiseModel::explicit_channel(TransferMatrix::identity(n));
    } else if (kind == "hamiltonian") {
      const double eps = noise.at("epsilon").get<double>();
      if (noise.contains("preset")) {
        const auto preset = noise["preset"].get<std::string>();
        if ((preset == "single_t") != (n == 1) || (preset == "two_t") != (n == 2))
          throw ConfigError(p + ".noise.preset: " + preset + " does not match a " + std::to_string(n) + "-qubit gate");
        c.noise = preset == "single_t" ? single_t_noise(eps) : two_t_noise(eps);
      } else {
        c.noise = NoiseModel::hamiltonian(matrix_from_json(noise.at("h0"), p + ".noise.h0"),
                                          matrix_from_json(noise.at("v"), p + ".noise.v"), eps);
      }
    } else {
      c.noise = NoiseModel::explicit_channel(TransferMatrix(matrix_from_json(noise.at("transfer"), p + ".noise.transfer")));
    }
    if (!e.at("inversion_noise").is_null())
      c.inversion_noise =
          TransferMatrix(matrix_from_json(e["inversion_noise"].at("transfer"), p + ".inversion_noise.transfer"));
  } catch (const ValidationError& err) {
    throw ConfigError(p + ".noise: " + err.what());
  }

  const auto& states = e.at("states");
  if (states.is_string()) {
    const auto s = states.get<std::string>();
    if ((s == "single_t" && n != 1) || (s == "two_t" && n != 2))
      throw ConfigError(p + ".states: library " + s + " does not match a " + std::to_string(n) + "-qubit gate");
    c.states = initial_state_library(s == "single_t" ? StateLibrary::SingleT : StateLibrary::TwoT);
  } else {
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto sp = p + ".states[" + std::to_string(i) + "]";
      InitialState st;
      st.name = states[i].contains("name") ? get_string(states[i], "name", sp) : "state" + std::to_string(i);
      st.rho = matrix_from_json(states[i]["rho"], sp + ".rho");
      for (const auto& t : states[i]["targets"]) st.targets.push_back(SlotRef::parse(t.get<std::string>()));
      c.states.push_back(std::move(st));
    }
  }
  for (std::size_t i = 0; i < e.at("effects").size(); ++i)
    c.effects.push_back(matrix_from_json(e["effects"][i], p + ".effects[" + std::to_string(i) + "]"));
  c.lengths = expand_lengths(e.at("lengths"), p + ".lengths");
  c.sequences_per_length = int(e.at("sequences_per_length").get<std::int64_t>());
  c.shots = long(e.at("shots").get<std::int64_t>());
  c.seed = e.at("seed").get<std::uint64_t>();
  for (const auto& ls : e.at("local_symmetries")) {
    const auto f = std::size_t(ls.at("factor").get<std::int64_t>());
    if (f >= std::size_t(layout.num_factors())) throw ConfigError(p + ".local_symmetries: factor out of range");
    if (c.wide_locals.size() <= f) c.wide_locals.resize(f + 1);
    for (const auto& g : ls.at("generators")) c.wide_locals[f].push_back(matrix_from_json(g, p + ".local_symmetries"));
  }
  return c;
}

RunConfig parse_run_config(const Json& doc) {
  check_keys(doc, {"schema_version", "experiment", "estimation", "output"}, "config");
  if (!doc.contains("schema_version") || get_int(doc, "schema_version", 0, "config") != kConfigSchemaVersion)
    throw ConfigError("config.schema_version: expected " + std::to_string(kConfigSchemaVersion));
  if (!doc.contains("experiment")) throw ConfigError("config: missing 'experiment'");
  RunConfig rc;
  rc.experiment = normalize_experiment(doc["experiment"]);
  experiment_config(rc.experiment);

  const Json est = doc.contains("estimation") ? doc["estimation"] : Json::object();
  const std::string ep = "estimation";
  check_keys(est, {"tau", "pencil_fraction", "pencil", "rank", "noise_floor", "significance", "sigma_rel", "multichannel",
                   "deflate_known", "states", "bootstrap", "subset", "with_replacement", "seed"},
             ep);
  auto& eo = rc.estimation;
  eo.tau = int(get_int(est, "tau", 0, ep));
  eo.pencil_fraction = get_number(est, "pencil_fraction", eo.pencil_fraction, ep);
  eo.pencil = int(get_int(est, "pencil", 0, ep));
  if (eo.tau < 0 || eo.pencil < 0 || !(eo.pencil_fraction > 0 && eo.pencil_fraction < 0.5))
    throw ConfigError(ep + ": need tau >= 0, pencil >= 0 and 0 < pencil_fraction < 0.5");
  std::string rank_text = "significance";
  if (est.contains("rank")) {
    if (est["rank"].is_number_integer()) {
      eo.rank.policy = RankPolicy::Fixed;
      eo.rank.fixed_rank = est["rank"].get<int>();
      if (eo.rank.fixed_rank < 1) throw ConfigError(ep + ".rank: must be >= 1");
      rank_text.clear();
    } else if (est["rank"].is_string()) {
      rank_text = est["rank"].get<std::string>();
    } else {
      throw ConfigError(ep + ".rank: expected an integer or a policy name");
    }
  }
  if (!rank_text.empty()) {
    if (rank_text == "significance") eo.rank.policy = RankPolicy::Significance;
    else if (rank_text == "noise_floor") eo.rank.policy = RankPolicy::NoiseFloor;
    else if (rank_text == "theory") eo.rank.policy = RankPolicy::Theory;
    else if (rank_text == "threshold") eo.rank.policy = RankPolicy::Threshold;
    else throw ConfigError(ep + ".rank: unknown policy '" + rank_text + "'");
  }
  eo.rank.noise_floor = get_number(est, "noise_floor", eo.rank.noise_floor, ep);
  eo.rank.significance = get_number(est, "significance", eo.rank.significance, ep);
  eo.rank.sigma_rel = get_number(est, "sigma_rel", eo.rank.sigma_rel, ep);
  eo.multichannel = get_bool(est, "multichannel", true, ep);
  eo.deflate_known = get_bool(est, "deflate_known", true, ep);
  if (est.contains("states")) {
    if (!est["states"].is_array()) throw ConfigError(ep + ".states: expected a list of state ids");
    for (const auto& s : est["states"]) {
      if (!s.is_number_integer()) throw ConfigError(ep + ".states: expected a list of state ids");
      eo.states.push_back(s.get<int>());
    }
  }
  rc.bootstrap.resamples = int(get_int(est, "bootstrap", rc.bootstrap.resamples, ep));
  rc.bootstrap.subset = int(get_int(est, "subset", 0, ep));
  rc.bootstrap.with_replacement = get_bool(est, "with_replacement", true, ep);
  rc.bootstrap.seed = get_seed(est, "seed", rc.bootstrap.seed, ep);
  if (rc.bootstrap.resamples < 0 || rc.bootstrap.subset < 0)
    throw ConfigError(ep + ": bootstrap and subset must be >= 0");

  const Json out = doc.contains("output") ? doc["output"] : Json::object();
  check_keys(out, {"dir", "svg"}, "output");
  if (out.contains("dir")) rc.output.dir = get_string(out, "dir", "output");
  rc.output.svg = get_bool(out, "svg", true, "output");

  Json est_norm = {{"tau", eo.tau},
                   {"pencil_fraction", eo.pencil_fraction},
                   {"pencil", eo.pencil},
                   {"noise_floor", eo.rank.noise_floor},
                   {"significance", eo.rank.significance},
                   {"sigma_rel", eo.rank.sigma_rel},
                   {"multichannel", eo.multichannel},
                   {"deflate_known", eo.deflate_known},
                   {"states", eo.states},
                   {"bootstrap", rc.bootstrap.resamples},
                   {"subset", rc.bootstrap.subset},
                   {"with_replacement", rc.bootstrap.with_replacement},
                   {"seed", rc.bootstrap.seed}};
  if (rank_text.empty()) {
    est_norm["rank"] = eo.rank.fixed_rank;
  } else {
    est_norm["rank"] = rank_text;
  }
  rc.snapshot = {{"schema_version", kConfigSchemaVersion},
                 {"experiment", rc.experiment},
                 {"estimation", est_norm},
                 {"output", {{"dir", rc.output.dir}, {"svg", rc.output.svg}}}};
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_run_config(doc);
}

Json preset_experiment(int copies, double epsilon, int max_length, int sequences, long shots, std::uint64_t seed) {
  if (copies != 1 && copies != 2) throw ConfigError("presets exist for one and two T gates");
  const std::string preset = copies == 1 ? "single_t" : "two_t";
  Json e = {{"gate", copies == 1 ? "T" : "T,T"},
            {"noise", {{"kind", "hamiltonian"}, {"preset", preset}, {"epsilon", epsilon}}},
            {"states", preset},
            {"lengths", {{"min", 1}, {"max", max_length}, {"step", 1}}},
            {"sequences_per_length", sequences},
            {"shots", shots},
            {"seed", seed}};
  return normalize_experiment(e);
}

std::string config_hash(const Json& experiment) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : experiment.dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void write_dataset(const ExperimentDataset& data, const std::string& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw Error("cannot write " + csv_path);
  out << "# config_hash=" << data.config_hash << "\n";
  out << "length,seq_id,state_id,effect_id,survival,shots,seed\n";
  char buf[64];
  for (const auto& r : data.records) {
    std::snprintf(buf, sizeof buf, "%.17g", r.survival);
    out << r.length << ',' << r.seq_id << ',' << r.state_id << ',' << r.effect_id << ',' << buf << ',' << r.shots
        << ',' << r.seed << '\n';
  }
  if (!out) throw Error("failed writing " + csv_path);

  Json side = {{"schema_version", ExperimentDataset::kSchemaVersion},
               {"config_hash", data.config_hash},
               {"records", data.records.size()},
               {"generator", "symrb"}};
  side["config"] = data.config_json.empty() ? Json(nullptr) : Json::parse(data.config_json);
  std::ofstream s(csv_path + ".json", std::ios::binary);
  if (!s) throw Error("cannot write " + csv_path + ".json");
  s << side.dump(2) << "\n";
}

ExperimentDataset read_dataset(const std::string& csv_path) {
  std::ifstream sin(csv_path + ".json");
  if (!sin) throw ConfigError("missing dataset sidecar " + csv_path + ".json");
  Json side;
  try {
    side = Json::parse(sin);
  } catch (const Json::parse_error& e) {
    throw ConfigError(csv_path + ".json: " + e.what());
  }
  if (!side.contains("schema_version") || side["schema_version"] != ExperimentDataset::kSchemaVersion)
    throw ConfigError(csv_path + ".json: unsupported dataset schema version");
  ExperimentDataset data;
  data.config_hash = side.value("config_hash", "");
  if (side.contains("config") && !side["config"].is_null()) data.config_json = side["config"].dump();

  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open dataset " + csv_path);
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# config_hash=";
      if (line.rfind(key, 0) == 0 && line.substr(key.size()) != data.config_hash)
        throw ConfigError(csv_path + ": config hash differs from its sidecar");
      continue;
    }
    if (!header) {
      if (line != "length,seq_id,state_id,effect_id,survival,shots,seed")
        throw ConfigError(csv_path + ": unexpected header");
      header = true;
      continue;
    }
    SequenceOutcome r;
    unsigned long long seed = 0;
    char extra = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%lf,%ld,%llu%c", &r.length, &r.seq_id, &r.state_id, &r.effect_id,
                    &r.survival, &r.shots, &seed, &extra) != 7)
      throw ConfigError(csv_path + ":" + std::to_string(lineno) + ": malformed record");
    if (!(r.survival >= 0.0 && r.survival <= 1.0))
      throw ConfigError(csv_path + ":" + std::to_string(lineno) + ": survival outside [0,1]");
    r.seed = seed;
    data.records.push_back(r);
  }
  if (!header) throw ConfigError(csv_path + ": no header");
  if (side.contains("records") && side["records"].get<std::size_t>() != data.records.size())
    throw ConfigError(csv_path + ": record count differs from its sidecar");
  return data;
}

Json estimate_to_json(const FidelityEstimate& est, const EstimationModel& model) {
  Json states = Json::array();
  for (const auto& sp : est.plain.states) {
    Json poles = Json::array();
    for (const auto& p : sp.poles) poles.push_back(complex_json(p));
    Json assigned = Json::object();
    for (const auto& [k, v] : sp.assigned) assigned[k] = complex_json(v);
    std::string name;
    for (const auto& st : model.states)
      if (st.state_id == sp.state_id) name = st.name;
    states.push_back({{"state_id", sp.state_id},
                      {"name", name},
                      {"poles", poles},
                      {"expected", sp.expected},
                      {"partial", sp.partial},
                      {"slots", assigned}});
  }
  Json lambdas = Json::object();
  for (const auto& s : model.slots) {
    const auto it = est.plain.lambdas.find(s.key);
    if (it != est.plain.lambdas.end())
      lambdas[s.key] = {{"dim", s.dim}, {"re", it->second.real()}, {"im", it->second.imag()}};
  }
  return {{"subspace_poles", states},
          {"lambdas", lambdas},
          {"tau", est.plain.tau},
          {"step", est.plain.step},
          {"partial", est.plain.partial},
          {"sum_lambda", est.plain_assembly.sum_lambda.real()},
          {"plain_fidelity", est.plain_assembly.fidelity},
          {"fidelity", est.fidelity},
          {"median", est.median},
          {"ci_low", est.ci_low},
          {"ci_high", est.ci_high},
          {"bootstrap_samples", est.samples},
          {"bootstrap_failures", est.failures}};
}

}  // namespace symrb
