#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "symrb/config_io.hpp"
#include "symrb/errors.hpp"

using namespace symrb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("symrb_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json small_config() {
  return Json::parse(R"({
    "schema_version": 1,
    "experiment": {
      "gate": "T",
      "noise": {"kind": "hamiltonian", "preset": "single_t", "epsilon": 0.05},
      "states": "single_t",
      "lengths": {"min": 1, "max": 10, "step": 1},
      "sequences_per_length": 5,
      "shots": 0,
      "seed": 3
    },
    "estimation": {"bootstrap": 10},
    "output": {"dir": "out", "svg": false}
  })");
}

}  // namespace

TEST_CASE("run config parsing") {
  const auto rc = parse_run_config(small_config());
  CHECK(rc.bootstrap.resamples == 10);
  CHECK_FALSE(rc.output.svg);
  const auto cfg = experiment_config(rc.experiment);
  CHECK(cfg.lengths.size() == 10);
  CHECK(cfg.states.size() == 3);
  CHECK(cfg.sequences_per_length == 5);

  auto bad = small_config();
  bad["experiment"]["colour"] = "blue";
  CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
  bad = small_config();
  bad["estimation"]["rank"] = "sometimes";
  CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
  bad = small_config();
  bad["schema_version"] = 2;
  CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
  bad = small_config();
  bad["experiment"]["noise"]["kind"] = "gremlins";
  CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
  bad = small_config();
  bad["experiment"]["sequences_per_length"] = -1;
  CHECK_THROWS(parse_run_config(bad));

  try {
    bad = small_config();
    bad["estimation"]["bogus"] = 1;
    parse_run_config(bad);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }

  // Explicit state lists and rank policies.
  auto custom = small_config();
  custom["experiment"]["states"] = Json::parse(R"([{"name": "zero", "rho": [[1, 0], [0, 0]], "targets": ["chi0;e#0", "chi0;e#1"]}])");
  custom["estimation"]["rank"] = "noise_floor";
  const auto rc2 = parse_run_config(custom);
  CHECK(rc2.estimation.rank.policy == RankPolicy::NoiseFloor);
  CHECK(experiment_config(rc2.experiment).states.size() == 1);
}

TEST_CASE("config hashing") {
  const auto a = normalize_experiment(small_config()["experiment"]);
  const auto h = config_hash(a);
  CHECK(h.size() == 16);
  CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(config_hash(normalize_experiment(a)) == h);
  auto b = a;
  b["seed"] = 4;
  CHECK(config_hash(b) != h);
  CHECK(config_hash(preset_experiment(1, 0.1, 50, 10, 0, 1)) == config_hash(preset_experiment(1, 0.1, 50, 10, 0, 1)));
}

TEST_CASE("matrix JSON") {
  CMatrix m(2, 2);
  m << Complex(1, 0), Complex(0, -0.5), Complex(0, 0.5), Complex(0.25, 0);
  const auto back = matrix_from_json(matrix_to_json(m), "m");
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1, 0], [0]]"), "m"), ConfigError);
}

TEST_CASE("dataset files") {
  const auto dir = scratch("dataset");
  const auto norm = normalize_experiment(small_config()["experiment"]);
  const Experiment exp(experiment_config(norm));
  const auto data = run_experiment(exp, norm.dump(), config_hash(norm));
  write_dataset(data, (dir / "a.csv").string());
  write_dataset(run_experiment(exp, norm.dump(), config_hash(norm)), (dir / "b.csv").string());
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

  const auto back = read_dataset((dir / "a.csv").string());
  CHECK(back.config_hash == data.config_hash);
  REQUIRE(back.records.size() == data.records.size());
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    CHECK(back.records[i].survival == data.records[i].survival);
    CHECK(back.records[i].seed == data.records[i].seed);
    CHECK(back.records[i].length == data.records[i].length);
  }
  CHECK(Json::parse(back.config_json) == norm);

  // Corruptions are rejected.
  auto text = slurp(dir / "a.csv");
  const auto pos = text.find("length,seq_id");
  std::ofstream(dir / "c.csv", std::ios::binary) << text.substr(0, pos) << "len,seq" << text.substr(pos + 13);
  fs::copy_file(dir / "a.csv.json", dir / "c.csv.json");
  CHECK_THROWS_AS(read_dataset((dir / "c.csv").string()), ConfigError);

  std::ofstream(dir / "d.csv", std::ios::binary) << text << "1,99,0,0,1.5,0,1\n";
  fs::copy_file(dir / "a.csv.json", dir / "d.csv.json");
  CHECK_THROWS(read_dataset((dir / "d.csv").string()));

  CHECK_THROWS_AS(read_dataset((dir / "missing.csv").string()), ConfigError);
  fs::remove_all(dir);
}
