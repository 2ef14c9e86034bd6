#include <numeric>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "symrb/channels.hpp"
#include "symrb/errors.hpp"
#include "symrb/protocol.hpp"

using namespace symrb;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

ExperimentConfig single_t_config(double eps, std::vector<int> lengths, int k, long shots = 0) {
  ExperimentConfig cfg;
  cfg.gate = GateSpec::copies("T", 1);
  cfg.noise = single_t_noise(eps);
  cfg.states = initial_state_library(StateLibrary::SingleT);
  cfg.lengths = std::move(lengths);
  cfg.sequences_per_length = k;
  cfg.shots = shots;
  cfg.seed = 42;
  return cfg;
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> v(static_cast<std::size_t>(hi - lo + 1));
  std::iota(v.begin(), v.end(), lo);
  return v;
}

}  // namespace

TEST_CASE("initial state libraries") {
  const auto one = initial_state_library(StateLibrary::SingleT);
  const auto two = initial_state_library(StateLibrary::TwoT);
  REQUIRE(one.size() == 3);
  REQUIRE(two.size() == 8);
  CMatrix zero = CMatrix::Zero(2, 2);
  zero(0, 0) = 1;
  CHECK(max_abs(one[1].rho - zero) == 0.0);
  CHECK(max_abs(two[0].rho - CMatrix::Identity(4, 4) / 4.0) == 0.0);
  for (const auto* lib : {&one, &two})
    for (const auto& s : *lib) {
      CAPTURE(s.name);
      CHECK(is_hermitian(s.rho, 1e-15));
      CHECK(std::abs(s.rho.trace() - 1.0) < 1e-15);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(s.rho);
      CHECK(es.eigenvalues().minCoeff() >= -1e-12);
      CHECK_FALSE(s.targets.empty());
    }

  // The single-T states address all four slots, the two-T states all eleven.
  std::set<std::string> slots1, slots2;
  for (const auto& s : one)
    for (const auto& t : s.targets) slots1.insert(t.key());
  std::size_t most = 0;
  for (const auto& s : two) {
    most = std::max(most, s.targets.size());
    for (const auto& t : s.targets) slots2.insert(t.key());
  }
  CHECK(slots1.size() == 4);
  CHECK(slots2.size() == 11);
  CHECK(most == 5);

  const auto ref = SlotRef::parse("chi0,chi1;e#1");
  CHECK(ref.irrep == "chi0,chi1;e");
  CHECK(ref.copy == 1);
  CHECK(SlotRef::parse("chi0;e").copy == 0);
  CHECK_THROWS_AS(SlotRef::parse("chi0;e#x"), ValidationError);
}

TEST_CASE("experiment validation") {
  auto cfg = single_t_config(0.1, {1, 2}, 2);
  cfg.lengths = {};
  CHECK_THROWS_AS(Experiment{cfg}, ConfigError);
  cfg = single_t_config(0.1, {0, 1}, 2);
  CHECK_THROWS_AS(Experiment{cfg}, ConfigError);
  cfg = single_t_config(0.1, {1}, 0);
  CHECK_THROWS_AS(Experiment{cfg}, ConfigError);
  cfg = single_t_config(0.1, range(1, 1000), 100000);
  CHECK_THROWS_AS(Experiment{cfg}, ConfigError);
  cfg = single_t_config(0.1, {1}, 1);
  cfg.states[0].rho(0, 0) = 0.7;
  CHECK_THROWS(Experiment{cfg});
  cfg = single_t_config(0.1, {1}, 1);
  cfg.states[0].targets = {{"chi2;e", 0}};
  CHECK_THROWS(Experiment{cfg});
}

TEST_CASE("sequence drawing") {
  std::mt19937_64 a(9), b(9);
  CHECK(draw_sequence(20, 32, a) == draw_sequence(20, 32, b));
  CHECK(record_seed(1, 5, 3, 2) == record_seed(1, 5, 3, 2));
  CHECK(record_seed(1, 5, 3, 2) != record_seed(1, 5, 3, 1));
  CHECK(record_seed(1, 5, 3, 2) != record_seed(2, 5, 3, 2));

  std::mt19937_64 rng(123);
  const int draws = 100000, len = 5, g = 4;
  std::vector<std::vector<int>> hist(len, std::vector<int>(g, 0));
  for (int i = 0; i < draws; ++i) {
    const auto s = draw_sequence(len, g, rng);
    REQUIRE(s.size() == std::size_t(len));
    for (int p = 0; p < len; ++p) {
      REQUIRE(s[std::size_t(p)] >= 0);
      REQUIRE(s[std::size_t(p)] < g);
      ++hist[std::size_t(p)][std::size_t(s[std::size_t(p)])];
    }
  }
  const double mean = double(draws) / g, sigma = std::sqrt(draws * (1.0 / g) * (1 - 1.0 / g));
  for (const auto& row : hist)
    for (int c : row) CHECK(std::abs(c - mean) < 4 * sigma);
}

TEST_CASE("compiled sequences") {
  const Experiment ideal(single_t_config(0.0, {1}, 1));
  const auto& g = ideal.group();
  const auto zero = ideal.states()[1];
  const auto e0 = ideal.effects()[1];
  std::mt19937_64 rng(4);
  for (int l : {1, 7, 30}) {
    const auto c = compile_sequence(draw_sequence(l, g.size(), rng), ideal.gate(), g);
    CHECK(expect(e0, c, zero) == doctest::Approx(1.0).epsilon(1e-12));
  }

  const Experiment noisy(single_t_config(0.1, {1}, 1));
  const auto c1 = compile_sequence({g.identity()}, noisy.gate(), noisy.group());
  CHECK(max_abs(c1.matrix() - (noisy.gate().inversion_noise * noisy.gate().implemented).matrix()) < 1e-14);

  // Average over all 64 length-3 sequences.
  CMatrix avg = CMatrix::Zero(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) avg += compile_sequence({a, b, c}, noisy.gate(), noisy.group()).matrix();
  avg /= 64.0;
  const CMatrix step = noisy.twirled_noise().matrix() * noisy.gate().ideal.matrix();
  CHECK(max_abs(avg - noisy.gate().inversion_noise.matrix() * step * step * step) < 1e-12);

  CHECK(sequence_product({1, 2, 3}, g) == g.multiply(3, g.multiply(2, 1)));
}

TEST_CASE("exact oracle") {
  const Experiment ideal(single_t_config(0.0, {1}, 1));
  const auto& s = ideal.states()[2];
  const auto& e = ideal.effects()[2];
  for (int l : {0, 1, 3, 8}) {
    TransferMatrix u = TransferMatrix::identity(1);
    for (int i = 0; i < l; ++i) u = u * ideal.gate().ideal;
    CHECK(exact_average_oracle(ideal, l, 2, 2) == doctest::Approx(expect(e, u, s)).epsilon(1e-12));
  }
  const Experiment noisy(single_t_config(0.1, {1}, 1));
  CHECK(exact_average_oracle(noisy, 0, 1, 1) ==
        doctest::Approx(expect(noisy.effects()[1], noisy.gate().inversion_noise, noisy.states()[1])));

  const auto& g = noisy.group();
  std::vector<oracle::CM> units;
  for (int k = 0; k < 4; ++k) units.push_back(g.unitary(k));
  const auto gate = oracle::expm_hermitian(M_PI / 8 * oracle::pauli(3) - 0.1 * oracle::pauli(1));
  const auto& lib = noisy.config().states;
  for (int l = 1; l <= 4; ++l) {
    const double brute = oracle::brute_force_average(
        units, gate, lib[2].rho, lib[2].rho, l, [&](int a, int b) { return g.multiply(a, b); },
        [&](int a) { return g.inverse(a); });
    CHECK(std::abs(brute - exact_average_oracle(noisy, l, 2, 2)) < 1e-12);
  }
}

TEST_CASE("run_experiment") {
  const Experiment small(single_t_config(0.1, range(1, 10), 5));
  const auto d1 = run_experiment(small);
  CHECK(d1.records.size() == 150);
  const auto d2 = run_experiment(small);
  for (std::size_t i = 0; i < d1.records.size(); ++i) CHECK(d1.records[i].survival == d2.records[i].survival);

  const Experiment ideal(single_t_config(0.0, range(1, 10), 5));
  for (const auto& r : run_experiment(ideal).records)
    if (r.state_id == 1) CHECK(r.survival == doctest::Approx(1.0).epsilon(1e-12));

  // Finite shots concentrate around the exact-probability values.
  const auto exact = run_experiment(Experiment(single_t_config(0.1, range(1, 10), 5, 0)));
  const auto shots = run_experiment(Experiment(single_t_config(0.1, range(1, 10), 5, 1000000)));
  for (std::size_t i = 0; i < exact.records.size(); ++i)
    CHECK(std::abs(exact.records[i].survival - shots.records[i].survival) < 5e-3);

  ExperimentDataset flat;
  flat.records = {{3, 0, 0, 0, 0.4, 0, 0}, {3, 1, 0, 0, 0.6, 0, 0}};
  CHECK(sequence_average(flat, 3, 0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(sequence_average(flat, 4, 0), ValidationError);

  // Sequence means converge to the exact average.
  const Experiment big(single_t_config(0.1, {20}, 1000));
  const auto data = run_experiment(big);
  for (int s = 1; s < 3; ++s) {
    std::vector<double> v;
    for (const auto& r : data.records)
      if (r.state_id == s) v.push_back(r.survival);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double se = std::sqrt(var / double(v.size() - 1) / double(v.size()));
    CHECK(std::abs(mean - exact_average_oracle(big, 20, s, s)) < std::max(3 * se, 1e-12));
  }
}

TEST_CASE("fitting models") {
  FittingModel one;
  one.lambdas = {1.0};
  one.eigenvalues = {1.0};
  one.xi = {1.0};
  for (int l : {0, 1, 10, 100}) CHECK(model_predict(0, one, l) == doctest::Approx(1.0));

  FittingModel m;
  m.lambdas = {0.98, 0.9};
  m.eigenvalues = {1.0, std::polar(1.0, M_PI / 4)};
  m.xi = {0.5, 0.2};
  m.zeta = CMatrix::Zero(2, 2);
  for (int l : {1, 5, 17}) CHECK(model_predict(1, m, l) == doctest::Approx(model_predict(0, m, l)).epsilon(1e-14));

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 10; ++t) {
    const Complex a(u(rng), u(rng)), b(u(rng), u(rng));
    const int l = 1 + t * 3;
    m.lambdas = {a, b};
    m.eigenvalues = {1.0, 1.0};
    m.zeta = CMatrix::Zero(2, 2);
    m.zeta(1, 0) = 1.0;
    const double first = model_predict(1, m, l) - model_predict(0, m, l);
    CHECK(first == doctest::Approx(oracle::geometric_sum(a, b, l).real()).epsilon(1e-10));
  }
  // Degenerate poles use the derivative limit.
  m.lambdas = {0.9, 0.9};
  const double deg = model_predict(1, m, 6) - model_predict(0, m, 6);
  CHECK(deg == doctest::Approx(6 * std::pow(0.9, 5)).epsilon(1e-12));
  CHECK_THROWS_AS(model_predict(2, m, 3), ValidationError);

  // The first-order model tracks the exact average more closely than zeroth order.
  const Experiment exp(single_t_config(0.1, {1}, 1));
  for (int s = 1; s < 3; ++s) {
    const auto fm = true_fitting_model(exp, s);
    double err0 = 0, err1 = 0;
    for (int l = 1; l <= 200; l += 7) {
      const double ex = exact_average_oracle(exp, l, s, s);
      err0 = std::max(err0, std::abs(model_predict(0, fm, l) - ex));
      err1 = std::max(err1, std::abs(model_predict(1, fm, l) - ex));
    }
    CAPTURE(s);
    CHECK(err1 <= err0 + 1e-12);
    CHECK(err0 < 0.05);
  }
}

TEST_CASE("variance bound") {
  CHECK(variance_bound(2, 10, 1e-4) == doctest::Approx(0.024));
  CHECK(variance_bound(4, 50, 0.0) == 0.0);
  CHECK_THROWS_AS(variance_bound(2, 1, -0.1), ValidationError);
}
