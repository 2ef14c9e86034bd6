#include <numeric>

#include "doctest.h"
#include "symrb/channels.hpp"
#include "symrb/errors.hpp"
#include "symrb/estimation.hpp"
#include "symrb/protocol.hpp"

using namespace symrb;

namespace {

std::vector<double> synth(const std::vector<Complex>& poles, const std::vector<Complex>& amps, int n, int start = 0) {
  std::vector<double> v;
  for (int l = start; l < start + n; ++l) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < poles.size(); ++j) s += amps[j] * std::pow(poles[j], l);
    v.push_back(s.real());
  }
  return v;
}

double nearest(const std::vector<Complex>& poles, Complex x) {
  double best = INFINITY;
  for (auto p : poles) best = std::min(best, std::abs(p - x));
  return best;
}

PencilConfig theory(int k) {
  PencilConfig c;
  c.policy = RankPolicy::Theory;
  c.expected = k;
  return c;
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> v(static_cast<std::size_t>(hi - lo + 1));
  std::iota(v.begin(), v.end(), lo);
  return v;
}

ExperimentConfig single_t_config(NoiseModel noise, int lmax) {
  ExperimentConfig cfg;
  cfg.gate = GateSpec::copies("T", 1);
  cfg.noise = std::move(noise);
  cfg.states = initial_state_library(StateLibrary::SingleT);
  cfg.lengths = range(1, lmax);
  cfg.sequences_per_length = 1;
  return cfg;
}

std::vector<Series> exact_all(const Experiment& exp) {
  std::vector<Series> out;
  for (int s = 0; s < int(exp.states().size()); ++s) out.push_back(exact_series(exp, s, exp.config().lengths));
  return out;
}

// Pauli-diagonal noise that commutes with the T channel: depolarizing in the
// XY plane at rate p, along Z at rate q.
TransferMatrix diagonal_noise(double p, double q) {
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = 1.0;
  m(1, 1) = m(2, 2) = p;
  m(3, 3) = q;
  return TransferMatrix(m);
}

}  // namespace

TEST_CASE("Hankel matrices") {
  std::vector<double> s(20);
  std::iota(s.begin(), s.end(), 0.0);
  const RMatrix h = build_hankel(s, 4);
  CHECK(h.rows() == 16);
  CHECK(h.cols() == 5);
  for (int i = 0; i < 16; ++i)
    for (int k = 0; k < 5; ++k) CHECK(h(i, k) == s[std::size_t(i + k)]);

  Eigen::JacobiSVD<RMatrix> c(build_hankel(std::vector<double>(20, 0.3), 4));
  CHECK(c.singularValues()(1) / c.singularValues()(0) < 1e-12);
  Eigen::JacobiSVD<RMatrix> g(build_hankel(synth({0.9}, {1.0}, 20), 4));
  CHECK(g.singularValues()(1) / g.singularValues()(0) < 1e-12);
  CHECK_THROWS(build_hankel(s, 20));
}

TEST_CASE("pole extraction on synthetic series") {
  const RMatrix h1 = build_hankel(synth({0.9}, {1.0}, 20), 4);
  PencilConfig def;
  const auto p1 = esprit_poles(h1, def);
  REQUIRE(p1.poles.size() == 1);
  CHECK(std::abs(p1.poles[0] - 0.9) < 1e-10);

  const auto two = synth({0.95, 0.7}, {0.6, 0.4}, 40);
  const auto p2 = esprit_poles(build_hankel(two, 6), theory(2));
  REQUIRE(p2.poles.size() == 2);
  CHECK(nearest(p2.poles, 0.95) < 1e-9);
  CHECK(nearest(p2.poles, 0.7) < 1e-9);

  PencilConfig thr;
  thr.policy = RankPolicy::Threshold;
  const auto p3 = esprit_poles(build_hankel(two, 6), thr);
  CHECK(p3.poles.size() == 2);

  CHECK(esprit_poles(build_hankel(std::vector<double>(30, 0.0), 6), theory(2)).poles.empty());

  // Stacked Hankels share poles.
  const auto a = synth({0.95, 0.7}, {0.6, 0.4}, 40), b = synth({0.95, 0.7}, {-0.2, 0.9}, 40);
  const auto ps = extract_poles({a, b}, 10, theory(2));
  REQUIRE(ps.poles.size() == 2);
  CHECK(nearest(ps.poles, 0.95) < 1e-9);
  CHECK(nearest(ps.poles, 0.7) < 1e-9);

  // The significance policy drops a pole with negligible amplitude.
  std::vector<double> noisy = synth({0.97, 0.6}, {0.8, 1e-9}, 90);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss(0.0, 1e-4);
  for (auto& x : noisy) x += gauss(rng);
  PencilConfig sig;
  sig.expected = 2;
  const auto pn = extract_poles({noisy}, 30, sig);
  CHECK(pn.poles.size() == 1);
  CHECK(std::abs(pn.poles[0] - 0.97) < 1e-3);

  // A decay next to a known constant: projecting the constant out separates them.
  std::vector<double> flat = synth({1.0, 0.9985}, {0.5, 0.5}, 125);
  for (auto& x : flat) x += gauss(rng);
  const auto pk = extract_poles({flat}, 40, sig, {1.0});
  REQUIRE(pk.poles.size() == 1);
  CHECK(std::abs(pk.poles[0] - 0.9985) < 1e-4);
  const auto none = extract_poles({synth({1.0}, {0.7}, 60)}, 20, sig, {1.0});
  REQUIRE(none.poles.size() == 1);
  CHECK(none.poles[0] == Complex(1.0));
}

TEST_CASE("rank policies") {
  const std::vector<double> sv = {1.0, 0.5, 2e-3, 1e-5, 1.1e-5, 0.9e-5, 1e-5};
  PencilConfig c;
  c.policy = RankPolicy::Fixed;
  c.fixed_rank = 2;
  CHECK(select_rank(sv, c) == 2);
  c.policy = RankPolicy::Theory;
  c.expected = 3;
  CHECK(select_rank(sv, c) == 3);
  c.policy = RankPolicy::Threshold;
  CHECK(select_rank(sv, c) == 3);
  c.policy = RankPolicy::NoiseFloor;
  CHECK(select_rank(sv, c) == 3);
  c.policy = RankPolicy::Theory;
  c.expected = 5;
  CHECK(select_rank({1.0, 1e-12, 1e-13}, c) == 1);
  c.expected = 0;
  CHECK(select_rank(sv, c) == 3);
}

TEST_CASE("perturbation stability") {
  const auto clean = synth({0.95, 0.8}, {0.7, 0.3}, 90);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss;
  std::vector<double> pattern(clean.size());
  for (auto& x : pattern) x = gauss(rng);
  auto shift = [&](double eta) {
    auto s = clean;
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += eta * pattern[i];
    const auto ps = extract_poles({s}, 30, theory(2));
    return std::max(nearest(ps.poles, 0.95), nearest(ps.poles, 0.8));
  };
  const double ratio = shift(1e-6) / shift(5e-7);
  CHECK(ratio > 1.3);
  CHECK(ratio < 3.0);
}

TEST_CASE("period subsampling and tau roots") {
  const auto s = synth({0.9}, {1.0}, 17);
  const auto one = period_subsample(s, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == s);
  const auto eight = period_subsample(s, 8);
  REQUIRE(eight.size() == 8);
  for (const auto& sub : eight) CHECK(sub.size() == 2);
  CHECK(eight[3][1] == s[11]);

  const Complex d = std::polar(1.0, M_PI / 4);
  const auto series = synth({0.99 * d, 0.99 * std::conj(d)}, {0.5, 0.5}, 400);
  const auto subs = period_subsample(series, 8);
  const auto ps = extract_poles(subs, int(subs[0].size()) / 3, theory(1));
  REQUIRE(ps.poles.size() == 1);
  CHECK(std::abs(ps.poles[0] - std::pow(0.99, 8)) < 1e-10);
  CHECK(std::abs(ps.poles[0] - 0.922745) < 1e-6);
  CHECK(std::abs(tau_root(ps.poles[0], 8) - 0.99) < 1e-8);
  CHECK(tau_root(Complex(0.5, 1e-9), 1).imag() == 0.0);

  const auto t = unitary_to_transfer(standard_gate("T"));
  Eigen::ComplexEigenSolver<CMatrix> es(t.matrix());
  std::vector<Complex> eig(es.eigenvalues().data(), es.eigenvalues().data() + 4);
  for (auto e : eig) CHECK(std::abs(std::pow(e, 8) - 1.0) < 1e-12);
  CHECK(find_period(eig) == 8);
  CHECK(has_period(eig, 16));
  CHECK_FALSE(has_period(eig, 4));
}

TEST_CASE("amplitude fits") {
  std::vector<int> lengths = range(0, 39);
  const auto one = synth({0.9}, {0.8}, 40);
  const auto f1 = fit_amplitudes(lengths, one, {0.9});
  CHECK(std::abs(f1.amplitudes[0] - one[0]) < 1e-12);
  CHECK(f1.residual < 1e-12);

  const auto two = synth({0.95, 0.7}, {0.6, 0.4}, 40);
  const auto f2 = fit_amplitudes(lengths, two, {0.95, 0.7});
  CHECK(std::abs(f2.amplitudes[0] - 0.6) < 1e-8);
  CHECK(std::abs(f2.amplitudes[1] - 0.4) < 1e-8);

  const auto f3 = fit_amplitudes(lengths, std::vector<double>(40, 0.37), {1.0});
  CHECK(std::abs(f3.amplitudes[0] - 0.37) < 1e-12);
  CHECK_THROWS(fit_amplitudes(lengths, two, {0.9, 0.9}));
}

TEST_CASE("assembly") {
  const Experiment exp(single_t_config(single_t_noise(0.1), 2));
  const auto model = estimation_model(exp);
  CHECK(model.slots.size() == 4);
  std::map<std::string, Complex> ones;
  for (const auto& s : model.slots) ones[s.key] = 1.0;
  const auto a = assemble_fidelity(ones, model);
  CHECK(std::abs(a.sum_lambda - 4.0) < 1e-14);
  CHECK(a.fidelity == doctest::Approx(1.0));

  // True diagonal of the twirled noise.
  std::map<std::string, Complex> truth;
  for (const auto& s : exp.true_basis().slots) truth[s.key()] = s.lambda;
  CHECK(std::abs(assemble_fidelity(truth, model).fidelity - average_fidelity_exact(exp.twirled_noise())) < 1e-12);

  auto missing = ones;
  missing.erase(missing.begin());
  CHECK_THROWS_AS(assemble_fidelity(missing, model), EstimationError);
  auto extra = ones;
  extra["chi2;e#0"] = 1.0;
  CHECK_THROWS_AS(assemble_fidelity(extra, model), EstimationError);

  ExperimentConfig two;
  two.gate = GateSpec::copies("T", 2);
  two.noise = two_t_noise(0.1);
  two.states = initial_state_library(StateLibrary::TwoT);
  two.lengths = {1};
  const auto m2 = estimation_model(Experiment(two));
  int total = 0;
  for (const auto& s : m2.slots) total += s.dim;
  CHECK(m2.slots.size() == 11);
  CHECK(total == 16);
}

TEST_CASE("lambda estimation from exact series") {
  const Experiment ideal(single_t_config(single_t_noise(0.0), 200));
  const auto model = estimation_model(ideal);
  const auto est = estimate_lambdas(exact_all(ideal), model, {});
  CHECK(est.tau == 8);
  CHECK(est.lambdas.size() == 4);
  for (const auto& [key, lam] : est.lambdas) CHECK(std::abs(lam - 1.0) < 1e-6);
  // Slots fixed by an earlier state are projected out, so each slot is fitted once.
  int expected = 0;
  for (const auto& sp : est.states) expected += sp.expected;
  CHECK(expected == 4);
  EstimationOptions plain;
  plain.deflate_known = false;
  expected = 0;
  for (const auto& sp : estimate_lambdas(exact_all(ideal), model, plain).states) expected += sp.expected;
  CHECK(expected == 6);

  // Noise diagonal in the joint basis: the estimate is exact.
  const Experiment diag(single_t_config(NoiseModel::explicit_channel(diagonal_noise(0.995, 0.99)), 400));
  const auto series = exact_all(diag);
  const auto e2 = estimate_lambdas(series, estimation_model(diag), {});
  const auto a2 = assemble_fidelity(e2.lambdas, estimation_model(diag));
  CHECK(std::abs(a2.fidelity - diag.exact_fidelity()) < 1e-6);
  CHECK(std::abs(e2.lambdas.at("chi1;e#0") - 0.995) < 1e-8);

  // Decimated series have poles lambda^8 directly.
  for (auto [state, lam] : {std::pair{1, 0.99}, std::pair{2, 0.995}}) {
    const auto subs = period_subsample(series[std::size_t(state)].values, 8);
    const auto ps = extract_poles(subs, int(subs[0].size()) / 3, theory(2));
    CHECK(nearest(ps.poles, std::pow(lam, 8)) < 1e-10);
    CHECK(nearest(ps.poles, 1.0) < 1e-10);
  }

  auto gappy = series;
  gappy[0].lengths[3] += 1;
  CHECK_THROWS_AS(estimate_lambdas(gappy, estimation_model(diag), {}), EstimationError);
  EstimationOptions bad;
  bad.tau = 3;
  CHECK_THROWS_AS(estimate_lambdas(series, estimation_model(diag), bad), EstimationError);
}

TEST_CASE("bootstrap") {
  const Experiment ideal(single_t_config(single_t_noise(0.0), 120));
  ExperimentConfig cfg = ideal.config();
  cfg.sequences_per_length = 4;
  const Experiment exp(cfg);
  const auto data = run_experiment(exp);
  const auto table = SurvivalTable::from_dataset(data);
  CHECK(table.states.size() == 3);
  CHECK(table.lengths.size() == 120);
  BootstrapOptions b;
  b.resamples = 20;
  const auto est = bootstrap_fidelity(table, estimation_model(exp), {}, b);
  CHECK(est.samples == 20);
  CHECK(est.failures == 0);
  CHECK(est.ci_high - est.ci_low < 1e-9);
  CHECK(est.fidelity == doctest::Approx(1.0).epsilon(1e-9));

  // A single resample of the full data without replacement is the plain estimate.
  ExperimentConfig noisy_cfg = cfg;
  noisy_cfg.noise = single_t_noise(0.1);
  const Experiment noisy(noisy_cfg);
  const auto nt = SurvivalTable::from_dataset(run_experiment(noisy));
  BootstrapOptions id;
  id.resamples = 1;
  id.with_replacement = false;
  const auto one = bootstrap_fidelity(nt, estimation_model(noisy), {}, id);
  CHECK(one.fidelity == doctest::Approx(one.plain_assembly.fidelity).epsilon(1e-12));

  // Same seed, same intervals.
  BootstrapOptions r;
  r.resamples = 10;
  const auto x = bootstrap_fidelity(nt, estimation_model(noisy), {}, r);
  const auto y = bootstrap_fidelity(nt, estimation_model(noisy), {}, r);
  CHECK(x.resampled == y.resampled);

  CHECK(percentile({1, 2, 3, 4, 5}, 0.5) == 3.0);
  CHECK(percentile({1, 2}, 0.25) == doctest::Approx(1.25));
  CHECK_THROWS_AS(percentile({}, 0.5), EstimationError);
}
