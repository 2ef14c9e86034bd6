#include "symrb/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "symrb/errors.hpp"
#include "symrb/numeric_policy.hpp"
#include "symrb/parallel.hpp"

namespace symrb {

SlotRef SlotRef::parse(const std::string& text) {
  const auto hash = text.rfind('#');
  SlotRef r;
  if (hash == std::string::npos) {
    r.irrep = text;
    return r;
  }
  r.irrep = text.substr(0, hash);
  try {
    r.copy = std::stoi(text.substr(hash + 1));
  } catch (const std::exception&) {
    throw ValidationError("malformed slot reference '" + text + "'");
  }
  return r;
}

std::vector<InitialState> initial_state_library(StateLibrary which) {
  const Complex i(0.0, 1.0);
  std::vector<InitialState> out;
  if (which == StateLibrary::SingleT) {
    CMatrix mixed = CMatrix::Identity(2, 2) / 2.0;
    CMatrix zero = CMatrix::Zero(2, 2);
    zero(0, 0) = 1.0;
    CMatrix plus_y(2, 2);
    plus_y << 0.5, -0.5 * i, 0.5 * i, 0.5;
    out.push_back({"mixed", mixed, {{"chi0;e", 0}}});
    out.push_back({"zero", zero, {{"chi0;e", 0}, {"chi0;e", 1}}});
    out.push_back({"plus_y", plus_y, {{"chi0;e", 0}, {"chi1;e", 0}, {"chi3;e", 0}}});
    return out;
  }
  const std::string triv = "chi0,chi0;e";
  const Complex e8 = i / 8.0;
  CMatrix s1 = CMatrix::Identity(4, 4) / 4.0;
  CMatrix s2 = CMatrix::Zero(4, 4);
  s2(0, 0) = s2(3, 3) = 0.5;
  CMatrix s3 = CMatrix::Zero(4, 4);
  s3(0, 0) = 0.5;
  s3(1, 1) = s3(2, 2) = 0.25;
  CMatrix s4 = CMatrix::Identity(4, 4) / 4.0;
  s4(0, 3) = s4(3, 0) = -0.25;
  CMatrix s5 = CMatrix::Zero(4, 4);
  s5(0, 0) = s5(3, 3) = 0.25;
  s5(1, 1) = 0.5;
  CMatrix s6(4, 4), s7(4, 4);
  s6 << 0.25, -e8, -e8, 0, e8, 0.25, 0, e8, e8, 0, 0.25, e8, 0, -e8, -e8, 0.25;
  s7 << 0.25, -e8, -e8, 0, e8, 0.25, 0, -e8, e8, 0, 0.25, -e8, 0, e8, e8, 0.25;
  CMatrix s8 = CMatrix::Identity(4, 4) / 4.0;
  s8(1, 2) = Complex(0.25, -0.25) / std::sqrt(2.0);
  s8(2, 1) = Complex(0.25, 0.25) / std::sqrt(2.0);
  const std::vector<SlotRef> mixed_pair = {{triv, 0},           {"chi0,chi1;e", 0}, {"chi0,chi1;e", 1},
                                           {"chi0,chi3;e", 0}, {"chi0,chi3;e", 1}};
  out.push_back({"mixed", s1, {{triv, 0}}});
  out.push_back({"zz", s2, {{triv, 0}, {triv, 1}}});
  out.push_back({"z_sum", s3, {{triv, 0}, {triv, 2}}});
  out.push_back({"xx_yy", s4, {{triv, 0}, {"chi1,chi1;e", 0}, {"chi3,chi3;e", 0}}});
  out.push_back({"z_diff", s5, {{triv, 0}, {"chi0,chi0;sgn", 0}}});
  out.push_back({"y_plus", s6, mixed_pair});
  out.push_back({"y_minus", s7, mixed_pair});
  out.push_back({"xy_mix", s8, {{triv, 0}, {"chi1,chi3;e", 0}}});
  return out;
}

// ---------------------------------------------------------------------------

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config)) {
  if (config_.lengths.empty()) throw ConfigError("no sequence lengths given");
  for (int l : config_.lengths)
    if (l < 1) throw ConfigError("sequence lengths must be at least 1");
  if (config_.sequences_per_length < 1) throw ConfigError("sequences per length must be at least 1");
  if (config_.shots < 0) throw ConfigError("shots must be non-negative");
  if (config_.states.empty()) throw ConfigError("no initial states given");
  const double records =
      double(config_.lengths.size()) * config_.sequences_per_length * double(config_.states.size());
  if (records > double(kMaxRecords))
    throw ConfigError("experiment needs " + std::to_string(std::llround(records)) + " records, limit is " +
                      std::to_string(kMaxRecords));

  group_ = std::make_shared<SymmetryGroup>(build_symmetry_group(config_.gate.layout(), config_.wide_locals));
  table_ = std::make_shared<CharacterTable>(induced_characters(*group_));
  dec_ = decompose_transfer_rep(*group_, *table_);
  gate_ = perturbed_gate(config_.noise, config_.gate, config_.inversion_noise);
  twirled_ = twirl(gate_.noise, *group_);
  ideal_slots_ = joint_basis(TransferMatrix::identity(group_->num_qubits()), gate_.ideal, *group_, *table_, dec_).slots;
  basis_ = joint_basis(twirled_, gate_.ideal, *group_, *table_, dec_);

  for (const auto& s : config_.states) {
    if (s.rho.rows() != gate_.ideal.hilbert_dim()) throw ConfigError("state '" + s.name + "' has wrong dimension");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(s.rho);
    if (!is_hermitian(s.rho, 1e-12) || es.eigenvalues().minCoeff() < -1e-12 || std::abs(s.rho.trace() - 1.0) > 1e-12)
      throw ConfigError("state '" + s.name + "' is not a density matrix");
    states_.push_back(vectorize_state(s.rho));
    if (s.targets.empty()) throw ConfigError("state '" + s.name + "' declares no target slots");
    std::vector<std::size_t> irreps;
    for (const auto& t : s.targets) {
      const auto* comp = dec_.find(t.irrep);
      if (!comp) throw ConfigError("state '" + s.name + "' targets irrep '" + t.irrep + "' absent from the decomposition");
      if (t.copy < 0 || t.copy >= comp->multiplicity)
        throw ConfigError("state '" + s.name + "' targets copy " + std::to_string(t.copy) + " of " + t.irrep +
                          " which has multiplicity " + std::to_string(comp->multiplicity));
      if (std::find(irreps.begin(), irreps.end(), comp->irrep) == irreps.end()) irreps.push_back(comp->irrep);
    }
    CMatrix p = CMatrix::Zero(states_.back().coeffs.size(), states_.back().coeffs.size());
    for (auto a : irreps) p += irrep_projector(*group_, *table_, a);
    const double weight = (p * states_.back().coeffs).squaredNorm() / states_.back().coeffs.squaredNorm();
    if (weight < 0.99)
      throw ConfigError("state '" + s.name + "' has only " + std::to_string(weight) +
                        " of its weight on the declared irreps");
  }
  if (config_.effects.empty()) {
    for (const auto& s : config_.states) effects_.push_back(vectorize_effect(s.rho));
  } else {
    if (config_.effects.size() != 1 && config_.effects.size() != config_.states.size())
      throw ConfigError("give one effect, or one effect per state");
    for (const auto& e : config_.effects) {
      if (e.rows() != gate_.ideal.hilbert_dim()) throw ConfigError("effect has wrong dimension");
      effects_.push_back(vectorize_effect(e));
    }
  }
}

int Experiment::effect_for_state(int state) const { return effects_.size() == 1 ? 0 : state; }

// ---------------------------------------------------------------------------

std::uint64_t record_seed(std::uint64_t master, int length, int seq_id, int state_id) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(master);
  h = mix(h ^ std::uint64_t(std::uint32_t(length)));
  h = mix(h ^ std::uint64_t(std::uint32_t(seq_id)));
  h = mix(h ^ std::uint64_t(std::uint32_t(state_id)));
  return h;
}

std::vector<int> draw_sequence(int length, std::size_t group_size, std::mt19937_64& rng) {
  if (length < 0) throw ValidationError("negative sequence length");
  std::uniform_int_distribution<int> pick(0, int(group_size) - 1);
  std::vector<int> seq(static_cast<std::size_t>(length));
  for (auto& k : seq) k = pick(rng);
  return seq;
}

int sequence_product(const std::vector<int>& seq, const SymmetryGroup& g) {
  int b = g.identity();
  for (int k : seq) {
    if (k < 0 || std::size_t(k) >= g.size()) throw ValidationError("sequence index out of range");
    b = g.multiply(k, b);
  }
  return b;
}

TransferMatrix compile_sequence(const std::vector<int>& seq, const NoisyGate& gate, const SymmetryGroup& g) {
  if (gate.ideal.qubits() != g.num_qubits()) throw ValidationError("compile_sequence: dimension mismatch");
  const int inv = g.inverse(sequence_product(seq, g));
  CMatrix c = CMatrix::Identity(gate.ideal.size(), gate.ideal.size());
  for (int k : seq) c = gate.implemented.matrix() * (g.transfer(k).to_dense().cast<Complex>() * c);
  c = gate.inversion_noise.matrix() * (g.transfer(inv).to_dense().cast<Complex>() * c);
  return TransferMatrix(std::move(c));
}

namespace {

// Real-arithmetic simulator, fixed-size for one and two qubits.
template <int D>
class Simulator {
 public:
  using Mat = Eigen::Matrix<double, D, D>;
  using Vec = Eigen::Matrix<double, D, 1>;

  explicit Simulator(const Experiment& exp) : exp_(exp), g_(exp.group()) {
    const auto dim = exp.gate().ideal.size();
    ut_ = exp.gate().implemented.real();
    lp_ = exp.gate().inversion_noise.real();
    lp_identity_ = (exp.gate().inversion_noise.matrix() - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() == 0.0;
    if (double(g_.size()) * double(dim * dim) <= double(1 << 22)) {
      for (int k = 0; k < int(g_.size()); ++k) m_.push_back(ut_ * g_.transfer(k).to_dense());
    }
    for (const auto& s : exp.states()) rho_.push_back(s.coeffs.real());
    for (const auto& e : exp.effects()) eff_.push_back(e.coeffs.real());
  }

  double survival(const std::vector<int>& seq, int state) const {
    Vec v = rho_[std::size_t(state)];
    Vec tmp = v;
    int b = g_.identity();
    if (!m_.empty()) {
      for (int k : seq) {
        v = m_[std::size_t(k)] * v;
        b = g_.multiply(k, b);
      }
    } else {
      for (int k : seq) {
        g_.transfer(k).apply(v, tmp);
        v.noalias() = ut_ * tmp;
        b = g_.multiply(k, b);
      }
    }
    g_.transfer(g_.inverse(b)).apply(v, tmp);
    if (!lp_identity_) {
      v.noalias() = lp_ * tmp;
    } else {
      v = tmp;
    }
    const double f = eff_[std::size_t(exp_.effect_for_state(state))].dot(v);
    return std::clamp(f, 0.0, 1.0);
  }

 private:
  const Experiment& exp_;
  const SymmetryGroup& g_;
  Mat ut_, lp_;
  bool lp_identity_ = true;
  std::vector<Mat, Eigen::aligned_allocator<Mat>> m_;
  std::vector<Vec, Eigen::aligned_allocator<Vec>> rho_, eff_;
};

template <int D>
void simulate(const Experiment& exp, std::vector<SequenceOutcome>& records, unsigned threads) {
  const Simulator<D> sim(exp);
  const auto& cfg = exp.config();
  const std::size_t group_size = exp.group().size();
  parallel_for(
      records.size(),
      [&](std::size_t i) {
        auto& r = records[i];
        std::mt19937_64 rng(r.seed);
        const auto seq = draw_sequence(r.length, group_size, rng);
        double f = sim.survival(seq, r.state_id);
        if (cfg.shots > 0) {
          std::binomial_distribution<long> binom(cfg.shots, f);
          f = double(binom(rng)) / double(cfg.shots);
        }
        r.survival = f;
      },
      threads);
}

}  // namespace

ExperimentDataset run_experiment(const Experiment& exp, const std::string& config_json, const std::string& config_hash,
                                 unsigned threads) {
  const auto& cfg = exp.config();
  ExperimentDataset data;
  data.config_json = config_json;
  data.config_hash = config_hash;
  const int ns = int(cfg.states.size());
  data.records.reserve(cfg.lengths.size() * std::size_t(cfg.sequences_per_length) * std::size_t(ns));
  for (int l : cfg.lengths)
    for (int q = 0; q < cfg.sequences_per_length; ++q)
      for (int s = 0; s < ns; ++s)
        data.records.push_back({l, q, s, exp.effect_for_state(s), 0.0, cfg.shots, record_seed(cfg.seed, l, q, s)});
  switch (exp.gate().ideal.size()) {
    case 4: simulate<4>(exp, data.records, threads); break;
    case 16: simulate<16>(exp, data.records, threads); break;
    default: simulate<Eigen::Dynamic>(exp, data.records, threads); break;
  }
  return data;
}

double sequence_average(const ExperimentDataset& data, int length, int state) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : data.records) {
    if (r.length == length && r.state_id == state) {
      sum += r.survival;
      ++count;
    }
  }
  if (count == 0)
    throw ValidationError("no records for length " + std::to_string(length) + ", state " + std::to_string(state));
  return sum / double(count);
}

Series survival_series(const ExperimentDataset& data, int state) {
  std::map<int, std::pair<double, std::size_t>> acc;
  for (const auto& r : data.records) {
    if (r.state_id != state) continue;
    auto& a = acc[r.length];
    a.first += r.survival;
    ++a.second;
  }
  if (acc.empty()) throw ValidationError("no records for state " + std::to_string(state));
  Series s;
  s.state = state;
  for (const auto& [l, a] : acc) {
    s.lengths.push_back(l);
    s.values.push_back(a.first / double(a.second));
  }
  return s;
}

std::vector<int> dataset_states(const ExperimentDataset& data) {
  std::vector<int> out;
  for (const auto& r : data.records)
    if (std::find(out.begin(), out.end(), r.state_id) == out.end()) out.push_back(r.state_id);
  std::sort(out.begin(), out.end());
  return out;
}

Series exact_series(const Experiment& exp, int state, const std::vector<int>& lengths) {
  const int effect = exp.effect_for_state(state);
  const CMatrix a = exp.twirled_noise().matrix() * exp.gate().ideal.matrix();
  const CVector e = exp.effects().at(std::size_t(effect)).coeffs;
  const CMatrix& lp = exp.gate().inversion_noise.matrix();
  std::vector<int> sorted = lengths;
  std::sort(sorted.begin(), sorted.end());
  CVector v = exp.states().at(std::size_t(state)).coeffs;
  int at = 0;
  Series s;
  s.state = state;
  for (int l : sorted) {
    if (l < 0) throw ValidationError("negative sequence length");
    for (; at < l; ++at) v = a * v;
    s.lengths.push_back(l);
    s.values.push_back((e.transpose() * (lp * v)).value().real());
  }
  return s;
}

double exact_average_oracle(const Experiment& exp, int length, int state, int effect) {
  const CMatrix a = exp.twirled_noise().matrix() * exp.gate().ideal.matrix();
  CVector v = exp.states().at(std::size_t(state)).coeffs;
  for (int i = 0; i < length; ++i) v = a * v;
  const CVector& e = exp.effects().at(std::size_t(effect)).coeffs;
  return (e.transpose() * (exp.gate().inversion_noise.matrix() * v)).value().real();
}

// ---------------------------------------------------------------------------

double model_predict(int order, const FittingModel& model, int length) {
  if (order != 0 && order != 1) throw ValidationError("model order must be 0 or 1");
  const std::size_t n = model.lambdas.size();
  if (model.eigenvalues.size() != n || model.xi.size() != n) throw ValidationError("fitting model size mismatch");
  std::vector<Complex> a(n);
  for (std::size_t j = 0; j < n; ++j) a[j] = model.lambdas[j] * model.eigenvalues[j];
  Complex f = 0.0;
  for (std::size_t j = 0; j < n; ++j) f += model.xi[j] * std::pow(a[j], length);
  if (order == 1 && model.zeta.size() > 0) {
    if (model.zeta.rows() != Eigen::Index(n) || model.zeta.cols() != Eigen::Index(n))
      throw ValidationError("fitting model coupling size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const Complex z = model.zeta(Eigen::Index(i), Eigen::Index(j));
        if (z == Complex(0.0)) continue;
        Complex geo;
        if (std::abs(a[j] - a[i]) < 1e-12) {
          geo = length == 0 ? Complex(0.0) : double(length) * std::pow(a[j], length - 1);
        } else {
          geo = (std::pow(a[j], length) - std::pow(a[i], length)) / (a[j] - a[i]);
        }
        f += z * geo;
      }
    }
  }
  return f.real();
}

FittingModel true_fitting_model(const Experiment& exp, int state, double support_tol) {
  const auto& basis = exp.true_basis();
  const CMatrix& v = basis.vectors;
  const CMatrix l = v.adjoint() * exp.twirled_noise().matrix() * v;
  const CVector r = v.adjoint() * exp.states().at(std::size_t(state)).coeffs;
  const CVector e =
      (exp.effects().at(std::size_t(exp.effect_for_state(state))).coeffs.transpose() *
       exp.gate().inversion_noise.matrix() * v)
          .transpose();
  // Columns outside the support of rho only enter through zeta(i, j) with j in
  // the support, so they are kept when they couple to it.
  const Eigen::Index n = v.cols();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < n; ++j) {
    bool used = std::abs(r[j]) > support_tol;
    for (Eigen::Index k = 0; k < n && !used; ++k)
      used = std::abs(r[k]) > support_tol && std::abs(e[j]) > support_tol && std::abs(l(j, k)) > support_tol;
    if (used) keep.push_back(j);
  }
  FittingModel m;
  m.zeta = CMatrix::Zero(Eigen::Index(keep.size()), Eigen::Index(keep.size()));
  for (auto j : keep) {
    m.lambdas.push_back(l(j, j));
    m.eigenvalues.push_back(basis.slots[std::size_t(basis.column_slot[std::size_t(j)])].gate_eigenvalue);
    m.xi.push_back(e[j] * r[j]);
  }
  for (std::size_t a = 0; a < keep.size(); ++a)
    for (std::size_t b = 0; b < keep.size(); ++b)
      if (a != b)
        m.zeta(Eigen::Index(a), Eigen::Index(b)) = e[keep[a]] * l(keep[a], keep[b]) * m.eigenvalues[b] * r[keep[b]];
  return m;
}

double variance_bound(int d, int length, double r) {
  if (r < 0 || r > 1) throw ValidationError("infidelity must lie in [0,1]");
  return 4.0 * d * (d + 1) * length * r;
}

}  // namespace symrb
