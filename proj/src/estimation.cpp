#include "symrb/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "symrb/errors.hpp"
#include "symrb/parallel.hpp"

namespace symrb {

RMatrix build_hankel(const std::vector<double>& series, int pencil) {
  const int n = int(series.size());
  if (pencil < 1) throw EstimationError("pencil parameter must be at least 1");
  if (n < pencil + 2)
    throw EstimationError("series of length " + std::to_string(n) + " is too short for pencil " +
                          std::to_string(pencil));
  RMatrix h(n - pencil, pencil + 1);
  for (int i = 0; i < n - pencil; ++i)
    for (int k = 0; k <= pencil; ++k) h(i, k) = series[std::size_t(i + k)];
  return h;
}

int select_rank(const std::vector<double>& sv, const PencilConfig& cfg) {
  if (sv.empty() || !(sv[0] > 0.0)) return 0;
  const int len = int(sv.size());
  int m = 0;
  switch (cfg.policy) {
    case RankPolicy::NoiseFloor: {
      const int cap = std::clamp(cfg.expected, 1, len);
      double tail = 0.0;
      if (cap < len) {
        const int end = std::min(len, cap + std::max(5, len / 4));
        std::vector<double> t(sv.begin() + cap, sv.begin() + end);
        tail = percentile(t, 0.5);
      }
      for (int j = 0; j < cap; ++j)
        if (sv[std::size_t(j)] > cfg.noise_floor * tail) ++m;
      m = std::max(m, 1);
      break;
    }
    case RankPolicy::Significance:
    case RankPolicy::Theory:
      if (cfg.expected > 0) {
        m = std::min(cfg.expected, len);
        break;
      }
      // No theory count: fall back to the relative threshold.
      [[fallthrough]];
    case RankPolicy::Threshold:
      for (double s : sv)
        if (s > cfg.sigma_rel * sv[0]) ++m;
      break;
    case RankPolicy::Fixed: m = std::min(cfg.fixed_rank, len); break;
  }
  while (m > 0 && sv[std::size_t(m - 1)] <= cfg.sigma_floor * sv[0]) --m;
  return m;
}

namespace {

std::vector<Complex> shift_poles(const RMatrix& w, int m) {
  const RMatrix w0 = w.topRows(w.rows() - 1).leftCols(m);
  const RMatrix w1 = w.bottomRows(w.rows() - 1).leftCols(m);
  const RMatrix phi = w0.completeOrthogonalDecomposition().solve(w1);
  Eigen::EigenSolver<RMatrix> es(phi, false);
  std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

// Nearly real poles become real; coincident poles are merged.
std::vector<Complex> clean_poles(std::vector<Complex> poles) {
  for (auto& p : poles)
    if (std::abs(p.imag()) < 1e-8) p = p.real();
  std::vector<Complex> out;
  for (const auto& p : poles) {
    bool dup = false;
    for (const auto& q : out) dup = dup || std::abs(p - q) < 1e-8;
    if (!dup) out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    return std::arg(a) < std::arg(b);
  });
  return out;
}

}  // namespace

namespace {

struct LeftSvd {
  RMatrix u;
  std::vector<double> s;
};

// Left singular vectors via a QR reduction to a square triangular factor.
// BDCSVD in Eigen 3.4.0 can return NaN vectors for exactly rank-one input.
LeftSvd left_svd(const RMatrix& m) {
  LeftSvd out;
  if (m.rows() <= m.cols()) {
    Eigen::HouseholderQR<RMatrix> qr(m.transpose());
    const RMatrix r = qr.matrixQR().topRows(m.rows()).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<RMatrix> svd(r.transpose(), Eigen::ComputeFullU);
    out.u = svd.matrixU();
    out.s.assign(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
  } else {
    Eigen::HouseholderQR<RMatrix> qr(m);
    const RMatrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<RMatrix> svd(r, Eigen::ComputeFullU);
    const RMatrix q = qr.householderQ() * RMatrix::Identity(m.rows(), m.cols());
    out.u = q * svd.matrixU();
    out.s.assign(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
  }
  return out;
}

RMatrix stack(const std::vector<RMatrix>& hankels) {
  if (hankels.empty()) throw EstimationError("no Hankel blocks given");
  const auto rows = hankels[0].rows();
  Eigen::Index cols = 0;
  for (const auto& h : hankels) {
    if (h.rows() != rows) throw EstimationError("stacked Hankel blocks differ in height");
    cols += h.cols();
  }
  RMatrix stacked(rows, cols);
  Eigen::Index at = 0;
  for (const auto& h : hankels) {
    stacked.middleCols(at, h.cols()) = h;
    at += h.cols();
  }
  return stacked;
}

// Least-squares residual of the series against fixed poles.
double residual(const std::vector<std::vector<double>>& series, const std::vector<Complex>& poles) {
  const auto n = Eigen::Index(series[0].size());
  CMatrix v(n, Eigen::Index(poles.size()));
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t j = 0; j < poles.size(); ++j) v(i, Eigen::Index(j)) = std::pow(poles[j], int(i));
  const auto qr = v.colPivHouseholderQr();
  double rss = 0.0;
  for (const auto& s : series) {
    const CVector y = Eigen::Map<const RVector>(s.data(), n).cast<Complex>();
    rss += (v * qr.solve(y) - y).squaredNorm();
  }
  return rss;
}

std::vector<Complex> joined(std::vector<Complex> a, const std::vector<Complex>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Orthonormal real basis of the Vandermonde vectors of the poles.
RMatrix vandermonde_basis(const std::vector<Complex>& poles, Eigen::Index len) {
  RMatrix v(len, 2 * Eigen::Index(poles.size()));
  for (std::size_t j = 0; j < poles.size(); ++j)
    for (Eigen::Index i = 0; i < len; ++i) {
      const Complex p = std::pow(poles[j], int(i));
      v(i, 2 * Eigen::Index(j)) = p.real();
      v(i, 2 * Eigen::Index(j) + 1) = p.imag();
    }
  Eigen::ColPivHouseholderQR<RMatrix> qr(v);
  qr.setThreshold(1e-10);
  return qr.householderQ() * RMatrix::Identity(len, qr.rank());
}

// Removes the known poles from the row space, leaving the others in the column space.
void project_out(RMatrix& m, const std::vector<Complex>& known) {
  if (known.empty()) return;
  const RMatrix q = vandermonde_basis(known, m.cols());
  m -= (m * q) * q.transpose();
}

PoleSet poles_from_subspace(const LeftSvd& svd, const PencilConfig& cfg,
                            const std::vector<std::vector<double>>* series, const std::vector<Complex>& known = {}) {
  PoleSet out;
  out.singular_values = svd.s;
  int m = std::min<int>(select_rank(out.singular_values, cfg), int(svd.u.rows()) - 1);
  while (m > 0) {
    out.poles = clean_poles(shift_poles(svd.u, m));
    if (cfg.policy != RankPolicy::Significance || !series) break;
    out.z_scores = pole_significance(*series, joined(out.poles, known));
    out.z_scores.resize(out.poles.size());
    if (m == 1) break;
    double weakest = *std::min_element(out.z_scores.begin(), out.z_scores.end());
    // A fitted pole can chase the noise next to a real one and earn a large amplitude.
    // Refit with one pole fewer and score the residual drop instead.
    const double rss = residual(*series, joined(out.poles, known));
    const double dof = double(series->size()) * double(series->front().size() - out.poles.size() - known.size());
    const double gain = residual(*series, joined(clean_poles(shift_poles(svd.u, m - 1)), known)) - rss;
    weakest = std::min(weakest, std::sqrt(std::max(gain, 0.0) / std::max(rss / dof, 1e-300)));
    if (weakest >= cfg.significance) break;
    --m;
  }
  return out;
}

}  // namespace

PoleSet esprit_poles(const RMatrix& hankel, const PencilConfig& cfg) {
  std::vector<std::vector<double>> series(1);
  for (Eigen::Index i = 0; i < hankel.rows(); ++i) series[0].push_back(hankel(i, 0));
  for (Eigen::Index k = 1; k < hankel.cols(); ++k) series[0].push_back(hankel(hankel.rows() - 1, k));
  return poles_from_subspace(left_svd(hankel.transpose()), cfg, &series);
}

PoleSet esprit_poles_stacked(const std::vector<RMatrix>& hankels, const PencilConfig& cfg) {
  std::vector<std::vector<double>> series;
  for (const auto& h : hankels) {
    series.emplace_back();
    for (Eigen::Index i = 0; i < h.rows(); ++i) series.back().push_back(h(i, 0));
    for (Eigen::Index k = 1; k < h.cols(); ++k) series.back().push_back(h(h.rows() - 1, k));
  }
  return poles_from_subspace(left_svd(stack(hankels)), cfg, &series);
}

std::vector<double> pole_significance(const std::vector<std::vector<double>>& series,
                                      const std::vector<Complex>& poles) {
  const std::size_t m = poles.size();
  if (series.empty() || m == 0) return {};
  const auto n = Eigen::Index(series[0].size());
  if (n <= Eigen::Index(m)) throw EstimationError("series too short for the pole count");
  CMatrix v(n, Eigen::Index(m));
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) v(i, Eigen::Index(j)) = std::pow(poles[j], int(i));
  const auto qr = v.colPivHouseholderQr();
  const CMatrix gram_inv = (v.adjoint() * v).inverse();
  std::vector<double> energy(m, 0.0);
  double rss = 0.0;
  for (const auto& s : series) {
    if (Eigen::Index(s.size()) != n) throw EstimationError("series differ in length");
    const CVector y = Eigen::Map<const RVector>(s.data(), n).cast<Complex>();
    const CVector xi = qr.solve(y);
    rss += (v * xi - y).squaredNorm();
    for (std::size_t j = 0; j < m; ++j) energy[j] += std::norm(xi[Eigen::Index(j)]);
  }
  const double dof = double(series.size()) * double(n - Eigen::Index(m));
  const double sigma2 = std::max(rss / dof, 1e-300);
  std::vector<double> z(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double c = std::abs(gram_inv(Eigen::Index(j), Eigen::Index(j)));
    z[j] = std::sqrt(energy[j] / (double(series.size()) * sigma2 * c));
    if (!std::isfinite(z[j])) z[j] = 0.0;
  }
  return z;
}

PoleSet extract_poles(const std::vector<std::vector<double>>& series, int pencil, const PencilConfig& cfg,
                      const std::vector<Complex>& known) {
  if (series.empty()) throw EstimationError("no series given");
  std::vector<RMatrix> blocks;
  for (const auto& s : series) blocks.push_back(build_hankel(s, pencil));
  if (blocks.size() == 1) blocks[0].transposeInPlace();
  double before = 0.0, after = 0.0;
  for (auto& b : blocks) {
    before = std::max(before, b.norm());
    project_out(b, known);
    after = std::max(after, b.norm());
  }
  if (!known.empty() && after <= 1e-10 * before) {
    // Nothing beyond the known poles: the new slots share them.
    PoleSet out;
    for (const auto& x : known)
      if (std::none_of(out.poles.begin(), out.poles.end(), [&](Complex y) { return std::abs(x - y) < 1e-9; }))
        out.poles.push_back(x);
    return out;
  }
  if (blocks.size() == 1) return poles_from_subspace(left_svd(blocks[0]), cfg, &series, known);
  return poles_from_subspace(left_svd(stack(blocks)), cfg, &series, known);
}

std::vector<std::vector<double>> period_subsample(const std::vector<double>& series, int tau) {
  if (tau < 1) throw EstimationError("period must be at least 1");
  const std::size_t n = series.size() / std::size_t(tau);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(tau));
  for (int r = 0; r < tau; ++r) {
    auto& sub = out[std::size_t(r)];
    sub.reserve(n);
    for (std::size_t i = 0; i < n; ++i) sub.push_back(series[std::size_t(r) + i * std::size_t(tau)]);
  }
  return out;
}

Complex tau_root(Complex x, int tau) {
  if (tau < 1) throw EstimationError("root order must be at least 1");
  if (x == Complex(0.0)) return 0.0;
  Complex r = std::polar(std::pow(std::abs(x), 1.0 / tau), std::arg(x) / tau);
  if (std::abs(r.imag()) < 1e-6) r = r.real();
  return r;
}

bool has_period(const std::vector<Complex>& eigenvalues, int tau, double tol) {
  for (const auto& d : eigenvalues)
    if (std::abs(std::pow(d, tau) - 1.0) > tol) return false;
  return true;
}

int find_period(const std::vector<Complex>& eigenvalues, int tau_max, double tol) {
  for (int tau = 1; tau <= tau_max; ++tau)
    if (has_period(eigenvalues, tau, tol)) return tau;
  throw EstimationError("gate eigenvalues have no common period up to " + std::to_string(tau_max) +
                        "; estimate without subsampling (tau = 1)");
}

AmplitudeFit fit_amplitudes(const std::vector<int>& lengths, const std::vector<double>& values,
                            const std::vector<Complex>& poles) {
  if (lengths.size() != values.size()) throw EstimationError("fit_amplitudes: size mismatch");
  AmplitudeFit fit;
  if (poles.empty()) return fit;
  for (std::size_t i = 0; i < poles.size(); ++i)
    for (std::size_t j = i + 1; j < poles.size(); ++j)
      if (std::abs(poles[i] - poles[j]) <= 1e-10) throw EstimationError("fit_amplitudes: coincident poles");
  const auto rows = Eigen::Index(values.size());
  const auto cols = Eigen::Index(poles.size());
  CMatrix v(rows, cols);
  CVector f(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    f[i] = values[std::size_t(i)];
    for (Eigen::Index j = 0; j < cols; ++j) v(i, j) = std::pow(poles[std::size_t(j)], lengths[std::size_t(i)]);
  }
  Eigen::JacobiSVD<CMatrix> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  fit.condition = s[s.size() - 1] > 0 ? s[0] / s[s.size() - 1] : INFINITY;
  fit.ill_conditioned = !(fit.condition <= 1e12);
  const CVector xi = svd.solve(f);
  fit.amplitudes.assign(xi.data(), xi.data() + xi.size());
  fit.residual = rows > 0 ? (v * xi - f).norm() / std::sqrt(double(rows)) : 0.0;
  return fit;
}

const SlotSpec& EstimationModel::slot(const std::string& key) const {
  for (const auto& s : slots)
    if (s.key == key) return s;
  throw EstimationError("unknown slot '" + key + "'");
}

EstimationModel estimation_model(const Experiment& exp) {
  EstimationModel m;
  m.hilbert_dim = exp.hilbert_dim();
  for (const auto& s : exp.ideal_slots()) m.slots.push_back({s.key(), s.dim, s.gate_eigenvalue});
  const auto& states = exp.config().states;
  for (std::size_t i = 0; i < states.size(); ++i) {
    StateSpec st{int(i), states[i].name, {}};
    for (const auto& t : states[i].targets) st.targets.push_back(t.key());
    m.states.push_back(std::move(st));
  }
  return m;
}

namespace {

// Slot -> pole maps: onto the poles when there are no more poles than slots,
// one-to-one otherwise.  Slots already estimated anchor the choice; new
// slots prefer the root with the smallest phase.
std::map<std::string, Complex> assign_slots(const std::vector<Complex>& poles, const std::vector<const SlotSpec*>& slots,
                                            const std::map<std::string, Complex>& known, int period) {
  const std::size_t np = poles.size(), ns = slots.size();
  const bool onto = np <= ns;
  double combos = std::pow(double(np), double(ns));
  if (combos > 2e6) throw EstimationError("too many pole/slot combinations to assign");
  std::vector<std::vector<Complex>> lam(ns, std::vector<Complex>(np));
  std::vector<std::vector<double>> cost(ns, std::vector<double>(np));
  for (std::size_t s = 0; s < ns; ++s) {
    const Complex dp = std::pow(slots[s]->gate_eigenvalue, period);
    const auto it = known.find(slots[s]->key);
    for (std::size_t p = 0; p < np; ++p) {
      lam[s][p] = tau_root(poles[p] / dp, period);
      cost[s][p] = it != known.end() ? std::abs(lam[s][p] - it->second) : std::abs(std::arg(lam[s][p]));
    }
  }
  std::vector<std::size_t> pick(ns, 0), best;
  double best_cost = INFINITY;
  std::vector<int> used(np), anchored(np);
  while (true) {
    std::fill(used.begin(), used.end(), 0);
    std::fill(anchored.begin(), anchored.end(), 0);
    double c = 0.0;
    bool ok = true;
    for (std::size_t s = 0; s < ns; ++s) {
      c += cost[s][pick[s]];
      if (++used[pick[s]] > 1 && !onto) ok = false;
      if (known.count(slots[s]->key)) anchored[pick[s]] = 1;
    }
    // A new slot only shares a pole with an estimated one when it has to.
    for (std::size_t s = 0; s < ns; ++s)
      if (!known.count(slots[s]->key) && anchored[pick[s]]) c += 1.0;
    if (onto) ok = std::all_of(used.begin(), used.end(), [](int u) { return u > 0; });
    if (ok && c < best_cost - 1e-15) {
      best_cost = c;
      best = pick;
    }
    std::size_t s = 0;
    while (s < ns && ++pick[s] == np) pick[s++] = 0;
    if (s == ns) break;
  }
  if (best.empty()) throw EstimationError("no admissible pole assignment");
  std::map<std::string, Complex> out;
  for (std::size_t s = 0; s < ns; ++s) out[slots[s]->key] = lam[s][best[s]];
  return out;
}

}  // namespace

LambdaEstimate estimate_lambdas(const std::vector<Series>& series, const EstimationModel& model,
                                const EstimationOptions& opts) {
  LambdaEstimate est;
  std::vector<Complex> eigs;
  for (const auto& s : model.slots) eigs.push_back(s.gate_eigenvalue);
  if (opts.tau > 0) {
    if (!has_period(eigs, opts.tau))
      throw EstimationError("gate eigenvalues are not periodic with tau = " + std::to_string(opts.tau));
    est.tau = opts.tau;
  } else {
    est.tau = find_period(eigs);
  }

  const std::vector<int>* lengths = nullptr;
  for (const auto& st : model.states) {
    if (!opts.states.empty() && std::find(opts.states.begin(), opts.states.end(), st.state_id) == opts.states.end())
      continue;
    const auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.state == st.state_id; });
    if (it == series.end()) throw EstimationError("no data for state " + std::to_string(st.state_id));
    if (!lengths) {
      lengths = &it->lengths;
      if (lengths->size() < 2) throw EstimationError("need at least two sequence lengths");
      est.step = (*lengths)[1] - (*lengths)[0];
      for (std::size_t i = 1; i < lengths->size(); ++i)
        if ((*lengths)[i] - (*lengths)[i - 1] != est.step || est.step < 1)
          throw EstimationError("sequence lengths must be equally spaced and increasing");
    } else if (it->lengths != *lengths) {
      throw EstimationError("states were measured at different lengths");
    }

    StatePoles sp;
    sp.state_id = st.state_id;
    const int period = est.tau * est.step;
    std::vector<const SlotSpec*> slots;
    std::vector<Complex> known;
    for (const auto& key : st.targets) {
      const auto& slot = model.slot(key);
      const auto k = est.lambdas.find(key);
      if (opts.deflate_known && k != est.lambdas.end()) {
        known.push_back(std::pow(k->second, period) * std::pow(slot.gate_eigenvalue, period));
      } else {
        slots.push_back(&slot);
      }
    }
    sp.expected = int(slots.size());
    if (slots.empty()) {
      est.states.push_back(std::move(sp));
      continue;
    }
    PencilConfig cfg = opts.rank;
    cfg.expected = sp.expected;

    const auto subs = period_subsample(it->values, est.tau);
    sp.deflated = known;
    const int n = int(subs[0].size());
    const int pencil =
        opts.pencil > 0 ? opts.pencil : std::max(sp.expected + 1, int(std::floor(n * opts.pencil_fraction)));
    const auto ps = opts.multichannel ? extract_poles(subs, pencil, cfg, known)
                                      : extract_poles({subs[0]}, pencil, cfg, known);
    sp.poles = ps.poles;
    sp.singular_values = ps.singular_values;
    if (sp.poles.empty()) throw EstimationError("no poles found for state " + std::to_string(st.state_id));
    sp.partial = int(sp.poles.size()) < sp.expected;
    est.partial = est.partial || sp.partial;
    sp.assigned = assign_slots(sp.poles, slots, est.lambdas, period);
    for (const auto& [k, v] : sp.assigned) est.lambdas.emplace(k, v);
    est.states.push_back(std::move(sp));
  }
  if (est.states.empty()) throw EstimationError("no states selected");
  return est;
}

Assembly assemble_fidelity(const std::map<std::string, Complex>& lambdas, const EstimationModel& model) {
  Assembly a;
  for (const auto& [k, v] : lambdas) model.slot(k);
  for (const auto& s : model.slots) {
    const auto it = lambdas.find(s.key);
    if (it == lambdas.end()) throw EstimationError("slot " + s.key + " was not addressed by any state");
    a.sum_lambda += double(s.dim) * it->second;
  }
  const double d = model.hilbert_dim;
  a.fidelity = (a.sum_lambda.real() + d) / (d * (d + 1));
  return a;
}

SurvivalTable SurvivalTable::from_dataset(const ExperimentDataset& data) {
  SurvivalTable t;
  for (const auto& r : data.records) {
    if (std::find(t.states.begin(), t.states.end(), r.state_id) == t.states.end()) t.states.push_back(r.state_id);
    if (std::find(t.lengths.begin(), t.lengths.end(), r.length) == t.lengths.end()) t.lengths.push_back(r.length);
  }
  std::sort(t.states.begin(), t.states.end());
  std::sort(t.lengths.begin(), t.lengths.end());
  t.values.assign(t.states.size(), std::vector<std::vector<double>>(t.lengths.size()));
  for (const auto& r : data.records) {
    const auto s = std::lower_bound(t.states.begin(), t.states.end(), r.state_id) - t.states.begin();
    const auto l = std::lower_bound(t.lengths.begin(), t.lengths.end(), r.length) - t.lengths.begin();
    t.values[std::size_t(s)][std::size_t(l)].push_back(r.survival);
  }
  for (const auto& per_state : t.values)
    for (const auto& v : per_state)
      if (v.empty()) throw EstimationError("dataset has lengths missing for some states");
  return t;
}

std::vector<Series> SurvivalTable::means() const {
  std::vector<Series> out;
  for (std::size_t s = 0; s < states.size(); ++s) {
    Series sr;
    sr.state = states[s];
    sr.lengths = lengths;
    for (const auto& v : values[s]) sr.values.push_back(std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()));
    out.push_back(std::move(sr));
  }
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw EstimationError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * double(values.size() - 1);
  const auto lo = std::size_t(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - double(lo)) * (values[hi] - values[lo]);
}

FidelityEstimate bootstrap_fidelity(const SurvivalTable& table, const EstimationModel& model,
                                    const EstimationOptions& opts, const BootstrapOptions& boot) {
  FidelityEstimate out;
  out.plain = estimate_lambdas(table.means(), model, opts);
  out.plain_assembly = assemble_fidelity(out.plain.lambdas, model);
  if (boot.resamples <= 0) {
    out.fidelity = out.median = out.ci_low = out.ci_high = out.plain_assembly.fidelity;
    return out;
  }

  std::vector<double> results(std::size_t(boot.resamples), NAN);
  parallel_for(
      results.size(),
      [&](std::size_t b) {
        std::mt19937_64 rng(record_seed(boot.seed, int(b), 0, 0));
        std::vector<Series> series;
        for (std::size_t s = 0; s < table.states.size(); ++s) {
          Series sr;
          sr.state = table.states[s];
          sr.lengths = table.lengths;
          for (const auto& v : table.values[s]) {
            const std::size_t k = v.size();
            const std::size_t m = boot.subset > 0 ? std::size_t(boot.subset) : k;
            if (m > k && !boot.with_replacement) throw EstimationError("subset larger than the sample");
            double sum = 0.0;
            if (boot.with_replacement) {
              std::uniform_int_distribution<std::size_t> pick(0, k - 1);
              for (std::size_t i = 0; i < m; ++i) sum += v[pick(rng)];
            } else {
              std::vector<std::size_t> idx(k);
              std::iota(idx.begin(), idx.end(), 0);
              if (m < k) std::shuffle(idx.begin(), idx.end(), rng);
              for (std::size_t i = 0; i < m; ++i) sum += v[idx[i]];
            }
            sr.values.push_back(sum / double(m));
          }
          series.push_back(std::move(sr));
        }
        try {
          results[b] = assemble_fidelity(estimate_lambdas(series, model, opts).lambdas, model).fidelity;
        } catch (const EstimationError&) {
          // counted below
        }
      },
      boot.threads);

  for (double r : results) {
    if (std::isfinite(r)) {
      out.resampled.push_back(r);
    } else {
      ++out.failures;
    }
  }
  out.samples = int(out.resampled.size());
  if (double(out.failures) > boot.max_failure_fraction * double(boot.resamples) || out.resampled.empty())
    throw EstimationError("estimation failed on " + std::to_string(out.failures) + " of " +
                          std::to_string(boot.resamples) + " bootstrap resamples");
  out.fidelity = std::accumulate(out.resampled.begin(), out.resampled.end(), 0.0) / double(out.samples);
  out.median = percentile(out.resampled, 0.5);
  out.ci_low = percentile(out.resampled, 0.025);
  out.ci_high = percentile(out.resampled, 0.975);
  return out;
}

}  // namespace symrb
