#include "symrb/groups.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "symrb/errors.hpp"
#include "symrb/numeric_policy.hpp"

namespace symrb {

namespace {

constexpr double kPi = 3.14159265358979323846;

// exp(2 pi i num / den), exact for quarter turns.
Complex root_of_unity(long num, long den) {
  num %= den;
  if (num < 0) num += den;
  if ((4 * num) % den == 0) {
    static const Complex quarter[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return quarter[(4 * num) / den];
  }
  return std::polar(1.0, 2.0 * kPi * double(num) / double(den));
}

SignedPermutation monomial_or_throw(const CMatrix& u, const char* what) {
  auto m = SignedPermutation::from_matrix(unitary_to_transfer(u).matrix(), 1e-9);
  if (!m) throw ValidationError(std::string(what) + ": transfer matrix is not a signed permutation");
  return *m;
}

}  // namespace

const std::vector<CliffordChannel>& single_qubit_cliffords() {
  static const std::vector<CliffordChannel> list = [] {
    const double r = 1.0 / std::sqrt(2.0);
    CMatrix h(2, 2), s(2, 2);
    h << r, r, r, -r;
    s << 1, 0, 0, Complex(0, 1);
    std::vector<CliffordChannel> out;
    std::unordered_map<SignedPermutation, int, SignedPermutationHash> seen;
    const CMatrix id = CMatrix::Identity(2, 2);
    out.push_back({"I", id, monomial_or_throw(id, "clifford")});
    seen.emplace(out.back().transfer, 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (int gi = 0; gi < 2; ++gi) {
        const CMatrix& g = gi == 0 ? h : s;
        CMatrix u = out[i].unitary * g;
        auto t = monomial_or_throw(u, "clifford");
        if (seen.count(t)) continue;
        std::string w = out[i].word == "I" ? "" : out[i].word;
        seen.emplace(t, int(out.size()));
        out.push_back({w + (gi == 0 ? "H" : "S"), u, t});
      }
    }
    if (out.size() != 24) throw ConsistencyError("single-qubit Clifford closure did not give 24 channels");
    return out;
  }();
  return list;
}

// ---------------------------------------------------------------------------

LocalGroup LocalGroup::trivial(int width) {
  LocalGroup g;
  g.width_ = width;
  const int d = 1 << width;
  g.unitaries_.push_back(CMatrix::Identity(d, d));
  g.transfers_.push_back(SignedPermutation(pauli_count(width)));
  g.finish();
  return g;
}

LocalGroup LocalGroup::generated_by(const std::vector<CMatrix>& generators) {
  if (generators.empty()) throw ValidationError("local group needs at least one generator");
  LocalGroup g;
  g.width_ = qubits_for_dimension(generators.front().rows());
  const int d = 1 << g.width_;
  std::vector<SignedPermutation> gens;
  for (const auto& u : generators) {
    if (u.rows() != d) throw ValidationError("local group generators have mixed dimensions");
    gens.push_back(monomial_or_throw(u, "local group generator"));
  }
  g.unitaries_.push_back(CMatrix::Identity(d, d));
  g.transfers_.push_back(SignedPermutation(pauli_count(g.width_)));
  g.index_.emplace(g.transfers_.back(), 0);
  for (std::size_t i = 0; i < g.transfers_.size(); ++i) {
    for (std::size_t k = 0; k < gens.size(); ++k) {
      // channel gens[k] o element i
      SignedPermutation t = gens[k] * g.transfers_[i];
      if (g.index_.count(t)) continue;
      if (g.transfers_.size() >= 4096) throw ResourceLimitError("local group too large");
      g.index_.emplace(t, int(g.transfers_.size()));
      g.transfers_.push_back(t);
      g.unitaries_.push_back(g.unitaries_[i] * generators[k]);
    }
  }
  g.finish();
  return g;
}

void LocalGroup::finish() {
  const int n = size();
  index_.clear();
  for (int a = 0; a < n; ++a) index_.emplace(transfers_[std::size_t(a)], a);
  mult_.assign(std::size_t(n * n), -1);
  inv_.assign(std::size_t(n), -1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int c = find(transfers_[std::size_t(a)] * transfers_[std::size_t(b)]);
      if (c < 0) throw ValidationError("local group is not closed");
      mult_[std::size_t(a * n + b)] = c;
      if (c == 0) inv_[std::size_t(a)] = b;
    }
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (mult_[std::size_t(a * n + b)] != mult_[std::size_t(b * n + a)])
        throw ValidationError("local symmetry group is not abelian; use the local part alone (G = A_n)");

  std::vector<int> order(static_cast<std::size_t>(n), 1);
  for (int a = 0; a < n; ++a) {
    int x = a;
    while (x != 0) {
      x = multiply(x, a);
      ++order[std::size_t(a)];
    }
  }
  // Smallest set of generators whose powers give every element exactly once.
  generators_.clear();
  orders_.clear();
  exponents_.assign(std::size_t(n), {});
  if (n == 1) return;
  for (int r = 1; r <= 16; ++r) {
    std::vector<int> pick(static_cast<std::size_t>(r));
    std::iota(pick.begin(), pick.end(), 1);
    while (true) {
      long prod = 1;
      for (int p : pick) prod *= order[std::size_t(p)];
      if (prod == n) {
        std::vector<std::vector<int>> exps(static_cast<std::size_t>(n));
        std::vector<int> e(static_cast<std::size_t>(r), 0);
        bool ok = true;
        for (long idx = 0; idx < prod && ok; ++idx) {
          int x = 0;
          for (int i = 0; i < r; ++i)
            for (int k = 0; k < e[std::size_t(i)]; ++k) x = multiply(x, pick[std::size_t(i)]);
          if (!exps[std::size_t(x)].empty() || (x == 0 && idx != 0)) ok = false;
          exps[std::size_t(x)] = e;
          for (int i = 0; i < r; ++i) {
            if (++e[std::size_t(i)] < order[std::size_t(pick[std::size_t(i)])]) break;
            e[std::size_t(i)] = 0;
          }
        }
        if (ok) {
          generators_ = pick;
          for (int p : pick) orders_.push_back(order[std::size_t(p)]);
          exponents_ = exps;
          return;
        }
      }
      // next combination
      int i = r - 1;
      while (i >= 0 && pick[std::size_t(i)] == n - r + i) --i;
      if (i < 0) break;
      ++pick[std::size_t(i)];
      for (int j = i + 1; j < r; ++j) pick[std::size_t(j)] = pick[std::size_t(j - 1)] + 1;
    }
  }
  throw ConsistencyError("no cyclic decomposition found for local group");
}

int LocalGroup::find(const SignedPermutation& t) const {
  auto it = index_.find(t);
  return it == index_.end() ? -1 : it->second;
}

Complex LocalGroup::character(int c, int a) const {
  Complex v = 1.0;
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    const int ci = c % orders_[i];
    c /= orders_[i];
    v *= root_of_unity(long(ci) * exponents_[std::size_t(a)][i], orders_[i]);
  }
  return v;
}

std::string LocalGroup::character_name(int c) const { return "chi" + std::to_string(c); }

bool LocalGroup::same_as(const LocalGroup& other) const {
  return width_ == other.width_ && transfers_ == other.transfers_;
}

LocalGroup local_symmetry_group(const CMatrix& gate) {
  if (gate.rows() != 2 || gate.cols() != 2)
    throw ValidationError("automatic local symmetry search needs a single-qubit gate");
  const CMatrix tg = unitary_to_transfer(gate).matrix();
  std::vector<CMatrix> members;
  for (const auto& c : single_qubit_cliffords()) {
    const CMatrix tc = c.transfer.to_dense().cast<Complex>();
    if ((tc * tg - tg * tc).cwiseAbs().maxCoeff() < 1e-9) members.push_back(c.unitary);
  }
  // Every member as a generator keeps the element order aligned with the Clifford list.
  return LocalGroup::generated_by(members);
}

LocalGroup local_symmetry_group(const CMatrix& gate, const std::vector<CMatrix>& generators) {
  const CMatrix tg = unitary_to_transfer(gate).matrix();
  LocalGroup g = LocalGroup::generated_by(generators);
  if (g.width() != qubits_for_dimension(gate.rows()))
    throw ValidationError("local group width does not match the gate");
  for (int a = 0; a < g.size(); ++a) {
    const CMatrix ta = g.transfer(a).to_dense().cast<Complex>();
    if ((ta * tg - tg * ta).cwiseAbs().maxCoeff() > 1e-9)
      throw ValidationError("supplied local symmetry does not commute with the gate");
  }
  return g;
}

// ---------------------------------------------------------------------------

Layout::Layout(std::vector<std::pair<std::string, CMatrix>> factors) {
  int q = 0;
  for (auto& [name, u] : factors) {
    if (!is_unitary(u, numeric_policy().equality_tol)) throw ValidationError("factor '" + name + "' is not unitary");
    Factor f;
    f.name = name;
    f.unitary = u;
    f.width = qubits_for_dimension(u.rows());
    f.first_qubit = q;
    f.block = -1;
    for (const auto& prev : factors_) {
      if (prev.name == name && prev.width == f.width && (prev.unitary - u).cwiseAbs().maxCoeff() < 1e-12) {
        f.block = prev.block;
        break;
      }
    }
    if (f.block < 0) f.block = num_blocks_++;
    q += f.width;
    factors_.push_back(std::move(f));
  }
  num_qubits_ = q;
  if (factors_.empty()) throw ValidationError("layout has no factors");
}

CMatrix Layout::unitary() const {
  CMatrix u = factors_.front().unitary;
  for (std::size_t f = 1; f < factors_.size(); ++f) u = kron(u, factors_[f].unitary);
  return u;
}

// ---------------------------------------------------------------------------

int SymmetryGroup::multiply(int g, int h) const {
  const std::size_t a1 = local_part(g), p1 = perm_part(g);
  const std::size_t a2 = local_part(h), p2 = perm_part(h);
  return element(local_multiply(a1, act(p1, a2)), perm_multiply(p1, p2));
}

int SymmetryGroup::inverse(int g) const {
  const std::size_t pi = perm_inverse(perm_part(g));
  return element(act(pi, local_inverse(local_part(g))), pi);
}

int SymmetryGroup::find(const SignedPermutation& t) const {
  auto it = index_.find(t);
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> SymmetryGroup::local_word(std::size_t a) const {
  std::vector<int> w(locals_.size());
  for (std::size_t f = 0; f < locals_.size(); ++f) {
    const auto s = std::size_t(locals_[f].size());
    w[f] = int(a % s);
    a /= s;
  }
  return w;
}

std::size_t SymmetryGroup::local_index(const std::vector<int>& word) const {
  std::size_t a = 0, stride = 1;
  for (std::size_t f = 0; f < locals_.size(); ++f) {
    a += std::size_t(word[f]) * stride;
    stride *= std::size_t(locals_[f].size());
  }
  return a;
}

SignedPermutation SymmetryGroup::local_transfer(std::size_t a) const {
  const std::size_t dim = pauli_count(num_qubits());
  const auto word = local_word(a);
  std::vector<std::uint32_t> image(dim);
  std::vector<std::int8_t> sign(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    std::size_t img = 0;
    int s = 1;
    for (std::size_t f = 0; f < locals_.size(); ++f) {
      const auto& fac = layout_.factor(int(f));
      const int shift = 2 * fac.first_qubit;
      const std::size_t mask = pauli_count(fac.width) - 1;
      const std::size_t sub = (k >> shift) & mask;
      const auto& t = locals_[f].transfer(word[f]);
      img |= std::size_t(t.image(sub)) << shift;
      s *= t.sign(sub);
    }
    image[k] = std::uint32_t(img);
    sign[k] = std::int8_t(s);
  }
  return SignedPermutation(std::move(image), std::move(sign));
}

SignedPermutation SymmetryGroup::perm_transfer(std::size_t p) const {
  const std::size_t dim = pauli_count(num_qubits());
  const auto& perm = perms_[p];
  std::vector<std::uint32_t> image(dim);
  std::vector<std::int8_t> sign(dim, 1);
  for (std::size_t k = 0; k < dim; ++k) {
    std::size_t img = 0;
    for (int f = 0; f < layout_.num_factors(); ++f) {
      const auto& fac = layout_.factor(f);
      const std::size_t mask = pauli_count(fac.width) - 1;
      const std::size_t sub = (k >> (2 * fac.first_qubit)) & mask;
      img |= sub << (2 * layout_.factor(perm[std::size_t(f)]).first_qubit);
    }
    image[k] = std::uint32_t(img);
  }
  return SignedPermutation(std::move(image), std::move(sign));
}

CMatrix SymmetryGroup::unitary(int g) const {
  const auto word = local_word(local_part(g));
  CMatrix ua = locals_[0].unitary(word[0]);
  for (std::size_t f = 1; f < locals_.size(); ++f) ua = kron(ua, locals_[f].unitary(word[f]));
  // Permutation unitary moving factor f to slot perm[f]; the channel convention
  // U^dag rho U needs its transpose.
  const int n = num_qubits();
  const int d = 1 << n;
  const auto& perm = perms_[perm_part(g)];
  CMatrix w = CMatrix::Zero(d, d);
  for (int x = 0; x < d; ++x) {
    int y = 0;
    for (int f = 0; f < layout_.num_factors(); ++f) {
      const auto& src = layout_.factor(f);
      const auto& dst = layout_.factor(perm[std::size_t(f)]);
      for (int b = 0; b < src.width; ++b) {
        const int bit = (x >> (n - 1 - (src.first_qubit + b))) & 1;
        y |= bit << (n - 1 - (dst.first_qubit + b));
      }
    }
    w(y, x) = 1.0;
  }
  // channel A o P  <->  unitary U_P U_A
  return w.transpose() * ua;
}

void SymmetryGroup::build_elements() {
  std::vector<SignedPermutation> lt(local_size_), pt(perm_size_);
  for (std::size_t a = 0; a < local_size_; ++a) lt[a] = local_transfer(a);
  for (std::size_t p = 0; p < perm_size_; ++p) pt[p] = perm_transfer(p);
  transfers_.clear();
  transfers_.reserve(size());
  index_.clear();
  index_.reserve(size());
  for (std::size_t a = 0; a < local_size_; ++a) {
    for (std::size_t p = 0; p < perm_size_; ++p) {
      transfers_.push_back(lt[a] * pt[p]);
      if (!index_.emplace(transfers_.back(), int(transfers_.size() - 1)).second)
        throw ConsistencyError("symmetry group labels are not faithful on the Pauli basis");
    }
  }
}

SymmetryGroup tensor_power_group(const std::vector<LocalGroup>& locals, const Layout& layout) {
  if (int(locals.size()) != layout.num_factors()) throw ValidationError("one local group per factor required");
  check_qubit_limit(layout.num_qubits());
  SymmetryGroup g;
  g.layout_ = layout;
  g.locals_ = locals;
  std::size_t total = 1;
  for (int f = 0; f < layout.num_factors(); ++f) {
    if (locals[std::size_t(f)].width() != layout.factor(f).width)
      throw ValidationError("local group width does not match its factor");
    total *= std::size_t(locals[std::size_t(f)].size());
    if (total > 65536) throw ResourceLimitError("local symmetry group too large");
  }
  g.local_size_ = total;
  g.perm_size_ = 1;
  g.perms_ = {std::vector<int>(std::size_t(layout.num_factors()))};
  std::iota(g.perms_[0].begin(), g.perms_[0].end(), 0);
  g.a_mult_.resize(total * total);
  g.a_inv_.resize(total);
  for (std::size_t a = 0; a < total; ++a) {
    const auto wa = g.local_word(a);
    std::vector<int> wi(wa.size());
    for (std::size_t f = 0; f < wa.size(); ++f) wi[f] = locals[f].inverse(wa[f]);
    g.a_inv_[a] = g.local_index(wi);
    for (std::size_t b = 0; b < total; ++b) {
      const auto wb = g.local_word(b);
      std::vector<int> w(wa.size());
      for (std::size_t f = 0; f < wa.size(); ++f) w[f] = locals[f].multiply(wa[f], wb[f]);
      g.a_mult_[a * total + b] = g.local_index(w);
    }
  }
  g.p_mult_ = {0};
  g.p_inv_ = {0};
  g.act_.resize(total);
  std::iota(g.act_.begin(), g.act_.end(), std::size_t(0));
  g.build_elements();
  return g;
}

SymmetryGroup permutation_rep(const Layout& layout) {
  SymmetryGroup g;
  g.layout_ = layout;
  const int m = layout.num_factors();
  for (int f = 0; f < m; ++f) g.locals_.push_back(LocalGroup::trivial(layout.factor(f).width));
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (int f = 0; f < m; ++f)
      if (layout.factor(perm[std::size_t(f)]).block != layout.factor(f).block) ok = false;
    if (ok) g.perms_.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  g.local_size_ = 1;
  g.perm_size_ = g.perms_.size();
  const std::size_t np = g.perm_size_;
  auto find_perm = [&](const std::vector<int>& q) {
    for (std::size_t i = 0; i < np; ++i)
      if (g.perms_[i] == q) return i;
    throw ConsistencyError("permutation group is not closed");
  };
  g.p_mult_.resize(np * np);
  g.p_inv_.resize(np);
  for (std::size_t p = 0; p < np; ++p) {
    std::vector<int> inv(static_cast<std::size_t>(m));
    for (int f = 0; f < m; ++f) inv[std::size_t(g.perms_[p][std::size_t(f)])] = f;
    g.p_inv_[p] = find_perm(inv);
    for (std::size_t q = 0; q < np; ++q) {
      std::vector<int> c(static_cast<std::size_t>(m));
      for (int f = 0; f < m; ++f) c[std::size_t(f)] = g.perms_[p][std::size_t(g.perms_[q][std::size_t(f)])];
      g.p_mult_[p * np + q] = find_perm(c);
    }
  }
  g.a_mult_ = {0};
  g.a_inv_ = {0};
  g.act_.assign(np, 0);
  g.build_elements();
  return g;
}

SymmetryGroup semidirect_group(const SymmetryGroup& a, const SymmetryGroup& p) {
  if (a.perm_size() != 1) throw ValidationError("semidirect_group: first argument must be a local group");
  if (p.local_size() != 1) throw ValidationError("semidirect_group: second argument must be a permutation group");
  if (a.layout().num_factors() != p.layout().num_factors() || a.num_qubits() != p.num_qubits())
    throw ValidationError("semidirect_group: layouts differ");
  SymmetryGroup g;
  g.layout_ = a.layout_;
  g.locals_ = a.locals_;
  g.perms_ = p.perms_;
  g.local_size_ = a.local_size_;
  g.perm_size_ = p.perm_size_;
  g.a_mult_ = a.a_mult_;
  g.a_inv_ = a.a_inv_;
  g.p_mult_ = p.p_mult_;
  g.p_inv_ = p.p_inv_;
  g.act_.resize(g.perm_size_ * g.local_size_);
  for (std::size_t pi = 0; pi < g.perm_size_; ++pi) {
    const auto& tp = p.transfer(int(pi));
    const auto tpi = tp.inverse();
    for (std::size_t ai = 0; ai < g.local_size_; ++ai) {
      const int c = a.find(tp * a.transfer(int(ai)) * tpi);
      if (c < 0) throw ValidationError("local group is not normalized by the factor permutations");
      g.act_[pi * g.local_size_ + ai] = std::size_t(c);
    }
  }
  g.build_elements();
  return g;
}

SymmetryGroup build_symmetry_group(const Layout& layout, const std::vector<std::vector<CMatrix>>& wide_locals) {
  std::vector<LocalGroup> locals;
  std::vector<int> block_source(static_cast<std::size_t>(layout.num_blocks()), -1);
  for (int f = 0; f < layout.num_factors(); ++f) {
    const auto& fac = layout.factor(f);
    const int src = block_source[std::size_t(fac.block)];
    if (src >= 0) {
      locals.push_back(locals[std::size_t(src)]);
      continue;
    }
    block_source[std::size_t(fac.block)] = f;
    if (std::size_t(f) < wide_locals.size() && !wide_locals[std::size_t(f)].empty()) {
      locals.push_back(local_symmetry_group(fac.unitary, wide_locals[std::size_t(f)]));
    } else if (fac.width == 1) {
      locals.push_back(local_symmetry_group(fac.unitary));
    } else {
      throw ValidationError("factor '" + fac.name + "' spans several qubits; supply its local symmetry generators");
    }
  }
  return semidirect_group(tensor_power_group(locals, layout), permutation_rep(layout));
}

}  // namespace symrb
