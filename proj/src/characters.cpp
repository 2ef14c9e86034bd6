// Conjugacy classes, Mackey-induced characters and multiplicities of the
// Pauli-Liouville representation.

#include <algorithm>
#include <cmath>
#include <map>

#include "symrb/errors.hpp"
#include "symrb/groups.hpp"
#include "symrb/numeric_policy.hpp"

namespace symrb {

namespace {

// Character tables of S_1..S_4 indexed by cycle type (descending partition).
struct SymmetricIrrep {
  std::string name;
  std::map<std::vector<int>, int> values;
};

const std::vector<SymmetricIrrep>& symmetric_irreps(int k) {
  static const std::vector<std::vector<SymmetricIrrep>> tables = {
      {},
      {{"e", {{{1}, 1}}}},
      {{"e", {{{1, 1}, 1}, {{2}, 1}}}, {"sgn", {{{1, 1}, 1}, {{2}, -1}}}},
      {{"e", {{{1, 1, 1}, 1}, {{2, 1}, 1}, {{3}, 1}}},
       {"sgn", {{{1, 1, 1}, 1}, {{2, 1}, -1}, {{3}, 1}}},
       {"std", {{{1, 1, 1}, 2}, {{2, 1}, 0}, {{3}, -1}}}},
      {{"e", {{{1, 1, 1, 1}, 1}, {{2, 1, 1}, 1}, {{2, 2}, 1}, {{3, 1}, 1}, {{4}, 1}}},
       {"sgn", {{{1, 1, 1, 1}, 1}, {{2, 1, 1}, -1}, {{2, 2}, 1}, {{3, 1}, 1}, {{4}, -1}}},
       {"std", {{{1, 1, 1, 1}, 3}, {{2, 1, 1}, 1}, {{2, 2}, -1}, {{3, 1}, 0}, {{4}, -1}}},
       {"std_sgn", {{{1, 1, 1, 1}, 3}, {{2, 1, 1}, -1}, {{2, 2}, -1}, {{3, 1}, 0}, {{4}, 1}}},
       {"2dim", {{{1, 1, 1, 1}, 2}, {{2, 1, 1}, 0}, {{2, 2}, 2}, {{3, 1}, -1}, {{4}, 0}}}},
  };
  if (k < 1 || k > 4) throw ValidationError("stabilizer factor S_" + std::to_string(k) + " is not supported");
  return tables[std::size_t(k)];
}

std::vector<int> cycle_type(const std::vector<int>& perm, const std::vector<int>& part) {
  std::vector<int> lengths;
  std::vector<bool> seen(perm.size(), false);
  for (int start : part) {
    if (seen[std::size_t(start)]) continue;
    int len = 0;
    int x = start;
    while (!seen[std::size_t(x)]) {
      seen[std::size_t(x)] = true;
      x = perm[std::size_t(x)];
      ++len;
    }
    lengths.push_back(len);
  }
  std::sort(lengths.rbegin(), lengths.rend());
  return lengths;
}

std::vector<int> act_on_word(const std::vector<int>& perm, const std::vector<int>& word) {
  std::vector<int> out(word.size());
  for (std::size_t f = 0; f < word.size(); ++f) out[std::size_t(perm[f])] = word[f];
  return out;
}

// Irreps of the stabilizer: tuples of S_k irreps over the nontrivial parts.
struct StabilizerIrrep {
  std::string name;
  int dim = 1;
  std::vector<int> choice;  // irrep index per nontrivial part
};

std::vector<StabilizerIrrep> stabilizer_irreps(const CharacterOrbit& orbit) {
  std::vector<int> sizes;
  for (const auto& part : orbit.parts)
    if (part.size() >= 2) sizes.push_back(int(part.size()));
  std::vector<StabilizerIrrep> out;
  std::vector<int> choice(sizes.size(), 0);
  while (true) {
    StabilizerIrrep irr;
    irr.choice = choice;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const auto& rep = symmetric_irreps(sizes[i])[std::size_t(choice[i])];
      names.push_back(rep.name);
      irr.dim *= rep.values.at(std::vector<int>(std::size_t(sizes[i]), 1));
    }
    const bool trivial = std::all_of(names.begin(), names.end(), [](const std::string& s) { return s == "e"; });
    if (trivial) {
      irr.name = "e";
    } else if (sizes.size() == 2 && sizes[0] == 2 && sizes[1] == 2) {
      // Klein four group: the three nontrivial characters.
      irr.name = names[1] == "e" ? "ker_a" : (names[0] == "e" ? "ker_b" : "ker_c");
    } else {
      for (std::size_t i = 0; i < names.size(); ++i) irr.name += (i ? "x" : "") + names[i];
    }
    out.push_back(irr);
    std::size_t i = 0;
    for (; i < sizes.size(); ++i) {
      if (++choice[i] < int(symmetric_irreps(sizes[i]).size())) break;
      choice[i] = 0;
    }
    if (i == sizes.size()) break;
  }
  return out;
}

int stabilizer_value(const StabilizerIrrep& irr, const CharacterOrbit& orbit, const std::vector<int>& perm) {
  int v = 1;
  std::size_t i = 0;
  for (const auto& part : orbit.parts) {
    if (part.size() < 2) continue;
    const auto& rep = symmetric_irreps(int(part.size()))[std::size_t(irr.choice[i++])];
    v *= rep.values.at(cycle_type(perm, part));
  }
  return v;
}

}  // namespace

ConjugacyClasses conjugacy_classes(const SymmetryGroup& g) {
  const int n = int(g.size());
  ConjugacyClasses cc;
  cc.class_of.assign(std::size_t(n), -1);
  std::vector<int> inverse(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) inverse[std::size_t(t)] = g.inverse(t);
  for (int s = 0; s < n; ++s) {
    if (cc.class_of[std::size_t(s)] >= 0) continue;
    const int id = int(cc.representatives.size());
    cc.representatives.push_back(s);
    std::size_t count = 0;
    for (int t = 0; t < n; ++t) {
      const int c = g.multiply(g.multiply(t, s), inverse[std::size_t(t)]);
      if (cc.class_of[std::size_t(c)] < 0) {
        cc.class_of[std::size_t(c)] = id;
        ++count;
      }
    }
    cc.sizes.push_back(count);
  }
  return cc;
}

// ---------------------------------------------------------------------------

AbelianCharacters::AbelianCharacters(const SymmetryGroup& g) : group_(&g), count_(g.local_size()) {}

Complex AbelianCharacters::value(std::size_t c, std::size_t a) const {
  const auto cw = word(c);
  const auto aw = group_->local_word(a);
  Complex v = 1.0;
  for (std::size_t f = 0; f < cw.size(); ++f) v *= group_->local_groups()[f].character(cw[f], aw[f]);
  return v;
}

std::vector<int> AbelianCharacters::word(std::size_t c) const { return group_->local_word(c); }
std::size_t AbelianCharacters::index(const std::vector<int>& w) const { return group_->local_index(w); }

std::string AbelianCharacters::name(const std::vector<int>& w) const {
  std::string s;
  for (std::size_t f = 0; f < w.size(); ++f) s += (f ? "," : "") + group_->local_groups()[f].character_name(w[f]);
  return s;
}

AbelianCharacters abelian_characters(const SymmetryGroup& g) { return AbelianCharacters(g); }

std::vector<CharacterOrbit> orbits_and_stabilizers(const SymmetryGroup& g) {
  const AbelianCharacters chars(g);
  const auto& layout = g.layout();
  std::vector<CharacterOrbit> out;
  for (std::size_t c = 0; c < chars.size(); ++c) {
    const auto w = chars.word(c);
    std::vector<std::vector<int>> images;
    bool canonical = true;
    CharacterOrbit orbit;
    for (std::size_t p = 0; p < g.perm_size(); ++p) {
      auto img = act_on_word(g.permutation(p), w);
      if (img < w) canonical = false;
      if (img == w) orbit.stabilizer.push_back(p);
      images.push_back(std::move(img));
    }
    if (!canonical) continue;
    std::sort(images.begin(), images.end());
    orbit.orbit_size = std::size_t(std::unique(images.begin(), images.end()) - images.begin());
    orbit.representative = w;
    std::map<std::pair<int, int>, std::size_t> part_of;
    for (int f = 0; f < layout.num_factors(); ++f) {
      const auto key = std::make_pair(layout.factor(f).block, w[std::size_t(f)]);
      auto it = part_of.find(key);
      if (it == part_of.end()) {
        part_of.emplace(key, orbit.parts.size());
        orbit.parts.push_back({f});
      } else {
        orbit.parts[it->second].push_back(f);
      }
    }
    std::size_t expected = 1;
    for (const auto& part : orbit.parts)
      for (std::size_t k = 2; k <= part.size(); ++k) expected *= k;
    if (expected != orbit.stabilizer.size() || orbit.orbit_size * orbit.stabilizer.size() != g.perm_size())
      throw ConsistencyError("stabilizer is not a product of symmetric groups");
    out.push_back(std::move(orbit));
  }
  std::sort(out.begin(), out.end(),
            [](const CharacterOrbit& a, const CharacterOrbit& b) { return a.representative < b.representative; });
  return out;
}

CharacterTable induced_characters(const SymmetryGroup& g) {
  CharacterTable table;
  table.group_order = g.size();
  table.classes = conjugacy_classes(g);
  const auto& classes = table.classes;
  const std::size_t num_classes = classes.representatives.size();
  const int n = int(g.size());
  const std::size_t np = g.perm_size();
  const std::size_t na = g.local_size();

  // t^-1 s t for every class representative s and every t.
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> conj(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    const int s = classes.representatives[c];
    conj[c].reserve(std::size_t(n));
    for (int t = 0; t < n; ++t) {
      const int u = g.multiply(g.multiply(g.inverse(t), s), t);
      conj[c].emplace_back(std::uint32_t(g.local_part(u)), std::uint32_t(g.perm_part(u)));
    }
  }

  const AbelianCharacters chars(g);
  for (const auto& orbit : orbits_and_stabilizers(g)) {
    const std::size_t cr = chars.index(orbit.representative);
    std::vector<Complex> chi_r(na);
    for (std::size_t a = 0; a < na; ++a) chi_r[a] = chars.value(cr, a);
    std::vector<bool> in_h(np, false);
    for (auto p : orbit.stabilizer) in_h[p] = true;
    const auto thetas = stabilizer_irreps(orbit);
    std::vector<std::vector<int>> theta_values(thetas.size(), std::vector<int>(np, 0));
    for (std::size_t k = 0; k < thetas.size(); ++k)
      for (auto p : orbit.stabilizer) theta_values[k][p] = stabilizer_value(thetas[k], orbit, g.permutation(p));

    const double norm = 1.0 / double(na * orbit.stabilizer.size());
    std::vector<std::vector<Complex>> values(thetas.size(), std::vector<Complex>(num_classes));
    std::vector<Complex> bins(np);
    for (std::size_t c = 0; c < num_classes; ++c) {
      std::fill(bins.begin(), bins.end(), Complex(0.0));
      for (const auto& [a, p] : conj[c])
        if (in_h[p]) bins[p] += chi_r[a];
      for (std::size_t k = 0; k < thetas.size(); ++k) {
        Complex v = 0.0;
        for (auto p : orbit.stabilizer) v += bins[p] * double(theta_values[k][p]);
        values[k][c] = v * norm;
      }
    }
    const std::string word_name = chars.name(orbit.representative);
    for (std::size_t k = 0; k < thetas.size(); ++k) {
      IrrepLabel label{orbit.representative, thetas[k].name, word_name + ";" + thetas[k].name};
      const auto id_class = std::size_t(classes.class_of[0]);
      const double dim = values[k][id_class].real();
      const long rounded = std::lround(dim);
      if (std::abs(dim - double(rounded)) > 1e-8 ||
          rounded != long(orbit.orbit_size) * thetas[k].dim)
        throw ConsistencyError("induced character dimension mismatch for " + label.text);
      table.labels.push_back(std::move(label));
      table.dims.push_back(int(rounded));
      table.values.push_back(std::move(values[k]));
    }
  }

  long sum_sq = 0;
  for (int d : table.dims) sum_sq += long(d) * d;
  if (sum_sq != long(g.size()))
    throw ConsistencyError("character completeness failed: sum of squared dimensions " + std::to_string(sum_sq) +
                           " != |G| = " + std::to_string(g.size()));
  if (table.num_irreps() != num_classes)
    throw ConsistencyError("number of irreps differs from number of conjugacy classes");
  return table;
}

std::size_t CharacterTable::find(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i].text == label) return i;
  throw ValidationError("unknown irrep label '" + label + "'");
}

// ---------------------------------------------------------------------------

IrrepDecomposition decompose_transfer_rep(const SymmetryGroup& g, const CharacterTable& table) {
  const auto& classes = table.classes;
  std::vector<double> phi(classes.representatives.size());
  for (std::size_t c = 0; c < phi.size(); ++c) phi[c] = g.transfer(classes.representatives[c]).trace();
  IrrepDecomposition dec;
  dec.group_order = g.size();
  dec.total_irreps = table.num_irreps();
  const double tol = numeric_policy().multiplicity_tol;
  for (std::size_t i = 0; i < table.num_irreps(); ++i) {
    Complex m = 0.0;
    for (std::size_t c = 0; c < phi.size(); ++c)
      m += double(classes.sizes[c]) * std::conj(table.values[i][c]) * phi[c];
    m /= double(g.size());
    const long rounded = std::lround(m.real());
    if (std::abs(m - Complex(double(rounded), 0.0)) > tol)
      throw ConsistencyError("non-integer multiplicity for " + table.labels[i].text);
    if (rounded < 0) throw ConsistencyError("negative multiplicity for " + table.labels[i].text);
    if (rounded > 0) dec.components.push_back({i, table.labels[i].text, table.dims[i], int(rounded)});
  }
  if (dec.dimension_sum() != int(pauli_count(g.num_qubits())))
    throw ConsistencyError("multiplicities do not add up to the representation dimension");
  return dec;
}

int IrrepDecomposition::multiplicity_sum() const {
  int s = 0;
  for (const auto& c : components) s += c.multiplicity;
  return s;
}

int IrrepDecomposition::dimension_sum() const {
  int s = 0;
  for (const auto& c : components) s += c.multiplicity * c.dim;
  return s;
}

const IrrepComponent* IrrepDecomposition::find(const std::string& label) const {
  for (const auto& c : components)
    if (c.label == label) return &c;
  return nullptr;
}

CMatrix irrep_projector(const SymmetryGroup& g, const CharacterTable& table, std::size_t irrep) {
  const auto dim = Eigen::Index(pauli_count(g.num_qubits()));
  CMatrix p = CMatrix::Zero(dim, dim);
  std::vector<Complex> class_weight(table.classes.representatives.size());
  for (std::size_t c = 0; c < class_weight.size(); ++c) class_weight[c] = std::conj(table.values[irrep][c]);
  for (int e = 0; e < int(g.size()); ++e) {
    const Complex w = class_weight[std::size_t(table.classes.class_of[std::size_t(e)])];
    if (w == Complex(0.0)) continue;
    const auto& t = g.transfer(e);
    for (Eigen::Index k = 0; k < dim; ++k) p(t.image(std::size_t(k)), k) += w * double(t.sign(std::size_t(k)));
  }
  return p * (double(table.dims[irrep]) / double(g.size()));
}

CMatrix abelian_projector(const SymmetryGroup& g, const std::vector<int>& character_word) {
  const AbelianCharacters chars(g);
  const std::size_t c = chars.index(character_word);
  const auto dim = Eigen::Index(pauli_count(g.num_qubits()));
  CMatrix p = CMatrix::Zero(dim, dim);
  for (std::size_t a = 0; a < g.local_size(); ++a) {
    const Complex w = std::conj(chars.value(c, a));
    const auto& t = g.transfer(g.element(a, 0));
    for (Eigen::Index k = 0; k < dim; ++k) p(t.image(std::size_t(k)), k) += w * double(t.sign(std::size_t(k)));
  }
  return p / double(g.local_size());
}

}  // namespace symrb
