#pragma once

// Symmetry groups G = A_n x| Pi of a layered gate.
//
// A_n is the direct product of abelian local groups (one per tensor factor of
// the gate), Pi permutes identical factors.  Group multiplication is channel
// composition: g*h means "apply h, then g", i.e. transfer(g) * transfer(h).

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "symrb/superop.hpp"

namespace symrb {

struct CliffordChannel {
  std::string word;  // product of H and S generators that produced it
  CMatrix unitary;
  SignedPermutation transfer;
};

// The 24 single-qubit Clifford channels; element 0 is the identity.
const std::vector<CliffordChannel>& single_qubit_cliffords();

// Finite abelian group of Clifford channels acting on one tensor factor.
class LocalGroup {
 public:
  LocalGroup() = default;

  // Closure of the given unitaries.  Throws ValidationError if the result is
  // not abelian or is not a group of signed-permutation channels.
  static LocalGroup generated_by(const std::vector<CMatrix>& generators);
  static LocalGroup trivial(int width);

  int width() const { return width_; }
  int size() const { return int(transfers_.size()); }
  const CMatrix& unitary(int a) const { return unitaries_[std::size_t(a)]; }
  const SignedPermutation& transfer(int a) const { return transfers_[std::size_t(a)]; }
  int multiply(int a, int b) const { return mult_[std::size_t(a * size() + b)]; }
  int inverse(int a) const { return inv_[std::size_t(a)]; }
  int find(const SignedPermutation& t) const;

  // Characters come from a decomposition into cyclic factors.  Character c is
  // written in mixed radix over the factor orders.
  const std::vector<int>& cycle_orders() const { return orders_; }
  const std::vector<int>& cycle_generators() const { return generators_; }
  Complex character(int c, int a) const;
  std::string character_name(int c) const;

  bool same_as(const LocalGroup& other) const;

 private:
  void finish();

  int width_ = 1;
  std::vector<CMatrix> unitaries_;
  std::vector<SignedPermutation> transfers_;
  std::vector<int> mult_;
  std::vector<int> inv_;
  std::vector<int> generators_;
  std::vector<int> orders_;
  std::vector<std::vector<int>> exponents_;  // element -> exponent tuple
  std::unordered_map<SignedPermutation, int, SignedPermutationHash> index_;
};

// Clifford channels commuting with a single-qubit gate channel.
LocalGroup local_symmetry_group(const CMatrix& gate);
// User-supplied local group; checked to commute with the gate channel.
LocalGroup local_symmetry_group(const CMatrix& gate, const std::vector<CMatrix>& generators);

struct Factor {
  std::string name;
  CMatrix unitary;
  int width = 1;
  int first_qubit = 0;
  int block = 0;
};

// Tensor-factor layout of a gate U_1 x ... x U_m.  Factors with the same name
// and unitary belong to the same block.
class Layout {
 public:
  Layout() = default;
  explicit Layout(std::vector<std::pair<std::string, CMatrix>> factors);

  int num_qubits() const { return num_qubits_; }
  int num_factors() const { return int(factors_.size()); }
  int num_blocks() const { return num_blocks_; }
  const Factor& factor(int f) const { return factors_[std::size_t(f)]; }
  const std::vector<Factor>& factors() const { return factors_; }
  CMatrix unitary() const;

 private:
  std::vector<Factor> factors_;
  int num_qubits_ = 0;
  int num_blocks_ = 0;
};

class SymmetryGroup {
 public:
  SymmetryGroup() = default;

  const Layout& layout() const { return layout_; }
  int num_qubits() const { return layout_.num_qubits(); }
  std::size_t size() const { return local_size_ * perm_size_; }
  std::size_t local_size() const { return local_size_; }
  std::size_t perm_size() const { return perm_size_; }

  // Element index g = a * |Pi| + p  <->  channel A_a o P_p.
  int element(std::size_t a, std::size_t p) const { return int(a * perm_size_ + p); }
  std::size_t local_part(int g) const { return std::size_t(g) / perm_size_; }
  std::size_t perm_part(int g) const { return std::size_t(g) % perm_size_; }
  int identity() const { return 0; }

  int multiply(int g, int h) const;
  int inverse(int g) const;
  const SignedPermutation& transfer(int g) const { return transfers_[std::size_t(g)]; }
  CMatrix unitary(int g) const;
  // Index of an element with the given transfer form, or -1.
  int find(const SignedPermutation& t) const;

  const std::vector<LocalGroup>& local_groups() const { return locals_; }
  std::vector<int> local_word(std::size_t a) const;
  std::size_t local_index(const std::vector<int>& word) const;
  std::size_t local_multiply(std::size_t a, std::size_t b) const { return a_mult_[a * local_size_ + b]; }
  std::size_t local_inverse(std::size_t a) const { return a_inv_[a]; }
  // Factor permutation: factor f moves to slot perm[f].
  const std::vector<int>& permutation(std::size_t p) const { return perms_[p]; }
  std::size_t perm_multiply(std::size_t p, std::size_t q) const { return p_mult_[p * perm_size_ + q]; }
  std::size_t perm_inverse(std::size_t p) const { return p_inv_[p]; }
  // P_p A_a P_p^-1
  std::size_t act(std::size_t p, std::size_t a) const { return act_[p * local_size_ + a]; }

  friend SymmetryGroup tensor_power_group(const std::vector<LocalGroup>& locals, const Layout& layout);
  friend SymmetryGroup permutation_rep(const Layout& layout);
  friend SymmetryGroup semidirect_group(const SymmetryGroup& a, const SymmetryGroup& p);

 private:
  SignedPermutation local_transfer(std::size_t a) const;
  SignedPermutation perm_transfer(std::size_t p) const;
  void build_elements();

  Layout layout_;
  std::vector<LocalGroup> locals_;
  std::vector<std::vector<int>> perms_;
  std::size_t local_size_ = 1;
  std::size_t perm_size_ = 1;
  std::vector<std::size_t> a_mult_, a_inv_, p_mult_, p_inv_, act_;
  std::vector<SignedPermutation> transfers_;
  std::unordered_map<SignedPermutation, int, SignedPermutationHash> index_;
};

SymmetryGroup tensor_power_group(const std::vector<LocalGroup>& locals, const Layout& layout);
SymmetryGroup permutation_rep(const Layout& layout);
SymmetryGroup semidirect_group(const SymmetryGroup& a, const SymmetryGroup& p);

// Convenience: local groups for single-qubit factors found automatically,
// wider factors taken from `wide_locals` (indexed by factor).
SymmetryGroup build_symmetry_group(const Layout& layout,
                                   const std::vector<std::vector<CMatrix>>& wide_locals = {});

// ---------------------------------------------------------------------------
// Characters

struct ConjugacyClasses {
  std::vector<int> representatives;
  std::vector<std::size_t> sizes;
  std::vector<int> class_of;  // element -> class
};

ConjugacyClasses conjugacy_classes(const SymmetryGroup& g);

// One-dimensional characters of the local part A_n, chi_c(a) = prod_f chi_{c_f}(a_f).
class AbelianCharacters {
 public:
  explicit AbelianCharacters(const SymmetryGroup& g);
  std::size_t size() const { return count_; }
  Complex value(std::size_t c, std::size_t a) const;
  std::vector<int> word(std::size_t c) const;
  std::size_t index(const std::vector<int>& word) const;
  std::string name(const std::vector<int>& word) const;

 private:
  const SymmetryGroup* group_;
  std::size_t count_;
};

AbelianCharacters abelian_characters(const SymmetryGroup& g);

struct CharacterOrbit {
  std::vector<int> representative;            // canonical character word
  std::size_t orbit_size = 0;
  std::vector<std::size_t> stabilizer;        // indices into Pi
  std::vector<std::vector<int>> parts;        // factor sets permuted freely by the stabilizer
};

std::vector<CharacterOrbit> orbits_and_stabilizers(const SymmetryGroup& g);

struct IrrepLabel {
  std::vector<int> word;
  std::string stabilizer_irrep;
  std::string text;  // e.g. "chi0,chi1;e"
};

struct CharacterTable {
  ConjugacyClasses classes;
  std::vector<IrrepLabel> labels;
  std::vector<int> dims;
  std::vector<std::vector<Complex>> values;  // [irrep][class]
  std::size_t group_order = 0;

  std::size_t num_irreps() const { return labels.size(); }
  Complex value(std::size_t irrep, int element) const {
    return values[irrep][std::size_t(classes.class_of[std::size_t(element)])];
  }
  // Index of the irrep with the given label text; throws ValidationError if absent.
  std::size_t find(const std::string& label) const;
};

CharacterTable induced_characters(const SymmetryGroup& g);

struct IrrepComponent {
  std::size_t irrep = 0;
  std::string label;
  int dim = 0;
  int multiplicity = 0;
};

struct IrrepDecomposition {
  std::size_t group_order = 0;
  std::size_t total_irreps = 0;
  std::vector<IrrepComponent> components;  // only irreps with multiplicity > 0

  int multiplicity_sum() const;
  int dimension_sum() const;  // sum m * d
  const IrrepComponent* find(const std::string& label) const;
};

IrrepDecomposition decompose_transfer_rep(const SymmetryGroup& g, const CharacterTable& table);

// (d/|G|) sum_g chi(g)^* pi(g)
CMatrix irrep_projector(const SymmetryGroup& g, const CharacterTable& table, std::size_t irrep);
// (1/|A|) sum_a chi_c(a)^* pi(a), over the local part only.
CMatrix abelian_projector(const SymmetryGroup& g, const std::vector<int>& character_word);

}  // namespace symrb
