#pragma once

// Classical distributions, hybrid quantum-classical states, likelihood
// operators (POVMs), ensembles and instruments, plus quantum Bayesian
// conditioning on classical values.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcond/conditional.hpp"
#include "qcond/operator.hpp"

namespace qcond {

struct ClassicalDistribution {
  Region region;
  std::vector<double> probs;

  void check(const Tolerance& tol = {}) const;
};

// Values of named classical regions, e.g. {"X1": 0, "X2": 1}.
using Assignment = std::map<std::string, int>;

// rho_{XA} = sum_x |x><x|_X (x) rho_{X=x,A}. Components are kept per
// classical value tuple (including explicit zero blocks) over the system
// regions; the dense block-diagonal operator is only built on request.
class HybridState {
 public:
  HybridState() = default;
  // `components` are indexed by the flat index over `classical` sorted by
  // id (row-major), each a matrix over `system` in canonical order.
  HybridState(std::vector<Region> classical, std::vector<Region> system, std::vector<Matrix> components);

  const std::vector<Region>& classical() const { return classical_; }
  const std::vector<Region>& system() const { return system_; }
  const std::vector<Matrix>& components() const { return components_; }
  int value_count() const { return static_cast<int>(components_.size()); }
  int system_dim() const { return total_dim(system_); }

  std::vector<int> values_of(int flat) const;
  int flat_index(const std::vector<int>& values) const;
  int flat_index(const Assignment& full) const;
  Assignment assignment_of(int flat) const;
  const Region& classical_region(const std::string& id) const;

  const Matrix& component(int flat) const { return components_.at(flat); }
  LabeledOperator component_operator(int flat) const;
  double probability(int flat) const;
  // rho_{B|X=x}, absent for zero-probability values.
  std::optional<LabeledOperator> conditional(int flat, const Tolerance& tol = {}) const;

  // rho_B = sum_x rho_{X=x,B}.
  JointState system_marginal() const;
  // Classical marginal over the kept classical regions.
  HybridState marginalize(const std::vector<std::string>& keep) const;
  // Distribution over the flat classical index.
  std::vector<double> classical_distribution() const;

  LabeledOperator assemble() const;
  static HybridState disassemble(const LabeledOperator& op, const std::vector<std::string>& classical_ids,
                                 const Tolerance& tol = {});
  JointState as_joint() const { return JointState{assemble(), CausalClass::hybrid()}; }

  // Components PSD, total trace 1.
  void check(const Tolerance& tol = {}) const;

 private:
  std::vector<Region> classical_;
  std::vector<Region> system_;
  std::vector<Matrix> components_;
};

// rho_{X|A}: effects E_x = rho_{X=x|A} forming a POVM on one region.
struct LikelihoodOperator {
  Region outcome;
  Region system;
  std::vector<Matrix> effects;

  void check(const Tolerance& tol = {}) const;
  ConditionalState conditional() const;
  static LikelihoodOperator projective(Region outcome, Region system, const Matrix& basis);
  // Classical stochastic matrix P(x|z) as a likelihood on classical Z;
  // rows indexed by z.
  static LikelihoodOperator classical_channel(Region outcome, Region system,
                                              const std::vector<std::vector<double>>& p_x_given_z);
  double probability(int x, int z) const { return effects.at(x)(z, z).real(); }
};

// rho_{A|X}: normalized states rho_{A|X=x}.
struct EnsemblePreparation {
  Region label;
  Region system;
  std::vector<Matrix> states;

  void check(const Tolerance& tol = {}) const;
};

// varrho_{XB|A}: per-outcome causal conditionals varrho_{X=x,B|A}, each
// stored in [input, output] order (Jamiolkowski form in the input's
// computational basis).
struct Instrument {
  Region input;
  Region outcome;
  Region output;
  std::vector<Matrix> operations;

  static Instrument from_kraus(Region input, Region outcome, Region output,
                               const std::vector<std::vector<Matrix>>& kraus_per_outcome);
  void check(const Tolerance& tol = {}) const;
  ConditionalState conditional() const;
  LikelihoodOperator induced_povm() const;
  // Tr_A[varrho_{X=x,B|A} rho_A].
  Matrix apply_outcome(int x, const Matrix& rho_in) const;
};

JointState embed_distribution(const ClassicalDistribution& d);
ClassicalDistribution extract_distribution(const JointState& s, const Tolerance& tol = {});

// rho_{A|X=x} for a (possibly partial) assignment; the unassigned
// classical regions are marginalized first. Throws UndefinedBranch when
// P(X=x) = 0.
JointState condition(const HybridState& h, const Assignment& assignment, const Tolerance& tol = {});
ClassicalDistribution born_rule(const LikelihoodOperator& l, const JointState& rho);
JointState ensemble_average(const EnsemblePreparation& e, const ClassicalDistribution& d);
HybridState apply_instrument(const Instrument& inst, const JointState& rho_a);

}  // namespace qcond
