#pragma once

// Builders for the causal scenarios that produce a joint hybrid state
// rho_{B X1 ... Xn} from physical ingredients, the sequential-measurement
// realization of an arbitrary two-variable hybrid, and the support-based
// certificate that no joint state exists.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qcond/conditional.hpp"
#include "qcond/hybrid.hpp"
#include "qcond/operator.hpp"

namespace qcond {

struct Scenario {
  HybridState joint;
  std::string builder;
  // Ingredient name -> hex FNV-1a digest of its canonical text form.
  std::map<std::string, std::string> digests;
};

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);
std::string digest_hex(std::uint64_t h);
std::string digest(const LabeledOperator& op);
std::string digest(const HybridState& h);

Scenario preparation_scenario(const ClassicalDistribution& pz, const EnsemblePreparation& prep);
// Tr_A[(E_x (x) I) rho_AB], A = l.system; B is every other region of rho_ab.
Scenario remote_measurement_scenario(const JointState& rho_ab, const LikelihoodOperator& l);
// rho_B^{1/2} E_x rho_B^{1/2}.
Scenario retrodiction_scenario(const JointState& rho_b, const LikelihoodOperator& l);
Scenario instrument_scenario(const JointState& rho_a, const Instrument& inst);
// P(x2|x1) rho_{X1=x1,B}; proc.system is the classical region of base
// being post-processed and proc.outcome the new variable.
Scenario postprocess_scenario(const Scenario& base, const LikelihoodOperator& proc);
// sum_z P(x1|z) P(x2|z) P(z) rho_{B|Z=z}.
Scenario two_preparation_scenario(const ClassicalDistribution& pz, const EnsemblePreparation& prep,
                                  const LikelihoodOperator& l1, const LikelihoodOperator& l2);
// Tr_{A1 A2}[(E1_x1 (x) E2_x2 (x) I) rho].
Scenario two_remote_scenario(const JointState& rho, const LikelihoodOperator& l1, const LikelihoodOperator& l2);
// sum_z P(x1|z) P(x2|z) rho_B^{1/2} E_z rho_B^{1/2}.
Scenario two_direct_scenario(const JointState& rho_b, const LikelihoodOperator& lz, const LikelihoodOperator& l1,
                             const LikelihoodOperator& l2);
// inst2 applied to the output of inst1.
Scenario sequential_measurement_scenario(const JointState& rho_a1, const Instrument& inst1, const Instrument& inst2);

struct Realization {
  JointState rho_a1;
  Instrument inst1;
  Instrument inst2;
};

// Classical register A1 holding (x1, x2) with the target's joint
// distribution; inst1 reads x1 and passes the register on as A2; inst2 reads
// x2 and prepares rho_{B|X1=x1,X2=x2} (maximally mixed on zero-probability
// cells). X1/X2 are the target's classical regions in id order.
Realization realize_arbitrary_joint(const HybridState& target, const std::string& a1_id = "A1",
                                    const std::string& a2_id = "A2", const Tolerance& tol = {});

struct ObstructedPair {
  int x1 = 0;
  int x2 = 0;
  double p1 = 0.0;
  double p2 = 0.0;
};

struct Obstruction {
  std::string x1;
  std::string x2;
  int pairs_checked = 0;
  std::vector<ObstructedPair> pairs;

  bool obstructed() const { return !pairs.empty(); }
};

// Pairs of positive-probability values whose conditionals have disjoint
// support. h1, h2 each carry one classical variable over the same system.
Obstruction joint_state_obstruction(const HybridState& h1, const HybridState& h2, const Tolerance& tol = {});

}  // namespace qcond
