#pragma once

// Compatibility of state assignments (with constructive witnesses),
// conditional independence, sufficient statistics, state improvement and
// state pooling.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qcond/conditional.hpp"
#include "qcond/hybrid.hpp"
#include "qcond/operator.hpp"

namespace qcond {

// ---------------------------------------------------------------------------
// Compatibility
// ---------------------------------------------------------------------------

struct CompatibilityVerdict {
  bool compatible = false;
  SupportSubspace intersection;
};

CompatibilityVerdict classical_compatible(const ClassicalDistribution& q1, const ClassicalDistribution& q2,
                                          const Tolerance& tol = {});
// Two states are compatible iff their supports intersect nontrivially.
CompatibilityVerdict bfm_compatible(const JointState& s1, const JointState& s2, const Tolerance& tol = {});

// Hybrid rho_{B X1 X2} over two classical bits in which conditioning on
// X1 = 0 gives s1 and conditioning on X2 = 0 gives s2.
struct ObjectiveWitness {
  HybridState joint;
  Assignment outcomes;  // {X1: 0, X2: 0}
  // s_j = p_j mu + (1 - p_j) eta_j
  LabeledOperator mu;
  LabeledOperator eta1;
  LabeledOperator eta2;
  LabeledOperator nu;
  double p1 = 1.0;
  double p2 = 1.0;
};

ObjectiveWitness objective_witness(const JointState& s1, const JointState& s2, const Tolerance& tol = {},
                                   const std::string& x1_id = "X1", const std::string& x2_id = "X2");

// A binary likelihood on which both agents, conditioning on `outcome`,
// arrive at the same (pure) posterior.
struct SubjectiveWitness {
  LikelihoodOperator likelihood;
  int outcome = 0;
  Vector psi;  // unit vector in the support intersection
  LabeledOperator posterior;
};

SubjectiveWitness subjective_witness(const JointState& s1, const JointState& s2, const Tolerance& tol = {},
                                     const std::string& x_id = "X");

// (E_x * sigma) / Tr[E_x sigma]; throws UndefinedBranch when the outcome has
// zero probability under sigma.
JointState posterior_given_likelihood(const JointState& sigma, const LikelihoodOperator& l, int x,
                                      const Tolerance& tol = {});

// supp[rho_{B|X=x}] is contained in supp[rho_B].
bool support_lemma_check(const HybridState& h, const Assignment& x, const Tolerance& tol = {});
double support_leakage(const HybridState& h, const Assignment& x, const Tolerance& tol = {});
// Classical form on a joint table p_xy[x][y] = P(X=x, Y=y).
bool classical_support_lemma_check(const std::vector<std::vector<double>>& p_xy, int x, const Tolerance& tol = {});

// ---------------------------------------------------------------------------
// Conditional independence
// ---------------------------------------------------------------------------

using RegionSet = std::set<std::string>;

// I(A:B|C) = S(AC) + S(BC) - S(C) - S(ABC), in bits.
double conditional_mutual_information(const JointState& rho, const RegionSet& a, const RegionSet& b,
                                      const RegionSet& c, const Tolerance& tol = {});

struct CIReport {
  double cmi = 0.0;
  double conditional_form_a = 0.0;  // ||rho_{A|BC} - rho_{A|C}|| on supp(rho_BC)
  double conditional_form_b = 0.0;  // ||rho_{B|AC} - rho_{B|C}|| on supp(rho_AC)
  double product_form = 0.0;        // ||rho_{AB|C} - rho_{A|C} rho_{B|C}||
};

CIReport conditional_independence_report(const JointState& rho, const RegionSet& a, const RegionSet& b,
                                         const RegionSet& c, const Tolerance& tol = {});
// Defined by vanishing conditional mutual information.
bool is_conditionally_independent(const JointState& rho, const RegionSet& a, const RegionSet& b,
                                  const RegionSet& c, double tol, const Tolerance& numerics = {});
bool check_ci_conditional_form(const JointState& rho, const RegionSet& a, const RegionSet& b,
                               const RegionSet& c, double tol, const Tolerance& numerics = {});
// Necessary but not sufficient for conditional independence.
bool check_ci_product_form(const JointState& rho, const RegionSet& a, const RegionSet& b, const RegionSet& c,
                           double tol, const Tolerance& numerics = {});

// ---------------------------------------------------------------------------
// Sufficient statistics and improvement
// ---------------------------------------------------------------------------

// Partition of the values of one classical variable: values share a cell
// iff their conditional states on the system coincide within eq_tol.
struct StatisticMap {
  static constexpr int kUndefined = -1;

  std::string variable;
  std::vector<int> cell_of_value;  // kUndefined for zero-probability values
  std::vector<std::vector<int>> cells;
  std::vector<LabeledOperator> representatives;  // first-occurrence state per cell

  int cell_count() const { return static_cast<int>(cells.size()); }
};

StatisticMap minimal_sufficient_statistic(const HybridState& h, const std::string& variable,
                                          const Tolerance& tol = {});
// rho_{B|t(X)=cell}; verified against the cell representative.
JointState condition_on_statistic(const HybridState& h, const StatisticMap& t, int cell, const Tolerance& tol = {});
// Hybrid over the two statistic values (classical regions named after the
// variables) obtained by coarse-graining X1 and X2.
HybridState coarse_grain(const HybridState& h, const StatisticMap& t1, const StatisticMap& t2);

JointState improve_supra(const JointState& prior, const LikelihoodOperator& report_likelihood, int announced,
                         const Tolerance& tol = {});
// P0(Y|R=r) = P0(R=r|Y) P0(Y) / P0(R=r); p_r_given_y[y][r].
std::vector<double> improve_supra_classical(const std::vector<double>& prior,
                                            const std::vector<std::vector<double>>& p_r_given_y, int announced,
                                            const Tolerance& tol = {});
// Shared-prior improvement: returns the announced state after checking it
// is the posterior for the state-valued statistic of the scenario.
JointState improve_shared_prior(const HybridState& scenario, const JointState& announced,
                                const std::string& variable = "", const Tolerance& tol = {});

// ---------------------------------------------------------------------------
// Pooling
// ---------------------------------------------------------------------------

struct PoolWeights {
  std::vector<double> w;
  std::optional<double> w0;  // prior exponent, unused by the linear pool
};

JointState pool_linear(const std::vector<JointState>& states, const PoolWeights& w, const Tolerance& tol = {});

// c s1 prior^{-1} s2. Outside the regime where s1 prior^{-1} s2 is
// Hermitian this throws ValidityRegimeError, unless `hermitian_part` is
// set, in which case the Hermitian part is normalized and returned.
JointState pool_multiplicative(const JointState& s1, const JointState& s2, const JointState& prior,
                               const Tolerance& tol = {}, bool hermitian_part = false);
// ||M - M^dagger|| / max(1, ||M||) with M = s1 prior^{-1} s2.
double pool_asymmetry(const JointState& s1, const JointState& s2, const JointState& prior,
                      const Tolerance& tol = {});

// Exact supra-Bayesian pool: condition the prior on the announced values
// of the two state-valued minimal sufficient statistics. `values` assigns
// exactly two classical variables of the scenario.
JointState pool_supra(const HybridState& scenario, const Assignment& values, const Tolerance& tol = {});

struct PoolConditionReport {
  bool holds = false;
  double product_error = 0.0;  // max ||rho_{t1 t2|B} - rho_{t1|B} rho_{t2|B}||
  double commutator = 0.0;     // max ||[rho_{t1|B}, rho_{t2|B}]||
};

PoolConditionReport pool_condition_report(const HybridState& scenario, const std::string& x1,
                                          const std::string& x2, double tol, const Tolerance& numerics = {});
bool check_pool_condition(const HybridState& scenario, const std::string& x1, const std::string& x2,
                          double tol, const Tolerance& numerics = {});

}  // namespace qcond
