#pragma once

// Joint <-> conditional state algebra, quantum Bayes' theorem, belief
// propagation and the Jamiolkowski correspondence between channels and
// causal conditional states.

#include <set>
#include <string>
#include <vector>

#include "qcond/operator.hpp"

namespace qcond {

enum class CausalKind { Acausal, Causal, Hybrid };

// Explicit metadata: never inferred from the matrix, since the same matrix
// can be a valid state in one class and invalid in another.
struct CausalClass {
  CausalKind kind = CausalKind::Acausal;
  // Regions whose partial transpose must be PSD (causal class only).
  std::vector<std::string> transposed;

  static CausalClass acausal() { return {}; }
  static CausalClass hybrid() { return {CausalKind::Hybrid, {}}; }
  static CausalClass causal(std::vector<std::string> transposed) {
    return {CausalKind::Causal, std::move(transposed)};
  }
  friend bool operator==(const CausalClass&, const CausalClass&) = default;
};

std::string to_string(CausalKind kind);

struct JointState {
  LabeledOperator op;
  CausalClass causal_class;
};

struct ConditionalState {
  LabeledOperator op;
  std::vector<std::string> conditioned;   // B in tau_{B|A}
  std::vector<std::string> conditioning;  // A in tau_{B|A}
  CausalClass causal_class;
};

// CPT map from a single input region to a single output region, in Kraus
// form: rho -> sum_k K_k rho K_k^dagger.
struct Channel {
  Region input;
  Region output;
  std::vector<Matrix> kraus;

  Matrix apply(const Matrix& rho) const;
  // ||sum K^dagger K - I||.
  double trace_preservation_error() const;

  static Channel identity(Region input, Region output);
  // rho -> (1-p) rho + p Tr(rho) I/d on equal-dimension regions.
  static Channel depolarizing(Region input, Region output, double p);
};

struct ValidationReport {
  double trace = 0.0;
  bool trace_ok = false;
  bool hermitian_ok = false;
  // PSD (acausal/hybrid) or PPT over the transposed factors (causal).
  bool positivity_ok = false;
  // Only meaningful for hybrid states; true otherwise.
  bool block_diagonal_ok = true;
  double min_eigenvalue = 0.0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

ValidationReport validate(const JointState& j, const Tolerance& tol = {});
// Distance of Tr_B[tau_{B|A}] from its own support projector: zero when
// the partial trace is I_A, or the support projector of a rank-deficient
// marginal.
double normalization_error(const ConditionalState& c, const Tolerance& tol = {});

ConditionalState conditional_from_joint(const JointState& j, const std::set<std::string>& given,
                                        const Tolerance& tol = {});
JointState joint_from_conditional(const ConditionalState& c, const JointState& marginal,
                                  const Tolerance& tol = {});
JointState belief_propagate(const ConditionalState& c, const JointState& state_a,
                            const Tolerance& tol = {});
ConditionalState bayes_invert(const ConditionalState& c, const JointState& marg_a,
                              const Tolerance& tol = {});

ConditionalState channel_to_conditional(const Channel& ch, const Tolerance& tol = {});
Channel conditional_to_channel(const ConditionalState& c, const Tolerance& tol = {});
// rho_{C|A} = Tr_B[rho_{C|B} rho_{B|A}].
ConditionalState compose_conditionals(const ConditionalState& c2, const ConditionalState& c1);

}  // namespace qcond
