#include <algorithm>
#include <cmath>

#include "qcond/inference.hpp"

namespace qcond {

namespace {

Matrix pool_product(const JointState& s1, const JointState& s2, const JointState& prior, const Tolerance& tol) {
  if (s1.op.factors() != s2.op.factors() || s1.op.factors() != prior.op.factors()) {
    throw RegionError("pool_multiplicative: states live on different regions");
  }
  const LabeledOperator inv = pseudo_inverse(prior.op.hermitian_part(), tol);
  return s1.op.matrix() * inv.matrix() * s2.op.matrix();
}

double asymmetry_of(const Matrix& m) {
  return spectral_norm(m - m.adjoint()) / std::max(1.0, spectral_norm(m));
}

}  // namespace

JointState pool_linear(const std::vector<JointState>& states, const PoolWeights& w, const Tolerance& tol) {
  if (states.size() < 2) throw PreconditionError("pool_linear: needs at least two states");
  if (w.w.size() != states.size()) throw PreconditionError("pool_linear: one weight per state required");
  double total = 0.0;
  for (double v : w.w) {
    if (!(v > 0.0 && v < 1.0)) throw PreconditionError("pool_linear: weights must lie strictly inside (0, 1)");
    total += v;
  }
  if (std::abs(total - 1.0) > tol.eq_tol) throw PreconditionError("pool_linear: weights must sum to 1");
  LabeledOperator sum = states.front().op * Complex(w.w.front());
  for (std::size_t j = 1; j < states.size(); ++j) {
    if (states[j].op.factors() != states.front().op.factors()) {
      throw RegionError("pool_linear: states live on different regions");
    }
    sum = sum + states[j].op * Complex(w.w[j]);
  }
  return JointState{sum.hermitian_part(), CausalClass::acausal()};
}

double pool_asymmetry(const JointState& s1, const JointState& s2, const JointState& prior, const Tolerance& tol) {
  return asymmetry_of(pool_product(s1, s2, prior, tol));
}

JointState pool_multiplicative(const JointState& s1, const JointState& s2, const JointState& prior,
                               const Tolerance& tol, bool hermitian_part) {
  const auto prior_support = support(prior.op.hermitian_part(), tol);
  for (const auto* s : {&s1, &s2}) {
    if (leakage_outside(s->op, prior_support) > tol.eq_tol) {
      throw PreconditionError("pool_multiplicative: a state has support outside the prior's support");
    }
  }
  Matrix m = pool_product(s1, s2, prior, tol);
  const double asym = asymmetry_of(m);
  if (asym > tol.eq_tol && !hermitian_part) {
    throw ValidityRegimeError("pool_multiplicative: s1 prior^-1 s2 is not Hermitian (asymmetry " +
                              std::to_string(asym) + "); the pooling condition fails for these inputs");
  }
  const double tr = m.trace().real();
  if (!(tr > tol.eig_cut)) {
    if (asym > tol.eq_tol) throw ValidityRegimeError("pool_multiplicative: Hermitian part has no positive trace");
    throw IncompatibleError("pool_multiplicative: normalization vanishes (states are jointly incompatible)");
  }
  m = (0.5 * (m + m.adjoint()) / tr).eval();
  LabeledOperator out(s1.op.factors(), std::move(m));
  if (!is_psd(out, tol)) throw ValidityRegimeError("pool_multiplicative: pooled operator is not positive");
  return JointState{std::move(out), CausalClass::acausal()};
}

JointState pool_supra(const HybridState& scenario, const Assignment& values, const Tolerance& tol) {
  if (values.size() != 2) throw RegionError("pool_supra: assign exactly two classical variables");
  auto it = values.begin();
  const auto [x1, v1] = *it++;
  const auto [x2, v2] = *it;
  const StatisticMap t1 = minimal_sufficient_statistic(scenario, x1, tol);
  const StatisticMap t2 = minimal_sufficient_statistic(scenario, x2, tol);
  if (v1 < 0 || v1 >= static_cast<int>(t1.cell_of_value.size()) || v2 < 0 ||
      v2 >= static_cast<int>(t2.cell_of_value.size())) {
    throw RegionError("pool_supra: value out of range");
  }
  const int c1 = t1.cell_of_value[v1];
  const int c2 = t2.cell_of_value[v2];
  if (c1 == StatisticMap::kUndefined || c2 == StatisticMap::kUndefined) {
    throw UndefinedBranch("pool_supra: an announced value has zero probability");
  }
  return condition(coarse_grain(scenario, t1, t2), {{x1, c1}, {x2, c2}}, tol);
}

PoolConditionReport pool_condition_report(const HybridState& scenario, const std::string& x1,
                                          const std::string& x2, double tol, const Tolerance& numerics) {
  const StatisticMap t1 = minimal_sufficient_statistic(scenario, x1, numerics);
  const StatisticMap t2 = minimal_sufficient_statistic(scenario, x2, numerics);
  const HybridState g = coarse_grain(scenario, t1, t2);
  const Region& r1 = g.classical_region(x1);
  const Region& r2 = g.classical_region(x2);
  const Matrix root = pseudo_inverse_sqrt(g.system_marginal().op, numerics).matrix();
  const int ds = g.system_dim();

  std::vector<Matrix> m1(r1.dim, Matrix::Zero(ds, ds));
  std::vector<Matrix> m2(r2.dim, Matrix::Zero(ds, ds));
  for (int flat = 0; flat < g.value_count(); ++flat) {
    const Assignment a = g.assignment_of(flat);
    m1[a.at(x1)] += g.component(flat);
    m2[a.at(x2)] += g.component(flat);
  }
  for (auto& m : m1) m = root * m * root;
  for (auto& m : m2) m = root * m * root;

  PoolConditionReport rep;
  for (int flat = 0; flat < g.value_count(); ++flat) {
    const Assignment a = g.assignment_of(flat);
    const Matrix& l1 = m1[a.at(x1)];
    const Matrix& l2 = m2[a.at(x2)];
    const Matrix joint = root * g.component(flat) * root;
    rep.product_error = std::max(rep.product_error, spectral_norm(joint - l1 * l2));
    rep.commutator = std::max(rep.commutator, spectral_norm(l1 * l2 - l2 * l1));
  }
  rep.holds = rep.product_error <= tol;
  return rep;
}

bool check_pool_condition(const HybridState& scenario, const std::string& x1, const std::string& x2, double tol,
                          const Tolerance& numerics) {
  return pool_condition_report(scenario, x1, x2, tol, numerics).holds;
}

}  // namespace qcond
