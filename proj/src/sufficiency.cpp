#include <algorithm>
#include <cmath>

#include "qcond/inference.hpp"

namespace qcond {

namespace {

void require_disjoint(const JointState& rho, const RegionSet& a, const RegionSet& b, const RegionSet& c,
                      const char* what) {
  if (a.empty() || b.empty()) throw RegionError(std::string(what) + ": A and B must be nonempty");
  RegionSet all;
  for (const auto* s : {&a, &b, &c}) {
    for (const auto& id : *s) {
      rho.op.region(id);
      if (!all.insert(id).second) throw RegionError(std::string(what) + ": region '" + id + "' listed twice");
    }
  }
}

RegionSet join(const RegionSet& x, const RegionSet& y) {
  RegionSet out = x;
  out.insert(y.begin(), y.end());
  return out;
}

double entropy_of(const JointState& rho, const RegionSet& keep, const Tolerance& tol) {
  if (keep.empty()) return 0.0;
  return von_neumann_entropy(reduce_to(rho.op, keep).hermitian_part(), tol);
}

// rho_{X|C} over X u C; with C empty this is the marginal on X.
LabeledOperator conditional_on(const JointState& rho, const RegionSet& x, const RegionSet& c,
                               const Tolerance& tol) {
  const JointState sub{reduce_to(rho.op, join(x, c)), rho.causal_class};
  if (c.empty()) return sub.op;
  return conditional_from_joint(sub, c, tol).op;
}

double conditional_form_gap(const JointState& rho, const RegionSet& a, const RegionSet& b, const RegionSet& c,
                            const Tolerance& tol) {
  const RegionSet bc = join(b, c);
  const LabeledOperator full = conditional_on(rho, a, bc, tol);
  const LabeledOperator local = conditional_on(rho, a, c, tol);
  const LabeledOperator proj = support(reduce_to(rho.op, bc).hermitian_part(), tol).projector;
  return distance(proj * full * proj, proj * local * proj);
}

}  // namespace

double conditional_mutual_information(const JointState& rho, const RegionSet& a, const RegionSet& b,
                                      const RegionSet& c, const Tolerance& tol) {
  require_disjoint(rho, a, b, c, "conditional_mutual_information");
  return entropy_of(rho, join(a, c), tol) + entropy_of(rho, join(b, c), tol) - entropy_of(rho, c, tol) -
         entropy_of(rho, join(join(a, b), c), tol);
}

CIReport conditional_independence_report(const JointState& rho, const RegionSet& a, const RegionSet& b,
                                         const RegionSet& c, const Tolerance& tol) {
  CIReport r;
  r.cmi = conditional_mutual_information(rho, a, b, c, tol);
  r.conditional_form_a = conditional_form_gap(rho, a, b, c, tol);
  r.conditional_form_b = conditional_form_gap(rho, b, a, c, tol);
  const LabeledOperator ab = conditional_on(rho, join(a, b), c, tol);
  const LabeledOperator pa = conditional_on(rho, a, c, tol);
  const LabeledOperator pb = conditional_on(rho, b, c, tol);
  r.product_form = distance(ab, pa * pb);
  return r;
}

bool is_conditionally_independent(const JointState& rho, const RegionSet& a, const RegionSet& b,
                                  const RegionSet& c, double tol, const Tolerance& numerics) {
  return conditional_mutual_information(rho, a, b, c, numerics) <= tol;
}

bool check_ci_conditional_form(const JointState& rho, const RegionSet& a, const RegionSet& b,
                               const RegionSet& c, double tol, const Tolerance& numerics) {
  require_disjoint(rho, a, b, c, "check_ci_conditional_form");
  return conditional_form_gap(rho, a, b, c, numerics) <= tol && conditional_form_gap(rho, b, a, c, numerics) <= tol;
}

bool check_ci_product_form(const JointState& rho, const RegionSet& a, const RegionSet& b, const RegionSet& c,
                           double tol, const Tolerance& numerics) {
  require_disjoint(rho, a, b, c, "check_ci_product_form");
  const LabeledOperator ab = conditional_on(rho, join(a, b), c, numerics);
  return distance(ab, conditional_on(rho, a, c, numerics) * conditional_on(rho, b, c, numerics)) <= tol;
}

StatisticMap minimal_sufficient_statistic(const HybridState& h, const std::string& variable, const Tolerance& tol) {
  const HybridState m = h.marginalize({variable});
  StatisticMap t;
  t.variable = variable;
  t.cell_of_value.assign(m.value_count(), StatisticMap::kUndefined);
  for (int x = 0; x < m.value_count(); ++x) {
    const auto state = m.conditional(x, tol);
    if (!state) continue;
    int cell = StatisticMap::kUndefined;
    for (int k = 0; k < t.cell_count(); ++k) {
      if (distance(*state, t.representatives[k]) <= tol.eq_tol) {
        cell = k;
        break;
      }
    }
    if (cell == StatisticMap::kUndefined) {
      cell = t.cell_count();
      t.cells.emplace_back();
      t.representatives.push_back(*state);
    }
    t.cells[cell].push_back(x);
    t.cell_of_value[x] = cell;
  }
  return t;
}

JointState condition_on_statistic(const HybridState& h, const StatisticMap& t, int cell, const Tolerance& tol) {
  if (cell < 0 || cell >= t.cell_count()) throw RegionError("condition_on_statistic: no such cell");
  const HybridState m = h.marginalize({t.variable});
  if (static_cast<int>(t.cell_of_value.size()) != m.value_count()) {
    throw RegionError("condition_on_statistic: statistic was built for a different alphabet");
  }
  Matrix sum = Matrix::Zero(m.system_dim(), m.system_dim());
  for (int x : t.cells[cell]) sum += m.component(x);
  const double p = sum.trace().real();
  if (!(p > tol.eig_cut)) throw UndefinedBranch("condition_on_statistic: cell has zero probability");
  LabeledOperator state(m.system(), sum / p);
  if (distance(state, t.representatives[cell]) > tol.eq_tol) {
    throw Error("condition_on_statistic: cell state differs from its representative");
  }
  return JointState{std::move(state), CausalClass::acausal()};
}

HybridState coarse_grain(const HybridState& h, const StatisticMap& t1, const StatisticMap& t2) {
  if (t1.variable == t2.variable) throw RegionError("coarse_grain: statistics must be of two distinct variables");
  const HybridState m = h.marginalize({t1.variable, t2.variable});
  const Region r1 = classical(t1.variable, std::max(1, t1.cell_count()));
  const Region r2 = classical(t2.variable, std::max(1, t2.cell_count()));
  const int ds = m.system_dim();
  std::vector<Matrix> comps(r1.dim * r2.dim, Matrix::Zero(ds, ds));
  for (int flat = 0; flat < m.value_count(); ++flat) {
    const Assignment a = m.assignment_of(flat);
    const int c1 = t1.cell_of_value.at(a.at(t1.variable));
    const int c2 = t2.cell_of_value.at(a.at(t2.variable));
    // A value with zero marginal probability carries only zero components.
    if (c1 == StatisticMap::kUndefined || c2 == StatisticMap::kUndefined) continue;
    comps[c1 * r2.dim + c2] += m.component(flat);
  }
  return HybridState({r1, r2}, m.system(), std::move(comps));
}

JointState improve_supra(const JointState& prior, const LikelihoodOperator& report_likelihood, int announced,
                         const Tolerance& tol) {
  return posterior_given_likelihood(prior, report_likelihood, announced, tol);
}

std::vector<double> improve_supra_classical(const std::vector<double>& prior,
                                            const std::vector<std::vector<double>>& p_r_given_y, int announced,
                                            const Tolerance& tol) {
  if (p_r_given_y.size() != prior.size()) throw RegionError("improve_supra_classical: likelihood rows != |Y|");
  std::vector<double> post(prior.size());
  double total = 0.0;
  for (std::size_t y = 0; y < prior.size(); ++y) {
    if (announced < 0 || announced >= static_cast<int>(p_r_given_y[y].size())) {
      throw RegionError("improve_supra_classical: announced report out of range");
    }
    post[y] = p_r_given_y[y][announced] * prior[y];
    total += post[y];
  }
  if (!(total > tol.eig_cut)) throw UndefinedBranch("improve_supra_classical: report has zero probability");
  for (double& v : post) v /= total;
  return post;
}

JointState improve_shared_prior(const HybridState& scenario, const JointState& announced,
                                const std::string& variable, const Tolerance& tol) {
  std::string var = variable;
  if (var.empty()) {
    if (scenario.classical().size() != 1) {
      throw RegionError("improve_shared_prior: scenario has several classical variables; name one");
    }
    var = scenario.classical().front().id;
  }
  const StatisticMap t = minimal_sufficient_statistic(scenario, var, tol);
  const LabeledOperator target = announced.op;
  for (int cell = 0; cell < t.cell_count(); ++cell) {
    if (distance(t.representatives[cell], target) <= tol.eq_tol) {
      condition_on_statistic(scenario, t, cell, tol);
      return announced;
    }
  }
  throw PreconditionError("improve_shared_prior: announced state matches no branch of the scenario");
}

}  // namespace qcond
