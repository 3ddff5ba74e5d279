#include "qcond/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace qcond {

namespace {

bool by_id(const Region& a, const Region& b) { return a.id < b.id; }

void require_single_region(const JointState& s, const Region& r, const char* what) {
  if (s.op.factors().size() != 1 || !(s.op.factors().front() == r)) {
    throw RegionError(std::string(what) + ": state must live on region '" + r.id + "'");
  }
}

bool psd_hermitian(const Matrix& m, const Tolerance& tol) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol.eq_tol * scale) return false;
  const auto eig = hermitian_eigen(0.5 * (m + m.adjoint()));
  return eig.values.size() == 0 || eig.values.minCoeff() >= -tol.eig_cut * std::max(1.0, eig.values.maxCoeff());
}

}  // namespace

void ClassicalDistribution::check(const Tolerance& tol) const {
  if (static_cast<int>(probs.size()) != region.dim) {
    throw ValidationError("distribution on '" + region.id + "' has the wrong number of entries");
  }
  double total = 0.0;
  for (double p : probs) {
    if (p < -tol.eq_tol) throw ValidationError("distribution has a negative entry");
    total += p;
  }
  if (std::abs(total - 1.0) > tol.eq_tol) throw ValidationError("distribution does not sum to 1");
}

HybridState::HybridState(std::vector<Region> classical, std::vector<Region> system, std::vector<Matrix> components) {
  std::set<std::string> seen;
  for (auto& r : classical) {
    if (!r.classical()) throw RegionError("hybrid: region '" + r.id + "' listed as classical has quantum kind");
    if (r.dim < 1) throw RegionError("hybrid: region '" + r.id + "' has non-positive dimension");
    if (!seen.insert(r.id).second) throw RegionError("hybrid: duplicate region id '" + r.id + "'");
  }
  for (auto& r : system) {
    if (!seen.insert(r.id).second) throw RegionError("hybrid: duplicate region id '" + r.id + "'");
  }
  int count = 1;
  for (const auto& r : classical) count *= r.dim;
  if (static_cast<int>(components.size()) != count) {
    throw RegionError("hybrid: expected " + std::to_string(count) + " components, got " +
                      std::to_string(components.size()));
  }
  // Reorder components to the id-sorted classical order.
  std::vector<int> perm(classical.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return classical[a].id < classical[b].id; });
  std::vector<Region> sorted_classical;
  for (int p : perm) sorted_classical.push_back(classical[p]);
  std::vector<Matrix> reordered(count);
  std::vector<int> digits(classical.size(), 0);
  for (int flat = 0; flat < count; ++flat) {
    int target = 0;
    for (int p : perm) target = target * classical[p].dim + digits[p];
    LabeledOperator canon(system, std::move(components[flat]));
    reordered[target] = canon.matrix();
    for (int k = static_cast<int>(digits.size()) - 1; k >= 0; --k) {
      if (++digits[k] < classical[k].dim) break;
      digits[k] = 0;
    }
  }
  std::sort(system.begin(), system.end(), by_id);
  classical_ = std::move(sorted_classical);
  system_ = std::move(system);
  components_ = std::move(reordered);
}

std::vector<int> HybridState::values_of(int flat) const {
  std::vector<int> values(classical_.size());
  for (int k = static_cast<int>(classical_.size()) - 1; k >= 0; --k) {
    values[k] = flat % classical_[k].dim;
    flat /= classical_[k].dim;
  }
  return values;
}

int HybridState::flat_index(const std::vector<int>& values) const {
  if (values.size() != classical_.size()) throw RegionError("hybrid: value tuple has the wrong length");
  int flat = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] < 0 || values[k] >= classical_[k].dim) {
      throw RegionError("hybrid: value out of range for '" + classical_[k].id + "'");
    }
    flat = flat * classical_[k].dim + values[k];
  }
  return flat;
}

int HybridState::flat_index(const Assignment& full) const {
  std::vector<int> values;
  for (const auto& r : classical_) {
    auto it = full.find(r.id);
    if (it == full.end()) throw RegionError("hybrid: no value assigned to '" + r.id + "'");
    values.push_back(it->second);
  }
  if (full.size() != classical_.size()) throw RegionError("hybrid: assignment names unknown regions");
  return flat_index(values);
}

Assignment HybridState::assignment_of(int flat) const {
  Assignment a;
  const auto values = values_of(flat);
  for (std::size_t k = 0; k < values.size(); ++k) a[classical_[k].id] = values[k];
  return a;
}

const Region& HybridState::classical_region(const std::string& id) const {
  for (const auto& r : classical_)
    if (r.id == id) return r;
  throw RegionError("hybrid: unknown classical region '" + id + "'");
}

LabeledOperator HybridState::component_operator(int flat) const {
  return LabeledOperator(system_, components_.at(flat));
}

double HybridState::probability(int flat) const { return components_.at(flat).trace().real(); }

std::optional<LabeledOperator> HybridState::conditional(int flat, const Tolerance& tol) const {
  const double p = probability(flat);
  if (!(p > tol.eig_cut)) return std::nullopt;
  return LabeledOperator(system_, components_[flat] / p);
}

JointState HybridState::system_marginal() const {
  Matrix sum = Matrix::Zero(system_dim(), system_dim());
  for (const auto& c : components_) sum += c;
  return JointState{LabeledOperator(system_, std::move(sum)), CausalClass::acausal()};
}

HybridState HybridState::marginalize(const std::vector<std::string>& keep) const {
  std::set<std::string> keep_set(keep.begin(), keep.end());
  for (const auto& id : keep_set) classical_region(id);
  std::vector<Region> kept;
  for (const auto& r : classical_)
    if (keep_set.count(r.id)) kept.push_back(r);
  int count = 1;
  for (const auto& r : kept) count *= r.dim;
  std::vector<Matrix> comps(count, Matrix::Zero(system_dim(), system_dim()));
  for (int flat = 0; flat < value_count(); ++flat) {
    const auto values = values_of(flat);
    int target = 0;
    for (std::size_t k = 0; k < classical_.size(); ++k)
      if (keep_set.count(classical_[k].id)) target = target * classical_[k].dim + values[k];
    comps[target] += components_[flat];
  }
  return HybridState(std::move(kept), system_, std::move(comps));
}

std::vector<double> HybridState::classical_distribution() const {
  std::vector<double> p;
  for (int flat = 0; flat < value_count(); ++flat) p.push_back(probability(flat));
  return p;
}

LabeledOperator HybridState::assemble() const {
  const int dc = value_count();
  const int ds = system_dim();
  Matrix m = Matrix::Zero(dc * ds, dc * ds);
  for (int flat = 0; flat < dc; ++flat) m.block(flat * ds, flat * ds, ds, ds) = components_[flat];
  std::vector<Region> factors = classical_;
  factors.insert(factors.end(), system_.begin(), system_.end());
  return LabeledOperator(std::move(factors), std::move(m));
}

HybridState HybridState::disassemble(const LabeledOperator& op, const std::vector<std::string>& classical_ids,
                                     const Tolerance& tol) {
  std::set<std::string> cset(classical_ids.begin(), classical_ids.end());
  std::vector<Region> cls;
  std::vector<Region> sys;
  for (const auto& f : op.factors()) (cset.count(f.id) ? cls : sys).push_back(f);
  if (cls.size() != cset.size()) throw RegionError("disassemble: unknown classical region id");
  std::vector<std::string> order;
  for (const auto& r : cls) order.push_back(r.id);
  for (const auto& r : sys) order.push_back(r.id);
  const Matrix m = op.matrix_in_order(order);
  const int dc = total_dim(cls);
  const int ds = total_dim(sys);
  std::vector<Matrix> comps;
  for (int x = 0; x < dc; ++x) {
    for (int y = 0; y < dc; ++y) {
      if (x != y && m.block(x * ds, y * ds, ds, ds).cwiseAbs().maxCoeff() > tol.eq_tol) {
        throw ValidationError("disassemble: operator is not block diagonal over the classical regions");
      }
    }
    comps.push_back(m.block(x * ds, x * ds, ds, ds));
  }
  return HybridState(std::move(cls), std::move(sys), std::move(comps));
}

void HybridState::check(const Tolerance& tol) const {
  double total = 0.0;
  for (int flat = 0; flat < value_count(); ++flat) {
    if (!psd_hermitian(components_[flat], tol)) {
      throw ValidationError("hybrid: component " + std::to_string(flat) + " is not positive semidefinite");
    }
    total += probability(flat);
  }
  if (std::abs(total - 1.0) > tol.eq_tol) throw ValidationError("hybrid: components do not have total trace 1");
}

void LikelihoodOperator::check(const Tolerance& tol) const {
  if (static_cast<int>(effects.size()) != outcome.dim) {
    throw ValidationError("likelihood: number of effects does not match outcome alphabet");
  }
  Matrix sum = Matrix::Zero(system.dim, system.dim);
  for (const auto& e : effects) {
    if (e.rows() != system.dim || e.cols() != system.dim) throw RegionError("likelihood: effect has the wrong size");
    if (!psd_hermitian(e, tol)) throw ValidationError("likelihood: effect is not positive semidefinite");
    sum += e;
  }
  if (spectral_norm(sum - Matrix::Identity(system.dim, system.dim)) > tol.eq_tol) {
    throw ValidationError("likelihood: effects do not sum to the identity");
  }
}

ConditionalState LikelihoodOperator::conditional() const {
  Matrix m = Matrix::Zero(outcome.dim * system.dim, outcome.dim * system.dim);
  for (int x = 0; x < outcome.dim; ++x) m.block(x * system.dim, x * system.dim, system.dim, system.dim) = effects[x];
  return ConditionalState{LabeledOperator({outcome, system}, std::move(m)), {outcome.id}, {system.id},
                          CausalClass::hybrid()};
}

LikelihoodOperator LikelihoodOperator::projective(Region outcome, Region system, const Matrix& basis) {
  if (basis.rows() != system.dim || basis.cols() != outcome.dim) {
    throw RegionError("projective likelihood: basis shape does not match regions");
  }
  LikelihoodOperator l{std::move(outcome), std::move(system), {}};
  for (Eigen::Index x = 0; x < basis.cols(); ++x) l.effects.push_back(basis.col(x) * basis.col(x).adjoint());
  return l;
}

LikelihoodOperator LikelihoodOperator::classical_channel(Region outcome, Region system,
                                                         const std::vector<std::vector<double>>& p_x_given_z) {
  if (static_cast<int>(p_x_given_z.size()) != system.dim) {
    throw RegionError("classical likelihood: need one row per value of '" + system.id + "'");
  }
  LikelihoodOperator l{outcome, system, std::vector<Matrix>(outcome.dim, Matrix::Zero(system.dim, system.dim))};
  for (int z = 0; z < system.dim; ++z) {
    if (static_cast<int>(p_x_given_z[z].size()) != outcome.dim) {
      throw RegionError("classical likelihood: row has the wrong length");
    }
    for (int x = 0; x < outcome.dim; ++x) l.effects[x](z, z) = p_x_given_z[z][x];
  }
  return l;
}

void EnsemblePreparation::check(const Tolerance& tol) const {
  if (static_cast<int>(states.size()) != label.dim) {
    throw ValidationError("ensemble: number of states does not match label alphabet");
  }
  for (const auto& s : states) {
    if (s.rows() != system.dim || s.cols() != system.dim) throw RegionError("ensemble: state has the wrong size");
    if (!psd_hermitian(s, tol)) throw ValidationError("ensemble: state is not positive semidefinite");
    if (std::abs(s.trace() - 1.0) > tol.eq_tol) throw ValidationError("ensemble: state is not normalized");
  }
}

Instrument Instrument::from_kraus(Region input, Region outcome, Region output,
                                  const std::vector<std::vector<Matrix>>& kraus_per_outcome) {
  if (static_cast<int>(kraus_per_outcome.size()) != outcome.dim) {
    throw RegionError("instrument: need one Kraus set per outcome");
  }
  const int da = input.dim;
  const int db = output.dim;
  Instrument inst{input, outcome, output, {}};
  for (const auto& kraus : kraus_per_outcome) {
    Matrix m = Matrix::Zero(da * db, da * db);
    for (int j = 0; j < da; ++j)
      for (int k = 0; k < da; ++k) {
        Matrix block = Matrix::Zero(db, db);
        for (const auto& K : kraus) {
          if (K.rows() != db || K.cols() != da) throw RegionError("instrument: Kraus operator has the wrong shape");
          block += K.col(k) * K.col(j).adjoint();
        }
        m.block(j * db, k * db, db, db) = block;
      }
    inst.operations.push_back(std::move(m));
  }
  return inst;
}

void Instrument::check(const Tolerance& tol) const {
  if (static_cast<int>(operations.size()) != outcome.dim) {
    throw ValidationError("instrument: number of operations does not match outcome alphabet");
  }
  Matrix total = Matrix::Zero(input.dim, input.dim);
  for (const auto& op : operations) {
    const LabeledOperator lop({input, output}, op);
    if (!is_psd(partial_transpose(lop, {input.id}).hermitian_part(), tol)) {
      throw ValidationError("instrument: operation is not completely positive");
    }
    total += partial_trace(lop, {output.id}).matrix();
  }
  if (spectral_norm(total - Matrix::Identity(input.dim, input.dim)) > tol.eq_tol) {
    throw ValidationError("instrument: operations do not sum to a trace-preserving map");
  }
}

ConditionalState Instrument::conditional() const {
  const int d = input.dim * output.dim;
  Matrix m = Matrix::Zero(outcome.dim * d, outcome.dim * d);
  for (int x = 0; x < outcome.dim; ++x) m.block(x * d, x * d, d, d) = operations[x];
  return ConditionalState{LabeledOperator({outcome, input, output}, std::move(m)),
                          {outcome.id, output.id},
                          {input.id},
                          CausalClass::causal({input.id})};
}

LikelihoodOperator Instrument::induced_povm() const {
  LikelihoodOperator l{outcome, input, {}};
  for (const auto& op : operations) {
    l.effects.push_back(partial_trace(LabeledOperator({input, output}, op), {output.id}).matrix());
  }
  return l;
}

Matrix Instrument::apply_outcome(int x, const Matrix& rho_in) const {
  const Matrix& op = operations.at(x);
  const int da = input.dim;
  const int db = output.dim;
  Matrix out = Matrix::Zero(db, db);
  for (int a1 = 0; a1 < da; ++a1)
    for (int a2 = 0; a2 < da; ++a2) out += rho_in(a2, a1) * op.block(a1 * db, a2 * db, db, db);
  return 0.5 * (out + out.adjoint());
}

JointState embed_distribution(const ClassicalDistribution& d) {
  d.check();
  Matrix m = Matrix::Zero(d.region.dim, d.region.dim);
  for (int i = 0; i < d.region.dim; ++i) m(i, i) = d.probs[i];
  return JointState{LabeledOperator({d.region}, std::move(m)), CausalClass::hybrid()};
}

ClassicalDistribution extract_distribution(const JointState& s, const Tolerance& tol) {
  if (s.op.factors().size() != 1) throw RegionError("extract_distribution: needs a single-region state");
  Matrix off = s.op.matrix();
  off.diagonal().setZero();
  if (off.size() && off.cwiseAbs().maxCoeff() > tol.eq_tol) {
    throw ValidationError("extract_distribution: state has off-diagonal weight");
  }
  ClassicalDistribution d{s.op.factors().front(), {}};
  for (int i = 0; i < s.op.dim(); ++i) d.probs.push_back(s.op.matrix()(i, i).real());
  d.check(tol);
  return d;
}

JointState condition(const HybridState& h, const Assignment& assignment, const Tolerance& tol) {
  std::vector<std::string> keep;
  for (const auto& [id, value] : assignment) keep.push_back(id);
  const HybridState m = assignment.size() == h.classical().size() ? h : h.marginalize(keep);
  const int flat = m.flat_index(assignment);
  const double p = m.probability(flat);
  if (!(p > tol.eig_cut)) {
    throw UndefinedBranch("condition: the assigned value has zero probability");
  }
  return JointState{LabeledOperator(m.system(), m.component(flat) / p), CausalClass::acausal()};
}

ClassicalDistribution born_rule(const LikelihoodOperator& l, const JointState& rho) {
  require_single_region(rho, l.system, "born_rule");
  ClassicalDistribution d{l.outcome, {}};
  for (const auto& e : l.effects) d.probs.push_back((e * rho.op.matrix()).trace().real());
  return d;
}

JointState ensemble_average(const EnsemblePreparation& e, const ClassicalDistribution& d) {
  if (!(d.region == e.label) || static_cast<int>(e.states.size()) != e.label.dim) {
    throw RegionError("ensemble_average: distribution is not over the ensemble label");
  }
  Matrix m = Matrix::Zero(e.system.dim, e.system.dim);
  for (int x = 0; x < e.label.dim; ++x) m += d.probs[x] * e.states[x];
  return JointState{LabeledOperator({e.system}, std::move(m)), CausalClass::acausal()};
}

HybridState apply_instrument(const Instrument& inst, const JointState& rho_a) {
  require_single_region(rho_a, inst.input, "apply_instrument");
  std::vector<Matrix> comps;
  for (int x = 0; x < inst.outcome.dim; ++x) comps.push_back(inst.apply_outcome(x, rho_a.op.matrix()));
  return HybridState({inst.outcome}, {inst.output}, std::move(comps));
}

}  // namespace qcond
