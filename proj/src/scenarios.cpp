#include "qcond/scenarios.hpp"

#include <cinttypes>
#include <cstdio>
#include <set>

namespace qcond {

namespace {

std::string text(const Region& r) {
  return r.id + ":" + std::to_string(r.dim) + (r.classical() ? ":c;" : ":q;");
}

std::string text(const Matrix& m) {
  std::string out = "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]";
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g;", m(i, j).real(), m(i, j).imag());
      out += buf;
    }
  return out;
}

std::string hash_of(const std::string& s) { return digest_hex(fnv1a(s)); }

std::string digest(const ClassicalDistribution& d) {
  std::string s = "distribution|" + text(d.region);
  char buf[32];
  for (double p : d.probs) {
    std::snprintf(buf, sizeof buf, "%.17g;", p);
    s += buf;
  }
  return hash_of(s);
}

std::string digest(const EnsemblePreparation& e) {
  std::string s = "ensemble|" + text(e.label) + text(e.system);
  for (const auto& m : e.states) s += text(m);
  return hash_of(s);
}

std::string digest(const LikelihoodOperator& l) {
  std::string s = "povm|" + text(l.outcome) + text(l.system);
  for (const auto& m : l.effects) s += text(m);
  return hash_of(s);
}

std::string digest(const Instrument& inst) {
  std::string s = "instrument|" + text(inst.input) + text(inst.outcome) + text(inst.output);
  for (const auto& m : inst.operations) s += text(m);
  return hash_of(s);
}

std::string digest(const JointState& j) { return digest(j.op); }

void require_not_causal(const JointState& s, const char* what) {
  if (s.causal_class.kind == CausalKind::Causal) {
    throw PreconditionError(std::string(what) + ": expects an acausal joint state, got a causal one");
  }
}

void require_on(const JointState& s, const Region& r, const char* what) {
  if (s.op.factors().size() != 1 || !(s.op.factors().front() == r)) {
    throw RegionError(std::string(what) + ": state must live on region '" + r.id + "' alone");
  }
}

void require_region_of(const JointState& s, const Region& r, const char* what) {
  if (!s.op.has(r.id) || !(s.op.region(r.id) == r)) {
    throw RegionError(std::string(what) + ": state has no region matching '" + r.id + "'");
  }
}

// P(x|z) from a likelihood on a classical region; refuses coherences.
std::vector<std::vector<double>> stochastic_of(const LikelihoodOperator& l, const Region& z, const char* what,
                                               const Tolerance& tol = {}) {
  if (!(l.system == z)) {
    throw RegionError(std::string(what) + ": likelihood is not over region '" + z.id + "'");
  }
  std::vector<std::vector<double>> p(z.dim, std::vector<double>(l.outcome.dim));
  for (int x = 0; x < l.outcome.dim; ++x) {
    Matrix off = l.effects.at(x);
    off.diagonal().setZero();
    if (off.size() && off.cwiseAbs().maxCoeff() > tol.eq_tol) {
      throw PreconditionError(std::string(what) + ": likelihood on '" + z.id + "' is not a stochastic matrix");
    }
    for (int v = 0; v < z.dim; ++v) p[v][x] = l.effects[x](v, v).real();
  }
  return p;
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string digest(const LabeledOperator& op) {
  std::string s = "operator|";
  for (const auto& f : op.factors()) s += text(f);
  return hash_of(s + text(op.matrix()));
}

std::string digest(const HybridState& h) {
  std::string s = "hybrid|";
  for (const auto& r : h.classical()) s += text(r);
  s += "|";
  for (const auto& r : h.system()) s += text(r);
  for (const auto& m : h.components()) s += text(m);
  return hash_of(s);
}

Scenario preparation_scenario(const ClassicalDistribution& pz, const EnsemblePreparation& prep) {
  if (!(pz.region == prep.label)) throw RegionError("preparation_scenario: distribution is not over the label");
  pz.check();
  prep.check();
  std::vector<Matrix> comps;
  for (int z = 0; z < pz.region.dim; ++z) comps.push_back(pz.probs[z] * prep.states[z]);
  return Scenario{HybridState({pz.region}, {prep.system}, std::move(comps)),
                  "preparation",
                  {{"pz", digest(pz)}, {"prep", digest(prep)}}};
}

Scenario remote_measurement_scenario(const JointState& rho_ab, const LikelihoodOperator& l) {
  require_not_causal(rho_ab, "remote_measurement_scenario");
  require_region_of(rho_ab, l.system, "remote_measurement_scenario");
  l.check();
  if (rho_ab.op.factors().size() < 2) throw RegionError("remote_measurement_scenario: no region left after A");
  std::vector<Matrix> comps;
  std::vector<Region> system;
  for (const auto& e : l.effects) {
    const LabeledOperator c = partial_trace(LabeledOperator({l.system}, e) * rho_ab.op, {l.system.id});
    system = c.factors();
    comps.push_back(c.hermitian_part().matrix());
  }
  return Scenario{HybridState({l.outcome}, system, std::move(comps)),
                  "remote_measurement",
                  {{"rho", digest(rho_ab)}, {"povm", digest(l)}}};
}

Scenario retrodiction_scenario(const JointState& rho_b, const LikelihoodOperator& l) {
  require_on(rho_b, l.system, "retrodiction_scenario");
  l.check();
  const Matrix root = sqrt_psd(rho_b.op.hermitian_part()).matrix();
  std::vector<Matrix> comps;
  for (const auto& e : l.effects) {
    Matrix c = root * e * root;
    comps.push_back(0.5 * (c + c.adjoint()));
  }
  return Scenario{HybridState({l.outcome}, {l.system}, std::move(comps)),
                  "retrodiction",
                  {{"rho", digest(rho_b)}, {"povm", digest(l)}}};
}

Scenario instrument_scenario(const JointState& rho_a, const Instrument& inst) {
  require_on(rho_a, inst.input, "instrument_scenario");
  inst.check();
  return Scenario{apply_instrument(inst, rho_a), "instrument", {{"rho", digest(rho_a)}, {"instrument", digest(inst)}}};
}

Scenario postprocess_scenario(const Scenario& base, const LikelihoodOperator& proc) {
  const HybridState& h = base.joint;
  const Region& x1 = h.classical_region(proc.system.id);
  proc.check();
  const auto p = stochastic_of(proc, x1, "postprocess_scenario");
  std::size_t pos = 0;
  while (h.classical()[pos].id != x1.id) ++pos;
  std::vector<Region> classical_regions = h.classical();
  classical_regions.push_back(proc.outcome);
  const int d2 = proc.outcome.dim;
  std::vector<Matrix> comps;
  for (int flat = 0; flat < h.value_count(); ++flat) {
    const int v1 = h.values_of(flat)[pos];
    for (int x2 = 0; x2 < d2; ++x2) comps.push_back(p[v1][x2] * h.component(flat));
  }
  auto digests = base.digests;
  digests["base"] = digest(h);
  digests["proc"] = digest(proc);
  return Scenario{HybridState(std::move(classical_regions), h.system(), std::move(comps)), "postprocess",
                  std::move(digests)};
}

Scenario two_preparation_scenario(const ClassicalDistribution& pz, const EnsemblePreparation& prep,
                                  const LikelihoodOperator& l1, const LikelihoodOperator& l2) {
  if (!(pz.region == prep.label)) throw RegionError("two_preparation_scenario: distribution is not over the label");
  pz.check();
  prep.check();
  l1.check();
  l2.check();
  const auto p1 = stochastic_of(l1, pz.region, "two_preparation_scenario");
  const auto p2 = stochastic_of(l2, pz.region, "two_preparation_scenario");
  const int ds = prep.system.dim;
  std::vector<Matrix> comps;
  for (int x1 = 0; x1 < l1.outcome.dim; ++x1)
    for (int x2 = 0; x2 < l2.outcome.dim; ++x2) {
      Matrix c = Matrix::Zero(ds, ds);
      for (int z = 0; z < pz.region.dim; ++z) c += p1[z][x1] * p2[z][x2] * pz.probs[z] * prep.states[z];
      comps.push_back(std::move(c));
    }
  return Scenario{HybridState({l1.outcome, l2.outcome}, {prep.system}, std::move(comps)),
                  "two_preparation",
                  {{"pz", digest(pz)}, {"prep", digest(prep)}, {"l1", digest(l1)}, {"l2", digest(l2)}}};
}

Scenario two_remote_scenario(const JointState& rho, const LikelihoodOperator& l1, const LikelihoodOperator& l2) {
  require_not_causal(rho, "two_remote_scenario");
  require_region_of(rho, l1.system, "two_remote_scenario");
  require_region_of(rho, l2.system, "two_remote_scenario");
  if (l1.system.id == l2.system.id) throw RegionError("two_remote_scenario: both measurements act on one region");
  if (rho.op.factors().size() < 3) throw RegionError("two_remote_scenario: no region left after A1 A2");
  l1.check();
  l2.check();
  std::vector<Matrix> comps;
  std::vector<Region> system;
  for (const auto& e1 : l1.effects)
    for (const auto& e2 : l2.effects) {
      const LabeledOperator e = tensor(LabeledOperator({l1.system}, e1), LabeledOperator({l2.system}, e2));
      const LabeledOperator c = partial_trace(e * rho.op, {l1.system.id, l2.system.id});
      system = c.factors();
      comps.push_back(c.hermitian_part().matrix());
    }
  return Scenario{HybridState({l1.outcome, l2.outcome}, system, std::move(comps)),
                  "two_remote",
                  {{"rho", digest(rho)}, {"l1", digest(l1)}, {"l2", digest(l2)}}};
}

Scenario two_direct_scenario(const JointState& rho_b, const LikelihoodOperator& lz, const LikelihoodOperator& l1,
                             const LikelihoodOperator& l2) {
  require_on(rho_b, lz.system, "two_direct_scenario");
  lz.check();
  l1.check();
  l2.check();
  const auto p1 = stochastic_of(l1, lz.outcome, "two_direct_scenario");
  const auto p2 = stochastic_of(l2, lz.outcome, "two_direct_scenario");
  const Matrix root = sqrt_psd(rho_b.op.hermitian_part()).matrix();
  const int ds = lz.system.dim;
  std::vector<Matrix> retro;
  for (const auto& e : lz.effects) retro.push_back(root * e * root);
  std::vector<Matrix> comps;
  for (int x1 = 0; x1 < l1.outcome.dim; ++x1)
    for (int x2 = 0; x2 < l2.outcome.dim; ++x2) {
      Matrix c = Matrix::Zero(ds, ds);
      for (int z = 0; z < lz.outcome.dim; ++z) c += p1[z][x1] * p2[z][x2] * retro[z];
      comps.push_back(0.5 * (c + c.adjoint()));
    }
  return Scenario{HybridState({l1.outcome, l2.outcome}, {lz.system}, std::move(comps)),
                  "two_direct",
                  {{"rho", digest(rho_b)}, {"lz", digest(lz)}, {"l1", digest(l1)}, {"l2", digest(l2)}}};
}

Scenario sequential_measurement_scenario(const JointState& rho_a1, const Instrument& inst1, const Instrument& inst2) {
  if (!(inst1.output == inst2.input)) {
    throw RegionError("sequential_measurement_scenario: first instrument's output is not the second's input");
  }
  require_on(rho_a1, inst1.input, "sequential_measurement_scenario");
  inst1.check();
  inst2.check();
  std::vector<Matrix> comps;
  for (int x1 = 0; x1 < inst1.outcome.dim; ++x1) {
    const Matrix mid = inst1.apply_outcome(x1, rho_a1.op.matrix());
    for (int x2 = 0; x2 < inst2.outcome.dim; ++x2) comps.push_back(inst2.apply_outcome(x2, mid));
  }
  return Scenario{HybridState({inst1.outcome, inst2.outcome}, {inst2.output}, std::move(comps)),
                  "sequential_measurement",
                  {{"rho", digest(rho_a1)}, {"inst1", digest(inst1)}, {"inst2", digest(inst2)}}};
}

Realization realize_arbitrary_joint(const HybridState& target, const std::string& a1_id, const std::string& a2_id,
                                    const Tolerance& tol) {
  if (target.classical().size() != 2) throw RegionError("realize_arbitrary_joint: target needs two classical regions");
  if (target.system().size() != 1) throw RegionError("realize_arbitrary_joint: target needs a single system region");
  if (a1_id == a2_id) throw RegionError("realize_arbitrary_joint: register ids must differ");
  for (const auto& id : {a1_id, a2_id}) {
    for (const auto* list : {&target.classical(), &target.system()})
      for (const auto& r : *list)
        if (r.id == id) throw RegionError("realize_arbitrary_joint: register id '" + id + "' clashes with the target");
  }
  target.check(tol);
  const Region x1 = target.classical()[0];
  const Region x2 = target.classical()[1];
  const Region b = target.system()[0];
  const int d1 = x1.dim;
  const int d2 = x2.dim;
  const int dr = d1 * d2;
  const int db = b.dim;
  const Region a1 = classical(a1_id, dr);
  const Region a2 = classical(a2_id, dr);

  Matrix reg = Matrix::Zero(dr, dr);
  for (int j = 0; j < dr; ++j) reg(j, j) = std::max(0.0, target.probability(j));
  reg /= reg.trace().real();

  std::vector<std::vector<Matrix>> kraus1(d1);
  for (int v1 = 0; v1 < d1; ++v1) {
    Matrix p = Matrix::Zero(dr, dr);
    for (int v2 = 0; v2 < d2; ++v2) p(v1 * d2 + v2, v1 * d2 + v2) = 1.0;
    kraus1[v1].push_back(std::move(p));
  }
  Instrument inst1 = Instrument::from_kraus(a1, x1, a2, kraus1);

  Instrument inst2{a2, x2, b, {}};
  for (int v2 = 0; v2 < d2; ++v2) {
    Matrix op = Matrix::Zero(dr * db, dr * db);
    for (int v1 = 0; v1 < d1; ++v1) {
      const int j = v1 * d2 + v2;
      const auto state = target.conditional(j, tol);
      op.block(j * db, j * db, db, db) =
          state ? state->matrix() : Matrix(Matrix::Identity(db, db) / static_cast<double>(db));
    }
    inst2.operations.push_back(std::move(op));
  }
  return Realization{JointState{LabeledOperator({a1}, std::move(reg)), CausalClass::hybrid()}, std::move(inst1),
                     std::move(inst2)};
}

Obstruction joint_state_obstruction(const HybridState& h1, const HybridState& h2, const Tolerance& tol) {
  if (h1.classical().size() != 1 || h2.classical().size() != 1) {
    throw RegionError("joint_state_obstruction: each hybrid must carry exactly one classical variable");
  }
  if (h1.system() != h2.system()) throw RegionError("joint_state_obstruction: hybrids live on different systems");
  if (h1.classical()[0].id == h2.classical()[0].id) {
    throw RegionError("joint_state_obstruction: both hybrids use the variable '" + h1.classical()[0].id + "'");
  }
  if (distance(h1.system_marginal().op, h2.system_marginal().op) > tol.eq_tol) {
    throw PreconditionError("joint_state_obstruction: the two hybrids assign different states to the system");
  }
  Obstruction ob{h1.classical()[0].id, h2.classical()[0].id, 0, {}};
  for (int v1 = 0; v1 < h1.value_count(); ++v1) {
    const auto s1 = h1.conditional(v1, tol);
    if (!s1) continue;
    const auto supp1 = support(s1->hermitian_part(), tol);
    for (int v2 = 0; v2 < h2.value_count(); ++v2) {
      const auto s2 = h2.conditional(v2, tol);
      if (!s2) continue;
      ++ob.pairs_checked;
      if (subspace_intersection(supp1, support(s2->hermitian_part(), tol), tol).rank == 0) {
        ob.pairs.push_back(ObstructedPair{v1, v2, h1.probability(v1), h2.probability(v2)});
      }
    }
  }
  return ob;
}

}  // namespace qcond
