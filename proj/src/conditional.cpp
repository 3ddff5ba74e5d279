#include "qcond/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace qcond {

namespace {

std::set<std::string> as_set(const std::vector<std::string>& ids) { return {ids.begin(), ids.end()}; }

std::set<std::string> id_set(const LabeledOperator& op) {
  const auto ids = op.ids();
  return as_set(ids);
}

void require_regions(const JointState& s, const std::vector<std::string>& expected, const char* what) {
  if (id_set(s.op) != as_set(expected)) {
    throw RegionError(std::string(what) + ": state regions do not match the conditioning regions");
  }
}

double max_block_offdiagonal(const LabeledOperator& op, const Region& c) {
  std::vector<std::string> order{c.id};
  for (const auto& f : op.factors())
    if (f.id != c.id) order.push_back(f.id);
  const Matrix m = op.matrix_in_order(order);
  const int rest = op.dim() / c.dim;
  double worst = 0.0;
  for (int x = 0; x < c.dim; ++x)
    for (int y = 0; y < c.dim; ++y)
      if (x != y) worst = std::max(worst, m.block(x * rest, y * rest, rest, rest).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

std::string to_string(CausalKind kind) {
  switch (kind) {
    case CausalKind::Acausal: return "acausal";
    case CausalKind::Causal: return "causal";
    case CausalKind::Hybrid: return "hybrid";
  }
  return "unknown";
}

Matrix Channel::apply(const Matrix& rho) const {
  Matrix out = Matrix::Zero(output.dim, output.dim);
  for (const auto& k : kraus) out += k * rho * k.adjoint();
  return out;
}

double Channel::trace_preservation_error() const {
  Matrix s = Matrix::Zero(input.dim, input.dim);
  for (const auto& k : kraus) {
    if (k.rows() != output.dim || k.cols() != input.dim) {
      throw RegionError("channel: Kraus operator has the wrong shape");
    }
    s += k.adjoint() * k;
  }
  return spectral_norm(s - Matrix::Identity(input.dim, input.dim));
}

Channel Channel::identity(Region input, Region output) {
  if (input.dim != output.dim) throw RegionError("identity channel needs equal dimensions");
  const int d = input.dim;
  return Channel{std::move(input), std::move(output), {Matrix::Identity(d, d)}};
}

Channel Channel::depolarizing(Region input, Region output, double p) {
  if (input.dim != output.dim) throw RegionError("depolarizing channel needs equal dimensions");
  if (p < 0.0 || p > 1.0) throw PreconditionError("depolarizing strength must lie in [0, 1]");
  const int d = input.dim;
  Channel ch{std::move(input), std::move(output), {}};
  if (p < 1.0) ch.kraus.push_back(std::sqrt(1.0 - p) * Matrix::Identity(d, d));
  if (p > 0.0) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Matrix k = Matrix::Zero(d, d);
        k(i, j) = std::sqrt(p / d);
        ch.kraus.push_back(std::move(k));
      }
  }
  return ch;
}

ValidationReport validate(const JointState& j, const Tolerance& tol) {
  ValidationReport rep;
  const Complex tr = j.op.trace();
  rep.trace = tr.real();
  rep.trace_ok = std::abs(tr - 1.0) <= tol.eq_tol;
  if (!rep.trace_ok) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "unit trace violated (trace %.17g)", rep.trace);
    rep.failures.push_back(buf);
  }
  rep.hermitian_ok = j.op.is_hermitian(tol.eq_tol * std::max(1.0, j.op.matrix().cwiseAbs().maxCoeff()));
  if (!rep.hermitian_ok) {
    rep.failures.push_back("operator is not Hermitian");
    return rep;
  }
  LabeledOperator target = j.op;
  if (j.causal_class.kind == CausalKind::Causal) {
    target = partial_transpose(j.op, as_set(j.causal_class.transposed));
  }
  const auto eig = hermitian_eigen(target.hermitian_part().matrix());
  rep.min_eigenvalue = eig.values.size() ? eig.values.minCoeff() : 0.0;
  rep.positivity_ok = is_psd(target.hermitian_part(), tol);
  if (!rep.positivity_ok) {
    rep.failures.push_back(j.causal_class.kind == CausalKind::Causal
                               ? "partial transpose is not positive (PPT violated)"
                               : "operator is not positive semidefinite");
  }
  if (j.causal_class.kind == CausalKind::Hybrid) {
    for (const auto& f : j.op.factors()) {
      if (f.classical() && max_block_offdiagonal(j.op, f) > tol.eq_tol) {
        rep.block_diagonal_ok = false;
        rep.failures.push_back("off-diagonal block on classical region '" + f.id + "'");
      }
    }
  }
  return rep;
}

double normalization_error(const ConditionalState& c, const Tolerance& tol) {
  const LabeledOperator t = partial_trace(c.op, as_set(c.conditioned)).hermitian_part();
  const auto s = support(t, tol);
  return spectral_norm(t.matrix() - s.projector.matrix());
}

ConditionalState conditional_from_joint(const JointState& j, const std::set<std::string>& given,
                                        const Tolerance& tol) {
  if (given.empty()) throw RegionError("conditional_from_joint: no conditioning regions");
  std::vector<std::string> conditioned;
  for (const auto& f : j.op.factors())
    if (!given.count(f.id)) conditioned.push_back(f.id);
  for (const auto& id : given) j.op.region(id);
  const LabeledOperator marginal = reduce_to(j.op, given).hermitian_part();
  const LabeledOperator inv_root = pseudo_inverse_sqrt(marginal, tol);
  LabeledOperator op = inv_root * j.op * inv_root;
  return ConditionalState{std::move(op), std::move(conditioned), {given.begin(), given.end()}, j.causal_class};
}

JointState joint_from_conditional(const ConditionalState& c, const JointState& marginal, const Tolerance& tol) {
  require_regions(marginal, c.conditioning, "joint_from_conditional");
  const LabeledOperator root = sqrt_psd(marginal.op.hermitian_part(), tol);
  return JointState{root * c.op * root, c.causal_class};
}

JointState belief_propagate(const ConditionalState& c, const JointState& state_a, const Tolerance&) {
  require_regions(state_a, c.conditioning, "belief_propagate");
  const LabeledOperator out = partial_trace(c.op * state_a.op, as_set(c.conditioning)).hermitian_part();
  return JointState{out, CausalClass::acausal()};
}

ConditionalState bayes_invert(const ConditionalState& c, const JointState& marg_a, const Tolerance& tol) {
  require_regions(marg_a, c.conditioning, "bayes_invert");
  const JointState marg_b = belief_propagate(c, marg_a, tol);
  const LabeledOperator factor = tensor(sqrt_psd(marg_a.op.hermitian_part(), tol), pseudo_inverse_sqrt(marg_b.op, tol));
  return ConditionalState{factor * c.op * factor, c.conditioning, c.conditioned, c.causal_class};
}

ConditionalState channel_to_conditional(const Channel& ch, const Tolerance& tol) {
  if (ch.input.id == ch.output.id) throw RegionError("channel input and output must be distinct regions");
  if (ch.trace_preservation_error() > tol.eq_tol) {
    throw PreconditionError("channel_to_conditional: channel is not trace preserving");
  }
  const int da = ch.input.dim;
  const int db = ch.output.dim;
  Matrix m = Matrix::Zero(da * db, da * db);
  for (int j = 0; j < da; ++j)
    for (int k = 0; k < da; ++k) {
      Matrix kj = Matrix::Zero(da, da);
      kj(k, j) = 1.0;
      m.block(j * db, k * db, db, db) = ch.apply(kj);
    }
  return ConditionalState{LabeledOperator({ch.input, ch.output}, std::move(m)),
                          {ch.output.id},
                          {ch.input.id},
                          CausalClass::causal({ch.input.id})};
}

Channel conditional_to_channel(const ConditionalState& c, const Tolerance& tol) {
  if (c.conditioned.size() != 1 || c.conditioning.size() != 1) {
    throw RegionError("conditional_to_channel: needs a single input and a single output region");
  }
  const Region in = c.op.region(c.conditioning.front());
  const Region out = c.op.region(c.conditioned.front());
  const LabeledOperator choi = partial_transpose(c.op, {in.id}).hermitian_part();
  if (!is_psd(choi, tol)) {
    throw PreconditionError("conditional_to_channel: partial transpose is not PSD (map is not completely positive)");
  }
  const Matrix tb = partial_trace(c.op, {out.id}).matrix();
  if (spectral_norm(tb - Matrix::Identity(in.dim, in.dim)) > tol.eq_tol) {
    throw PreconditionError("conditional_to_channel: Tr over the output is not the identity");
  }
  const Matrix j = choi.matrix_in_order({in.id, out.id});
  const auto eig = hermitian_eigen(0.5 * (j + j.adjoint()));
  const double cut = tol.eig_cut * std::max(1.0, eig.values.maxCoeff());
  Channel ch{in, out, {}};
  for (Eigen::Index i = eig.values.size() - 1; i >= 0; --i) {
    if (eig.values(i) <= cut) continue;
    Matrix k(out.dim, in.dim);
    for (int a = 0; a < in.dim; ++a)
      for (int b = 0; b < out.dim; ++b) k(b, a) = std::sqrt(eig.values(i)) * eig.vectors(a * out.dim + b, i);
    ch.kraus.push_back(std::move(k));
  }
  return ch;
}

ConditionalState compose_conditionals(const ConditionalState& c2, const ConditionalState& c1) {
  if (as_set(c1.conditioned) != as_set(c2.conditioning)) {
    throw RegionError("compose_conditionals: output of the first conditional is not the input of the second");
  }
  LabeledOperator op = partial_trace(c2.op * c1.op, as_set(c1.conditioned));
  CausalClass cls = c1.causal_class;
  if (c1.causal_class.kind == CausalKind::Causal || c2.causal_class.kind == CausalKind::Causal) {
    cls = CausalClass::causal(c1.conditioning);
  }
  return ConditionalState{std::move(op), c2.conditioned, c1.conditioning, cls};
}

}  // namespace qcond
