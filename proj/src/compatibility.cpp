#include <algorithm>
#include <cmath>

#include "qcond/inference.hpp"

namespace qcond {

namespace {

void require_same_regions(const JointState& a, const JointState& b, const char* what) {
  if (a.op.factors() != b.op.factors()) {
    throw RegionError(std::string(what) + ": states live on different regions");
  }
}

}  // namespace

CompatibilityVerdict classical_compatible(const ClassicalDistribution& q1, const ClassicalDistribution& q2,
                                          const Tolerance& tol) {
  if (!(q1.region == q2.region)) throw RegionError("classical_compatible: distributions over different regions");
  q1.check(tol);
  q2.check(tol);
  const double cut1 = tol.eig_cut * *std::max_element(q1.probs.begin(), q1.probs.end());
  const double cut2 = tol.eig_cut * *std::max_element(q2.probs.begin(), q2.probs.end());
  const int d = q1.region.dim;
  Matrix proj = Matrix::Zero(d, d);
  std::vector<int> common;
  for (int y = 0; y < d; ++y) {
    if (q1.probs[y] > cut1 && q2.probs[y] > cut2) {
      proj(y, y) = 1.0;
      common.push_back(y);
    }
  }
  Matrix basis = Matrix::Zero(d, static_cast<Eigen::Index>(common.size()));
  for (std::size_t k = 0; k < common.size(); ++k) basis(common[k], k) = 1.0;
  return CompatibilityVerdict{
      !common.empty(),
      SupportSubspace{LabeledOperator({q1.region}, std::move(proj)), static_cast<int>(common.size()), basis}};
}

CompatibilityVerdict bfm_compatible(const JointState& s1, const JointState& s2, const Tolerance& tol) {
  require_same_regions(s1, s2, "bfm_compatible");
  auto inter = subspace_intersection(support(s1.op, tol), support(s2.op, tol), tol);
  const bool ok = inter.rank >= 1;
  return CompatibilityVerdict{ok, std::move(inter)};
}

ObjectiveWitness objective_witness(const JointState& s1, const JointState& s2, const Tolerance& tol,
                                   const std::string& x1_id, const std::string& x2_id) {
  const auto verdict = bfm_compatible(s1, s2, tol);
  if (!verdict.compatible) throw IncompatibleError("objective_witness: supports do not intersect");
  for (const auto& id : {x1_id, x2_id}) {
    if (s1.op.has(id)) throw RegionError("objective_witness: classical id '" + id + "' clashes with the system");
  }
  const auto& factors = s1.op.factors();
  const int d = s1.op.dim();
  const Vector psi = verdict.intersection.basis.col(0);
  const Matrix mu = psi * psi.adjoint();

  auto split = [&](const JointState& s, double& p, Matrix& eta) {
    const Matrix inv = pseudo_inverse(s.op.hermitian_part(), tol).matrix();
    p = std::min(1.0, 1.0 / (psi.adjoint() * inv * psi)(0, 0).real());
    if (1.0 - p <= 1e-12) {
      p = 1.0;
      eta = mu;
    } else {
      eta = (s.op.matrix() - p * mu) / (1.0 - p);
      eta = (0.5 * (eta + eta.adjoint())).eval();
    }
  };
  double p1 = 1.0;
  double p2 = 1.0;
  Matrix eta1;
  Matrix eta2;
  split(s1, p1, eta1);
  split(s2, p2, eta2);
  const Matrix nu = Matrix::Identity(d, d) / static_cast<double>(d);

  // Components indexed by (x1, x2) in the order the regions are passed.
  std::vector<Matrix> comps(4);
  comps[0] = p1 * p2 * mu;
  comps[1] = (1.0 - p1) * p2 * eta1;
  comps[2] = p1 * (1.0 - p2) * eta2;
  comps[3] = (1.0 - p1) * (1.0 - p2) * nu;
  HybridState joint({classical(x1_id, 2), classical(x2_id, 2)}, factors, std::move(comps));

  ObjectiveWitness w{joint,
                     {{x1_id, 0}, {x2_id, 0}},
                     LabeledOperator(factors, mu),
                     LabeledOperator(factors, eta1),
                     LabeledOperator(factors, eta2),
                     LabeledOperator(factors, nu),
                     p1,
                     p2};
  const double e1 = distance(condition(w.joint, {{x1_id, 0}}, tol).op, s1.op);
  const double e2 = distance(condition(w.joint, {{x2_id, 0}}, tol).op, s2.op);
  if (e1 > tol.eq_tol || e2 > tol.eq_tol) {
    throw Error("objective_witness: constructed joint does not reproduce the inputs");
  }
  return w;
}

SubjectiveWitness subjective_witness(const JointState& s1, const JointState& s2, const Tolerance& tol,
                                     const std::string& x_id) {
  const auto verdict = bfm_compatible(s1, s2, tol);
  if (!verdict.compatible) throw IncompatibleError("subjective_witness: supports do not intersect");
  if (s1.op.factors().size() != 1) throw RegionError("subjective_witness: states must live on a single region");
  const Region system = s1.op.factors().front();
  const int d = system.dim;

  // Find e with sqrt(s1) e parallel to sqrt(s2) e, both nonzero: the
  // generalized eigenvectors of (A, A + B) with eigenvalue strictly inside
  // (0, 1), restricted to supp(A + B). There are exactly
  // dim(supp s1 ∩ supp s2) of them.
  const Matrix a = sqrt_psd(s1.op.hermitian_part(), tol).matrix();
  const Matrix b = sqrt_psd(s2.op.hermitian_part(), tol).matrix();
  const auto span = support(LabeledOperator({system}, a + b), tol);
  const Matrix& v = span.basis;
  const Matrix aw = v.adjoint() * a * v;
  const Matrix cw = v.adjoint() * (a + b) * v;
  const Matrix cw_inv_root =
      hermitian_function(0.5 * (cw + cw.adjoint()), [](double x) { return x > 0.0 ? 1.0 / std::sqrt(x) : 0.0; });
  Matrix h = cw_inv_root * aw * cw_inv_root;
  const auto eig = hermitian_eigen(0.5 * (h + h.adjoint()));
  Eigen::Index best = -1;
  double best_margin = 0.0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    const double margin = std::min(eig.values(k), 1.0 - eig.values(k));
    if (margin > best_margin) {
      best_margin = margin;
      best = k;
    }
  }
  if (best < 0 || best_margin <= 1e-12) {
    throw Error("subjective_witness: no agreeing direction found despite intersecting supports");
  }
  Vector e = v * cw_inv_root * eig.vectors.col(best);
  e /= e.norm();
  Vector psi = a * e;
  psi /= psi.norm();

  const Region outcome = classical(x_id, 2);
  LikelihoodOperator l{outcome, system, {e * e.adjoint(), Matrix::Identity(d, d) - e * e.adjoint()}};
  const JointState post1 = posterior_given_likelihood(s1, l, 0, tol);
  const JointState post2 = posterior_given_likelihood(s2, l, 0, tol);
  const LabeledOperator pure({system}, psi * psi.adjoint());
  if (distance(post1.op, post2.op) > tol.eq_tol || distance(post1.op, pure) > tol.eq_tol) {
    throw Error("subjective_witness: posteriors do not coincide");
  }
  return SubjectiveWitness{std::move(l), 0, psi, pure};
}

JointState posterior_given_likelihood(const JointState& sigma, const LikelihoodOperator& l, int x,
                                      const Tolerance& tol) {
  if (sigma.op.factors().size() != 1 || !(sigma.op.factors().front() == l.system)) {
    throw RegionError("posterior_given_likelihood: state does not live on the likelihood's region");
  }
  if (x < 0 || x >= static_cast<int>(l.effects.size())) throw RegionError("posterior_given_likelihood: bad outcome");
  const LabeledOperator effect({l.system}, l.effects[x]);
  const double p = (effect.matrix() * sigma.op.matrix()).trace().real();
  if (!(p > tol.eig_cut)) throw UndefinedBranch("posterior_given_likelihood: outcome has zero probability");
  LabeledOperator post = star_product(effect, sigma.op.hermitian_part(), tol) * Complex(1.0 / p);
  return JointState{post.hermitian_part(), CausalClass::acausal()};
}

double support_leakage(const HybridState& h, const Assignment& x, const Tolerance& tol) {
  const JointState cond = condition(h, x, tol);
  return leakage_outside(cond.op, support(h.system_marginal().op.hermitian_part(), tol));
}

bool support_lemma_check(const HybridState& h, const Assignment& x, const Tolerance& tol) {
  return support_leakage(h, x, tol) <= tol.eq_tol;
}

bool classical_support_lemma_check(const std::vector<std::vector<double>>& p_xy, int x, const Tolerance& tol) {
  if (x < 0 || x >= static_cast<int>(p_xy.size())) throw RegionError("classical_support_lemma_check: bad value");
  const std::size_t ny = p_xy[x].size();
  std::vector<double> p_y(ny, 0.0);
  for (const auto& row : p_xy) {
    if (row.size() != ny) throw RegionError("classical_support_lemma_check: ragged table");
    for (std::size_t y = 0; y < ny; ++y) p_y[y] += row[y];
  }
  double px = 0.0;
  for (double v : p_xy[x]) px += v;
  if (!(px > tol.eig_cut)) throw UndefinedBranch("classical_support_lemma_check: value has zero probability");
  for (std::size_t y = 0; y < ny; ++y) {
    if (p_xy[x][y] / px > tol.eq_tol && p_y[y] <= 0.0) return false;
  }
  return true;
}

}  // namespace qcond
