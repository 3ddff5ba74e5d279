// Randomized invariants. Each property runs a fixed number of cases from
// its own seed so failures reproduce; the seed and case are in the message.

#include <doctest.h>

#include "qcond/errors.hpp"
#include "qcond/inference.hpp"
#include "qcond/scenarios.hpp"
#include "support.hpp"

using namespace qcond;
using namespace qt;

namespace {

Matrix random_unitary(Gen& g, int d) { return Eigen::HouseholderQR<Matrix>(g.gaussian(d, d)).householderQ(); }

Matrix hermitian(Gen& g, int d) {
  const Matrix m = g.gaussian(d, d);
  return 0.5 * (m + m.adjoint());
}

// A state whose support is a random subspace of rank r.
Matrix state_with_support(Gen& g, int d, const Matrix& basis) {
  const Matrix c = g.gaussian(static_cast<int>(basis.cols()), static_cast<int>(basis.cols()));
  Matrix rho = basis * c * c.adjoint() * basis.adjoint();
  (void)d;
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("partial trace is adjoint to padding with the identity") {
  Gen g(101);
  for (int t = 0; t < 50; ++t) {
    const Region a = quantum("A", g.integer(1, 3));
    const Region b = quantum("B", g.integer(1, 3));
    const Matrix op = g.gaussian(a.dim * b.dim, a.dim * b.dim);
    const Matrix mb = g.gaussian(b.dim, b.dim);
    const Complex lhs = (partial_trace(on({a, b}, op), {"A"}).matrix() * mb).trace();
    const Complex rhs = (op * kron(Matrix::Identity(a.dim, a.dim), mb)).trace();
    INFO("case " << t);
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("partial transpose is an involution and commutes with disjoint traces") {
  Gen g(102);
  for (int t = 0; t < 50; ++t) {
    const Region a = quantum("A", g.integer(1, 3));
    const Region b = quantum("B", g.integer(1, 3));
    const Region c = quantum("C", g.integer(1, 3));
    const auto op = on({a, b, c}, g.gaussian(a.dim * b.dim * c.dim, a.dim * b.dim * c.dim));
    INFO("case " << t);
    CHECK(dist(partial_transpose(partial_transpose(op, {"A"}), {"A"}), op.matrix()) == 0.0);
    CHECK(dist(partial_transpose(partial_trace(op, {"C"}), {"A"}), partial_trace(partial_transpose(op, {"A"}), {"C"}).matrix()) <
          1e-13);
  }
}

TEST_CASE("star product") {
  Gen g(103);
  for (int t = 0; t < 50; ++t) {
    const int d = g.integer(2, 4);
    const Region r = quantum("R", d);
    const Matrix m = hermitian(g, d);
    const Matrix n = g.density(d);
    const Matrix s = star_product(on({r}, m), on({r}, n)).matrix();
    INFO("case " << t);
    CHECK(dist(s, s.adjoint()) < 1e-12);
    CHECK(dist(s, psd_sqrt(n) * m * psd_sqrt(n)) < 1e-9);
    // Commuting operands give the ordinary product.
    const Matrix u = random_unitary(g, d);
    Matrix dm = Matrix::Zero(d, d), dn = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) dm(i, i) = g.normal(), dn(i, i) = g.uniform() + 0.1;
    const Matrix cm = u * dm * u.adjoint();
    const Matrix cn = u * dn * u.adjoint();
    CHECK(dist(star_product(on({r}, cm), on({r}, cn)), cm * cn) < 1e-12);
  }
}

TEST_CASE("entropy is unitarily invariant and additive") {
  Gen g(104);
  for (int t = 0; t < 50; ++t) {
    const int da = g.integer(2, 4);
    const int db = g.integer(2, 4);
    const Matrix ra = g.density(da, g.integer(1, da));
    const Matrix rb = g.density(db);
    const Matrix u = random_unitary(g, da);
    const Region a = quantum("A", da), b = quantum("B", db);
    const double sa = von_neumann_entropy(on({a}, ra));
    INFO("case " << t);
    CHECK(std::abs(von_neumann_entropy(on({a}, u * ra * u.adjoint())) - sa) < 1e-9);
    CHECK(std::abs(von_neumann_entropy(on({a, b}, kron(ra, rb))) - sa - von_neumann_entropy(on({b}, rb))) < 1e-9);
    CHECK(sa >= -1e-12);
    CHECK(sa <= std::log2(da) + 1e-12);
  }
}

TEST_CASE("joint, conditional and marginal round trips") {
  Gen g(105);
  for (int t = 0; t < 60; ++t) {
    const Region a = quantum("A", g.integer(2, 4));
    const Region b = quantum("B", g.integer(2, 4));
    const auto joint = state({a, b}, g.density(a.dim * b.dim));
    const auto c = conditional_from_joint(joint, {"A"});
    const auto ma = state({a}, reduce_to(joint.op, {"A"}).matrix());
    INFO("case " << t);
    CHECK(normalization_error(c) < 1e-9);
    CHECK(dist(joint_from_conditional(c, ma).op, joint.op.matrix()) < 1e-9);
    CHECK(dist(belief_propagate(c, ma).op, reduce_to(joint.op, {"B"}).matrix()) < 1e-9);
    const auto mb = state({b}, reduce_to(joint.op, {"B"}).matrix());
    CHECK(dist(bayes_invert(bayes_invert(c, ma), mb).op, c.op.matrix()) < 1e-8);
  }
}

TEST_CASE("classical reduction reproduces scalar probability") {
  Gen g(106);
  for (int t = 0; t < 100; ++t) {
    const Region r = classical("R", g.integer(2, 4));
    const Region s = classical("S", g.integer(2, 4));
    const auto p = g.distribution(r.dim * s.dim);
    Matrix d = Matrix::Zero(r.dim * s.dim, r.dim * s.dim);
    for (int i = 0; i < r.dim * s.dim; ++i) d(i, i) = p[i];
    const auto joint = state({r, s}, d);
    std::vector<double> pr(r.dim, 0.0), ps(s.dim, 0.0);
    for (int i = 0; i < r.dim; ++i)
      for (int k = 0; k < s.dim; ++k) pr[i] += p[i * s.dim + k], ps[k] += p[i * s.dim + k];

    const Matrix cond = conditional_from_joint(joint, {"R"}).op.matrix();
    const Matrix inv = bayes_invert(conditional_from_joint(joint, {"R"}), state({r}, reduce_to(joint.op, {"R"}).matrix()))
                           .op.matrix();
    const Matrix ms = reduce_to(joint.op, {"S"}).matrix();
    INFO("case " << t);
    for (int i = 0; i < r.dim; ++i)
      for (int k = 0; k < s.dim; ++k) {
        const int idx = i * s.dim + k;
        CHECK(std::abs(cond(idx, idx).real() - p[idx] / pr[i]) < 1e-12);
        CHECK(std::abs(inv(idx, idx).real() - p[idx] / ps[k]) < 1e-12);
      }
    for (int k = 0; k < s.dim; ++k) CHECK(std::abs(ms(k, k).real() - ps[k]) < 1e-12);
    CHECK(cond.isDiagonal(1e-15));
  }
}

TEST_CASE("compatibility matches constructive witnesses in both directions") {
  Gen g(107);
  int compatible = 0;
  for (int t = 0; t < 80; ++t) {
    const int d = g.integer(2, 4);
    const Region r = quantum("B", d);
    // Random supports with controlled overlap: shared directions plus private ones.
    const Matrix u = random_unitary(g, d);
    const int shared = g.integer(0, d - 1);
    const int k1 = g.integer(0, d - shared - 1);
    const int k2 = std::max(0, std::min(d - shared - k1, g.integer(0, d - shared)));
    if (shared + k1 == 0 || shared + k2 == 0) continue;
    Matrix b1(d, shared + k1), b2(d, shared + k2);
    b1 << u.leftCols(shared), u.middleCols(shared, k1);
    b2 << u.leftCols(shared), u.middleCols(shared + k1, k2);
    const auto s1 = state({r}, state_with_support(g, d, b1));
    const auto s2 = state({r}, state_with_support(g, d, b2));
    const bool expect = shared > 0;
    INFO("case " << t << " d=" << d << " shared=" << shared);
    const auto v = bfm_compatible(s1, s2);
    REQUIRE(v.compatible == expect);
    CHECK(v.intersection.rank == shared);
    if (expect) {
      ++compatible;
      const auto w = objective_witness(s1, s2);
      CHECK(dist(condition(w.joint, {{"X1", 0}}).op, s1.op.matrix()) < 1e-9);
      CHECK(dist(condition(w.joint, {{"X2", 0}}).op, s2.op.matrix()) < 1e-9);
      const auto sw = subjective_witness(s1, s2);
      const auto p1 = posterior_given_likelihood(s1, sw.likelihood, sw.outcome).op.matrix();
      const auto p2 = posterior_given_likelihood(s2, sw.likelihood, sw.outcome).op.matrix();
      CHECK(dist(p1, p2) < 1e-9);
    } else {
      CHECK_THROWS_AS(objective_witness(s1, s2), IncompatibleError);
      CHECK_THROWS_AS(subjective_witness(s1, s2), IncompatibleError);
      // No binary likelihood makes the two posteriors agree.
      for (int k = 0; k < 10; ++k) {
        const Matrix e = state_with_support(g, d, random_unitary(g, d)) * 0.9;
        const LikelihoodOperator l{classical("X", 2), r, {e, Matrix::Identity(d, d) - e}};
        for (int x = 0; x < 2; ++x) {
          const auto q1 = posterior_given_likelihood(s1, l, x).op.matrix();
          const auto q2 = posterior_given_likelihood(s2, l, x).op.matrix();
          CHECK(dist(q1, q2) > 1e-6);
        }
      }
    }
  }
  CHECK(compatible > 10);
}

TEST_CASE("conditionals stay inside the prior's support") {
  Gen g(108);
  for (int t = 0; t < 60; ++t) {
    const int d = g.integer(2, 4);
    const Region b = quantum("B", d);
    const Region x = classical("X", g.integer(2, 4));
    // Low-rank prior, random POVM on it: retrodiction branches.
    const Matrix rho = g.density(d, g.integer(1, d));
    std::vector<Matrix> raw;
    Matrix total = Matrix::Zero(d, d);
    for (int k = 0; k < x.dim; ++k) {
      const Matrix m = g.gaussian(d, d);
      raw.push_back(m * m.adjoint());
      total += raw.back();
    }
    const Matrix root = psd_sqrt(total).inverse();
    LikelihoodOperator l{x, b, {}};
    for (const auto& m : raw) l.effects.push_back(root * m * root);
    const Scenario s = retrodiction_scenario(state({b}, rho), l);
    INFO("case " << t);
    for (int v = 0; v < x.dim; ++v) {
      if (s.joint.probability(v) <= 1e-12) continue;
      CHECK(support_lemma_check(s.joint, {{"X", v}}));
      CHECK(support_leakage(s.joint, {{"X", v}}) <= 1e-9);
    }
  }
}

TEST_CASE("statistics: duplicates collapse to their representative") {
  Gen g(109);
  for (int t = 0; t < 60; ++t) {
    const int d = g.integer(2, 3);
    const int distinct = g.integer(1, 3);
    const int n = distinct + g.integer(1, 3);
    const Region x = classical("X", n);
    std::vector<Matrix> states;
    for (int k = 0; k < distinct; ++k) states.push_back(g.density(d));
    std::vector<int> which(n);
    for (int v = 0; v < n; ++v) which[v] = v < distinct ? v : g.integer(0, distinct - 1);
    const auto p = g.distribution(n);
    std::vector<Matrix> comps;
    for (int v = 0; v < n; ++v) comps.push_back(p[v] * states[which[v]]);
    const HybridState h({x}, {quantum("B", d)}, comps);
    const StatisticMap t1 = minimal_sufficient_statistic(h, "X");
    INFO("case " << t);
    CHECK(t1.cell_count() == distinct);
    for (int v = 0; v < n; ++v) {
      const int cell = t1.cell_of_value[v];
      CHECK(dist(condition_on_statistic(h, t1, cell).op, states[which[v]]) < 1e-9);
      const auto announced = state({quantum("B", d)}, states[which[v]]);
      CHECK(improve_shared_prior(h, announced).op.matrix() == states[which[v]]);
    }
  }
}

TEST_CASE("strong subadditivity") {
  Gen g(110);
  for (int t = 0; t < 100; ++t) {
    const Region a = quantum("A", 2), b = quantum("B", 2), c = quantum("C", g.integer(2, 3));
    const auto rho = state({a, b, c}, g.density(4 * c.dim, g.integer(1, 4 * c.dim)));
    INFO("case " << t);
    CHECK(conditional_mutual_information(rho, {"A"}, {"B"}, {"C"}) >= -1e-9);
  }
}

TEST_CASE("multiplicative pool is compatible with both inputs") {
  Gen g(111);
  int defined = 0;
  for (int t = 0; t < 80; ++t) {
    const int d = g.integer(2, 3);
    const Region r = quantum("B", d);
    const auto s1 = state({r}, g.density(d));
    const auto s2 = state({r}, g.density(d));
    const auto prior = state({r}, g.density(d));
    try {
      const auto pooled = pool_multiplicative(s1, s2, prior);
      ++defined;
      CHECK(bfm_compatible(pooled, s1).compatible);
      CHECK(bfm_compatible(pooled, s2).compatible);
    } catch (const ValidityRegimeError&) {
      CHECK(pool_asymmetry(s1, s2, prior) > 0.0);
    }
    // The Hermitian-commuting regime is always defined.
    const Matrix u = random_unitary(g, d);
    const auto mk = [&] {
      const auto p = g.distribution(d);
      Matrix m = Matrix::Zero(d, d);
      for (int i = 0; i < d; ++i) m(i, i) = p[i];
      return state({r}, u * m * u.adjoint());
    };
    const auto c1 = mk(), c2 = mk(), c0 = mk();
    const auto pooled = pool_multiplicative(c1, c2, c0);
    ++defined;
    CHECK(bfm_compatible(pooled, c1).compatible);
    CHECK(bfm_compatible(pooled, c2).compatible);
  }
  CHECK(defined >= 80);
}
