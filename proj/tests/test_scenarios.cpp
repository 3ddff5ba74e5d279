#include <doctest.h>

#include "qcond/errors.hpp"
#include "qcond/inference.hpp"
#include "qcond/scenarios.hpp"
#include "support.hpp"

using namespace qcond;
using namespace qt;

namespace {

const Region A = quantum("A", 2);
const Region B = quantum("B", 2);
const Region Z = classical("Z", 2);
const Region X = classical("X", 2);
const Region X1 = classical("X1", 2);
const Region X2 = classical("X2", 2);

const double kH = 1.0 / std::sqrt(2.0);

Matrix hadamard() {
  Matrix h(2, 2);
  h << kH, kH, kH, -kH;
  return h;
}

LikelihoodOperator z_basis(const Region& out, const Region& sys) {
  return LikelihoodOperator::projective(out, sys, Matrix::Identity(sys.dim, sys.dim));
}

LikelihoodOperator bsc(const Region& out, const Region& sys, double flip) {
  return LikelihoodOperator::classical_channel(out, sys, {{1 - flip, flip}, {flip, 1 - flip}});
}

double comp(const HybridState& h, const Assignment& a, int i, int k) {
  return h.component(h.flat_index(a))(i, k).real();
}

// Measure in Z, report through a binary symmetric channel, reprepare |x>.
Instrument noisy_z(const Region& in, const Region& out_label, const Region& out, double flip) {
  std::vector<std::vector<Matrix>> kraus(2);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) {
      Matrix k = Matrix::Zero(2, 2);
      k(x, a) = std::sqrt(x == a ? 1 - flip : flip);
      kraus[x].push_back(k);
    }
  return Instrument::from_kraus(in, out_label, out, kraus);
}

}  // namespace

TEST_CASE("preparation scenarios") {
  const EnsemblePreparation zs{Z, B, {diag({1, 0}), diag({0, 1})}};
  const Scenario s = preparation_scenario({Z, {0.5, 0.5}}, zs);
  CHECK(dist(s.joint.system_marginal().op, diag({0.5, 0.5})) < 1e-15);
  CHECK(dist(condition(s.joint, {{"Z", 1}}).op, diag({0, 1})) < 1e-15);
  CHECK(s.builder == "preparation");
  CHECK(s.digests.count("pz") == 1);
  CHECK(s.digests.count("prep") == 1);

  const Scenario point = preparation_scenario({Z, {0, 1}}, zs);
  CHECK(point.joint.component(0).norm() == 0.0);
  CHECK(dist(point.joint.component(1), diag({0, 1})) == 0.0);

  const Region z4 = classical("Z", 4);
  const Matrix plus = ket({kH, kH});
  const Matrix minus = ket({kH, -kH});
  const EnsemblePreparation bb84{z4, B, {diag({1, 0}), diag({0, 1}), plus, minus}};
  const Scenario b = preparation_scenario({z4, {0.25, 0.25, 0.25, 0.25}}, bb84);
  CHECK(dist(b.joint.system_marginal().op, diag({0.5, 0.5})) < 1e-15);
  CHECK_THROWS_AS(preparation_scenario({X, {0.5, 0.5}}, zs), RegionError);
}

TEST_CASE("remote measurement scenarios") {
  Gen g(51);
  const Matrix ra = g.density(2);
  const Matrix rb = g.density(2);
  const LikelihoodOperator l{X, A, {diag({0.8, 0.3}), diag({0.2, 0.7})}};
  const Scenario prod = remote_measurement_scenario(state({A, B}, kron(ra, rb)), l);
  for (int x = 0; x < 2; ++x) {
    const double px = (l.effects[x] * ra).trace().real();
    CHECK(dist(prod.joint.component(x), px * rb) < 1e-15);
  }

  const Scenario phi = remote_measurement_scenario(state({A, B}, phi_plus()), z_basis(X, A));
  CHECK(dist(condition(phi.joint, {{"X", 0}}).op, diag({1, 0})) < 1e-15);
  CHECK(dist(condition(phi.joint, {{"X", 1}}).op, diag({0, 1})) < 1e-15);

  const Matrix singlet = ket({0.0, kH, -kH, 0.0});
  const Scenario sing = remote_measurement_scenario(state({A, B}, singlet), z_basis(X, A));
  CHECK(dist(condition(sing.joint, {{"X", 0}}).op, diag({0, 1})) < 1e-15);

  // Measuring a causal joint is not a remote measurement.
  CHECK_THROWS_AS(remote_measurement_scenario(JointState{on({A, B}, kron(ra, rb)), CausalClass::causal({"A"})}, l),
                  PreconditionError);
}

TEST_CASE("retrodiction scenarios") {
  const Scenario eig = retrodiction_scenario(state({B}, diag({1, 0})), z_basis(X, B));
  CHECK(eig.joint.probability(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eig.joint.probability(1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dist(condition(eig.joint, {{"X", 0}}).op, diag({1, 0})) < 1e-15);

  // For a pure prior the retrodictive posterior is the prior itself.
  const Matrix plus = ket({kH, kH});
  const Scenario p = retrodiction_scenario(state({B}, plus), z_basis(X, B));
  for (int x = 0; x < 2; ++x) {
    CHECK(p.joint.probability(x) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(dist(condition(p.joint, {{"X", x}}).op, plus) < 1e-12);
  }
  // Mixed prior: rho^{1/2} E_x rho^{1/2} / p(x).
  Gen g(52);
  const Matrix rho = g.density(2);
  const Matrix r = psd_sqrt(rho);
  const Scenario m = retrodiction_scenario(state({B}, rho), z_basis(X, B));
  const Matrix e1 = diag({0, 1});
  CHECK(dist(condition(m.joint, {{"X", 1}}).op, r * e1 * r / (e1 * rho).trace()) < 1e-12);

  const LikelihoodOperator flat{X, B, {diag({0.5, 0.5}), diag({0.5, 0.5})}};
  const Scenario u = retrodiction_scenario(state({B}, rho), flat);
  CHECK(dist(condition(u.joint, {{"X", 0}}).op, rho) < 1e-12);
  CHECK(dist(condition(u.joint, {{"X", 1}}).op, rho) < 1e-12);
}

TEST_CASE("instrument scenarios") {
  const auto inst = Instrument::from_kraus(A, X, B, {{diag({1, 0})}, {diag({0, 1})}});
  const Scenario s = instrument_scenario(state({A}, ket({kH, kH})), inst);
  CHECK(dist(s.joint.component(0), 0.5 * diag({1, 0})) < 1e-15);
  CHECK(dist(s.joint.component(1), 0.5 * diag({0, 1})) < 1e-15);
}

TEST_CASE("postprocessing") {
  Gen g(53);
  const EnsemblePreparation prep{Z, B, {g.density(2), g.density(2)}};
  const Scenario base = preparation_scenario({Z, {0.3, 0.7}}, prep);

  const Scenario copy = postprocess_scenario(base, bsc(X2, Z, 0.0));
  for (int z = 0; z < 2; ++z) {
    CHECK(dist(copy.joint.component(copy.joint.flat_index(Assignment{{"Z", z}, {"X2", 1 - z}})), Matrix::Zero(2, 2)) ==
          0.0);
    CHECK(dist(condition(copy.joint, {{"X2", z}}).op, prep.states[z]) < 1e-14);
  }

  const LikelihoodOperator constant = LikelihoodOperator::classical_channel(X2, Z, {{0.4, 0.6}, {0.4, 0.6}});
  const Scenario c = postprocess_scenario(base, constant);
  const Matrix rho_b = base.joint.system_marginal().op.matrix();
  CHECK(dist(condition(c.joint, {{"X2", 0}}).op, rho_b) < 1e-14);
  CHECK(dist(condition(c.joint, {{"X2", 1}}).op, rho_b) < 1e-14);

  // Coarse-graining a three-valued X1: each cell's support contains its members'.
  const Region z3 = classical("Z", 3);
  const Region c3 = quantum("B", 3);
  const EnsemblePreparation p3{z3, c3, {g.density(3, 1), g.density(3, 1), g.density(3, 1)}};
  const Scenario b3 = preparation_scenario({z3, {0.2, 0.3, 0.5}}, p3);
  const auto merge = LikelihoodOperator::classical_channel(X2, z3, {{1, 0}, {1, 0}, {0, 1}});
  const Scenario m = postprocess_scenario(b3, merge);
  const auto cell = support(condition(m.joint, {{"X2", 0}}).op);
  CHECK(cell.rank == 2);
  for (int z = 0; z < 2; ++z) CHECK(leakage_outside(on({c3}, p3.states[z]), cell) < 1e-12);

  // The minimal statistic of X2 refines through X1: X2 carries nothing about B beyond Z.
  CHECK(conditional_mutual_information(m.joint.as_joint(), {"X2"}, {"B"}, {"Z"}) < 1e-9);

  const LikelihoodOperator quantum_proc = z_basis(X2, B);
  CHECK_THROWS_AS(postprocess_scenario(base, quantum_proc), RegionError);
}

TEST_CASE("two preparation scenarios") {
  Gen g(54);
  const EnsemblePreparation prep{Z, B, {g.density(2), g.density(2)}};
  const ClassicalDistribution pz{Z, {0.3, 0.7}};
  const Scenario id = two_preparation_scenario(pz, prep, bsc(X1, Z, 0.0), bsc(X2, Z, 0.0));
  for (int z = 0; z < 2; ++z) {
    CHECK(id.joint.probability(id.joint.flat_index(Assignment{{"X1", z}, {"X2", z}})) ==
          doctest::Approx(pz.probs[z]).epsilon(1e-15));
    CHECK(dist(condition(id.joint, {{"X1", z}, {"X2", z}}).op, prep.states[z]) < 1e-14);
  }

  const LikelihoodOperator constant = LikelihoodOperator::classical_channel(X2, Z, {{0.25, 0.75}, {0.25, 0.75}});
  const Scenario c = two_preparation_scenario(pz, prep, bsc(X1, Z, 0.0), constant);
  const Scenario single = preparation_scenario(pz, prep);
  for (int z = 0; z < 2; ++z)
    for (int x2 = 0; x2 < 2; ++x2) {
      const Matrix expect = single.joint.component(z) * (x2 == 0 ? 0.25 : 0.75);
      CHECK(dist(c.joint.component(c.joint.flat_index(Assignment{{"X1", z}, {"X2", x2}})), expect) < 1e-15);
    }

  // Dice: parity and "low" coarse-grainings of a fair die with distinct faces.
  const Region die = classical("Z", 6);
  const Region face = quantum("B", 6);
  std::vector<Matrix> faces;
  for (int z = 0; z < 6; ++z) {
    Matrix f = Matrix::Zero(6, 6);
    f(z, z) = 1.0;
    faces.push_back(f);
  }
  std::vector<std::vector<double>> parity(6, std::vector<double>(2, 0.0)), low(6, std::vector<double>(2, 0.0));
  for (int z = 0; z < 6; ++z) {
    parity[z][(z + 1) % 2] = 1.0;  // face z + 1 even -> 0
    low[z][z < 3 ? 1 : 0] = 1.0;   // face <= 3 -> 1
  }
  const Scenario dice = two_preparation_scenario({die, std::vector<double>(6, 1.0 / 6)}, {die, face, faces},
                                                 LikelihoodOperator::classical_channel(X1, die, parity),
                                                 LikelihoodOperator::classical_channel(X2, die, low));
  CHECK(dice.joint.value_count() == 4);
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2) {
      Matrix expect = Matrix::Zero(6, 6);
      for (int z = 0; z < 6; ++z)
        if (parity[z][x1] > 0 && low[z][x2] > 0) expect += faces[z] / 6.0;
      CHECK(dist(dice.joint.component(dice.joint.flat_index(Assignment{{"X1", x1}, {"X2", x2}})), expect) < 1e-15);
    }
}

TEST_CASE("two remote measurement scenarios") {
  const Region a1 = quantum("A1", 2);
  const Region a2 = quantum("A2", 2);
  Vector ghz = Vector::Zero(8);
  ghz(0) = ghz(7) = kH;
  const Scenario s = two_remote_scenario(state({a1, a2, B}, ghz * ghz.adjoint()), z_basis(X1, a1), z_basis(X2, a2));
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2) {
      const double p = s.joint.probability(s.joint.flat_index(Assignment{{"X1", x1}, {"X2", x2}}));
      CHECK(p == doctest::Approx(x1 == x2 ? 0.5 : 0.0).epsilon(1e-15));
      if (x1 == x2) CHECK(dist(condition(s.joint, {{"X1", x1}, {"X2", x2}}).op, x1 ? diag({0, 1}) : diag({1, 0})) < 1e-14);
    }

  Gen g(55);
  const Matrix r1 = g.density(2), r2 = g.density(2), rb = g.density(2);
  const Scenario prod = two_remote_scenario(state({a1, a2, B}, kron(kron(r1, r2), rb)), z_basis(X1, a1),
                                            z_basis(X2, a2));
  for (int i = 0; i < 4; ++i) CHECK(dist(prod.joint.conditional(i)->matrix(), rb) < 1e-12);

  // sum_i p_i rho1_i (x) rho2_i (x) |i><i|_B satisfies the pooling condition.
  Matrix ci = Matrix::Zero(8, 8);
  const std::vector<double> p = {0.4, 0.6};
  for (int i = 0; i < 2; ++i) {
    Matrix bi = Matrix::Zero(2, 2);
    bi(i, i) = 1.0;
    ci += p[i] * kron(kron(g.density(2), g.density(2)), bi);
  }
  const LikelihoodOperator l1{X1, a1, {diag({0.9, 0.2}), diag({0.1, 0.8})}};
  const LikelihoodOperator l2 = LikelihoodOperator::projective(X2, a2, hadamard());
  const Scenario cis = two_remote_scenario(state({a1, a2, B}, ci), l1, l2);
  CHECK(check_pool_condition(cis.joint, "X1", "X2", 1e-9));
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2) {
      const auto q1 = condition(cis.joint, {{"X1", x1}});
      const auto q2 = condition(cis.joint, {{"X2", x2}});
      const auto pooled = pool_multiplicative(q1, q2, cis.joint.system_marginal());
      CHECK(dist(pool_supra(cis.joint, {{"X1", x1}, {"X2", x2}}).op, pooled.op.matrix()) < 1e-9);
    }
}

TEST_CASE("two direct measurement scenarios") {
  Gen g(56);
  const Matrix rho = g.density(2);
  const Scenario id = two_direct_scenario(state({B}, rho), z_basis(Z, B), bsc(X1, Z, 0.0), bsc(X2, Z, 0.0));
  const Scenario single = retrodiction_scenario(state({B}, rho), z_basis(Z, B));
  for (int z = 0; z < 2; ++z) {
    CHECK(dist(id.joint.component(id.joint.flat_index(Assignment{{"X1", z}, {"X2", z}})), single.joint.component(z)) <
          1e-15);
  }

  const auto c1 = LikelihoodOperator::classical_channel(X1, Z, {{0.5, 0.5}, {0.5, 0.5}});
  const auto c2 = LikelihoodOperator::classical_channel(X2, Z, {{0.3, 0.7}, {0.3, 0.7}});
  const Scenario c = two_direct_scenario(state({B}, rho), z_basis(Z, B), c1, c2);
  for (int i = 0; i < 4; ++i) CHECK(dist(c.joint.conditional(i)->matrix(), rho) < 1e-12);

  // Qubit Z measurement, both reports through a BSC with flip 0.1.
  const Scenario n = two_direct_scenario(state({B}, rho), z_basis(Z, B), bsc(X1, Z, 0.1), bsc(X2, Z, 0.1));
  const Matrix r = psd_sqrt(rho);
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2) {
      Matrix expect = Matrix::Zero(2, 2);
      for (int z = 0; z < 2; ++z) {
        Matrix ez = Matrix::Zero(2, 2);
        ez(z, z) = 1.0;
        expect += (x1 == z ? 0.9 : 0.1) * (x2 == z ? 0.9 : 0.1) * r * ez * r;
      }
      CHECK(dist(n.joint.component(n.joint.flat_index(Assignment{{"X1", x1}, {"X2", x2}})), expect) < 1e-14);
    }
}

TEST_CASE("sequential measurement scenarios") {
  const Region a1 = quantum("A1", 2);
  const Region a2 = quantum("A2", 2);
  const Matrix rho = diag({0.35, 0.65});
  const Scenario s = sequential_measurement_scenario(state({a1}, rho), noisy_z(a1, X1, a2, 0.0),
                                                     noisy_z(a2, X2, B, 0.2));
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2) {
      const double p = rho(x1, x1).real() * (x1 == x2 ? 0.8 : 0.2);
      CHECK(comp(s.joint, {{"X1", x1}, {"X2", x2}}, x2, x2) == doctest::Approx(p).epsilon(1e-15));
      CHECK(comp(s.joint, {{"X1", x1}, {"X2", x2}}, 1 - x2, 1 - x2) == doctest::Approx(0.0).epsilon(1e-15));
    }

  // A one-outcome identity instrument first changes nothing.
  Gen g(57);
  const Matrix r = g.density(2);
  const Instrument pass = Instrument::from_kraus(a1, classical("X1", 1), a2, {{Matrix::Identity(2, 2)}});
  const Instrument second = noisy_z(a2, X2, B, 0.1);
  const Scenario seq = sequential_measurement_scenario(state({a1}, r), pass, second);
  const Scenario one = instrument_scenario(state({a2}, r), second);
  for (int x = 0; x < 2; ++x) {
    CHECK(dist(seq.joint.component(seq.joint.flat_index(Assignment{{"X1", 0}, {"X2", x}})), one.joint.component(x)) <
          1e-15);
  }
}

TEST_CASE("realizing an arbitrary joint") {
  const auto roundtrip = [](const HybridState& target) {
    const Realization r = realize_arbitrary_joint(target);
    const Scenario s = sequential_measurement_scenario(r.rho_a1, r.inst1, r.inst2);
    double err = 0.0;
    for (int i = 0; i < target.value_count(); ++i) err = std::max(err, norm(s.joint.component(i) - target.component(i)));
    return err;
  };
  const auto w = objective_witness(state({B}, diag({0.5, 0.5})), state({B}, diag({1, 0})));
  CHECK(roundtrip(w.joint) < 1e-9);

  const Region y = classical("Y", 2);
  std::vector<Matrix> t3;
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2) {
      Matrix c = Matrix::Zero(2, 2);
      c((x1 + x2) % 2, (x1 + x2) % 2) = 0.25;
      t3.push_back(c);
    }
  CHECK(roundtrip(HybridState({X1, X2}, {y}, t3)) == 0.0);

  Gen g(58);
  const Matrix rb = g.density(2);
  const auto p = g.distribution(4);
  std::vector<Matrix> prod;
  for (int i = 0; i < 4; ++i) prod.push_back(p[i] * rb);
  CHECK(roundtrip(HybridState({X1, X2}, {B}, prod)) < 1e-12);

  const Region x3 = classical("X2", 3);
  std::vector<Matrix> gen;
  const auto q = g.distribution(6);
  for (int i = 0; i < 6; ++i) gen.push_back(q[i] * g.density(3));
  CHECK(roundtrip(HybridState({X1, x3}, {quantum("B", 3)}, gen)) < 1e-9);
}

TEST_CASE("joint-state obstructions") {
  const Scenario prep = preparation_scenario({X1, {0.5, 0.5}}, {X1, B, {diag({1, 0}), diag({0, 1})}});
  const Scenario retro = retrodiction_scenario(state({B}, diag({0.5, 0.5})), LikelihoodOperator::projective(X2, B, hadamard()));
  const Obstruction obstruction = joint_state_obstruction(prep.joint, retro.joint);
  CHECK(obstruction.obstructed());
  CHECK(obstruction.pairs_checked == 4);
  CHECK(obstruction.pairs.size() == 4);
  CHECK(obstruction.x1 == "X1");
  CHECK(obstruction.x2 == "X2");

  const Matrix singlet = ket({0.0, kH, -kH, 0.0});
  const Scenario remote = remote_measurement_scenario(state({A, B}, singlet), z_basis(X1, A));
  CHECK(joint_state_obstruction(remote.joint, retro.joint).pairs.size() == 4);

  const Scenario noisy = postprocess_scenario(preparation_scenario({Z, {0.5, 0.5}}, {Z, B, {diag({1, 0}), diag({0, 1})}}),
                                              bsc(X2, Z, 0.1));
  const Obstruction control = joint_state_obstruction(prep.joint, noisy.joint.marginalize({"X2"}));
  CHECK_FALSE(control.obstructed());
  CHECK(control.pairs_checked == 4);

  const Scenario other = preparation_scenario({X1, {0.9, 0.1}}, {X1, B, {diag({1, 0}), diag({0, 1})}});
  CHECK_THROWS_AS(joint_state_obstruction(other.joint, retro.joint), PreconditionError);
}

TEST_CASE("provenance digests") {
  Gen g(59);
  const Matrix r = g.density(2);
  const Scenario a = retrodiction_scenario(state({B}, r), z_basis(X, B));
  const Scenario b = retrodiction_scenario(state({B}, r), z_basis(X, B));
  CHECK(a.digests == b.digests);
  CHECK(digest(a.joint) == digest(b.joint));
  const Scenario c = retrodiction_scenario(state({B}, g.density(2)), z_basis(X, B));
  CHECK(a.digests.at("rho") != c.digests.at("rho"));
  CHECK(a.digests.at("povm") == c.digests.at("povm"));
  CHECK(digest_hex(fnv1a("")) == "cbf29ce484222325");
  CHECK(digest_hex(fnv1a("a")) == "af63dc4c8601ec8c");
}
