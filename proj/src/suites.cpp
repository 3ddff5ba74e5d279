#include "qcond/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include "qcond/inference.hpp"
#include "qcond/random.hpp"
#include "qcond/scenarios.hpp"

namespace qcond {

namespace {

constexpr double kStateTol = 1e-9;
constexpr double kClassicalTol = 1e-12;

class Tracker {
 public:
  explicit Tracker(SuiteReport& r) : r_(r) {}

  void declare(const std::string& name, double threshold) { find(name, threshold); }
  void record(const std::string& name, double value, double threshold) {
    auto& m = find(name, threshold);
    if (!(value <= m.max_deviation)) m.max_deviation = std::isnan(value) ? INFINITY : value;
  }
  void count(const std::string& name, double inc = 1.0) {
    auto& m = find(name, 0.0);
    m.max_deviation += inc;
  }
  void error(const std::string& where, const std::exception& e) {
    count("unexpected errors");
    if (r_.notes.size() < 8) r_.notes.push_back(where + ": " + e.what());
  }
  void note(std::string s) { r_.notes.push_back(std::move(s)); }

 private:
  SuiteMetric& find(const std::string& name, double threshold) {
    for (auto& m : r_.metrics)
      if (m.name == name) return m;
    r_.metrics.push_back(SuiteMetric{name, 0.0, threshold});
    return r_.metrics.back();
  }
  SuiteReport& r_;
};

int pick(const std::vector<int>& dims, RandomSource& rng) {
  return dims[static_cast<std::size_t>(rng.integer(0, static_cast<int>(dims.size()) - 1))];
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix density_from(const Matrix& g) {
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

int numerical_rank(const Matrix& m) {
  if (m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-8 * s(0)) ++r;
  return r;
}

// Independent square root for posterior oracles. Inputs are exactly low
// rank, so eigenvalues at roundoff level are zeroed before the root.
Matrix oracle_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  const double floor = 1e-13 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  RealVector v = es.eigenvalues().unaryExpr([&](double x) { return x > floor ? std::sqrt(x) : 0.0; });
  return es.eigenvectors() * v.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix diag_of(const std::vector<double>& p) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) m(i, i) = p[i];
  return m;
}

// A random pair of states with known support spans.
struct StatePair {
  Matrix g1;
  Matrix g2;
  JointState s1;
  JointState s2;
  bool expect_compatible = false;
};

StatePair draw_pair(RandomSource& rng, const std::vector<int>& dims) {
  const int d = pick(dims, rng);
  const Region b = quantum("B", d);
  StatePair p;
  p.g1 = ginibre(d, rng.integer(1, d), rng);
  p.g2 = ginibre(d, rng.integer(1, d), rng);
  Matrix both(d, p.g1.cols() + p.g2.cols());
  both << p.g1, p.g2;
  p.expect_compatible = p.g1.cols() + p.g2.cols() - numerical_rank(both) > 0;
  p.s1 = JointState{LabeledOperator({b}, density_from(p.g1)), CausalClass::acausal()};
  p.s2 = JointState{LabeledOperator({b}, density_from(p.g2)), CausalClass::acausal()};
  return p;
}

void theorem2(const SuiteOptions& o, SuiteReport& r) {
  Tracker t(r);
  t.declare("verdict mismatches", 0);
  t.declare("witness failures", 0);
  t.declare("conditional reproduction error", kStateTol);
  t.declare("unexpected errors", 0);
  int compatible = 0;
  const RandomSource base(o.seed);
  for (int i = 0; i < r.trials; ++i) {
    RandomSource rng = base.derive(i);
    const StatePair p = draw_pair(rng, o.dims);
    try {
      const bool verdict = bfm_compatible(p.s1, p.s2).compatible;
      if (verdict != p.expect_compatible) t.count("verdict mismatches");
      if (!p.expect_compatible) {
        try {
          objective_witness(p.s1, p.s2);
          t.count("witness failures");
        } catch (const IncompatibleError&) {
        }
        continue;
      }
      ++compatible;
      const ObjectiveWitness w = objective_witness(p.s1, p.s2);
      w.joint.check();
      if (!(w.p1 > 0.0 && w.p1 <= 1.0 && w.p2 > 0.0 && w.p2 <= 1.0)) t.count("witness failures");
      // Conditionals by explicit marginal sums over the other bit.
      const auto comp = [&](int a, int b) { return w.joint.component(w.joint.flat_index({{"X1", a}, {"X2", b}})); };
      const Matrix m1 = comp(0, 0) + comp(0, 1);
      const Matrix m2 = comp(0, 0) + comp(1, 0);
      const double e1 = spectral_norm(m1 / m1.trace().real() - p.s1.op.matrix());
      const double e2 = spectral_norm(m2 / m2.trace().real() - p.s2.op.matrix());
      t.record("conditional reproduction error", std::max(e1, e2), kStateTol);
    } catch (const std::exception& e) {
      t.error("trial " + std::to_string(i), e);
    }
  }
  t.note(std::to_string(compatible) + " of " + std::to_string(r.trials) + " pairs compatible");
}

void theorem4(const SuiteOptions& o, SuiteReport& r) {
  Tracker t(r);
  t.declare("verdict mismatches", 0);
  t.declare("witness failures", 0);
  t.declare("posterior gap", kStateTol);
  t.declare("agreements on orthogonal pairs", 0);
  t.declare("unexpected errors", 0);
  const RandomSource base(o.seed);
  int compatible = 0;
  for (int i = 0; i < r.trials; ++i) {
    RandomSource rng = base.derive(i);
    const StatePair p = draw_pair(rng, o.dims);
    try {
      if (bfm_compatible(p.s1, p.s2).compatible != p.expect_compatible) t.count("verdict mismatches");
      if (!p.expect_compatible) {
        try {
          subjective_witness(p.s1, p.s2);
          t.count("witness failures");
        } catch (const IncompatibleError&) {
        }
        continue;
      }
      ++compatible;
      const SubjectiveWitness w = subjective_witness(p.s1, p.s2);
      const Matrix& e = w.likelihood.effects.at(w.outcome);
      Matrix post[2];
      const Matrix* states[2] = {&p.s1.op.matrix(), &p.s2.op.matrix()};
      for (int j = 0; j < 2; ++j) {
        const Matrix root = oracle_sqrt(*states[j]);
        post[j] = root * e * root;
        const double pr = post[j].trace().real();
        if (!(pr > 0.0)) t.count("witness failures");
        post[j] /= pr;
      }
      t.record("posterior gap", spectral_norm(post[0] - post[1]), kStateTol);
    } catch (const std::exception& e) {
      t.error("trial " + std::to_string(i), e);
    }
  }
  t.note(std::to_string(compatible) + " of " + std::to_string(r.trials) + " pairs compatible");

  const int orthogonal = std::max(1, r.trials / 4);
  const RandomSource obase(o.seed ^ 0x5bd1e995ULL);
  for (int i = 0; i < orthogonal; ++i) {
    RandomSource rng = obase.derive(i);
    const int d = std::max(2, pick(o.dims, rng));
    const Region b = quantum("B", d);
    const Matrix u = random_unitary(d, rng);
    const int k = rng.integer(1, d - 1);
    auto block_state = [&](int from, int count) {
      const auto w = random_distribution(count, rng);
      Matrix m = Matrix::Zero(d, d);
      for (int c = 0; c < count; ++c) m += w[c] * u.col(from + c) * u.col(from + c).adjoint();
      return m;
    };
    const Matrix s1 = block_state(0, k);
    const Matrix s2 = block_state(k, d - k);
    try {
      const JointState j1{LabeledOperator({b}, s1), CausalClass::acausal()};
      const JointState j2{LabeledOperator({b}, s2), CausalClass::acausal()};
      if (bfm_compatible(j1, j2).compatible) t.count("verdict mismatches");
      for (int l = 0; l < 20; ++l) {
        const LikelihoodOperator lk = random_povm(classical("X", 2), b, rng);
        for (int x = 0; x < 2; ++x) {
          const Matrix& e = lk.effects[x];
          const double p1 = (e * s1).trace().real();
          const double p2 = (e * s2).trace().real();
          if (!(p1 > 1e-12 && p2 > 1e-12)) continue;
          const Matrix r1 = oracle_sqrt(s1);
          const Matrix r2 = oracle_sqrt(s2);
          const double gap = spectral_norm(r1 * e * r1 / p1 - r2 * e * r2 / p2);
          if (gap <= kStateTol) t.count("agreements on orthogonal pairs");
        }
      }
    } catch (const std::exception& e) {
      t.error("orthogonal pair " + std::to_string(i), e);
    }
  }
  t.note(std::to_string(orthogonal) + " orthogonal pairs x 20 likelihoods");
}

// One random scenario from builder number `which` (0..8).
Scenario random_scenario(int which, RandomSource& rng, const std::vector<int>& dims) {
  const auto dim = [&] { return pick(dims, rng); };
  const auto rank_for = [&](int d) { return rng.integer(1, d); };
  const auto alphabet = [&] { return rng.integer(2, 3); };
  const auto ensemble = [&](const Region& z, const Region& b) {
    EnsemblePreparation e{z, b, {}};
    for (int i = 0; i < z.dim; ++i) e.states.push_back(random_density_matrix(b.dim, rng, rank_for(b.dim)));
    return e;
  };
  const auto stochastic = [&](const Region& x, const Region& z) {
    return LikelihoodOperator::classical_channel(x, z, random_stochastic(z.dim, x.dim, rng));
  };
  switch (which) {
    case 0: {
      const Region z = classical("Z", alphabet());
      return preparation_scenario({z, random_distribution(z.dim, rng, true)}, ensemble(z, quantum("B", dim())));
    }
    case 1: {
      const Region a = quantum("A", dim());
      const Region b = quantum("B", dim());
      const JointState rho = random_density({a, b}, rng, rank_for(a.dim * b.dim));
      return remote_measurement_scenario(rho, random_povm(classical("X", alphabet()), a, rng));
    }
    case 2: {
      const Region b = quantum("B", dim());
      return retrodiction_scenario(random_density({b}, rng, rank_for(b.dim)),
                                   random_povm(classical("X", alphabet()), b, rng));
    }
    case 3: {
      const Region a = quantum("A", dim());
      const Region b = quantum("B", dim());
      return instrument_scenario(random_density({a}, rng, rank_for(a.dim)),
                                 random_instrument(a, classical("X", alphabet()), b, rng));
    }
    case 4: {
      const Region z = classical("X1", alphabet());
      const Scenario base =
          preparation_scenario({z, random_distribution(z.dim, rng, true)}, ensemble(z, quantum("B", dim())));
      return postprocess_scenario(base, stochastic(classical("X2", alphabet()), z));
    }
    case 5: {
      const Region z = classical("Z", rng.integer(2, 4));
      return two_preparation_scenario({z, random_distribution(z.dim, rng, true)}, ensemble(z, quantum("B", dim())),
                                      stochastic(classical("X1", alphabet()), z),
                                      stochastic(classical("X2", alphabet()), z));
    }
    case 6: {
      const Region a1 = quantum("A1", 2);
      const Region a2 = quantum("A2", 2);
      const Region b = quantum("B", dim());
      const JointState rho = random_density({a1, a2, b}, rng, rank_for(4 * b.dim));
      return two_remote_scenario(rho, random_povm(classical("X1", alphabet()), a1, rng),
                                 random_povm(classical("X2", alphabet()), a2, rng));
    }
    case 7: {
      const Region b = quantum("B", dim());
      const Region z = classical("Z", alphabet());
      return two_direct_scenario(random_density({b}, rng, rank_for(b.dim)), random_povm(z, b, rng),
                                 stochastic(classical("X1", alphabet()), z),
                                 stochastic(classical("X2", alphabet()), z));
    }
    default: {
      const Region a1 = quantum("A1", dim());
      const Region a2 = quantum("A2", dim());
      const Region b = quantum("B", dim());
      return sequential_measurement_scenario(random_density({a1}, rng, rank_for(a1.dim)),
                                             random_instrument(a1, classical("X1", alphabet()), a2, rng),
                                             random_instrument(a2, classical("X2", alphabet()), b, rng));
    }
  }
}

void lemma2(const SuiteOptions& o, SuiteReport& r) {
  Tracker t(r);
  t.declare("support leakage", kStateTol);
  t.declare("invalid scenarios", 0);
  t.declare("unexpected errors", 0);
  const RandomSource base(o.seed);
  std::map<std::string, int> per_builder;
  int branches = 0;
  for (int i = 0; i < r.trials; ++i) {
    RandomSource rng = base.derive(i);
    try {
      const Scenario s = random_scenario(i % 9, rng, o.dims);
      ++per_builder[s.builder];
      const HybridState& h = s.joint;
      if (!validate(h.as_joint()).passed()) t.count("invalid scenarios");
      const Matrix rho_b = h.system_marginal().op.matrix();
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho_b + rho_b.adjoint()));
      const double cut = 1e-10 * es.eigenvalues().maxCoeff();
      Matrix outside = Matrix::Zero(rho_b.rows(), rho_b.cols());
      for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
        if (es.eigenvalues()(k) <= cut) outside += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
      std::vector<Assignment> assignments;
      for (int f = 0; f < h.value_count(); ++f) assignments.push_back(h.assignment_of(f));
      for (const auto& c : h.classical())
        for (int v = 0; v < c.dim; ++v) assignments.push_back({{c.id, v}});
      for (const auto& a : assignments) {
        JointState cond;
        try {
          cond = condition(h, a);
        } catch (const UndefinedBranch&) {
          continue;
        }
        ++branches;
        t.record("support leakage", spectral_norm(outside * cond.op.matrix() * outside), kStateTol);
        if (!support_lemma_check(h, a)) t.count("invalid scenarios");
      }
    } catch (const std::exception& e) {
      t.error("scenario " + std::to_string(i), e);
    }
  }
  std::string cover = std::to_string(branches) + " branches; builders:";
  for (const auto& [name, n] : per_builder) cover += " " + name + "=" + std::to_string(n);
  t.note(cover);
}

void lemma4(const SuiteOptions& o, SuiteReport& r) {
  Tracker t(r);
  t.declare("partition mismatches", 0);
  t.declare("cell state error", kStateTol);
  t.declare("shared-prior result not verbatim", 0);
  t.declare("unexpected errors", 0);
  const RandomSource base(o.seed);
  for (int i = 0; i < r.trials; ++i) {
    RandomSource rng = base.derive(i);
    const int d = pick(o.dims, rng);
    const int n = rng.integer(3, 5);
    const int k = rng.integer(1, n - 1);
    std::vector<Matrix> states;
    for (int s = 0; s < k; ++s) states.push_back(random_density_matrix(d, rng, rng.integer(1, d)));
    std::vector<int> label(n);
    for (int x = 0; x < n; ++x) label[x] = x < k ? x : rng.integer(0, k - 1);
    std::shuffle(label.begin(), label.end(), rng.engine());
    const auto p = random_distribution(n, rng, true);
    std::vector<Matrix> comps;
    for (int x = 0; x < n; ++x) comps.push_back(p[x] * states[label[x]]);
    const Region xr = classical("X", n);
    try {
      const HybridState h({xr}, {quantum("B", d)}, comps);
      const StatisticMap stat = minimal_sufficient_statistic(h, "X");
      // Oracle partition: values with P > 0 grouped by engineered label.
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
          const bool live = p[x] > 1e-10 && p[y] > 1e-10;
          if (!live) {
            if ((p[x] <= 1e-10 && stat.cell_of_value[x] != StatisticMap::kUndefined)) t.count("partition mismatches");
            continue;
          }
          if ((label[x] == label[y]) != (stat.cell_of_value[x] == stat.cell_of_value[y])) {
            t.count("partition mismatches");
          }
        }
      for (int c = 0; c < stat.cell_count(); ++c) {
        Matrix mix = Matrix::Zero(d, d);
        double mass = 0.0;
        for (int x = 0; x < n; ++x)
          if (stat.cell_of_value[x] == c) {
            mix += p[x] * states[label[x]];
            mass += p[x];
          }
        const JointState got = condition_on_statistic(h, stat, c);
        const double err = std::max(spectral_norm(got.op.matrix() - mix / mass),
                                    spectral_norm(got.op.matrix() - states[label[stat.cells[c].front()]]));
        t.record("cell state error", err, kStateTol);
      }
      for (int x = 0; x < n; ++x) {
        if (!(p[x] > 1e-10)) continue;
        const JointState announced{LabeledOperator({quantum("B", d)}, comps[x] / p[x]), CausalClass::acausal()};
        const JointState back = improve_shared_prior(h, announced);
        if (back.op.matrix() != announced.op.matrix()) t.count("shared-prior result not verbatim");
      }
    } catch (const std::exception& e) {
      t.error("hybrid " + std::to_string(i), e);
    }
  }
}

// Stochastic matrix rows y; with `split`, one outcome is divided into two
// proportional columns, so those two values share a statistic cell.
std::vector<std::vector<double>> likelihood_with_split(int ny, int nx, bool split, RandomSource& rng) {
  auto m = random_stochastic(ny, nx, rng);
  if (!split) return m;
  const double alpha = 0.2 + 0.6 * rng.uniform();
  for (auto& row : m) {
    const double v = row.back();
    row.back() = alpha * v;
    row.push_back((1.0 - alpha) * v);
  }
  return m;
}

void theorem7(const SuiteOptions& o, SuiteReport& r) {
  Tracker t(r);
  t.declare("supra pool vs c Q1 Q2 / P", kClassicalTol);
  t.declare("multiplicative pool vs c Q1 Q2 / P", kClassicalTol);
  t.declare("pool condition failures", 0);
  t.declare("unexpected errors", 0);
  const RandomSource base(o.seed);
  int evaluated = 0;
  for (int i = 0; i < r.trials; ++i) {
    RandomSource rng = base.derive(i);
    const int ny = pick(o.dims, rng);
    const auto py = random_distribution(ny, rng);
    const auto l1 = likelihood_with_split(ny, rng.integer(2, 3), rng.uniform() < 0.5, rng);
    const auto l2 = likelihood_with_split(ny, rng.integer(2, 3), rng.uniform() < 0.5, rng);
    const int n1 = static_cast<int>(l1[0].size());
    const int n2 = static_cast<int>(l2[0].size());
    const Region yr = classical("Y", ny);
    std::vector<Matrix> comps;
    for (int a = 0; a < n1; ++a)
      for (int b = 0; b < n2; ++b) {
        std::vector<double> v(ny);
        for (int y = 0; y < ny; ++y) v[y] = py[y] * l1[y][a] * l2[y][b];
        comps.push_back(diag_of(v));
      }
    try {
      const HybridState h({classical("X1", n1), classical("X2", n2)}, {yr}, comps);
      if (!check_pool_condition(h, "X1", "X2", kStateTol)) t.count("pool condition failures");
      const JointState prior{LabeledOperator({yr}, diag_of(py)), CausalClass::acausal()};
      for (int a = 0; a < n1; ++a)
        for (int b = 0; b < n2; ++b) {
          std::vector<double> q1(ny), q2(ny), pooled(ny);
          double z1 = 0.0, z2 = 0.0, zp = 0.0;
          for (int y = 0; y < ny; ++y) {
            q1[y] = py[y] * l1[y][a];
            q2[y] = py[y] * l2[y][b];
            z1 += q1[y];
            z2 += q2[y];
          }
          if (!(z1 > 0.0 && z2 > 0.0)) continue;
          for (int y = 0; y < ny; ++y) {
            q1[y] /= z1;
            q2[y] /= z2;
            pooled[y] = q1[y] * q2[y] / py[y];
            zp += pooled[y];
          }
          for (double& v : pooled) v /= zp;
          const Matrix expect = diag_of(pooled);
          const JointState supra = pool_supra(h, {{"X1", a}, {"X2", b}});
          t.record("supra pool vs c Q1 Q2 / P", (supra.op.matrix() - expect).cwiseAbs().maxCoeff(), kClassicalTol);
          const JointState s1{LabeledOperator({yr}, diag_of(q1)), CausalClass::acausal()};
          const JointState s2{LabeledOperator({yr}, diag_of(q2)), CausalClass::acausal()};
          const JointState mult = pool_multiplicative(s1, s2, prior);
          t.record("multiplicative pool vs c Q1 Q2 / P", (mult.op.matrix() - expect).cwiseAbs().maxCoeff(),
                   kClassicalTol);
          ++evaluated;
        }
    } catch (const std::exception& e) {
      t.error("scenario " + std::to_string(i), e);
    }
  }
  t.note(std::to_string(evaluated) + " announced pairs evaluated");
}

void theorem8(const SuiteOptions& o, SuiteReport& r) {
  Tracker t(r);
  t.declare("supra pool vs multiplicative pool", kStateTol);
  t.declare("supra pool vs full-data posterior", kStateTol);
  t.declare("pool condition failures", 0);
  t.declare("commutator of statistic likelihoods", kStateTol);
  t.declare("unexpected errors", 0);
  const RandomSource base(o.seed);
  int evaluated = 0;
  for (int i = 0; i < r.trials; ++i) {
    RandomSource rng = base.derive(i);
    const Region a1 = quantum("A1", pick(o.dims, rng));
    const Region a2 = quantum("A2", pick(o.dims, rng));
    const Region b = quantum("B", pick(o.dims, rng));
    const auto p = random_distribution(b.dim, rng);
    const Matrix u = random_unitary(b.dim, rng);
    std::vector<Matrix> r1, r2;
    Matrix rho = Matrix::Zero(a1.dim * a2.dim * b.dim, a1.dim * a2.dim * b.dim);
    for (int k = 0; k < b.dim; ++k) {
      r1.push_back(random_density_matrix(a1.dim, rng, rng.integer(1, a1.dim)));
      r2.push_back(random_density_matrix(a2.dim, rng, rng.integer(1, a2.dim)));
      const Matrix proj = u.col(k) * u.col(k).adjoint();
      rho += p[k] * kron(kron(r1[k], r2[k]), proj);
    }
    const auto l1 = random_povm(classical("X1", rng.integer(2, 3)), a1, rng);
    const auto l2 = random_povm(classical("X2", rng.integer(2, 3)), a2, rng);
    try {
      const Scenario s =
          two_remote_scenario(JointState{LabeledOperator({a1, a2, b}, rho), CausalClass::acausal()}, l1, l2);
      const HybridState& h = s.joint;
      const PoolConditionReport rep = pool_condition_report(h, "X1", "X2", kStateTol);
      if (!rep.holds) t.count("pool condition failures");
      t.record("commutator of statistic likelihoods", rep.commutator, kStateTol);
      const JointState prior = h.system_marginal();
      for (int x1 = 0; x1 < l1.outcome.dim; ++x1)
        for (int x2 = 0; x2 < l2.outcome.dim; ++x2) {
          // Oracle in the eigenbasis of B: P(k|x1,x2) ~ p_k P(x1|k) P(x2|k).
          std::vector<double> post(b.dim);
          double z = 0.0;
          for (int k = 0; k < b.dim; ++k) {
            post[k] = p[k] * (l1.effects[x1] * r1[k]).trace().real() * (l2.effects[x2] * r2[k]).trace().real();
            z += post[k];
          }
          if (!(z > 1e-12)) continue;
          Matrix expect = Matrix::Zero(b.dim, b.dim);
          for (int k = 0; k < b.dim; ++k) expect += post[k] / z * u.col(k) * u.col(k).adjoint();
          const JointState supra = pool_supra(h, {{"X1", x1}, {"X2", x2}});
          const JointState s1 = condition(h, {{"X1", x1}});
          const JointState s2 = condition(h, {{"X2", x2}});
          const JointState mult = pool_multiplicative(s1, s2, prior);
          t.record("supra pool vs multiplicative pool", distance(supra.op, mult.op), kStateTol);
          t.record("supra pool vs full-data posterior", spectral_norm(supra.op.matrix() - expect), kStateTol);
          ++evaluated;
        }
    } catch (const std::exception& e) {
      t.error("scenario " + std::to_string(i), e);
    }
  }
  t.note(std::to_string(evaluated) + " announced pairs evaluated");
}

void footnote(const SuiteOptions& o, SuiteReport& r) {
  Tracker t(r);
  t.declare("round trip error (binary)", kStateTol);
  t.declare("round trip error (alphabets up to 3)", kStateTol);
  t.declare("unexpected errors", 0);
  const RandomSource base(o.seed);
  const int extra = std::max(1, r.trials / 2);
  for (int i = 0; i < r.trials + extra; ++i) {
    RandomSource rng = base.derive(i);
    const bool binary = i < r.trials;
    const int n1 = binary ? 2 : rng.integer(2, 3);
    const int n2 = binary ? 2 : rng.integer(2, 3);
    const int d = pick(o.dims, rng);
    const auto p = random_distribution(n1 * n2, rng, true);
    std::vector<Matrix> comps;
    for (int j = 0; j < n1 * n2; ++j) comps.push_back(p[j] * random_density_matrix(d, rng, rng.integer(1, d)));
    try {
      const HybridState target({classical("X1", n1), classical("X2", n2)}, {quantum("B", d)}, comps);
      const Realization real = realize_arbitrary_joint(target);
      const Scenario s = sequential_measurement_scenario(real.rho_a1, real.inst1, real.inst2);
      double err = 0.0;
      for (int j = 0; j < target.value_count(); ++j) {
        err = std::max(err, spectral_norm(s.joint.component(j) - target.component(j)));
      }
      t.record(binary ? "round trip error (binary)" : "round trip error (alphabets up to 3)", err, kStateTol);
    } catch (const std::exception& e) {
      t.error("target " + std::to_string(i), e);
    }
  }
}

void ssa(const SuiteOptions& o, SuiteReport& r) {
  Tracker t(r);
  t.declare("negative CMI", kStateTol);
  t.declare("unexpected errors", 0);
  const RandomSource base(o.seed);
  double min_cmi = INFINITY;
  for (int i = 0; i < r.trials; ++i) {
    RandomSource rng = base.derive(i);
    const int dc = o.dims.empty() ? 2 + (i % 2) : o.dims[static_cast<std::size_t>(i) % o.dims.size()];
    const std::vector<Region> f{quantum("A", 2), quantum("B", 2), quantum("C", dc)};
    const int d = 4 * dc;
    try {
      const JointState rho = random_density(f, rng, rng.integer(1, d));
      const double cmi = conditional_mutual_information(rho, {"A"}, {"B"}, {"C"});
      min_cmi = std::min(min_cmi, cmi);
      t.record("negative CMI", std::max(0.0, -cmi), kStateTol);
    } catch (const std::exception& e) {
      t.error("state " + std::to_string(i), e);
    }
  }
  t.note("smallest CMI observed: " + std::to_string(min_cmi));
}

void ci(const SuiteOptions& o, SuiteReport& r) {
  Tracker t(r);
  t.declare("CMI of Markov states", kStateTol);
  t.declare("conditional-form gap on Markov states", kStateTol);
  t.declare("product-form gap on Markov states", kStateTol);
  t.declare("CI verdict on entangled AB", 0);
  t.declare("unexpected errors", 0);
  const RandomSource base(o.seed);
  for (int i = 0; i < r.trials; ++i) {
    RandomSource rng = base.derive(i);
    const Region a = quantum("A", pick(o.dims, rng));
    const Region b = quantum("B", pick(o.dims, rng));
    const Region c = classical("C", pick(o.dims, rng));
    const auto p = random_distribution(c.dim, rng);
    Matrix m = Matrix::Zero(a.dim * b.dim * c.dim, a.dim * b.dim * c.dim);
    for (int k = 0; k < c.dim; ++k) {
      Matrix ck = Matrix::Zero(c.dim, c.dim);
      ck(k, k) = p[k];
      const Matrix ab = kron(random_density_matrix(a.dim, rng), random_density_matrix(b.dim, rng));
      m += kron(ab, ck);
    }
    try {
      const JointState rho{LabeledOperator({a, b, c}, m), CausalClass::acausal()};
      const CIReport rep = conditional_independence_report(rho, {"A"}, {"B"}, {"C"});
      t.record("CMI of Markov states", std::abs(rep.cmi), kStateTol);
      t.record("conditional-form gap on Markov states", std::max(rep.conditional_form_a, rep.conditional_form_b),
               kStateTol);
      t.record("product-form gap on Markov states", rep.product_form, kStateTol);
      // Entangled AB with an arbitrary C is never conditionally independent.
      const Region q = quantum("A", 2);
      const Region s = quantum("B", 2);
      Vector phi = Vector::Zero(4);
      phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
      const Matrix bell = phi * phi.adjoint();
      const JointState ent{
          tensor(LabeledOperator({q, s}, bell), LabeledOperator({c}, random_density_matrix(c.dim, rng))),
          CausalClass::acausal()};
      if (is_conditionally_independent(ent, {"A"}, {"B"}, {"C"}, kStateTol)) t.count("CI verdict on entangled AB");
    } catch (const std::exception& e) {
      t.error("state " + std::to_string(i), e);
    }
  }
}

void classical_suite(const SuiteOptions& o, SuiteReport& r) {
  Tracker t(r);
  t.declare("marginalization", kClassicalTol);
  t.declare("conditional P(S|R)", kClassicalTol);
  t.declare("product rule", kClassicalTol);
  t.declare("Bayes inversion P(R|S)", kClassicalTol);
  t.declare("belief propagation", kClassicalTol);
  t.declare("hybrid conditioning", kClassicalTol);
  t.declare("Born rule", kClassicalTol);
  t.declare("Shannon entropy", kClassicalTol);
  t.declare("unexpected errors", 0);
  const RandomSource base(o.seed);
  for (int i = 0; i < r.trials; ++i) {
    RandomSource rng = base.derive(i);
    const int nr = pick(o.dims, rng);
    const int ns = pick(o.dims, rng);
    const auto flat = random_distribution(nr * ns, rng, rng.uniform() < 0.3);
    const Region rr = classical("R", nr);
    const Region sr = classical("S", ns);
    std::vector<double> pr(nr, 0.0), ps(ns, 0.0);
    for (int a = 0; a < nr; ++a)
      for (int s = 0; s < ns; ++s) {
        pr[a] += flat[a * ns + s];
        ps[s] += flat[a * ns + s];
      }
    try {
      const JointState joint{LabeledOperator({rr, sr}, diag_of(flat)), CausalClass::hybrid()};
      const JointState mr{partial_trace(joint.op, {"S"}), CausalClass::hybrid()};
      t.record("marginalization", (mr.op.matrix() - diag_of(pr)).cwiseAbs().maxCoeff(), kClassicalTol);
      t.record("marginalization", (partial_trace(joint.op, {"R"}).matrix() - diag_of(ps)).cwiseAbs().maxCoeff(),
               kClassicalTol);

      const ConditionalState c = conditional_from_joint(joint, {"R"});
      std::vector<double> cond(nr * ns, 0.0), inv(nr * ns, 0.0);
      for (int a = 0; a < nr; ++a)
        for (int s = 0; s < ns; ++s) {
          if (pr[a] > 0.0) cond[a * ns + s] = flat[a * ns + s] / pr[a];
          if (ps[s] > 0.0) inv[a * ns + s] = flat[a * ns + s] / ps[s];
        }
      t.record("conditional P(S|R)", (c.op.matrix() - diag_of(cond)).cwiseAbs().maxCoeff(), kClassicalTol);
      t.record("product rule", (joint_from_conditional(c, mr).op.matrix() - joint.op.matrix()).cwiseAbs().maxCoeff(),
               kClassicalTol);
      const ConditionalState back = bayes_invert(c, mr);
      t.record("Bayes inversion P(R|S)", (back.op.matrix() - diag_of(inv)).cwiseAbs().maxCoeff(), kClassicalTol);
      t.record("belief propagation", (belief_propagate(c, mr).op.matrix() - diag_of(ps)).cwiseAbs().maxCoeff(),
               kClassicalTol);

      const HybridState h = HybridState::disassemble(joint.op, {"R"});
      for (int a = 0; a < nr; ++a) {
        if (!(pr[a] > 1e-10)) continue;
        std::vector<double> row(cond.begin() + a * ns, cond.begin() + (a + 1) * ns);
        t.record("hybrid conditioning", (condition(h, {{"R", a}}).op.matrix() - diag_of(row)).cwiseAbs().maxCoeff(),
                 kClassicalTol);
      }
      // P(R|S) as a likelihood on S applied to P(S) gives P(R).
      std::vector<std::vector<double>> rows(ns, std::vector<double>(nr, 0.0));
      for (int s = 0; s < ns; ++s)
        for (int a = 0; a < nr; ++a) rows[s][a] = ps[s] > 0.0 ? inv[a * ns + s] : 1.0 / nr;
      const auto l = LikelihoodOperator::classical_channel(rr, sr, rows);
      const auto born = born_rule(l, JointState{LabeledOperator({sr}, diag_of(ps)), CausalClass::hybrid()});
      for (int a = 0; a < nr; ++a) t.record("Born rule", std::abs(born.probs[a] - pr[a]), kClassicalTol);

      double shannon = 0.0;
      for (double v : flat)
        if (v > 0.0) shannon -= v * std::log2(v);
      t.record("Shannon entropy", std::abs(von_neumann_entropy(joint.op) - shannon), kClassicalTol);
    } catch (const std::exception& e) {
      t.error("distribution " + std::to_string(i), e);
    }
  }
}

struct SuiteDef {
  const char* name;
  int default_trials;
  std::vector<int> default_dims;
  std::function<void(const SuiteOptions&, SuiteReport&)> run;
};

const std::vector<SuiteDef>& registry() {
  static const std::vector<SuiteDef> defs{
      {"theorem2", 200, {2, 3, 4}, theorem2},
      {"theorem4", 200, {2, 3, 4}, theorem4},
      {"lemma2", 100, {2, 3}, lemma2},
      {"lemma4", 100, {2, 3, 4}, lemma4},
      {"theorem7", 100, {2, 3, 4}, theorem7},
      {"theorem8", 100, {2, 3}, theorem8},
      {"footnote", 50, {1, 2, 3}, footnote},
      {"ssa", 500, {}, ssa},
      {"ci", 100, {2, 3}, ci},
      {"classical", 200, {2, 3, 4}, classical_suite},
  };
  return defs;
}

}  // namespace

bool SuiteReport::passed() const {
  return std::all_of(metrics.begin(), metrics.end(), [](const SuiteMetric& m) { return m.ok(); });
}

const SuiteMetric& SuiteReport::metric(const std::string& name) const {
  for (const auto& m : metrics)
    if (m.name == name) return m;
  throw std::invalid_argument("no metric named '" + name + "'");
}

std::vector<std::string> suite_names() {
  std::vector<std::string> names;
  for (const auto& d : registry()) names.emplace_back(d.name);
  return names;
}

SuiteReport run_suite(const std::string& name, const SuiteOptions& options) {
  for (const auto& d : registry()) {
    if (name != d.name) continue;
    SuiteOptions o = options;
    if (o.trials <= 0) o.trials = d.default_trials;
    if (o.dims.empty()) o.dims = d.default_dims;
    for (int v : o.dims)
      if (v < 1) throw std::invalid_argument("dimensions must be positive");
    SuiteReport r;
    r.suite = d.name;
    r.seed = o.seed;
    r.trials = o.trials;
    const auto start = std::chrono::steady_clock::now();
    d.run(o, r);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }
  throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace qcond
