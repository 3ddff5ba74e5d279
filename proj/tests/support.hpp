#pragma once

// Shared fixtures and independent oracles for the unit and property tests.
// Random inputs come from Gen, a small xorshift generator kept separate from
// the library's RandomSource so property tests do not share its code paths.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qcond/conditional.hpp"
#include "qcond/hybrid.hpp"
#include "qcond/operator.hpp"

namespace qt {

using qcond::Complex;
using qcond::LabeledOperator;
using qcond::Matrix;
using qcond::Region;
using qcond::Vector;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : state_(seed * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull) {
    if (state_ == 0) state_ = 1;
  }

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1Dull;
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double normal() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * uniform());
  }
  Complex complex_normal() { return Complex(normal(), normal()) / std::sqrt(2.0); }

  Matrix gaussian(int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int k = 0; k < cols; ++k) m(i, k) = complex_normal();
    return m;
  }
  // Random density matrix of the given rank (0: full).
  Matrix density(int dim, int rank = 0) {
    const Matrix g = gaussian(dim, rank > 0 ? rank : dim);
    Matrix rho = g * g.adjoint();
    return rho / rho.trace();
  }
  std::vector<double> distribution(int n) {
    std::vector<double> p(n);
    double total = 0.0;
    for (auto& v : p) total += (v = -std::log(1.0 - uniform()));
    for (auto& v : p) v /= total;
    return p;
  }

 private:
  std::uint64_t state_;
};

inline Matrix diag(std::initializer_list<double> d) {
  Matrix m = Matrix::Zero(static_cast<int>(d.size()), static_cast<int>(d.size()));
  int i = 0;
  for (double v : d) m(i, i) = v, ++i;
  return m;
}

inline Matrix ket(std::initializer_list<Complex> amps) {
  Vector v(static_cast<int>(amps.size()));
  int i = 0;
  for (Complex a : amps) v(i++) = a;
  return v * v.adjoint();
}

inline Matrix pauli_x() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}
inline Matrix pauli_z() { return diag({1.0, -1.0}); }

// |Phi+><Phi+| on two qubits.
inline Matrix phi_plus() {
  const double h = 1.0 / std::sqrt(2.0);
  return ket({h, 0.0, 0.0, h});
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k) out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
  return out;
}

inline double norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

inline double dist(const Matrix& a, const Matrix& b) { return norm(a - b); }
inline double dist(const LabeledOperator& a, const Matrix& b) { return norm(a.matrix() - b); }

// Tr over the first factor of a (da x db) bipartite matrix, by explicit sum.
inline Matrix trace_first(const Matrix& m, int da, int db) {
  Matrix out = Matrix::Zero(db, db);
  for (int a = 0; a < da; ++a) out += m.block(a * db, a * db, db, db);
  return out;
}

// Tr over the second factor of a (da x db) bipartite matrix.
inline Matrix trace_second(const Matrix& m, int da, int db) {
  Matrix out = Matrix::Zero(da, da);
  for (int i = 0; i < da; ++i)
    for (int k = 0; k < da; ++k)
      for (int b = 0; b < db; ++b) out(i, k) += m(i * db + b, k * db + b);
  return out;
}

inline Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return es.operatorSqrt();
}

inline double entropy_bits(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()(i);
    if (l > 1e-14) s -= l * std::log2(l);
  }
  return s;
}

inline LabeledOperator on(std::vector<Region> regions, Matrix m) { return LabeledOperator(std::move(regions), std::move(m)); }

inline qcond::JointState state(std::vector<Region> regions, Matrix m) {
  return qcond::JointState{LabeledOperator(std::move(regions), std::move(m)), qcond::CausalClass::acausal()};
}

}  // namespace qt
