#pragma once

// Labeled tensor-factor operators: the common carrier for joint states,
// conditional states, POVMs and classical distributions.
//
// Basis convention: an operator over factors (F_0, ..., F_{n-1}) is stored
// as a dense matrix over the lexicographic product basis, row-major, i.e.
// basis index = sum_k i_k * prod_{l>k} dim(F_l). Factors are always kept
// sorted by region id, so two operators over the same regions share one
// basis and file I/O is unambiguous.

#include <complex>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcond/errors.hpp"

namespace qcond {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

enum class RegionKind { Quantum, Classical };

struct Region {
  std::string id;
  int dim = 1;
  RegionKind kind = RegionKind::Quantum;

  bool classical() const { return kind == RegionKind::Classical; }
  friend bool operator==(const Region&, const Region&) = default;
};

Region quantum(std::string id, int dim);
Region classical(std::string id, int dim);

struct Tolerance {
  // Relative eigenvalue cut for support/rank decisions (times lambda_max).
  double eig_cut = 1e-10;
  // Absolute spectral-norm threshold for state equality.
  double eq_tol = 1e-9;
  // Floor applied when lambda_max is itself zero.
  static constexpr double kAbsoluteFloor = 1e-12;

  // Defaults overridden by QCOND_EIG_CUT / QCOND_EQ_TOL when set.
  static Tolerance from_env();
  void check() const;
};

class LabeledOperator {
 public:
  // 1x1 operator with no factors, value 1.
  LabeledOperator();
  // Factors may be given in any order; the matrix is permuted to the
  // canonical (id-sorted) order.
  LabeledOperator(std::vector<Region> factors, Matrix matrix);

  static LabeledOperator identity(std::vector<Region> factors);
  static LabeledOperator scalar(Complex value);
  // |i><i| in the product basis, with `indices` listed in `factors` order.
  static LabeledOperator basis_projector(std::vector<Region> factors,
                                         const std::vector<int>& indices);

  const std::vector<Region>& factors() const { return factors_; }
  const Matrix& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  std::vector<std::string> ids() const;
  bool has(const std::string& id) const;
  const Region& region(const std::string& id) const;

  // Matrix re-expressed with the factors in `order` (must be a permutation
  // of ids()).
  Matrix matrix_in_order(const std::vector<std::string>& order) const;
  // Pads with identities on the regions of `regions` not already present.
  LabeledOperator extended_to(const std::vector<Region>& regions) const;

  Complex trace() const { return matrix_.trace(); }
  LabeledOperator adjoint() const;
  LabeledOperator hermitian_part() const;
  bool is_hermitian(double tol) const;

  LabeledOperator& operator*=(Complex s);
  friend LabeledOperator operator*(Complex s, LabeledOperator op) { return op *= s; }
  friend LabeledOperator operator*(LabeledOperator op, Complex s) { return op *= s; }
  // Binary operations align factors by id and pad with identities on the
  // union of factors (the "dropped identity" convention).
  friend LabeledOperator operator+(const LabeledOperator& a, const LabeledOperator& b);
  friend LabeledOperator operator-(const LabeledOperator& a, const LabeledOperator& b);
  friend LabeledOperator operator*(const LabeledOperator& a, const LabeledOperator& b);

 private:
  std::vector<Region> factors_;
  Matrix matrix_;
};

// Union of two factor lists; throws RegionError when the same id carries
// different dimension or kind.
std::vector<Region> merge_factors(const std::vector<Region>& a, const std::vector<Region>& b);
int total_dim(const std::vector<Region>& factors);

struct SupportSubspace {
  LabeledOperator projector;
  int rank = 0;
  // Orthonormal columns spanning the range of the projector.
  Matrix basis;
};

// Eigen-decomposition of a Hermitian matrix, ascending eigenvalues.
// Exactly diagonal input takes a fast path with no rounding beyond the
// diagonal itself, so classical computations stay exact to the last ulp.
struct HermitianEigen {
  RealVector values;
  Matrix vectors;
};
HermitianEigen hermitian_eigen(const Matrix& m);
// f applied to the spectrum of a Hermitian matrix.
Matrix hermitian_function(const Matrix& m, const std::function<double(double)>& f);
double spectral_norm(const Matrix& m);
double distance(const LabeledOperator& a, const LabeledOperator& b);

LabeledOperator tensor(const LabeledOperator& a, const LabeledOperator& b);
LabeledOperator partial_trace(const LabeledOperator& op, const std::set<std::string>& over);
// Keeps exactly the listed regions (trace over everything else).
LabeledOperator reduce_to(const LabeledOperator& op, const std::set<std::string>& keep);
LabeledOperator partial_transpose(const LabeledOperator& op, const std::set<std::string>& over);

// M * N = N^{1/2} M N^{1/2}, both operands padded to the union of factors.
LabeledOperator star_product(const LabeledOperator& m, const LabeledOperator& n,
                             const Tolerance& tol = {});

// PSD square root; eigenvalues in [-eig_cut*scale, 0) are clamped to zero,
// anything more negative throws PreconditionError.
LabeledOperator sqrt_psd(const LabeledOperator& op, const Tolerance& tol = {});
// Inverse on the support, zero on the kernel.
LabeledOperator pseudo_inverse(const LabeledOperator& op, const Tolerance& tol = {});
LabeledOperator pseudo_inverse_sqrt(const LabeledOperator& op, const Tolerance& tol = {});

SupportSubspace support(const LabeledOperator& op, const Tolerance& tol = {});
SupportSubspace subspace_intersection(const SupportSubspace& p, const SupportSubspace& q,
                                      const Tolerance& tol = {});
// ||(I - P) op (I - P)||, the weight of op outside the subspace.
double leakage_outside(const LabeledOperator& op, const SupportSubspace& s);

double von_neumann_entropy(const LabeledOperator& rho, const Tolerance& tol = {});
bool is_psd(const LabeledOperator& op, const Tolerance& tol = {});

}  // namespace qcond
