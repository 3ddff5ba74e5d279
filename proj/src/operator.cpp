#include "qcond/operator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace qcond {

namespace {

std::vector<int> dims_of(const std::vector<Region>& factors) {
  std::vector<int> dims;
  dims.reserve(factors.size());
  for (const auto& f : factors) dims.push_back(f.dim);
  return dims;
}

// src[n] = index in the `from` basis of basis vector n of the permuted
// basis, where perm[p] is the `from` position of the factor placed at p.
std::vector<int> permutation_map(const std::vector<int>& from_dims, const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  std::vector<int> from_strides(n, 1);
  for (int k = n - 2; k >= 0; --k) from_strides[k] = from_strides[k + 1] * from_dims[k + 1];
  std::vector<int> to_dims(n);
  for (int p = 0; p < n; ++p) to_dims[p] = from_dims[perm[p]];
  const int total = std::accumulate(from_dims.begin(), from_dims.end(), 1, std::multiplies<>());
  std::vector<int> src(total);
  std::vector<int> digits(n, 0);
  for (int idx = 0; idx < total; ++idx) {
    int s = 0;
    for (int p = 0; p < n; ++p) s += digits[p] * from_strides[perm[p]];
    src[idx] = s;
    for (int p = n - 1; p >= 0; --p) {
      if (++digits[p] < to_dims[p]) break;
      digits[p] = 0;
    }
  }
  return src;
}

Matrix permute(const Matrix& m, const std::vector<int>& src) {
  const int d = static_cast<int>(src.size());
  Matrix out(d, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) out(r, c) = m(src[r], src[c]);
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double hermitian_scale(const Matrix& m) {
  return std::max(1.0, m.cwiseAbs().maxCoeff());
}

void require_hermitian(const LabeledOperator& op, const Tolerance& tol, const char* what) {
  if (!op.is_hermitian(tol.eq_tol * hermitian_scale(op.matrix()))) {
    throw PreconditionError(std::string(what) + ": operator is not Hermitian");
  }
}

double psd_floor(const RealVector& values, const Tolerance& tol) {
  const double lmax = values.size() ? values.maxCoeff() : 0.0;
  return -tol.eig_cut * std::max(1.0, lmax);
}

double support_cut(const RealVector& values, const Tolerance& tol) {
  const double lmax = values.size() ? values.maxCoeff() : 0.0;
  return lmax > 0.0 ? tol.eig_cut * lmax : Tolerance::kAbsoluteFloor;
}

double env_or(const char* name, double fallback) {
  const char* raw = std::getenv(name);
  if (raw == nullptr || *raw == '\0') return fallback;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (end == raw || *end != '\0') {
    throw PreconditionError(std::string(name) + " is not a number: " + raw);
  }
  return v;
}

}  // namespace

Region quantum(std::string id, int dim) { return Region{std::move(id), dim, RegionKind::Quantum}; }
Region classical(std::string id, int dim) { return Region{std::move(id), dim, RegionKind::Classical}; }

Tolerance Tolerance::from_env() {
  Tolerance t;
  t.eig_cut = env_or("QCOND_EIG_CUT", t.eig_cut);
  t.eq_tol = env_or("QCOND_EQ_TOL", t.eq_tol);
  t.check();
  return t;
}

void Tolerance::check() const {
  if (!(eig_cut > 0.0 && eig_cut < 1.0) || !(eq_tol > 0.0 && eq_tol < 1.0)) {
    throw PreconditionError("tolerances must lie strictly between 0 and 1");
  }
}

int total_dim(const std::vector<Region>& factors) {
  int d = 1;
  for (const auto& f : factors) d *= f.dim;
  return d;
}

std::vector<Region> merge_factors(const std::vector<Region>& a, const std::vector<Region>& b) {
  std::vector<Region> out = a;
  for (const auto& r : b) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Region& x) { return x.id == r.id; });
    if (it == out.end()) {
      out.push_back(r);
    } else if (!(*it == r)) {
      throw RegionError("region '" + r.id + "' appears with different dimension or kind");
    }
  }
  std::sort(out.begin(), out.end(), [](const Region& x, const Region& y) { return x.id < y.id; });
  return out;
}

LabeledOperator::LabeledOperator() : matrix_(Matrix::Ones(1, 1)) {}

LabeledOperator::LabeledOperator(std::vector<Region> factors, Matrix matrix) {
  for (const auto& f : factors) {
    if (f.dim < 1) throw RegionError("region '" + f.id + "' has non-positive dimension");
    if (f.id.empty()) throw RegionError("region id must be non-empty");
  }
  const int d = total_dim(factors);
  if (matrix.rows() != d || matrix.cols() != d) {
    std::ostringstream msg;
    msg << "matrix is " << matrix.rows() << "x" << matrix.cols() << " but factors need " << d << "x"
        << d;
    throw RegionError(msg.str());
  }
  std::vector<int> perm(factors.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](int x, int y) { return factors[x].id < factors[y].id; });
  for (std::size_t i = 1; i < perm.size(); ++i) {
    if (factors[perm[i]].id == factors[perm[i - 1]].id) {
      throw RegionError("duplicate region id '" + factors[perm[i]].id + "'");
    }
  }
  const bool sorted = std::is_sorted(perm.begin(), perm.end());
  factors_.reserve(factors.size());
  for (int p : perm) factors_.push_back(factors[p]);
  matrix_ = sorted ? std::move(matrix) : permute(matrix, permutation_map(dims_of(factors), perm));
}

LabeledOperator LabeledOperator::identity(std::vector<Region> factors) {
  const int d = total_dim(factors);
  return LabeledOperator(std::move(factors), Matrix::Identity(d, d));
}

LabeledOperator LabeledOperator::scalar(Complex value) {
  LabeledOperator op;
  op.matrix_(0, 0) = value;
  return op;
}

LabeledOperator LabeledOperator::basis_projector(std::vector<Region> factors,
                                                 const std::vector<int>& indices) {
  if (indices.size() != factors.size()) throw RegionError("basis_projector: index count mismatch");
  int idx = 0;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    if (indices[k] < 0 || indices[k] >= factors[k].dim) {
      throw RegionError("basis_projector: index out of range for '" + factors[k].id + "'");
    }
    idx = idx * factors[k].dim + indices[k];
  }
  const int d = total_dim(factors);
  Matrix m = Matrix::Zero(d, d);
  m(idx, idx) = 1.0;
  return LabeledOperator(std::move(factors), std::move(m));
}

std::vector<std::string> LabeledOperator::ids() const {
  std::vector<std::string> out;
  for (const auto& f : factors_) out.push_back(f.id);
  return out;
}

bool LabeledOperator::has(const std::string& id) const {
  return std::any_of(factors_.begin(), factors_.end(), [&](const Region& r) { return r.id == id; });
}

const Region& LabeledOperator::region(const std::string& id) const {
  for (const auto& f : factors_)
    if (f.id == id) return f;
  throw RegionError("unknown region id '" + id + "'");
}

Matrix LabeledOperator::matrix_in_order(const std::vector<std::string>& order) const {
  if (order.size() != factors_.size()) throw RegionError("matrix_in_order: order is not a permutation");
  std::vector<int> perm;
  for (const auto& id : order) {
    auto it = std::find_if(factors_.begin(), factors_.end(), [&](const Region& r) { return r.id == id; });
    if (it == factors_.end()) throw RegionError("unknown region id '" + id + "'");
    perm.push_back(static_cast<int>(it - factors_.begin()));
  }
  std::vector<int> check = perm;
  std::sort(check.begin(), check.end());
  if (std::adjacent_find(check.begin(), check.end()) != check.end()) {
    throw RegionError("matrix_in_order: repeated region id");
  }
  return permute(matrix_, permutation_map(dims_of(factors_), perm));
}

LabeledOperator LabeledOperator::extended_to(const std::vector<Region>& regions) const {
  merge_factors(factors_, regions);  // consistency check only
  std::vector<Region> missing;
  for (const auto& r : regions)
    if (!has(r.id)) missing.push_back(r);
  if (missing.empty()) return *this;
  std::vector<Region> all = factors_;
  all.insert(all.end(), missing.begin(), missing.end());
  const int dm = total_dim(missing);
  return LabeledOperator(std::move(all), kron(matrix_, Matrix::Identity(dm, dm)));
}

LabeledOperator LabeledOperator::adjoint() const {
  LabeledOperator out = *this;
  out.matrix_ = matrix_.adjoint();
  return out;
}

LabeledOperator LabeledOperator::hermitian_part() const {
  LabeledOperator out = *this;
  out.matrix_ = 0.5 * (matrix_ + matrix_.adjoint());
  return out;
}

bool LabeledOperator::is_hermitian(double tol) const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

LabeledOperator& LabeledOperator::operator*=(Complex s) {
  matrix_ *= s;
  return *this;
}

LabeledOperator operator+(const LabeledOperator& a, const LabeledOperator& b) {
  const auto all = merge_factors(a.factors_, b.factors_);
  return LabeledOperator(all, a.extended_to(all).matrix_ + b.extended_to(all).matrix_);
}

LabeledOperator operator-(const LabeledOperator& a, const LabeledOperator& b) {
  const auto all = merge_factors(a.factors_, b.factors_);
  return LabeledOperator(all, a.extended_to(all).matrix_ - b.extended_to(all).matrix_);
}

LabeledOperator operator*(const LabeledOperator& a, const LabeledOperator& b) {
  const auto all = merge_factors(a.factors_, b.factors_);
  return LabeledOperator(all, a.extended_to(all).matrix_ * b.extended_to(all).matrix_);
}

HermitianEigen hermitian_eigen(const Matrix& m) {
  const Eigen::Index d = m.rows();
  Matrix off = m;
  off.diagonal().setZero();
  if (d == 0 || off.cwiseAbs().maxCoeff() == 0.0) {
    std::vector<Eigen::Index> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return m(x, x).real() < m(y, y).real(); });
    HermitianEigen out{RealVector(d), Matrix::Zero(d, d)};
    for (Eigen::Index k = 0; k < d; ++k) {
      out.values(k) = m(order[k], order[k]).real();
      out.vectors(order[k], k) = 1.0;
    }
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  return HermitianEigen{solver.eigenvalues(), solver.eigenvectors()};
}

Matrix hermitian_function(const Matrix& m, const std::function<double(double)>& f) {
  Matrix off = m;
  off.diagonal().setZero();
  if (m.rows() == 0 || off.cwiseAbs().maxCoeff() == 0.0) {
    Matrix out = Matrix::Zero(m.rows(), m.cols());
    for (Eigen::Index k = 0; k < m.rows(); ++k) out(k, k) = f(m(k, k).real());
    return out;
  }
  const auto eig = hermitian_eigen(m);
  RealVector fv = eig.values.unaryExpr([&](double x) { return f(x); });
  return eig.vectors * fv.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double distance(const LabeledOperator& a, const LabeledOperator& b) {
  return spectral_norm((a - b).matrix());
}

LabeledOperator tensor(const LabeledOperator& a, const LabeledOperator& b) {
  for (const auto& r : b.factors()) {
    if (a.has(r.id)) throw RegionError("tensor: duplicate region id '" + r.id + "'");
  }
  std::vector<Region> all = a.factors();
  all.insert(all.end(), b.factors().begin(), b.factors().end());
  return LabeledOperator(std::move(all), kron(a.matrix(), b.matrix()));
}

LabeledOperator partial_trace(const LabeledOperator& op, const std::set<std::string>& over) {
  for (const auto& id : over) op.region(id);
  std::vector<Region> keep;
  std::vector<Region> traced;
  for (const auto& f : op.factors()) (over.count(f.id) ? traced : keep).push_back(f);
  if (traced.empty()) return op;
  std::vector<std::string> order;
  for (const auto& f : keep) order.push_back(f.id);
  for (const auto& f : traced) order.push_back(f.id);
  const Matrix m = op.matrix_in_order(order);
  const int dk = total_dim(keep);
  const int dt = total_dim(traced);
  Matrix out = Matrix::Zero(dk, dk);
  for (int c = 0; c < dk; ++c)
    for (int r = 0; r < dk; ++r)
      for (int t = 0; t < dt; ++t) out(r, c) += m(r * dt + t, c * dt + t);
  return LabeledOperator(std::move(keep), std::move(out));
}

LabeledOperator reduce_to(const LabeledOperator& op, const std::set<std::string>& keep) {
  for (const auto& id : keep) op.region(id);
  std::set<std::string> over;
  for (const auto& f : op.factors())
    if (!keep.count(f.id)) over.insert(f.id);
  return partial_trace(op, over);
}

LabeledOperator partial_transpose(const LabeledOperator& op, const std::set<std::string>& over) {
  for (const auto& id : over) op.region(id);
  std::vector<Region> rest;
  std::vector<Region> transposed;
  for (const auto& f : op.factors()) (over.count(f.id) ? transposed : rest).push_back(f);
  if (transposed.empty()) return op;
  std::vector<std::string> order;
  for (const auto& f : rest) order.push_back(f.id);
  for (const auto& f : transposed) order.push_back(f.id);
  const Matrix m = op.matrix_in_order(order);
  const int dr = total_dim(rest);
  const int dt = total_dim(transposed);
  Matrix out(m.rows(), m.cols());
  for (int r1 = 0; r1 < dr; ++r1)
    for (int t1 = 0; t1 < dt; ++t1)
      for (int r2 = 0; r2 < dr; ++r2)
        for (int t2 = 0; t2 < dt; ++t2) out(r1 * dt + t1, r2 * dt + t2) = m(r1 * dt + t2, r2 * dt + t1);
  std::vector<Region> all = rest;
  all.insert(all.end(), transposed.begin(), transposed.end());
  return LabeledOperator(std::move(all), std::move(out));
}

LabeledOperator sqrt_psd(const LabeledOperator& op, const Tolerance& tol) {
  require_hermitian(op, tol, "sqrt_psd");
  const auto eig = hermitian_eigen(op.matrix());
  if (eig.values.size() && eig.values.minCoeff() < psd_floor(eig.values, tol)) {
    throw PreconditionError("operator is not positive semidefinite");
  }
  // Sub-cut eigenvalues are roundoff; keeping them would inflate supp(sqrt(op)).
  const double cut = support_cut(eig.values, tol);
  Matrix m = hermitian_function(op.matrix(), [&](double x) { return x > cut ? std::sqrt(x) : 0.0; });
  return LabeledOperator(op.factors(), std::move(m));
}

namespace {

LabeledOperator inverse_power(const LabeledOperator& op, const Tolerance& tol, double power,
                              const char* what) {
  require_hermitian(op, tol, what);
  const auto eig = hermitian_eigen(op.matrix());
  if (eig.values.size() && eig.values.minCoeff() < psd_floor(eig.values, tol)) {
    throw PreconditionError(std::string(what) + ": operator is not positive semidefinite");
  }
  const double cut = support_cut(eig.values, tol);
  Matrix m = hermitian_function(op.matrix(), [&](double x) { return x > cut ? std::pow(x, -power) : 0.0; });
  return LabeledOperator(op.factors(), std::move(m));
}

}  // namespace

LabeledOperator pseudo_inverse(const LabeledOperator& op, const Tolerance& tol) {
  return inverse_power(op, tol, 1.0, "pseudo_inverse");
}

LabeledOperator pseudo_inverse_sqrt(const LabeledOperator& op, const Tolerance& tol) {
  return inverse_power(op, tol, 0.5, "pseudo_inverse_sqrt");
}

LabeledOperator star_product(const LabeledOperator& m, const LabeledOperator& n, const Tolerance& tol) {
  const auto all = merge_factors(m.factors(), n.factors());
  const LabeledOperator root = sqrt_psd(n, tol).extended_to(all);
  const Matrix& r = root.matrix();
  return LabeledOperator(all, r * m.extended_to(all).matrix() * r);
}

SupportSubspace support(const LabeledOperator& op, const Tolerance& tol) {
  require_hermitian(op, tol, "support");
  const auto eig = hermitian_eigen(op.matrix());
  const double cut = support_cut(eig.values, tol);
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = eig.values.size() - 1; k >= 0; --k)
    if (eig.values(k) > cut) cols.push_back(k);
  Matrix basis(op.dim(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) basis.col(j) = eig.vectors.col(cols[j]);
  Matrix proj = basis * basis.adjoint();
  return SupportSubspace{LabeledOperator(op.factors(), std::move(proj)), static_cast<int>(cols.size()),
                         std::move(basis)};
}

SupportSubspace subspace_intersection(const SupportSubspace& p, const SupportSubspace& q,
                                      const Tolerance& tol) {
  const auto& fp = p.projector.factors();
  const auto& fq = q.projector.factors();
  if (fp != fq) throw RegionError("subspace_intersection: subspaces live on different factors");
  const Matrix sum = p.projector.matrix() + q.projector.matrix();
  const auto eig = hermitian_eigen(0.5 * (sum + sum.adjoint()));
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = eig.values.size() - 1; k >= 0; --k)
    if (eig.values(k) >= 2.0 - tol.eq_tol) cols.push_back(k);
  Matrix basis(sum.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) basis.col(j) = eig.vectors.col(cols[j]);
  Matrix proj = basis * basis.adjoint();
  return SupportSubspace{LabeledOperator(fp, std::move(proj)), static_cast<int>(cols.size()),
                         std::move(basis)};
}

double leakage_outside(const LabeledOperator& op, const SupportSubspace& s) {
  const LabeledOperator aligned = op.extended_to(s.projector.factors());
  const Matrix comp = Matrix::Identity(s.projector.dim(), s.projector.dim()) - s.projector.matrix();
  return spectral_norm(comp * aligned.matrix() * comp);
}

double von_neumann_entropy(const LabeledOperator& rho, const Tolerance& tol) {
  require_hermitian(rho, tol, "von_neumann_entropy");
  const auto eig = hermitian_eigen(rho.matrix());
  if (eig.values.size() && eig.values.minCoeff() < psd_floor(eig.values, tol)) {
    throw PreconditionError("von_neumann_entropy: state has a negative eigenvalue");
  }
  if (std::abs(rho.trace() - 1.0) > tol.eq_tol) {
    throw PreconditionError("von_neumann_entropy: state does not have unit trace");
  }
  double s = 0.0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    const double l = eig.values(k);
    if (l > 0.0) s -= l * std::log2(l);
  }
  return std::max(0.0, s);
}

bool is_psd(const LabeledOperator& op, const Tolerance& tol) {
  require_hermitian(op, tol, "is_psd");
  const auto eig = hermitian_eigen(op.matrix());
  return eig.values.size() == 0 || eig.values.minCoeff() >= psd_floor(eig.values, tol);
}

}  // namespace qcond
