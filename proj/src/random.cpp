#include "qcond/random.hpp"

#include <cmath>

namespace qcond {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed, std::string family)
    : seed_(seed), family_(std::move(family)), engine_(splitmix64(seed)) {}

RandomSource RandomSource::derive(std::uint64_t index) const {
  return RandomSource(splitmix64(seed_ ^ splitmix64(index + 1)), family_);
}

double RandomSource::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RandomSource::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

int RandomSource::integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

Complex RandomSource::complex_normal() {
  const double re = normal();
  const double im = normal();
  return Complex(re, im) / std::sqrt(2.0);
}

Matrix ginibre(int rows, int cols, RandomSource& rng) {
  Matrix g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = rng.complex_normal();
  return g;
}

Matrix random_unitary(int dim, RandomSource& rng) {
  const Matrix g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR();
  for (int j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

Matrix random_density_matrix(int dim, RandomSource& rng, int rank) {
  if (dim < 1) throw RegionError("random_density: dimension must be positive");
  if (rank <= 0 || rank > dim) rank = dim;
  const Matrix g = ginibre(dim, rank, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

JointState random_density(std::vector<Region> factors, RandomSource& rng, int rank) {
  const int d = total_dim(factors);
  return JointState{LabeledOperator(std::move(factors), random_density_matrix(d, rng, rank)), CausalClass::acausal()};
}

Matrix random_projector(int dim, int rank, RandomSource& rng) {
  const Matrix u = random_unitary(dim, rng);
  const Matrix v = u.leftCols(rank);
  return v * v.adjoint();
}

LikelihoodOperator random_povm(Region outcome, Region system, RandomSource& rng) {
  const int d = system.dim;
  std::vector<Matrix> raw;
  Matrix total = Matrix::Zero(d, d);
  for (int x = 0; x < outcome.dim; ++x) {
    const Matrix g = ginibre(d, d, rng);
    raw.push_back(g * g.adjoint());
    total += raw.back();
  }
  const Matrix s = hermitian_function(0.5 * (total + total.adjoint()), [](double v) { return 1.0 / std::sqrt(v); });
  LikelihoodOperator l{std::move(outcome), std::move(system), {}};
  for (const auto& e : raw) {
    Matrix m = s * e * s;
    l.effects.push_back(0.5 * (m + m.adjoint()));
  }
  return l;
}

namespace {

// Columns of a random isometry from C^cols into C^rows.
Matrix random_isometry(int rows, int cols, RandomSource& rng) {
  if (rows < cols) throw RegionError("random isometry: target smaller than source");
  Eigen::HouseholderQR<Matrix> qr(ginibre(rows, cols, rng));
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

}  // namespace

Channel random_channel(Region input, Region output, RandomSource& rng, int kraus_count) {
  const int din = input.dim;
  const int dout = output.dim;
  if (kraus_count <= 0) kraus_count = din * dout;
  while (kraus_count * dout < din) ++kraus_count;
  const Matrix v = random_isometry(kraus_count * dout, din, rng);
  Channel ch{std::move(input), std::move(output), {}};
  for (int k = 0; k < kraus_count; ++k) ch.kraus.push_back(v.middleRows(k * dout, dout));
  return ch;
}

Instrument random_instrument(Region input, Region outcome, Region output, RandomSource& rng) {
  const int din = input.dim;
  const int dout = output.dim;
  int per_outcome = 1;
  while (per_outcome * outcome.dim * dout < din) ++per_outcome;
  per_outcome = std::max(per_outcome, 2);
  const Matrix v = random_isometry(per_outcome * outcome.dim * dout, din, rng);
  std::vector<std::vector<Matrix>> kraus(outcome.dim);
  for (int x = 0; x < outcome.dim; ++x)
    for (int k = 0; k < per_outcome; ++k) kraus[x].push_back(v.middleRows((x * per_outcome + k) * dout, dout));
  return Instrument::from_kraus(std::move(input), std::move(outcome), std::move(output), kraus);
}

std::vector<double> random_distribution(int n, RandomSource& rng, bool sparse) {
  if (n < 1) throw RegionError("random_distribution: alphabet must be nonempty");
  std::vector<double> p(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    p[i] = -std::log(1.0 - rng.uniform());
    if (sparse && rng.uniform() < 0.25) p[i] = 0.0;
    total += p[i];
  }
  if (total == 0.0) {
    p[rng.integer(0, n - 1)] = 1.0;
    return p;
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<std::vector<double>> random_stochastic(int rows, int cols, RandomSource& rng) {
  std::vector<std::vector<double>> m;
  for (int r = 0; r < rows; ++r) m.push_back(random_distribution(cols, rng));
  return m;
}

}  // namespace qcond
