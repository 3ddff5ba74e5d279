#pragma once

// Seeded generators for random states, POVMs, channels and instruments.
// The same seed always yields the same stream.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qcond/conditional.hpp"
#include "qcond/hybrid.hpp"
#include "qcond/operator.hpp"

namespace qcond {

std::uint64_t splitmix64(std::uint64_t x);

class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::string family = "ginibre");

  std::uint64_t seed() const { return seed_; }
  const std::string& family() const { return family_; }
  std::mt19937_64& engine() { return engine_; }

  // Independent source for trial `index`, derived from the seed only.
  RandomSource derive(std::uint64_t index) const;

  double uniform();                 // [0, 1)
  double normal();                  // standard normal
  int integer(int lo, int hi);      // inclusive
  Complex complex_normal();         // E|z|^2 = 1

 private:
  std::uint64_t seed_;
  std::string family_;
  std::mt19937_64 engine_;
};

Matrix ginibre(int rows, int cols, RandomSource& rng);
Matrix random_unitary(int dim, RandomSource& rng);
// G G^dagger / Tr with G of shape dim x rank; rank 0 means full rank.
Matrix random_density_matrix(int dim, RandomSource& rng, int rank = 0);
JointState random_density(std::vector<Region> factors, RandomSource& rng, int rank = 0);
// Projector onto a random subspace of the given rank.
Matrix random_projector(int dim, int rank, RandomSource& rng);

LikelihoodOperator random_povm(Region outcome, Region system, RandomSource& rng);
// Isometric dilation with `kraus_count` Kraus operators (0: din * dout).
Channel random_channel(Region input, Region output, RandomSource& rng, int kraus_count = 0);
Instrument random_instrument(Region input, Region outcome, Region output, RandomSource& rng);

// Uniform on the simplex; with `sparse`, each entry is zeroed with
// probability 1/4 (at least one entry survives).
std::vector<double> random_distribution(int n, RandomSource& rng, bool sparse = false);
// rows x cols row-stochastic matrix.
std::vector<std::vector<double>> random_stochastic(int rows, int cols, RandomSource& rng);

}  // namespace qcond
