#pragma once

#include <cstdint>
#include <random>

#include "qio/types.hpp"

namespace qio {

std::uint64_t splitmix64(std::uint64_t x);

/// Reproducible random stream keyed by (seed, stream index). Streams with
/// different indices are decorrelated by SplitMix64 mixing of the key, so an
/// ensemble gives identical results whatever order its members run in.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  double uniform();  // [0, 1)
  double normal();   // standard normal
  double normal(double mean, double stddev);
  std::uint64_t bits();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Haar-distributed unitary via QR of a complex Ginibre matrix.
CMatrix random_unitary(Index dim, RandomStream& rng);
CMatrix random_hermitian(Index dim, RandomStream& rng, double scale = 1.0);
CMatrix random_complex(Index dim, RandomStream& rng, double scale = 1.0);
/// Full-rank density matrix drawn from the Hilbert-Schmidt ensemble.
CMatrix random_density(Index dim, RandomStream& rng);

}  // namespace qio
