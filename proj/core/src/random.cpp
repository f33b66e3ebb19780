#include "qio/random.hpp"

#include <Eigen/QR>

namespace qio {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  engine_.seed(seq);
}

double RandomStream::uniform() { return uniform_(engine_); }

double RandomStream::normal() { return normal_(engine_); }

double RandomStream::normal(double mean, double stddev) { return mean + stddev * normal_(engine_); }

std::uint64_t RandomStream::bits() { return engine_(); }

CMatrix random_complex(Index dim, RandomStream& rng, double scale) {
  CMatrix m(dim, dim);
  for (Index j = 0; j < dim; ++j)
    for (Index i = 0; i < dim; ++i) m(i, j) = cplx(rng.normal(), rng.normal()) * scale;
  return m;
}

CMatrix random_hermitian(Index dim, RandomStream& rng, double scale) {
  CMatrix g = random_complex(dim, rng, scale);
  return 0.5 * (g + g.adjoint());
}

CMatrix random_unitary(Index dim, RandomStream& rng) {
  CMatrix g = random_complex(dim, rng, 1.0 / std::sqrt(2.0));
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phases of diag(R) so the distribution is Haar.
  for (Index j = 0; j < dim; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

CMatrix random_density(Index dim, RandomStream& rng) {
  CMatrix g = random_complex(dim, rng);
  CMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

}  // namespace qio
