#include "qio/error.hpp"
#include "qio/random.hpp"
#include "qio/sysid.hpp"

namespace qio {

namespace {

constexpr std::uint32_t kMask = 0x7FFFFFFFu;

}  // namespace

Vector prbs(Index length, double amplitude, std::uint64_t seed, Index hold) {
  require(length >= 1, "PRBS length must be positive");
  require(amplitude > 0.0, "PRBS amplitude must be positive");
  require(hold >= 1, "PRBS hold must be positive");
  std::uint32_t state = static_cast<std::uint32_t>(splitmix64(seed)) & kMask;
  if (state == 0) state = 1;
  Vector out(length);
  double level = 0.0;
  for (Index k = 0; k < length; ++k) {
    if (k % hold == 0) {
      const std::uint32_t bit = ((state >> 30) ^ (state >> 27)) & 1u;
      state = ((state << 1) | bit) & kMask;
      level = bit ? amplitude : -amplitude;
    }
    out(k) = level;
  }
  return out;
}

Matrix prbs_inputs(Index length, double amplitude, std::uint64_t seed, Index hold) {
  Matrix f(2, length);
  f.row(0) = prbs(length, amplitude, splitmix64(seed ^ 0x51a7c0de5eed0001ULL), hold).transpose();
  f.row(1) = prbs(length, amplitude, splitmix64(seed ^ 0x51a7c0de5eed0002ULL), hold).transpose();
  return f;
}

}  // namespace qio
