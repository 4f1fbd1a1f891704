#include "grdsa/rng.hpp"

#include <stdexcept>

namespace grdsa {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::mt19937_64 engine_for(std::uint64_t key) {
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(mix64(key)), static_cast<std::uint32_t>(mix64(key) >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : RandomStream(FromKey{}, mix64(mix64(seed) ^ mix64(stream_id + 0x51ed270b2a3f4f1dULL))) {}

RandomStream::RandomStream(FromKey, std::uint64_t key) : key_(key), engine_(engine_for(key)) {}

RandomStream RandomStream::substream(std::uint64_t id) const {
  return RandomStream(FromKey{}, mix64(key_ ^ mix64(id ^ 0xd1b54a32d192ed03ULL)));
}

double RandomStream::normal() { return normal_(engine_); }

double RandomStream::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

std::uint64_t RandomStream::index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("RandomStream::index: empty range");
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

}  // namespace grdsa
