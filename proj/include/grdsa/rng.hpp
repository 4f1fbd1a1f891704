#pragma once

#include <cstdint>
#include <random>

namespace grdsa {

/// Reproducible random stream with deterministic, independent substreams.
///
/// A stream is identified by a 64-bit key derived from the run seed and the
/// path of substream ids used to reach it, so batch members and parallel runs
/// can be given fixed streams regardless of scheduling.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  RandomStream substream(std::uint64_t id) const;

  double normal();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);

  std::uint64_t key() const { return key_; }
  std::mt19937_64& engine() { return engine_; }

 private:
  struct FromKey {};
  RandomStream(FromKey, std::uint64_t key);

  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finaliser; used to derive substream keys.
std::uint64_t mix64(std::uint64_t x);

}  // namespace grdsa
