#pragma once

#include <cstdint>
#include <random>

namespace knnorder {

/// Deterministic random stream derived from (master seed, stream index).
///
/// Identical (seed, index) pairs replay identical draw sequences on every
/// platform: the engine is mt19937_64 (output pinned by the standard) and all
/// variate transforms below are fixed algorithms rather than the
/// implementation-defined std::*_distribution adaptors.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via the Marsaglia polar method (pairs cached).
  double next_normal();

  /// Poisson draw: chop-down inversion below mean 30, PTRS rejection above.
  std::uint64_t next_poisson(double mean);

  /// Unbiased uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::uint64_t master_seed_ = 0;
  std::uint64_t stream_index_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Sub-stream factory; distinct indices give statistically independent streams.
inline RngStream split_stream(std::uint64_t master_seed, std::uint64_t index) {
  return RngStream(master_seed, index);
}

}  // namespace knnorder
