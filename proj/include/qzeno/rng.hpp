#pragma once

#include <cstdint>
#include <random>

namespace qzeno {

// Uniform random stream identified by (master_seed, stream_id). The engine is
// std::mt19937_64 seeded through std::seed_seq; both algorithms are fixed by
// the C++ standard, so a given pair yields the same numbers on every platform.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  // Seed words folded into one 64-bit value, reported in trajectory records.
  std::uint64_t seed_used() const;

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace qzeno
