#include "qzeno/rng.hpp"

#include <array>

namespace qzeno {
namespace {

std::array<std::uint32_t, 4> seed_words(std::uint64_t master, std::uint64_t stream) {
  return {static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
}

std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream) {
  const auto words = seed_words(master, stream);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id),
      engine_(make_engine(master_seed, stream_id)) {}

std::uint64_t RngStream::seed_used() const {
  // splitmix64 finalizer over the pair; only used as a label.
  std::uint64_t z = master_seed_ ^ (stream_id_ * 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace qzeno
