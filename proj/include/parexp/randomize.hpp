#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "parexp/core.hpp"

namespace parexp {

/// The common randomization seed of one experiment.
struct SplitSeed {
  std::uint64_t value = 0;
};

enum class Arm : std::uint8_t { control = 0, test = 1 };

/// SplitMix64 finalizer.
constexpr std::uint64_t finalize64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kUserMultiplier = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kCampaignMultiplier = 0xD1B54A32D192ED03ULL;
inline constexpr int kUserRotation = 32;

/// Hash split of (user, campaign, seed):
///   finalize64(seed ^ rotl(user * kUserMultiplier, 32) ^ (campaign * kCampaignMultiplier))
constexpr std::uint64_t split_hash(std::uint64_t user_id, std::uint64_t campaign_index, SplitSeed seed) {
  const std::uint64_t u = user_id * kUserMultiplier;
  const std::uint64_t rotated = (u << kUserRotation) | (u >> (64 - kUserRotation));
  return finalize64(seed.value ^ rotated ^ (campaign_index * kCampaignMultiplier));
}

/// Top 53 bits of the hash as a double in [0, 1).
constexpr double split_uniform(std::uint64_t user_id, std::uint64_t campaign_index, SplitSeed seed) {
  return static_cast<double>(split_hash(user_id, campaign_index, seed) >> 11) * 0x1.0p-53;
}

/// Test iff u < share. Deterministic and independent of the auction, so the
/// arm persists across every auction the user takes part in.
Arm assign(std::uint64_t user_id, std::uint64_t campaign_index, SplitSeed seed, double share);

/// Fraction of entries in the test arm. Throws on empty input.
double empirical_share(std::span<const Arm> arms);

/// D_i for every targeted user: bit j set iff the user is in TA_j and assigned to test.
AssignmentTable assign_all(const Roster& roster, SplitSeed seed);

/// Named substreams derived from the run seed. Each (seed, stream, key...) maps
/// to an independent engine seed.
enum class Stream : std::uint64_t {
  assignment = 1,
  arrivals = 2,
  noise = 3,
  covariates = 4,
  oracle = 5,
  split = 6,
  cv_starts = 7,
  audience = 8,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = finalize64(seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(stream) + 1));
  h = finalize64(h ^ (a + 0x632BE59BD9B4E019ULL));
  h = finalize64(h ^ (b + 0x8CB92BA72F3D8DD7ULL));
  return h;
}

/// SplitMix64 as a uniform random bit generator. Substream engines are created
/// per user and per replication, so seeding must be a single word.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  constexpr result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return finalize64(state_);
  }

  constexpr void discard(unsigned long long n) { state_ += n * 0x9E3779B97F4A7C15ULL; }

  friend constexpr bool operator==(const SplitMix64&, const SplitMix64&) = default;

 private:
  std::uint64_t state_;
};

using Engine = SplitMix64;

inline Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0) {
  return Engine(derive_seed(seed, stream, a, b));
}

}  // namespace parexp
