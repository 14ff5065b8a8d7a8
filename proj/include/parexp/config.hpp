#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "parexp/ate_calculus.hpp"
#include "parexp/core.hpp"
#include "parexp/marketplace.hpp"
#include "parexp/oracle.hpp"

namespace parexp {

/// Everything a run needs besides the seed override.
///
/// File format: INI-like sections with `key = value` lines and `#` comments.
///
///   [experiment]  users, seed, slots, arrival (geometric|fixed), arrival_mean,
///                 arrival_shift, queue_jitter, noise (gaussian|poisson),
///                 noise_scale, floor_at_zero, oracle_replications,
///                 oracle_max_competitors, covariates
///   [campaign]    index, audience, share, bid, quality, baseline, effect,
///                 spill.K, interact.K
///   [belief]      competitor, p_not_adv, p_adv_not_exp, p_adv_exp, share
///   [joint]       competitors = K|K|..., state.BITS = probability
///
/// Audiences: `all`, `range:A-B`, `every:M:R` (id mod M == R), `random:P`,
/// `list:A|B|...`. User ids run from 1 to `users`.
struct ExperimentConfig {
  std::uint64_t users = 1000;
  std::uint64_t seed = 1;
  MarketConfig market;
  OutcomeModel outcomes;
  Roster roster;
  std::size_t oracle_replications = 2000;
  std::size_t oracle_max_competitors = 8;
  bool covariates = true;
  BeliefProfile beliefs;
};

/// Throws ConfigError with the offending line number.
ExperimentConfig parse_config(std::string_view text, std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace parexp
