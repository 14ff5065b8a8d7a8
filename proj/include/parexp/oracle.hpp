#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "parexp/core.hpp"
#include "parexp/marketplace.hpp"
#include "parexp/randomize.hpp"

namespace parexp {

/// Ground-truth response of advertiser j's outcome to the ads a user was served.
///
///   Y_ij = baseline + own_effect * E_ij + sum_k spill[k] * E_ik
///          + sum_k interact[k] * E_ij * E_ik + noise
///
/// with E_ik = 1 if the user was served k at least once during the window.
struct FocalEffects {
  CampaignIndex focal = kNoAd;
  double baseline = 0.0;
  double own_effect = 0.0;
  std::map<CampaignIndex, double> spill;     // direct effect of k's ad on j's outcome
  std::map<CampaignIndex, double> interact;  // joint exposure to j and k
};

enum class NoiseKind { gaussian, poisson };

struct OutcomeModel {
  std::vector<FocalEffects> effects;
  NoiseKind noise = NoiseKind::gaussian;
  double noise_scale = 1.0;    // gaussian sd; unused for poisson
  bool floor_at_zero = false;  // count output for gaussian noise

  /// Effects for a focal campaign; all-zero when the model does not list it.
  FocalEffects effects_for(CampaignIndex focal) const;
  /// Throws ConfigError when the model references a campaign outside the roster.
  void validate(const Roster& roster) const;
};

/// Linear predictor for focal position `focal_pos` given a served-at-least-once mask.
double expected_outcome(const FocalEffects& effects, const Roster& roster, std::uint64_t exposure);

/// Adds noise to a linear predictor.
double draw_outcome(double mean, const OutcomeModel& model, Engine& engine);

struct OutcomeRecord {
  UserId user = 0;
  CampaignIndex focal = kNoAd;
  Arm arm = Arm::control;
  double y = 0.0;
};

/// One record per (user, focal) with the user in TA_j, ordered by user then
/// campaign index. Sessions must cover every assigned user.
std::vector<OutcomeRecord> realize_outcomes(std::span<const Session> sessions, const Roster& roster,
                                            const AssignmentTable& assignments, const OutcomeModel& model,
                                            std::uint64_t noise_seed, unsigned threads = 1);

struct OracleEstimate {
  double tau = 0.0;
  double mc_se = 0.0;
  std::size_t replications = 0;
};

/// The population a forced world is evaluated on: users targeted by the focal
/// campaign and exactly `competitors`.
struct ForcedWorld {
  CampaignIndex focal = kNoAd;
  std::vector<CampaignIndex> competitors;  // O_jq
  std::vector<double> eligibility;         // per competitor; 1 = omega_k 1, 0 = omega_k 0, else sigma_k
};

/// Mean difference of the focal outcome between a world where the focal ad is
/// always eligible and one where it never is, over `replications` independent
/// synthetic users of the partition. Competitor k is eligible with probability
/// eligibility[k] (drawn once per user and held for the whole session).
OracleEstimate forced_world_ate(const OutcomeModel& model, const Roster& roster, const MarketConfig& market,
                                const ForcedWorld& world, std::size_t replications, std::uint64_t seed,
                                unsigned threads = 1);

/// tau_j(omega | P_j(q)). `state` spans every competitor of the focal campaign
/// (ascending index); coordinates outside `partition_competitors` do not
/// matter because those advertisers do not target the partition.
OracleEstimate true_degenerate_ate(const OutcomeModel& model, const Roster& roster, const MarketConfig& market,
                                   CampaignIndex focal, std::span<const CampaignIndex> partition_competitors,
                                   const StateOfWorld& state, std::size_t replications, std::uint64_t seed,
                                   unsigned threads = 1);

struct OracleRow {
  CampaignIndex focal = kNoAd;
  int partition = 0;
  StateOfWorld state;  // over all competitors of the focal, zero outside O_jq
  OracleEstimate estimate;
};

/// Degenerate ATEs for every focal, partition and state over O_jq. Partitions
/// with more than `max_competitors` competitors are skipped.
std::vector<OracleRow> oracle_table(const OutcomeModel& model, const Roster& roster, const PartitionIndex& partitions,
                                    const MarketConfig& market, std::size_t replications, std::uint64_t seed,
                                    std::size_t max_competitors, unsigned threads = 1);

}  // namespace parexp
