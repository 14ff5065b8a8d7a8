#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "parexp/core.hpp"
#include "parexp/randomize.hpp"

namespace parexp {

/// One slot auction as logged by the platform.
struct AuctionRecord {
  std::uint64_t auction_id = 0;
  UserId user = 0;
  int slot = 1;
  std::vector<CampaignIndex> queue;         // ranked, before experiment filtering
  CampaignIndex served = kNoAd;             // factual ad
  CampaignIndex counterfactual = kNoAd;     // head of `queue`
};

struct Session {
  UserId user = 0;
  std::vector<AuctionRecord> records;

  std::size_t auctions() const { return records.size(); }
};

struct Bidder {
  CampaignIndex index = kNoAd;
  double score = 0.0;
};

/// bid x quality. The platform's real score is proprietary; any deterministic
/// monotone rule preserves the design's guarantees.
inline double quality_score(const Campaign& c) { return c.base_bid * c.quality; }

/// Descending score, ties broken by ascending campaign index.
std::vector<CampaignIndex> rank_queue(std::vector<Bidder> bidders);

struct ServeResult {
  CampaignIndex served = kNoAd;
  CampaignIndex counterfactual = kNoAd;
};

/// Counterfactual is the queue head. Served is the first queued campaign that is
/// eligible and not already shown in the current multi-slot serve.
template <class Eligible>
ServeResult serve(std::span<const CampaignIndex> queue, Eligible&& eligible,
                  std::span<const CampaignIndex> already_shown = {}) {
  ServeResult r;
  if (!queue.empty()) r.counterfactual = queue.front();
  for (CampaignIndex c : queue) {
    if (!eligible(c)) continue;
    bool repeated = false;
    for (CampaignIndex s : already_shown) repeated = repeated || (s == c);
    if (repeated) continue;
    r.served = c;
    break;
  }
  return r;
}

ServeResult serve(std::span<const CampaignIndex> queue, const Roster& roster, const TreatmentAssignment& assignment,
                  std::span<const CampaignIndex> already_shown = {});

/// Number of auctions a user takes part in during the experiment window.
struct ArrivalModel {
  enum class Kind { geometric, fixed };
  Kind kind = Kind::geometric;
  double mean = 3.0;       // mean of T_i
  unsigned shift = 1;      // geometric: T_i = shift + G with G geometric on {0,1,...}

  unsigned draw(Engine& engine) const;
};

struct MarketConfig {
  int slots = 8;               // positions per serve; no campaign repeats within a serve
  double queue_jitter = 0.0;   // sd of the per-auction log-normal score multiplier
  ArrivalModel arrivals;
};

/// Simulates every auction of one user session. `targeting` and `eligible` are
/// masks over roster positions. Appends records when `records` is non-null and
/// returns the mask of positions served at least once.
///
/// Consumes randomness only for the arrival count and queue jitter, never for
/// the serving decision, so two calls with copies of the same engine and
/// different eligibility share their queues.
std::uint64_t simulate_session(const Roster& roster, std::uint64_t targeting, std::uint64_t eligible,
                               const MarketConfig& config, Engine& engine, UserId user = 0,
                               std::vector<AuctionRecord>* records = nullptr);

/// One user's session under the persistent assignment. Records carry
/// session-local auction ids 0..T_i-1.
Session run_session(UserId user, const Roster& roster, const TreatmentAssignment& assignment,
                    const MarketConfig& config, std::uint64_t seed);

/// Sessions for every assigned user, ordered by user id, with auction ids
/// renumbered consecutively across the run.
std::vector<Session> simulate_market(const Roster& roster, const AssignmentTable& assignments,
                                     const MarketConfig& config, std::uint64_t seed, unsigned threads = 1);

/// Users with at least one record where the focal ad was served or was the
/// counterfactual head. Sorted.
std::vector<UserId> eligible_sample(std::span<const Session> sessions, CampaignIndex focal);
std::vector<UserId> eligible_sample(std::span<const AuctionRecord> records, CampaignIndex focal);

/// Mask over roster positions of campaigns served at least once in a session.
std::uint64_t exposure_mask(const Session& session, const Roster& roster);

}  // namespace parexp
