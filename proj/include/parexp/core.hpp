#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "parexp/types.hpp"

namespace parexp {

/// One experimenting advertiser. Each advertiser runs exactly one campaign, so
/// "campaign" and "advertiser" are used interchangeably.
struct Campaign {
  CampaignIndex index = 0;
  std::vector<UserId> audience;  // TA_j, sorted and unique
  double treatment_share = 0.0;  // sigma_j
  double base_bid = 0.0;
  double quality = 1.0;

  bool targets(UserId user) const;
};

/// The campaigns of one experiment, ordered by campaign index. A campaign's
/// position in this order is the coordinate it occupies in assignment vectors.
class Roster {
 public:
  Roster() = default;
  explicit Roster(std::vector<Campaign> campaigns);

  std::size_t size() const { return campaigns_.size(); }
  const std::vector<Campaign>& campaigns() const { return campaigns_; }
  const Campaign& at(std::size_t position) const { return campaigns_.at(position); }
  const Campaign& by_index(CampaignIndex index) const;
  std::optional<std::size_t> position_of(CampaignIndex index) const;
  std::size_t require_position(CampaignIndex index) const;

  /// Campaign indices other than `focal`, ascending.
  std::vector<CampaignIndex> competitors_of(CampaignIndex focal) const;

  /// Every targeted user with a bitmask (bit = roster position) of the
  /// campaigns targeting them, ordered by user id.
  std::vector<std::pair<UserId, std::uint64_t>> membership() const;

 private:
  std::vector<Campaign> campaigns_;
};

/// D_i: one treatment bit per roster position. D_ij = 0 whenever the user is
/// outside TA_j.
class TreatmentAssignment {
 public:
  TreatmentAssignment() = default;
  TreatmentAssignment(UserId user, BitVector bits) : user_(user), bits_(bits) {}

  UserId user() const { return user_; }
  const BitVector& bits() const { return bits_; }
  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t position) const { return bits_[position]; }

  /// D_{i,-j}: the assignment with the focal coordinate dropped.
  BitVector partial(std::size_t focal_position) const;

 private:
  UserId user_ = 0;
  BitVector bits_;
};

/// Removes coordinate `drop` from a bit vector, shifting higher coordinates down.
BitVector drop_coordinate(const BitVector& v, std::size_t drop);

/// Inverse of drop_coordinate: inserts `value` at coordinate `at`.
BitVector insert_coordinate(const BitVector& v, std::size_t at, bool value);

/// Assignments for every user of an experiment, ordered by user id.
class AssignmentTable {
 public:
  AssignmentTable() = default;
  explicit AssignmentTable(std::vector<TreatmentAssignment> rows);

  const std::vector<TreatmentAssignment>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  const TreatmentAssignment* find(UserId user) const;

 private:
  std::vector<TreatmentAssignment> rows_;
};

/// P_j(q): users of TA_j targeted by exactly the competitor set O_jq.
struct AudiencePartition {
  int label = 0;                             // q, 1-based
  std::vector<CampaignIndex> competitors;    // O_jq, ascending
  std::vector<UserId> members;               // ascending
};

/// All partitions of one focal advertiser's audience.
struct FocalPartitions {
  CampaignIndex focal = 0;
  std::vector<CampaignIndex> competitors;    // every other campaign, ascending
  std::vector<AudiencePartition> partitions;
  std::vector<UserId> audience;              // TA_j, ascending
  std::vector<int> labels;                   // labels[i] is the partition of audience[i]

  std::size_t size() const { return partitions.size(); }
  /// Partition label of a user, or 0 when the user is outside TA_j.
  int label_of(UserId user) const;
  const AudiencePartition& partition(int label) const { return partitions.at(static_cast<std::size_t>(label - 1)); }
  /// O_jq as a mask over the focal's competitor coordinates.
  BitVector competitor_mask(int label) const;
};

/// One entry per roster position.
using PartitionIndex = std::vector<FocalPartitions>;

/// Groups each TA_j by the exact set of other advertisers targeting the user.
/// Labels are ordered by competitor-set size, then by ascending campaign
/// indices, so they do not depend on user order.
PartitionIndex build_partitions(const Roster& roster);

struct AssumptionCheck {
  CampaignIndex focal = 0;
  int partition = 0;
  std::vector<CampaignIndex> members;               // {j} and O_jq, ascending
  std::size_t users = 0;
  std::vector<double> shares;                        // empirical sigma_h per member
  std::vector<CampaignIndex> overlap_violations;     // sigma_h in {0, 1}
  std::vector<BitVector> support_a_violations;       // mixed arm combos below the minimum count
  bool all_test_occupied = false;
  bool all_control_occupied = false;

  bool clean() const {
    return overlap_violations.empty() && support_a_violations.empty() && all_test_occupied &&
           all_control_occupied;
  }
};

/// Overlap and full-support diagnostics per (focal, partition). Report only.
/// Combos are BitVectors over `members`; support A covers every combo except
/// all-test and all-control, which support B covers.
std::vector<AssumptionCheck> check_assumptions(const Roster& roster, const PartitionIndex& partitions,
                                               const AssignmentTable& assignments,
                                               std::size_t min_cell = 1,
                                               std::size_t max_members = 24);

using StateOfWorld = BitVector;

/// All 2^n degenerate states over n competitors, lexicographic by campaign index.
std::vector<StateOfWorld> enumerate_states(std::size_t n_competitors, std::size_t cap = 24);

}  // namespace parexp
