#include "parexp/core.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace parexp {

bool Campaign::targets(UserId user) const {
  return std::binary_search(audience.begin(), audience.end(), user);
}

Roster::Roster(std::vector<Campaign> campaigns) : campaigns_(std::move(campaigns)) {
  if (campaigns_.empty()) throw ConfigError("campaign roster is empty");
  if (campaigns_.size() > kMaxCampaigns)
    throw ConfigError("at most " + std::to_string(kMaxCampaigns) + " campaigns are supported");
  std::sort(campaigns_.begin(), campaigns_.end(),
            [](const Campaign& a, const Campaign& b) { return a.index < b.index; });
  for (std::size_t p = 0; p < campaigns_.size(); ++p) {
    auto& c = campaigns_[p];
    if (c.index == kNoAd) throw ConfigError("campaign index must be >= 1");
    if (p > 0 && campaigns_[p - 1].index == c.index)
      throw ConfigError("duplicate campaign index " + std::to_string(c.index));
    if (!(c.treatment_share >= 0.0 && c.treatment_share <= 1.0))
      throw ConfigError("campaign " + std::to_string(c.index) + ": share outside [0,1]");
    if (!(c.base_bid >= 0.0) || !(c.quality >= 0.0))
      throw ConfigError("campaign " + std::to_string(c.index) + ": bid and quality must be nonnegative");
    std::sort(c.audience.begin(), c.audience.end());
    c.audience.erase(std::unique(c.audience.begin(), c.audience.end()), c.audience.end());
  }
}

const Campaign& Roster::by_index(CampaignIndex index) const {
  return campaigns_[require_position(index)];
}

std::optional<std::size_t> Roster::position_of(CampaignIndex index) const {
  auto it = std::lower_bound(campaigns_.begin(), campaigns_.end(), index,
                             [](const Campaign& c, CampaignIndex i) { return c.index < i; });
  if (it == campaigns_.end() || it->index != index) return std::nullopt;
  return static_cast<std::size_t>(it - campaigns_.begin());
}

std::size_t Roster::require_position(CampaignIndex index) const {
  auto p = position_of(index);
  if (!p) throw ConfigError("unknown campaign index " + std::to_string(index));
  return *p;
}

std::vector<CampaignIndex> Roster::competitors_of(CampaignIndex focal) const {
  std::vector<CampaignIndex> out;
  for (const auto& c : campaigns_)
    if (c.index != focal) out.push_back(c.index);
  return out;
}

std::vector<std::pair<UserId, std::uint64_t>> Roster::membership() const {
  std::vector<std::pair<UserId, std::uint64_t>> pairs;
  std::size_t total = 0;
  for (const auto& c : campaigns_) total += c.audience.size();
  pairs.reserve(total);
  for (std::size_t p = 0; p < campaigns_.size(); ++p)
    for (UserId u : campaigns_[p].audience) pairs.emplace_back(u, std::uint64_t{1} << p);
  std::sort(pairs.begin(), pairs.end());
  std::vector<std::pair<UserId, std::uint64_t>> out;
  for (const auto& [u, m] : pairs) {
    if (!out.empty() && out.back().first == u)
      out.back().second |= m;
    else
      out.emplace_back(u, m);
  }
  return out;
}

BitVector drop_coordinate(const BitVector& v, std::size_t drop) {
  if (drop >= v.size()) throw std::out_of_range("drop_coordinate: coordinate out of range");
  const std::uint64_t low = v.bits() & ((std::uint64_t{1} << drop) - 1);
  const std::uint64_t high = drop + 1 < 64 ? (v.bits() >> (drop + 1)) << drop : 0;
  return BitVector(low | high, v.size() - 1);
}

BitVector insert_coordinate(const BitVector& v, std::size_t at, bool value) {
  if (at > v.size()) throw std::out_of_range("insert_coordinate: coordinate out of range");
  const std::uint64_t low = v.bits() & ((std::uint64_t{1} << at) - 1);
  const std::uint64_t high = (v.bits() >> at) << (at + 1);
  const std::uint64_t mid = value ? (std::uint64_t{1} << at) : 0;
  return BitVector(low | mid | high, v.size() + 1);
}

BitVector TreatmentAssignment::partial(std::size_t focal_position) const {
  return drop_coordinate(bits_, focal_position);
}

AssignmentTable::AssignmentTable(std::vector<TreatmentAssignment> rows) : rows_(std::move(rows)) {
  std::sort(rows_.begin(), rows_.end(),
            [](const TreatmentAssignment& a, const TreatmentAssignment& b) { return a.user() < b.user(); });
}

const TreatmentAssignment* AssignmentTable::find(UserId user) const {
  auto it = std::lower_bound(rows_.begin(), rows_.end(), user,
                             [](const TreatmentAssignment& a, UserId u) { return a.user() < u; });
  if (it == rows_.end() || it->user() != user) return nullptr;
  return &*it;
}

int FocalPartitions::label_of(UserId user) const {
  auto it = std::lower_bound(audience.begin(), audience.end(), user);
  if (it == audience.end() || *it != user) return 0;
  return labels[static_cast<std::size_t>(it - audience.begin())];
}

BitVector FocalPartitions::competitor_mask(int label) const {
  const auto& part = partition(label);
  std::uint64_t bits = 0;
  for (CampaignIndex k : part.competitors) {
    auto it = std::lower_bound(competitors.begin(), competitors.end(), k);
    bits |= std::uint64_t{1} << static_cast<std::size_t>(it - competitors.begin());
  }
  return BitVector(bits, competitors.size());
}

PartitionIndex build_partitions(const Roster& roster) {
  if (roster.size() == 0) throw ConfigError("campaign roster is empty");
  for (const auto& c : roster.campaigns())
    if (c.audience.empty())
      throw ConfigError("campaign " + std::to_string(c.index) + " has an empty audience");

  const auto membership = roster.membership();
  PartitionIndex index;
  index.reserve(roster.size());
  for (std::size_t j = 0; j < roster.size(); ++j) {
    FocalPartitions fp;
    fp.focal = roster.at(j).index;
    fp.competitors = roster.competitors_of(fp.focal);

    // Competitor-set signature per audience member, as a mask over competitor coordinates.
    std::vector<std::uint64_t> signature;
    for (const auto& [user, mask] : membership) {
      if (!((mask >> j) & 1U)) continue;
      fp.audience.push_back(user);
      signature.push_back(drop_coordinate(BitVector(mask, roster.size()), j).bits());
    }

    auto set_of = [&](std::uint64_t sig) {
      std::vector<CampaignIndex> set;
      for (std::size_t c = 0; c < fp.competitors.size(); ++c)
        if ((sig >> c) & 1U) set.push_back(fp.competitors[c]);
      return set;
    };
    std::vector<std::uint64_t> distinct(signature);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::sort(distinct.begin(), distinct.end(), [&](std::uint64_t a, std::uint64_t b) {
      const int ca = std::popcount(a), cb = std::popcount(b);
      if (ca != cb) return ca < cb;
      return set_of(a) < set_of(b);
    });

    std::map<std::uint64_t, int> label_of_signature;
    for (std::size_t q = 0; q < distinct.size(); ++q) {
      label_of_signature[distinct[q]] = static_cast<int>(q + 1);
      fp.partitions.push_back({static_cast<int>(q + 1), set_of(distinct[q]), {}});
    }
    fp.labels.reserve(fp.audience.size());
    for (std::size_t i = 0; i < fp.audience.size(); ++i) {
      const int label = label_of_signature.at(signature[i]);
      fp.labels.push_back(label);
      fp.partitions[static_cast<std::size_t>(label - 1)].members.push_back(fp.audience[i]);
    }
    index.push_back(std::move(fp));
  }
  return index;
}

std::vector<AssumptionCheck> check_assumptions(const Roster& roster, const PartitionIndex& partitions,
                                               const AssignmentTable& assignments, std::size_t min_cell,
                                               std::size_t max_members) {
  std::vector<AssumptionCheck> out;
  for (const auto& fp : partitions) {
    for (const auto& part : fp.partitions) {
      AssumptionCheck check;
      check.focal = fp.focal;
      check.partition = part.label;
      check.members = part.competitors;
      check.members.push_back(fp.focal);
      std::sort(check.members.begin(), check.members.end());
      if (check.members.size() > max_members)
        throw std::invalid_argument("check_assumptions: partition has too many advertisers to enumerate");

      std::vector<std::size_t> positions;
      for (CampaignIndex h : check.members) positions.push_back(roster.require_position(h));

      const std::size_t width = check.members.size();
      std::vector<std::size_t> combo_count(std::size_t{1} << width, 0);
      std::vector<std::size_t> test_count(width, 0);
      for (UserId u : part.members) {
        const auto* row = assignments.find(u);
        if (row == nullptr)
          throw std::invalid_argument("check_assumptions: no assignment for user " + std::to_string(u));
        std::uint64_t combo = 0;
        for (std::size_t h = 0; h < width; ++h) {
          if ((*row)[positions[h]]) {
            combo |= std::uint64_t{1} << h;
            ++test_count[h];
          }
        }
        ++combo_count[combo];
        ++check.users;
      }

      for (std::size_t h = 0; h < width; ++h) {
        const double share =
            check.users == 0 ? 0.0 : static_cast<double>(test_count[h]) / static_cast<double>(check.users);
        check.shares.push_back(share);
        if (share <= 0.0 || share >= 1.0) check.overlap_violations.push_back(check.members[h]);
      }
      const std::uint64_t all = (std::uint64_t{1} << width) - 1;
      for (std::uint64_t combo = 0; combo <= all; ++combo) {
        if (combo == 0 || combo == all) continue;
        if (combo_count[combo] < min_cell) check.support_a_violations.emplace_back(combo, width);
      }
      std::sort(check.support_a_violations.begin(), check.support_a_violations.end());
      check.all_test_occupied = combo_count[all] >= min_cell;
      check.all_control_occupied = combo_count[0] >= min_cell;
      out.push_back(std::move(check));
    }
  }
  return out;
}

std::vector<StateOfWorld> enumerate_states(std::size_t n_competitors, std::size_t cap) {
  if (n_competitors > cap)
    throw std::length_error("enumerate_states: " + std::to_string(n_competitors) +
                            " competitors exceeds the cap of " + std::to_string(cap));
  if (n_competitors > 63) throw std::length_error("enumerate_states: too many competitors");
  const std::uint64_t count = std::uint64_t{1} << n_competitors;
  std::vector<StateOfWorld> out;
  out.reserve(count);
  // State number s has coordinate c equal to bit (n-1-c) of s, so increasing s
  // walks the lexicographic order.
  for (std::uint64_t s = 0; s < count; ++s) {
    std::uint64_t bits = 0;
    for (std::size_t c = 0; c < n_competitors; ++c)
      if ((s >> (n_competitors - 1 - c)) & 1U) bits |= std::uint64_t{1} << c;
    out.emplace_back(bits, n_competitors);
  }
  return out;
}

}  // namespace parexp
