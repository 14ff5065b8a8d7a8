#include "parexp/randomize.hpp"

#include <stdexcept>

namespace parexp {

Arm assign(std::uint64_t user_id, std::uint64_t campaign_index, SplitSeed seed, double share) {
  return split_uniform(user_id, campaign_index, seed) < share ? Arm::test : Arm::control;
}

double empirical_share(std::span<const Arm> arms) {
  if (arms.empty()) throw std::invalid_argument("empirical_share: no assignments");
  std::size_t test = 0;
  for (Arm a : arms)
    if (a == Arm::test) ++test;
  return static_cast<double>(test) / static_cast<double>(arms.size());
}

AssignmentTable assign_all(const Roster& roster, SplitSeed seed) {
  std::vector<TreatmentAssignment> rows;
  for (const auto& [user, mask] : roster.membership()) {
    std::uint64_t bits = 0;
    for (std::size_t p = 0; p < roster.size(); ++p) {
      if (!((mask >> p) & 1U)) continue;
      const auto& c = roster.at(p);
      if (assign(user, c.index, seed, c.treatment_share) == Arm::test) bits |= std::uint64_t{1} << p;
    }
    rows.emplace_back(user, BitVector(bits, roster.size()));
  }
  return AssignmentTable(std::move(rows));
}

}  // namespace parexp
