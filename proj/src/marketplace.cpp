#include "parexp/marketplace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "parexp/parallel.hpp"

namespace parexp {

std::vector<CampaignIndex> rank_queue(std::vector<Bidder> bidders) {
  for (const auto& b : bidders)
    if (!(b.score >= 0.0)) throw std::invalid_argument("rank_queue: negative or NaN score");
  std::sort(bidders.begin(), bidders.end(), [](const Bidder& a, const Bidder& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  std::vector<CampaignIndex> out;
  out.reserve(bidders.size());
  for (const auto& b : bidders) out.push_back(b.index);
  return out;
}

ServeResult serve(std::span<const CampaignIndex> queue, const Roster& roster, const TreatmentAssignment& assignment,
                  std::span<const CampaignIndex> already_shown) {
  return serve(
      queue, [&](CampaignIndex c) { return assignment[roster.require_position(c)]; }, already_shown);
}

unsigned ArrivalModel::draw(Engine& engine) const {
  if (kind == Kind::fixed) return static_cast<unsigned>(std::lround(mean));
  const double excess = mean - static_cast<double>(shift);
  if (excess < 0.0) throw std::invalid_argument("ArrivalModel: mean below shift");
  if (excess == 0.0) return shift;
  std::geometric_distribution<unsigned> g(1.0 / (1.0 + excess));
  return shift + g(engine);
}

std::uint64_t simulate_session(const Roster& roster, std::uint64_t targeting, std::uint64_t eligible,
                               const MarketConfig& config, Engine& engine, UserId user,
                               std::vector<AuctionRecord>* records) {
  if (config.slots < 1) throw std::invalid_argument("simulate_session: slots must be >= 1");
  const unsigned auctions = config.arrivals.draw(engine);

  std::array<std::size_t, kMaxCampaigns> positions{};
  std::size_t n = 0;
  for (std::size_t p = 0; p < roster.size(); ++p)
    if ((targeting >> p) & 1U) positions[n++] = p;

  std::vector<Bidder> bidders(n);
  std::vector<CampaignIndex> shown;
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uint64_t exposed = 0;

  for (unsigned t = 0; t < auctions; ++t) {
    const int slot = static_cast<int>(t % static_cast<unsigned>(config.slots)) + 1;
    if (slot == 1) shown.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = roster.at(positions[i]);
      double score = quality_score(c);
      if (config.queue_jitter > 0.0) score *= std::exp(config.queue_jitter * jitter(engine));
      bidders[i] = {c.index, score};
    }
    const auto queue = rank_queue(bidders);
    const auto result = serve(
        queue, [&](CampaignIndex c) { return ((eligible >> roster.require_position(c)) & 1U) != 0; }, shown);
    if (result.served != kNoAd) {
      shown.push_back(result.served);
      exposed |= std::uint64_t{1} << roster.require_position(result.served);
    }
    if (records != nullptr) {
      records->push_back({t, user, slot, queue, result.served, result.counterfactual});
    }
  }
  return exposed;
}

Session run_session(UserId user, const Roster& roster, const TreatmentAssignment& assignment,
                    const MarketConfig& config, std::uint64_t seed) {
  if (assignment.size() != roster.size())
    throw std::invalid_argument("run_session: assignment width does not match roster");
  std::uint64_t targeting = 0;
  for (std::size_t p = 0; p < roster.size(); ++p)
    if (roster.at(p).targets(user)) targeting |= std::uint64_t{1} << p;
  Session s;
  s.user = user;
  Engine engine = make_engine(seed, Stream::arrivals, user);
  simulate_session(roster, targeting, assignment.bits().bits() & targeting, config, engine, user, &s.records);
  return s;
}

std::vector<Session> simulate_market(const Roster& roster, const AssignmentTable& assignments,
                                     const MarketConfig& config, std::uint64_t seed, unsigned threads) {
  const auto membership = roster.membership();
  const auto& rows = assignments.rows();
  auto sessions = parallel_map<Session>(rows.size(), threads, [&](std::size_t i) {
    const auto& row = rows[i];
    auto it = std::lower_bound(membership.begin(), membership.end(), row.user(),
                               [](const auto& m, UserId u) { return m.first < u; });
    const std::uint64_t targeting = (it != membership.end() && it->first == row.user()) ? it->second : 0;
    Session s;
    s.user = row.user();
    Engine engine = make_engine(seed, Stream::arrivals, row.user());
    simulate_session(roster, targeting, row.bits().bits() & targeting, config, engine, row.user(), &s.records);
    return s;
  });
  std::uint64_t next_id = 0;
  for (auto& s : sessions)
    for (auto& r : s.records) r.auction_id = next_id++;
  return sessions;
}

std::vector<UserId> eligible_sample(std::span<const AuctionRecord> records, CampaignIndex focal) {
  std::vector<UserId> out;
  for (const auto& r : records)
    if (r.served == focal || r.counterfactual == focal) out.push_back(r.user);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<UserId> eligible_sample(std::span<const Session> sessions, CampaignIndex focal) {
  std::vector<UserId> out;
  for (const auto& s : sessions) {
    for (const auto& r : s.records) {
      if (r.served == focal || r.counterfactual == focal) {
        out.push_back(s.user);
        break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t exposure_mask(const Session& session, const Roster& roster) {
  std::uint64_t mask = 0;
  for (const auto& r : session.records)
    if (r.served != kNoAd) mask |= std::uint64_t{1} << roster.require_position(r.served);
  return mask;
}

}  // namespace parexp
