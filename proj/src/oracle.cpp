#include "parexp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>

#include "parexp/parallel.hpp"

namespace parexp {

FocalEffects OutcomeModel::effects_for(CampaignIndex focal) const {
  for (const auto& e : effects)
    if (e.focal == focal) return e;
  FocalEffects none;
  none.focal = focal;
  return none;
}

void OutcomeModel::validate(const Roster& roster) const {
  if (!(noise_scale >= 0.0)) throw ConfigError("outcome model: noise scale must be nonnegative");
  auto check = [&](CampaignIndex c) {
    if (!roster.position_of(c))
      throw ConfigError("outcome model references unknown campaign " + std::to_string(c));
  };
  for (const auto& e : effects) {
    check(e.focal);
    for (const auto& [k, v] : e.spill) check(k);
    for (const auto& [k, v] : e.interact) check(k);
  }
}

double expected_outcome(const FocalEffects& effects, const Roster& roster, std::uint64_t exposure) {
  auto exposed = [&](CampaignIndex c) {
    auto p = roster.position_of(c);
    return p && ((exposure >> *p) & 1U);
  };
  const bool own = exposed(effects.focal);
  double mean = effects.baseline + (own ? effects.own_effect : 0.0);
  for (const auto& [k, g] : effects.spill)
    if (exposed(k)) mean += g;
  if (own) {
    for (const auto& [k, eta] : effects.interact)
      if (exposed(k)) mean += eta;
  }
  return mean;
}

double draw_outcome(double mean, const OutcomeModel& model, Engine& engine) {
  if (model.noise == NoiseKind::poisson) {
    if (mean <= 0.0) return 0.0;
    std::poisson_distribution<long long> pois(mean);
    return static_cast<double>(pois(engine));
  }
  double y = mean;
  if (model.noise_scale > 0.0) {
    std::normal_distribution<double> eps(0.0, model.noise_scale);
    y += eps(engine);
  }
  if (model.floor_at_zero && y < 0.0) y = 0.0;
  return y;
}

std::vector<OutcomeRecord> realize_outcomes(std::span<const Session> sessions, const Roster& roster,
                                            const AssignmentTable& assignments, const OutcomeModel& model,
                                            std::uint64_t noise_seed, unsigned threads) {
  model.validate(roster);
  std::vector<FocalEffects> effects;
  for (const auto& c : roster.campaigns()) effects.push_back(model.effects_for(c.index));

  const auto membership = roster.membership();
  auto per_user = parallel_map<std::vector<OutcomeRecord>>(membership.size(), threads, [&](std::size_t i) {
    const auto [user, mask] = membership[i];
    const auto* row = assignments.find(user);
    if (row == nullptr) throw std::invalid_argument("realize_outcomes: no assignment for user " + std::to_string(user));
    auto it = std::lower_bound(sessions.begin(), sessions.end(), user,
                               [](const Session& s, UserId u) { return s.user < u; });
    const std::uint64_t exposure = (it != sessions.end() && it->user == user) ? exposure_mask(*it, roster) : 0;
    std::vector<OutcomeRecord> out;
    for (std::size_t p = 0; p < roster.size(); ++p) {
      if (!((mask >> p) & 1U)) continue;
      const CampaignIndex focal = roster.at(p).index;
      Engine engine = make_engine(noise_seed, Stream::noise, user, focal);
      const double mean = expected_outcome(effects[p], roster, exposure);
      out.push_back({user, focal, (*row)[p] ? Arm::test : Arm::control, draw_outcome(mean, model, engine)});
    }
    return out;
  });

  std::vector<OutcomeRecord> out;
  for (auto& v : per_user) out.insert(out.end(), v.begin(), v.end());
  return out;
}

namespace {

std::uint64_t world_key(const ForcedWorld& world) {
  std::uint64_t h = finalize64(world.focal);
  for (std::size_t k = 0; k < world.competitors.size(); ++k) {
    h = finalize64(h ^ world.competitors[k]);
    std::uint64_t bits = 0;
    const double e = world.eligibility[k];
    static_assert(sizeof(bits) == sizeof(e));
    std::memcpy(&bits, &e, sizeof(bits));
    h = finalize64(h ^ bits);
  }
  return h;
}

}  // namespace

OracleEstimate forced_world_ate(const OutcomeModel& model, const Roster& roster, const MarketConfig& market,
                                const ForcedWorld& world, std::size_t replications, std::uint64_t seed,
                                unsigned threads) {
  if (replications < 1) throw std::invalid_argument("oracle: replications must be >= 1");
  if (world.eligibility.size() != world.competitors.size())
    throw std::invalid_argument("oracle: one eligibility probability per competitor required");
  for (double e : world.eligibility)
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("oracle: eligibility outside [0,1]");

  const std::size_t focal_pos = roster.require_position(world.focal);
  std::uint64_t targeting = std::uint64_t{1} << focal_pos;
  std::vector<std::size_t> comp_pos;
  for (CampaignIndex k : world.competitors) {
    const std::size_t p = roster.require_position(k);
    if (p == focal_pos) throw std::invalid_argument("oracle: focal listed as its own competitor");
    comp_pos.push_back(p);
    targeting |= std::uint64_t{1} << p;
  }
  const FocalEffects effects = model.effects_for(world.focal);
  const std::uint64_t key = world_key(world);

  // Competitors are ineligible rather than absent when omega_k = 0; serving
  // never reaches an ineligible ad, and keeping it queued holds the random
  // draws of the session fixed across worlds.
  auto diffs = parallel_map<double>(replications, threads, [&](std::size_t r) {
    Engine session = make_engine(seed, Stream::oracle, key, 2 * r);
    Engine draws = make_engine(seed, Stream::oracle, key, 2 * r + 1);
    std::uint64_t eligible = 0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < comp_pos.size(); ++k) {
      const double e = world.eligibility[k];
      const bool on = e >= 1.0 ? true : (e <= 0.0 ? false : unit(draws) < e);
      if (on) eligible |= std::uint64_t{1} << comp_pos[k];
    }
    Engine session_copy = session;
    const std::uint64_t exposed_on =
        simulate_session(roster, targeting, eligible | (std::uint64_t{1} << focal_pos), market, session);
    const std::uint64_t exposed_off = simulate_session(roster, targeting, eligible, market, session_copy);
    Engine noise = draws;
    const double y_on = draw_outcome(expected_outcome(effects, roster, exposed_on), model, noise);
    noise = draws;
    const double y_off = draw_outcome(expected_outcome(effects, roster, exposed_off), model, noise);
    return y_on - y_off;
  });

  double mean = 0.0, m2 = 0.0;
  for (std::size_t r = 0; r < diffs.size(); ++r) {
    const double delta = diffs[r] - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (diffs[r] - mean);
  }
  OracleEstimate est;
  est.tau = mean;
  est.replications = replications;
  est.mc_se = replications > 1 ? std::sqrt(m2 / static_cast<double>(replications - 1) / static_cast<double>(replications))
                               : 0.0;
  return est;
}

OracleEstimate true_degenerate_ate(const OutcomeModel& model, const Roster& roster, const MarketConfig& market,
                                   CampaignIndex focal, std::span<const CampaignIndex> partition_competitors,
                                   const StateOfWorld& state, std::size_t replications, std::uint64_t seed,
                                   unsigned threads) {
  const auto all = roster.competitors_of(focal);
  if (state.size() != all.size())
    throw std::invalid_argument("true_degenerate_ate: state must cover all " + std::to_string(all.size()) +
                                " competitors");
  ForcedWorld world;
  world.focal = focal;
  for (CampaignIndex k : partition_competitors) {
    auto it = std::lower_bound(all.begin(), all.end(), k);
    if (it == all.end() || *it != k) throw std::invalid_argument("true_degenerate_ate: unknown competitor");
    world.competitors.push_back(k);
    world.eligibility.push_back(state[static_cast<std::size_t>(it - all.begin())] ? 1.0 : 0.0);
  }
  return forced_world_ate(model, roster, market, world, replications, seed, threads);
}

std::vector<OracleRow> oracle_table(const OutcomeModel& model, const Roster& roster, const PartitionIndex& partitions,
                                    const MarketConfig& market, std::size_t replications, std::uint64_t seed,
                                    std::size_t max_competitors, unsigned threads) {
  std::vector<OracleRow> rows;
  for (const auto& fp : partitions) {
    for (const auto& part : fp.partitions) {
      if (part.competitors.size() > max_competitors) continue;
      const BitVector present = fp.competitor_mask(part.label);
      for (const auto& local : enumerate_states(part.competitors.size())) {
        // Spread the local state over the partition's competitor coordinates.
        std::uint64_t bits = 0;
        std::size_t l = 0;
        for (std::size_t c = 0; c < present.size(); ++c) {
          if (!present[c]) continue;
          if (local[l]) bits |= std::uint64_t{1} << c;
          ++l;
        }
        const StateOfWorld state(bits, present.size());
        rows.push_back({fp.focal, part.label, state,
                        true_degenerate_ate(model, roster, market, fp.focal, part.competitors, state, replications,
                                            seed, threads)});
      }
    }
  }
  return rows;
}

}  // namespace parexp
