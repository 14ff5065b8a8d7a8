#include "parexp/ate_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace parexp {

namespace {

void require_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " outside [0,1]");
}

}  // namespace

double mix_sigma(double tau0, double tau1, double sigma) {
  require_unit(sigma, "mix_sigma: sigma");
  return (1.0 - sigma) * tau0 + sigma * tau1;
}

double CompetitorBelief::weight(bool omega) const {
  return (omega ? p_adv_not_exp : p_not_adv) + p_adv_exp * (omega ? share : 1.0 - share);
}

const CompetitorBelief* BeliefProfile::find(CampaignIndex k) const {
  for (const auto& b : competitors)
    if (b.competitor == k) return &b;
  return nullptr;
}

void BeliefProfile::validate() const {
  for (const auto& b : competitors) {
    const std::string who = "belief about campaign " + std::to_string(b.competitor);
    for (double v : {b.p_not_adv, b.p_adv_not_exp, b.p_adv_exp, b.share})
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(who + ": probability outside [0,1]");
    if (std::abs(b.p_not_adv + b.p_adv_not_exp + b.p_adv_exp - 1.0) > 1e-12)
      throw ConfigError(who + ": p_not_adv + p_adv_not_exp + p_adv_exp must equal 1");
  }
  if (joint) {
    double total = 0.0;
    for (const auto& [state, p] : *joint) {
      if (state.size() != joint_competitors.size()) throw ConfigError("joint belief: state width mismatch");
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("joint belief: probability outside [0,1]");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("joint belief: weights sum to " + std::to_string(total));
  }
}

void StateTable::require_complete() const {
  for (const auto& s : enumerate_states(competitors.size()))
    if (!tau.contains(s))
      throw std::invalid_argument("state table for campaign " + std::to_string(focal) + " partition " +
                                  std::to_string(partition) + " is missing state " + s.to_string());
}

double StateTable::at(const StateOfWorld& state) const {
  auto it = tau.find(state);
  if (it == tau.end()) throw std::invalid_argument("state table: missing state " + state.to_string());
  return it->second;
}

std::size_t StateTable::position(CampaignIndex k) const {
  auto it = std::find(competitors.begin(), competitors.end(), k);
  return it == competitors.end() ? std::numeric_limits<std::size_t>::max()
                                 : static_cast<std::size_t>(it - competitors.begin());
}

namespace {

/// Positions of O_jq within the focal's full competitor list.
std::vector<std::size_t> present_positions(const FocalPartitions& partitions, int partition) {
  const BitVector mask = partitions.competitor_mask(partition);
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < mask.size(); ++c)
    if (mask[c]) out.push_back(c);
  return out;
}

std::uint64_t spread(const StateOfWorld& local, const std::vector<std::size_t>& positions) {
  std::uint64_t bits = 0;
  for (std::size_t l = 0; l < positions.size(); ++l)
    if (local[l]) bits |= std::uint64_t{1} << positions[l];
  return bits;
}

}  // namespace

StateTable state_table(const AteTable& table, const FocalPartitions& partitions, int partition) {
  StateTable out;
  out.focal = partitions.focal;
  out.partition = partition;
  out.competitors = partitions.partition(partition).competitors;
  const auto positions = present_positions(partitions, partition);
  for (const auto& local : enumerate_states(positions.size())) {
    const CellKey key{BitVector(spread(local, positions), partitions.competitors.size()), partition};
    if (const auto* e = table.find(key)) out.tau.emplace(local, e->tau);
  }
  return out;
}

StateTable state_table(std::span<const OracleRow> rows, const FocalPartitions& partitions, int partition) {
  StateTable out;
  out.focal = partitions.focal;
  out.partition = partition;
  out.competitors = partitions.partition(partition).competitors;
  const auto positions = present_positions(partitions, partition);
  for (const auto& r : rows) {
    if (r.focal != partitions.focal || r.partition != partition) continue;
    std::uint64_t bits = 0;
    for (std::size_t l = 0; l < positions.size(); ++l)
      if (r.state[positions[l]]) bits |= std::uint64_t{1} << l;
    out.tau[BitVector(bits, positions.size())] = r.estimate.tau;
  }
  return out;
}

double prospective_ate(const StateTable& table, const BeliefProfile& beliefs) {
  table.require_complete();
  const std::size_t n = table.competitors.size();
  std::map<StateOfWorld, double> weights;

  if (beliefs.joint) {
    std::vector<std::size_t> where(n);
    for (std::size_t l = 0; l < n; ++l) {
      auto it = std::find(beliefs.joint_competitors.begin(), beliefs.joint_competitors.end(), table.competitors[l]);
      if (it == beliefs.joint_competitors.end())
        throw std::invalid_argument("prospective_ate: joint belief does not cover campaign " +
                                    std::to_string(table.competitors[l]));
      where[l] = static_cast<std::size_t>(it - beliefs.joint_competitors.begin());
    }
    for (const auto& [state, p] : *beliefs.joint) {
      std::uint64_t bits = 0;
      for (std::size_t l = 0; l < n; ++l)
        if (state[where[l]]) bits |= std::uint64_t{1} << l;
      weights[BitVector(bits, n)] += p;
    }
  } else {
    std::vector<const CompetitorBelief*> per(n);
    for (std::size_t l = 0; l < n; ++l) {
      per[l] = beliefs.find(table.competitors[l]);
      if (per[l] == nullptr)
        throw std::invalid_argument("prospective_ate: no belief about campaign " +
                                    std::to_string(table.competitors[l]));
    }
    for (const auto& state : enumerate_states(n)) {
      double w = 1.0;
      for (std::size_t l = 0; l < n; ++l) w *= per[l]->weight(state[l]);
      weights[state] = w;
    }
  }

  double total = 0.0, value = 0.0;
  for (const auto& [state, w] : weights) {
    total += w;
    if (w != 0.0) value += w * table.at(state);
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("prospective_ate: weights sum to " + std::to_string(total));
  return value;
}

namespace {

/// tau_bar(omega_k = 0) and tau_bar(omega_k = 1), averaging the other coordinates.
std::pair<double, double> averaged(const StateTable& table, CampaignIndex k, const BeliefProfile* others) {
  table.require_complete();
  const std::size_t n = table.competitors.size();
  const std::size_t pos = table.position(k);
  double num[2] = {0.0, 0.0}, den[2] = {0.0, 0.0};
  for (const auto& [state, tau] : table.tau) {
    double w = 1.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == pos || others == nullptr) continue;
      const auto* b = others->find(table.competitors[l]);
      if (b == nullptr)
        throw std::invalid_argument("competitor_curve: no belief about campaign " +
                                    std::to_string(table.competitors[l]));
      w *= b->weight(state[l]);
    }
    if (pos == std::numeric_limits<std::size_t>::max()) {
      // k does not target this partition: its state is irrelevant.
      for (int a = 0; a < 2; ++a) {
        num[a] += w * tau;
        den[a] += w;
      }
    } else {
      const int a = state[pos] ? 1 : 0;
      num[a] += w * tau;
      den[a] += w;
    }
  }
  if (!(den[0] > 0.0) || !(den[1] > 0.0)) throw std::invalid_argument("competitor_curve: zero averaging weight");
  return {num[0] / den[0], num[1] / den[1]};
}

}  // namespace

std::vector<CurvePoint> competitor_curve(const StateTable& table, CampaignIndex k, std::span<const double> grid,
                                         const BeliefProfile* others, bool normalize) {
  const auto [tau0, tau1] = averaged(table, k, others);
  std::vector<CurvePoint> out;
  double scale = 0.0;
  for (double p : grid) {
    require_unit(p, "competitor_curve: grid value");
    const double v = p * tau1 + (1.0 - p) * tau0;
    out.push_back({p, 0.0, v});
    scale = std::max(scale, std::abs(v));
  }
  if (normalize && scale > 0.0)
    for (auto& pt : out) pt.value /= scale;
  return out;
}

std::vector<CurvePoint> experimentation_surface(const StateTable& table, CampaignIndex k, double sigma,
                                                std::span<const double> p_adv_grid,
                                                std::span<const double> p_exp_grid, const BeliefProfile* others) {
  require_unit(sigma, "experimentation_surface: sigma");
  const auto [tau0, tau1] = averaged(table, k, others);
  std::vector<CurvePoint> out;
  for (double p_adv : p_adv_grid) {
    require_unit(p_adv, "experimentation_surface: p_adv");
    for (double p_exp : p_exp_grid) {
      require_unit(p_exp, "experimentation_surface: p_exp");
      CompetitorBelief b;
      b.competitor = k;
      b.p_not_adv = 1.0 - p_adv;
      b.p_adv_not_exp = p_adv * (1.0 - p_exp);
      b.p_adv_exp = p_adv * p_exp;
      b.share = sigma;
      out.push_back({p_adv, p_exp, b.weight(true) * tau1 + b.weight(false) * tau0});
    }
  }
  return out;
}

std::vector<CurvePoint> scenario_curve(const StateTable& table, std::span<const double> p_exp_grid, ScenarioMode mode,
                                       double sigma) {
  require_unit(sigma, "scenario_curve: sigma");
  table.require_complete();
  const std::size_t n = table.competitors.size();
  const double all_on = table.at(BitVector(n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1, n));
  const double all_off = table.at(BitVector(0, n));
  std::vector<CurvePoint> out;
  for (double p : p_exp_grid) {
    require_unit(p, "scenario_curve: p_exp");
    double v = 0.0;
    if (mode == ScenarioMode::aligned) {
      v = (1.0 - p) * all_on + p * (sigma * all_on + (1.0 - sigma) * all_off);
    } else {
      BeliefProfile beliefs;
      for (CampaignIndex k : table.competitors) {
        CompetitorBelief b;
        b.competitor = k;
        b.p_not_adv = 0.0;
        b.p_adv_not_exp = 1.0 - p;
        b.p_adv_exp = p;
        b.share = sigma;
        beliefs.competitors.push_back(b);
      }
      v = prospective_ate(table, beliefs);
    }
    out.push_back({p, 0.0, v});
  }
  return out;
}

}  // namespace parexp
