#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parexp/core.hpp"
#include "parexp/estimators.hpp"
#include "parexp/oracle.hpp"

namespace parexp {

/// (1 - sigma) tau0 + sigma tau1. Throws std::invalid_argument for sigma outside [0, 1].
double mix_sigma(double tau0, double tau1, double sigma);

/// Beliefs of the focal advertiser about one competitor's next-period behaviour.
struct CompetitorBelief {
  CampaignIndex competitor = kNoAd;
  double p_not_adv = 0.0;      // p_j(0)
  double p_adv_not_exp = 1.0;  // p_j(1)
  double p_adv_exp = 0.0;      // p*_j(1)
  double share = 0.7;          // sigma_k if the competitor experiments

  /// p_j(omega) + p*_j(1) sigma^omega (1 - sigma)^(1 - omega).
  double weight(bool omega) const;
};

struct BeliefProfile {
  std::vector<CompetitorBelief> competitors;  // ascending competitor index
  /// Joint weights over states of `joint_competitors`; replaces the factored
  /// weights when present.
  std::vector<CampaignIndex> joint_competitors;
  std::optional<std::map<StateOfWorld, double>> joint;

  /// Throws ConfigError when a belief is outside [0,1] or the masses do not sum to 1.
  void validate() const;
  const CompetitorBelief* find(CampaignIndex k) const;
};

/// Degenerate ATEs of one (focal, partition) indexed by states over O_jq.
struct StateTable {
  CampaignIndex focal = kNoAd;
  int partition = 0;
  std::vector<CampaignIndex> competitors;  // O_jq, ascending
  std::map<StateOfWorld, double> tau;

  /// Throws std::invalid_argument listing the first state that is absent.
  void require_complete() const;
  double at(const StateOfWorld& state) const;
  std::size_t position(CampaignIndex k) const;
};

/// The cell estimate at d = omega on O_jq and 0 elsewhere equals the degenerate
/// ATE of state omega. Cells absent from the table are left out of the result.
StateTable state_table(const AteTable& table, const FocalPartitions& partitions, int partition);
StateTable state_table(std::span<const OracleRow> rows, const FocalPartitions& partitions, int partition);

/// sum over states of p_{j,omega}(sigma) tau_j(omega). Competitors without a
/// belief are an error; beliefs about advertisers outside O_jq integrate out.
double prospective_ate(const StateTable& table, const BeliefProfile& beliefs);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;  // unused by one-dimensional curves
  double value = 0.0;
};

/// p tau_bar(omega_k = 1) + (1 - p) tau_bar(omega_k = 0), where tau_bar averages
/// over the other competitors' states (unweighted, or with `others` beliefs).
std::vector<CurvePoint> competitor_curve(const StateTable& table, CampaignIndex k, std::span<const double> grid,
                                         const BeliefProfile* others = nullptr, bool normalize = false);

/// Prospective ATE over a (p_adv, p_exp) grid for competitor k with share sigma.
/// Other competitors are averaged as in competitor_curve.
std::vector<CurvePoint> experimentation_surface(const StateTable& table, CampaignIndex k, double sigma,
                                                std::span<const double> p_adv_grid,
                                                std::span<const double> p_exp_grid,
                                                const BeliefProfile* others = nullptr);

enum class ScenarioMode { aligned, independent };

/// Every competitor advertises; with probability p_exp they experiment, either
/// one at a time (independent) or as one block (aligned).
std::vector<CurvePoint> scenario_curve(const StateTable& table, std::span<const double> p_exp_grid, ScenarioMode mode,
                                       double sigma = 0.7);

}  // namespace parexp
