#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "parexp/core.hpp"
#include "parexp/oracle.hpp"

namespace parexp {

/// One user's contribution to focal j's regression.
struct Observation {
  UserId user = 0;
  BitVector d;        // D_{i,-j}
  int partition = 0;  // s, 1-based
  bool treated = false;
  double y = 0.0;
};

struct FocalData {
  CampaignIndex focal = kNoAd;
  std::size_t competitors = 0;  // width of d
  int partitions = 0;           // Q_j
  std::vector<Observation> rows;
};

/// Joins outcomes with assignments and partition labels for one focal
/// campaign. When `sample` is given (sorted), only those users are kept.
FocalData focal_data(const Roster& roster, const FocalPartitions& partitions, const AssignmentTable& assignments,
                     std::span<const OutcomeRecord> outcomes, const std::vector<UserId>* sample = nullptr);

struct CellKey {
  BitVector d;
  int partition = 0;

  auto operator<=>(const CellKey& other) const {
    if (auto c = partition <=> other.partition; c != 0) return c;
    return d <=> other.d;
  }
  bool operator==(const CellKey&) const = default;
};

enum class CellFlag { ok, low_support, not_identified };

const char* to_string(CellFlag flag);

struct CellEstimate {
  double alpha = 0.0;
  double tau = 0.0;
  double se_alpha = 0.0;
  double se_tau = 0.0;
  std::size_t n_test = 0;
  std::size_t n_control = 0;
  CellFlag flag = CellFlag::ok;
};

/// Identified cells live in `cells`; one-armed cells are listed in `excluded`
/// with their counts and never carry estimates.
struct AteTable {
  CampaignIndex focal = kNoAd;
  std::size_t competitors = 0;
  std::map<CellKey, CellEstimate> cells;
  std::map<CellKey, CellEstimate> excluded;

  const CellEstimate* find(const CellKey& key) const;
};

/// Difference in arm means with HC0 two-sample standard errors. One-armed
/// input returns flag not_identified; fewer than `min_per_arm` in either arm
/// returns low_support.
CellEstimate cell_ols(std::span<const double> test, std::span<const double> control, std::size_t min_per_arm = 2);

/// Saturated regression on cell dummies and their interactions with D_ij,
/// solved through its block-diagonal normal equations with an HC0 sandwich.
AteTable stacked_ols(const FocalData& data, std::size_t min_per_arm = 2);

/// Cell OLS over the whole sample.
CellEstimate pooled_ols(const FocalData& data);

struct InteractionFit {
  std::array<double, 4> coef{};     // alpha, beta1, beta2, beta3
  std::array<double, 4> se{};       // HC0
  std::array<double, 4> p_value{};  // two-sided normal
  std::array<std::size_t, 4> counts{};  // (dj, dk) = 00, 10, 01, 11
};

/// OLS of y on [1, dj, dk, dj*dk]. Throws IdentificationError naming the
/// first empty (dj, dk) cell.
InteractionFit interaction_ols(std::span<const std::uint8_t> dj, std::span<const std::uint8_t> dk,
                               std::span<const double> y);

/// Two-sided standard normal p-value of a z statistic.
double normal_two_sided(double z);

}  // namespace parexp
