#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parexp/ate_calculus.hpp"
#include "parexp/config.hpp"
#include "parexp/diagnostics.hpp"
#include "parexp/estimators.hpp"
#include "parexp/kernel.hpp"
#include "parexp/marketplace.hpp"
#include "parexp/oracle.hpp"

namespace parexp {

inline constexpr const char* kCovariateNames[4] = {"page_visits", "cart_creations", "orders", "sales"};

/// Pre-period covariates for one user, drawn independently of assignment.
std::vector<double> pre_period_covariates(std::uint64_t seed, UserId user);

struct Simulation {
  ExperimentConfig config;
  PartitionIndex partitions;
  AssignmentTable assignments;
  std::vector<Session> sessions;
  std::vector<OutcomeRecord> outcomes;
  std::vector<OracleRow> oracle;  // empty when oracle_replications is 0
};

/// Assignment, sessions, outcomes and (optionally) the oracle table for one config.
Simulation simulate(const ExperimentConfig& config, unsigned threads = 1, bool with_oracle = true);

/// The inputs estimate needs, rebuilt from exposure and outcome logs alone:
/// audiences and arms come from outcomes.csv, partitions from the audiences.
struct Dataset {
  Roster roster;
  PartitionIndex partitions;
  AssignmentTable assignments;
  std::vector<OutcomeRecord> outcomes;
  std::vector<AuctionRecord> records;
};

Dataset reconstruct(std::vector<OutcomeRecord> outcomes, std::vector<AuctionRecord> records);
Dataset load_dataset(const std::filesystem::path& dir);

enum class Method { cells, kernel, interaction };

struct EstimateOptions {
  Method method = Method::cells;
  double split = 0.1;             // kernel training fraction; 0 = no split
  std::size_t min_cell = 2;
  std::optional<double> lambda;   // forces a common bandwidth, skipping CV
  CampaignIndex rival = kNoAd;    // interaction; kNoAd = auto
  bool all_users = false;         // skip eligibility sampling
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct FocalEstimate {
  CampaignIndex focal = kNoAd;
  AteTable table;
  std::optional<Bandwidths> bandwidths;
  std::optional<InteractionFit> interaction;
  CampaignIndex rival = kNoAd;
  std::size_t sample_users = 0;
  std::size_t train_rows = 0;
  std::size_t estimate_rows = 0;
};

/// Campaign sharing the most pre-filter queues with `focal`; ties go to the
/// lower index. Throws IdentificationError when no queue is shared.
CampaignIndex auto_rival(std::span<const AuctionRecord> records, CampaignIndex focal);

/// True when a user falls in the kernel training sample.
bool in_training(std::uint64_t seed, UserId user, double fraction);

FocalEstimate estimate_focal(const Dataset& data, CampaignIndex focal, const EstimateOptions& options);

struct SimulateArgs {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
  unsigned threads = 1;
  bool compress = false;
  bool oracle = true;
};

struct EstimateArgs {
  std::filesystem::path in;
  std::filesystem::path out;
  CampaignIndex focal = kNoAd;  // kNoAd = every campaign
  EstimateOptions options;
};

struct CalculusArgs {
  std::filesystem::path in;                  // directory with outcomes.csv
  std::filesystem::path table;               // AteTable or oracle CSV
  std::filesystem::path out;
  std::optional<std::filesystem::path> beliefs;  // config file with [belief]/[joint]
  CampaignIndex focal = kNoAd;
  int partition = 0;                         // 0 = largest competitor set
  CampaignIndex rival = kNoAd;               // 0 = first competitor of the partition
  double sigma = 0.7;
  std::size_t grid = 21;
};

struct DiagnoseArgs {
  std::filesystem::path in;
  std::filesystem::path out;
  std::optional<std::filesystem::path> config;  // target shares; 0.7 otherwise
  double target = 0.7;
};

/// Each command writes its outputs atomically and a JSON manifest with input
/// and output digests, and returns the manifest path.
std::filesystem::path run_simulate(const SimulateArgs& args);
std::filesystem::path run_estimate(const EstimateArgs& args);
std::filesystem::path run_calculus(const CalculusArgs& args);
std::filesystem::path run_diagnose(const DiagnoseArgs& args);

}  // namespace parexp
