#include "parexp/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "parexp/ate_calculus.hpp"
#include "parexp/config.hpp"
#include "parexp/diagnostics.hpp"
#include "parexp/io.hpp"
#include "parexp/pipeline.hpp"

namespace parexp {

bool ScenarioReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

std::string ScenarioReport::text() const {
  std::string out;
  for (const auto& c : checks) out += std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
  return out;
}

std::vector<std::string> scenario_names() { return {"two_firm", "overlap_table", "balance"}; }

namespace {

constexpr const char* kTwoFirm = R"(
[experiment]
users = 20000
slots = 8
arrival = geometric
arrival_mean = 3
noise_scale = 1.0
oracle_replications = 0

[campaign]
index = 1
audience = all
share = 0.7
bid = 1.0
baseline = 2.0
effect = 1.0
spill.2 = 0.3
interact.2 = -0.6

[campaign]
index = 2
audience = all
share = 0.7
bid = 2.0
baseline = 1.0
effect = 0.5
)";

std::string sixteen_campaigns(double audience_share, bool covariates) {
  std::string cfg = "[experiment]\nusers = 20000\nslots = 8\narrival_mean = 3\noracle_replications = 0\ncovariates = ";
  cfg += covariates ? "true\n" : "false\n";
  for (int k = 1; k <= 16; ++k) {
    cfg += "\n[campaign]\nindex = " + std::to_string(k) + "\naudience = random:" + format_double(audience_share) +
           "\nshare = 0.7\nbid = " + format_double(1.0 + 0.1 * k) + "\nbaseline = 1\neffect = 0.2\n";
  }
  return cfg;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

ScenarioReport two_firm(const std::filesystem::path& out, std::uint64_t seed, unsigned threads) {
  ScenarioReport report;
  report.scenario = "two_firm";
  const ExperimentConfig cfg = parse_config(kTwoFirm, seed);
  const Simulation sim = simulate(cfg, threads, false);
  Dataset data;
  data.roster = cfg.roster;
  data.partitions = sim.partitions;
  data.assignments = sim.assignments;
  data.outcomes = sim.outcomes;
  EstimateOptions opt;
  opt.all_users = true;
  const FocalEstimate est = estimate_focal(data, 1, opt);

  const std::size_t R = 20000;
  const auto& fp = sim.partitions[0];
  const auto& part = fp.partition(1);
  std::string csv = "state,tau_hat,se,tau_oracle,mc_se\n";
  double oracle_tau[2] = {0.0, 0.0}, oracle_se[2] = {0.0, 0.0};
  for (int w = 0; w < 2; ++w) {
    const StateOfWorld state(static_cast<std::uint64_t>(w), 1);
    const OracleEstimate o =
        true_degenerate_ate(cfg.outcomes, cfg.roster, cfg.market, 1, part.competitors, state, R, seed, threads);
    oracle_tau[w] = o.tau;
    oracle_se[w] = o.mc_se;
    const CellEstimate* e = est.table.find({state, 1});
    if (e == nullptr) {
      report.checks.push_back({"cell omega_k=" + std::to_string(w), false, "cell not identified"});
      continue;
    }
    const double se = std::hypot(e->se_tau, o.mc_se);
    const double gap = std::abs(e->tau - o.tau);
    report.checks.push_back({"tau(omega_k=" + std::to_string(w) + ") vs oracle", gap <= 3.0 * se,
                             "estimate " + fmt(e->tau) + ", oracle " + fmt(o.tau) + ", |gap| " + fmt(gap) +
                                 " <= 3 x " + fmt(se)});
    csv += state.to_string() + ',' + format_double(e->tau) + ',' + format_double(e->se_tau) + ',' +
           format_double(o.tau) + ',' + format_double(o.mc_se) + '\n';
  }
  for (double sigma : {0.3, 0.7}) {
    ForcedWorld world{1, part.competitors, {sigma}};
    const OracleEstimate mixed = forced_world_ate(cfg.outcomes, cfg.roster, cfg.market, world, R, seed, threads);
    const double predicted = mix_sigma(oracle_tau[0], oracle_tau[1], sigma);
    const double se = std::sqrt(mixed.mc_se * mixed.mc_se + std::pow((1 - sigma) * oracle_se[0], 2) +
                                std::pow(sigma * oracle_se[1], 2));
    const double gap = std::abs(mixed.tau - predicted);
    report.checks.push_back({"tau(sigma=" + fmt(sigma) + ") is the sigma mixture", gap <= 3.0 * se,
                             "simulated " + fmt(mixed.tau) + ", mixture " + fmt(predicted) + ", |gap| " + fmt(gap) +
                                 " <= 3 x " + fmt(se)});
    csv += "sigma=" + format_double(sigma) + ",,," + format_double(mixed.tau) + ',' + format_double(mixed.mc_se) + '\n';
  }
  write_file_atomic(out / "two_firm.csv", csv);
  return report;
}

ScenarioReport overlap_table(const std::filesystem::path& out, std::uint64_t seed, unsigned threads) {
  ScenarioReport report;
  report.scenario = "overlap_table";
  const ExperimentConfig cfg = parse_config(sixteen_campaigns(0.25, false), seed);
  const Simulation sim = simulate(cfg, threads, false);
  std::map<std::size_t, std::size_t> exposed_hist, targeted_hist;
  std::size_t users = 0;
  for (const auto& s : sim.sessions) {
    std::set<CampaignIndex> served;
    for (const auto& r : s.records)
      if (r.served != kNoAd) served.insert(r.served);
    ++exposed_hist[served.size()];
    ++users;
  }
  for (const auto& [user, mask] : cfg.roster.membership()) ++targeted_hist[static_cast<std::size_t>(std::popcount(mask))];
  std::string csv = "campaigns,users_targeted,users_exposed,share_exposed\n";
  std::size_t total_exposed = 0, total_targeted = 0;
  for (std::size_t c = 0; c <= cfg.roster.size(); ++c) {
    const std::size_t t = targeted_hist.count(c) ? targeted_hist[c] : 0;
    const std::size_t e = exposed_hist.count(c) ? exposed_hist[c] : 0;
    total_exposed += e;
    total_targeted += t;
    csv += std::to_string(c) + ',' + std::to_string(t) + ',' + std::to_string(e) + ',' +
           format_double(static_cast<double>(e) / static_cast<double>(users)) + '\n';
  }
  write_file_atomic(out / "overlap_table.csv", csv);
  report.checks.push_back({"exposure counts cover every user", total_exposed == users,
                           std::to_string(total_exposed) + " of " + std::to_string(users)});
  report.checks.push_back({"targeting counts cover every targeted user", total_targeted == sim.assignments.size(),
                           std::to_string(total_targeted) + " of " + std::to_string(sim.assignments.size())});
  const bool overlapping = targeted_hist.size() > 2;
  report.checks.push_back({"audiences overlap", overlapping,
                           std::to_string(targeted_hist.size()) + " distinct targeting counts"});
  return report;
}

ScenarioReport balance(const std::filesystem::path& out, std::uint64_t seed, unsigned threads) {
  ScenarioReport report;
  report.scenario = "balance";
  const ExperimentConfig cfg = parse_config(sixteen_campaigns(0.3, true), seed);
  const AssignmentTable assignments = assign_all(cfg.roster, SplitSeed{derive_seed(cfg.seed, Stream::assignment)});
  (void)threads;
  std::vector<double> ps;
  std::vector<std::string> names(kCovariateNames, kCovariateNames + 4);
  for (std::size_t p = 0; p < cfg.roster.size(); ++p) {
    std::vector<std::vector<double>> rows;
    std::vector<Arm> arms;
    for (UserId u : cfg.roster.at(p).audience) {
      rows.push_back(pre_period_covariates(cfg.seed, u));
      arms.push_back((*assignments.find(u))[p] ? Arm::test : Arm::control);
    }
    ps.push_back(balance_test(rows, arms, names));
  }
  std::string csv = "uniform,empirical\n";
  for (const auto& [u, v] : uniform_quantile_pairs(ps)) csv += format_double(u) + ',' + format_double(v) + '\n';
  write_file_atomic(out / "balance_quantiles.csv", csv);
  const KsResult ks = ks_uniformity(ps);
  report.checks.push_back({"balance p-values look uniform", ks.p_value > 0.05,
                           "KS statistic " + fmt(ks.statistic) + ", p " + fmt(ks.p_value)});
  return report;
}

}  // namespace

ScenarioReport replicate(const std::string& scenario, const std::filesystem::path& out, std::uint64_t seed,
                         unsigned threads) {
  ScenarioReport report;
  if (scenario == "two_firm") {
    report = two_firm(out, seed, threads);
  } else if (scenario == "overlap_table") {
    report = overlap_table(out, seed, threads);
  } else if (scenario == "balance") {
    report = balance(out, seed, threads);
  } else {
    throw ConfigError("unknown scenario '" + scenario + "'");
  }
  write_file_atomic(out / "report.txt", report.text());
  return report;
}

}  // namespace parexp
