// Exit gates for the whole library: prints one PASS/FAIL line per criterion and
// returns nonzero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parexp/ate_calculus.hpp"
#include "parexp/diagnostics.hpp"
#include "parexp/estimators.hpp"
#include "parexp/io.hpp"
#include "parexp/kernel.hpp"
#include "parexp/pipeline.hpp"
#include "parexp/scenarios.hpp"

using namespace parexp;
namespace fs = std::filesystem;

namespace {

unsigned g_threads = 8;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

FocalData focal_of(const ExperimentConfig& cfg, const Simulation& sim, CampaignIndex focal) {
  const std::size_t pos = cfg.roster.require_position(focal);
  return focal_data(cfg.roster, sim.partitions[pos], sim.assignments, sim.outcomes);
}

// ---------------------------------------------------------------------------

std::string three_firms(int users) {
  return "[experiment]\nusers = " + std::to_string(users) + R"(
slots = 2
arrival_mean = 3
queue_jitter = 0.4
noise_scale = 1.0
oracle_replications = 0
covariates = false

[campaign]
index = 1
audience = all
share = 0.7
bid = 1.0
baseline = 2.0
effect = 1.0
spill.2 = 0.3
spill.3 = -0.2
interact.2 = -0.5
interact.3 = 0.4

[campaign]
index = 2
audience = all
share = 0.7
bid = 1.4
baseline = 1.0
effect = 0.5

[campaign]
index = 3
audience = all
share = 0.7
bid = 0.8
baseline = 1.0
effect = 0.3
)";
}

Outcome identification() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig base = parse_config(three_firms(100000));
  const std::vector<CampaignIndex> comps{2, 3};
  std::map<BitVector, OracleEstimate> truth;
  for (const auto& s : enumerate_states(2))
    truth[s] = true_degenerate_ate(base.outcomes, base.roster, base.market, 1, comps, s, 100000, 999, g_threads);
  const double oracle_secs = seconds_since(t0);

  int hits = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const ExperimentConfig cfg = parse_config(three_firms(100000), seed);
    const Simulation sim = simulate(cfg, g_threads, false);
    const AteTable table = stacked_ols(focal_of(cfg, sim, 1));
    for (const auto& [state, o] : truth) {
      ++total;
      const CellEstimate* e = table.find({state, 1});
      if (e != nullptr && std::abs(e->tau - o.tau) <= 3.0 * std::hypot(e->se_tau, o.mc_se)) ++hits;
    }
  }
  const double secs = seconds_since(t0);
  const double rate = static_cast<double>(hits) / total;
  return {rate >= 0.95 && secs < 60.0, std::to_string(hits) + "/" + std::to_string(total) +
                                           " cells within 3 combined ses (need >= 95%), " + fmt("%.1f", secs) +
                                           " s (limit 60 s, oracle " + fmt("%.1f", oracle_secs) + " s)"};
}

// ---------------------------------------------------------------------------

constexpr const char* kTwoFirms = R"(
[experiment]
users = 10
slots = 8
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

Outcome convexity() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = parse_config(kTwoFirms, 7);
  const std::size_t R = 200000;
  const std::vector<CampaignIndex> comps{2};
  const auto t_off = true_degenerate_ate(cfg.outcomes, cfg.roster, cfg.market, 1, comps, BitVector(0, 1), R, 7, g_threads);
  const auto t_on = true_degenerate_ate(cfg.outcomes, cfg.roster, cfg.market, 1, comps, BitVector(1, 1), R, 7, g_threads);
  bool ok = true;
  std::string detail;
  for (double sigma : {0.3, 0.7}) {
    const auto mixed = forced_world_ate(cfg.outcomes, cfg.roster, cfg.market, {1, comps, {sigma}}, R, 7, g_threads);
    const double predicted = mix_sigma(t_off.tau, t_on.tau, sigma);
    const double se = std::sqrt(mixed.mc_se * mixed.mc_se + std::pow((1 - sigma) * t_off.mc_se, 2) +
                                std::pow(sigma * t_on.mc_se, 2));
    const double z = std::abs(mixed.tau - predicted) / se;
    ok = ok && z <= 3.0;
    detail += "sigma=" + fmt("%.1f", sigma) + ": world " + fmt("%.4f", mixed.tau) + " vs mixture " +
              fmt("%.4f", predicted) + " (" + fmt("%.2f", z) + " ses); ";
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 30.0, detail + fmt("%.1f", secs) + " s (limit 30 s)"};
}

// ---------------------------------------------------------------------------

FocalData synthetic_focal(std::uint64_t seed, std::size_t rows, std::size_t width, int partitions, double heterogeneity,
                          double noise) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution bit(0.7);
  std::uniform_int_distribution<int> part(1, partitions);
  std::normal_distribution<double> eps(0.0, noise);
  std::uniform_real_distribution<double> mag(1.0, 2.0);
  std::vector<double> a(width), c(width);
  for (std::size_t v = 0; v < width; ++v) {
    a[v] = (v % 2 == 0 ? 1.0 : -1.0) * heterogeneity * mag(rng);
    c[v] = heterogeneity * mag(rng);
  }
  FocalData data;
  data.focal = 1;
  data.competitors = width;
  data.partitions = partitions;
  for (std::size_t i = 0; i < rows; ++i) {
    Observation o;
    o.user = i + 1;
    std::uint64_t b = 0;
    double alpha = 1.0, tau = 0.5;
    for (std::size_t v = 0; v < width; ++v) {
      if (bit(rng)) {
        b |= std::uint64_t{1} << v;
        alpha += a[v];
        tau += c[v];
      }
    }
    o.d = BitVector(b, width);
    o.partition = part(rng);
    alpha += heterogeneity * o.partition;
    o.treated = bit(rng);
    o.y = alpha + (o.treated ? tau : 0.0) + eps(rng);
    data.rows.push_back(std::move(o));
  }
  return data;
}

Outcome kernel_reductions() {
  std::vector<FocalData> datasets;
  for (std::uint64_t s = 1; s <= 10; ++s) datasets.push_back(synthetic_focal(s, 2000 + 500 * s, 1 + s % 5, 1 + static_cast<int>(s % 3), 0.5, 1.0));
  for (std::uint64_t s = 11; s <= 15; ++s) datasets.push_back(synthetic_focal(s, 20000, 8, 1, 0.0, 1.0));
  {
    const ExperimentConfig cfg = parse_config(three_firms(20000), 3);
    const Simulation sim = simulate(cfg, g_threads, false);
    for (CampaignIndex j = 1; j <= 3; ++j) datasets.push_back(focal_of(cfg, sim, j));
  }
  {
    const ExperimentConfig cfg = load_config(fs::path(PAREXP_SOURCE_DIR) / "configs" / "three_campaigns.ini");
    const Simulation sim = simulate(cfg, g_threads, false);
    for (CampaignIndex j = 1; j <= 3; ++j) datasets.push_back(focal_of(cfg, sim, j));
  }
  double worst0 = 0.0, worst1 = 0.0;
  std::size_t cells = 0;
  for (const auto& data : datasets) {
    const KernelData kd(data);
    const AteTable table = stacked_ols(data);
    const CellEstimate pooled = pooled_ols(data);
    const std::vector<double> zero(kd.dims(), 0.0), one(kd.dims(), 1.0);
    for (const auto& [key, e] : table.cells) {
      const KernelTheta t0 = kernel_theta(kd, key, zero);
      const KernelTheta t1 = kernel_theta(kd, key, one);
      worst0 = std::max({worst0, rel_err(t0.alpha, e.alpha), rel_err(t0.tau, e.tau)});
      worst1 = std::max({worst1, rel_err(t1.alpha, pooled.alpha), rel_err(t1.tau, pooled.tau)});
      ++cells;
    }
  }
  return {worst0 <= 1e-10 && worst1 <= 1e-10,
          std::to_string(datasets.size()) + " datasets, " + std::to_string(cells) + " cells; max rel error " +
              fmt("%.2e", worst0) + " at lambda=0, " + fmt("%.2e", worst1) + " at lambda=1 (limit 1e-10)"};
}

// ---------------------------------------------------------------------------

Outcome cv_behavior() {
  const auto t0 = std::chrono::steady_clock::now();
  int pooled = 0, sharp = 0;
  std::size_t coords = 0, null_high = 0, sharp_low = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CvOptions opt;
    opt.seed = seed;
    opt.threads = g_threads;
    {
      const KernelData kd(synthetic_focal(1000 + seed, 50000, 8, 1, 0.0, 1.0));
      const Bandwidths bw = cv_bandwidths(kd, opt);
      bool all_high = true;
      for (std::size_t v = 0; v < kd.dims(); ++v)
        if (kd.active()[v]) {
          all_high = all_high && bw.lambda[v] >= 0.9;
          null_high += bw.lambda[v] >= 0.9;
          ++coords;
        }
      pooled += all_high;
    }
    {
      const KernelData kd(synthetic_focal(2000 + seed, 50000, 8, 1, 1.0, 0.05));
      const Bandwidths bw = cv_bandwidths(kd, opt);
      bool all_low = true;
      for (std::size_t v = 0; v < kd.dims(); ++v)
        if (kd.active()[v]) {
          all_low = all_low && bw.lambda[v] <= 0.1;
          sharp_low += bw.lambda[v] <= 0.1;
        }
      sharp += all_low;
    }
  }
  const double secs = seconds_since(t0);
  return {pooled >= 18 && sharp >= 18 && secs < 300.0,
          "no-heterogeneity " + std::to_string(pooled) + "/20 with every lambda >= 0.9 (" +
              std::to_string(null_high) + "/" + std::to_string(coords) + " coordinates), sharp " + std::to_string(sharp) +
              "/20 with every lambda <= 0.1 (" + std::to_string(sharp_low) + "/" + std::to_string(coords) +
              " coordinates), " + fmt("%.1f", secs) + " s (limit 300 s)"};
}

// ---------------------------------------------------------------------------

Outcome interaction_recovery() {
  const double b0 = 2.0, b1 = 0.4, b2 = 0.25, b3 = 0.5 * b1;
  int covered = 0, within3 = 0;
  double ratio = 0.0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    std::mt19937_64 rng(7000 + rep);
    std::bernoulli_distribution pj(0.7), pk(0.7);
    std::normal_distribution<double> eps;
    std::vector<std::uint8_t> dj, dk;
    std::vector<double> y;
    for (int i = 0; i < 20000; ++i) {
      const int a = pj(rng), b = pk(rng);
      dj.push_back(static_cast<std::uint8_t>(a));
      dk.push_back(static_cast<std::uint8_t>(b));
      // noise scale differs by cell so the robust errors matter
      y.push_back(b0 + b1 * a + b2 * b + b3 * a * b + (0.8 + 0.6 * a + 0.4 * b) * eps(rng));
    }
    const InteractionFit fit = interaction_ols(dj, dk, y);
    covered += std::abs(fit.coef[3] - b3) <= 1.959963984540054 * fit.se[3];
    within3 += std::abs(fit.coef[3] - b3) <= 3.0 * fit.se[3];
    ratio += fit.coef[3] / fit.coef[1] / reps;
  }
  const double coverage = static_cast<double>(covered) / reps;
  const double share3 = static_cast<double>(within3) / reps;
  return {coverage >= 0.90 && share3 >= 0.99,
          "95% CI coverage " + fmt("%.3f", coverage) + " (need >= 0.90), within 3 ses " + fmt("%.3f", share3) +
              " (need >= 0.99), mean beta3/beta1 " + fmt("%.3f", ratio) + " (truth 0.5)"};
}

// ---------------------------------------------------------------------------

Outcome logging_invariants() {
  std::string cfg = "[experiment]\nusers = 340000\nslots = 8\narrival_mean = 3\nqueue_jitter = 0.5\noracle_replications = 0\n";
  for (int k = 1; k <= 16; ++k)
    cfg += "[campaign]\nindex = " + std::to_string(k) + "\naudience = random:0.35\nshare = 0.7\nbid = " +
           format_double(0.5 + 0.15 * k) + "\n";
  ExperimentConfig config = parse_config(cfg, 11);
  config.covariates = false;
  const Simulation sim = simulate(config, g_threads, false);
  std::size_t records = 0, exposure = 0, head = 0, membership = 0, repeats = 0;
  for (const auto& s : sim.sessions) {
    const TreatmentAssignment* row = sim.assignments.find(s.user);
    std::set<CampaignIndex> targeted;
    for (const auto& c : config.roster.campaigns())
      if (c.targets(s.user)) targeted.insert(c.index);
    std::vector<CampaignIndex> shown;
    for (const auto& r : s.records) {
      ++records;
      if (r.slot == 1) shown.clear();
      if (r.served != kNoAd && (row == nullptr || !(*row)[config.roster.require_position(r.served)])) ++exposure;
      if (r.served != kNoAd && std::count(shown.begin(), shown.end(), r.served) > 0) ++repeats;
      if (r.served != kNoAd) shown.push_back(r.served);
      if ((r.queue.empty() ? kNoAd : r.queue.front()) != r.counterfactual) ++head;
      if (std::set<CampaignIndex>(r.queue.begin(), r.queue.end()) != targeted) ++membership;
    }
  }
  const bool ok = records >= 1000000 && exposure == 0 && head == 0 && membership == 0 && repeats == 0;
  return {ok, std::to_string(records) + " records; exposure violations " + std::to_string(exposure) +
                  ", counterfactual-head violations " + std::to_string(head) + ", queue-membership violations " +
                  std::to_string(membership) + ", repeated ads in one serve " + std::to_string(repeats)};
}

// ---------------------------------------------------------------------------

Outcome balance_meta() {
  const fs::path dir = fs::temp_directory_path() / "parexp_acceptance_balance";
  int quiet = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const ScenarioReport r = replicate("balance", dir, seed, g_threads);
    quiet += r.passed();
  }
  fs::remove_all(dir);
  return {quiet >= 45, std::to_string(quiet) + "/50 seeds where KS does not reject at 5% (need >= 45)"};
}

// ---------------------------------------------------------------------------

Outcome heterogeneity_structure() {
  const auto t0 = std::chrono::steady_clock::now();
  // Focal 1 and eight competitors. Nine slots and nine auctions per user show
  // every eligible ad once, so exposure equals assignment. Competitor 2
  // strengthens the focal effect, competitor 3 weakens it, the rest weaken it
  // less. Competitor shares of one half give every state about 200 users.
  std::string cfg = "[experiment]\nusers = 50000\nslots = 9\narrival = fixed\narrival_mean = 9\nnoise_scale = 0.5\n"
                    "oracle_replications = 0\ncovariates = false\n";
  cfg += "[campaign]\nindex = 1\naudience = all\nshare = 0.7\nbid = 1\nbaseline = 2\neffect = 1\n"
         "spill.2 = 0.4\ninteract.2 = 0.4\nspill.3 = -0.4\ninteract.3 = -1.2\n";
  for (int k = 4; k <= 9; ++k) cfg += "interact." + std::to_string(k) + " = -0.4\n";
  for (int k = 2; k <= 9; ++k)
    cfg += "[campaign]\nindex = " + std::to_string(k) + "\naudience = all\nshare = 0.5\nbid = " +
           format_double(1.0 + 0.1 * k) + "\n";
  const ExperimentConfig config = parse_config(cfg, 5);
  const Simulation sim = simulate(config, g_threads, false);
  const FocalData data = focal_of(config, sim, 1);
  const KernelData kd(data);
  CvOptions opt;
  opt.seed = 5;
  opt.threads = g_threads;
  const Bandwidths bw = cv_bandwidths(kd, opt);
  const AteTable table = kernel_table(kd, 1, bw.lambda);
  const StateTable states = state_table(table, sim.partitions[0], 1);
  if (states.tau.size() != 256) return {false, "only " + std::to_string(states.tau.size()) + " of 256 states identified"};

  std::vector<StateTau> taus;
  for (const auto& [s, t] : states.tau) taus.push_back({s, t});
  const HeterogeneitySummary h = heterogeneity_summary(taus, pooled_ols(data).tau);
  const bool spill = first_order_dominates(h.cdf_on[0], h.cdf_off[0]);
  const bool steal = first_order_dominates(h.cdf_off[1], h.cdf_on[1]);
  bool monotone = true;
  std::string medians;
  for (std::size_t c = 0; c < h.by_count.size(); ++c) {
    medians += (c ? " " : "") + fmt("%.2f", h.by_count[c].median);
    if (c > 0) monotone = monotone && h.by_count[c].median <= h.by_count[c - 1].median;
  }
  const double secs = seconds_since(t0);
  return {spill && steal && monotone && secs < 300.0,
          std::string("spillover on-CDF dominates: ") + (spill ? "yes" : "no") + ", stealing off-CDF dominates: " +
              (steal ? "yes" : "no") + ", medians by count [" + medians + "] nonincreasing: " +
              (monotone ? "yes" : "no") + ", " + fmt("%.1f", secs) + " s (limit 300 s)"};
}

// ---------------------------------------------------------------------------

Outcome scenario_curves() {
  // One auction per user with a single slot; every competitor outbids the
  // focal campaign, so any advertising competitor blocks it.
  const std::string cfg =
      "[experiment]\nusers = 10\nslots = 1\narrival = fixed\narrival_mean = 1\nnoise_scale = 0\n"
      "oracle_replications = 200\n"
      "[campaign]\nindex = 1\naudience = all\nbid = 1\nbaseline = 1\neffect = 1\n"
      "[campaign]\nindex = 2\naudience = all\nbid = 2\n"
      "[campaign]\nindex = 3\naudience = all\nbid = 3\n"
      "[campaign]\nindex = 4\naudience = all\nbid = 4\n";
  const ExperimentConfig config = parse_config(cfg, 1);
  const PartitionIndex parts = build_partitions(config.roster);
  const auto rows = oracle_table(config.outcomes, config.roster, {parts[0]}, config.market, 200, 1, 8, g_threads);
  const StateTable table = state_table(rows, parts[0], 1);
  table.require_complete();

  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
  const double sigma = 0.7;
  const auto aligned = scenario_curve(table, grid, ScenarioMode::aligned, sigma);
  const auto independent = scenario_curve(table, grid, ScenarioMode::independent, sigma);
  const double on = table.at(BitVector::parse("111")), off = table.at(BitVector::parse("000"));

  double worst = 0.0;
  auto exact = [&](double a, double b) { worst = std::max(worst, rel_err(a, b)); };
  exact(aligned.front().value, on);
  exact(independent.front().value, on);
  exact(aligned.back().value, sigma * on + (1 - sigma) * off);
  for (CampaignIndex k : table.competitors) {
    const std::vector<double> ends{0.0, 1.0};
    const auto curve = competitor_curve(table, k, ends);
    double tau_on = 0, tau_off = 0;
    const std::size_t pos = table.position(k);
    for (const auto& [s, t] : table.tau) (s[pos] ? tau_on : tau_off) += t / 4.0;
    exact(curve[0].value, tau_off);
    exact(curve[1].value, tau_on);
    const auto surface = experimentation_surface(table, k, sigma, grid, grid);
    const auto full = competitor_curve(table, k, grid);
    for (const auto& pt : surface) {
      if (pt.y == 0.0) exact(pt.value, full[static_cast<std::size_t>(std::lround(pt.x * 20))].value);
      if (pt.x == 0.0) exact(pt.value, tau_off);
    }
  }
  auto range = [](const std::vector<CurvePoint>& c) {
    double lo = c.front().value, hi = lo;
    for (const auto& p : c) lo = std::min(lo, p.value), hi = std::max(hi, p.value);
    return hi - lo;
  };
  const double ra = range(aligned), ri = range(independent);
  const double gap = ri > 0 ? ra / ri : std::numeric_limits<double>::infinity();
  return {worst <= 1e-12 && gap >= 5.0,
          "endpoint identities max rel error " + fmt("%.1e", worst) + "; range aligned " + fmt("%.4f", ra) +
              " vs independent " + fmt("%.4f", ri) + " (" + fmt("%.1f", gap) + "x, need >= 5x)"};
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> tree_digest(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = file_sha256(e.path());
  return out;
}

void full_pipeline(const fs::path& cfg, const fs::path& out, unsigned threads) {
  fs::remove_all(out);
  SimulateArgs s;
  s.config = cfg;
  s.out = out / "sim";
  s.threads = threads;
  run_simulate(s);
  EstimateArgs e;
  e.in = out / "sim";
  e.out = out / "cells";
  e.options.threads = threads;
  e.options.all_users = true;
  run_estimate(e);
  e.out = out / "kernel";
  e.options.method = Method::kernel;
  e.options.all_users = false;
  run_estimate(e);
  CalculusArgs c;
  c.in = out / "sim";
  c.table = out / "cells" / "ate_table.csv";
  c.out = out / "calc";
  c.beliefs = cfg;
  c.focal = 1;
  run_calculus(c);
  DiagnoseArgs d;
  d.in = out / "sim";
  d.out = out / "diag";
  d.config = cfg;
  run_diagnose(d);
}

Outcome determinism() {
  const fs::path cfg = fs::path(PAREXP_SOURCE_DIR) / "configs" / "three_campaigns.ini";
  const fs::path base = fs::temp_directory_path() / "parexp_acceptance_det";
  full_pipeline(cfg, base / "run1_t1", 1);
  full_pipeline(cfg, base / "run2_t1", 1);
  full_pipeline(cfg, base / "run3_t8", 8);
  const auto a = tree_digest(base / "run1_t1");
  const auto b = tree_digest(base / "run2_t1");
  const auto c = tree_digest(base / "run3_t8");
  std::size_t differing = 0;
  for (const auto& [name, digest] : a) {
    if (!b.count(name) || b.at(name) != digest) ++differing;
    if (!c.count(name) || c.at(name) != digest) ++differing;
  }
  const bool ok = !a.empty() && a.size() == b.size() && a.size() == c.size() && differing == 0;
  fs::remove_all(base);
  return {ok, std::to_string(a.size()) + " files compared across 2 runs and threads {1, 8}; " +
                  std::to_string(differing) + " digest mismatches"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance gates"};
  std::vector<int> only;
  app.add_option("--threads", g_threads, "Worker threads")->check(CLI::Range(1U, 256U));
  app.add_option("--only", only, "Run only these criterion numbers");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"identification", identification},
      {"convexity", convexity},
      {"kernel reductions", kernel_reductions},
      {"CV behavior", cv_behavior},
      {"interaction regression", interaction_recovery},
      {"logging invariants", logging_invariants},
      {"balance meta-test", balance_meta},
      {"heterogeneity structure", heterogeneity_structure},
      {"scenario curves", scenario_curves},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("threw: ") + e.what()};
    }
    failures += r.passed ? 0 : 1;
    std::cout << (r.passed ? "PASS" : "FAIL") << " A" << number << " " << criteria[i].first << ": " << r.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
