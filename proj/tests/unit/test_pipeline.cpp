#include <doctest.h>

#include <json.hpp>
#include <map>

#include "parexp/io.hpp"
#include "parexp/pipeline.hpp"
#include "parexp/scenarios.hpp"
#include "support.hpp"

using namespace parexp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("parexp_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

constexpr const char* kThree = R"(
[experiment]
users = 3000
seed = 4
slots = 8
queue_jitter = 0.3
oracle_replications = 100

[campaign]
index = 1
audience = all
share = 0.7
bid = 1.0
baseline = 2.0
effect = 1.0
spill.2 = 0.3
interact.3 = -0.4

[campaign]
index = 2
audience = range:1-2000
share = 0.7
bid = 1.5
effect = 0.5

[campaign]
index = 3
audience = every:3:1
share = 0.5
bid = 0.8
effect = 0.2
)";

std::map<std::string, std::string> digests(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) out[e.path().filename().string()] = file_sha256(e.path());
  return out;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(kThree);
  CHECK(cfg.users == 3000);
  CHECK(cfg.seed == 4);
  CHECK(cfg.roster.size() == 3);
  CHECK(cfg.roster.by_index(2).audience.size() == 2000);
  CHECK(cfg.roster.by_index(3).audience.size() == 1000);
  CHECK(cfg.roster.by_index(3).audience.front() == 1);
  CHECK(cfg.outcomes.effects_for(1).spill.at(2) == 0.3);
  CHECK(parse_config(kThree, 99).seed == 99);

  const auto list = parse_config("[experiment]\nusers = 10\n[campaign]\nindex = 1\naudience = list:2|5|7\n");
  CHECK(list.roster.at(0).audience == std::vector<UserId>{2, 5, 7});

  const std::string random_aud = "[experiment]\nusers = 10000\n[campaign]\nindex = 1\naudience = random:0.25\n";
  const auto r1 = parse_config(random_aud, 1), r2 = parse_config(random_aud, 2);
  CHECK(std::abs(static_cast<double>(r1.roster.at(0).audience.size()) - 2500.0) < 200.0);
  CHECK(r1.roster.at(0).audience != r2.roster.at(0).audience);

  try {
    parse_config("[experiment]\nusers = 10\n\n[campaign]\nindex = 1\nshare = 2\n");
    FAIL("expected a config error");
  } catch (const ConfigError&) {
  }
  try {
    parse_config("[experiment]\nusers = ten\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_config("[nonsense]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nusers = 10\n[campaign]\nindex = 1\naudience = range:5-2\n"),
                  ConfigError);
}

TEST_CASE("csv round trips") {
  auto cfg = parse_config(kThree);
  cfg.oracle_replications = 20;
  const auto sim = simulate(cfg, 2, true);
  const auto out = outcomes_csv(sim.outcomes);
  const auto back = parse_outcomes(parse_csv(out));
  REQUIRE(back.size() == sim.outcomes.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].user == sim.outcomes[i].user);
    CHECK(back[i].arm == sim.outcomes[i].arm);
    CHECK(back[i].y == sim.outcomes[i].y);
  }
  CHECK(outcomes_csv(back) == out);

  const auto exp = exposure_csv(sim.sessions);
  const auto records = parse_exposure(parse_csv(exp));
  std::size_t total = 0;
  for (const auto& s : sim.sessions) total += s.records.size();
  CHECK(records.size() == total);

  const auto ocsv = oracle_csv(sim.oracle);
  CHECK(oracle_csv(parse_oracle(parse_csv(ocsv))) == ocsv);

  const auto data = reconstruct(back, records);
  std::vector<AteTable> tables;
  EstimateOptions opt;
  opt.all_users = true;
  for (CampaignIndex j = 1; j <= 3; ++j) tables.push_back(estimate_focal(data, j, opt).table);
  const auto acsv = ate_table_csv(tables);
  CHECK(ate_table_csv(parse_ate_table(parse_csv(acsv))) == acsv);

  CHECK(format_double(std::nan("")) == "");
  CHECK(parse_double(format_double(0.1), "x") == 0.1);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), IoError);
  CHECK_THROWS_AS(parse_double("abc", "x"), IoError);
}

TEST_CASE("atomic and compressed writes") {
  const auto dir = scratch("io");
  write_file_atomic(dir / "a.txt", "hello\n");
  CHECK(read_file(dir / "a.txt") == "hello\n");
  write_file_atomic(dir / "b.csv.gz", "x,y\n1,2\n", true);
  CHECK(read_file(dir / "b.csv.gz") == "x,y\n1,2\n");
  const auto first = file_sha256(dir / "b.csv.gz");
  write_file_atomic(dir / "b.csv.gz", "x,y\n1,2\n", true);
  CHECK(file_sha256(dir / "b.csv.gz") == first);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  CHECK(files == 2);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK_THROWS_AS(read_file(dir / "missing"), IoError);
}

TEST_CASE("one advertiser logs one row per auction") {
  const auto cfg = parse_config(
      "[experiment]\nusers = 100\narrival_mean = 4\noracle_replications = 0\n[campaign]\nindex = 1\naudience = all\n");
  const auto sim = simulate(cfg, 1, false);
  std::size_t auctions = 0;
  for (const auto& s : sim.sessions) auctions += s.auctions();
  const auto records = parse_exposure(parse_csv(exposure_csv(sim.sessions)));
  CHECK(records.size() == auctions);
  CHECK(sim.sessions.size() == 100);
}

TEST_CASE("simulate is deterministic and thread independent") {
  const auto dir = scratch("det");
  write_file_atomic(dir / "three.ini", kThree);
  SimulateArgs a;
  a.config = dir / "three.ini";
  a.out = dir / "a";
  a.threads = 1;
  run_simulate(a);
  a.out = dir / "b";
  a.threads = 8;
  run_simulate(a);
  a.out = dir / "c";
  a.threads = 1;
  run_simulate(a);
  CHECK(digests(dir / "a") == digests(dir / "b"));
  CHECK(digests(dir / "a") == digests(dir / "c"));
  a.seed = 5;
  a.out = dir / "d";
  run_simulate(a);
  CHECK(digests(dir / "a").at("outcomes.csv") != digests(dir / "d").at("outcomes.csv"));
}

TEST_CASE("kernel at zero bandwidth reproduces the cell table") {
  auto cfg = parse_config(kThree);
  const auto sim = simulate(cfg, 2, false);
  Dataset data;
  data.roster = cfg.roster;
  data.partitions = sim.partitions;
  data.assignments = sim.assignments;
  data.outcomes = sim.outcomes;
  for (const auto& s : sim.sessions) data.records.insert(data.records.end(), s.records.begin(), s.records.end());
  for (CampaignIndex j = 1; j <= 3; ++j) {
    EstimateOptions cells;
    cells.all_users = true;
    EstimateOptions kernel = cells;
    kernel.method = Method::kernel;
    kernel.lambda = 0.0;
    const auto a = estimate_focal(data, j, cells).table;
    const auto b = estimate_focal(data, j, kernel).table;
    REQUIRE(a.cells.size() == b.cells.size());
    CHECK(a.excluded.size() == b.excluded.size());
    for (const auto& [key, e] : a.cells) {
      const auto* k = b.find(key);
      REQUIRE(k != nullptr);
      CHECK(testing::rel_close(e.alpha, k->alpha, 1e-10));
      CHECK(testing::rel_close(e.tau, k->tau, 1e-10));
      CHECK(testing::rel_close(e.se_tau, k->se_tau, 1e-8));
      CHECK(e.n_test == k->n_test);
      CHECK(e.flag == k->flag);
    }
  }
}

TEST_CASE("automatic rival is the most frequent queue companion") {
  auto cfg = parse_config(kThree);
  const auto sim = simulate(cfg, 2, false);
  std::vector<AuctionRecord> records;
  for (const auto& s : sim.sessions) records.insert(records.end(), s.records.begin(), s.records.end());
  for (CampaignIndex j = 1; j <= 3; ++j) {
    std::map<CampaignIndex, std::size_t> count;
    for (const auto& r : records) {
      if (std::find(r.queue.begin(), r.queue.end(), j) == r.queue.end()) continue;
      for (CampaignIndex k : r.queue)
        if (k != j) ++count[k];
    }
    CampaignIndex best = kNoAd;
    std::size_t most = 0;
    for (const auto& [k, n] : count)
      if (n > most) most = n, best = k;
    CHECK(auto_rival(records, j) == best);
  }
}

TEST_CASE("estimate records the training split") {
  const auto dir = scratch("split");
  write_file_atomic(dir / "three.ini", kThree);
  SimulateArgs s;
  s.config = dir / "three.ini";
  s.out = dir;
  s.oracle = false;
  run_simulate(s);
  EstimateArgs e;
  e.in = dir;
  e.out = dir / "k";
  e.focal = 1;
  e.options.method = Method::kernel;
  e.options.split = 0.1;
  const auto manifest = nlohmann::json::parse(read_file(run_estimate(e)));
  const auto& entry = manifest.at("focals").at(0);
  const double train = entry.at("train_rows").get<double>();
  const double rest = entry.at("estimate_rows").get<double>();
  CHECK(train + rest == entry.at("sample_users").get<double>());
  CHECK(std::abs(train / (train + rest) - 0.1) < 0.03);
  CHECK(fs::exists(dir / "k" / "bandwidths_1.csv"));
  CHECK(fs::exists(dir / "k" / "ate_table.csv"));
}

TEST_CASE("calculus and diagnose run on simulated output") {
  const auto dir = scratch("calc");
  write_file_atomic(dir / "three.ini", kThree);
  SimulateArgs s;
  s.config = dir / "three.ini";
  s.out = dir;
  run_simulate(s);
  EstimateArgs e;
  e.in = dir;
  e.out = dir;
  e.options.all_users = true;
  run_estimate(e);

  CalculusArgs c;
  c.in = dir;
  c.table = dir / "oracle.csv";
  c.out = dir / "calc";
  c.focal = 1;
  run_calculus(c);
  for (const char* f : {"states.csv", "curve.csv", "surface.csv", "scenario_aligned.csv", "scenario_independent.csv"})
    CHECK(fs::exists(dir / "calc" / f));

  DiagnoseArgs d;
  d.in = dir;
  d.out = dir / "diag";
  d.config = dir / "three.ini";
  run_diagnose(d);
  CHECK(fs::exists(dir / "diag" / "diagnostics.csv"));
  CHECK(fs::exists(dir / "diag" / "ks.csv"));
}

TEST_CASE("replication scenarios") {
  const auto dir = scratch("replicate");
  const auto overlap = replicate("overlap_table", dir / "o", 1, 4);
  CHECK(overlap.passed());
  CHECK(fs::exists(dir / "o" / "overlap_table.csv"));
  CHECK(fs::exists(dir / "o" / "report.txt"));
  const auto balance = replicate("balance", dir / "b", 1, 4);
  CHECK(balance.passed());
  CHECK(fs::exists(dir / "b" / "balance_quantiles.csv"));
  const auto two = replicate("two_firm", dir / "t", 1, 4);
  INFO(two.text());
  CHECK(two.passed());
  CHECK_THROWS_AS(replicate("nope", dir, 1), ConfigError);
}
