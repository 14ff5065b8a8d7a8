#include "parexp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "parexp/io.hpp"
#include "parexp/parallel.hpp"
#include "parexp/randomize.hpp"

namespace parexp {

using Json = nlohmann::ordered_json;

std::vector<double> pre_period_covariates(std::uint64_t seed, UserId user) {
  Engine engine = make_engine(seed, Stream::covariates, user);
  std::gamma_distribution<double> activity(2.0, 1.0);
  const double a = activity(engine);
  std::poisson_distribution<int> visits(4.0 * a);
  std::poisson_distribution<int> carts(0.6 * a);
  std::poisson_distribution<int> orders(0.25 * a);
  std::lognormal_distribution<double> basket(3.0, 0.8);
  const double v = visits(engine);
  const double c = carts(engine);
  const double o = orders(engine);
  double sales = 0.0;
  for (int i = 0; i < static_cast<int>(o); ++i) sales += basket(engine);
  return {v, c, o, sales};
}

Simulation simulate(const ExperimentConfig& config, unsigned threads, bool with_oracle) {
  Simulation sim;
  sim.config = config;
  sim.partitions = build_partitions(config.roster);
  sim.assignments = assign_all(config.roster, SplitSeed{derive_seed(config.seed, Stream::assignment)});
  sim.sessions = simulate_market(config.roster, sim.assignments, config.market, config.seed, threads);
  sim.outcomes = realize_outcomes(sim.sessions, config.roster, sim.assignments, config.outcomes, config.seed, threads);
  if (with_oracle && config.oracle_replications > 0)
    sim.oracle = oracle_table(config.outcomes, config.roster, sim.partitions, config.market,
                              config.oracle_replications, config.seed, config.oracle_max_competitors, threads);
  return sim;
}

Dataset reconstruct(std::vector<OutcomeRecord> outcomes, std::vector<AuctionRecord> records) {
  std::sort(outcomes.begin(), outcomes.end(), [](const OutcomeRecord& a, const OutcomeRecord& b) {
    return a.user != b.user ? a.user < b.user : a.focal < b.focal;
  });
  std::map<CampaignIndex, Campaign> campaigns;
  std::map<CampaignIndex, std::size_t> tested;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& r = outcomes[i];
    if (i > 0 && outcomes[i - 1].user == r.user && outcomes[i - 1].focal == r.focal)
      throw IoError("duplicate outcome for user " + std::to_string(r.user) + " focal " + std::to_string(r.focal));
    auto& c = campaigns[r.focal];
    c.index = r.focal;
    c.audience.push_back(r.user);
    if (r.arm == Arm::test) ++tested[r.focal];
  }
  if (campaigns.empty()) throw IoError("outcome log is empty");
  std::vector<Campaign> list;
  for (auto& [index, c] : campaigns) {
    c.treatment_share = static_cast<double>(tested[index]) / static_cast<double>(c.audience.size());
    list.push_back(std::move(c));
  }
  Dataset data;
  data.roster = Roster(std::move(list));
  data.partitions = build_partitions(data.roster);

  std::vector<TreatmentAssignment> rows;
  const std::size_t width = data.roster.size();
  for (std::size_t i = 0; i < outcomes.size();) {
    const UserId user = outcomes[i].user;
    std::uint64_t bits = 0;
    for (; i < outcomes.size() && outcomes[i].user == user; ++i)
      if (outcomes[i].arm == Arm::test) bits |= std::uint64_t{1} << data.roster.require_position(outcomes[i].focal);
    rows.emplace_back(user, BitVector(bits, width));
  }
  data.assignments = AssignmentTable(std::move(rows));
  data.outcomes = std::move(outcomes);
  data.records = std::move(records);
  return data;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  auto pick = [&](const char* name) {
    const auto plain = dir / name;
    if (std::filesystem::exists(plain)) return plain;
    auto gz = plain;
    gz += ".gz";
    if (std::filesystem::exists(gz)) return gz;
    throw IoError("missing input " + plain.string());
  };
  auto outcomes = parse_outcomes(read_csv(pick("outcomes.csv")));
  auto records = parse_exposure(read_csv(pick("exposure.csv")));
  return reconstruct(std::move(outcomes), std::move(records));
}

CampaignIndex auto_rival(std::span<const AuctionRecord> records, CampaignIndex focal) {
  std::map<CampaignIndex, std::size_t> shared;
  for (const auto& r : records) {
    if (std::find(r.queue.begin(), r.queue.end(), focal) == r.queue.end()) continue;
    for (CampaignIndex k : r.queue)
      if (k != focal) ++shared[k];
  }
  CampaignIndex best = kNoAd;
  std::size_t most = 0;
  for (const auto& [k, n] : shared) {
    if (n > most) {
      most = n;
      best = k;
    }
  }
  if (best == kNoAd) throw IdentificationError("no campaign shares an auction with campaign " + std::to_string(focal));
  return best;
}

bool in_training(std::uint64_t seed, UserId user, double fraction) {
  const double u = static_cast<double>(derive_seed(seed, Stream::split, user) >> 11) * 0x1.0p-53;
  return u < fraction;
}

FocalEstimate estimate_focal(const Dataset& data, CampaignIndex focal, const EstimateOptions& options) {
  const std::size_t pos = data.roster.require_position(focal);
  const FocalPartitions& fp = data.partitions[pos];
  FocalEstimate est;
  est.focal = focal;

  std::vector<UserId> sample;
  if (!options.all_users) {
    sample = eligible_sample(data.records, focal);
    if (sample.empty()) throw IdentificationError("eligibility sample for campaign " + std::to_string(focal) + " is empty");
  }
  const FocalData all = focal_data(data.roster, fp, data.assignments, data.outcomes,
                                   options.all_users ? nullptr : &sample);
  est.sample_users = all.rows.size();
  if (all.rows.empty()) throw IdentificationError("no observations for campaign " + std::to_string(focal));

  switch (options.method) {
    case Method::cells: {
      est.table = stacked_ols(all, options.min_cell);
      est.estimate_rows = all.rows.size();
      break;
    }
    case Method::kernel: {
      if (options.lambda) {
        const KernelData kd(all);
        const std::vector<double> lambda(kd.dims(), *options.lambda);
        est.table = kernel_table(kd, focal, lambda, options.min_cell);
        est.estimate_rows = all.rows.size();
        break;
      }
      FocalData train = all, rest = all;
      if (options.split > 0.0) {
        train.rows.clear();
        rest.rows.clear();
        for (const auto& r : all.rows) (in_training(options.seed, r.user, options.split) ? train : rest).rows.push_back(r);
      }
      if (train.rows.size() < 2 || rest.rows.empty())
        throw IdentificationError("kernel split leaves too few rows for campaign " + std::to_string(focal));
      CvOptions cv;
      cv.seed = options.seed;
      cv.threads = options.threads;
      const KernelData train_data(train);
      est.bandwidths = cv_bandwidths(train_data, cv);
      est.table = kernel_table(KernelData(rest), focal, est.bandwidths->lambda, options.min_cell);
      est.train_rows = train.rows.size();
      est.estimate_rows = rest.rows.size();
      break;
    }
    case Method::interaction: {
      est.rival = options.rival != kNoAd ? options.rival : auto_rival(data.records, focal);
      const std::size_t kpos = data.roster.require_position(est.rival);
      if (kpos == pos) throw IdentificationError("rival must differ from the focal campaign");
      std::vector<std::uint8_t> dj, dk;
      std::vector<double> y;
      for (const auto& r : all.rows) {
        dj.push_back(r.treated ? 1 : 0);
        dk.push_back((*data.assignments.find(r.user))[kpos] ? 1 : 0);
        y.push_back(r.y);
      }
      est.interaction = interaction_ols(dj, dk, y);
      est.table.focal = focal;
      est.table.competitors = all.competitors;
      est.estimate_rows = all.rows.size();
      break;
    }
  }
  return est;
}

namespace {

struct OutputSet {
  std::filesystem::path dir;
  Json files = Json::object();

  void write(const std::string& name, const std::string& content, bool gzip = false) {
    const std::string file = gzip ? name + ".gz" : name;
    write_file_atomic(dir / file, content, gzip);
    files[file] = sha256_hex(content);
  }
};

Json roster_json(const Roster& roster) {
  Json out = Json::array();
  for (const auto& c : roster.campaigns())
    out.push_back({{"index", c.index},
                   {"share", c.treatment_share},
                   {"bid", c.base_bid},
                   {"quality", c.quality},
                   {"audience", c.audience.size()}});
  return out;
}

std::filesystem::path finish(OutputSet& out, Json manifest, const std::string& name) {
  manifest["outputs"] = out.files;
  const auto path = out.dir / name;
  write_file_atomic(path, manifest.dump(2) + "\n");
  return path;
}

std::string assumptions_csv(std::span<const AssumptionCheck> checks) {
  std::string out = "focal,partition,members,users,overlap_violations,support_a_violations,all_test,all_control,clean\n";
  auto join = [](const auto& items, auto fmt) {
    std::string s;
    for (const auto& x : items) {
      if (!s.empty()) s += '|';
      s += fmt(x);
    }
    return s;
  };
  for (const auto& c : checks) {
    out += std::to_string(c.focal) + ',' + std::to_string(c.partition) + ',' +
           join(c.members, [](CampaignIndex k) { return std::to_string(k); }) + ',' + std::to_string(c.users) + ',' +
           join(c.overlap_violations, [](CampaignIndex k) { return std::to_string(k); }) + ',' +
           join(c.support_a_violations, [](const BitVector& b) { return b.to_string(); }) + ',' +
           (c.all_test_occupied ? "1" : "0") + ',' + (c.all_control_occupied ? "1" : "0") + ',' +
           (c.clean() ? "1" : "0") + '\n';
  }
  return out;
}

const char* method_name(Method m) {
  switch (m) {
    case Method::cells: return "cells";
    case Method::kernel: return "kernel";
    case Method::interaction: return "interaction";
  }
  return "?";
}

std::filesystem::path existing(const std::filesystem::path& dir, const char* name) {
  const auto plain = dir / name;
  if (std::filesystem::exists(plain)) return plain;
  auto gz = plain;
  gz += ".gz";
  if (std::filesystem::exists(gz)) return gz;
  return {};
}

}  // namespace

std::filesystem::path run_simulate(const SimulateArgs& args) {
  const std::string text = read_file(args.config);
  const ExperimentConfig config = parse_config(text, args.seed);
  const Simulation sim = simulate(config, args.threads, args.oracle);

  OutputSet out{args.out};
  out.write("exposure.csv", exposure_csv(sim.sessions), args.compress);
  out.write("outcomes.csv", outcomes_csv(sim.outcomes), args.compress);
  if (config.covariates) {
    std::string cov = "user_id";
    for (const char* name : kCovariateNames) cov += std::string(",") + name;
    cov += '\n';
    for (const auto& row : sim.assignments.rows()) {
      cov += std::to_string(row.user());
      for (double v : pre_period_covariates(config.seed, row.user())) cov += ',' + format_double(v);
      cov += '\n';
    }
    out.write("covariates.csv", cov, args.compress);
  }
  if (!sim.oracle.empty()) out.write("oracle.csv", oracle_csv(sim.oracle));
  if (config.roster.size() <= 20)
    out.write("assumptions.csv", assumptions_csv(check_assumptions(config.roster, sim.partitions, sim.assignments)));

  std::size_t auctions = 0;
  for (const auto& s : sim.sessions) auctions += s.records.size();
  Json manifest;
  manifest["command"] = "simulate";
  manifest["seed"] = config.seed;
  manifest["config_sha256"] = sha256_hex(text);
  manifest["users"] = config.users;
  manifest["assigned_users"] = sim.assignments.size();
  manifest["auctions"] = auctions;
  manifest["oracle_replications"] = sim.oracle.empty() ? 0 : config.oracle_replications;
  manifest["roster"] = roster_json(config.roster);
  return finish(out, manifest, "manifest.json");
}

std::filesystem::path run_estimate(const EstimateArgs& args) {
  const Dataset data = load_dataset(args.in);
  std::vector<CampaignIndex> focals;
  if (args.focal != kNoAd) {
    data.roster.require_position(args.focal);
    focals.push_back(args.focal);
  } else {
    for (const auto& c : data.roster.campaigns()) focals.push_back(c.index);
  }

  OutputSet out{args.out};
  Json manifest;
  manifest["command"] = "estimate";
  manifest["method"] = method_name(args.options.method);
  manifest["split"] = args.options.split;
  manifest["min_cell"] = args.options.min_cell;
  manifest["seed"] = args.options.seed;
  manifest["all_users"] = args.options.all_users;
  if (args.options.lambda) manifest["lambda"] = *args.options.lambda;
  Json inputs = Json::object();
  for (const char* name : {"exposure.csv", "outcomes.csv"}) {
    const auto p = existing(args.in, name);
    inputs[p.filename().string()] = file_sha256(p);
  }
  manifest["inputs"] = inputs;

  std::vector<AteTable> tables;
  std::string interaction = "focal,rival,term,estimate,se,p_value\n";
  Json per_focal = Json::array();
  std::size_t identified = 0;
  std::vector<std::string> failures;
  for (CampaignIndex focal : focals) {
    Json entry;
    entry["focal"] = focal;
    try {
      FocalEstimate est = estimate_focal(data, focal, args.options);
      entry["sample_users"] = est.sample_users;
      entry["train_rows"] = est.train_rows;
      entry["estimate_rows"] = est.estimate_rows;
      entry["identified_cells"] = est.table.cells.size();
      entry["excluded_cells"] = est.table.excluded.size();
      if (est.bandwidths) {
        out.write("bandwidths_" + std::to_string(focal) + ".csv", bandwidths_csv(*est.bandwidths));
        entry["cv_loss"] = est.bandwidths->cv_loss;
        entry["cv_skipped"] = est.bandwidths->skipped;
      }
      if (est.interaction) {
        static constexpr const char* kTerms[4] = {"alpha", "beta1", "beta2", "beta3"};
        for (int t = 0; t < 4; ++t)
          interaction += std::to_string(focal) + ',' + std::to_string(est.rival) + ',' + kTerms[t] + ',' +
                         format_double(est.interaction->coef[t]) + ',' + format_double(est.interaction->se[t]) +
                         ',' + format_double(est.interaction->p_value[t]) + '\n';
        entry["rival"] = est.rival;
        ++identified;
      }
      identified += est.table.cells.size();
      if (args.options.method != Method::interaction) tables.push_back(std::move(est.table));
    } catch (const IdentificationError& e) {
      entry["error"] = e.what();
      failures.push_back(std::to_string(focal) + ": " + e.what());
    }
    per_focal.push_back(entry);
  }
  if (args.options.method == Method::interaction) {
    out.write("interaction.csv", interaction);
  } else {
    out.write("ate_table.csv", ate_table_csv(tables));
  }
  manifest["focals"] = per_focal;
  const auto path = finish(out, manifest, "estimate_manifest.json");
  if (identified == 0) {
    std::string summary = "NOT_IDENTIFIED: no identified cells";
    for (const auto& f : failures) summary += "\n  " + f;
    throw IdentificationError(summary);
  }
  return path;
}

std::filesystem::path run_calculus(const CalculusArgs& args) {
  const auto outcomes_path = existing(args.in, "outcomes.csv");
  if (outcomes_path.empty()) throw IoError("missing input " + (args.in / "outcomes.csv").string());
  const Dataset data = reconstruct(parse_outcomes(read_csv(outcomes_path)), {});
  const CsvTable csv = read_csv(args.table);
  const bool is_oracle = std::find(csv.header.begin(), csv.header.end(), "state") != csv.header.end();

  CampaignIndex focal = args.focal != kNoAd ? args.focal : data.roster.at(0).index;
  const FocalPartitions& fp = data.partitions[data.roster.require_position(focal)];
  int partition = args.partition;
  if (partition == 0) {
    partition = 1;
    for (const auto& p : fp.partitions)
      if (p.competitors.size() > fp.partition(partition).competitors.size()) partition = p.label;
  }
  if (partition < 1 || partition > static_cast<int>(fp.size()))
    throw ConfigError("partition " + std::to_string(partition) + " does not exist for campaign " + std::to_string(focal));

  StateTable table;
  if (is_oracle) {
    const auto rows = parse_oracle(csv);
    table = state_table(rows, fp, partition);
  } else {
    const auto tables = parse_ate_table(csv);
    auto it = std::find_if(tables.begin(), tables.end(), [&](const AteTable& t) { return t.focal == focal; });
    if (it == tables.end()) throw IdentificationError("table has no rows for campaign " + std::to_string(focal));
    table = state_table(*it, fp, partition);
  }
  try {
    table.require_complete();
  } catch (const std::invalid_argument& e) {
    throw IdentificationError(e.what());
  }

  OutputSet out{args.out};
  std::string states = "state,tau\n";
  for (const auto& [s, tau] : table.tau) states += s.to_string() + ',' + format_double(tau) + '\n';
  out.write("states.csv", states);

  std::vector<double> grid;
  for (std::size_t g = 0; g < args.grid; ++g)
    grid.push_back(args.grid == 1 ? 0.0 : static_cast<double>(g) / static_cast<double>(args.grid - 1));

  Json manifest;
  manifest["command"] = "calculus";
  manifest["focal"] = focal;
  manifest["partition"] = partition;
  manifest["sigma"] = args.sigma;
  manifest["inputs"] = {{"table", file_sha256(args.table)}, {"outcomes", file_sha256(outcomes_path)}};

  if (!table.competitors.empty()) {
    const CampaignIndex rival = args.rival != kNoAd ? args.rival : table.competitors.front();
    manifest["rival"] = rival;
    out.write("curve.csv", curve_csv(competitor_curve(table, rival, grid), false));
    out.write("surface.csv", curve_csv(experimentation_surface(table, rival, args.sigma, grid, grid), true));
  }
  out.write("scenario_aligned.csv", curve_csv(scenario_curve(table, grid, ScenarioMode::aligned, args.sigma), false));
  out.write("scenario_independent.csv",
            curve_csv(scenario_curve(table, grid, ScenarioMode::independent, args.sigma), false));

  if (args.beliefs) {
    const ExperimentConfig cfg = load_config(*args.beliefs);
    double value = 0.0;
    try {
      value = prospective_ate(table, cfg.beliefs);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    out.write("prospective.csv", "focal,partition,prospective_ate\n" + std::to_string(focal) + ',' +
                                     std::to_string(partition) + ',' + format_double(value) + '\n');
    manifest["inputs"]["beliefs"] = file_sha256(*args.beliefs);
  }
  return finish(out, manifest, "calculus_manifest.json");
}

std::filesystem::path run_diagnose(const DiagnoseArgs& args) {
  const auto outcomes_path = existing(args.in, "outcomes.csv");
  if (outcomes_path.empty()) throw IoError("missing input " + (args.in / "outcomes.csv").string());
  const Dataset data = reconstruct(parse_outcomes(read_csv(outcomes_path)), {});
  std::optional<ExperimentConfig> cfg;
  if (args.config) cfg = load_config(*args.config);

  std::map<UserId, std::vector<double>> covariates;
  const auto cov_path = existing(args.in, "covariates.csv");
  if (!cov_path.empty()) {
    const CsvTable csv = read_csv(cov_path);
    const std::size_t cu = csv.column("user_id");
    for (const auto& row : csv.rows) {
      std::vector<double> v;
      for (std::size_t c = 0; c < row.size(); ++c)
        if (c != cu) v.push_back(parse_double(row[c], csv.header[c]));
      covariates[parse_uint(row[cu], "user_id")] = std::move(v);
    }
  }
  std::vector<std::string> names(kCovariateNames, kCovariateNames + 4);

  OutputSet out{args.out};
  std::string per_campaign = "campaign,n,share,target,proportion_p,balance_p\n";
  std::vector<double> proportion_ps, balance_ps;
  for (std::size_t p = 0; p < data.roster.size(); ++p) {
    const Campaign& c = data.roster.at(p);
    double target = args.target;
    if (cfg) {
      if (const auto pos = cfg->roster.position_of(c.index)) target = cfg->roster.at(*pos).treatment_share;
    }
    std::vector<Arm> arms;
    std::vector<std::vector<double>> rows;
    std::vector<Arm> cov_arms;
    for (UserId u : c.audience) {
      const Arm a = (*data.assignments.find(u))[p] ? Arm::test : Arm::control;
      arms.push_back(a);
      if (auto it = covariates.find(u); it != covariates.end()) {
        rows.push_back(it->second);
        cov_arms.push_back(a);
      }
    }
    std::string prop_p, bal_p;
    if (arms.size() >= 30) {
      const double v = proportion_test(arms, target);
      proportion_ps.push_back(v);
      prop_p = format_double(v);
    }
    if (!rows.empty()) {
      try {
        const double v = balance_test(rows, cov_arms, names);
        balance_ps.push_back(v);
        bal_p = format_double(v);
      } catch (const IdentificationError&) {
      }
    }
    per_campaign += std::to_string(c.index) + ',' + std::to_string(arms.size()) + ',' +
                    format_double(empirical_share(arms)) + ',' + format_double(target) + ',' + prop_p + ',' + bal_p +
                    '\n';
  }
  out.write("diagnostics.csv", per_campaign);

  std::string ks = "test,n,statistic,p_value\n";
  std::string quantiles = "test,uniform,empirical\n";
  Json manifest;
  manifest["command"] = "diagnose";
  for (const auto& [name, ps] : {std::pair<std::string, std::vector<double>*>{"proportion", &proportion_ps},
                                 std::pair<std::string, std::vector<double>*>{"balance", &balance_ps}}) {
    for (const auto& [u, v] : uniform_quantile_pairs(*ps))
      quantiles += name + ',' + format_double(u) + ',' + format_double(v) + '\n';
    if (ps->size() >= 5) {
      const KsResult r = ks_uniformity(*ps);
      ks += name + ',' + std::to_string(ps->size()) + ',' + format_double(r.statistic) + ',' +
            format_double(r.p_value) + '\n';
      manifest["ks_" + name] = r.p_value;
    }
  }
  out.write("ks.csv", ks);
  out.write("quantiles.csv", quantiles);

  const auto table_path = existing(args.in, "ate_table.csv");
  if (!table_path.empty()) {
    std::string cdf = "focal,tau,F\n", split = "focal,competitor,omega,tau,F\n",
                box = "focal,count,n,min,q1,median,q3,max\n", pooled = "focal,pooled_tau,percentile\n";
    for (const auto& t : parse_ate_table(read_csv(table_path))) {
      const auto pos = data.roster.position_of(t.focal);
      if (!pos || t.cells.empty()) continue;
      const FocalPartitions& fp = data.partitions[*pos];
      int partition = 1;
      for (const auto& p : fp.partitions)
        if (p.competitors.size() > fp.partition(partition).competitors.size()) partition = p.label;
      const StateTable st = state_table(t, fp, partition);
      if (st.tau.empty()) continue;
      std::vector<StateTau> taus;
      for (const auto& [s, tau] : st.tau) taus.push_back({s, tau});
      const CellEstimate pooled_fit = pooled_ols(focal_data(data.roster, fp, data.assignments, data.outcomes));
      const auto h = heterogeneity_summary(taus, pooled_fit.tau);
      const std::string f = std::to_string(t.focal);
      const double n = static_cast<double>(h.cdf.size());
      for (std::size_t i = 0; i < h.cdf.size(); ++i)
        cdf += f + ',' + format_double(h.cdf[i]) + ',' + format_double(static_cast<double>(i + 1) / n) + '\n';
      for (std::size_t k = 0; k < st.competitors.size(); ++k) {
        for (int omega = 0; omega < 2; ++omega) {
          const auto& v = omega ? h.cdf_on[k] : h.cdf_off[k];
          for (std::size_t i = 0; i < v.size(); ++i)
            split += f + ',' + std::to_string(st.competitors[k]) + ',' + std::to_string(omega) + ',' +
                     format_double(v[i]) + ',' +
                     format_double(static_cast<double>(i + 1) / static_cast<double>(v.size())) + '\n';
        }
      }
      for (std::size_t c = 0; c < h.by_count.size(); ++c) {
        const auto& b = h.by_count[c];
        if (b.count == 0) continue;
        box += f + ',' + std::to_string(c) + ',' + std::to_string(b.count) + ',' + format_double(b.min) + ',' +
               format_double(b.q1) + ',' + format_double(b.median) + ',' + format_double(b.q3) + ',' +
               format_double(b.max) + '\n';
      }
      pooled += f + ',' + format_double(h.pooled_tau) + ',' + format_double(h.pooled_percentile) + '\n';
    }
    out.write("heterogeneity_cdf.csv", cdf);
    out.write("heterogeneity_split.csv", split);
    out.write("heterogeneity_box.csv", box);
    out.write("heterogeneity_pooled.csv", pooled);
  }
  return finish(out, manifest, "diagnose_manifest.json");
}

}  // namespace parexp
