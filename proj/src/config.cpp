#include "parexp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "parexp/io.hpp"
#include "parexp/randomize.hpp"

namespace parexp {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
};

std::vector<Section> tokenize(std::string_view text) {
  std::vector<Section> sections;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      sections.push_back({std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    if (sections.empty()) throw ConfigError("key outside of any section", line_no);
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("empty key", line_no);
    sections.back().entries.push_back({key, std::string(trim(line.substr(eq + 1))), line_no});
    if (end == text.size()) break;
  }
  return sections;
}

double to_double(const Entry& e) {
  double v = 0.0;
  const auto* first = e.value.data();
  const auto* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (e.value.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ConfigError("'" + e.key + "' expects a number, got '" + e.value + "'", e.line);
  return v;
}

std::uint64_t to_uint(const Entry& e, std::string_view value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("'" + e.key + "' expects a nonnegative integer, got '" + std::string(value) + "'", e.line);
  return v;
}

std::uint64_t to_uint(const Entry& e) { return to_uint(e, e.value); }

bool to_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ConfigError("'" + e.key + "' expects true or false", e.line);
}

double unit(const Entry& e) {
  const double v = to_double(e);
  if (v < 0.0 || v > 1.0) throw ConfigError("'" + e.key + "' must lie in [0,1]", e.line);
  return v;
}

double nonnegative(const Entry& e) {
  const double v = to_double(e);
  if (v < 0.0) throw ConfigError("'" + e.key + "' must be nonnegative", e.line);
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<UserId> audience(const Entry& e, std::uint64_t users, std::uint64_t seed, CampaignIndex index) {
  std::vector<UserId> out;
  const std::string_view v = e.value;
  if (v == "all") {
    for (UserId u = 1; u <= users; ++u) out.push_back(u);
  } else if (v.starts_with("range:")) {
    const auto parts = split(v.substr(6), '-');
    if (parts.size() != 2) throw ConfigError("audience range expects range:A-B", e.line);
    const auto a = to_uint(e, parts[0]), b = to_uint(e, parts[1]);
    if (a < 1 || b > users || a > b) throw ConfigError("audience range outside 1..users", e.line);
    for (UserId u = a; u <= b; ++u) out.push_back(u);
  } else if (v.starts_with("every:")) {
    const auto parts = split(v.substr(6), ':');
    if (parts.size() != 2) throw ConfigError("audience every expects every:M:R", e.line);
    const auto m = to_uint(e, parts[0]), r = to_uint(e, parts[1]);
    if (m == 0 || r >= m) throw ConfigError("audience every needs M > R >= 0", e.line);
    for (UserId u = 1; u <= users; ++u)
      if (u % m == r) out.push_back(u);
  } else if (v.starts_with("random:")) {
    Entry p = e;
    p.value = std::string(v.substr(7));
    const double prob = unit(p);
    Engine engine = make_engine(seed, Stream::audience, index);
    std::bernoulli_distribution keep(prob);
    for (UserId u = 1; u <= users; ++u)
      if (keep(engine)) out.push_back(u);
  } else if (v.starts_with("list:")) {
    for (auto part : split(v.substr(5), '|')) {
      const auto u = to_uint(e, part);
      if (u < 1 || u > users) throw ConfigError("audience user outside 1..users", e.line);
      out.push_back(u);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  } else {
    throw ConfigError("unknown audience spec '" + e.value + "'", e.line);
  }
  if (out.empty()) throw ConfigError("campaign audience is empty", e.line);
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::optional<std::uint64_t> seed_override) {
  const auto sections = tokenize(text);
  ExperimentConfig cfg;

  bool seen_experiment = false;
  for (const auto& s : sections) {
    if (s.name != "experiment") continue;
    if (seen_experiment) throw ConfigError("duplicate [experiment] section", s.line);
    seen_experiment = true;
    for (const auto& e : s.entries) {
      if (e.key == "users") {
        cfg.users = to_uint(e);
        if (cfg.users == 0) throw ConfigError("'users' must be positive", e.line);
      } else if (e.key == "seed") {
        cfg.seed = to_uint(e);
      } else if (e.key == "slots") {
        const auto v = to_uint(e);
        if (v < 1 || v > 64) throw ConfigError("'slots' must be in 1..64", e.line);
        cfg.market.slots = static_cast<int>(v);
      } else if (e.key == "arrival") {
        if (e.value == "geometric") {
          cfg.market.arrivals.kind = ArrivalModel::Kind::geometric;
        } else if (e.value == "fixed") {
          cfg.market.arrivals.kind = ArrivalModel::Kind::fixed;
        } else {
          throw ConfigError("'arrival' must be geometric or fixed", e.line);
        }
      } else if (e.key == "arrival_mean") {
        cfg.market.arrivals.mean = nonnegative(e);
      } else if (e.key == "arrival_shift") {
        cfg.market.arrivals.shift = static_cast<unsigned>(to_uint(e));
      } else if (e.key == "queue_jitter") {
        cfg.market.queue_jitter = nonnegative(e);
      } else if (e.key == "noise") {
        if (e.value == "gaussian") {
          cfg.outcomes.noise = NoiseKind::gaussian;
        } else if (e.value == "poisson") {
          cfg.outcomes.noise = NoiseKind::poisson;
        } else {
          throw ConfigError("'noise' must be gaussian or poisson", e.line);
        }
      } else if (e.key == "noise_scale") {
        cfg.outcomes.noise_scale = nonnegative(e);
      } else if (e.key == "floor_at_zero") {
        cfg.outcomes.floor_at_zero = to_bool(e);
      } else if (e.key == "oracle_replications") {
        cfg.oracle_replications = to_uint(e);
      } else if (e.key == "oracle_max_competitors") {
        cfg.oracle_max_competitors = to_uint(e);
      } else if (e.key == "covariates") {
        cfg.covariates = to_bool(e);
      } else {
        throw ConfigError("unknown key '" + e.key + "' in [experiment]", e.line);
      }
    }
    if (cfg.market.arrivals.kind == ArrivalModel::Kind::geometric &&
        cfg.market.arrivals.mean < static_cast<double>(cfg.market.arrivals.shift))
      throw ConfigError("'arrival_mean' below 'arrival_shift'", s.line);
  }
  if (seed_override) cfg.seed = *seed_override;

  std::vector<Campaign> campaigns;
  std::vector<int> campaign_lines;
  struct PendingEffect {
    CampaignIndex k;
    int line;
  };
  std::vector<PendingEffect> references;
  for (const auto& s : sections) {
    if (s.name != "campaign") continue;
    Campaign c;
    FocalEffects fx;
    const Entry* audience_entry = nullptr;
    bool has_index = false;
    for (const auto& e : s.entries) {
      if (e.key == "index") {
        const auto v = to_uint(e);
        if (v < 1 || v > 0xFFFFFFFFULL) throw ConfigError("'index' must be >= 1", e.line);
        c.index = static_cast<CampaignIndex>(v);
        has_index = true;
      } else if (e.key == "audience") {
        audience_entry = &e;
      } else if (e.key == "share") {
        c.treatment_share = unit(e);
      } else if (e.key == "bid") {
        c.base_bid = nonnegative(e);
      } else if (e.key == "quality") {
        c.quality = nonnegative(e);
      } else if (e.key == "baseline") {
        fx.baseline = to_double(e);
      } else if (e.key == "effect") {
        fx.own_effect = to_double(e);
      } else if (e.key.starts_with("spill.") || e.key.starts_with("interact.")) {
        const bool spill = e.key.starts_with("spill.");
        const auto k = to_uint(e, std::string_view(e.key).substr(spill ? 6 : 9));
        const auto kk = static_cast<CampaignIndex>(k);
        (spill ? fx.spill : fx.interact)[kk] = to_double(e);
        references.push_back({kk, e.line});
      } else {
        throw ConfigError("unknown key '" + e.key + "' in [campaign]", e.line);
      }
    }
    if (!has_index) throw ConfigError("campaign without 'index'", s.line);
    if (audience_entry == nullptr) throw ConfigError("campaign without 'audience'", s.line);
    for (const auto& other : campaigns)
      if (other.index == c.index) throw ConfigError("duplicate campaign index " + std::to_string(c.index), s.line);
    c.audience = audience(*audience_entry, cfg.users, cfg.seed, c.index);
    fx.focal = c.index;
    campaigns.push_back(std::move(c));
    campaign_lines.push_back(s.line);
    cfg.outcomes.effects.push_back(std::move(fx));
  }
  if (campaigns.empty()) throw ConfigError("no [campaign] sections");
  if (campaigns.size() > kMaxCampaigns) throw ConfigError("more than 64 campaigns");
  for (const auto& r : references) {
    bool known = false;
    for (const auto& c : campaigns) known = known || c.index == r.k;
    if (!known) throw ConfigError("effect references unknown campaign " + std::to_string(r.k), r.line);
  }
  for (const auto& fx : cfg.outcomes.effects)
    if (fx.spill.contains(fx.focal) || fx.interact.contains(fx.focal))
      throw ConfigError("campaign " + std::to_string(fx.focal) + " lists itself as a competitor");
  try {
    cfg.roster = Roster(std::move(campaigns));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  for (const auto& s : sections) {
    if (s.name == "belief") {
      CompetitorBelief b;
      bool has_competitor = false;
      for (const auto& e : s.entries) {
        if (e.key == "competitor") {
          b.competitor = static_cast<CampaignIndex>(to_uint(e));
          if (!cfg.roster.position_of(b.competitor))
            throw ConfigError("belief about unknown campaign " + e.value, e.line);
          has_competitor = true;
        } else if (e.key == "p_not_adv") {
          b.p_not_adv = unit(e);
        } else if (e.key == "p_adv_not_exp") {
          b.p_adv_not_exp = unit(e);
        } else if (e.key == "p_adv_exp") {
          b.p_adv_exp = unit(e);
        } else if (e.key == "share") {
          b.share = unit(e);
        } else {
          throw ConfigError("unknown key '" + e.key + "' in [belief]", e.line);
        }
      }
      if (!has_competitor) throw ConfigError("belief without 'competitor'", s.line);
      if (std::abs(b.p_not_adv + b.p_adv_not_exp + b.p_adv_exp - 1.0) > 1e-12)
        throw ConfigError("belief probabilities must sum to 1", s.line);
      if (cfg.beliefs.find(b.competitor)) throw ConfigError("duplicate belief section", s.line);
      cfg.beliefs.competitors.push_back(b);
    } else if (s.name == "joint") {
      if (cfg.beliefs.joint) throw ConfigError("duplicate [joint] section", s.line);
      std::map<StateOfWorld, double> table;
      for (const auto& e : s.entries) {
        if (e.key == "competitors") {
          for (auto part : split(e.value, '|')) {
            const auto k = static_cast<CampaignIndex>(to_uint(e, part));
            if (!cfg.roster.position_of(k)) throw ConfigError("joint belief names unknown campaign", e.line);
            cfg.beliefs.joint_competitors.push_back(k);
          }
        } else if (e.key.starts_with("state.")) {
          try {
            table[BitVector::parse(std::string_view(e.key).substr(6))] = unit(e);
          } catch (const std::invalid_argument&) {
            throw ConfigError("bad state '" + e.key + "'", e.line);
          }
        } else {
          throw ConfigError("unknown key '" + e.key + "' in [joint]", e.line);
        }
      }
      cfg.beliefs.joint = std::move(table);
      try {
        cfg.beliefs.validate();
      } catch (const ConfigError& err) {
        throw ConfigError(err.what(), s.line);
      }
    } else if (s.name != "experiment" && s.name != "campaign") {
      throw ConfigError("unknown section [" + s.name + "]", s.line);
    }
  }
  std::sort(cfg.beliefs.competitors.begin(), cfg.beliefs.competitors.end(),
            [](const auto& a, const auto& b) { return a.competitor < b.competitor; });
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  return parse_config(read_file(path), seed_override);
}

}  // namespace parexp
