#include "parexp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include <openssl/evp.h>
#include <zlib.h>

namespace parexp {

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw IoError("format_double: conversion failed");
  return std::string(buf, end);
}

double parse_double(std::string_view text, std::string_view what) {
  if (text.empty()) return std::nan("");
  double v = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size())
    throw IoError("bad number for " + std::string(what) + ": '" + std::string(text) + "'");
  return v;
}

std::uint64_t parse_uint(std::string_view text, std::string_view what) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size())
    throw IoError("bad integer for " + std::string(what) + ": '" + std::string(text) + "'");
  return v;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content, bool gzip) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  if (gzip) {
    gzFile f = gzopen(tmp.c_str(), "wb9");
    if (f == nullptr) throw IoError("cannot open " + tmp.string() + " for writing");
    std::size_t done = 0;
    while (done < content.size()) {
      const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(content.size() - done, 1U << 20));
      if (gzwrite(f, content.data() + done, chunk) != static_cast<int>(chunk)) {
        gzclose(f);
        throw IoError("write failed for " + tmp.string());
      }
      done += chunk;
    }
    if (gzclose(f) != Z_OK) throw IoError("close failed for " + tmp.string());
  } else {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw IoError("cannot open " + path.string());
  std::string out;
  char buf[1 << 16];
  int got = 0;
  while ((got = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(got));
  const bool failed = got < 0;
  gzclose(f);
  if (failed) throw IoError("read failed for " + path.string());
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return c;
  throw IoError("missing CSV column '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw IoError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                    " fields, got " + std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw IoError("CSV input has no header");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  try {
    return parse_csv(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string exposure_csv(std::span<const Session> sessions) {
  std::string out = "user_id,auction_id,slot,queue,served,counterfactual\n";
  for (const auto& s : sessions) {
    for (const auto& r : s.records) {
      out += std::to_string(r.user);
      out += ',';
      out += std::to_string(r.auction_id);
      out += ',';
      out += std::to_string(r.slot);
      out += ',';
      for (std::size_t i = 0; i < r.queue.size(); ++i) {
        if (i) out += '|';
        out += std::to_string(r.queue[i]);
      }
      out += ',';
      out += std::to_string(r.served);
      out += ',';
      out += std::to_string(r.counterfactual);
      out += '\n';
    }
  }
  return out;
}

std::vector<AuctionRecord> parse_exposure(const CsvTable& csv) {
  const std::size_t cu = csv.column("user_id"), ca = csv.column("auction_id"), cs = csv.column("slot"),
                    cq = csv.column("queue"), cv = csv.column("served"), cc = csv.column("counterfactual");
  std::vector<AuctionRecord> out;
  out.reserve(csv.rows.size());
  for (const auto& row : csv.rows) {
    AuctionRecord r;
    r.user = parse_uint(row[cu], "user_id");
    r.auction_id = parse_uint(row[ca], "auction_id");
    r.slot = static_cast<int>(parse_uint(row[cs], "slot"));
    if (!row[cq].empty())
      for (const auto& q : split(row[cq], '|')) r.queue.push_back(static_cast<CampaignIndex>(parse_uint(q, "queue")));
    r.served = static_cast<CampaignIndex>(parse_uint(row[cv], "served"));
    r.counterfactual = static_cast<CampaignIndex>(parse_uint(row[cc], "counterfactual"));
    out.push_back(std::move(r));
  }
  return out;
}

std::string outcomes_csv(std::span<const OutcomeRecord> outcomes) {
  std::string out = "user_id,focal,campaign_arm,y\n";
  for (const auto& r : outcomes) {
    out += std::to_string(r.user);
    out += ',';
    out += std::to_string(r.focal);
    out += r.arm == Arm::test ? ",test," : ",control,";
    out += format_double(r.y);
    out += '\n';
  }
  return out;
}

std::vector<OutcomeRecord> parse_outcomes(const CsvTable& csv) {
  const std::size_t cu = csv.column("user_id"), cf = csv.column("focal"), ca = csv.column("campaign_arm"),
                    cy = csv.column("y");
  std::vector<OutcomeRecord> out;
  out.reserve(csv.rows.size());
  for (const auto& row : csv.rows) {
    OutcomeRecord r;
    r.user = parse_uint(row[cu], "user_id");
    r.focal = static_cast<CampaignIndex>(parse_uint(row[cf], "focal"));
    if (row[ca] == "test") {
      r.arm = Arm::test;
    } else if (row[ca] == "control") {
      r.arm = Arm::control;
    } else {
      throw IoError("bad campaign_arm '" + row[ca] + "'");
    }
    r.y = parse_double(row[cy], "y");
    out.push_back(r);
  }
  return out;
}

std::string oracle_csv(std::span<const OracleRow> rows) {
  std::string out = "focal,partition,state,tau,mc_se,R\n";
  for (const auto& r : rows) {
    out += std::to_string(r.focal) + ',' + std::to_string(r.partition) + ',' + r.state.to_string() + ',' +
           format_double(r.estimate.tau) + ',' + format_double(r.estimate.mc_se) + ',' +
           std::to_string(r.estimate.replications) + '\n';
  }
  return out;
}

std::vector<OracleRow> parse_oracle(const CsvTable& csv) {
  const std::size_t cf = csv.column("focal"), cp = csv.column("partition"), cs = csv.column("state"),
                    ct = csv.column("tau"), ce = csv.column("mc_se"), cr = csv.column("R");
  std::vector<OracleRow> out;
  for (const auto& row : csv.rows) {
    OracleRow r;
    r.focal = static_cast<CampaignIndex>(parse_uint(row[cf], "focal"));
    r.partition = static_cast<int>(parse_uint(row[cp], "partition"));
    try {
      r.state = BitVector::parse(row[cs]);
    } catch (const std::invalid_argument& e) {
      throw IoError(e.what());
    }
    r.estimate.tau = parse_double(row[ct], "tau");
    r.estimate.mc_se = parse_double(row[ce], "mc_se");
    r.estimate.replications = parse_uint(row[cr], "R");
    out.push_back(r);
  }
  return out;
}

std::string ate_table_csv(std::span<const AteTable> tables) {
  std::string out = "focal,partition,d_bits,alpha,tau,se_tau,n_test,n_control,flag\n";
  for (const auto& t : tables) {
    // Identified and excluded cells interleave in key order.
    std::map<CellKey, const CellEstimate*> all;
    for (const auto& [k, e] : t.cells) all.emplace(k, &e);
    for (const auto& [k, e] : t.excluded) all.emplace(k, &e);
    for (const auto& [k, e] : all) {
      out += std::to_string(t.focal) + ',' + std::to_string(k.partition) + ',' + k.d.to_string() + ',' +
             format_double(e->alpha) + ',' + format_double(e->tau) + ',' + format_double(e->se_tau) + ',' +
             std::to_string(e->n_test) + ',' + std::to_string(e->n_control) + ',' + to_string(e->flag) + '\n';
    }
  }
  return out;
}

std::vector<AteTable> parse_ate_table(const CsvTable& csv) {
  const std::size_t cf = csv.column("focal"), cp = csv.column("partition"), cd = csv.column("d_bits"),
                    ca = csv.column("alpha"), ct = csv.column("tau"), cs = csv.column("se_tau"),
                    cnt = csv.column("n_test"), cnc = csv.column("n_control"), cg = csv.column("flag");
  std::map<CampaignIndex, AteTable> tables;
  for (const auto& row : csv.rows) {
    const auto focal = static_cast<CampaignIndex>(parse_uint(row[cf], "focal"));
    AteTable& t = tables[focal];
    t.focal = focal;
    CellKey key;
    try {
      key.d = BitVector::parse(row[cd]);
    } catch (const std::invalid_argument& e) {
      throw IoError(e.what());
    }
    key.partition = static_cast<int>(parse_uint(row[cp], "partition"));
    t.competitors = key.d.size();
    CellEstimate e;
    e.alpha = parse_double(row[ca], "alpha");
    e.tau = parse_double(row[ct], "tau");
    e.se_tau = parse_double(row[cs], "se_tau");
    e.n_test = parse_uint(row[cnt], "n_test");
    e.n_control = parse_uint(row[cnc], "n_control");
    if (row[cg] == "OK") {
      e.flag = CellFlag::ok;
    } else if (row[cg] == "LOW_SUPPORT") {
      e.flag = CellFlag::low_support;
    } else if (row[cg] == "NOT_IDENTIFIED") {
      e.flag = CellFlag::not_identified;
    } else {
      throw IoError("bad flag '" + row[cg] + "'");
    }
    (e.flag == CellFlag::not_identified ? t.excluded : t.cells).emplace(key, e);
  }
  std::vector<AteTable> out;
  for (auto& [focal, t] : tables) out.push_back(std::move(t));
  return out;
}

std::string bandwidths_csv(const Bandwidths& bandwidths) {
  std::string out = "coord,lambda\n";
  for (std::size_t v = 0; v < bandwidths.lambda.size(); ++v)
    out += std::to_string(v) + ',' + format_double(bandwidths.lambda[v]) + '\n';
  return out;
}

std::string curve_csv(std::span<const CurvePoint> points, bool two_dimensional) {
  std::string out = two_dimensional ? "x,y,value\n" : "x,value\n";
  for (const auto& p : points) {
    out += format_double(p.x);
    if (two_dimensional) out += ',' + format_double(p.y);
    out += ',' + format_double(p.value) + '\n';
  }
  return out;
}

}  // namespace parexp
