#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parexp/ate_calculus.hpp"
#include "parexp/estimators.hpp"
#include "parexp/kernel.hpp"
#include "parexp/marketplace.hpp"
#include "parexp/oracle.hpp"

namespace parexp {

/// Shortest round-trip decimal form; NaN becomes the empty string.
std::string format_double(double v);
double parse_double(std::string_view text, std::string_view what);
std::uint64_t parse_uint(std::string_view text, std::string_view what);

/// Writes through a temporary sibling and renames it into place. With `gzip`
/// the bytes are deflated (the gzip header carries no timestamp).
void write_file_atomic(const std::filesystem::path& path, std::string_view content, bool gzip = false);

/// Reads plain or gzip-compressed files transparently.
std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws IoError when the column is absent.
  std::size_t column(std::string_view name) const;
};

/// Comma-separated, no quoting, first line is the header. Throws IoError on ragged rows.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

std::string exposure_csv(std::span<const Session> sessions);
std::vector<AuctionRecord> parse_exposure(const CsvTable& csv);

std::string outcomes_csv(std::span<const OutcomeRecord> outcomes);
std::vector<OutcomeRecord> parse_outcomes(const CsvTable& csv);

std::string oracle_csv(std::span<const OracleRow> rows);
std::vector<OracleRow> parse_oracle(const CsvTable& csv);

std::string ate_table_csv(std::span<const AteTable> tables);
/// Identified rows only; NOT_IDENTIFIED rows go to `excluded`.
std::vector<AteTable> parse_ate_table(const CsvTable& csv);

std::string bandwidths_csv(const Bandwidths& bandwidths);
std::string curve_csv(std::span<const CurvePoint> points, bool two_dimensional);

}  // namespace parexp
