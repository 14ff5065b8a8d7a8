#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace parexp {

struct ScenarioCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ScenarioReport {
  std::string scenario;
  std::vector<ScenarioCheck> checks;

  bool passed() const;
  /// One "PASS|FAIL name: detail" line per check.
  std::string text() const;
};

/// Names accepted by replicate().
std::vector<std::string> scenario_names();

/// Runs a built-in scaled-down reproduction and writes its data files and
/// report.txt into `out`. Throws ConfigError for an unknown scenario.
ScenarioReport replicate(const std::string& scenario, const std::filesystem::path& out, std::uint64_t seed,
                         unsigned threads = 1);

}  // namespace parexp
