#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lpdist/pindex.hpp"
#include "lpdist/sampler.hpp"

namespace lpdist {

enum class Command { Help, Sample, CltCheck, SphereExact, Rate, Tail };

struct RunConfig {
  Command command = Command::Help;
  PIndex p = PIndex::finite_value(2.0);
  int n = 1;
  DomainKind domain = DomainKind::BallBoundary;
  uint64_t trials = 1;
  uint64_t seed = 0;
  int workers = 0;  // 0 = hardware concurrency
  // rate grid
  double z_min = 0.0;
  double z_max = 0.0;
  int steps = 0;
  // pointwise queries
  std::optional<double> t;              // sphere-exact
  std::optional<double> z_point;        // rate
  std::vector<double> z_list;           // tail thresholds
  // outputs
  std::string csv_path;
  std::string json_path;
  std::string help_text;  // filled when command == Help
};

// Parses and fully validates argv (without the program name). Throws
// UsageError for anything the mapped operation would reject, so failures
// never reach the output-writing stage. LPDIST_WORKERS, when set, overrides
// --workers.
RunConfig parse_config(const std::vector<std::string>& argv);

// Executes a validated config. Returns the process exit code: 0 success,
// 1 runtime/numerical failure (diagnostics on stderr and in outputs).
int run_command(const RunConfig& config);

}  // namespace lpdist
