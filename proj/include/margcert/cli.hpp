// Copyright 2026 The margcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "margcert/states.hpp"

namespace margcert {

/// One pass/fail line of a report.
struct Check {
  enum class Kind { kNear, kAtLeast, kAtMost, kFlag };
  std::string name;
  Kind kind = Kind::kFlag;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;  ///< half-width for kNear, slack for kAtLeast / kAtMost
  bool pass = false;
};

Check check_near(std::string name, double value, double target, double tolerance);
/// value >= target - slack.
Check check_at_least(std::string name, double value, double target, double slack);
/// value <= target + slack.
Check check_at_most(std::string name, double value, double target, double slack);
Check check_flag(std::string name, bool ok);

struct RunReport {
  std::string command;
  nlohmann::json inputs = nlohmann::json::object();
  std::map<std::string, double> outputs;
  std::vector<Check> checks;
  double wall_time = 0.0;
  std::vector<std::string> notes;

  bool pass() const;
  void add(Check c);
  nlohmann::json to_json() const;
};

/**
 * Sorted keys, every floating value rounded to 12 significant digits, two
 * space indent. Parsing the result and dumping it again gives the same bytes.
 */
std::string canonical_dump(const nlohmann::json& j);

struct CliOptions {
  std::uint64_t seed = 1;
  double tol_scale = 1.0;
  int restarts = 20;
  std::optional<std::string> csv_path;
  std::optional<std::string> trace_path;
  /// "paper", "ghz", "product <bits>" or "file <path>".
  std::vector<std::string> state{"paper"};
};

/// Throws ParseError for an unknown or malformed spec; file contents are validated.
DensityMatrix load_state(const std::vector<std::string>& spec);

struct CertifyOutcome {
  RunReport report;
  bool separable = false, unique = false, violation = false;
  /// 0 when every stage passes, else the first failing stage (1, 2 or 3).
  int failed_stage = 0;
};

/// Separable marginals, then uniqueness, then violations of BI, Mermin and Sliwa4.
CertifyOutcome cmd_certify(const DensityMatrix& rho, const CliOptions& options = {});

/// bi, mermin, sliwa4, uniqueness, seesaw or family-search. Throws UnknownName.
RunReport cmd_reproduce(const std::string& table, const CliOptions& options = {});

/// Entry point of the command-line tool. Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace margcert
