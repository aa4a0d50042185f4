#pragma once

#include "flagop/core.hpp"
#include "flagop/json_io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flagop {

enum class Command { validate, reduce, similar, qs_verdict, intertwine, si_test, range_test, rkhs_build, gallery, sweep };
enum class Format { json, text };

std::string to_string(Command c);
std::optional<Command> command_from_string(const std::string& s);
std::string to_string(Format f);

struct RunThresholds {
  double eps_mem = 1e-6;
  double delta_res = 1e-2;
  double growth = 4.0;
  double tol = 1e-10;
  bool operator==(const RunThresholds&) const = default;
};

struct RunConfig {
  Command command = Command::validate;
  Json specs = Json::array();  // payloads decoded per command
  Index N = 32;
  std::vector<Index> ladder{8, 16, 32};
  RunThresholds thresholds;
  std::uint64_t seed = 0;
  std::string output;  // empty writes to stdout
  Format format = Format::json;
  Json params = Json::object();  // command-specific options
  int jobs = 1;
  bool operator==(const RunConfig&) const = default;
};

namespace exit_code {
inline constexpr int pass = 0;
inline constexpr int fail = 1;
inline constexpr int inconclusive = 2;
inline constexpr int usage = 3;
}  // namespace exit_code

RunConfig parse_config(const Json& doc);
RunConfig parse_config(const std::string& text);
Json serialize(const RunConfig& config);

struct RunReport {
  Json body;
  int exit_code = exit_code::pass;
};

// Module errors become exit code 3 with an "error" object in the report.
RunReport run(const RunConfig& config);

std::string render_text(const Json& report);

}  // namespace flagop
