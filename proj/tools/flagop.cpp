#include "flagop/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

int usage_error(const std::string& pointer, const std::string& message) {
  flagop::Json err{{"schema", "flagop/1"},
                   {"error", {{"type", "usage"}, {"pointer", pointer}, {"message", message}}},
                   {"exit_code", flagop::exit_code::usage}};
  std::cerr << err.dump(2) << "\n";
  return flagop::exit_code::usage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flag-structured operator matrices: validation, reduction, similarity and irreducibility evidence"};
  std::string command, config_path, out, format;
  std::uint64_t seed = 0;
  int jobs = 0;
  app.add_option("command", command, "validate | reduce | similar | qs-verdict | intertwine | si-test | "
                                     "range-test | rkhs-build | gallery | sweep")
      ->required();
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out, "write the report here instead of stdout");
  auto* fmt = app.add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  auto* seed_opt = app.add_option("--seed", seed, "master seed, overrides the config");
  auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return usage_error("", e.what());
  }

  flagop::Json doc;
  {
    std::ifstream in(config_path);
    if (!in) return usage_error("", "cannot read config '" + config_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      doc = flagop::Json::parse(ss.str());
    } catch (const std::exception& e) {
      return usage_error("", std::string("malformed JSON: ") + e.what());
    }
  }
  if (!doc.is_object()) return usage_error("", "config must be a JSON object");
  if (!doc.contains("command"))
    doc["command"] = command;
  else if (doc["command"] != command)
    return usage_error("/command", "config says '" + doc["command"].dump() + "' but the command line says '" +
                                       command + "'");

  flagop::RunConfig cfg;
  try {
    cfg = flagop::parse_config(doc);
  } catch (const flagop::ConfigError& e) {
    return usage_error(e.pointer(), e.what());
  } catch (const std::exception& e) {
    return usage_error("", e.what());
  }
  if (*seed_opt) cfg.seed = seed;
  if (*jobs_opt) cfg.jobs = jobs;
  if (*fmt) cfg.format = format == "text" ? flagop::Format::text : flagop::Format::json;
  if (!out.empty()) cfg.output = out;

  const auto report = flagop::run(cfg);
  const std::string text =
      cfg.format == flagop::Format::json ? report.body.dump(2) + "\n" : flagop::render_text(report.body);
  if (cfg.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(cfg.output);
    if (!os) return usage_error("/output", "cannot write '" + cfg.output + "'");
    os << text;
  }
  if (report.body.contains("error")) std::cerr << report.body["error"].dump() << "\n";
  return report.exit_code;
}
