#include "flagop/cli.hpp"
#include "flagop/irreducibility.hpp"
#include "flagop/json_io.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace flagop;

namespace {

const auto one = WeightSequence::constant(1.0);

Json kp(double l) { return to_json(WeightSequence::kernel_power(l)); }

Json flag(std::vector<WeightSequence> d) { return to_json(ratio_diagonal_spec(std::move(d))); }

RunReport run_json(const Json& doc) { return run(parse_config(doc)); }

std::string pointer_of(const Json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "<none>";
}

std::string message_of(const Json& doc) {
  try {
    parse_config(doc);
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parsing fills defaults") {
  const auto c = parse_config(Json{{"command", "validate"}, {"specs", Json::array({flag({one, one})})}, {"N", 16}});
  CHECK(c.command == Command::validate);
  CHECK(c.N == 16);
  CHECK(c.ladder == std::vector<Index>{8, 16, 32});
  CHECK(c.thresholds == RunThresholds{});
  CHECK(c.thresholds.tol == 1e-10);
  CHECK(c.format == Format::json);

  CHECK(parse_config(Json{{"command", "gallery"}}).N == 32);
}

TEST_CASE("parsing errors carry pointers") {
  CHECK(pointer_of(Json{{"N", 16}}) == "/command");
  CHECK(message_of(Json{{"command", "gallery"}, {"ladder", {16, 8}}}).find("ladder not increasing") != std::string::npos);
  CHECK(pointer_of(Json{{"command", "gallery"}, {"thresholds", {{"eps_mem", 0.0}}}}).rfind("/thresholds", 0) == 0);
  CHECK(pointer_of(Json{{"command", "gallery"}, {"colour", 1}}) == "/colour");
  CHECK(pointer_of(Json{{"command", "gallery"}, {"params", {{"nmae", "all"}}}}) == "/params/nmae");
  CHECK(pointer_of(Json{{"command", "cook"}}) == "/command");
  CHECK(pointer_of(Json{{"command", "gallery"}, {"seed", -4}}) == "/seed");
  CHECK(pointer_of(Json{{"command", "reduce"}, {"specs", Json::array({Json{{"n", 2}}})}}).rfind("/specs/0", 0) == 0);
  CHECK_THROWS_AS(parse_config(std::string("{\"command\": ")), ConfigError);
}

TEST_CASE("configs round-trip") {
  std::vector<RunConfig> all;
  all.push_back(parse_config(Json{{"command", "gallery"}}));
  all.push_back(parse_config(Json{{"command", "qs-verdict"},
                                  {"specs", Json::array({kp(1), kp(2)})},
                                  {"N", 48},
                                  {"seed", 18446744073709551615ull},
                                  {"format", "text"}}));
  all.push_back(parse_config(Json{{"command", "sweep"},
                                  {"ladder", {4, 8}},
                                  {"thresholds", {{"growth", 3.5}, {"tol", 1e-9}}},
                                  {"params", {{"operation", "certificate"}, {"trials", 7}}},
                                  {"jobs", 3}}));
  for (const auto& c : all) CHECK(parse_config(serialize(c)) == c);
}

TEST_CASE("exit codes") {
  const auto v = run_json(Json{{"command", "validate"}, {"specs", Json::array({flag({one, one, one})})}, {"N", 16}});
  CHECK(v.exit_code == exit_code::pass);
  CHECK(v.body["schema"] == "flagop/1");
  CHECK(v.body.contains("wall_time_s"));
  CHECK(v.body["config"]["seed"] == 0);
  CHECK_FALSE(v.body["assumptions"].empty());

  const auto q = run_json(Json{{"command", "qs-verdict"}, {"specs", Json::array({kp(1), kp(2)})}, {"N", 64}});
  CHECK(q.exit_code == exit_code::fail);
  CHECK(q.body["result"]["verdict"] == "refuted");

  const auto same = run_json(Json{{"command", "qs-verdict"}, {"specs", Json::array({kp(2), kp(2)})}, {"N", 16}});
  CHECK(same.exit_code == exit_code::pass);

  const auto bad = run_json(Json{
      {"command", "validate"},
      {"specs", Json::array({Json{{"kind", "explicit"}, {"list", {1.0, -2.0}}}})},
      {"N", 8}});
  CHECK(bad.exit_code == exit_code::usage);
  CHECK(bad.body["error"]["type"] == "weight");
  CHECK(bad.body["error"]["index"] == 1);

  const auto cap = run_json(Json{{"command", "intertwine"}, {"specs", Json::array({to_json(one), to_json(one)})}, {"N", 70}});
  CHECK(cap.exit_code == exit_code::usage);
  CHECK(cap.body["error"]["type"] == "size-cap");

  const auto rng = run_json(Json{{"command", "range-test"},
                                 {"specs", Json::array({to_json(one), to_json(one)})},
                                 {"params", {{"target", "identity"}}}});
  CHECK(rng.exit_code == exit_code::pass);
  CHECK(rng.body["result"]["class"] == "not-in-range-residual");
}

TEST_CASE("sweeps") {
  const Json doc{{"command", "sweep"},
                 {"N", 16},
                 {"seed", 20240611},
                 {"params", {{"operation", "of-reduction"}, {"trials", 50}, {"n", 3}}}};
  const auto a = run_json(doc);
  CHECK(a.exit_code == exit_code::pass);
  CHECK(a.body["result"]["failures"].empty());
  CHECK(a.body["result"]["aggregate"]["residual"]["max"].get<double>() <= 1e-10);
  CHECK(a.body["result"]["trial_seeds"].size() == 50);

  const auto b = run_json(doc);
  CHECK(a.body["result"] == b.body["result"]);

  Json jobs = doc;
  jobs["jobs"] = 4;
  CHECK(run_json(jobs).body["result"] == a.body["result"]);

  Json flat = doc;
  flat["params"]["identical"] = true;
  flat["params"]["trials"] = 5;
  CHECK(run_json(flat).body["result"]["identical_payloads"] == true);

  Json other = doc;
  other["seed"] = 7;
  CHECK(run_json(other).body["result"]["trial_seeds"] != a.body["result"]["trial_seeds"]);
}

TEST_CASE("gallery exit codes") {
  for (const auto& name : gallery_names()) {
    const auto r = run_json(Json{{"command", "gallery"}, {"N", 16}, {"params", {{"name", name}}}});
    CHECK(r.exit_code == exit_code::pass);
  }
  CHECK(run_json(Json{{"command", "gallery"}, {"N", 16}, {"params", {{"name", "nope"}}}}).exit_code ==
        exit_code::usage);
}

TEST_CASE("text rendering") {
  const auto r = run_json(Json{{"command", "gallery"}, {"N", 8}, {"params", {{"name", "invertible-Z"}}}});
  const auto text = render_text(r.body);
  CHECK(text.find("gallery") != std::string::npos);
  CHECK(text.find("exit") != std::string::npos);
}

namespace {

struct Proc {
  int code = -1;
  std::string out;
};

Proc shell(const std::string& cmd) {
  Proc p;
  FILE* f = popen(cmd.c_str(), "r");
  REQUIRE(f != nullptr);
  char buf[4096];
  while (auto n = fread(buf, 1, sizeof buf, f)) p.out.append(buf, n);
  const int st = pclose(f);
  p.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return p;
}

}  // namespace

TEST_CASE("binary") {
  const char* bin = std::getenv("FLAGOP_BIN");
  if (bin == nullptr) {
    MESSAGE("FLAGOP_BIN not set, skipping");
    return;
  }
  const auto dir = std::filesystem::temp_directory_path() / "flagop_cli_test";
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "qs.json";
  std::ofstream(cfg) << Json{{"specs", Json::array({kp(1), kp(2)})}, {"N", 64}}.dump();

  const auto q = shell(std::string(bin) + " qs-verdict --config " + cfg.string() + " --seed 5 2>/dev/null");
  CHECK(q.code == 1);
  const auto body = Json::parse(q.out);
  CHECK(body["command"] == "qs-verdict");
  CHECK(body["config"]["seed"] == 5);

  const auto out = dir / "report.json";
  const auto w = shell(std::string(bin) + " qs-verdict --config " + cfg.string() + " --out " + out.string());
  CHECK(w.code == 1);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(Json::parse(ss.str())["exit_code"] == 1);

  CHECK(shell(std::string(bin) + " validate --config " + cfg.string() + " 2>/dev/null").code == 3);
  CHECK(shell(std::string(bin) + " qs-verdict 2>/dev/null").code == 3);
  CHECK(shell(std::string(bin) + " qs-verdict --config " + (dir / "missing.json").string() + " 2>/dev/null").code == 3);
  const auto text = shell(std::string(bin) + " qs-verdict --config " + cfg.string() + " --format text");
  CHECK(text.code == 1);
  CHECK(text.out.find("refuted") != std::string::npos);
  std::filesystem::remove_all(dir);
}
