#include "flagop/cli.hpp"

#include "flagop/irreducibility.hpp"
#include "flagop/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace flagop {

namespace {

struct CommandName {
  Command c;
  const char* name;
};

constexpr CommandName kCommands[] = {
    {Command::validate, "validate"},     {Command::reduce, "reduce"},
    {Command::similar, "similar"},       {Command::qs_verdict, "qs-verdict"},
    {Command::intertwine, "intertwine"}, {Command::si_test, "si-test"},
    {Command::range_test, "range-test"}, {Command::rkhs_build, "rkhs-build"},
    {Command::gallery, "gallery"},       {Command::sweep, "sweep"},
};

}  // namespace

std::string to_string(Command c) {
  for (const auto& e : kCommands)
    if (e.c == c) return e.name;
  return "?";
}

std::optional<Command> command_from_string(const std::string& s) {
  for (const auto& e : kCommands)
    if (s == e.name) return e.c;
  return std::nullopt;
}

std::string to_string(Format f) { return f == Format::json ? "json" : "text"; }

namespace {

// ---- payload decoding ----

bool looks_like_flag(const Json& j) { return j.is_object() && j.contains("n"); }

const Json& spec_at(const RunConfig& c, std::size_t i) { return c.specs.at(i); }

std::string spec_ptr(std::size_t i) { return "/specs/" + std::to_string(i); }

void expect_count(const RunConfig& c, std::size_t lo, std::size_t hi) {
  const std::size_t k = c.specs.size();
  if (k < lo || k > hi) {
    std::string want = lo == hi ? std::to_string(lo) : std::to_string(lo) + " to " + std::to_string(hi);
    throw ConfigError("/specs", to_string(c.command) + " takes " + want + " payloads, got " + std::to_string(k));
  }
}

FlagSpec flag_at(const RunConfig& c, std::size_t i) { return flag_spec_from_json(spec_at(c, i), spec_ptr(i)); }
WeightSequence weights_at(const RunConfig& c, std::size_t i) {
  return weight_sequence_from_json(spec_at(c, i), spec_ptr(i));
}

// Both payloads flag specs, or both weight sequences.
bool pair_of_flags(const RunConfig& c) {
  expect_count(c, 2, 2);
  const bool f0 = looks_like_flag(spec_at(c, 0)), f1 = looks_like_flag(spec_at(c, 1));
  if (f0 != f1) throw ConfigError("/specs", "payloads must both be flag specs or both weight sequences");
  return f0;
}

MembershipThresholds membership_thresholds(const RunConfig& c) {
  MembershipThresholds t;
  t.eps_mem = c.thresholds.eps_mem;
  t.delta_res = c.thresholds.delta_res;
  t.growth = c.thresholds.growth;
  return t;
}

std::string param_string(const RunConfig& c, const char* key, const std::string& fallback) {
  if (!c.params.contains(key)) return fallback;
  const auto& v = c.params[key];
  if (!v.is_string()) throw ConfigError(std::string("/params/") + key, "expected a string");
  return v.get<std::string>();
}

double param_number(const RunConfig& c, const char* key, double fallback) {
  if (!c.params.contains(key)) return fallback;
  return number_at(c.params, key, "/params");
}

long long param_int(const RunConfig& c, const char* key, long long fallback) {
  if (!c.params.contains(key)) return fallback;
  const auto& v = c.params[key];
  if (!v.is_number_integer()) throw ConfigError(std::string("/params/") + key, "expected an integer");
  return v.get<long long>();
}

std::vector<double> param_numbers(const RunConfig& c, const char* key, std::vector<double> fallback) {
  if (!c.params.contains(key)) return fallback;
  const auto& v = c.params[key];
  const std::string p = std::string("/params/") + key;
  if (!v.is_array()) throw ConfigError(p, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(p + "/" + std::to_string(i), "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

// ---- targets: blocks given by a rule over N ----
//
// "identity" | "A" | "B" | {"kind": "identity" | "A" | "B"}
// {"kind": "tau", "power": p, "W": "unit" | "corner" | [[...]], "corner": k}
//   tau^p_{A,B}(W) with W a fixed matrix placed in the top-left corner
// {"kind": "matrix", "value": [[...]]}  fixed size

using SizedMatrix = std::function<Matrix(Index)>;

SizedMatrix target_rule(const Json& t, SizedMatrix A, SizedMatrix B, std::uint64_t seed, const std::string& ptr) {
  Json obj = t.is_string() ? Json{{"kind", t}} : t;
  if (!obj.is_object() || !obj.contains("kind") || !obj["kind"].is_string())
    throw ConfigError(ptr, "expected a target name or {\"kind\": ...}");
  const std::string kind = obj["kind"].get<std::string>();
  if (kind == "identity") {
    reject_unknown(obj, {"kind"}, ptr);
    return [](Index N) { return Matrix(Matrix::Identity(N, N)); };
  }
  if (kind == "A" || kind == "B") {
    reject_unknown(obj, {"kind"}, ptr);
    return kind == "A" ? A : B;
  }
  if (kind == "matrix") {
    reject_unknown(obj, {"kind", "value"}, ptr);
    if (!obj.contains("value")) throw ConfigError(ptr + "/value", "missing required field");
    Matrix m = matrix_from_json(obj["value"], ptr + "/value");
    return [m](Index N) {
      if (m.rows() != N || m.cols() != N) throw DimensionError("fixed target does not match size " + std::to_string(N));
      return m;
    };
  }
  if (kind == "tau") {
    reject_unknown(obj, {"kind", "power", "W", "corner"}, ptr);
    long long power = 1;
    if (obj.contains("power")) {
      if (!obj["power"].is_number_integer() || obj["power"].get<long long>() < 1)
        throw ConfigError(ptr + "/power", "expected a positive integer");
      power = obj["power"].get<long long>();
    }
    Matrix W0;
    const Json w = obj.contains("W") ? obj["W"] : Json("corner");
    if (w.is_string() && w.get<std::string>() == "unit") {
      W0 = Matrix::Ones(1, 1);
    } else if (w.is_string() && w.get<std::string>() == "corner") {
      long long k = 4;
      if (obj.contains("corner")) {
        if (!obj["corner"].is_number_integer() || obj["corner"].get<long long>() < 1)
          throw ConfigError(ptr + "/corner", "expected a positive integer");
        k = obj["corner"].get<long long>();
      }
      Rng rng(seed);
      W0 = random_corner(rng, k);
    } else if (w.is_array()) {
      W0 = matrix_from_json(w, ptr + "/W");
    } else {
      throw ConfigError(ptr + "/W", "expected \"unit\", \"corner\" or a matrix");
    }
    const int p = static_cast<int>(power);
    return [A, B, W0, p](Index N) {
      return apply_tau_power(SylvesterPair(A(N), B(N)), embed_corner(W0, N), p);
    };
  }
  throw ConfigError(ptr + "/kind", "unknown target kind '" + kind + "'");
}

SizedMatrix shift_rule(const WeightSequence& s) {
  return [s](Index N) { return truncate_shift(s, N).entries; };
}

SizedMatrix diagonal_rule(const FlagSpec& spec, int i) {
  return [spec, i](Index N) { return spec.diagonal_block(i, N); };
}

// Replaces the superdiagonal by target rules over the flag spec's own diagonal blocks.
FlagSpec with_superdiagonal_targets(FlagSpec spec, const Json& targets, std::uint64_t seed) {
  const std::string ptr = "/params/superdiagonal";
  if (!targets.is_array() || static_cast<int>(targets.size()) != spec.n - 1)
    throw ConfigError(ptr, "expected " + std::to_string(spec.n - 1) + " targets");
  CustomSuperdiagonal cs;
  for (int i = 0; i + 1 < spec.n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    auto rule = target_rule(targets[idx], diagonal_rule(spec, i), diagonal_rule(spec, i + 1),
                            derive_seed(seed, idx), ptr + "/" + std::to_string(i));
    cs.blocks.push_back(BlockSource::generated(std::move(rule), targets[idx].dump()));
  }
  spec.superdiagonal = std::move(cs);
  return spec;
}

// ---- exit codes ----

int exit_for(CertificateVerdict v) {
  switch (v) {
    case CertificateVerdict::certified_on_horizon: return exit_code::pass;
    case CertificateVerdict::refuted: return exit_code::fail;
    case CertificateVerdict::inconclusive: return exit_code::inconclusive;
  }
  return exit_code::usage;
}

int exit_for(SIVerdict v) {
  switch (v) {
    case SIVerdict::si_evidence: return exit_code::pass;
    case SIVerdict::reducible: return exit_code::fail;
    case SIVerdict::inconclusive: return exit_code::inconclusive;
  }
  return exit_code::usage;
}

int exit_for(bool passed) { return passed ? exit_code::pass : exit_code::fail; }

// Two weight sequences stand for the two-block operators with diagonals
// (s, s) and (t, t), whose superdiagonal is the identity.
FlagPair pair_from_weights(const WeightSequence& s, const WeightSequence& t) {
  return {ratio_diagonal_spec({s, s}), ratio_diagonal_spec({t, t})};
}

struct Outcome {
  Json result;
  int code = exit_code::pass;
  std::vector<std::string> assumptions;
};

// ---- commands ----

Outcome do_validate(const RunConfig& c) {
  expect_count(c, 1, 1);
  Outcome o;
  if (looks_like_flag(spec_at(c, 0))) {
    const auto spec = flag_at(c, 0);
    const auto flag = validate_flag(spec, c.N, c.thresholds.tol);
    const auto cond = check_condition_a(spec, c.N, c.thresholds.tol);
    o.result = Json{{"flag", to_json(flag)}, {"condition_a", to_json(cond)}, {"of_form", is_of_form(spec)}};
    o.code = exit_for(flag.passed() && cond.passed);
  } else {
    const auto s = weights_at(c, 0);
    double lo = INFINITY, hi = 0.0;
    for (Index k = 0; k < c.N; ++k) {
      const double w = s.weight(k);
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
    o.result = Json{{"weights", to_json(s)}, {"min_weight", lo}, {"max_weight", hi},
                    {"spectral_radius_estimate", spectral_radius_estimate(s, c.N)}};
  }
  return o;
}

Outcome do_reduce(const RunConfig& c) {
  expect_count(c, 1, 1);
  const auto spec = flag_at(c, 0);
  const auto red = of_reduction(spec, c.N);
  Outcome o;
  o.result = to_json(red);
  o.result["tolerance"] = c.thresholds.tol;
  o.code = exit_for(red.residual <= c.thresholds.tol);
  return o;
}

Outcome do_similar(const RunConfig& c) {
  Outcome o;
  if (pair_of_flags(c)) {
    const auto cert = similarity_certificate(flag_at(c, 0), flag_at(c, 1), c.N);
    o.result = to_json(cert);
    o.code = exit_for(cert.verdict);
  } else {
    const auto a = weights_at(c, 0), b = weights_at(c, 1);
    const auto sh = shields_similarity_check(a, b, c.N);
    const auto ds = diagonal_similarity(a, b, c.N);
    o.result = Json{{"shields", to_json(sh)},
                    {"analytic_limit", to_string(analytic_ratio_limit(a, b))},
                    {"condition", ds.condition_estimate}};
    o.code = exit_for(sh.verdict == ShieldsVerdict::bounded_on_horizon);
  }
  return o;
}

Outcome do_qs(const RunConfig& c) {
  Outcome o;
  QuasiSimilarityReport r;
  if (pair_of_flags(c)) {
    r = quasi_similarity_verdict(flag_at(c, 0), flag_at(c, 1), c.N);
  } else {
    const auto p = pair_from_weights(weights_at(c, 0), weights_at(c, 1));
    r = quasi_similarity_verdict(p.T, p.T_tilde, c.N);
  }
  o.result = to_json(r);
  o.code = exit_for(r.verdict);
  o.assumptions = r.assumptions;
  return o;
}

Outcome do_intertwine(const RunConfig& c) {
  Outcome o;
  const bool flags = !c.specs.empty() && looks_like_flag(spec_at(c, 0));
  const std::string mode = param_string(c, "mode", flags ? "leakage" : "structure");
  if (mode == "structure") {
    expect_count(c, 2, 2);
    const auto s = verify_intertwiner_structure(weights_at(c, 0), weights_at(c, 1), c.N);
    o.result = to_json(s);
    o.code = exit_for(s.passed);
  } else if (mode == "leakage") {
    expect_count(c, 1, 2);
    const auto a = flag_at(c, 0);
    const auto lk = c.specs.size() == 1 ? commutant_leakage(a, c.ladder, c.thresholds.tol)
                                        : intertwiner_leakage(a, flag_at(c, 1), c.ladder, c.thresholds.tol);
    const double decay = param_number(c, "decay", 0.6);
    bool vanishing = true, decaying = !lk.decay_ratios.empty();
    for (const auto& r : lk.records) vanishing = vanishing && r.epsilon <= c.thresholds.tol;
    for (double r : lk.decay_ratios) decaying = decaying && r <= decay;
    o.result = to_json(lk);
    o.result["decay_bound"] = decay;
    o.result["vanishing"] = vanishing;
    o.result["decaying"] = decaying;
    o.code = exit_for(vanishing || decaying);
  } else if (mode == "band") {
    expect_count(c, 1, 2);
    const auto a = flag_at(c, 0);
    const auto b = c.specs.size() == 1 ? a : flag_at(c, 1);
    std::optional<Index> margin;
    if (c.params.contains("margin")) margin = static_cast<Index>(param_int(c, "margin", 0));
    const auto band = intertwiner_band_structure(a, b, c.N, c.thresholds.tol, margin);
    o.result = to_json(band);
    o.code = exit_for(band.passed);
  } else {
    throw ConfigError("/params/mode", "unknown intertwine mode '" + mode + "'");
  }
  return o;
}

Outcome do_si(const RunConfig& c) {
  const auto t = membership_thresholds(c);
  Outcome o;
  SIReport r;
  const std::string criterion =
      param_string(c, "criterion", c.specs.size() == 1 && flag_at(c, 0).n > 2 ? "superdiagonal-chain" : "two-block");
  if (criterion == "tau-squared") {
    expect_count(c, 2, 2);
    if (!c.params.contains("t12")) throw ConfigError("/params/t12", "missing required field");
    const auto t11 = weights_at(c, 0), t22 = weights_at(c, 1);
    auto rule = target_rule(c.params["t12"], shift_rule(t11), shift_rule(t22), derive_seed(c.seed, 0), "/params/t12");
    r = si_test_jordan3(t11, t22, BlockSource::generated(std::move(rule), c.params["t12"].dump()), c.ladder, t);
  } else if (criterion == "two-block" || criterion == "superdiagonal-chain") {
    expect_count(c, 1, 1);
    auto spec = flag_at(c, 0);
    if (c.params.contains("superdiagonal")) spec = with_superdiagonal_targets(spec, c.params["superdiagonal"], c.seed);
    if (criterion == "two-block") {
      if (spec.n != 2) throw ConfigError("/params/criterion", "two-block needs n = 2");
      r = si_test_2x2(spec, c.ladder, t);
    } else {
      r = si_test_nxn(spec, c.ladder, t);
    }
  } else {
    throw ConfigError("/params/criterion", "unknown criterion '" + criterion + "'");
  }
  o.result = to_json(r);
  o.code = exit_for(r.verdict);
  o.assumptions = r.assumptions;
  return o;
}

Outcome do_range(const RunConfig& c) {
  expect_count(c, 2, 2);
  const auto a = weights_at(c, 0), b = weights_at(c, 1);
  const auto power = param_int(c, "power", 1);
  if (power < 1) throw ConfigError("/params/power", "expected a positive integer");
  const Json target = c.params.contains("target") ? c.params["target"] : Json("identity");
  auto A = shift_rule(a), B = shift_rule(b);
  auto Z = target_rule(target, A, B, derive_seed(c.seed, 0), "/params/target");
  const auto rep = range_membership(
      [&](Index N) { return MembershipProblem{SylvesterPair(A(N), B(N)), Z(N)}; }, c.ladder,
      static_cast<int>(power), membership_thresholds(c));
  Outcome o;
  o.result = to_json(rep);
  if (c.params.contains("expect")) {
    const std::string want = param_string(c, "expect", "");
    o.result["expected"] = want;
    o.code = exit_for(want == to_string(rep.classification));
  } else {
    o.code = rep.classification == Membership::inconclusive ? exit_code::inconclusive : exit_code::pass;
  }
  return o;
}

Outcome do_rkhs(const RunConfig& c) {
  Outcome o;
  const std::string mode = param_string(c, "mode", "example");
  if (mode == "example") {
    expect_count(c, 3, 3);
    std::array<DiagonalKernel, 3> k{kernel_from_json(spec_at(c, 0), spec_ptr(0)),
                                    kernel_from_json(spec_at(c, 1), spec_ptr(1)),
                                    kernel_from_json(spec_at(c, 2), spec_ptr(2))};
    const auto phi = param_numbers(c, "phi", {0.0, 1.0});
    const auto samples = param_numbers(c, "samples", {0.0, 0.3, 0.5});
    const auto ex = build_example_3x3(k, phi, c.N);
    const auto flag = validate_flag(ex.spec, c.N, c.thresholds.tol);
    const auto cond = check_condition_a(ex.spec, c.N, c.thresholds.tol);
    const auto rel = verify_kernel_relations(ex, samples, c.N);
    o.result = Json{{"spec", to_json(ex.spec)},
                    {"flag", to_json(flag)},
                    {"condition_a", to_json(cond)},
                    {"kernel_relations", to_json(rel)}};
    o.code = exit_for(flag.passed() && cond.passed && rel.passed);
  } else if (mode == "homogeneous") {
    expect_count(c, 0, 0);
    const double lam = param_number(c, "lambda", 1.0);
    const double lam_t = param_number(c, "lambda_tilde", lam);
    const auto r = homogeneous_pair_check(lam, lam_t, c.N);
    o.result = to_json(r);
    o.code = exit_for(r.verdict);
    o.assumptions = r.assumptions;
  } else {
    throw ConfigError("/params/mode", "unknown rkhs-build mode '" + mode + "'");
  }
  return o;
}

Outcome do_gallery(const RunConfig& c) {
  expect_count(c, 0, 0);
  const std::string name = param_string(c, "name", "all");
  std::vector<std::string> names = name == "all" ? gallery_names() : std::vector<std::string>{name};
  Outcome o;
  Json items = Json::array();
  bool all = true;
  for (const auto& n : names) {
    const auto g = gallery_example(n, c.N, c.ladder, membership_thresholds(c));
    all = all && g.passed;
    items.push_back(to_json(g));
  }
  o.result = Json{{"examples", std::move(items)}, {"passed", all}};
  o.code = exit_for(all);
  return o;
}

SweepOptions sweep_options(const RunConfig& c) {
  expect_count(c, 0, 0);
  SweepOptions s;
  s.operation = param_string(c, "operation", "of-reduction");
  s.trials = static_cast<int>(param_int(c, "trials", 1));
  if (s.trials < 1) throw ConfigError("/params/trials", "sweep needs at least one trial");
  s.first_trial = static_cast<int>(param_int(c, "first_trial", 0));
  s.n = static_cast<int>(param_int(c, "n", 3));
  if (s.n < 2) throw ConfigError("/params/n", "block count must be at least 2");
  s.prefix = static_cast<Index>(param_int(c, "prefix", 8));
  if (s.prefix < 1) throw ConfigError("/params/prefix", "expected a positive integer");
  if (c.params.contains("identical")) {
    if (!c.params["identical"].is_boolean()) throw ConfigError("/params/identical", "expected a boolean");
    s.identical = c.params["identical"].get<bool>();
  }
  s.residual_tol = param_number(c, "residual_tol", 1e-8);
  s.decay = param_number(c, "decay", 0.6);
  s.N = c.N;
  s.ladder = c.ladder;
  s.seed = c.seed;
  s.jobs = c.jobs;
  const auto ops = sweep_operations();
  if (std::find(ops.begin(), ops.end(), s.operation) == ops.end())
    throw ConfigError("/params/operation", "unknown sweep operation '" + s.operation + "'");
  return s;
}

Outcome do_sweep(const RunConfig& c) {
  const auto opts = sweep_options(c);
  const auto rep = run_sweep(opts);
  Outcome o;
  Json failures = Json::array();
  for (int trial : rep.failures) {
    RunConfig repro = c;
    repro.params["first_trial"] = trial;
    repro.params["trials"] = 1;
    repro.output.clear();
    const auto& t = rep.trials[static_cast<std::size_t>(trial - opts.first_trial)];
    failures.push_back(Json{{"trial", trial}, {"seed", t.seed}, {"reproduce", serialize(repro)}});
  }
  Json seeds = Json::array();
  for (const auto& t : rep.trials) seeds.push_back(t.seed);
  o.result = Json{{"operation", opts.operation},
                  {"trials", opts.trials},
                  {"master_seed", opts.seed},
                  {"trial_seeds", std::move(seeds)},
                  {"aggregate", aggregate(rep)},
                  {"identical_payloads", rep.identical_payloads},
                  {"failures", std::move(failures)}};
  o.code = exit_for(rep.failures.empty());
  return o;
}

Outcome dispatch(const RunConfig& c) {
  switch (c.command) {
    case Command::validate: return do_validate(c);
    case Command::reduce: return do_reduce(c);
    case Command::similar: return do_similar(c);
    case Command::qs_verdict: return do_qs(c);
    case Command::intertwine: return do_intertwine(c);
    case Command::si_test: return do_si(c);
    case Command::range_test: return do_range(c);
    case Command::rkhs_build: return do_rkhs(c);
    case Command::gallery: return do_gallery(c);
    case Command::sweep: return do_sweep(c);
  }
  throw Error("unhandled command");
}

// Decodes everything a command reads without running it.
void check_inputs(const RunConfig& c) {
  switch (c.command) {
    case Command::validate:
      expect_count(c, 1, 1);
      if (looks_like_flag(spec_at(c, 0))) flag_at(c, 0); else weights_at(c, 0);
      break;
    case Command::reduce:
      expect_count(c, 1, 1);
      flag_at(c, 0);
      break;
    case Command::similar:
    case Command::qs_verdict:
      if (pair_of_flags(c)) { flag_at(c, 0); flag_at(c, 1); } else { weights_at(c, 0); weights_at(c, 1); }
      break;
    case Command::intertwine:
    case Command::si_test:
    case Command::range_test:
      for (std::size_t i = 0; i < c.specs.size(); ++i)
        if (looks_like_flag(spec_at(c, i))) flag_at(c, i); else weights_at(c, i);
      break;
    case Command::rkhs_build:
      for (std::size_t i = 0; i < c.specs.size(); ++i) kernel_from_json(spec_at(c, i), spec_ptr(i));
      break;
    case Command::gallery:
      expect_count(c, 0, 0);
      break;
    case Command::sweep:
      sweep_options(c);
      break;
  }
}

void check_params(const RunConfig& c) {
  switch (c.command) {
    case Command::validate:
    case Command::reduce:
    case Command::similar:
    case Command::qs_verdict: reject_unknown(c.params, {}, "/params"); break;
    case Command::intertwine: reject_unknown(c.params, {"mode", "decay", "margin"}, "/params"); break;
    case Command::si_test: reject_unknown(c.params, {"criterion", "superdiagonal", "t12"}, "/params"); break;
    case Command::range_test: reject_unknown(c.params, {"target", "power", "expect"}, "/params"); break;
    case Command::rkhs_build:
      reject_unknown(c.params, {"mode", "phi", "samples", "lambda", "lambda_tilde"}, "/params");
      break;
    case Command::gallery: reject_unknown(c.params, {"name"}, "/params"); break;
    case Command::sweep:
      reject_unknown(c.params,
                     {"operation", "trials", "first_trial", "n", "prefix", "identical", "residual_tol", "decay"},
                     "/params");
      break;
  }
}

Index positive_index(const Json& v, const std::string& ptr) {
  if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError(ptr, "expected a positive integer");
  return static_cast<Index>(v.get<long long>());
}

}  // namespace

RunConfig parse_config(const Json& doc) {
  reject_unknown(doc, {"command", "specs", "N", "ladder", "thresholds", "seed", "output", "format", "params", "jobs"},
                 "");
  RunConfig c;
  if (!doc.contains("command")) throw ConfigError("/command", "missing required field");
  if (!doc["command"].is_string()) throw ConfigError("/command", "expected a string");
  const auto cmd = command_from_string(doc["command"].get<std::string>());
  if (!cmd) throw ConfigError("/command", "unknown command '" + doc["command"].get<std::string>() + "'");
  c.command = *cmd;
  if (doc.contains("specs")) {
    if (!doc["specs"].is_array()) throw ConfigError("/specs", "expected an array");
    c.specs = doc["specs"];
  }
  if (doc.contains("N")) c.N = positive_index(doc["N"], "/N");
  if (doc.contains("ladder")) {
    const auto& l = doc["ladder"];
    if (!l.is_array() || l.empty()) throw ConfigError("/ladder", "expected a non-empty array");
    c.ladder.clear();
    for (std::size_t i = 0; i < l.size(); ++i) c.ladder.push_back(positive_index(l[i], "/ladder/" + std::to_string(i)));
    for (std::size_t i = 1; i < c.ladder.size(); ++i)
      if (c.ladder[i] <= c.ladder[i - 1]) throw ConfigError("/ladder", "ladder not increasing");
  }
  if (doc.contains("thresholds")) {
    const auto& t = doc["thresholds"];
    reject_unknown(t, {"eps_mem", "delta_res", "growth", "tol"}, "/thresholds");
    auto read = [&](const char* key, double& field) {
      if (!t.contains(key)) return;
      field = number_at(t, key, "/thresholds");
      if (!(field > 0.0) || !std::isfinite(field))
        throw ConfigError(std::string("/thresholds/") + key, "threshold must be positive");
    };
    read("eps_mem", c.thresholds.eps_mem);
    read("delta_res", c.thresholds.delta_res);
    read("growth", c.thresholds.growth);
    read("tol", c.thresholds.tol);
  }
  if (doc.contains("seed")) {
    const auto& s = doc["seed"];
    if (s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0))
      c.seed = s.get<std::uint64_t>();
    else
      throw ConfigError("/seed", "expected a non-negative 64-bit integer");
  }
  if (doc.contains("output")) {
    if (!doc["output"].is_string()) throw ConfigError("/output", "expected a string");
    c.output = doc["output"].get<std::string>();
  }
  if (doc.contains("format")) {
    const auto& f = doc["format"];
    if (f == "json")
      c.format = Format::json;
    else if (f == "text")
      c.format = Format::text;
    else
      throw ConfigError("/format", "expected \"json\" or \"text\"");
  }
  if (doc.contains("params")) {
    if (!doc["params"].is_object()) throw ConfigError("/params", "expected an object");
    c.params = doc["params"];
  }
  if (doc.contains("jobs")) c.jobs = static_cast<int>(positive_index(doc["jobs"], "/jobs"));
  check_params(c);
  check_inputs(c);
  return c;
}

RunConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

Json serialize(const RunConfig& c) {
  Json t{{"eps_mem", c.thresholds.eps_mem},
         {"delta_res", c.thresholds.delta_res},
         {"growth", c.thresholds.growth},
         {"tol", c.thresholds.tol}};
  return Json{{"command", to_string(c.command)},
              {"specs", c.specs},
              {"N", c.N},
              {"ladder", c.ladder},
              {"thresholds", std::move(t)},
              {"seed", c.seed},
              {"output", c.output},
              {"format", to_string(c.format)},
              {"params", c.params},
              {"jobs", c.jobs}};
}

RunReport run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  Json body{{"schema", "flagop/1"},
            {"version", kVersion},
            {"command", to_string(config.command)},
            {"config", serialize(config)}};
  std::vector<std::string> assumptions = standard_assumptions();
  try {
    Outcome o = dispatch(config);
    for (auto& a : o.assumptions)
      if (std::find(assumptions.begin(), assumptions.end(), a) == assumptions.end()) assumptions.push_back(a);
    body["result"] = std::move(o.result);
    rep.exit_code = o.code;
  } catch (const ConfigError& e) {
    body["error"] = Json{{"type", "config"}, {"pointer", e.pointer()}, {"message", e.what()}};
    rep.exit_code = exit_code::usage;
  } catch (const WeightError& e) {
    body["error"] = Json{{"type", "weight"}, {"index", e.index()}, {"value", e.value()}, {"message", e.what()}};
    rep.exit_code = exit_code::usage;
  } catch (const SizeCapError& e) {
    body["error"] = Json{{"type", "size-cap"}, {"requested", e.requested()}, {"cap", e.cap()}, {"message", e.what()}};
    rep.exit_code = exit_code::usage;
  } catch (const std::exception& e) {
    body["error"] = Json{{"type", "module"}, {"message", e.what()}};
    rep.exit_code = exit_code::usage;
  }
  body["exit_code"] = rep.exit_code;
  body["assumptions"] = assumptions;
  body["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.body = std::move(body);
  return rep;
}

namespace {

bool scalar_array(const Json& j) {
  return std::all_of(j.begin(), j.end(), [](const Json& x) { return x.is_primitive(); });
}

void render(std::ostringstream& os, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_primitive() || (v.is_array() && scalar_array(v))) {
        os << pad << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
      } else {
        os << pad << k << ":\n";
        render(os, v, indent + 2);
      }
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      os << pad << "- [" << i << "]\n";
      render(os, j[i], indent + 2);
    }
  } else {
    os << pad << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
  }
}

}  // namespace

std::string render_text(const Json& report) {
  std::ostringstream os;
  render(os, report, 0);
  return os.str();
}

}  // namespace flagop
