#include "flagop/json_io.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace flagop {

ConfigError::ConfigError(std::string pointer, const std::string& message)
    : Error((pointer.empty() ? std::string("/") : pointer) + ": " + message), pointer_(std::move(pointer)) {}

void reject_unknown(const Json& obj, std::initializer_list<const char*> allowed, const std::string& ptr) {
  if (!obj.is_object()) throw ConfigError(ptr, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) throw ConfigError(ptr + "/" + key, "unknown field");
}

double number_at(const Json& obj, const char* key, const std::string& ptr) {
  if (!obj.contains(key)) throw ConfigError(ptr + "/" + key, "missing required field");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(ptr + "/" + key, "expected a number");
  return v.get<double>();
}

namespace {

std::vector<double> numbers(const Json& j, const std::string& ptr) {
  if (!j.is_array()) throw ConfigError(ptr, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(ptr + "/" + std::to_string(i), "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json to_json(const WeightSequence& seq) {
  Json j;
  j["kind"] = to_string(seq.kind());
  switch (seq.kind()) {
    case WeightKind::constant:
      j["c"] = seq.c();
      break;
    case WeightKind::explicit_list:
      j["list"] = seq.values();
      if (const auto* t = std::get_if<ConstantTail>(&seq.tail()))
        j["tail"] = Json{{"constant", t->c}};
      else
        j["tail"] = "repeat-last";
      break;
    case WeightKind::geometric:
      j["c"] = seq.c();
      j["q"] = seq.q();
      break;
    case WeightKind::kernel_power:
      j["lambda"] = seq.lambda();
      break;
    case WeightKind::ratio_of:
      j["num"] = to_json(WeightSequence::kernel_power(seq.lambda()));
      j["den"] = to_json(WeightSequence::kernel_power(seq.lambda_den()));
      break;
  }
  j["label"] = seq.label();
  return j;
}

WeightSequence weight_sequence_from_json(const Json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr, "expected a weight sequence object");
  if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError(ptr + "/kind", "missing or not a string");
  const std::string kind = j["kind"].get<std::string>();
  std::optional<WeightSequence> s;
  if (kind == "constant") {
    reject_unknown(j, {"kind", "c", "label"}, ptr);
    s = WeightSequence::constant(number_at(j, "c", ptr));
  } else if (kind == "explicit") {
    reject_unknown(j, {"kind", "list", "tail", "label"}, ptr);
    if (!j.contains("list")) throw ConfigError(ptr + "/list", "missing required field");
    auto list = numbers(j["list"], ptr + "/list");
    TailRule tail = RepeatLast{};
    if (j.contains("tail")) {
      const auto& t = j["tail"];
      if (t.is_string() && t.get<std::string>() == "repeat-last") {
      } else if (t.is_object()) {
        reject_unknown(t, {"constant"}, ptr + "/tail");
        tail = ConstantTail{number_at(t, "constant", ptr + "/tail")};
      } else {
        throw ConfigError(ptr + "/tail", "expected \"repeat-last\" or {\"constant\": c}");
      }
    }
    if (list.empty() && std::holds_alternative<RepeatLast>(tail))
      throw ConfigError(ptr + "/list", "empty list needs a constant tail");
    s = WeightSequence::explicit_list(std::move(list), tail);
  } else if (kind == "geometric") {
    reject_unknown(j, {"kind", "c", "q", "label"}, ptr);
    s = WeightSequence::geometric(number_at(j, "c", ptr), number_at(j, "q", ptr));
  } else if (kind == "kernel-power") {
    reject_unknown(j, {"kind", "lambda", "label"}, ptr);
    s = WeightSequence::kernel_power(number_at(j, "lambda", ptr));
  } else if (kind == "ratio-of") {
    reject_unknown(j, {"kind", "num", "den", "label"}, ptr);
    double lam[2];
    const char* keys[2] = {"num", "den"};
    for (int i = 0; i < 2; ++i) {
      if (!j.contains(keys[i])) throw ConfigError(ptr + "/" + keys[i], "missing required field");
      const auto part = weight_sequence_from_json(j[keys[i]], ptr + "/" + keys[i]);
      if (part.kind() != WeightKind::kernel_power)
        throw ConfigError(ptr + "/" + keys[i], "ratio-of takes kernel-power sequences");
      lam[i] = part.lambda();
    }
    s = WeightSequence::ratio_of(lam[0], lam[1]);
  } else {
    throw ConfigError(ptr + "/kind", "unknown weight kind '" + kind + "'");
  }
  if (j.contains("label")) {
    if (!j["label"].is_string()) throw ConfigError(ptr + "/label", "expected a string");
    s = s->with_label(j["label"].get<std::string>());
  }
  return *s;
}

Json to_json(const DiagonalKernel& k) {
  Json j;
  if (k.kind() == DiagonalKernel::Kind::power) {
    j["kind"] = "power";
    j["lambda"] = k.lambda();
  } else {
    j["kind"] = "explicit";
    j["list"] = k.values();
  }
  j["label"] = k.label();
  return j;
}

DiagonalKernel kernel_from_json(const Json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr, "expected a kernel object");
  reject_unknown(j, {"kind", "lambda", "list", "label"}, ptr);
  if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError(ptr + "/kind", "missing or not a string");
  const std::string kind = j["kind"].get<std::string>();
  std::optional<DiagonalKernel> k;
  try {
    if (kind == "power") {
      if (j.contains("list")) throw ConfigError(ptr + "/list", "not allowed for power kernels");
      k = DiagonalKernel::power(number_at(j, "lambda", ptr));
    } else if (kind == "explicit") {
      if (j.contains("lambda")) throw ConfigError(ptr + "/lambda", "not allowed for explicit kernels");
      if (!j.contains("list")) throw ConfigError(ptr + "/list", "missing required field");
      k = DiagonalKernel::explicit_list(numbers(j["list"], ptr + "/list"));
    } else {
      throw ConfigError(ptr + "/kind", "unknown kernel kind '" + kind + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(ptr, e.what());
  }
  if (j.contains("label")) {
    if (!j["label"].is_string()) throw ConfigError(ptr + "/label", "expected a string");
    k = k->with_label(j["label"].get<std::string>());
  }
  return *k;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& ptr) {
  if (!j.is_array() || j.empty()) throw ConfigError(ptr, "expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = numbers(j[r], ptr + "/" + std::to_string(r));
    if (row.size() != cols) throw ConfigError(ptr + "/" + std::to_string(r), "ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = row[c];
  }
  return m;
}

Json to_json(const FlagSpec& spec) {
  Json j;
  j["n"] = spec.n;
  Json diags = Json::array();
  for (const auto& atom : spec.diagonals) {
    if (const auto* s = std::get_if<WeightSequence>(&atom)) {
      diags.push_back(to_json(*s));
    } else {
      const auto& b = std::get<BlockSource>(atom);
      if (!b.fixed_matrix()) throw Error("generated block '" + b.description() + "' has no JSON form");
      diags.push_back(Json{{"matrix", to_json(*b.fixed_matrix())}});
    }
  }
  j["diagonals"] = std::move(diags);
  if (spec.ratio_diagonal()) {
    j["superdiagonal"] = "ratio-diagonal";
  } else {
    Json blocks = Json::array();
    for (const auto& b : std::get<CustomSuperdiagonal>(spec.superdiagonal).blocks) {
      if (!b.fixed_matrix()) throw Error("generated block '" + b.description() + "' has no JSON form");
      blocks.push_back(to_json(*b.fixed_matrix()));
    }
    j["superdiagonal"] = Json{{"custom", std::move(blocks)}};
  }
  Json sym = Json::object();
  for (const auto& [key, coeffs] : spec.symbols)
    sym[std::to_string(key.first + 1) + "," + std::to_string(key.second + 1)] = coeffs;
  j["symbols"] = std::move(sym);
  return j;
}

FlagSpec flag_spec_from_json(const Json& j, const std::string& ptr) {
  reject_unknown(j, {"n", "diagonals", "superdiagonal", "symbols"}, ptr);
  FlagSpec spec;
  if (!j.contains("n") || !j["n"].is_number_integer()) throw ConfigError(ptr + "/n", "expected an integer");
  spec.n = j["n"].get<int>();
  if (spec.n < 2) throw ConfigError(ptr + "/n", "block count must be at least 2");
  if (!j.contains("diagonals") || !j["diagonals"].is_array())
    throw ConfigError(ptr + "/diagonals", "expected an array");
  const auto& d = j["diagonals"];
  if (static_cast<int>(d.size()) != spec.n)
    throw ConfigError(ptr + "/diagonals", "expected " + std::to_string(spec.n) + " entries");
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::string p = ptr + "/diagonals/" + std::to_string(i);
    if (d[i].is_object() && d[i].contains("matrix")) {
      reject_unknown(d[i], {"matrix"}, p);
      Matrix m = matrix_from_json(d[i]["matrix"], p + "/matrix");
      if (m.rows() != m.cols()) throw ConfigError(p + "/matrix", "block must be square");
      spec.diagonals.emplace_back(BlockSource::fixed(std::move(m)));
    } else {
      spec.diagonals.emplace_back(weight_sequence_from_json(d[i], p));
    }
  }
  if (j.contains("superdiagonal")) {
    const auto& s = j["superdiagonal"];
    const std::string p = ptr + "/superdiagonal";
    if (s.is_string() && s.get<std::string>() == "ratio-diagonal") {
      spec.superdiagonal = RatioDiagonal{};
    } else if (s.is_object()) {
      reject_unknown(s, {"custom"}, p);
      if (!s.contains("custom") || !s["custom"].is_array()) throw ConfigError(p + "/custom", "expected an array");
      CustomSuperdiagonal c;
      for (std::size_t i = 0; i < s["custom"].size(); ++i) {
        Matrix m = matrix_from_json(s["custom"][i], p + "/custom/" + std::to_string(i));
        if (m.rows() != m.cols()) throw ConfigError(p + "/custom/" + std::to_string(i), "block must be square");
        c.blocks.push_back(BlockSource::fixed(std::move(m)));
      }
      if (static_cast<int>(c.blocks.size()) != spec.n - 1)
        throw ConfigError(p + "/custom", "expected " + std::to_string(spec.n - 1) + " blocks");
      spec.superdiagonal = std::move(c);
    } else {
      throw ConfigError(p, "expected \"ratio-diagonal\" or {\"custom\": [...]}");
    }
  }
  if (j.contains("symbols")) {
    const auto& s = j["symbols"];
    if (!s.is_object()) throw ConfigError(ptr + "/symbols", "expected an object");
    for (const auto& [key, value] : s.items()) {
      const std::string p = ptr + "/symbols/" + key;
      int i = 0, jj = 0;
      char comma = 0;
      std::istringstream is(key);
      if (!(is >> i >> comma >> jj) || comma != ',' || !is.eof())
        throw ConfigError(p, "symbol keys look like \"i,j\"");
      if (i < 1 || jj < i + 2 || jj > spec.n) throw ConfigError(p, "need 1 <= i, i + 2 <= j <= n");
      spec.symbols[{i - 1, jj - 1}] = numbers(value, p);
    }
  }
  if (spec.ratio_diagonal())
    for (int i = 0; i < spec.n; ++i)
      if (!std::holds_alternative<WeightSequence>(spec.diagonals[static_cast<std::size_t>(i)]))
        throw ConfigError(ptr + "/diagonals/" + std::to_string(i),
                          "ratio-diagonal superdiagonals need weight-sequence diagonals");
  return spec;
}

Json to_json(const ShieldsReport& r) {
  return Json{{"verdict", to_string(r.verdict)}, {"sup", r.sup},       {"inf", r.inf},
              {"slope", r.slope},                {"r_squared", r.r_squared}, {"horizon", r.horizon}};
}

Json to_json(const MembershipThresholds& t) {
  return Json{{"eps_mem", t.eps_mem}, {"delta_res", t.delta_res}, {"growth", t.growth}, {"cg_tol", t.cg_tol}};
}

Json to_json(const MembershipReport& r) {
  Json ladder = Json::array();
  for (const auto& rec : r.ladder)
    ladder.push_back(Json{{"N", rec.N},
                          {"residual", rec.residual},
                          {"wnorm", rec.wnorm},
                          {"target_norm", rec.target_norm},
                          {"converged", rec.converged},
                          {"iterations", rec.iterations}});
  return Json{{"power", r.power},
              {"ladder", std::move(ladder)},
              {"class", to_string(r.classification)},
              {"thresholds", to_json(r.thresholds)},
              {"target_norm", r.target_norm}};
}

Json to_json(const KerRanReport& r) {
  Json els = Json::array();
  for (const auto& e : r.elements) {
    Json j{{"pivot", {e.pivot_row, e.pivot_col}}, {"membership", to_json(e.membership)}};
    if (e.quasinilpotency) j["quasinilpotency_trend"] = e.quasinilpotency->trend;
    els.push_back(std::move(j));
  }
  return Json{{"property_h", r.property_h}, {"elements", std::move(els)}};
}

Json to_json(const IntertwinerStructureReport& r) {
  return Json{{"passed", r.passed},
              {"kernel_dim", r.kernel_dim},
              {"adjoint_kernel_dim", r.adjoint_kernel_dim},
              {"max_lower", r.max_lower},
              {"max_recursion_deviation", r.max_recursion_deviation},
              {"max_adjoint_upper", r.max_adjoint_upper},
              {"max_adjoint_deviation", r.max_adjoint_deviation},
              {"failures", r.failures}};
}

Json to_json(const FlagReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back(Json{{"condition", c.condition},
                          {"i", c.i + 1},
                          {"passed", c.passed},
                          {"value", c.value},
                          {"threshold", c.threshold}});
  return Json{{"passed", r.passed()}, {"checks", std::move(checks)}};
}

Json to_json(const ConditionAReport& r) {
  Json j{{"passed", r.passed}, {"max_deviation", r.max_deviation}};
  if (r.worst_i >= 0) j["worst_block"] = {r.worst_i + 1, r.worst_j + 1};
  return j;
}

Json to_json(const ReductionResult& r) {
  Json blocks = Json::array();
  for (int i = 0; i < r.K.blocks(); ++i)
    for (int j = i + 1; j < r.K.blocks(); ++j)
      blocks.push_back(Json{{"block", {i + 1, j + 1}}, {"norm", r.K.block(i, j).norm()}});
  return Json{{"residual", r.residual}, {"K_blocks", std::move(blocks)}, {"X_norm", r.X.data().norm()}};
}

Json to_json(const LeakageReport& r) {
  Json recs = Json::array();
  for (const auto& rec : r.records)
    recs.push_back(Json{{"N", rec.N},
                        {"epsilon", rec.epsilon},
                        {"interior_epsilon", rec.interior_epsilon},
                        {"kernel_dim", rec.kernel_dim}});
  return Json{{"records", std::move(recs)}, {"decay_ratios", r.decay_ratios}};
}

Json to_json(const BandReport& r) {
  Json j{{"passed", r.passed},
         {"kernel_dim", r.kernel_dim},
         {"upper_dim", r.upper_dim},
         {"margin", r.margin},
         {"max_violation", r.max_violation}};
  if (r.worst)
    j["worst"] = Json{{"element", r.worst->element}, {"block", {r.worst->i + 1, r.worst->j + 1}},
                      {"k", r.worst->k},             {"l", r.worst->l},
                      {"magnitude", r.worst->magnitude}};
  return j;
}

Json to_json(const BlockShields& b) {
  return Json{{"i", b.i + 1},
              {"shields", to_json(b.shields)},
              {"analytic_limit", to_string(b.analytic_limit)},
              {"condition", finite_or_null(b.condition)}};
}

Json to_json(const SimilarityCertificate& c) {
  Json blocks = Json::array();
  for (const auto& b : c.blocks) blocks.push_back(to_json(b));
  Json j{{"verdict", to_string(c.verdict)},
         {"blocks", std::move(blocks)},
         {"residual", c.residual},
         {"condition", finite_or_null(c.condition_estimate)},
         {"bridged", c.bridged}};
  if (c.bridged) {
    j["reduction_residual"] = c.reduction_residual;
    j["reduction_residual_tilde"] = c.reduction_residual_tilde;
    j["X_norm"] = c.X.data().norm();
  } else {
    std::vector<double> d(c.X.data().diagonal().data(), c.X.data().diagonal().data() + c.X.data().rows());
    j["X_diagonal"] = d;
  }
  return j;
}

Json to_json(const QuasiSimilarityReport& r) {
  Json blocks = Json::array();
  for (const auto& b : r.blocks) blocks.push_back(to_json(b));
  Json j{{"verdict", to_string(r.verdict)},
         {"rationale", r.rationale},
         {"blocks", std::move(blocks)},
         {"residual", r.residual},
         {"condition", finite_or_null(r.condition)},
         {"assumptions", r.assumptions}};
  if (r.certificate) j["certificate"] = to_json(*r.certificate);
  return j;
}

Json to_json(const SIReport& r) {
  Json ms = Json::array();
  for (const auto& m : r.memberships) {
    Json j = to_json(m.report);
    j["superdiagonal"] = {m.i + 1, m.i + 2};
    ms.push_back(std::move(j));
  }
  Json j{{"criterion", to_string(r.criterion)},
         {"verdict", to_string(r.verdict)},
         {"memberships", std::move(ms)},
         {"assumptions", r.assumptions},
         {"note", r.note}};
  if (r.splitting_residual) j["splitting_residual"] = *r.splitting_residual;
  return j;
}

Json to_json(const RatioDivergence& r) {
  return Json{{"diverging", r.diverging},
              {"analytic_diverging", r.analytic_diverging},
              {"slope", r.slope},
              {"r_squared", r.r_squared},
              {"last_log_value", r.log_values.empty() ? 0.0 : r.log_values.back()}};
}

Json to_json(const KernelRelationReport& r) {
  Json s = Json::array();
  for (const auto& c : r.samples)
    s.push_back(Json{{"w", c.w}, {"max_error", c.max_error}, {"allowance", c.allowance}, {"passed", c.passed}});
  return Json{{"passed", r.passed}, {"samples", std::move(s)}};
}

Json to_json(const GalleryReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back(Json{{"relation", c.relation}, {"residual", c.residual}, {"passed", c.passed}});
  Json j{{"name", r.name}, {"N", r.N}, {"passed", r.passed}, {"checks", std::move(checks)}};
  if (r.growth) j["growth"] = to_json(*r.growth);
  if (r.si_T) j["si_T"] = to_string(*r.si_T);
  if (r.si_T_tilde) j["si_T_tilde"] = to_string(*r.si_T_tilde);
  if (r.property_h) j["property_h"] = *r.property_h;
  if (r.transported_si) j["transported_si"] = *r.transported_si;
  return j;
}

}  // namespace flagop
