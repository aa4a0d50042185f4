#include "flagop/sweep.hpp"

#include "flagop/sylvester.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <thread>

namespace flagop {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  std::uint64_t z = master + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform(Rng& rng, double lo, double hi) {
  // top 53 bits, so the draw does not depend on the library's distribution code
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

WeightSequence random_weights(Rng& rng, Index prefix, double lo, double hi, TailRule tail) {
  std::vector<double> w(static_cast<std::size_t>(prefix));
  for (auto& x : w) x = uniform(rng, lo, hi);
  return WeightSequence::explicit_list(std::move(w), tail);
}

namespace {

SymbolMap random_symbols(Rng& rng, int n) {
  SymbolMap s;
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j) {
      const auto degree = static_cast<std::size_t>(rng() % 3);
      std::vector<double> c(degree + 1);
      for (auto& x : c) x = uniform(rng, -1.0, 1.0);
      s[{i, j}] = std::move(c);
    }
  return s;
}

}  // namespace

FlagSpec random_condition_a_spec(Rng& rng, int n, Index prefix) {
  std::vector<WeightSequence> d;
  for (int i = 0; i < n; ++i) d.push_back(random_weights(rng, prefix, 0.8, 1.25));
  return ratio_diagonal_spec(std::move(d), random_symbols(rng, n));
}

FlagPair random_bounded_pair(Rng& rng, int n, Index prefix) {
  const ConstantTail tail{uniform(rng, 0.8, 1.25)};
  std::vector<WeightSequence> d, dt;
  for (int i = 0; i < n; ++i) {
    d.push_back(random_weights(rng, prefix, 0.5, 2.0, tail));
    dt.push_back(random_weights(rng, prefix, 0.5, 2.0, tail));
  }
  return {ratio_diagonal_spec(std::move(d), random_symbols(rng, n)),
          ratio_diagonal_spec(std::move(dt), random_symbols(rng, n))};
}

Matrix random_corner(Rng& rng, Index k) {
  Matrix m(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) m(i, j) = uniform(rng, -1.0, 1.0);
  return m;
}

Matrix embed_corner(const Matrix& corner, Index N) {
  Matrix m = Matrix::Zero(N, N);
  const Index r = std::min(N, corner.rows());
  const Index c = std::min(N, corner.cols());
  m.topLeftCorner(r, c) = corner.topLeftCorner(r, c);
  return m;
}

std::vector<std::string> sweep_operations() { return {"of-reduction", "certificate", "intertwiner", "leakage"}; }

namespace {

TrialResult run_trial(const SweepOptions& o, int trial) {
  TrialResult r;
  r.trial = trial;
  r.seed = derive_seed(o.seed, o.identical ? 0 : static_cast<std::uint64_t>(trial));
  Rng rng(r.seed);
  if (o.operation == "of-reduction") {
    const auto spec = random_condition_a_spec(rng, o.n, o.prefix);
    const auto red = of_reduction(spec, o.N);
    r.metrics["residual"] = red.residual;
    r.passed = red.residual <= o.residual_tol;
    r.payload = Json{{"spec", to_json(spec)}, {"reduction", to_json(red)}};
  } else if (o.operation == "certificate") {
    const auto pair = random_bounded_pair(rng, o.n, o.prefix);
    const auto c = similarity_certificate(pair.T, pair.T_tilde, o.N);
    r.metrics["residual"] = c.residual;
    r.metrics["condition"] = c.condition_estimate;
    r.passed = c.verdict == CertificateVerdict::certified_on_horizon;
    r.payload = Json{{"T", to_json(pair.T)}, {"T_tilde", to_json(pair.T_tilde)}, {"certificate", to_json(c)}};
  } else if (o.operation == "intertwiner") {
    const auto a = random_weights(rng, o.N, 0.5, 2.0);
    const auto b = random_weights(rng, o.N, 0.5, 2.0);
    const auto s = verify_intertwiner_structure(a, b, o.N);
    r.metrics["kernel_dim"] = static_cast<double>(s.kernel_dim);
    r.metrics["max_lower"] = s.max_lower;
    r.metrics["max_recursion_deviation"] = s.max_recursion_deviation;
    r.passed = s.passed;
    r.payload = Json{{"a", to_json(a)}, {"b", to_json(b)}, {"structure", to_json(s)}};
  } else if (o.operation == "leakage") {
    std::vector<WeightSequence> d;
    for (int i = 0; i < o.n; ++i) d.push_back(random_weights(rng, o.prefix, 0.8, 1.25, ConstantTail{1.0}));
    const auto spec = ratio_diagonal_spec(std::move(d));
    const auto lk = commutant_leakage(spec, o.ladder);
    for (const auto& rec : lk.records) r.metrics["epsilon_N" + std::to_string(rec.N)] = rec.epsilon;
    double worst = 0.0;
    for (double x : lk.decay_ratios) worst = std::max(worst, x);
    r.metrics["max_decay_ratio"] = worst;
    r.passed = !lk.decay_ratios.empty() && worst <= o.decay;
    r.payload = Json{{"spec", to_json(spec)}, {"leakage", to_json(lk)}};
  } else {
    throw Error("unknown sweep operation '" + o.operation + "'");
  }
  return r;
}

}  // namespace

SweepReport run_sweep(const SweepOptions& o) {
  if (o.trials < 1) throw Error("sweep needs at least one trial");
  const auto ops = sweep_operations();
  if (std::find(ops.begin(), ops.end(), o.operation) == ops.end())
    throw Error("unknown sweep operation '" + o.operation + "'");
  SweepReport rep;
  rep.trials.resize(static_cast<std::size_t>(o.trials));
  std::vector<std::exception_ptr> errors(rep.trials.size());
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < o.trials; k = next++) {
      try {
        rep.trials[static_cast<std::size_t>(k)] = run_trial(o, o.first_trial + k);
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    }
  };
  {
    const int jobs = std::clamp(o.jobs, 1, o.trials);
    std::vector<std::jthread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  const std::string first = rep.trials.front().payload.dump();
  for (const auto& t : rep.trials) {
    if (!t.passed) rep.failures.push_back(t.trial);
    if (t.payload.dump() != first) rep.identical_payloads = false;
  }
  return rep;
}

Json aggregate(const SweepReport& report) {
  struct Acc {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    int count = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& t : report.trials)
    for (const auto& [k, v] : t.metrics) {
      auto& a = acc[k];
      a.lo = std::min(a.lo, v);
      a.hi = std::max(a.hi, v);
      a.sum += v;
      ++a.count;
    }
  Json j = Json::object();
  for (const auto& [k, a] : acc) j[k] = Json{{"min", a.lo}, {"max", a.hi}, {"mean", a.sum / a.count}};
  return j;
}

}  // namespace flagop
