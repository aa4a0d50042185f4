#pragma once

#include "flagop/core.hpp"
#include "flagop/flag.hpp"
#include "flagop/json_io.hpp"
#include "flagop/quasisim.hpp"
#include "flagop/weights.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace flagop {

// SplitMix64 output after `counter + 1` steps from state `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter);

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);

// `prefix` weights uniform in [lo, hi] followed by `tail`.
WeightSequence random_weights(Rng& rng, Index prefix, double lo, double hi, TailRule tail = RepeatLast{});

// Ratio-diagonal spec with random diagonals and random symbols of degree <= 2
// on every block above the superdiagonal.
FlagSpec random_condition_a_spec(Rng& rng, int n, Index prefix);

// Two ratio-diagonal specs whose diagonals differ in their prefixes only, so
// every block ratio is bounded. Symbols are drawn independently.
FlagPair random_bounded_pair(Rng& rng, int n, Index prefix);

// k x k matrix with entries uniform in [-1, 1].
Matrix random_corner(Rng& rng, Index k);

// `corner` in the top-left of an N x N zero matrix.
Matrix embed_corner(const Matrix& corner, Index N);

struct SweepOptions {
  std::string operation;  // of-reduction, certificate, intertwiner, leakage
  int trials = 1;
  int first_trial = 0;
  int n = 3;
  Index N = 16;
  std::vector<Index> ladder{8, 16, 32};
  Index prefix = 8;
  bool identical = false;  // every trial reuses the first trial's seed
  double residual_tol = 1e-8;
  double decay = 0.6;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  bool passed = false;
  std::map<std::string, double> metrics;
  Json payload;
};

struct SweepReport {
  std::vector<TrialResult> trials;  // ordered by trial index
  bool identical_payloads = true;
  std::vector<int> failures;
};

std::vector<std::string> sweep_operations();
SweepReport run_sweep(const SweepOptions& options);

// aggregate min / max / mean per metric
Json aggregate(const SweepReport& report);

}  // namespace flagop
