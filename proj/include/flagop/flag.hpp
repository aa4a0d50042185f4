#pragma once

#include "flagop/core.hpp"
#include "flagop/weights.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace flagop {

// An N x N block given either as a fixed matrix or as a rule producing one
// for every truncation size.
class BlockSource {
 public:
  static BlockSource fixed(Matrix m);
  static BlockSource generated(std::function<Matrix(Index)> build, std::string description);

  Matrix at(Index N) const;
  const std::optional<Matrix>& fixed_matrix() const { return fixed_; }
  const std::string& description() const { return description_; }

 private:
  std::optional<Matrix> fixed_;
  std::function<Matrix(Index)> build_;
  std::string description_;
};

using Atom = std::variant<WeightSequence, BlockSource>;

struct RatioDiagonal {};
struct CustomSuperdiagonal {
  std::vector<BlockSource> blocks;  // n - 1 blocks T_{i,i+1}
};
using SuperdiagonalMode = std::variant<RatioDiagonal, CustomSuperdiagonal>;

// 0-based block indices (i, j) with j >= i + 2 -> coefficients of phi_{i,j}
using SymbolMap = std::map<std::pair<int, int>, std::vector<double>>;

struct FlagSpec {
  int n = 2;
  std::vector<Atom> diagonals;
  SuperdiagonalMode superdiagonal = RatioDiagonal{};
  SymbolMap symbols;

  void validate() const;
  bool ratio_diagonal() const { return std::holds_alternative<RatioDiagonal>(superdiagonal); }
  const WeightSequence& diagonal_sequence(int i) const;
  Matrix diagonal_block(int i, Index N) const;
};

FlagSpec ratio_diagonal_spec(std::vector<WeightSequence> diagonals, SymbolMap symbols = {});

class BlockMatrix {
 public:
  BlockMatrix() = default;
  BlockMatrix(int blocks, Index block_size);
  BlockMatrix(Matrix data, int blocks, Index block_size);

  int blocks() const { return n_; }
  Index block_size() const { return N_; }
  std::vector<Index> partition() const { return std::vector<Index>(static_cast<std::size_t>(n_), N_); }
  const Matrix& data() const { return data_; }
  Matrix& data() { return data_; }

  auto block(int i, int j) { return data_.block(i * N_, j * N_, N_, N_); }
  auto block(int i, int j) const { return data_.block(i * N_, j * N_, N_, N_); }

 private:
  int n_ = 0;
  Index N_ = 0;
  Matrix data_;
};

BlockMatrix assemble(const FlagSpec& spec, Index N);

struct ConditionCheck {
  std::string condition;  // "superdiagonal-nonzero" or "flag-intertwining"
  int i = 0;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct FlagReport {
  std::vector<ConditionCheck> checks;
  bool passed() const;
};

FlagReport validate_flag(const FlagSpec& spec, Index N, double tol = 1e-10);
FlagReport validate_flag(const BlockMatrix& T, double tol = 1e-10);

bool is_of_form(const FlagSpec& spec);

// The same spec with every higher block removed.
FlagSpec of_companion(const FlagSpec& spec);

struct ConditionAReport {
  bool passed = true;
  double max_deviation = 0.0;
  int worst_i = -1;
  int worst_j = -1;
};

ConditionAReport check_condition_a(const FlagSpec& spec, Index N, double tol = 1e-10);
// Blocks above the superdiagonal of T against phi_{i,j}(T_ii) T_{i,i+1}...T_{j-1,j}
// built from T's own diagonal and superdiagonal blocks.
ConditionAReport check_condition_a(const FlagSpec& spec, const BlockMatrix& T, double tol = 1e-10);

struct ReductionResult {
  BlockMatrix T;  // assembled spec
  BlockMatrix S;  // assembled companion without higher blocks
  BlockMatrix K;
  BlockMatrix X;  // I + K, with X S = T X
  double residual = 0.0;  // ||X S - T X|| / ||T||
};

ReductionResult of_reduction(const FlagSpec& spec, Index N);

// Inverse of a block upper-unitriangular matrix by back substitution.
BlockMatrix unitriangular_inverse(const BlockMatrix& X);

struct LeakageRecord {
  Index N = 0;
  double epsilon = 0.0;           // largest lower-block mass over unit kernel elements
  double interior_epsilon = 0.0;  // same, ignoring the last N/4 columns of every block
  Index kernel_dim = 0;
};

struct LeakageReport {
  std::vector<LeakageRecord> records;
  std::vector<double> decay_ratios;  // epsilon(N_{s+1}) / epsilon(N_s)
};

LeakageReport commutant_leakage(const FlagSpec& spec, std::span<const Index> ladder, double tol = 1e-10);
// kernel of X -> T_A X - X T_B
LeakageReport intertwiner_leakage(const FlagSpec& a, const FlagSpec& b, std::span<const Index> ladder,
                                  double tol = 1e-10);

struct BandViolation {
  Index element = 0;
  int i = 0;
  int j = 0;
  Index k = 0;
  Index l = 0;
  double magnitude = 0.0;
};

struct BandReport {
  bool passed = true;
  Index kernel_dim = 0;
  Index upper_dim = 0;
  Index margin = 0;
  double max_violation = 0.0;
  std::optional<BandViolation> worst;
};

// Entries x^{(i,j)}_{k,l}, j > i, with k > j - i + l and l <= N - margin must
// vanish relative to the element norm.
BandReport check_band_structure(const std::vector<BlockMatrix>& elements, Index margin, double tol);

// Kernel elements of X -> T_A X - X T_B with the lower-block leaking directions
// projected out, checked for the banded form.
BandReport intertwiner_band_structure(const FlagSpec& a, const FlagSpec& b, Index N, double tol = 1e-10,
                                      std::optional<Index> margin = std::nullopt);

}  // namespace flagop
