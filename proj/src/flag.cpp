#include "flagop/flag.hpp"

#include "flagop/linalg.hpp"
#include "flagop/sylvester.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace flagop {

BlockSource BlockSource::fixed(Matrix m) {
  if (m.rows() != m.cols()) throw DimensionError("block must be square");
  BlockSource s;
  s.fixed_ = std::move(m);
  s.description_ = "fixed";
  return s;
}

BlockSource BlockSource::generated(std::function<Matrix(Index)> build, std::string description) {
  BlockSource s;
  s.build_ = std::move(build);
  s.description_ = std::move(description);
  return s;
}

Matrix BlockSource::at(Index N) const {
  Matrix m = fixed_ ? *fixed_ : build_(N);
  if (m.rows() != N || m.cols() != N)
    throw DimensionError("block '" + description_ + "' is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(N) + "x" + std::to_string(N));
  return m;
}

void FlagSpec::validate() const {
  if (n < 2) throw SpecError("block count n must be at least 2");
  if (static_cast<int>(diagonals.size()) != n)
    throw SpecError("expected " + std::to_string(n) + " diagonal atoms, got " + std::to_string(diagonals.size()));
  if (ratio_diagonal()) {
    for (int i = 0; i < n; ++i)
      if (!std::holds_alternative<WeightSequence>(diagonals[static_cast<std::size_t>(i)]))
        throw SpecError("ratio-diagonal superdiagonals need weight-sequence diagonal " + std::to_string(i + 1));
  } else {
    const auto& c = std::get<CustomSuperdiagonal>(superdiagonal);
    if (static_cast<int>(c.blocks.size()) != n - 1)
      throw SpecError("expected " + std::to_string(n - 1) + " custom superdiagonal blocks");
  }
  for (const auto& [key, coeffs] : symbols) {
    const auto [i, j] = key;
    if (i < 0 || j < i + 2 || j >= n)
      throw SpecError("symbol key (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                      ") outside 1 <= i, i + 2 <= j <= n");
  }
}

const WeightSequence& FlagSpec::diagonal_sequence(int i) const {
  const auto* s = std::get_if<WeightSequence>(&diagonals.at(static_cast<std::size_t>(i)));
  if (!s) throw SpecError("diagonal " + std::to_string(i + 1) + " is not a weight sequence");
  return *s;
}

Matrix FlagSpec::diagonal_block(int i, Index N) const {
  const auto& atom = diagonals.at(static_cast<std::size_t>(i));
  if (const auto* s = std::get_if<WeightSequence>(&atom)) return truncate_shift(*s, N).entries;
  return std::get<BlockSource>(atom).at(N);
}

FlagSpec ratio_diagonal_spec(std::vector<WeightSequence> diagonals, SymbolMap symbols) {
  FlagSpec s;
  s.n = static_cast<int>(diagonals.size());
  for (auto& d : diagonals) s.diagonals.emplace_back(std::move(d));
  s.symbols = std::move(symbols);
  s.validate();
  return s;
}

BlockMatrix::BlockMatrix(int blocks, Index block_size)
    : n_(blocks), N_(block_size), data_(Matrix::Zero(blocks * block_size, blocks * block_size)) {}

BlockMatrix::BlockMatrix(Matrix data, int blocks, Index block_size)
    : n_(blocks), N_(block_size), data_(std::move(data)) {
  if (data_.rows() != blocks * block_size || data_.cols() != blocks * block_size)
    throw DimensionError("partition does not match the matrix dimension");
}

namespace {

std::vector<Matrix> superdiagonal_blocks(const FlagSpec& spec, Index N) {
  std::vector<Matrix> sup;
  if (spec.ratio_diagonal()) {
    std::vector<BetaProducts> b;
    for (int i = 0; i < spec.n; ++i) b.push_back(beta(spec.diagonal_sequence(i), N));
    for (int i = 0; i + 1 < spec.n; ++i) {
      Vector d(N);
      for (Index l = 0; l < N; ++l)
        d(l) = std::exp(b[static_cast<std::size_t>(i + 1)].log_beta[static_cast<std::size_t>(l)] -
                        b[static_cast<std::size_t>(i)].log_beta[static_cast<std::size_t>(l)]);
      sup.push_back(d.asDiagonal());
    }
  } else {
    for (const auto& blk : std::get<CustomSuperdiagonal>(spec.superdiagonal).blocks) sup.push_back(blk.at(N));
  }
  return sup;
}

Matrix chain(const BlockMatrix& T, int i, int j) {
  Matrix c = T.block(i, i + 1);
  for (int m = i + 1; m < j; ++m) c = c * T.block(m, m + 1);
  return c;
}

void check_degree(const std::vector<double>& coeffs, Index N) {
  if (static_cast<Index>(coeffs.size()) > N + 1)
    throw SpecError("symbol degree " + std::to_string(coeffs.size() - 1) + " exceeds N = " + std::to_string(N));
}

}  // namespace

BlockMatrix assemble(const FlagSpec& spec, Index N) {
  spec.validate();
  if (N < 2) throw Error("assemble: N must be at least 2");
  BlockMatrix T(spec.n, N);
  for (int i = 0; i < spec.n; ++i) T.block(i, i) = spec.diagonal_block(i, N);
  const auto sup = superdiagonal_blocks(spec, N);
  for (int i = 0; i + 1 < spec.n; ++i) T.block(i, i + 1) = sup[static_cast<std::size_t>(i)];
  for (const auto& [key, coeffs] : spec.symbols) {
    check_degree(coeffs, N);
    const auto [i, j] = key;
    T.block(i, j) = polynomial_of(T.block(i, i), coeffs) * chain(T, i, j);
  }
  return T;
}

bool FlagReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.passed; });
}

FlagReport validate_flag(const BlockMatrix& T, double tol) {
  FlagReport rep;
  const int n = T.blocks();
  double lower = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) lower = std::max(lower, T.block(i, j).norm());
  rep.checks.push_back({"lower-blocks-zero", 0, lower == 0.0, lower, 0.0});
  for (int i = 0; i + 1 < n; ++i) {
    const Matrix a = T.block(i, i), s = T.block(i, i + 1), b = T.block(i + 1, i + 1);
    const double ns = s.norm();
    rep.checks.push_back({"superdiagonal-nonzero", i, ns > tol, ns, tol});
    const double dev = (a * s - s * b).norm();
    const double scale = a.norm() * ns + ns * b.norm();
    rep.checks.push_back({"flag-intertwining", i, dev <= tol * scale, dev, tol * scale});
  }
  return rep;
}

FlagReport validate_flag(const FlagSpec& spec, Index N, double tol) { return validate_flag(assemble(spec, N), tol); }

bool is_of_form(const FlagSpec& spec) {
  for (const auto& [key, coeffs] : spec.symbols)
    if (std::any_of(coeffs.begin(), coeffs.end(), [](double c) { return c != 0.0; })) return false;
  return true;
}

FlagSpec of_companion(const FlagSpec& spec) {
  FlagSpec s = spec;
  s.symbols.clear();
  return s;
}

ConditionAReport check_condition_a(const FlagSpec& spec, const BlockMatrix& T, double tol) {
  spec.validate();
  if (T.blocks() != spec.n) throw DimensionError("block count differs from the flag spec");
  ConditionAReport rep;
  for (int i = 0; i < spec.n; ++i)
    for (int j = i + 2; j < spec.n; ++j) {
      Matrix expected = Matrix::Zero(T.block_size(), T.block_size());
      if (auto it = spec.symbols.find({i, j}); it != spec.symbols.end()) {
        check_degree(it->second, T.block_size());
        expected = polynomial_of(T.block(i, i), it->second) * chain(T, i, j);
      }
      const double dev = (T.block(i, j) - expected).norm();
      if (rep.worst_i < 0 || dev > rep.max_deviation) {
        rep.max_deviation = dev;
        rep.worst_i = i;
        rep.worst_j = j;
      }
      if (dev > tol * std::max(1.0, expected.norm())) rep.passed = false;
    }
  return rep;
}

ConditionAReport check_condition_a(const FlagSpec& spec, Index N, double tol) {
  return check_condition_a(spec, assemble(spec, N), tol);
}

namespace {

// R S^{-1} for a superdiagonal block S
Matrix right_divide(const Matrix& R, const Matrix& S, bool diagonal, int block) {
  if (diagonal) {
    const Vector d = S.diagonal();
    for (Index c = 0; c < d.size(); ++c)
      if (!(d(c) != 0.0 && std::isfinite(d(c))))
        throw Error("superdiagonal block (" + std::to_string(block + 1) + "," + std::to_string(block + 2) +
                    ") is not invertible");
    return R * d.cwiseInverse().asDiagonal();
  }
  Eigen::FullPivLU<Matrix> lu(S.transpose());
  if (!lu.isInvertible())
    throw Error("superdiagonal block (" + std::to_string(block + 1) + "," + std::to_string(block + 2) +
                ") is not invertible");
  return lu.solve(R.transpose()).transpose();
}

}  // namespace

ReductionResult of_reduction(const FlagSpec& spec, Index N) {
  ReductionResult out;
  out.T = assemble(spec, N);
  out.S = assemble(of_companion(spec), N);
  const int n = spec.n;
  const auto& F = out.T;
  const auto& S = out.S;
  out.K = BlockMatrix(n, N);
  auto& K = out.K;
  const bool diag = spec.ratio_diagonal();

  // rows from the bottom; K_{f,n-1} = F_{f,n-1}, then the rest of row f
  // from the (f, i) block of X S = F X, descending in i
  for (int f = n - 2; f >= 0; --f) {
    K.block(f, n - 1) = F.block(f, n - 1);
    for (int i = n - 1; i >= f + 2; --i) {
      Matrix R = F.block(f, f) * K.block(f, i) - K.block(f, i) * S.block(i, i) + F.block(f, i);
      for (int m = f + 1; m < i; ++m) R += F.block(f, m) * K.block(m, i);
      K.block(f, i - 1) = right_divide(R, S.block(i - 1, i), diag, i - 1);
    }
  }

  out.X = BlockMatrix(K.data() + Matrix::Identity(n * N, n * N), n, N);
  const double nt = F.data().norm();
  out.residual = (out.X.data() * S.data() - F.data() * out.X.data()).norm() / (nt > 0 ? nt : 1.0);
  return out;
}

BlockMatrix unitriangular_inverse(const BlockMatrix& X) {
  const int n = X.blocks();
  const Index N = X.block_size();
  BlockMatrix Y(n, N);
  for (int i = n - 1; i >= 0; --i) {
    Y.block(i, i) = Matrix::Identity(N, N);
    for (int j = i + 1; j < n; ++j) {
      Matrix acc = Matrix::Zero(N, N);
      for (int m = i + 1; m <= j; ++m) acc -= X.block(i, m) * Y.block(m, j);
      Y.block(i, j) = acc;
    }
  }
  return Y;
}

namespace {

double largest_singular(const Matrix& L) {
  if (L.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(L);
  return svd.singularValues()(0);
}

LeakageRecord leakage_at(const BlockMatrix& TA, const BlockMatrix& TB, double tol) {
  const int n = TA.blocks();
  const Index N = TA.block_size();
  const Index dim = n * N;
  const auto ns = kernel_vectors(SylvesterPair(TA.data(), TB.data()), tol);
  LeakageRecord rec;
  rec.N = N;
  rec.kernel_dim = ns.basis.cols();
  if (rec.kernel_dim == 0) return rec;
  std::vector<Index> lower, interior;
  const Index keep = N - N / 4;
  for (Index c = 0; c < dim; ++c)
    for (Index r = 0; r < dim; ++r)
      if (r / N > c / N) {
        lower.push_back(c * dim + r);
        if (c % N < keep) interior.push_back(c * dim + r);
      }
  Matrix L(static_cast<Index>(lower.size()), rec.kernel_dim);
  for (std::size_t q = 0; q < lower.size(); ++q) L.row(static_cast<Index>(q)) = ns.basis.row(lower[q]);
  Matrix Li(static_cast<Index>(interior.size()), rec.kernel_dim);
  for (std::size_t q = 0; q < interior.size(); ++q) Li.row(static_cast<Index>(q)) = ns.basis.row(interior[q]);
  rec.epsilon = largest_singular(L);
  rec.interior_epsilon = largest_singular(Li);
  return rec;
}

void check_ladder(std::span<const Index> ladder) {
  if (ladder.empty()) throw Error("size ladder is empty");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (ladder[i] <= ladder[i - 1]) throw Error("ladder not increasing");
}

}  // namespace

LeakageReport intertwiner_leakage(const FlagSpec& a, const FlagSpec& b, std::span<const Index> ladder, double tol) {
  check_ladder(ladder);
  if (a.n != b.n) throw DimensionError("block counts differ");
  for (Index N : ladder) {
    const Index mk = (a.n * N) * (a.n * N);
    if (mk > kKernelSizeCap) throw SizeCapError(mk, kKernelSizeCap);
  }
  LeakageReport rep;
  for (Index N : ladder) rep.records.push_back(leakage_at(assemble(a, N), assemble(b, N), tol));
  for (std::size_t s = 1; s < rep.records.size(); ++s) {
    const double prev = rep.records[s - 1].epsilon;
    rep.decay_ratios.push_back(prev > 0 ? rep.records[s].epsilon / prev : 0.0);
  }
  return rep;
}

LeakageReport commutant_leakage(const FlagSpec& spec, std::span<const Index> ladder, double tol) {
  return intertwiner_leakage(spec, spec, ladder, tol);
}

BandReport check_band_structure(const std::vector<BlockMatrix>& elements, Index margin, double tol) {
  BandReport rep;
  rep.margin = margin;
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto& X = elements[e];
    const int n = X.blocks();
    const Index N = X.block_size();
    const double nx = X.data().norm();
    if (nx == 0.0) continue;
    const Index last_col = std::min(N - 1, N - margin);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const auto blk = X.block(i, j);
        for (Index l = 0; l <= last_col; ++l)
          for (Index k = (j - i) + l + 1; k < N; ++k) {
            const double v = std::abs(blk(k, l)) / nx;
            if (v > rep.max_violation) {
              rep.max_violation = v;
              rep.worst = BandViolation{static_cast<Index>(e), i, j, k, l, v};
            }
          }
      }
  }
  rep.passed = rep.max_violation <= tol;
  return rep;
}

BandReport intertwiner_band_structure(const FlagSpec& a, const FlagSpec& b, Index N, double tol,
                                      std::optional<Index> margin) {
  if (a.n != b.n) throw DimensionError("block counts differ");
  const int n = a.n;
  const Index dim = n * N;
  const auto ns = kernel_vectors(SylvesterPair(assemble(a, N).data(), assemble(b, N).data()));
  const Index d = ns.basis.cols();
  std::vector<BlockMatrix> elements;
  if (d > 0) {
    std::vector<Index> lower;
    for (Index c = 0; c < dim; ++c)
      for (Index r = 0; r < dim; ++r)
        if (r / N > c / N) lower.push_back(c * dim + r);
    Matrix L(static_cast<Index>(lower.size()), d);
    for (std::size_t q = 0; q < lower.size(); ++q) L.row(static_cast<Index>(q)) = ns.basis.row(lower[q]);
    Eigen::BDCSVD<Matrix> svd(L, Eigen::ComputeFullV);
    const Vector& s = svd.singularValues();
    constexpr double kLeakCut = 1e-8;
    Index leaking = 0;
    for (Index q = 0; q < s.size(); ++q)
      if (s(q) > kLeakCut) ++leaking;
    const Matrix upper = ns.basis * svd.matrixV().rightCols(d - leaking);
    for (Index c = 0; c < upper.cols(); ++c)
      elements.emplace_back(Eigen::Map<const Matrix>(upper.col(c).data(), dim, dim), n, N);
  }
  auto rep = check_band_structure(elements, margin.value_or(N / 4), tol);
  rep.kernel_dim = d;
  rep.upper_dim = static_cast<Index>(elements.size());
  return rep;
}

}  // namespace flagop
