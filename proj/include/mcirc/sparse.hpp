#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace mcirc {

/// Square matrix in compressed-row form with sorted, unique column indices.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Zero matrix with the given per-row column sets (each sorted, unique).
  static SparseMatrix from_pattern(const std::vector<std::vector<std::size_t>>& rows);
  /// Duplicate entries are summed.
  static SparseMatrix from_triplets(std::size_t n,
                                    std::vector<std::tuple<std::size_t, std::size_t, double>> t);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return n_; }
  std::size_t nnz() const { return vals_.size(); }
  std::span<const std::size_t> row_offsets() const { return row_ptr_; }
  std::span<const std::size_t> columns() const { return cols_; }
  std::span<const double> values() const { return vals_; }
  std::span<double> values() { return vals_; }

  /// Entry (i, j); zero when outside the pattern.
  double operator()(std::size_t i, std::size_t j) const;
  /// Adds v to a pattern entry; throws when (i, j) is not stored.
  void add(std::size_t i, std::size_t j, double v);

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> diagonal() const;
  bool same_pattern(const SparseMatrix& other) const;
  /// Entry-wise equality with the transpose.
  bool is_symmetric() const;
  double max_abs() const;

 private:
  std::ptrdiff_t find(std::size_t i, std::size_t j) const;

  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
};

/// a + alpha * b; both must share one sparsity pattern.
SparseMatrix add_scaled(const SparseMatrix& a, double alpha, const SparseMatrix& b);
SparseMatrix scaled(const SparseMatrix& a, double alpha);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

struct SolveResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  double residual = 0.0;  ///< final ||Ax - b|| / ||b||
};

/// Jacobi-preconditioned conjugate gradients for SPD systems. max_iter = 0
/// selects 10 n. Throws ConvergenceError when the tolerance is not reached
/// and NumericalError on a nonpositive diagonal.
SolveResult cg_solve(const SparseMatrix& a, std::span<const double> b, double tol = 1e-10,
                     std::size_t max_iter = 0, std::span<const double> x0 = {});

/// Symmetric coordinate Matrix Market dump (lower triangle, 1-based).
std::string format_matrix_market(const SparseMatrix& a);
void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path);

}  // namespace mcirc
