#include "mcirc/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "mcirc/error.hpp"
#include "mcirc/text.hpp"

namespace mcirc {

SparseMatrix SparseMatrix::from_pattern(const std::vector<std::vector<std::size_t>>& rows) {
  SparseMatrix m;
  m.n_ = rows.size();
  m.row_ptr_.assign(1, 0);
  m.row_ptr_.reserve(m.n_ + 1);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r[k] >= m.n_) throw ValidationError("pattern column out of range");
      if (k > 0 && r[k] <= r[k - 1]) throw ValidationError("pattern columns must be sorted and unique");
    }
    m.cols_.insert(m.cols_.end(), r.begin(), r.end());
    m.row_ptr_.push_back(m.cols_.size());
  }
  m.vals_.assign(m.cols_.size(), 0.0);
  return m;
}

SparseMatrix SparseMatrix::from_triplets(
    std::size_t n, std::vector<std::tuple<std::size_t, std::size_t, double>> t) {
  std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  std::vector<std::vector<std::size_t>> rows(n);
  for (const auto& [i, j, v] : t) {
    if (i >= n || j >= n) throw ValidationError("triplet index out of range");
    if (rows[i].empty() || rows[i].back() != j) rows[i].push_back(j);
  }
  SparseMatrix m = from_pattern(rows);
  for (const auto& [i, j, v] : t) m.add(i, j, v);
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::vector<std::size_t>> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = {i};
  SparseMatrix m = from_pattern(rows);
  std::fill(m.vals_.begin(), m.vals_.end(), 1.0);
  return m;
}

std::ptrdiff_t SparseMatrix::find(std::size_t i, std::size_t j) const {
  if (i >= n_) return -1;
  auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return -1;
  return it - cols_.begin();
}

double SparseMatrix::operator()(std::size_t i, std::size_t j) const {
  auto k = find(i, j);
  return k < 0 ? 0.0 : vals_[static_cast<std::size_t>(k)];
}

void SparseMatrix::add(std::size_t i, std::size_t j, double v) {
  auto k = find(i, j);
  if (k < 0)
    throw ValidationError("entry (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") is outside the sparsity pattern");
  vals_[static_cast<std::size_t>(k)] += v;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) throw ValidationError("dimension mismatch in multiply");
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k] * x[cols_[k]];
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = (*this)(i, i);
  return d;
}

bool SparseMatrix::same_pattern(const SparseMatrix& other) const {
  return n_ == other.n_ && row_ptr_ == other.row_ptr_ && cols_ == other.cols_;
}

bool SparseMatrix::is_symmetric() const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const auto t = find(cols_[k], i);
      if (t < 0 ? vals_[k] != 0.0 : vals_[static_cast<std::size_t>(t)] != vals_[k]) return false;
    }
  return true;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : vals_) m = std::max(m, std::abs(v));
  return m;
}

SparseMatrix add_scaled(const SparseMatrix& a, double alpha, const SparseMatrix& b) {
  if (!a.same_pattern(b)) throw ValidationError("add_scaled requires identical sparsity patterns");
  SparseMatrix out = a;
  auto ov = out.values();
  auto bv = b.values();
  for (std::size_t k = 0; k < ov.size(); ++k) ov[k] += alpha * bv[k];
  return out;
}

SparseMatrix scaled(const SparseMatrix& a, double alpha) {
  SparseMatrix out = a;
  for (double& v : out.values()) v *= alpha;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

SolveResult cg_solve(const SparseMatrix& a, std::span<const double> b, double tol,
                     std::size_t max_iter, std::span<const double> x0) {
  const std::size_t n = a.rows();
  if (b.size() != n) throw ValidationError("right-hand side dimension mismatch");
  if (!x0.empty() && x0.size() != n) throw ValidationError("initial guess dimension mismatch");
  if (max_iter == 0) max_iter = 10 * std::max<std::size_t>(n, 1);

  std::vector<double> inv_diag = a.diagonal();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(inv_diag[i] > 0.0))
      throw NumericalError("nonpositive diagonal entry at row " + std::to_string(i));
    inv_diag[i] = 1.0 / inv_diag[i];
  }

  SolveResult res;
  res.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return res;
  if (!x0.empty()) res.x.assign(x0.begin(), x0.end());

  std::vector<double> r(n), z(n), p(n), ap(n);
  a.multiply(res.x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  res.residual = norm2(r) / bnorm;
  if (res.residual <= tol) return res;

  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    a.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw NumericalError("matrix is not positive definite (p^T A p <= 0)");
    const double step = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      res.x[i] += step * p[i];
      r[i] -= step * ap[i];
    }
    res.iterations = it;
    res.residual = norm2(r) / bnorm;
    if (res.residual <= tol) return res;
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw ConvergenceError("conjugate gradients did not converge in " + std::to_string(max_iter) +
                             " iterations (relative residual " + format_double(res.residual) + ")",
                         res.iterations, res.residual);
}

std::string format_matrix_market(const SparseMatrix& a) {
  auto rp = a.row_offsets();
  auto cols = a.columns();
  auto vals = a.values();
  std::size_t lower = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
      if (cols[k] <= i) ++lower;
  std::string s = "%%MatrixMarket matrix coordinate real symmetric\n";
  s += std::to_string(a.rows()) + ' ' + std::to_string(a.rows()) + ' ' + std::to_string(lower) + '\n';
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
      if (cols[k] <= i)
        s += std::to_string(i + 1) + ' ' + std::to_string(cols[k] + 1) + ' ' +
             format_double(vals[k]) + '\n';
  return s;
}

void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path) {
  write_text_atomic(path, format_matrix_market(a));
}

}  // namespace mcirc
