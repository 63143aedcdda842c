#pragma once

// Contingency tables and Pearson independence statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "firmsaudit/error.hpp"
#include "firmsaudit/random.hpp"
#include "firmsaudit/special.hpp"

namespace firmsaudit {

/// Dense row-major real matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

class ContingencyTable {
 public:
  ContingencyTable() = default;

  ContingencyTable(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                   std::vector<std::uint64_t> counts)
      : row_labels_(std::move(row_labels)), col_labels_(std::move(col_labels)), counts_(std::move(counts)) {
    if (counts_.size() != row_labels_.size() * col_labels_.size()) {
      throw AuditError(ErrorCode::InvalidArgument, "contingency counts do not match label dimensions");
    }
    row_totals_.assign(rows(), 0);
    col_totals_.assign(cols(), 0);
    for (std::size_t i = 0; i < rows(); ++i) {
      for (std::size_t j = 0; j < cols(); ++j) {
        row_totals_[i] += at(i, j);
        col_totals_[j] += at(i, j);
        grand_ += at(i, j);
      }
    }
  }

  [[nodiscard]] std::size_t rows() const noexcept { return row_labels_.size(); }
  [[nodiscard]] std::size_t cols() const noexcept { return col_labels_.size(); }
  [[nodiscard]] std::uint64_t at(std::size_t i, std::size_t j) const { return counts_[i * cols() + j]; }
  [[nodiscard]] const std::vector<std::string>& row_labels() const noexcept { return row_labels_; }
  [[nodiscard]] const std::vector<std::string>& col_labels() const noexcept { return col_labels_; }
  [[nodiscard]] std::uint64_t row_total(std::size_t i) const { return row_totals_[i]; }
  [[nodiscard]] std::uint64_t col_total(std::size_t j) const { return col_totals_[j]; }
  [[nodiscard]] std::uint64_t grand_total() const noexcept { return grand_; }

  /// Count for a label pair; zero when either label is absent.
  [[nodiscard]] std::uint64_t count(const std::string& row, const std::string& col) const {
    const auto i = std::find(row_labels_.begin(), row_labels_.end(), row);
    const auto j = std::find(col_labels_.begin(), col_labels_.end(), col);
    if (i == row_labels_.end() || j == col_labels_.end()) return 0;
    return at(static_cast<std::size_t>(i - row_labels_.begin()), static_cast<std::size_t>(j - col_labels_.begin()));
  }

  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;

 private:
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> row_totals_;
  std::vector<std::uint64_t> col_totals_;
  std::uint64_t grand_ = 0;
};

/// Sparse accumulation of labelled pairs. Merge is a cell-wise sum, so tables
/// built over disjoint partitions combine into the table of the whole.
class ContingencyBuilder {
 public:
  void add(const std::string& row, const std::string& col, std::uint64_t n = 1) { cells_[{row, col}] += n; }

  void merge(const ContingencyBuilder& other) {
    for (const auto& [key, n] : other.cells_) cells_[key] += n;
  }

  [[nodiscard]] bool empty() const noexcept { return cells_.empty(); }

  /// Dense table with labels sorted lexicographically.
  [[nodiscard]] ContingencyTable build() const {
    if (cells_.empty()) throw AuditError(ErrorCode::EmptyDataset, "no records for contingency table");
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    for (const auto& [key, _] : cells_) {
      rows.push_back(key.first);
      cols.push_back(key.second);
    }
    auto uniq = [](std::vector<std::string>& v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(rows);
    uniq(cols);
    std::vector<std::uint64_t> counts(rows.size() * cols.size(), 0);
    for (const auto& [key, n] : cells_) {
      const auto i = static_cast<std::size_t>(std::lower_bound(rows.begin(), rows.end(), key.first) - rows.begin());
      const auto j = static_cast<std::size_t>(std::lower_bound(cols.begin(), cols.end(), key.second) - cols.begin());
      counts[i * cols.size() + j] += n;
    }
    return ContingencyTable(std::move(rows), std::move(cols), std::move(counts));
  }

 private:
  std::map<std::pair<std::string, std::string>, std::uint64_t> cells_;
};

template <typename Range, typename RowKey, typename ColKey>
ContingencyTable build_contingency(const Range& records, RowKey&& row_key, ColKey&& col_key) {
  ContingencyBuilder b;
  for (const auto& r : records) b.add(row_key(r), col_key(r));
  return b.build();
}

/// E_ij = row_total_i * col_total_j / grand_total. The numerator is formed in
/// 128-bit integers; only the final quotient is rounded.
inline Matrix expected_counts(const ContingencyTable& t) {
  if (t.grand_total() == 0) throw AuditError(ErrorCode::EmptyDataset, "grand total is zero");
  Matrix e(t.rows(), t.cols());
  const auto g = static_cast<uint128>(t.grand_total());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) {
      const auto num = static_cast<uint128>(t.row_total(i)) * t.col_total(j);
      const auto q = num / g;
      const auto r = num % g;
      e(i, j) = static_cast<double>(q) + static_cast<double>(r) / static_cast<double>(g);
    }
  }
  return e;
}

namespace detail {
inline void require_nondegenerate(const ContingencyTable& t) {
  if (t.grand_total() == 0) throw AuditError(ErrorCode::EmptyDataset, "grand total is zero");
  for (std::size_t i = 0; i < t.rows(); ++i) {
    if (t.row_total(i) == 0) throw AuditError(ErrorCode::DegenerateTable, "row '" + t.row_labels()[i] + "' is empty");
  }
  for (std::size_t j = 0; j < t.cols(); ++j) {
    if (t.col_total(j) == 0) throw AuditError(ErrorCode::DegenerateTable, "column '" + t.col_labels()[j] + "' is empty");
  }
}

inline double residual(std::uint64_t observed, double expected) {
  // Keeps Z = -sqrt(E) exact for structural zeros.
  if (observed == 0) return -std::sqrt(expected);
  return (static_cast<double>(observed) - expected) / std::sqrt(expected);
}
}  // namespace detail

/// Z_ij = (O_ij - E_ij) / sqrt(E_ij).
inline Matrix standardized_residuals(const ContingencyTable& t) {
  detail::require_nondegenerate(t);
  const Matrix e = expected_counts(t);
  Matrix z(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) z(i, j) = detail::residual(t.at(i, j), e(i, j));
  }
  return z;
}

/// sqrt(chi2 / (N * min(r-1, c-1))), clamped to [0, 1].
inline double cramers_v(double statistic, std::uint64_t grand_total, std::size_t r, std::size_t c) {
  if (grand_total == 0) throw AuditError(ErrorCode::EmptyDataset, "grand total is zero");
  const std::size_t k = std::min(r, c);
  if (k < 2) throw AuditError(ErrorCode::DegenerateTable, "Cramer's V needs at least a 2x2 table");
  const double v = std::sqrt(statistic / (static_cast<double>(grand_total) * static_cast<double>(k - 1)));
  return std::clamp(v, 0.0, 1.0);
}

struct ChiSquareResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  double log_p = 0.0;
  Matrix expected;
  Matrix residuals;
  /// Absent for 1xc and rx1 tables.
  std::optional<double> cramers_v;
};

/// Pearson chi-square test of independence, without continuity correction.
inline ChiSquareResult chi_square_test(const ContingencyTable& t) {
  detail::require_nondegenerate(t);
  ChiSquareResult res;
  res.expected = expected_counts(t);
  res.residuals = Matrix(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) {
      const double e = res.expected(i, j);
      const double diff = static_cast<double>(t.at(i, j)) - e;
      res.statistic += diff * diff / e;
      res.residuals(i, j) = detail::residual(t.at(i, j), e);
    }
  }
  res.df = static_cast<int>((t.rows() - 1) * (t.cols() - 1));
  if (res.df >= 1) {
    const auto tail = chi_square_sf(res.statistic, res.df);
    res.p_value = tail.p;
    res.log_p = tail.log_p;
    res.cramers_v = cramers_v(res.statistic, t.grand_total(), t.rows(), t.cols());
  }
  return res;
}

}  // namespace firmsaudit
