#pragma once

// Spatial grid, calendar-month and latitude-band aggregation of the
// night/low-confidence count.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "firmsaudit/error.hpp"
#include "firmsaudit/records.hpp"

namespace firmsaudit {

namespace detail {
inline bool night_low(const FireDetection& r) { return r.is_night() && r.confidence == Confidence::Low; }
}  // namespace detail

struct GridResult {
  double cell_size = 10.0;
  std::size_t rows = 0;  // latitude cells
  std::size_t cols = 0;  // longitude cells
  std::vector<std::uint64_t> totals;     // row-major
  std::vector<std::uint64_t> night_low;  // row-major
  std::size_t nonzero_cells = 0;        // cells with night_low > 0
  std::size_t occupied_cells = 0;       // cells with any detection

  [[nodiscard]] std::uint64_t total(std::size_t r, std::size_t c) const { return totals[r * cols + c]; }
  [[nodiscard]] std::uint64_t night_low_at(std::size_t r, std::size_t c) const { return night_low[r * cols + c]; }
  [[nodiscard]] std::uint64_t grand_total() const {
    std::uint64_t n = 0;
    for (auto t : totals) n += t;
    return n;
  }
};

class GridAccumulator {
 public:
  explicit GridAccumulator(double cell_size = 10.0) : cell_size_(cell_size) {
    rows_ = bins_for(180.0, cell_size);
    cols_ = bins_for(360.0, cell_size);
    if (rows_ == 0 || cols_ == 0) {
      throw AuditError(ErrorCode::InvalidCellSize, "cell size must divide 180 degrees evenly");
    }
    totals_.assign(rows_ * cols_, 0);
    night_low_.assign(rows_ * cols_, 0);
  }

  void add(const FireDetection& r) {
    const auto cell = derive_fields(r, cell_size_, cell_size_).grid_cell;
    const auto i = cell.row * cols_ + cell.col;
    ++totals_[i];
    if (detail::night_low(r)) ++night_low_[i];
  }

  void merge(const GridAccumulator& o) {
    if (o.rows_ != rows_ || o.cols_ != cols_) throw AuditError(ErrorCode::InvalidCellSize, "grid shapes differ");
    for (std::size_t i = 0; i < totals_.size(); ++i) {
      totals_[i] += o.totals_[i];
      night_low_[i] += o.night_low_[i];
    }
  }

  [[nodiscard]] GridResult result() const {
    GridResult g;
    g.cell_size = cell_size_;
    g.rows = rows_;
    g.cols = cols_;
    g.totals = totals_;
    g.night_low = night_low_;
    for (std::size_t i = 0; i < totals_.size(); ++i) {
      if (night_low_[i] > 0) ++g.nonzero_cells;
      if (totals_[i] > 0) ++g.occupied_cells;
    }
    return g;
  }

 private:
  double cell_size_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint64_t> totals_;
  std::vector<std::uint64_t> night_low_;
};

template <typename Range>
GridResult grid_counts(const Range& records, double cell_size = 10.0) {
  GridAccumulator acc(cell_size);
  for (const auto& r : records) acc.add(r);
  return acc.result();
}

// ---------------------------------------------------------------------------

struct MonthlyRow {
  unsigned month = 0;  // 1..12
  std::uint64_t total_fires = 0;
  std::uint64_t night_fires = 0;
  std::uint64_t night_low_conf = 0;
  bool pattern_holds = true;
};

/// Aggregates by calendar month label; a span crossing a year boundary folds
/// both partial months into one row.
class MonthlyAccumulator {
 public:
  void add(const FireDetection& r) {
    auto& m = months_[r.month() - 1];
    ++m[0];
    if (r.is_night()) ++m[1];
    if (detail::night_low(r)) ++m[2];
  }

  void merge(const MonthlyAccumulator& o) {
    for (std::size_t i = 0; i < 12; ++i) {
      for (std::size_t k = 0; k < 3; ++k) months_[i][k] += o.months_[i][k];
    }
  }

  [[nodiscard]] std::vector<MonthlyRow> rows() const {
    std::vector<MonthlyRow> out;
    for (unsigned i = 0; i < 12; ++i) {
      const auto& m = months_[i];
      out.push_back({i + 1, m[0], m[1], m[2], m[2] == 0});
    }
    return out;
  }

 private:
  std::array<std::array<std::uint64_t, 3>, 12> months_{};
};

template <typename Range>
std::vector<MonthlyRow> monthly_table(const Range& records) {
  MonthlyAccumulator acc;
  for (const auto& r : records) acc.add(r);
  return acc.rows();
}

// ---------------------------------------------------------------------------

struct BandRow {
  std::size_t band = 0;
  double lat_lower = 0.0;
  double lat_upper = 0.0;
  std::uint64_t total_fires = 0;
  std::uint64_t night_low_conf = 0;
  bool qualifies = false;  // total_fires > min_count
  bool pattern_holds = true;
};

struct BandSummary {
  double band_width = 10.0;
  std::uint64_t min_count = 100;
  std::vector<BandRow> bands;  // every band over [-90, 90]
  std::size_t qualifying = 0;
  std::size_t holding = 0;  // qualifying bands where the pattern holds

  /// holding / qualifying; absent when no band qualifies.
  [[nodiscard]] std::optional<double> fraction() const {
    if (qualifying == 0) return std::nullopt;
    return static_cast<double>(holding) / static_cast<double>(qualifying);
  }
};

class BandAccumulator {
 public:
  explicit BandAccumulator(double band_width = 10.0) : width_(band_width) {
    n_ = bins_for(180.0, band_width);
    if (n_ == 0) throw AuditError(ErrorCode::InvalidBandWidth, "band width must divide 180 degrees evenly");
    totals_.assign(n_, 0);
    night_low_.assign(n_, 0);
  }

  void add(const FireDetection& r) {
    const auto b = bin_index(r.latitude, -90.0, width_, n_);
    ++totals_[b];
    if (detail::night_low(r)) ++night_low_[b];
  }

  void merge(const BandAccumulator& o) {
    if (o.n_ != n_) throw AuditError(ErrorCode::InvalidBandWidth, "band layouts differ");
    for (std::size_t i = 0; i < n_; ++i) {
      totals_[i] += o.totals_[i];
      night_low_[i] += o.night_low_[i];
    }
  }

  [[nodiscard]] BandSummary summary(std::uint64_t min_count = 100) const {
    BandSummary s;
    s.band_width = width_;
    s.min_count = min_count;
    for (std::size_t i = 0; i < n_; ++i) {
      BandRow row;
      row.band = i;
      row.lat_lower = -90.0 + width_ * static_cast<double>(i);
      row.lat_upper = row.lat_lower + width_;
      row.total_fires = totals_[i];
      row.night_low_conf = night_low_[i];
      row.qualifies = totals_[i] > min_count;
      row.pattern_holds = night_low_[i] == 0;
      if (row.qualifies) {
        ++s.qualifying;
        if (row.pattern_holds) ++s.holding;
      }
      s.bands.push_back(row);
    }
    return s;
  }

 private:
  double width_;
  std::size_t n_ = 0;
  std::vector<std::uint64_t> totals_;
  std::vector<std::uint64_t> night_low_;
};

template <typename Range>
BandSummary latitude_bands(const Range& records, double band_width = 10.0, std::uint64_t min_count = 100) {
  BandAccumulator acc(band_width);
  for (const auto& r : records) acc.add(r);
  return acc.summary(min_count);
}

}  // namespace firmsaudit
