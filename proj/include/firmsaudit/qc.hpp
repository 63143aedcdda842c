#pragma once

// Data-quality validation battery evaluated in one streaming pass.

#include <cstdint>
#include <string>
#include <vector>

#include "firmsaudit/records.hpp"

namespace firmsaudit {

struct QCThresholds {
  double lat_min = -90.0;
  double lat_max = 90.0;
  double lon_min = -180.0;
  double lon_max = 180.0;
  // Typical brightness range, inclusive on both ends.
  double brightness_low = 280.0;
  double brightness_high = 500.0;
  /// Minimum in-range fraction for the brightness check to pass.
  double brightness_min_fraction = 0.99;
  /// Adequacy requires strictly more valid rows than this.
  std::uint64_t adequate_sample_size = 1'000'000;
};

struct QCCheck {
  std::string name;
  std::string result;
  bool passed{};
  /// Gating checks abort a strict audit when they fail; sample-size adequacy
  /// is reported but not gating.
  bool gating{true};
};

struct QCReport {
  std::uint64_t total_rows = 0;   // data rows read, valid or not
  std::uint64_t valid_rows = 0;   // rows that parsed into records
  std::uint64_t missing_value_rows = 0;
  std::uint64_t invalid_confidence = 0;
  std::uint64_t invalid_daynight = 0;
  std::uint64_t other_syntax_errors = 0;
  std::uint64_t lat_out_of_bounds = 0;
  std::uint64_t lon_out_of_bounds = 0;
  std::uint64_t brightness_in_range = 0;
  double brightness_in_typical_range_fraction = 1.0;
  bool sample_size_adequate = false;
  std::vector<QCCheck> checks;
  QCThresholds thresholds;

  [[nodiscard]] bool passed() const {
    for (const auto& c : checks) {
      if (c.gating && !c.passed) return false;
    }
    return true;
  }
};

namespace detail {
inline std::string percent(std::uint64_t good, std::uint64_t total) {
  if (total == 0) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * static_cast<double>(good) / static_cast<double>(total));
  return buf;
}
}  // namespace detail

/// Partial QC state; merging partial accumulators is associative and
/// commutative, so row ranges may be scanned independently.
class QCAccumulator {
 public:
  explicit QCAccumulator(QCThresholds thresholds = {}) : t_(thresholds) {}

  void add(const FireDetection& r) {
    ++valid_;
    if (r.latitude < t_.lat_min || r.latitude > t_.lat_max) ++lat_oob_;
    if (r.longitude < t_.lon_min || r.longitude > t_.lon_max) ++lon_oob_;
    if (r.bright_ti4 >= t_.brightness_low && r.bright_ti4 <= t_.brightness_high) ++bright_ok_;
  }

  void add_skips(const SkipCounts& skips) { skips_.merge(skips); }

  void merge(const QCAccumulator& other) {
    valid_ += other.valid_;
    lat_oob_ += other.lat_oob_;
    lon_oob_ += other.lon_oob_;
    bright_ok_ += other.bright_ok_;
    skips_.merge(other.skips_);
  }

  [[nodiscard]] QCReport report() const {
    QCReport q;
    q.thresholds = t_;
    q.valid_rows = valid_;
    q.total_rows = valid_ + skips_.total();
    q.missing_value_rows = skips_.count(ParseErrorKind::MissingValue) + skips_.count(ParseErrorKind::MissingColumn);
    q.invalid_confidence = skips_.count(ParseErrorKind::InvalidConfidence);
    q.invalid_daynight = skips_.count(ParseErrorKind::InvalidDayNight);
    q.other_syntax_errors = skips_.total() - q.missing_value_rows - q.invalid_confidence - q.invalid_daynight;
    q.lat_out_of_bounds = lat_oob_;
    q.lon_out_of_bounds = lon_oob_;
    q.brightness_in_range = bright_ok_;
    q.brightness_in_typical_range_fraction =
        valid_ == 0 ? 1.0 : static_cast<double>(bright_ok_) / static_cast<double>(valid_);
    q.sample_size_adequate = valid_ > t_.adequate_sample_size;

    const auto n = q.total_rows;
    q.checks.push_back({"Missing values", std::to_string(q.missing_value_rows), q.missing_value_rows == 0});
    q.checks.push_back({"Valid confidence values (h/n/l)", detail::percent(n - q.invalid_confidence, n),
                        q.invalid_confidence == 0});
    q.checks.push_back({"Valid day/night flags (D/N)", detail::percent(n - q.invalid_daynight, n),
                        q.invalid_daynight == 0});
    q.checks.push_back({"Geographic bounds (lat)", detail::percent(valid_ - lat_oob_, valid_), lat_oob_ == 0});
    q.checks.push_back({"Geographic bounds (lon)", detail::percent(valid_ - lon_oob_, valid_), lon_oob_ == 0});
    q.checks.push_back({"Brightness range (typical)", detail::percent(bright_ok_, valid_),
                        q.brightness_in_typical_range_fraction >= t_.brightness_min_fraction});
    q.checks.push_back({"Sample size adequacy", q.sample_size_adequate ? "Yes" : "No", q.sample_size_adequate,
                        false});
    return q;
  }

 private:
  QCThresholds t_;
  std::uint64_t valid_ = 0;
  std::uint64_t lat_oob_ = 0;
  std::uint64_t lon_oob_ = 0;
  std::uint64_t bright_ok_ = 0;
  SkipCounts skips_;
};

/// Drains the reader and evaluates every check.
inline QCReport run_qc(DatasetReader& reader, const QCThresholds& thresholds = {}) {
  QCAccumulator acc(thresholds);
  reader.for_each([&](const FireDetection& r) { acc.add(r); });
  acc.add_skips(reader.skipped());
  return acc.report();
}

template <typename Range>
QCReport run_qc(const Range& records, const SkipCounts& skips, const QCThresholds& thresholds = {}) {
  QCAccumulator acc(thresholds);
  for (const auto& r : records) acc.add(r);
  acc.add_skips(skips);
  return acc.report();
}

}  // namespace firmsaudit
