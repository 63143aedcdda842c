#pragma once

// Brightness-temperature statistics per (day/night, confidence) category and
// empirical detection-threshold inference.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "firmsaudit/error.hpp"
#include "firmsaudit/records.hpp"

namespace firmsaudit {

inline constexpr std::size_t kCategoryCount = 6;

/// Category order: D-h, D-l, D-n, N-h, N-l, N-n.
inline constexpr std::size_t category_index(DayNight d, Confidence c) { return index_of(d) * 3 + index_of(c); }

struct CategoryStats {
  DayNight daynight{};
  Confidence confidence{};
  std::uint64_t count = 0;
  // All absent when count == 0.
  std::optional<double> mean;
  std::optional<double> median;
  std::optional<double> min;
  std::optional<double> max;
  bool median_exact = true;
};

enum class MedianMode {
  /// Retain every value and sort; exact.
  Exact,
  /// Fixed 0.01 K histogram over [0, 1000) K; memory is constant and the
  /// median is reported as approximate.
  Histogram,
};

/// Running sum with Neumaier compensation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void merge(const CompensatedSum& o) {
    add(o.sum_);
    add(o.comp_);
  }
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class BrightnessAccumulator {
 public:
  static constexpr double kBinWidth = 0.01;
  static constexpr std::size_t kBins = 100000;

  explicit BrightnessAccumulator(MedianMode mode = MedianMode::Exact) : mode_(mode) {}

  void add(const FireDetection& r) { add(r.daynight, r.confidence, r.bright_ti4); }

  void add(DayNight d, Confidence c, double kelvin) {
    auto& cat = cats_[category_index(d, c)];
    ++cat.count;
    cat.sum.add(kelvin);
    cat.min = std::min(cat.min, kelvin);
    cat.max = std::max(cat.max, kelvin);
    if (mode_ == MedianMode::Exact) {
      cat.values.push_back(kelvin);
    } else {
      if (cat.bins.empty()) cat.bins.assign(kBins, 0);
      ++cat.bins[bin_of(kelvin)];
    }
  }

  void merge(const BrightnessAccumulator& other) {
    if (other.mode_ != mode_) throw AuditError(ErrorCode::InvalidArgument, "cannot merge differing median modes");
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
      auto& a = cats_[i];
      const auto& b = other.cats_[i];
      a.count += b.count;
      a.sum.merge(b.sum);
      a.min = std::min(a.min, b.min);
      a.max = std::max(a.max, b.max);
      a.values.insert(a.values.end(), b.values.begin(), b.values.end());
      if (!b.bins.empty()) {
        if (a.bins.empty()) a.bins.assign(kBins, 0);
        for (std::size_t k = 0; k < kBins; ++k) a.bins[k] += b.bins[k];
      }
    }
  }

  [[nodiscard]] MedianMode mode() const noexcept { return mode_; }

  /// All six categories, in category_index order.
  [[nodiscard]] std::vector<CategoryStats> stats() const {
    std::vector<CategoryStats> out;
    for (auto d : kAllDayNight) {
      for (auto c : kAllConfidences) {
        const auto& cat = cats_[category_index(d, c)];
        CategoryStats s;
        s.daynight = d;
        s.confidence = c;
        s.count = cat.count;
        s.median_exact = mode_ == MedianMode::Exact;
        if (cat.count > 0) {
          s.mean = std::clamp(cat.sum.value() / static_cast<double>(cat.count), cat.min, cat.max);
          s.min = cat.min;
          s.max = cat.max;
          s.median = std::clamp(median_of(cat), cat.min, cat.max);
        }
        out.push_back(s);
      }
    }
    return out;
  }

  /// Rows of the given strata whose brightness lies in [lo, hi].
  template <typename Filter>
  [[nodiscard]] std::uint64_t count_between(double lo, double hi, Filter&& include) const {
    std::uint64_t n = 0;
    for (auto d : kAllDayNight) {
      for (auto c : kAllConfidences) {
        if (!include(d, c)) continue;
        const auto& cat = cats_[category_index(d, c)];
        if (mode_ == MedianMode::Exact) {
          n += static_cast<std::uint64_t>(
              std::count_if(cat.values.begin(), cat.values.end(), [&](double v) { return v >= lo && v <= hi; }));
        } else if (!cat.bins.empty()) {
          for (std::size_t k = bin_of(lo); k <= bin_of(hi); ++k) n += cat.bins[k];
        }
      }
    }
    return n;
  }

 private:
  struct Category {
    std::uint64_t count = 0;
    CompensatedSum sum;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    std::vector<double> values;
    std::vector<std::uint64_t> bins;
  };

  static std::size_t bin_of(double kelvin) {
    const double b = std::floor(kelvin / kBinWidth + 1e-9);
    if (!(b > 0)) return 0;
    return std::min(static_cast<std::size_t>(b), kBins - 1);
  }

  double median_of(const Category& cat) const {
    if (mode_ == MedianMode::Exact) {
      std::vector<double> v = cat.values;
      const auto mid = v.size() / 2;
      std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
      const double upper = v[mid];
      if (v.size() % 2 == 1) return upper;
      const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
      return (lower + upper) / 2.0;
    }
    auto value_at = [&](std::uint64_t rank) {  // 0-based rank
      std::uint64_t seen = 0;
      for (std::size_t k = 0; k < kBins; ++k) {
        seen += cat.bins[k];
        if (seen > rank) return static_cast<double>(k) * kBinWidth;
      }
      return cat.max;
    };
    const auto n = cat.count;
    if (n % 2 == 1) return value_at(n / 2);
    return (value_at(n / 2 - 1) + value_at(n / 2)) / 2.0;
  }

  MedianMode mode_;
  std::array<Category, kCategoryCount> cats_{};
};

template <typename Range>
std::vector<CategoryStats> category_stats(const Range& records, MedianMode mode = MedianMode::Exact) {
  BrightnessAccumulator acc(mode);
  for (const auto& r : records) acc.add(r);
  return acc.stats();
}

struct ThresholdSupport {
  double threshold = 0.0;
  /// Stratum rows within 1 K above the threshold.
  std::uint64_t rows_within_1k = 0;
};

struct ThresholdEstimate {
  ThresholdSupport theta_night;  // minimum night brightness
  ThresholdSupport theta_min;    // global minimum
  ThresholdSupport theta_high;   // minimum among high-confidence rows
};

namespace detail {
inline double stratum_min(std::span<const CategoryStats> stats, auto&& include, const char* name) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : stats) {
    if (include(s.daynight, s.confidence) && s.count > 0) m = std::min(m, *s.min);
  }
  if (std::isinf(m)) throw AuditError(ErrorCode::InsufficientData, name);
  return m;
}

inline constexpr auto kNightStratum = [](DayNight d, Confidence) { return d == DayNight::Night; };
inline constexpr auto kHighStratum = [](DayNight, Confidence c) { return c == Confidence::High; };
inline constexpr auto kAllStrata = [](DayNight, Confidence) { return true; };
}  // namespace detail

/// Thresholds are the empirical minima of their strata.
inline ThresholdEstimate infer_thresholds(const BrightnessAccumulator& acc) {
  const auto stats = acc.stats();
  ThresholdEstimate t;
  t.theta_night.threshold = detail::stratum_min(stats, detail::kNightStratum, "night");
  t.theta_high.threshold = detail::stratum_min(stats, detail::kHighStratum, "high");
  t.theta_min.threshold = detail::stratum_min(stats, detail::kAllStrata, "all");
  auto support = [&](ThresholdSupport& s, auto&& stratum) {
    s.rows_within_1k = acc.count_between(s.threshold, s.threshold + 1.0, stratum);
  };
  support(t.theta_night, detail::kNightStratum);
  support(t.theta_high, detail::kHighStratum);
  support(t.theta_min, detail::kAllStrata);
  return t;
}

/// Thresholds from precomputed stats plus a re-scan of the records for the
/// support counts.
template <typename Range>
ThresholdEstimate infer_thresholds(std::span<const CategoryStats> stats, const Range& records) {
  ThresholdEstimate t;
  t.theta_night.threshold = detail::stratum_min(stats, detail::kNightStratum, "night");
  t.theta_high.threshold = detail::stratum_min(stats, detail::kHighStratum, "high");
  t.theta_min.threshold = detail::stratum_min(stats, detail::kAllStrata, "all");
  for (const auto& r : records) {
    const double b = r.bright_ti4;
    auto near = [b](const ThresholdSupport& s) { return b >= s.threshold && b <= s.threshold + 1.0; };
    if (r.is_night() && near(t.theta_night)) ++t.theta_night.rows_within_1k;
    if (r.confidence == Confidence::High && near(t.theta_high)) ++t.theta_high.rows_within_1k;
    if (near(t.theta_min)) ++t.theta_min.rows_within_1k;
  }
  return t;
}

}  // namespace firmsaudit
