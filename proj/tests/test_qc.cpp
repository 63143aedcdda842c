#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "firmsaudit/qc.hpp"
#include "test_util.hpp"

using namespace firmsaudit;
using testutil::rec;

namespace {
std::vector<FireDetection> clean(int n) {
  std::vector<FireDetection> v;
  for (int i = 0; i < n; ++i) v.push_back(rec(Confidence::Nominal, DayNight::Day, 300.0 + i));
  return v;
}
const QCCheck& check(const QCReport& q, const std::string& name) {
  const auto it = std::find_if(q.checks.begin(), q.checks.end(), [&](const QCCheck& c) { return c.name == name; });
  if (it == q.checks.end()) throw std::runtime_error("no check " + name);
  return *it;
}
}  // namespace

TEST(Qc, CleanRows) {
  const auto q = run_qc(clean(10), SkipCounts{});
  EXPECT_EQ(q.total_rows, 10u);
  EXPECT_EQ(q.lat_out_of_bounds, 0u);
  EXPECT_EQ(q.lon_out_of_bounds, 0u);
  EXPECT_DOUBLE_EQ(q.brightness_in_typical_range_fraction, 1.0);
  EXPECT_FALSE(q.sample_size_adequate);
  EXPECT_TRUE(q.passed());
  EXPECT_EQ(q.checks.size(), 7u);
}

TEST(Qc, BrightnessFractionArithmetic) {
  auto rows = clean(10);
  rows[3].bright_ti4 = 600.0;
  const auto q = run_qc(rows, SkipCounts{});
  EXPECT_DOUBLE_EQ(q.brightness_in_typical_range_fraction, 0.9);
  EXPECT_FALSE(check(q, "Brightness range (typical)").passed);
  EXPECT_FALSE(q.passed());
}

TEST(Qc, BrightnessRangeInclusive) {
  auto rows = clean(2);
  rows[0].bright_ti4 = 280.0;
  rows[1].bright_ti4 = 500.0;
  EXPECT_DOUBLE_EQ(run_qc(rows, SkipCounts{}).brightness_in_typical_range_fraction, 1.0);
}

TEST(Qc, CoordinateBoundsAreFindings) {
  auto rows = clean(4);
  rows[0].latitude = 91.0;
  rows[1].longitude = -180.5;
  rows[2].latitude = 90.0;
  rows[3].longitude = 180.0;
  const auto q = run_qc(rows, SkipCounts{});
  EXPECT_EQ(q.lat_out_of_bounds, 1u);
  EXPECT_EQ(q.lon_out_of_bounds, 1u);
  EXPECT_FALSE(q.passed());
}

TEST(Qc, EmptyStream) {
  const auto q = run_qc(std::vector<FireDetection>{}, SkipCounts{});
  EXPECT_EQ(q.total_rows, 0u);
  EXPECT_FALSE(q.sample_size_adequate);
}

TEST(Qc, SkipsCountedOnceByKind) {
  SkipCounts s;
  s.by_kind[ParseErrorKind::MissingValue] = 2;
  s.by_kind[ParseErrorKind::InvalidConfidence] = 3;
  s.by_kind[ParseErrorKind::InvalidDayNight] = 1;
  s.by_kind[ParseErrorKind::InvalidDate] = 4;
  const auto q = run_qc(clean(10), s);
  EXPECT_EQ(q.total_rows, 20u);
  EXPECT_EQ(q.valid_rows, 10u);
  EXPECT_EQ(q.missing_value_rows, 2u);
  EXPECT_EQ(q.invalid_confidence, 3u);
  EXPECT_EQ(q.invalid_daynight, 1u);
  EXPECT_EQ(q.other_syntax_errors, 4u);
  EXPECT_FALSE(check(q, "Missing values").passed);
}

TEST(Qc, SampleSizeIsStrictlyGreaterAndNonGating) {
  QCThresholds t;
  t.adequate_sample_size = 10;
  EXPECT_FALSE(run_qc(clean(10), SkipCounts{}, t).sample_size_adequate);
  EXPECT_TRUE(run_qc(clean(11), SkipCounts{}, t).sample_size_adequate);
  const auto q = run_qc(clean(3), SkipCounts{});
  EXPECT_FALSE(check(q, "Sample size adequacy").passed);
  EXPECT_FALSE(check(q, "Sample size adequacy").gating);
  EXPECT_TRUE(q.passed());
}

TEST(Qc, PermutationAndPartitionInvariance) {
  std::mt19937_64 gen(5);
  std::vector<FireDetection> rows;
  std::uniform_real_distribution<double> lat(-95, 95), lon(-185, 185), b(250, 550);
  for (int i = 0; i < 2000; ++i) {
    auto r = rec(Confidence::Low, DayNight::Day, b(gen));
    r.latitude = lat(gen);
    r.longitude = lon(gen);
    rows.push_back(r);
  }
  const auto whole = run_qc(rows, SkipCounts{});
  std::shuffle(rows.begin(), rows.end(), gen);
  QCAccumulator a, c, d;
  for (std::size_t i = 0; i < rows.size(); ++i) (i % 3 == 0 ? a : (i % 3 == 1 ? c : d)).add(rows[i]);
  c.merge(d);
  a.merge(c);
  const auto merged = a.report();
  EXPECT_EQ(merged.total_rows, whole.total_rows);
  EXPECT_EQ(merged.lat_out_of_bounds, whole.lat_out_of_bounds);
  EXPECT_EQ(merged.lon_out_of_bounds, whole.lon_out_of_bounds);
  EXPECT_EQ(merged.brightness_in_range, whole.brightness_in_range);
  EXPECT_EQ(merged.brightness_in_typical_range_fraction, whole.brightness_in_typical_range_fraction);

  // Passing plus failing rows of each bounds check account for every row.
  std::uint64_t lat_ok = 0;
  for (const auto& r : rows) lat_ok += (r.latitude >= -90 && r.latitude <= 90);
  EXPECT_EQ(lat_ok + whole.lat_out_of_bounds, whole.total_rows);
}

TEST(Qc, ReaderOverload) {
  std::string csv = testutil::to_csv(clean(5));
  csv += "1,2,bad,0.4,0.5,2023-07-15,1230,N,VIIRS,n,2.0NRT,,3,D\n";
  std::istringstream in(csv);
  DatasetReader reader(in, ErrorPolicy::SkipAndCount);
  const auto q = run_qc(reader);
  EXPECT_EQ(q.total_rows, 6u);
  EXPECT_EQ(q.valid_rows, 5u);
  EXPECT_EQ(q.other_syntax_errors, 1u);
}
