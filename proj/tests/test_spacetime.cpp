#include <gtest/gtest.h>

#include "firmsaudit/random.hpp"
#include "firmsaudit/spacetime.hpp"
#include "test_util.hpp"

using namespace firmsaudit;
using testutil::rec;

namespace {
std::vector<FireDetection> random_rows(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<FireDetection> v;
  for (std::size_t i = 0; i < n; ++i) {
    v.push_back(rec(rng.uniform(-90, 90), rng.uniform(-180, 180), 320, static_cast<Confidence>(rng.below(3)),
                    static_cast<DayNight>(rng.below(2)), static_cast<int>(rng.below(12)) + 1));
  }
  return v;
}
}  // namespace

TEST(Grid, CountsPerCell) {
  std::vector<FireDetection> rows{rec(12.0, 25.0, 320, Confidence::Nominal, DayNight::Day),
                                  rec(15.5, 29.9, 300, Confidence::Low, DayNight::Night),
                                  rec(-45.0, -100.0, 340, Confidence::High, DayNight::Night)};
  const auto g = grid_counts(rows);
  EXPECT_EQ(g.rows, 18u);
  EXPECT_EQ(g.cols, 36u);
  EXPECT_EQ(g.total(10, 20), 2u);
  EXPECT_EQ(g.night_low_at(10, 20), 1u);
  EXPECT_EQ(g.total(4, 8), 1u);
  EXPECT_EQ(g.night_low_at(4, 8), 0u);
  EXPECT_EQ(g.occupied_cells, 2u);
  EXPECT_EQ(g.nonzero_cells, 1u);
  EXPECT_EQ(g.grand_total(), 3u);
}

TEST(Grid, PolesAndAntimeridianClampIntoLastCell) {
  std::vector<FireDetection> rows{rec(90.0, 180.0, 320, Confidence::Nominal, DayNight::Day),
                                  rec(-90.0, -180.0, 320, Confidence::Nominal, DayNight::Day)};
  const auto g = grid_counts(rows);
  EXPECT_EQ(g.total(17, 35), 1u);
  EXPECT_EQ(g.total(0, 0), 1u);
}

TEST(Grid, ConservesRowsAndMergeIsPartitionInvariant) {
  const auto rows = random_rows(4, 5000);
  for (double cell : {1.0, 5.0, 10.0, 30.0}) {
    GridAccumulator whole(cell), a(cell), b(cell);
    std::uint64_t nl = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      whole.add(rows[i]);
      (i % 3 ? a : b).add(rows[i]);
      nl += detail::night_low(rows[i]);
    }
    a.merge(b);
    const auto g = whole.result();
    EXPECT_EQ(g.grand_total(), rows.size());
    std::uint64_t sum_nl = 0;
    for (auto x : g.night_low) sum_nl += x;
    EXPECT_EQ(sum_nl, nl);
    EXPECT_EQ(a.result().totals, g.totals);
    EXPECT_EQ(a.result().night_low, g.night_low);
  }
}

TEST(Grid, InvalidCellSizes) {
  for (double bad : {0.0, -10.0, 7.0, 200.0}) {
    try {
      GridAccumulator g(bad);
      FAIL() << bad;
    } catch (const AuditError& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidCellSize);
    }
  }
}

TEST(Monthly, SingleMonthCorpus) {
  std::vector<FireDetection> rows{rec(0, 0, 320, Confidence::Nominal, DayNight::Night, 3),
                                  rec(0, 0, 320, Confidence::Low, DayNight::Day, 3),
                                  rec(0, 0, 320, Confidence::High, DayNight::Night, 3)};
  const auto m = monthly_table(rows);
  ASSERT_EQ(m.size(), 12u);
  for (const auto& row : m) {
    if (row.month == 3) {
      EXPECT_EQ(row.total_fires, 3u);
      EXPECT_EQ(row.night_fires, 2u);
      EXPECT_EQ(row.night_low_conf, 0u);
    } else {
      EXPECT_EQ(row.total_fires, 0u);
    }
    EXPECT_TRUE(row.pattern_holds);
  }
  rows.push_back(rec(0, 0, 320, Confidence::Low, DayNight::Night, 3));
  EXPECT_FALSE(monthly_table(rows)[2].pattern_holds);
}

TEST(Monthly, MergeMatchesSinglePass) {
  const auto rows = random_rows(6, 4000);
  MonthlyAccumulator a, b;
  for (std::size_t i = 0; i < rows.size(); ++i) (i < 1000 ? a : b).add(rows[i]);
  a.merge(b);
  const auto m1 = monthly_table(rows);
  const auto m2 = a.rows();
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(m1[i].total_fires, m2[i].total_fires);
    EXPECT_EQ(m1[i].night_low_conf, m2[i].night_low_conf);
    total += m1[i].total_fires;
  }
  EXPECT_EQ(total, rows.size());
}

TEST(Bands, QualificationAndPattern) {
  std::vector<FireDetection> rows;
  for (int i = 0; i < 50; ++i) rows.push_back(rec(35.0, 0, 320, Confidence::Nominal, DayNight::Night));
  for (int i = 0; i < 101; ++i) rows.push_back(rec(-5.0, 0, 320, Confidence::Nominal, DayNight::Day));
  for (int i = 0; i < 200; ++i) rows.push_back(rec(60.0, 0, 320, Confidence::Nominal, DayNight::Day));
  rows.push_back(rec(61.0, 0, 300, Confidence::Low, DayNight::Night));
  const auto s = latitude_bands(rows);
  ASSERT_EQ(s.bands.size(), 18u);
  EXPECT_FALSE(s.bands[12].qualifies);  // 50 fires in [30, 40)
  EXPECT_EQ(s.bands[12].total_fires, 50u);
  EXPECT_TRUE(s.bands[8].qualifies);  // 101 fires in [-10, 0)
  EXPECT_TRUE(s.bands[8].pattern_holds);
  EXPECT_TRUE(s.bands[15].qualifies);
  EXPECT_FALSE(s.bands[15].pattern_holds);
  EXPECT_DOUBLE_EQ(s.bands[15].lat_lower, 60.0);
  EXPECT_EQ(s.qualifying, 2u);
  EXPECT_EQ(s.holding, 1u);
  EXPECT_DOUBLE_EQ(*s.fraction(), 0.5);
  EXPECT_FALSE(latitude_bands(std::vector<FireDetection>{}).fraction().has_value());
}

TEST(Bands, NorthPoleClampsIntoTopBandAndMergeIsInvariant) {
  std::vector<FireDetection> rows{rec(90.0, 0, 320, Confidence::Nominal, DayNight::Day)};
  EXPECT_EQ(latitude_bands(rows).bands[17].total_fires, 1u);
  const auto many = random_rows(7, 3000);
  BandAccumulator a(15.0), b(15.0);
  for (std::size_t i = 0; i < many.size(); ++i) (i % 2 ? a : b).add(many[i]);
  a.merge(b);
  const auto whole = latitude_bands(many, 15.0);
  const auto merged = a.summary();
  for (std::size_t i = 0; i < whole.bands.size(); ++i) {
    EXPECT_EQ(whole.bands[i].total_fires, merged.bands[i].total_fires);
    EXPECT_EQ(whole.bands[i].night_low_conf, merged.bands[i].night_low_conf);
  }
  EXPECT_THROW(BandAccumulator(7.0), AuditError);
  EXPECT_THROW(a.merge(BandAccumulator(10.0)), AuditError);
}
