#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "firmsaudit/synthgen.hpp"

using namespace firmsaudit;

namespace {
const InferredThresholds kT{};
const BrightnessBandRule kDayRule{};
}  // namespace

TEST(Classify, ReferenceExamples) {
  EXPECT_FALSE(classify_inferred(290.0, DayNight::Night, kT, kDayRule).has_value());
  EXPECT_EQ(classify_inferred(300.0, DayNight::Night, kT, kDayRule), Confidence::Nominal);
  EXPECT_EQ(classify_inferred(367.0, DayNight::Day, kT, kDayRule), Confidence::High);
  EXPECT_EQ(classify_inferred(367.0, DayNight::Night, kT, kDayRule), Confidence::High);
  EXPECT_FALSE(classify_inferred(279.99, DayNight::Day, kT, kDayRule).has_value());
  EXPECT_EQ(classify_inferred(285.0, DayNight::Day, kT, kDayRule), Confidence::Low);
  EXPECT_EQ(classify_inferred(330.0, DayNight::Day, kT, kDayRule), Confidence::Nominal);
}

TEST(Classify, NightSweepNeverYieldsLow) {
  for (int i = 2500; i <= 4000; ++i) {
    const double b = i / 10.0;
    const auto a = classify_inferred(b, DayNight::Night, kT, [](double) { return Confidence::Low; });
    EXPECT_NE(a, Confidence::Low) << b;
    if (b >= kT.theta_night) {
      EXPECT_TRUE(a.has_value()) << b;
    }
  }
}

TEST(Generator, CsvRoundTripIsExact) {
  GeneratorSpec spec;
  spec.n_accepted = 1000;
  const auto rows = generate_records(spec);
  ASSERT_EQ(rows.size(), 1000u);
  std::stringstream ss;
  const auto stats = generate_dataset(spec, ss);
  EXPECT_EQ(stats.accepted, 1000u);
  DatasetReader reader(ss, ErrorPolicy::Strict);
  std::size_t i = 0;
  while (auto r = reader.next()) {
    ASSERT_LT(i, rows.size());
    EXPECT_EQ(format_record(*r), format_record(rows[i]));
    EXPECT_EQ(r->bright_ti4, rows[i].bright_ti4);
    EXPECT_EQ(r->latitude, rows[i].latitude);
    EXPECT_EQ(r->confidence, rows[i].confidence);
    EXPECT_EQ(r->daynight, rows[i].daynight);
    ++i;
  }
  EXPECT_EQ(i, 1000u);
}

TEST(Generator, SameSeedSameBytesOtherSeedDiffers) {
  GeneratorSpec spec;
  spec.n_accepted = 5000;
  std::ostringstream a, b, c;
  generate_dataset(spec, a);
  generate_dataset(spec, b);
  spec.master_seed = 43;
  generate_dataset(spec, c);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(Generator, StreamMatchesWriter) {
  GeneratorSpec spec;
  spec.n_accepted = 10000;
  std::ostringstream a;
  generate_dataset(spec, a);
  SyntheticCsvStream s(spec);
  std::ostringstream b;
  b << s.rdbuf();
  EXPECT_EQ(a.str(), b.str());
}

TEST(Generator, RespectsThresholdsAndBounds) {
  GeneratorSpec spec;
  spec.n_accepted = 100000;
  GenerationStats st;
  const auto rows = generate_records(spec, &st);
  EXPECT_GT(st.rejected, 0u);
  for (const auto& r : rows) {
    ASSERT_LE(r.bright_ti4, 367.0);
    ASSERT_GE(r.bright_ti4, spec.thresholds.theta_min);
    if (r.is_night()) {
      ASSERT_GE(r.bright_ti4, spec.thresholds.theta_night);
      ASSERT_NE(r.confidence, Confidence::Low);
    }
    if (r.confidence == Confidence::High) {
      ASSERT_GE(r.bright_ti4, spec.thresholds.theta_high);
    }
    ASSERT_GE(r.latitude, -70.0);
    ASSERT_LT(r.latitude, 80.0);
    ASSERT_GE(r.longitude, -180.0);
    ASSERT_LT(r.longitude, 180.0);
    ASSERT_TRUE(r.acq_date.ok());
    ASSERT_GE(std::chrono::sys_days(r.acq_date), std::chrono::sys_days(spec.date_start));
    ASSERT_LE(std::chrono::sys_days(r.acq_date), std::chrono::sys_days(spec.date_end));
  }
}

TEST(Generator, DayMarginalsWithinThreeStandardErrors) {
  GeneratorSpec spec;
  spec.n_accepted = 1'000'000;
  SyntheticGenerator gen(spec);
  std::array<double, 3> day{};
  double total_day = 0, total = 0;
  while (auto r = gen.next()) {
    ++total;
    if (r->is_night()) continue;
    ++total_day;
    ++day[index_of(r->confidence)];
  }
  const auto se = [&](double p, double n) { return 3.0 * std::sqrt(p * (1 - p) / n); };
  const auto& m = spec.day_marginals;
  EXPECT_NEAR(day[0] / total_day, m.h, se(m.h, total_day));
  EXPECT_NEAR(day[1] / total_day, m.l, se(m.l, total_day));
  EXPECT_NEAR(day[2] / total_day, m.n, se(m.n, total_day));
  EXPECT_NEAR(total_day / total, spec.day_fraction, se(spec.day_fraction, total));
}

TEST(Spec, JsonRoundTrip) {
  GeneratorSpec spec;
  spec.n_accepted = 77;
  spec.master_seed = 9;
  spec.boxes = {{-10, 10, 20, 30}, {40, 50, -100, -90}};
  const auto j = spec_to_json(spec);
  const auto back = spec_from_json(j);
  EXPECT_EQ(spec_to_json(back), j);
  EXPECT_EQ(back.n_accepted, 77u);
  EXPECT_EQ(back.boxes.size(), 2u);
}

TEST(Spec, InvalidSpecsRaise) {
  auto expect_invalid = [](nlohmann::json j) {
    try {
      (void)spec_from_json(j);
      FAIL() << j.dump();
    } catch (const AuditError& e) {
      EXPECT_EQ(e.code(), ErrorCode::SpecInvalid) << j.dump();
    }
  };
  expect_invalid({{"day_marginals", {{"h", 0.5}, {"n", 0.5}, {"l", 0.5}}}});
  expect_invalid({{"thresholds", {{"theta_night", 400.0}}}});
  expect_invalid({{"day_fraction", 1.5}});
  expect_invalid({{"date_start", "2024-02-01"}, {"date_end", "2024-01-01"}});
  expect_invalid({{"date_start", "yesterday"}});
  expect_invalid({{"boxes", nlohmann::json::array()}});
  expect_invalid({{"boxes", {{{"lat_min", 10}, {"lat_max", 5}, {"lon_min", 0}, {"lon_max", 1}}}}});
  expect_invalid({{"satellites", nlohmann::json::array()}});
  expect_invalid({{"n_accepted", "many"}});
  expect_invalid({{"night_brightness", {{"sd", 0.0}}}});
}
