#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "firmsaudit/stats.hpp"
#include "firmsaudit/verify.hpp"
#include "test_util.hpp"

using namespace firmsaudit;
using testutil::rec;

namespace {

std::vector<FireDetection> random_corpus(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> c(0, 2), d(0, 1), dup(0, 9);
  std::vector<FireDetection> rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows.empty() && dup(gen) == 0) {
      rows.push_back(rows.back());  // near-duplicate neighbour
      rows.back().frp += 0.01;
      continue;
    }
    rows.push_back(rec(static_cast<Confidence>(c(gen)), static_cast<DayNight>(d(gen))));
  }
  return rows;
}

}  // namespace

TEST(Verify, SevenNightNominalRows) {
  std::vector<FireDetection> rows;
  for (int i = 0; i < 7; ++i) rows.push_back(rec(Confidence::Nominal, DayNight::Night));
  for (int i = 0; i < 5; ++i) rows.push_back(rec(Confidence::Nominal, DayNight::Day));
  for (int i = 0; i < 3; ++i) rows.push_back(rec(Confidence::Low, DayNight::Day));
  const auto v = verify_count(rows, CountRequest{DayNight::Night, Confidence::Nominal, ""});
  ASSERT_EQ(v.counts.size(), 5u);
  for (auto c : v.counts) EXPECT_EQ(c, 7u);
  EXPECT_TRUE(v.agreement);
  EXPECT_EQ(v.method_names.size(), 5u);
}

TEST(Verify, EmptyDataset) {
  const auto v = verify_count({}, CountRequest{});
  for (auto c : v.counts) EXPECT_EQ(c, 0u);
  EXPECT_TRUE(v.agreement);
}

TEST(Verify, ZeroNightLow) {
  std::vector<FireDetection> rows{rec(Confidence::Low, DayNight::Day), rec(Confidence::Nominal, DayNight::Night)};
  const auto v = verify_count(rows, CountRequest{});
  for (auto c : v.counts) EXPECT_EQ(c, 0u);
  EXPECT_TRUE(v.agreement);
  EXPECT_EQ(v.predicate_description, R"(daynight == "N" and confidence == "l")");
}

TEST(Verify, AgreementOnRandomCorpora) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto rows = random_corpus(seed, 500 + seed * 37);
    for (auto d : kAllDayNight) {
      for (auto c : kAllConfidences) {
        const auto v = verify_count(rows, CountRequest{d, c, ""});
        EXPECT_TRUE(v.agreement) << seed;
        std::uint64_t oracle = 0;
        for (const auto& r : rows) oracle += (r.daynight == d && r.confidence == c);
        EXPECT_EQ(v.counts[0], oracle);
      }
    }
  }
}

TEST(Verify, CrosstabMethodMatchesContingencyCell) {
  const auto rows = random_corpus(99, 2000);
  const auto t = build_contingency(
      rows, [](const FireDetection& r) { return std::string(1, to_char(r.confidence)); },
      [](const FireDetection& r) { return std::string(1, to_char(r.daynight)); });
  for (auto d : kAllDayNight) {
    for (auto c : kAllConfidences) {
      EXPECT_EQ(methods::crosstab_lookup(rows, CountRequest{d, c, ""}),
                t.count(std::string(1, to_char(c)), std::string(1, to_char(d))));
    }
  }
}

TEST(Verify, BreakingAnyOneMethodBreaksAgreement) {
  const auto rows = random_corpus(7, 3000);
  const CountRequest req{DayNight::Night, Confidence::Nominal, ""};
  for (std::size_t broken = 0; broken < 5; ++broken) {
    auto set = default_count_methods();
    // The mutated method forgets the day/night condition.
    set[broken].count = [](std::span<const FireDetection> r, const CountRequest& q) {
      return static_cast<std::uint64_t>(
          std::count_if(r.begin(), r.end(), [&](const FireDetection& x) { return x.confidence == q.confidence; }));
    };
    EXPECT_FALSE(verify_count(rows, req, set).agreement) << set[broken].name;
    // The mutated method miscounts by one.
    auto original = default_count_methods()[broken].count;
    set[broken].count = [original](std::span<const FireDetection> r, const CountRequest& q) {
      return original(r, q) + 1;
    };
    EXPECT_FALSE(verify_count(rows, req, set).agreement) << set[broken].name;
  }
}

TEST(Verify, CustomQueryFeedsParsedMethod) {
  const auto rows = random_corpus(3, 500);
  CountRequest req{DayNight::Day, Confidence::High, R"(confidence == "h" and daynight == "D")"};
  EXPECT_TRUE(verify_count(rows, req).agreement);
  req.query = R"(confidence == "h")";
  EXPECT_FALSE(verify_count(rows, req).agreement);
  req.query = "confidence = h";
  EXPECT_THROW(verify_count(rows, req), AuditError);
}
