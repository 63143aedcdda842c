#include <gtest/gtest.h>

#include "firmsaudit/query.hpp"
#include "test_util.hpp"

using namespace firmsaudit;
using testutil::rec;

TEST(Query, ConjunctionOfEqualities) {
  const auto p = query::parse(R"(daynight == "N" and confidence == "l")");
  EXPECT_TRUE(p(rec(Confidence::Low, DayNight::Night)));
  EXPECT_FALSE(p(rec(Confidence::Low, DayNight::Day)));
  EXPECT_FALSE(p(rec(Confidence::Nominal, DayNight::Night)));
  EXPECT_EQ(p.terms().size(), 2u);
}

TEST(Query, ParenthesesUppercaseAndNumbers) {
  auto r = rec(Confidence::High, DayNight::Day, 367.0);
  EXPECT_TRUE(query::parse(R"((confidence == "h") AND (bright_ti4 == 367))")(r));
  EXPECT_TRUE(query::parse(R"(acq_time == 1230 and satellite == "N")")(r));
  EXPECT_TRUE(query::parse(R"(acq_date == "2023-07-15")")(r));
  EXPECT_FALSE(query::parse("bright_ti4 == 366.99")(r));
}

TEST(Query, SyntaxErrors) {
  for (const char* bad : {"", R"(daynight = "N")", R"(daynight == "N" and)", R"(daynight == "N)", R"(nosuch == 1)",
                          R"(daynight == 3)", R"(bright_ti4 == "x")", R"((daynight == "N")", R"(daynight == "N" or x)"}) {
    try {
      query::parse(bad);
      ADD_FAILURE() << bad;
    } catch (const AuditError& e) {
      EXPECT_EQ(e.code(), ErrorCode::PredicateParse) << bad;
    }
  }
}

TEST(Query, CellOf) {
  const auto c = query::cell_of(query::parse(R"(confidence == "n" and daynight == "D")"));
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->first, DayNight::Day);
  EXPECT_EQ(c->second, Confidence::Nominal);
  EXPECT_FALSE(query::cell_of(query::parse(R"(daynight == "N")")).has_value());
  EXPECT_FALSE(query::cell_of(query::parse(R"(daynight == "N" and daynight == "D")")).has_value());
  EXPECT_FALSE(query::cell_of(query::parse(R"(daynight == "N" and confidence == "q")")).has_value());
}
