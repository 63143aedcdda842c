#include <gtest/gtest.h>

#include <cmath>

#include "firmsaudit/special.hpp"

#ifdef FIRMSAUDIT_HAVE_BOOST_MATH
#include <boost/math/special_functions/gamma.hpp>
#endif

using namespace firmsaudit;

TEST(Special, CriticalValues) {
  EXPECT_NEAR(chi_square_sf(5.991, 2).p, 0.0500, 1e-3);
  EXPECT_NEAR(chi_square_sf(3.841, 1).p, 0.0500, 1e-3);
  EXPECT_EQ(chi_square_sf(0.0, 3).p, 1.0);
  EXPECT_EQ(chi_square_sf(0.0, 3).log_p, 0.0);
}

TEST(Special, DfTwoClosedForm) {
  for (double x = 0.0; x <= 700.0; x += 0.37) {
    const double want = std::exp(-x / 2.0);
    const auto got = chi_square_sf(x, 2);
    EXPECT_NEAR(got.p, want, 1e-12 * want) << x;
    EXPECT_NEAR(got.log_p, -x / 2.0, 1e-12 * std::max(1.0, x / 2.0)) << x;
  }
}

TEST(Special, DfOneErfc) {
  for (double x = 0.01; x < 60.0; x *= 1.3) {
    const double want = std::erfc(std::sqrt(x / 2.0));
    EXPECT_NEAR(chi_square_sf(x, 1).p, want, 1e-10 * want) << x;
  }
}

TEST(Special, UnderflowKeepsLogExact) {
  const auto r = chi_square_sf(1474795.1955, 2);
  EXPECT_EQ(r.p, std::numeric_limits<double>::denorm_min());
  EXPECT_NEAR(r.log_p, -1474795.1955 / 2.0, 1e-6);
}

TEST(Special, InvalidArguments) {
  EXPECT_THROW(chi_square_sf(1.0, 0), AuditError);
  EXPECT_THROW(chi_square_sf(-1.0, 2), AuditError);
}

#ifdef FIRMSAUDIT_HAVE_BOOST_MATH
TEST(Special, MatchesBoostGammaQ) {
  for (int df : {1, 2, 3, 4, 5, 7, 10, 25, 60}) {
    for (double x = 0.05; x < 300.0; x *= 1.25) {
      const double want = boost::math::gamma_q(df / 2.0, x / 2.0);
      if (want < 1e-300) continue;
      EXPECT_NEAR(chi_square_sf(x, df).p, want, 1e-10 * want) << "df " << df << " x " << x;
    }
  }
}
#endif
