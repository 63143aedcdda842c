#pragma once

// Published 2023 VIIRS confidence-by-day/night counts and a comparison of
// statistics recomputed from them against the printed values.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "firmsaudit/report.hpp"
#include "firmsaudit/stats.hpp"

namespace firmsaudit::reference {

/// Rows h, l, n; columns D, N.
inline ContingencyTable published_table() {
  return ContingencyTable({"h", "l", "n"}, {"D", "N"},
                          {1'046'811, 65'658, 2'489'710, 0, 11'996'569, 5'942'173});
}

struct PrintedValues {
  double chi_square = 1'474'795.20;
  int df = 2;
  double cramers_v = 0.262;
  // Rows h, l, n; columns D, N.
  std::array<double, 6> residuals{273.11, -439.15, 518.24, -833.30, -261.08, 419.80};
  /// Two different expected counts for the night/low cell appear in print.
  std::vector<double> expected_night_low{694'908.0, 696'908.0};
};

struct Comparison {
  std::string quantity;
  double printed = 0.0;
  double computed = 0.0;
  double tolerance = 0.0;  // absolute
  bool consistent = false;
  std::string note;
};

struct ReferenceReport {
  ChiSquareResult result;
  std::vector<Comparison> comparisons;
  /// E(l, N) from the marginals.
  double expected_night_low = 0.0;
  /// residual(l, N)^2; equals E(l, N) because the observed count is zero.
  double residual_squared = 0.0;
  bool expected_matches_residual = false;
  bool expected_diverges_from_print = false;
};

inline ReferenceReport compare_with_printed(const PrintedValues& printed = {}) {
  const auto table = published_table();
  ReferenceReport rep;
  rep.result = chi_square_test(table);
  const auto& r = rep.result;

  auto add = [&](std::string name, double p, double c, double tol, std::string note = {}) {
    rep.comparisons.push_back({std::move(name), p, c, tol, std::abs(p - c) <= tol, std::move(note)});
  };
  add("chi_square", printed.chi_square, r.statistic, printed.chi_square * 1e-3, "0.1% relative");
  add("df", printed.df, r.df, 0.0);
  add("cramers_v", printed.cramers_v, r.cramers_v.value_or(0.0), 1e-3);
  const char* names[6] = {"residual h/D", "residual h/N", "residual l/D", "residual l/N", "residual n/D", "residual n/N"};
  for (std::size_t k = 0; k < 6; ++k) add(names[k], printed.residuals[k], r.residuals(k / 2, k % 2), 0.02);

  // l is row 1, N is column 1.
  rep.expected_night_low = r.expected(1, 1);
  rep.residual_squared = r.residuals(1, 1) * r.residuals(1, 1);
  rep.expected_matches_residual =
      std::abs(rep.residual_squared - rep.expected_night_low) <= 1e-9 * rep.expected_night_low;
  const double printed_residual_sq = printed.residuals[3] * printed.residuals[3];
  for (double e : printed.expected_night_low) {
    // A printed E is accepted only if it agrees with the printed residual to
    // within its two-decimal rounding.
    const double slack = 2.0 * std::abs(printed.residuals[3]) * 0.005 + 1.0;
    const bool ok = std::abs(e - printed_residual_sq) <= slack;
    if (!ok) rep.expected_diverges_from_print = true;
    add("expected l/N", e, rep.expected_night_low, slack,
        ok ? "" : "printed value disagrees with the marginals and with the printed residual");
  }
  return rep;
}

inline Json to_json(const ReferenceReport& rep) {
  Json comps = Json::array();
  for (const auto& c : rep.comparisons) {
    comps.push_back({{"quantity", c.quantity},
                     {"printed", c.printed},
                     {"computed", c.computed},
                     {"tolerance", c.tolerance},
                     {"consistent", c.consistent},
                     {"note", c.note}});
  }
  return {{"table", firmsaudit::to_json(published_table())},
          {"result", firmsaudit::to_json(rep.result)},
          {"expected_night_low", rep.expected_night_low},
          {"residual_night_low_squared", rep.residual_squared},
          {"expected_matches_residual", rep.expected_matches_residual},
          {"expected_diverges_from_print", rep.expected_diverges_from_print},
          {"comparisons", comps}};
}

inline void render_markdown(std::ostream& os, const ReferenceReport& rep) {
  os << "## Published counts\n\n";
  const auto table = published_table();
  firmsaudit::render_markdown(os, table);
  os << "\n";
  firmsaudit::render_markdown(os, table, rep.result);
  os << "\n### Printed versus recomputed\n\n";
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : rep.comparisons) {
    rows.push_back({c.quantity, fmt::grouped_fixed(c.printed, 3), fmt::grouped_fixed(c.computed, 3),
                    c.consistent ? "consistent" : "DIVERGES", c.note});
  }
  md::table(os, {"Quantity", "Printed", "Computed", "Status", "Note"}, rows);
  os << "\nE(l, N) from the marginals = " << fmt::grouped_fixed(rep.expected_night_low, 2)
     << "; residual(l, N)^2 = " << fmt::grouped_fixed(rep.residual_squared, 2) << ".\n";
  if (rep.expected_diverges_from_print) {
    os << "\n> **flag**: a printed expected count for the night/low cell diverges from the value implied by the "
          "marginals; the recomputed value is used throughout.\n";
  }
}

}  // namespace firmsaudit::reference
