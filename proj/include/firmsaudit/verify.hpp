#pragma once

// Cross-validation of a (day/night, confidence) cell count by five
// structurally independent counting routes. The routes deliberately share no
// filtering code: a bug in one should show up as disagreement.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "firmsaudit/query.hpp"
#include "firmsaudit/records.hpp"
#include "firmsaudit/stats.hpp"

namespace firmsaudit {

struct CountRequest {
  DayNight daynight{DayNight::Night};
  Confidence confidence{Confidence::Low};
  /// Query text for the parsed-predicate route; empty means "derive from the
  /// pair above".
  std::string query;

  [[nodiscard]] std::string query_text() const {
    if (!query.empty()) return query;
    return std::string("daynight == \"") + to_char(daynight) + "\" and confidence == \"" + to_char(confidence) + "\"";
  }
};

using CountMethod = std::function<std::uint64_t(std::span<const FireDetection>, const CountRequest&)>;

struct NamedMethod {
  std::string name;
  CountMethod count;
};

namespace methods {

/// Plain loop with an if-filter.
inline std::uint64_t row_filter(std::span<const FireDetection> rows, const CountRequest& req) {
  std::uint64_t n = 0;
  for (const auto& r : rows) {
    if (r.daynight == req.daynight && r.confidence == req.confidence) ++n;
  }
  return n;
}

/// Columnar buffers, one boolean mask per condition, then an AND-and-sum.
inline std::uint64_t mask_sum(std::span<const FireDetection> rows, const CountRequest& req) {
  std::vector<char> dn_col(rows.size());
  std::vector<char> conf_col(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    dn_col[i] = to_char(rows[i].daynight);
    conf_col[i] = to_char(rows[i].confidence);
  }
  const char dn_want = to_char(req.daynight);
  const char conf_want = to_char(req.confidence);
  std::vector<std::uint8_t> dn_mask(rows.size());
  std::vector<std::uint8_t> conf_mask(rows.size());
  std::transform(dn_col.begin(), dn_col.end(), dn_mask.begin(), [&](char c) { return c == dn_want; });
  std::transform(conf_col.begin(), conf_col.end(), conf_mask.begin(), [&](char c) { return c == conf_want; });
  return std::transform_reduce(dn_mask.begin(), dn_mask.end(), conf_mask.begin(), std::uint64_t{0}, std::plus<>{},
                               [](std::uint8_t a, std::uint8_t b) { return std::uint64_t(a & b); });
}

/// Full confidence x day/night crosstab, then a cell lookup.
inline std::uint64_t crosstab_lookup(std::span<const FireDetection> rows, const CountRequest& req) {
  if (rows.empty()) return 0;
  const auto table = build_contingency(
      rows, [](const FireDetection& r) { return std::string(1, to_char(r.confidence)); },
      [](const FireDetection& r) { return std::string(1, to_char(r.daynight)); });
  return table.count(std::string(1, to_char(req.confidence)), std::string(1, to_char(req.daynight)));
}

/// Subset on day/night first, then value counts of confidence in the subset.
inline std::uint64_t subset_value_counts(std::span<const FireDetection> rows, const CountRequest& req) {
  std::vector<const FireDetection*> subset;
  for (const auto& r : rows) {
    if (to_char(r.daynight) == to_char(req.daynight)) subset.push_back(&r);
  }
  std::map<char, std::uint64_t> counts;
  for (const auto* r : subset) ++counts[to_char(r->confidence)];
  const auto it = counts.find(to_char(req.confidence));
  return it == counts.end() ? 0 : it->second;
}

/// Textual predicate through the query parser, evaluated row by row.
inline std::uint64_t parsed_query(std::span<const FireDetection> rows, const CountRequest& req) {
  const auto pred = query::parse(req.query_text());
  return static_cast<std::uint64_t>(std::count_if(rows.begin(), rows.end(), pred));
}

}  // namespace methods

inline std::vector<NamedMethod> default_count_methods() {
  return {
      {"Direct boolean filter", methods::row_filter},
      {"Boolean mask sum", methods::mask_sum},
      {"Crosstab lookup", methods::crosstab_lookup},
      {"Value counts", methods::subset_value_counts},
      {"Parsed query", methods::parsed_query},
  };
}

struct VerificationResult {
  std::vector<std::string> method_names;
  std::vector<std::uint64_t> counts;
  bool agreement{};
  std::string predicate_description;
};

/// Runs every method over the same immutable rows. Agreement holds iff all
/// counts are equal.
inline VerificationResult verify_count(std::span<const FireDetection> rows, const CountRequest& req,
                                       const std::vector<NamedMethod>& method_set = default_count_methods()) {
  VerificationResult out;
  out.predicate_description = req.query_text();
  for (const auto& m : method_set) {
    out.method_names.push_back(m.name);
    out.counts.push_back(m.count(rows, req));
  }
  out.agreement = std::adjacent_find(out.counts.begin(), out.counts.end(), std::not_equal_to<>{}) == out.counts.end();
  return out;
}

}  // namespace firmsaudit
