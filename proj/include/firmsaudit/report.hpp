#pragma once

// JSON serialization, Markdown tables and CSV/GeoJSON exports for every
// analysis result.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "firmsaudit/brightness.hpp"
#include "firmsaudit/qc.hpp"
#include "firmsaudit/records.hpp"
#include "firmsaudit/resample.hpp"
#include "firmsaudit/spacetime.hpp"
#include "firmsaudit/stats.hpp"
#include "firmsaudit/treelearn.hpp"
#include "firmsaudit/verify.hpp"
#include "json.hpp"

namespace firmsaudit {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Number formatting

namespace fmt {

inline std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

inline std::string signed_fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.*f", precision, v);
  return buf;
}

/// 1234567 -> "1,234,567".
inline std::string grouped(std::uint64_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  const auto len = digits.size();
  for (std::size_t i = 0; i < len; ++i) {
    if (i > 0 && (len - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

inline std::string grouped_fixed(double v, int precision) {
  const std::string s = fixed(std::abs(v), precision);
  const auto dot = s.find('.');
  const std::string whole = s.substr(0, dot);
  std::string out = grouped(std::stoull(whole));
  if (dot != std::string::npos) out += s.substr(dot);
  return (v < 0 ? "-" : "") + out;
}

inline std::string percent(double ratio, int precision = 2) { return fixed(ratio * 100.0, precision) + "%"; }

/// p-values below 1e-15 are shown as an inequality.
inline std::string p_value(double p) {
  if (p < 1e-15) return "< 1e-15";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", p);
  return buf;
}

inline std::string optional_kelvin(const std::optional<double>& v) { return v ? fixed(*v, 1) : "---"; }

}  // namespace fmt

inline constexpr std::array<std::string_view, 12> kMonthNames{"January", "February", "March",     "April",
                                                             "May",     "June",     "July",      "August",
                                                             "September", "October", "November", "December"};

inline std::string confidence_name(Confidence c) {
  switch (c) {
    case Confidence::High:
      return "High";
    case Confidence::Low:
      return "Low";
    case Confidence::Nominal:
      return "Nominal";
  }
  return "?";
}

inline std::string daynight_name(DayNight d) { return d == DayNight::Night ? "Night" : "Day"; }

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// ---------------------------------------------------------------------------
// JSON

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const SkipCounts& s) {
  Json by_kind = Json::object();
  for (const auto& [k, n] : s.by_kind) by_kind[std::string(to_string(k))] = n;
  return {{"total", s.total()}, {"by_kind", by_kind}};
}

inline Json to_json(const QCThresholds& t) {
  return {{"lat_min", t.lat_min},
          {"lat_max", t.lat_max},
          {"lon_min", t.lon_min},
          {"lon_max", t.lon_max},
          {"brightness_low", t.brightness_low},
          {"brightness_high", t.brightness_high},
          {"brightness_min_fraction", t.brightness_min_fraction},
          {"adequate_sample_size", t.adequate_sample_size}};
}

inline Json to_json(const QCReport& q) {
  Json checks = Json::array();
  for (const auto& c : q.checks) {
    checks.push_back({{"name", c.name}, {"result", c.result}, {"passed", c.passed}, {"gating", c.gating}});
  }
  return {{"total_rows", q.total_rows},
          {"valid_rows", q.valid_rows},
          {"missing_value_rows", q.missing_value_rows},
          {"invalid_confidence", q.invalid_confidence},
          {"invalid_daynight", q.invalid_daynight},
          {"other_syntax_errors", q.other_syntax_errors},
          {"lat_out_of_bounds", q.lat_out_of_bounds},
          {"lon_out_of_bounds", q.lon_out_of_bounds},
          {"brightness_in_range", q.brightness_in_range},
          {"brightness_in_typical_range_fraction", q.brightness_in_typical_range_fraction},
          {"sample_size_adequate", q.sample_size_adequate},
          {"passed", q.passed()},
          {"checks", checks},
          {"thresholds", to_json(q.thresholds)}};
}

inline Json to_json(const ContingencyTable& t) {
  Json counts = Json::array();
  for (std::size_t i = 0; i < t.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < t.cols(); ++j) row.push_back(t.at(i, j));
    counts.push_back(std::move(row));
  }
  Json rt = Json::array();
  Json ct = Json::array();
  for (std::size_t i = 0; i < t.rows(); ++i) rt.push_back(t.row_total(i));
  for (std::size_t j = 0; j < t.cols(); ++j) ct.push_back(t.col_total(j));
  return {{"row_labels", t.row_labels()}, {"col_labels", t.col_labels()}, {"counts", counts},
          {"row_totals", rt},             {"col_totals", ct},             {"grand_total", t.grand_total()}};
}

inline Json to_json(const ChiSquareResult& r) {
  return {{"statistic", r.statistic},
          {"df", r.df},
          {"p_value", r.p_value},
          {"log_p", r.log_p},
          {"cramers_v", optional_json(r.cramers_v)},
          {"expected", to_json(r.expected)},
          {"residuals", to_json(r.residuals)}};
}

inline Json to_json(const VerificationResult& v) {
  Json methods = Json::array();
  for (std::size_t i = 0; i < v.method_names.size(); ++i) {
    methods.push_back({{"method", v.method_names[i]}, {"count", v.counts[i]}});
  }
  return {{"predicate", v.predicate_description}, {"methods", methods}, {"agreement", v.agreement}};
}

inline Json to_json(const BootstrapResult& b) {
  Json hist = Json::array();
  for (const auto& [value, n] : b.histogram()) hist.push_back({{"count", value}, {"iterations", n}});
  return {{"n_iter", b.n_iter},
          {"sample_size", b.sample_size},
          {"master_seed", b.master_seed},
          {"mean", b.mean},
          {"sd", b.sd},
          {"min", b.min},
          {"max", b.max},
          {"ci95", {b.ci95.first, b.ci95.second}},
          {"degenerate", b.degenerate},
          {"histogram", hist},
          {"per_iteration_counts", b.per_iteration_counts}};
}

inline Json to_json(const TreeParams& p) {
  return {{"max_depth", p.max_depth ? Json(*p.max_depth) : Json(nullptr)},
          {"min_samples_split", p.min_samples_split},
          {"min_samples_leaf", p.min_samples_leaf}};
}

inline Json tree_to_json(const DecisionTree& tree) {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const auto& n = tree.nodes()[i];
    Json node = {{"id", i},
                 {"depth", n.depth},
                 {"class_counts", {{"h", n.class_counts[0]}, {"l", n.class_counts[1]}, {"n", n.class_counts[2]}}},
                 {"impurity", n.impurity}};
    if (!n.is_leaf()) {
      node["feature"] = kFeatureNames[static_cast<std::size_t>(n.feature)];
      node["threshold"] = n.threshold;
      node["left"] = n.left;
      node["right"] = n.right;
      node["weighted_impurity_decrease"] = n.weighted_impurity_decrease;
    }
    nodes.push_back(std::move(node));
  }
  return {{"params", to_json(tree.params())}, {"depth", tree.depth()}, {"leaf_count", tree.leaf_count()},
          {"nodes", nodes}};
}

inline Json to_json(const EvalMetrics& m) {
  Json confusion = Json::object();
  Json precision = Json::object();
  Json recall = Json::object();
  for (auto t : kAllConfidences) {
    Json row = Json::object();
    for (auto p : kAllConfidences) row[std::string(1, to_char(p))] = m.confusion[index_of(t)][index_of(p)];
    const std::string key(1, to_char(t));
    confusion[key] = row;
    precision[key] = optional_json(m.precision[index_of(t)]);
    recall[key] = optional_json(m.recall[index_of(t)]);
  }
  return {{"accuracy", m.accuracy}, {"total", m.total},         {"correct", m.correct},
          {"confusion", confusion}, {"precision", precision}, {"recall", recall}};
}

inline Json to_json(const CategoryStats& s) {
  return {{"daynight", std::string(1, to_char(s.daynight))},
          {"confidence", std::string(1, to_char(s.confidence))},
          {"count", s.count},
          {"mean", optional_json(s.mean)},
          {"median", optional_json(s.median)},
          {"median_exact", s.median_exact},
          {"min", optional_json(s.min)},
          {"max", optional_json(s.max)}};
}

inline Json to_json(const ThresholdEstimate& t) {
  auto one = [](const ThresholdSupport& s) {
    return Json{{"threshold", s.threshold}, {"rows_within_1k", s.rows_within_1k}};
  };
  return {{"theta_night", one(t.theta_night)}, {"theta_min", one(t.theta_min)}, {"theta_high", one(t.theta_high)}};
}

/// Cell list of occupied cells; the full matrices are available as CSV.
inline Json to_json(const GridResult& g) {
  Json cells = Json::array();
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t c = 0; c < g.cols; ++c) {
      if (g.total(r, c) == 0) continue;
      cells.push_back({{"row", r}, {"col", c}, {"total", g.total(r, c)}, {"night_low", g.night_low_at(r, c)}});
    }
  }
  return {{"cell_size", g.cell_size},         {"rows", g.rows},
          {"cols", g.cols},                   {"grand_total", g.grand_total()},
          {"occupied_cells", g.occupied_cells}, {"nonzero_night_low_cells", g.nonzero_cells},
          {"cells", cells}};
}

inline Json to_json(std::span<const MonthlyRow> rows) {
  Json out = Json::array();
  std::size_t holding = 0;
  for (const auto& m : rows) {
    out.push_back({{"month", m.month},
                   {"total_fires", m.total_fires},
                   {"night_fires", m.night_fires},
                   {"night_low_conf", m.night_low_conf},
                   {"pattern_holds", m.pattern_holds}});
    if (m.pattern_holds) ++holding;
  }
  return {{"months", out}, {"pattern_holds", holding}, {"of", rows.size()}};
}

inline Json to_json(const BandSummary& s) {
  Json bands = Json::array();
  for (const auto& b : s.bands) {
    bands.push_back({{"band", b.band},
                     {"lat_lower", b.lat_lower},
                     {"lat_upper", b.lat_upper},
                     {"total_fires", b.total_fires},
                     {"night_low_conf", b.night_low_conf},
                     {"qualifies", b.qualifies},
                     {"pattern_holds", b.pattern_holds}});
  }
  return {{"band_width", s.band_width}, {"min_count", s.min_count}, {"qualifying", s.qualifying},
          {"holding", s.holding},       {"fraction", optional_json(s.fraction())}, {"bands", bands}};
}

// ---------------------------------------------------------------------------
// Markdown

namespace md {

inline void table(std::ostream& os, const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows) {
  os << '|';
  for (const auto& h : header) os << ' ' << h << " |";
  os << "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) os << (i == 0 ? "---|" : "---:|");
  os << '\n';
  for (const auto& r : rows) {
    os << '|';
    for (const auto& c : r) os << ' ' << c << " |";
    os << '\n';
  }
}

inline std::string skipped_banner(std::string_view title, std::string_view reason) {
  std::string s = "## ";
  s += title;
  s += "\n\n> **skipped**";
  if (!reason.empty()) {
    s += ": ";
    s += reason;
  }
  s += "\n";
  return s;
}

inline std::string error_banner(std::string_view title, std::string_view message) {
  std::string s = "## ";
  s += title;
  s += "\n\n> **error**: ";
  s += message;
  s += "\n";
  return s;
}

}  // namespace md

inline void render_markdown(std::ostream& os, const QCReport& q) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : q.checks) rows.push_back({c.name, c.result, c.passed ? "PASS" : "FAIL"});
  md::table(os, {"Check", "Result", "Status"}, rows);
  os << "\nRows read: " << fmt::grouped(q.total_rows) << "; valid: " << fmt::grouped(q.valid_rows) << "\n";
}

inline void render_markdown(std::ostream& os, const ContingencyTable& t) {
  std::vector<std::string> header{"Confidence"};
  for (const auto& c : t.col_labels()) header.push_back(c);
  header.push_back("Total");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    std::vector<std::string> row{t.row_labels()[i]};
    for (std::size_t j = 0; j < t.cols(); ++j) row.push_back(fmt::grouped(t.at(i, j)));
    row.push_back(fmt::grouped(t.row_total(i)));
    rows.push_back(std::move(row));
  }
  std::vector<std::string> total{"Total"};
  for (std::size_t j = 0; j < t.cols(); ++j) total.push_back(fmt::grouped(t.col_total(j)));
  total.push_back(fmt::grouped(t.grand_total()));
  rows.push_back(std::move(total));
  md::table(os, header, rows);
}

inline void render_markdown(std::ostream& os, const ContingencyTable& t, const ChiSquareResult& r) {
  os << "- chi-square = " << fmt::grouped_fixed(r.statistic, 2) << ", df = " << r.df
     << ", p " << (r.p_value < 1e-15 ? "" : "= ") << fmt::p_value(r.p_value) << " (log p = " << fmt::fixed(r.log_p, 2) << ")\n";
  if (r.cramers_v) os << "- Cramer's V = " << fmt::fixed(*r.cramers_v, 3) << "\n";
  os << "\nStandardized residuals:\n\n";
  std::vector<std::string> header{"Confidence"};
  for (const auto& c : t.col_labels()) header.push_back(c + " residual");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    std::vector<std::string> row{t.row_labels()[i]};
    for (std::size_t j = 0; j < t.cols(); ++j) row.push_back(fmt::signed_fixed(r.residuals(i, j), 2));
    rows.push_back(std::move(row));
  }
  md::table(os, header, rows);
  os << "\nExpected counts:\n\n";
  header = {"Confidence"};
  for (const auto& c : t.col_labels()) header.push_back(c);
  rows.clear();
  for (std::size_t i = 0; i < t.rows(); ++i) {
    std::vector<std::string> row{t.row_labels()[i]};
    for (std::size_t j = 0; j < t.cols(); ++j) row.push_back(fmt::grouped_fixed(r.expected(i, j), 2));
    rows.push_back(std::move(row));
  }
  md::table(os, header, rows);
}

inline void render_markdown(std::ostream& os, const VerificationResult& v) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < v.counts.size(); ++i) {
    rows.push_back({std::to_string(i + 1) + ". " + v.method_names[i], fmt::grouped(v.counts[i])});
  }
  md::table(os, {"Method", "Count"}, rows);
  os << "\nPredicate: `" << v.predicate_description << "`; agreement: " << (v.agreement ? "yes" : "NO") << "\n";
}

inline void render_markdown(std::ostream& os, const BootstrapResult& b) {
  md::table(os, {"Statistic", "Value"},
            {{"Iterations", fmt::grouped(b.n_iter)},
             {"Sample size", fmt::grouped(b.sample_size)},
             {"Mean count", fmt::fixed(b.mean, 2)},
             {"Standard deviation", fmt::fixed(b.sd, 2)},
             {"Min / max", std::to_string(b.min) + " / " + std::to_string(b.max)},
             {"95% CI", "[" + std::to_string(b.ci95.first) + ", " + std::to_string(b.ci95.second) + "]"},
             {"Degenerate", b.degenerate ? "yes" : "no"},
             {"Master seed", std::to_string(b.master_seed)}});
}

inline void render_markdown(std::ostream& os, std::span<const CategoryStats> stats) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : stats) {
    std::string median = fmt::optional_kelvin(s.median);
    if (s.median && !s.median_exact) median = "~" + median;
    rows.push_back({daynight_name(s.daynight) + "-" + confidence_name(s.confidence), fmt::grouped(s.count),
                    fmt::optional_kelvin(s.mean), median, fmt::optional_kelvin(s.min), fmt::optional_kelvin(s.max)});
  }
  md::table(os, {"Category", "Count", "Mean (K)", "Median (K)", "Min (K)", "Max (K)"}, rows);
}

inline void render_markdown(std::ostream& os, const ThresholdEstimate& t) {
  auto row = [](const char* name, const ThresholdSupport& s) {
    return std::vector<std::string>{name, fmt::fixed(s.threshold, 2), fmt::grouped(s.rows_within_1k)};
  };
  md::table(os, {"Threshold", "Kelvin", "Rows within 1 K"},
            {row("theta_night (night minimum)", t.theta_night), row("theta_min (global minimum)", t.theta_min),
             row("theta_high (high-confidence minimum)", t.theta_high)});
}

inline void render_markdown(std::ostream& os, std::span<const MonthlyRow> rows) {
  std::vector<std::vector<std::string>> out;
  std::size_t holding = 0;
  for (const auto& m : rows) {
    out.push_back({std::string(kMonthNames[m.month - 1]), fmt::grouped(m.total_fires), fmt::grouped(m.night_fires),
                   fmt::grouped(m.night_low_conf), m.pattern_holds ? "Yes" : "No"});
    if (m.pattern_holds) ++holding;
  }
  md::table(os, {"Month", "Total Fires", "Night Fires", "Night Low-Conf", "Pattern Holds"}, out);
  os << "\nPattern holds in " << holding << "/" << rows.size() << " months\n";
}

inline void render_markdown(std::ostream& os, const BandSummary& s) {
  std::vector<std::vector<std::string>> out;
  for (const auto& b : s.bands) {
    if (b.total_fires == 0) continue;
    out.push_back({fmt::fixed(b.lat_lower, 1) + " to " + fmt::fixed(b.lat_upper, 1), fmt::grouped(b.total_fires),
                   fmt::grouped(b.night_low_conf), b.qualifies ? "Yes" : "No", b.pattern_holds ? "Yes" : "No"});
  }
  md::table(os, {"Latitude band", "Total Fires", "Night Low-Conf", "Qualifies", "Pattern Holds"}, out);
  os << "\nBand width " << fmt::fixed(s.band_width, 1) << " deg, qualifying when total > " << s.min_count
     << ": pattern holds in " << s.holding << "/" << s.qualifying << " qualifying bands";
  if (const auto f = s.fraction()) os << " (" << fmt::percent(*f, 1) << ")";
  os << "\n";
}

inline void render_markdown(std::ostream& os, const GridResult& g) {
  os << "- cell size: " << fmt::fixed(g.cell_size, 1) << " deg (" << g.rows << " x " << g.cols << ")\n"
     << "- detections: " << fmt::grouped(g.grand_total()) << " in " << g.occupied_cells << " occupied cells\n"
     << "- cells with night low-confidence detections: " << g.nonzero_cells << "\n";
}

// ---------------------------------------------------------------------------
// CSV / GeoJSON exports

/// Row-major matrix of one grid layer; the first column is the cell's lower
/// latitude and the header carries lower longitudes.
inline std::string grid_csv(const GridResult& g, bool night_low_layer) {
  std::ostringstream os;
  os << "lat_lower";
  for (std::size_t c = 0; c < g.cols; ++c) os << ',' << format_double(-180.0 + g.cell_size * static_cast<double>(c));
  os << '\n';
  for (std::size_t r = 0; r < g.rows; ++r) {
    os << format_double(-90.0 + g.cell_size * static_cast<double>(r));
    for (std::size_t c = 0; c < g.cols; ++c) os << ',' << (night_low_layer ? g.night_low_at(r, c) : g.total(r, c));
    os << '\n';
  }
  return os.str();
}

/// FeatureCollection with one polygon per occupied cell.
inline Json grid_geojson(const GridResult& g) {
  Json features = Json::array();
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t c = 0; c < g.cols; ++c) {
      if (g.total(r, c) == 0) continue;
      const double lat0 = -90.0 + g.cell_size * static_cast<double>(r);
      const double lon0 = -180.0 + g.cell_size * static_cast<double>(c);
      const double lat1 = lat0 + g.cell_size;
      const double lon1 = lon0 + g.cell_size;
      Json ring = Json::array({Json::array({lon0, lat0}), Json::array({lon1, lat0}), Json::array({lon1, lat1}),
                               Json::array({lon0, lat1}), Json::array({lon0, lat0})});
      features.push_back({{"type", "Feature"},
                          {"geometry", {{"type", "Polygon"}, {"coordinates", Json::array({ring})}}},
                          {"properties",
                           {{"row", r}, {"col", c}, {"total", g.total(r, c)}, {"night_low", g.night_low_at(r, c)}}}});
    }
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

inline std::string contingency_csv(const ContingencyTable& t) {
  std::ostringstream os;
  os << "label";
  for (const auto& c : t.col_labels()) os << ',' << c;
  os << ",total\n";
  for (std::size_t i = 0; i < t.rows(); ++i) {
    os << t.row_labels()[i];
    for (std::size_t j = 0; j < t.cols(); ++j) os << ',' << t.at(i, j);
    os << ',' << t.row_total(i) << '\n';
  }
  os << "total";
  for (std::size_t j = 0; j < t.cols(); ++j) os << ',' << t.col_total(j);
  os << ',' << t.grand_total() << '\n';
  return os.str();
}

inline std::string matrix_csv(const ContingencyTable& t, const Matrix& m) {
  std::ostringstream os;
  os << "label";
  for (const auto& c : t.col_labels()) os << ',' << c;
  os << '\n';
  for (std::size_t i = 0; i < m.rows; ++i) {
    os << t.row_labels()[i];
    for (std::size_t j = 0; j < m.cols; ++j) os << ',' << format_double(m(i, j));
    os << '\n';
  }
  return os.str();
}

}  // namespace firmsaudit
