#pragma once

// End-to-end audit: one scan over the input feeds every streaming aggregate,
// then the record-level analyses run on the materialized rows.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "firmsaudit/brightness.hpp"
#include "firmsaudit/error.hpp"
#include "firmsaudit/qc.hpp"
#include "firmsaudit/random.hpp"
#include "firmsaudit/records.hpp"
#include "firmsaudit/report.hpp"
#include "firmsaudit/resample.hpp"
#include "firmsaudit/spacetime.hpp"
#include "firmsaudit/stats.hpp"
#include "firmsaudit/treelearn.hpp"
#include "firmsaudit/verify.hpp"

namespace firmsaudit {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum class Analysis : std::uint8_t { Qc, Contingency, Verify, Bootstrap, Ml, Brightness, Grid, Monthly, Bands };
inline constexpr std::array<Analysis, 9> kAllAnalyses{Analysis::Qc,         Analysis::Contingency, Analysis::Verify,
                                                      Analysis::Bootstrap,  Analysis::Ml,          Analysis::Brightness,
                                                      Analysis::Grid,       Analysis::Monthly,     Analysis::Bands};

inline std::string_view to_string(Analysis a) {
  constexpr std::array<std::string_view, 9> names{"qc",   "contingency", "verify",  "bootstrap", "ml",
                                                  "brightness", "grid",  "monthly", "bands"};
  return names[static_cast<std::size_t>(a)];
}

inline std::optional<Analysis> analysis_from(std::string_view s) {
  for (auto a : kAllAnalyses) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

enum class OutputFormat { Json, Markdown };

inline std::optional<OutputFormat> format_from(std::string_view s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "markdown" || s == "md") return OutputFormat::Markdown;
  return std::nullopt;
}

struct AuditConfig {
  /// File paths; "-" reads standard input.
  std::vector<std::string> inputs{"-"};
  std::vector<Analysis> analyses{kAllAnalyses.begin(), kAllAnalyses.end()};
  QCThresholds qc;
  double grid_cell_size = 10.0;
  double band_width = 10.0;
  std::uint64_t band_min_count = 100;
  std::size_t bootstrap_iterations = 1000;
  std::size_t bootstrap_sample_size = 10000;
  TreeParams tree;
  double test_fraction = 0.2;
  std::uint64_t master_seed = 42;
  /// Strict: the first bad row aborts ingestion, and a failed gating QC check
  /// skips every later section.
  bool strict = false;
  ParseOptions parse;
  CountRequest count;
  MedianMode median = MedianMode::Exact;
  OutputFormat format = OutputFormat::Json;
  /// Worker threads; never changes results and is left out of the echo.
  unsigned threads = 1;

  [[nodiscard]] bool enabled(Analysis a) const { return std::find(analyses.begin(), analyses.end(), a) != analyses.end(); }

  void validate() const {
    if (analyses.empty()) throw AuditError(ErrorCode::InvalidArgument, "no analysis enabled");
    if (inputs.empty()) throw AuditError(ErrorCode::InvalidArgument, "no input given");
    if (bins_for(180.0, grid_cell_size) == 0 || bins_for(360.0, grid_cell_size) == 0) {
      throw AuditError(ErrorCode::InvalidCellSize, "cell size must divide 180 degrees evenly");
    }
    if (bins_for(180.0, band_width) == 0) {
      throw AuditError(ErrorCode::InvalidBandWidth, "band width must divide 180 degrees evenly");
    }
  }

  [[nodiscard]] std::uint64_t bootstrap_seed() const { return derive_seed(master_seed, 1); }
  [[nodiscard]] std::uint64_t split_seed() const { return derive_seed(master_seed, 2); }
};

inline Json to_json(const AuditConfig& c) {
  Json analyses = Json::array();
  for (auto a : kAllAnalyses) {
    if (c.enabled(a)) analyses.push_back(to_string(a));
  }
  Json sats = Json::array();
  for (const auto& s : c.parse.satellites) sats.push_back(s);
  return {{"inputs", c.inputs},
          {"analyses", analyses},
          {"qc_thresholds", to_json(c.qc)},
          {"grid_cell_size", c.grid_cell_size},
          {"band_width", c.band_width},
          {"band_min_count", c.band_min_count},
          {"bootstrap", {{"n_iter", c.bootstrap_iterations}, {"sample_size", c.bootstrap_sample_size}}},
          {"tree", to_json(c.tree)},
          {"test_fraction", c.test_fraction},
          {"master_seed", c.master_seed},
          {"derived_seeds", {{"bootstrap", c.bootstrap_seed()}, {"split", c.split_seed()}}},
          {"strict", c.strict},
          {"satellites", sats},
          {"count_predicate", c.count.query_text()},
          {"median_mode", c.median == MedianMode::Exact ? "exact" : "histogram"}};
}

// ---------------------------------------------------------------------------
// Report

enum class SectionStatus { Ok, Skipped, Error };

inline std::string_view to_string(SectionStatus s) {
  switch (s) {
    case SectionStatus::Ok:
      return "ok";
    case SectionStatus::Skipped:
      return "skipped";
    case SectionStatus::Error:
      return "error";
  }
  return "?";
}

template <typename T>
struct Section {
  SectionStatus status = SectionStatus::Skipped;
  std::string message = "not enabled";
  std::optional<T> value;

  void ok(T v) {
    status = SectionStatus::Ok;
    message.clear();
    value = std::move(v);
  }
  void skip(std::string why) {
    status = SectionStatus::Skipped;
    message = std::move(why);
    value.reset();
  }
  void fail(std::string why) {
    status = SectionStatus::Error;
    message = std::move(why);
    value.reset();
  }
};

struct ContingencySection {
  ContingencyTable table;
  std::optional<ChiSquareResult> chi_square;
};

struct BootstrapSection {
  std::string subset;
  std::string predicate;
  std::uint64_t subset_size = 0;
  BootstrapResult result;
};

struct TreeSection {
  TreeParams params;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  std::uint64_t train_rows = 0;
  std::uint64_t test_rows = 0;
  std::uint64_t night_test_rows = 0;
  EvalMetrics train_metrics;
  EvalMetrics test_metrics;
  double majority_baseline = 0.0;
  std::optional<std::array<double, kFeatureCount>> importances;
  std::uint64_t night_probe = 0;
  DecisionTree tree;
};

struct BrightnessSection {
  std::vector<CategoryStats> stats;
  std::optional<ThresholdEstimate> thresholds;
  std::string threshold_note;
  /// Categories whose every value is identical (e.g. a saturated sensor).
  std::vector<std::string> constant_categories;
};

struct Headline {
  std::uint64_t night_low_count = 0;
  std::optional<double> expected;
  std::optional<double> residual;
};

struct AuditReport {
  std::string tool_version{kToolVersion};
  std::string rng_algorithm{kRngAlgorithm};
  AuditConfig config;
  std::uint64_t rows_read = 0;
  SkipCounts skipped;
  std::optional<Headline> headline;
  Section<QCReport> qc;
  Section<ContingencySection> contingency;
  Section<VerificationResult> verify;
  Section<BootstrapSection> bootstrap;
  Section<TreeSection> ml;
  Section<BrightnessSection> brightness;
  Section<GridResult> grid;
  Section<std::vector<MonthlyRow>> monthly;
  Section<BandSummary> bands;

  [[nodiscard]] bool any_error() const {
    return qc.status == SectionStatus::Error || contingency.status == SectionStatus::Error ||
           verify.status == SectionStatus::Error || bootstrap.status == SectionStatus::Error ||
           ml.status == SectionStatus::Error || brightness.status == SectionStatus::Error ||
           grid.status == SectionStatus::Error || monthly.status == SectionStatus::Error ||
           bands.status == SectionStatus::Error;
  }

  /// 0 iff no section errored and, in strict mode, QC passed.
  [[nodiscard]] int exit_code() const {
    if (any_error()) return 1;
    if (config.strict && qc.value && !qc.value->passed()) return 1;
    return 0;
  }
};

// ---------------------------------------------------------------------------
// Execution

namespace detail {

/// Dense confidence-by-day/night tally; cheaper per row than the general
/// builder and converted to it at the end.
struct ConfidenceDayNightCounts {
  std::array<std::uint64_t, 6> cells{};
  void add(const FireDetection& r) { ++cells[index_of(r.confidence) * 2 + index_of(r.daynight)]; }
  [[nodiscard]] ContingencyBuilder builder() const {
    ContingencyBuilder b;
    for (auto c : kAllConfidences) {
      for (auto d : kAllDayNight) {
        const auto n = cells[index_of(c) * 2 + index_of(d)];
        if (n > 0) b.add(std::string(1, to_char(c)), std::string(1, to_char(d)), n);
      }
    }
    return b;
  }
};

template <typename T, typename Fn>
void run_section(Section<T>& s, Fn&& fn) {
  try {
    s.ok(fn());
  } catch (const AuditError& e) {
    s.fail(e.what());
  }
}

inline std::vector<std::string> constant_categories(std::span<const CategoryStats> stats) {
  std::vector<std::string> out;
  for (const auto& s : stats) {
    if (s.count > 1 && s.min && *s.min == *s.max) {
      out.push_back(std::string(1, to_char(s.daynight)) + "-" + to_char(s.confidence) + " at " +
                    format_double(*s.min) + " K");
    }
  }
  return out;
}

}  // namespace detail

/// Runs the audit over already-open streams (each with its own header row).
inline AuditReport run_audit(const AuditConfig& config, std::span<std::istream* const> streams) {
  config.validate();
  AuditReport rep;
  rep.config = config;
  auto en = [&](Analysis a) { return config.enabled(a); };
  auto mark_skipped = [&](const std::string& why) {
    if (en(Analysis::Contingency)) rep.contingency.skip(why);
    if (en(Analysis::Verify)) rep.verify.skip(why);
    if (en(Analysis::Bootstrap)) rep.bootstrap.skip(why);
    if (en(Analysis::Ml)) rep.ml.skip(why);
    if (en(Analysis::Brightness)) rep.brightness.skip(why);
    if (en(Analysis::Grid)) rep.grid.skip(why);
    if (en(Analysis::Monthly)) rep.monthly.skip(why);
    if (en(Analysis::Bands)) rep.bands.skip(why);
  };

  const bool materialize = en(Analysis::Verify) || en(Analysis::Bootstrap) || en(Analysis::Ml);
  QCAccumulator qc(config.qc);
  detail::ConfidenceDayNightCounts contingency;
  BrightnessAccumulator brightness(config.median);
  GridAccumulator grid(config.grid_cell_size);
  MonthlyAccumulator monthly;
  BandAccumulator bands(config.band_width);
  std::vector<FireDetection> records;

  const auto policy = config.strict ? ErrorPolicy::Strict : ErrorPolicy::SkipAndCount;
  try {
    for (auto* in : streams) {
      DatasetReader reader(*in, policy, config.parse);
      struct SkipSync {  // keeps QC skip counts right even when a row throws
        DatasetReader& r;
        QCAccumulator& q;
        std::uint64_t& rows;
        SkipCounts& total;
        ~SkipSync() {
          q.add_skips(r.skipped());
          total.merge(r.skipped());
          rows += r.rows_read();
        }
      } sync{reader, qc, rep.rows_read, rep.skipped};
      reader.for_each([&](const FireDetection& r) {
        qc.add(r);
        contingency.add(r);
        brightness.add(r);
        grid.add(r);
        monthly.add(r);
        bands.add(r);
        if (materialize) records.push_back(r);
      });
    }
  } catch (const AuditError& e) {
    rep.qc.fail(e.what());
    mark_skipped("input rejected before analysis");
    return rep;
  }

  const QCReport qc_report = qc.report();
  if (en(Analysis::Qc)) rep.qc.ok(qc_report);
  if (config.strict && !qc_report.passed()) {
    mark_skipped("quality control failed in strict mode");
    return rep;
  }

  const auto table = [&]() -> std::optional<ContingencyTable> {
    const auto b = contingency.builder();
    if (b.empty()) return std::nullopt;
    return b.build();
  }();

  if (en(Analysis::Contingency)) {
    detail::run_section(rep.contingency, [&] {
      if (!table) throw AuditError(ErrorCode::EmptyDataset, "no records for contingency table");
      ContingencySection s{*table, std::nullopt};
      s.chi_square = chi_square_test(*table);
      return s;
    });
  }

  Headline head;
  const std::string dn(1, to_char(config.count.daynight));
  const std::string cf(1, to_char(config.count.confidence));
  if (table) {
    head.night_low_count = table->count(cf, dn);
    if (rep.contingency.value && rep.contingency.value->chi_square) {
      const auto& t = rep.contingency.value->table;
      const auto ri = std::find(t.row_labels().begin(), t.row_labels().end(), cf);
      const auto ci = std::find(t.col_labels().begin(), t.col_labels().end(), dn);
      if (ri != t.row_labels().end() && ci != t.col_labels().end()) {
        const auto i = static_cast<std::size_t>(ri - t.row_labels().begin());
        const auto j = static_cast<std::size_t>(ci - t.col_labels().begin());
        head.expected = rep.contingency.value->chi_square->expected(i, j);
        head.residual = rep.contingency.value->chi_square->residuals(i, j);
      }
    }
  }
  rep.headline = head;

  // Record-level analyses read the shared rows only, so they may overlap.
  const std::span<const FireDetection> rows(records);
  auto run_verify = [&] {
    detail::run_section(rep.verify, [&] { return verify_count(rows, config.count); });
  };
  auto run_bootstrap = [&] {
    detail::run_section(rep.bootstrap, [&] {
      std::vector<FireDetection> subset;
      for (const auto& r : rows) {
        if (r.daynight == config.count.daynight) subset.push_back(r);
      }
      BootstrapParams p{config.bootstrap_iterations, config.bootstrap_sample_size, config.bootstrap_seed(),
                        config.threads};
      const auto want = config.count.confidence;
      BootstrapSection s;
      s.subset = "daynight == \"" + dn + "\"";
      s.predicate = "confidence == \"" + cf + "\"";
      s.subset_size = subset.size();
      s.result = bootstrap_count(std::span<const FireDetection>(subset),
                                 [want](const FireDetection& r) { return r.confidence == want; }, p);
      return s;
    });
  };
  auto run_ml = [&] {
    detail::run_section(rep.ml, [&] {
      std::vector<FeatureRow> features;
      features.reserve(rows.size());
      for (const auto& r : rows) features.push_back(FeatureRow::from(r));
      auto [train, test] = stratified_split(features, config.test_fraction, config.split_seed());
      TreeSection s;
      s.params = config.tree;
      s.test_fraction = config.test_fraction;
      s.split_seed = config.split_seed();
      s.train_rows = train.size();
      s.test_rows = test.size();
      s.tree = fit_tree(train, config.tree);
      s.train_metrics = evaluate(s.tree, train);
      s.test_metrics = evaluate(s.tree, test);
      s.majority_baseline = majority_baseline(train);
      try {
        s.importances = feature_importances(s.tree);
      } catch (const AuditError& e) {
        if (e.code() != ErrorCode::SingleLeafTree) throw;
      }
      std::vector<FeatureRow> night;
      for (const auto& r : test) {
        if (r.is_night()) night.push_back(r);
      }
      s.night_test_rows = night.size();
      s.night_probe = night_constraint_probe(s.tree, night);
      return s;
    });
  };

  if (config.threads > 1) {
    auto ml = std::async(std::launch::async, [&] {
      if (en(Analysis::Ml)) run_ml();
    });
    if (en(Analysis::Verify)) run_verify();
    if (en(Analysis::Bootstrap)) run_bootstrap();
    ml.get();
  } else {
    if (en(Analysis::Verify)) run_verify();
    if (en(Analysis::Bootstrap)) run_bootstrap();
    if (en(Analysis::Ml)) run_ml();
  }

  if (en(Analysis::Brightness)) {
    detail::run_section(rep.brightness, [&] {
      BrightnessSection s;
      s.stats = brightness.stats();
      s.constant_categories = detail::constant_categories(s.stats);
      try {
        s.thresholds = infer_thresholds(brightness);
      } catch (const AuditError& e) {
        if (e.code() != ErrorCode::InsufficientData) throw;
        s.threshold_note = std::string("insufficient data: no rows in stratum '") + e.what() + "'";
      }
      return s;
    });
  }
  if (en(Analysis::Grid)) detail::run_section(rep.grid, [&] { return grid.result(); });
  if (en(Analysis::Monthly)) detail::run_section(rep.monthly, [&] { return monthly.rows(); });
  if (en(Analysis::Bands)) detail::run_section(rep.bands, [&] { return bands.summary(config.band_min_count); });
  return rep;
}

/// Opens every configured input ("-" is standard input) and runs the audit.
inline AuditReport run_audit(const AuditConfig& config) {
  std::vector<std::unique_ptr<std::ifstream>> files;
  std::vector<std::istream*> streams;
  for (const auto& path : config.inputs) {
    if (path == "-") {
      streams.push_back(&std::cin);
      continue;
    }
    auto f = std::make_unique<std::ifstream>(path);
    if (!*f) throw AuditError(ErrorCode::Io, "cannot open '" + path + "'");
    streams.push_back(f.get());
    files.push_back(std::move(f));
  }
  return run_audit(config, streams);
}

// ---------------------------------------------------------------------------
// Rendering

template <typename T, typename Fn>
Json section_json(const Section<T>& s, Fn&& body) {
  Json j = {{"status", to_string(s.status)}};
  if (!s.message.empty()) j["message"] = s.message;
  if (s.value) j["result"] = body(*s.value);
  return j;
}

inline Json to_json(const TreeSection& s) {
  Json imp = nullptr;
  if (s.importances) {
    imp = Json::object();
    for (std::size_t f = 0; f < kFeatureCount; ++f) imp[std::string(kFeatureNames[f])] = (*s.importances)[f];
  }
  return {{"params", to_json(s.params)},
          {"test_fraction", s.test_fraction},
          {"split_seed", s.split_seed},
          {"train_rows", s.train_rows},
          {"test_rows", s.test_rows},
          {"train", to_json(s.train_metrics)},
          {"test", to_json(s.test_metrics)},
          {"majority_baseline", s.majority_baseline},
          {"importances", imp},
          {"night_test_rows", s.night_test_rows},
          {"night_constraint_probe", s.night_probe},
          {"tree", tree_to_json(s.tree)}};
}

inline Json to_json(const AuditReport& r) {
  Json j;
  j["tool_version"] = r.tool_version;
  j["rng_algorithm"] = r.rng_algorithm;
  j["config"] = to_json(r.config);
  j["rows_read"] = r.rows_read;
  j["skipped_rows"] = to_json(r.skipped);
  if (r.headline) {
    j["headline"] = {{"predicate", r.config.count.query_text()},
                     {"count", r.headline->night_low_count},
                     {"expected", optional_json(r.headline->expected)},
                     {"standardized_residual", optional_json(r.headline->residual)}};
  } else {
    j["headline"] = nullptr;
  }
  Json s;
  s["qc"] = section_json(r.qc, [](const QCReport& q) { return to_json(q); });
  s["contingency"] = section_json(r.contingency, [](const ContingencySection& c) {
    return Json{{"table", to_json(c.table)},
                {"chi_square", c.chi_square ? to_json(*c.chi_square) : Json(nullptr)}};
  });
  s["verify"] = section_json(r.verify, [](const VerificationResult& v) { return to_json(v); });
  s["bootstrap"] = section_json(r.bootstrap, [](const BootstrapSection& b) {
    return Json{{"subset", b.subset},
                {"predicate", b.predicate},
                {"subset_size", b.subset_size},
                {"distribution", to_json(b.result)}};
  });
  s["ml"] = section_json(r.ml, [](const TreeSection& t) { return to_json(t); });
  s["brightness"] = section_json(r.brightness, [](const BrightnessSection& b) {
    Json cats = Json::array();
    for (const auto& c : b.stats) cats.push_back(to_json(c));
    Json j = {{"categories", cats},
              {"constant_categories", b.constant_categories},
              {"thresholds", b.thresholds ? to_json(*b.thresholds) : Json(nullptr)}};
    if (!b.threshold_note.empty()) j["threshold_note"] = b.threshold_note;
    return j;
  });
  s["grid"] = section_json(r.grid, [](const GridResult& g) { return to_json(g); });
  s["monthly"] = section_json(r.monthly, [](const std::vector<MonthlyRow>& m) { return to_json(m); });
  s["bands"] = section_json(r.bands, [](const BandSummary& b) { return to_json(b); });
  j["sections"] = s;
  j["exit_code"] = r.exit_code();
  return j;
}

template <typename T, typename Fn>
void section_markdown(std::ostream& os, std::string_view title, const Section<T>& s, bool show, Fn&& body) {
  if (!show) return;
  if (s.status == SectionStatus::Skipped) {
    os << "\n" << md::skipped_banner(title, s.message);
    return;
  }
  if (s.status == SectionStatus::Error) {
    os << "\n" << md::error_banner(title, s.message);
    return;
  }
  os << "\n## " << title << "\n\n";
  body(*s.value);
}

inline void render_markdown(std::ostream& os, const TreeSection& t) {
  md::table(os, {"Metric", "Value"},
            {{"Training rows", fmt::grouped(t.train_rows)},
             {"Test rows", fmt::grouped(t.test_rows)},
             {"Max depth", t.params.max_depth ? std::to_string(*t.params.max_depth) : "unlimited"},
             {"Tree depth / leaves", std::to_string(t.tree.depth()) + " / " + std::to_string(t.tree.leaf_count())},
             {"Training accuracy", fmt::percent(t.train_metrics.accuracy, 1)},
             {"Test accuracy", fmt::percent(t.test_metrics.accuracy, 1)},
             {"Majority-class baseline", fmt::percent(t.majority_baseline, 1)},
             {"Night test rows predicted low", fmt::grouped(t.night_probe) + " of " + fmt::grouped(t.night_test_rows)}});
  os << "\nFeature importances:\n\n";
  std::vector<std::vector<std::string>> rows;
  if (t.importances) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      rows.push_back({std::string(kFeatureNames[f]), fmt::percent((*t.importances)[f], 1)});
    }
  } else {
    rows.push_back({"(single-leaf tree)", "---"});
  }
  md::table(os, {"Feature", "Importance"}, rows);
  os << "\nTest confusion matrix (rows true, columns predicted):\n\n";
  rows.clear();
  for (auto a : kAllConfidences) {
    std::vector<std::string> row{std::string(1, to_char(a))};
    for (auto b : kAllConfidences) row.push_back(fmt::grouped(t.test_metrics.confusion[index_of(a)][index_of(b)]));
    rows.push_back(std::move(row));
  }
  md::table(os, {"true \\ pred", "h", "l", "n"}, rows);
}

/// With `only_enabled`, sections that were never requested are left out
/// instead of carrying a skipped banner.
inline std::string render_markdown(const AuditReport& r, bool only_enabled = false) {
  std::ostringstream os;
  auto show = [&](Analysis a) { return !only_enabled || r.config.enabled(a); };
  os << "# Fire-detection confidence audit\n\n";
  os << "- tool version: " << r.tool_version << "\n- master seed: " << r.config.master_seed
     << "\n- rng: " << r.rng_algorithm << "\n- rows read: " << fmt::grouped(r.rows_read)
     << "; skipped: " << fmt::grouped(r.skipped.total()) << "\n";
  if (r.headline) {
    os << "\n**Headline**: `" << r.config.count.query_text() << "` matches "
       << fmt::grouped(r.headline->night_low_count) << " rows";
    if (r.headline->expected) os << " against " << fmt::grouped_fixed(*r.headline->expected, 2) << " expected";
    if (r.headline->residual) os << " (standardized residual " << fmt::signed_fixed(*r.headline->residual, 2) << ")";
    os << ".\n";
  }
  section_markdown(os, "Data quality", r.qc, show(Analysis::Qc), [&](const QCReport& q) { render_markdown(os, q); });
  section_markdown(os, "Contingency", r.contingency, show(Analysis::Contingency), [&](const ContingencySection& c) {
    render_markdown(os, c.table);
    if (c.chi_square) {
      os << "\n";
      render_markdown(os, c.table, *c.chi_square);
    }
  });
  section_markdown(os, "Count verification", r.verify, show(Analysis::Verify), [&](const VerificationResult& v) { render_markdown(os, v); });
  section_markdown(os, "Bootstrap", r.bootstrap, show(Analysis::Bootstrap), [&](const BootstrapSection& b) {
    os << "Subset `" << b.subset << "` (" << fmt::grouped(b.subset_size) << " rows), counting `" << b.predicate
       << "`.\n\n";
    render_markdown(os, b.result);
  });
  section_markdown(os, "Decision tree", r.ml, show(Analysis::Ml), [&](const TreeSection& t) { render_markdown(os, t); });
  section_markdown(os, "Brightness temperature", r.brightness, show(Analysis::Brightness), [&](const BrightnessSection& b) {
    render_markdown(os, b.stats);
    os << "\n";
    if (b.thresholds) {
      render_markdown(os, *b.thresholds);
    } else {
      os << "Thresholds: " << b.threshold_note << "\n";
    }
    for (const auto& c : b.constant_categories) os << "\n- constant brightness: " << c;
    if (!b.constant_categories.empty()) os << "\n";
  });
  section_markdown(os, "Spatial grid", r.grid, show(Analysis::Grid), [&](const GridResult& g) { render_markdown(os, g); });
  section_markdown(os, "Monthly consistency", r.monthly, show(Analysis::Monthly),
                   [&](const std::vector<MonthlyRow>& m) { render_markdown(os, std::span<const MonthlyRow>(m)); });
  section_markdown(os, "Latitude bands", r.bands, show(Analysis::Bands), [&](const BandSummary& b) { render_markdown(os, b); });
  return os.str();
}

inline std::string render_report(const AuditReport& r, OutputFormat format, bool only_enabled = false) {
  if (format == OutputFormat::Markdown) return render_markdown(r, only_enabled);
  return to_json(r).dump(2) + "\n";
}

}  // namespace firmsaudit
