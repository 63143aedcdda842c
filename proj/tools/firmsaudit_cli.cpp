// Command-line front end for the audit toolkit.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "firmsaudit.hpp"

#ifdef FIRMSAUDIT_WITH_FETCH
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#endif

namespace fa = firmsaudit;

namespace {

struct Common {
  std::vector<std::string> inputs{"-"};
  std::string out = "-";
  std::string format = "json";
  std::uint64_t seed = 42;
  bool strict = false;
  unsigned threads = 1;
  std::vector<std::string> satellites;
  bool any_satellite = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_inputs = true) {
  if (with_inputs) cmd->add_option("inputs", c.inputs, "FIRMS CSV files; '-' reads standard input");
  cmd->add_option("--out,-o", c.out, "output path; '-' writes standard output");
  cmd->add_option("--seed", c.seed, "master seed for every random stream");
  cmd->add_flag("--strict", c.strict, "abort on the first bad row; a failed QC check skips later sections");
  cmd->add_option("--threads", c.threads, "worker threads (results do not depend on this)");
  cmd->add_option("--satellites", c.satellites, "accepted satellite tokens (default N 1 N20 NPP)");
  cmd->add_flag("--any-satellite", c.any_satellite, "accept every satellite token");
}

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw fa::AuditError(fa::ErrorCode::Io, "cannot write '" + path + "'");
  f << text;
  if (!f) throw fa::AuditError(fa::ErrorCode::Io, "failed writing '" + path + "'");
}

fa::AuditConfig base_config(const Common& c) {
  fa::AuditConfig cfg;
  cfg.inputs = c.inputs;
  cfg.master_seed = c.seed;
  cfg.strict = c.strict;
  cfg.threads = c.threads;
  if (c.any_satellite) {
    cfg.parse.satellites.clear();
  } else if (!c.satellites.empty()) {
    cfg.parse.satellites = {c.satellites.begin(), c.satellites.end()};
  }
  return cfg;
}

fa::OutputFormat parse_format(const std::string& s) {
  const auto f = fa::format_from(s);
  if (!f) throw fa::AuditError(fa::ErrorCode::InvalidArgument, "unknown format '" + s + "'");
  return *f;
}

int emit(const fa::AuditReport& rep, const Common& c, bool only_enabled) {
  write_output(c.out, fa::render_report(rep, parse_format(c.format), only_enabled));
  return rep.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit toolkit for FIRMS VIIRS active-fire detection archives"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fa::kToolVersion));

  Common common;
  std::function<int()> action;

  // Analyses that run through the shared audit pipeline.
  auto single = [&](const char* name, const char* help, fa::Analysis analysis) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, common);
    cmd->add_option("--format,-f", common.format, "json or markdown")->check(CLI::IsMember({"json", "markdown", "md"}));
    return std::pair{cmd, analysis};
  };

  // qc
  fa::QCThresholds qct;
  {
    auto [cmd, a] = single("qc", "data-quality validation battery", fa::Analysis::Qc);
    cmd->add_option("--brightness-low", qct.brightness_low, "typical brightness floor (K)");
    cmd->add_option("--brightness-high", qct.brightness_high, "typical brightness ceiling (K)");
    cmd->add_option("--brightness-min-fraction", qct.brightness_min_fraction, "pass fraction for the brightness check");
    cmd->add_option("--adequate-sample-size", qct.adequate_sample_size, "rows needed (strictly more) for adequacy");
    cmd->callback([&, a] {
      action = [&, a] {
        auto cfg = base_config(common);
        cfg.analyses = {a};
        cfg.qc = qct;
        return emit(fa::run_audit(cfg), common, true);
      };
    });
  }

  // contingency
  std::string counts_csv;
  std::string residuals_csv;
  std::string expected_csv;
  {
    auto [cmd, a] = single("contingency", "confidence by day/night table and chi-square test", fa::Analysis::Contingency);
    cmd->add_option("--counts-csv", counts_csv, "also write the count matrix as CSV");
    cmd->add_option("--residuals-csv", residuals_csv, "also write standardized residuals as CSV");
    cmd->add_option("--expected-csv", expected_csv, "also write expected counts as CSV");
    cmd->callback([&, a] {
      action = [&, a] {
        auto cfg = base_config(common);
        cfg.analyses = {a};
        const auto rep = fa::run_audit(cfg);
        if (const auto& s = rep.contingency.value) {
          if (!counts_csv.empty()) write_output(counts_csv, fa::contingency_csv(s->table));
          if (s->chi_square && !residuals_csv.empty()) {
            write_output(residuals_csv, fa::matrix_csv(s->table, s->chi_square->residuals));
          }
          if (s->chi_square && !expected_csv.empty()) {
            write_output(expected_csv, fa::matrix_csv(s->table, s->chi_square->expected));
          }
        }
        return emit(rep, common, true);
      };
    });
  }

  // verify
  std::string query;
  std::optional<std::string> daynight;
  std::optional<std::string> confidence;
  // The counted cell comes from --daynight/--confidence, else from a --query
  // naming exactly one cell, else defaults to night/low.
  auto apply_pair = [&](fa::AuditConfig& cfg) {
    cfg.count.query = query;
    std::optional<std::pair<fa::DayNight, fa::Confidence>> from_query;
    if (!query.empty()) from_query = fa::query::cell_of(fa::query::parse(query));
    if (!daynight && !confidence && !query.empty()) {
      if (!from_query) {
        throw fa::AuditError(fa::ErrorCode::InvalidArgument,
                             "query does not name a single day/night and confidence cell; pass --daynight and "
                             "--confidence as well");
      }
      cfg.count.daynight = from_query->first;
      cfg.count.confidence = from_query->second;
      return;
    }
    const auto d = fa::daynight_from(daynight.value_or("N"));
    const auto c = fa::confidence_from(confidence.value_or("l"));
    if (!d || !c) throw fa::AuditError(fa::ErrorCode::InvalidArgument, "day/night must be D|N and confidence h|n|l");
    cfg.count.daynight = *d;
    cfg.count.confidence = *c;
  };
  {
    auto [cmd, a] = single("verify", "count a predicate five independent ways", fa::Analysis::Verify);
    cmd->add_option("--daynight", daynight, "day/night flag of the counted cell (D or N)");
    cmd->add_option("--confidence", confidence, "confidence of the counted cell (h, n or l)");
    cmd->add_option("--query", query, "predicate for the parsed-query method, e.g. 'daynight == \"N\" and confidence == \"l\"'");
    cmd->callback([&, a] {
      action = [&, a] {
        auto cfg = base_config(common);
        cfg.analyses = {a};
        apply_pair(cfg);
        return emit(fa::run_audit(cfg), common, true);
      };
    });
  }

  // bootstrap
  std::size_t iterations = 1000;
  std::size_t sample_size = 10000;
  {
    auto [cmd, a] = single("bootstrap", "bootstrap distribution of the counted cell", fa::Analysis::Bootstrap);
    cmd->add_option("--iterations", iterations, "resampling iterations");
    cmd->add_option("--sample-size", sample_size, "draws per iteration");
    cmd->add_option("--daynight", daynight, "subset day/night flag (D or N)");
    cmd->add_option("--confidence", confidence, "counted confidence (h, n or l)");
    cmd->callback([&, a] {
      action = [&, a] {
        auto cfg = base_config(common);
        cfg.analyses = {a};
        apply_pair(cfg);
        cfg.bootstrap_iterations = iterations;
        cfg.bootstrap_sample_size = sample_size;
        return emit(fa::run_audit(cfg), common, true);
      };
    });
  }

  // ml
  std::size_t max_depth = 10;
  double test_fraction = 0.2;
  std::size_t min_split = 2;
  std::size_t min_leaf = 1;
  std::string tree_json;
  auto apply_tree = [&](fa::AuditConfig& cfg) {
    cfg.tree.max_depth = max_depth == 0 ? std::nullopt : std::optional<std::size_t>(max_depth);
    cfg.tree.min_samples_split = min_split;
    cfg.tree.min_samples_leaf = min_leaf;
    cfg.test_fraction = test_fraction;
  };
  {
    auto [cmd, a] = single("ml", "decision-tree reconstruction of confidence assignment", fa::Analysis::Ml);
    cmd->add_option("--max-depth", max_depth, "depth cap; 0 means unlimited");
    cmd->add_option("--test-fraction", test_fraction, "stratified test share")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--min-samples-split", min_split, "rows needed to split a node");
    cmd->add_option("--min-samples-leaf", min_leaf, "rows required in each child");
    cmd->callback([&, a] {
      action = [&, a] {
        auto cfg = base_config(common);
        cfg.analyses = {a};
        apply_tree(cfg);
        return emit(fa::run_audit(cfg), common, true);
      };
    });
  }

  // brightness
  std::string median_mode = "exact";
  {
    auto [cmd, a] = single("brightness", "brightness statistics per category and threshold inference",
                           fa::Analysis::Brightness);
    cmd->add_option("--median", median_mode, "exact or histogram (0.01 K bins, bounded memory)")
        ->check(CLI::IsMember({"exact", "histogram"}));
    cmd->callback([&, a] {
      action = [&, a] {
        auto cfg = base_config(common);
        cfg.analyses = {a};
        cfg.median = median_mode == "exact" ? fa::MedianMode::Exact : fa::MedianMode::Histogram;
        return emit(fa::run_audit(cfg), common, true);
      };
    });
  }

  // grid
  double cell_size = 10.0;
  std::string layer = "night_low";
  {
    auto* cmd = app.add_subcommand("grid", "spatial grid of totals and night low-confidence counts");
    add_common(cmd, common);
    cmd->add_option("--format,-f", common.format, "json, markdown, csv or geojson")
        ->check(CLI::IsMember({"json", "markdown", "md", "csv", "geojson"}));
    cmd->add_option("--cell-size", cell_size, "cell edge in degrees; must divide 180");
    cmd->add_option("--layer", layer, "csv layer: total or night_low")->check(CLI::IsMember({"total", "night_low"}));
    cmd->callback([&] {
      action = [&] {
        auto cfg = base_config(common);
        cfg.analyses = {fa::Analysis::Grid};
        cfg.grid_cell_size = cell_size;
        const auto rep = fa::run_audit(cfg);
        if (common.format == "csv" || common.format == "geojson") {
          if (!rep.grid.value) throw fa::AuditError(fa::ErrorCode::InvalidArgument, rep.grid.message);
          write_output(common.out, common.format == "csv" ? fa::grid_csv(*rep.grid.value, layer == "night_low")
                                                          : fa::grid_geojson(*rep.grid.value).dump(2) + "\n");
          return rep.exit_code();
        }
        return emit(rep, common, true);
      };
    });
  }

  // monthly
  {
    auto [cmd, a] = single("monthly", "calendar-month consistency table", fa::Analysis::Monthly);
    cmd->callback([&, a] {
      action = [&, a] {
        auto cfg = base_config(common);
        cfg.analyses = {a};
        return emit(fa::run_audit(cfg), common, true);
      };
    });
  }

  // bands
  double band_width = 10.0;
  std::uint64_t min_count = 100;
  {
    auto [cmd, a] = single("bands", "latitude-band consistency", fa::Analysis::Bands);
    cmd->add_option("--band-width", band_width, "band width in degrees; must divide 180");
    cmd->add_option("--min-count", min_count, "a band qualifies with strictly more fires than this");
    cmd->callback([&, a] {
      action = [&, a] {
        auto cfg = base_config(common);
        cfg.analyses = {a};
        cfg.band_width = band_width;
        cfg.band_min_count = min_count;
        return emit(fa::run_audit(cfg), common, true);
      };
    });
  }

  // audit
  std::vector<std::string> only;
  {
    auto* cmd = app.add_subcommand("audit", "every analysis over one shared scan");
    add_common(cmd, common);
    cmd->add_option("--format,-f", common.format, "json or markdown")->check(CLI::IsMember({"json", "markdown", "md"}));
    cmd->add_option("--only", only, "restrict to these analyses (qc contingency verify bootstrap ml brightness grid "
                                    "monthly bands)");
    cmd->add_option("--iterations", iterations, "bootstrap iterations");
    cmd->add_option("--sample-size", sample_size, "bootstrap draws per iteration");
    cmd->add_option("--max-depth", max_depth, "tree depth cap; 0 means unlimited");
    cmd->add_option("--test-fraction", test_fraction, "stratified test share")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--cell-size", cell_size, "grid cell edge in degrees");
    cmd->add_option("--band-width", band_width, "latitude band width in degrees");
    cmd->add_option("--min-count", min_count, "band qualification threshold");
    cmd->add_option("--median", median_mode, "exact or histogram")->check(CLI::IsMember({"exact", "histogram"}));
    cmd->add_option("--daynight", daynight, "day/night flag of the counted cell");
    cmd->add_option("--confidence", confidence, "confidence of the counted cell");
    cmd->add_option("--query", query, "predicate for the parsed-query method");
    cmd->add_option("--tree-json", tree_json, "also write the fitted tree as JSON");
    cmd->callback([&] {
      action = [&] {
        auto cfg = base_config(common);
        if (!only.empty()) {
          cfg.analyses.clear();
          for (const auto& name : only) {
            const auto an = fa::analysis_from(name);
            if (!an) throw fa::AuditError(fa::ErrorCode::InvalidArgument, "unknown analysis '" + name + "'");
            cfg.analyses.push_back(*an);
          }
        }
        cfg.bootstrap_iterations = iterations;
        cfg.bootstrap_sample_size = sample_size;
        apply_tree(cfg);
        apply_pair(cfg);
        cfg.grid_cell_size = cell_size;
        cfg.band_width = band_width;
        cfg.band_min_count = min_count;
        cfg.median = median_mode == "exact" ? fa::MedianMode::Exact : fa::MedianMode::Histogram;
        const auto rep = fa::run_audit(cfg);
        if (!tree_json.empty() && rep.ml.value) write_output(tree_json, fa::tree_to_json(rep.ml.value->tree).dump(2) + "\n");
        return emit(rep, common, false);
      };
    });
  }

  // synth
  std::string spec_path;
  std::optional<std::uint64_t> rows;
  std::optional<std::uint64_t> synth_seed;
  bool print_spec = false;
  {
    auto* cmd = app.add_subcommand("synth", "generate a synthetic FIRMS CSV from a generator spec");
    cmd->add_option("--spec", spec_path, "generator spec JSON (defaults apply to absent keys)");
    cmd->add_option("--rows", rows, "override the accepted row count");
    cmd->add_option("--seed", synth_seed, "override the master seed");
    cmd->add_option("--out,-o", common.out, "CSV output path; '-' writes standard output");
    cmd->add_flag("--print-spec", print_spec, "write the effective spec as JSON instead of data");
    cmd->callback([&] {
      action = [&] {
        fa::GeneratorSpec spec;
        if (!spec_path.empty()) {
          std::ifstream f(spec_path);
          if (!f) throw fa::AuditError(fa::ErrorCode::Io, "cannot open '" + spec_path + "'");
          nlohmann::json j;
          try {
            f >> j;
          } catch (const nlohmann::json::exception& e) {
            throw fa::AuditError(fa::ErrorCode::SpecInvalid, e.what());
          }
          spec = fa::spec_from_json(j);
        }
        if (rows) spec.n_accepted = *rows;
        if (synth_seed) spec.master_seed = *synth_seed;
        spec.validate();
        if (print_spec) {
          write_output(common.out, fa::spec_to_json(spec).dump(2) + "\n");
          return 0;
        }
        fa::GenerationStats stats;
        if (common.out == "-") {
          stats = fa::generate_dataset(spec, std::cout);
        } else {
          std::ofstream f(common.out, std::ios::binary);
          if (!f) throw fa::AuditError(fa::ErrorCode::Io, "cannot write '" + common.out + "'");
          stats = fa::generate_dataset(spec, f);
        }
        std::cerr << "accepted " << stats.accepted << ", rejected " << stats.rejected << "\n";
        return 0;
      };
    });
  }

  // reference
  {
    auto* cmd = app.add_subcommand("reference", "recompute statistics from the published 2023 counts");
    cmd->add_option("--out,-o", common.out, "output path");
    cmd->add_option("--format,-f", common.format, "json or markdown")->check(CLI::IsMember({"json", "markdown", "md"}));
    cmd->callback([&] {
      action = [&] {
        const auto rep = fa::reference::compare_with_printed();
        if (parse_format(common.format) == fa::OutputFormat::Json) {
          write_output(common.out, fa::reference::to_json(rep).dump(2) + "\n");
        } else {
          std::ostringstream os;
          fa::reference::render_markdown(os, rep);
          write_output(common.out, os.str());
        }
        return 0;
      };
    });
  }

  // fetch
  fa::firms::AreaRequest area;
  {
    auto* cmd = app.add_subcommand("fetch", "download an area CSV from FIRMS (key in $FIRMS_MAP_KEY)");
    cmd->add_option("--source", area.source, "dataset source, e.g. VIIRS_SNPP_SP");
    cmd->add_option("--area", area.area, "'world' or west,south,east,north");
    cmd->add_option("--days", area.day_range, "day range 1..10");
    cmd->add_option("--date", area.date, "start date YYYY-MM-DD");
    cmd->add_option("--out,-o", common.out, "CSV output path");
    cmd->callback([&] {
      action = [&]() -> int {
        const auto key = fa::firms::map_key_from_env();
        if (!key) {
          throw fa::AuditError(fa::ErrorCode::InvalidArgument,
                               std::string("set ") + fa::firms::kMapKeyVariable + " to a FIRMS map key");
        }
#ifdef FIRMSAUDIT_WITH_FETCH
        httplib::Client client(fa::firms::kHost);
        client.set_follow_location(true);
        client.set_read_timeout(300, 0);
        auto res = client.Get(fa::firms::area_path(area, *key));
        if (!res) throw fa::AuditError(fa::ErrorCode::Io, "request failed: " + httplib::to_string(res.error()));
        if (res->status != 200) {
          throw fa::AuditError(fa::ErrorCode::Io, "server answered HTTP " + std::to_string(res->status));
        }
        write_output(common.out, res->body);
        return 0;
#else
        throw fa::AuditError(fa::ErrorCode::InvalidArgument, "built without HTTPS support");
#endif
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return action ? action() : 0;
  } catch (const fa::AuditError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
