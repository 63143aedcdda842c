#pragma once

// Reference confidence assignment and a seeded generator of FIRMS-format
// corpora built on it. Generated corpora embed the night-time rule (night
// detections are either rejected or labelled nominal/high, never low) and
// serve as ground truth for end-to-end checks of the audit pipeline.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <streambuf>
#include <string>
#include <vector>

#include "firmsaudit/error.hpp"
#include "firmsaudit/random.hpp"
#include "firmsaudit/records.hpp"
#include "json.hpp"

namespace firmsaudit {

struct InferredThresholds {
  double theta_min = 280.0;
  double theta_night = 295.0;
  double theta_high = 367.0;

  void validate() const {
    if (!(theta_min <= theta_night && theta_night < theta_high)) {
      throw AuditError(ErrorCode::SpecInvalid, "thresholds must satisfy theta_min <= theta_night < theta_high");
    }
  }
};

/// std::nullopt means the candidate is rejected (no detection is emitted).
using Assignment = std::optional<Confidence>;

/// Reference decision procedure:
///   brightness < theta_min                 -> rejected
///   night and brightness < theta_night     -> rejected
///   brightness >= theta_high               -> high
///   night                                  -> nominal
///   day                                    -> day_rule(brightness)
template <typename DayRule>
Assignment classify_inferred(double brightness, DayNight daynight, const InferredThresholds& t, DayRule&& day_rule) {
  if (brightness < t.theta_min) return std::nullopt;
  if (daynight == DayNight::Night && brightness < t.theta_night) return std::nullopt;
  if (brightness >= t.theta_high) return Confidence::High;
  if (daynight == DayNight::Night) return Confidence::Nominal;
  return day_rule(brightness);
}

/// Deterministic day rule: low below `low_below`, nominal otherwise.
struct BrightnessBandRule {
  double low_below = 320.0;
  Confidence operator()(double brightness) const {
    return brightness < low_below ? Confidence::Low : Confidence::Nominal;
  }
};

// ---------------------------------------------------------------------------
// Generator specification

/// Normal draw clamped into [floor, ceiling]; the ceiling acts as sensor
/// saturation.
struct BrightnessModel {
  double mean = 300.0;
  double sd = 20.0;
  double floor = 270.0;
  double ceiling = 367.0;
};

struct DayMarginals {
  double h = 0.0674;
  double n = 0.7723;
  double l = 0.1603;
};

struct LatLonBox {
  double lat_min = -70.0;
  double lat_max = 80.0;
  double lon_min = -180.0;
  double lon_max = 180.0;
};

struct GeneratorSpec {
  std::uint64_t n_accepted = 1000;
  /// Share of day rows among emitted rows.
  double day_fraction = 0.721;
  InferredThresholds thresholds;
  BrightnessModel night_brightness{300.0, 28.0, 270.0, 367.0};
  /// Day labels are drawn from these marginals first. A high label is emitted
  /// at the saturation value; nominal and low labels draw brightness from
  /// their own models, kept below theta_high. The default low model sits
  /// under theta_night: day-time low rows are the marginal candidates that
  /// night-time processing would reject outright.
  DayMarginals day_marginals;
  BrightnessModel day_nominal_brightness{345.0, 14.0, 285.0, 367.0};
  BrightnessModel day_low_brightness{289.0, 5.0, 280.0, 294.99};
  std::chrono::year_month_day date_start{std::chrono::year{2023}, std::chrono::month{1}, std::chrono::day{17}};
  std::chrono::year_month_day date_end{std::chrono::year{2024}, std::chrono::month{1}, std::chrono::day{17}};
  std::vector<LatLonBox> boxes{LatLonBox{}};
  std::vector<std::string> satellites{"N", "N20"};
  std::string instrument = "VIIRS";
  std::string version = "2.0NRT";
  std::uint64_t master_seed = 42;

  void validate() const {
    auto invalid = [](const std::string& what) { throw AuditError(ErrorCode::SpecInvalid, what); };
    thresholds.validate();
    if (!(day_fraction >= 0.0 && day_fraction <= 1.0)) invalid("day_fraction must lie in [0, 1]");
    const double p[] = {day_marginals.h, day_marginals.n, day_marginals.l};
    for (double v : p) {
      if (!(v >= 0.0)) invalid("day marginals must be non-negative");
    }
    if (std::abs(p[0] + p[1] + p[2] - 1.0) > 1e-9) invalid("day marginals must sum to 1");
    for (const auto* m : {&night_brightness, &day_nominal_brightness, &day_low_brightness}) {
      if (!(m->sd > 0.0) || !(m->floor <= m->ceiling)) invalid("brightness model needs sd > 0 and floor <= ceiling");
    }
    if (night_brightness.ceiling < thresholds.theta_night && day_fraction < 1.0) {
      invalid("night brightness model cannot reach theta_night");
    }
    for (const auto* m : {&day_nominal_brightness, &day_low_brightness}) {
      if (m->ceiling < thresholds.theta_min && day_fraction > 0.0) invalid("day brightness model cannot reach theta_min");
    }
    if (!date_start.ok() || !date_end.ok() ||
        std::chrono::sys_days(date_end) < std::chrono::sys_days(date_start)) {
      invalid("date range is empty or invalid");
    }
    if (boxes.empty()) invalid("at least one lat/lon box is required");
    for (const auto& b : boxes) {
      if (!(b.lat_min < b.lat_max && b.lon_min < b.lon_max && b.lat_min >= -90 && b.lat_max <= 90 &&
            b.lon_min >= -180 && b.lon_max <= 180)) {
        invalid("lat/lon box out of range or empty");
      }
    }
    if (satellites.empty()) invalid("satellite list is empty");
  }
};

namespace detail {
inline std::chrono::year_month_day date_from_json(const nlohmann::json& j) {
  const auto d = parse_date(j.get<std::string>());
  if (!d) throw AuditError(ErrorCode::SpecInvalid, "bad date '" + j.get<std::string>() + "'");
  return *d;
}

inline void read_model(const nlohmann::json& j, const char* key, BrightnessModel& m) {
  if (!j.contains(key)) return;
  const auto& o = j.at(key);
  m.mean = o.value("mean", m.mean);
  m.sd = o.value("sd", m.sd);
  m.floor = o.value("floor", m.floor);
  m.ceiling = o.value("ceiling", m.ceiling);
}

inline nlohmann::json model_json(const BrightnessModel& m) {
  return {{"mean", m.mean}, {"sd", m.sd}, {"floor", m.floor}, {"ceiling", m.ceiling}};
}
}  // namespace detail

/// Reads a spec; absent keys keep their defaults.
inline GeneratorSpec spec_from_json(const nlohmann::json& j) {
  GeneratorSpec s;
  try {
    s.n_accepted = j.value("n_accepted", s.n_accepted);
    s.day_fraction = j.value("day_fraction", s.day_fraction);
    s.master_seed = j.value("master_seed", s.master_seed);
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      s.thresholds.theta_min = t.value("theta_min", s.thresholds.theta_min);
      s.thresholds.theta_night = t.value("theta_night", s.thresholds.theta_night);
      s.thresholds.theta_high = t.value("theta_high", s.thresholds.theta_high);
    }
    detail::read_model(j, "night_brightness", s.night_brightness);
    detail::read_model(j, "day_nominal_brightness", s.day_nominal_brightness);
    detail::read_model(j, "day_low_brightness", s.day_low_brightness);
    if (j.contains("day_marginals")) {
      const auto& m = j.at("day_marginals");
      s.day_marginals.h = m.value("h", s.day_marginals.h);
      s.day_marginals.n = m.value("n", s.day_marginals.n);
      s.day_marginals.l = m.value("l", s.day_marginals.l);
    }
    if (j.contains("date_start")) s.date_start = detail::date_from_json(j.at("date_start"));
    if (j.contains("date_end")) s.date_end = detail::date_from_json(j.at("date_end"));
    if (j.contains("boxes")) {
      s.boxes.clear();
      for (const auto& b : j.at("boxes")) {
        s.boxes.push_back({b.at("lat_min").get<double>(), b.at("lat_max").get<double>(),
                           b.at("lon_min").get<double>(), b.at("lon_max").get<double>()});
      }
    }
    if (j.contains("satellites")) s.satellites = j.at("satellites").get<std::vector<std::string>>();
    s.instrument = j.value("instrument", s.instrument);
    s.version = j.value("version", s.version);
  } catch (const nlohmann::json::exception& e) {
    throw AuditError(ErrorCode::SpecInvalid, e.what());
  }
  s.validate();
  return s;
}

inline nlohmann::json spec_to_json(const GeneratorSpec& s) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& b : s.boxes) {
    boxes.push_back({{"lat_min", b.lat_min}, {"lat_max", b.lat_max}, {"lon_min", b.lon_min}, {"lon_max", b.lon_max}});
  }
  return {
      {"n_accepted", s.n_accepted},
      {"day_fraction", s.day_fraction},
      {"master_seed", s.master_seed},
      {"thresholds",
       {{"theta_min", s.thresholds.theta_min},
        {"theta_night", s.thresholds.theta_night},
        {"theta_high", s.thresholds.theta_high}}},
      {"night_brightness", detail::model_json(s.night_brightness)},
      {"day_nominal_brightness", detail::model_json(s.day_nominal_brightness)},
      {"day_low_brightness", detail::model_json(s.day_low_brightness)},
      {"day_marginals", {{"h", s.day_marginals.h}, {"n", s.day_marginals.n}, {"l", s.day_marginals.l}}},
      {"date_start", format_date(s.date_start)},
      {"date_end", format_date(s.date_end)},
      {"boxes", boxes},
      {"satellites", s.satellites},
      {"instrument", s.instrument},
      {"version", s.version},
  };
}

// ---------------------------------------------------------------------------
// Generation

struct GenerationStats {
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;  // candidates discarded by the reference rule
};

/// Emits records one at a time. Rows are produced in blocks of kBlockSize;
/// block b draws from stream derive_seed(master_seed, b), so any block can be
/// regenerated independently of the others.
class SyntheticGenerator {
 public:
  static constexpr std::uint64_t kBlockSize = 4096;
  static constexpr int kMaxConsecutiveRejections = 1'000'000;

  explicit SyntheticGenerator(GeneratorSpec spec) : spec_(std::move(spec)), rng_(spec_.master_seed, 0) {
    spec_.validate();
    day_span_ = (std::chrono::sys_days(spec_.date_end) - std::chrono::sys_days(spec_.date_start)).count() + 1;
  }

  std::optional<FireDetection> next() {
    if (stats_.accepted >= spec_.n_accepted) return std::nullopt;
    if (stats_.accepted % kBlockSize == 0) rng_ = Rng(spec_.master_seed, stats_.accepted / kBlockSize);
    FireDetection rec = draw();
    ++stats_.accepted;
    return rec;
  }

  [[nodiscard]] const GenerationStats& stats() const noexcept { return stats_; }
  [[nodiscard]] const GeneratorSpec& spec() const noexcept { return spec_; }

 private:
  /// Rounds to a decimal step (0.01, 1e-5, ...) and lands on the double
  /// nearest that decimal, so values print in their short form.
  static double round_to(double v, double step) {
    const double inv = std::round(1.0 / step);
    return std::round(v * inv) / inv;
  }

  double draw_brightness(const BrightnessModel& m, double cap) {
    const double raw = std::clamp(rng_.normal(m.mean, m.sd), m.floor, std::min(m.ceiling, cap));
    return std::min(round_to(raw, 0.01), std::min(m.ceiling, cap));
  }

  FireDetection draw() {
    FireDetection r;
    const bool night = rng_.uniform() >= spec_.day_fraction;
    r.daynight = night ? DayNight::Night : DayNight::Day;

    // Day rows draw their label first; brightness is conditional on it.
    Confidence day_label = Confidence::Nominal;
    if (!night) {
      const double u = rng_.uniform();
      const auto& m = spec_.day_marginals;
      day_label = u < m.h ? Confidence::High : (u < m.h + m.l ? Confidence::Low : Confidence::Nominal);
    }
    const auto& t = spec_.thresholds;
    const double below_high = round_to(t.theta_high, 0.01) - 0.01;

    for (int attempt = 0; attempt < kMaxConsecutiveRejections; ++attempt) {
      double b{};
      if (night) {
        b = draw_brightness(spec_.night_brightness, spec_.night_brightness.ceiling);
      } else if (day_label == Confidence::High) {
        b = std::max(round_to(t.theta_high, 0.01), t.theta_high);
      } else {
        const auto& model = day_label == Confidence::Low ? spec_.day_low_brightness : spec_.day_nominal_brightness;
        b = draw_brightness(model, below_high);
      }
      const auto assigned = classify_inferred(b, r.daynight, t, [&](double) { return day_label; });
      if (!assigned) {
        ++stats_.rejected;
        continue;
      }
      r.confidence = *assigned;
      r.bright_ti4 = b;
      fill_context(r);
      return r;
    }
    throw AuditError(ErrorCode::SpecInvalid, "brightness model keeps producing rejected candidates");
  }

  void fill_context(FireDetection& r) {
    const auto& box = spec_.boxes[rng_.below(spec_.boxes.size())];
    r.latitude = round_to(rng_.uniform(box.lat_min, box.lat_max), 1e-5);
    if (r.latitude >= box.lat_max) r.latitude = round_to(box.lat_max - 1e-5, 1e-5);
    r.longitude = round_to(rng_.uniform(box.lon_min, box.lon_max), 1e-5);
    if (r.longitude >= box.lon_max) r.longitude = round_to(box.lon_max - 1e-5, 1e-5);
    r.scan = round_to(rng_.uniform(0.32, 0.80), 0.01);
    r.track = round_to(rng_.uniform(0.36, 0.78), 0.01);
    r.bright_ti5 = round_to(r.bright_ti4 - rng_.uniform(10.0, 40.0), 0.01);
    const double heat = std::max(r.bright_ti4 - 290.0, 0.5);
    r.frp = round_to(std::exp(rng_.normal(std::log(heat / 5.0 + 0.5), 0.6)), 0.01);

    const auto day = static_cast<int>(rng_.below(static_cast<std::uint64_t>(day_span_)));
    r.acq_date = std::chrono::year_month_day(std::chrono::sys_days(spec_.date_start) + std::chrono::days(day));
    const auto minute = static_cast<int>(rng_.below(1440));
    r.acq_time = minute;
    char hhmm[8];
    std::snprintf(hhmm, sizeof hhmm, "%02d%02d", minute / 60, minute % 60);
    r.acq_time_text = hhmm;

    r.satellite = spec_.satellites[rng_.below(spec_.satellites.size())];
    r.instrument = spec_.instrument;
    r.version = spec_.version;
  }

  GeneratorSpec spec_;
  Rng rng_;
  long day_span_ = 1;
  GenerationStats stats_;
};

/// Generates the whole corpus into memory.
inline std::vector<FireDetection> generate_records(const GeneratorSpec& spec, GenerationStats* stats = nullptr) {
  SyntheticGenerator gen(spec);
  std::vector<FireDetection> out;
  out.reserve(spec.n_accepted);
  while (auto r = gen.next()) out.push_back(std::move(*r));
  if (stats) *stats = gen.stats();
  return out;
}

/// Writes the corpus as FIRMS CSV (header plus n_accepted rows).
inline GenerationStats generate_dataset(const GeneratorSpec& spec, std::ostream& out) {
  SyntheticGenerator gen(spec);
  out << csv_header() << '\n';
  while (auto r = gen.next()) out << format_record(*r) << '\n';
  if (!out) throw AuditError(ErrorCode::Io, "failed writing synthetic corpus");
  return gen.stats();
}

/// A read-only stream producing the CSV text of a corpus lazily, so very
/// large corpora can be streamed through the reader without touching disk.
class SyntheticCsvStreambuf : public std::streambuf {
 public:
  explicit SyntheticCsvStreambuf(GeneratorSpec spec) : gen_(std::move(spec)) {
    buffer_ = csv_header() + '\n';
    setg(buffer_.data(), buffer_.data(), buffer_.data() + buffer_.size());
  }

 protected:
  int_type underflow() override {
    if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
    buffer_.clear();
    for (int i = 0; i < 256; ++i) {
      auto r = gen_.next();
      if (!r) break;
      buffer_ += format_record(*r);
      buffer_ += '\n';
    }
    if (buffer_.empty()) return traits_type::eof();
    setg(buffer_.data(), buffer_.data(), buffer_.data() + buffer_.size());
    return traits_type::to_int_type(*gptr());
  }

 private:
  SyntheticGenerator gen_;
  std::string buffer_;
};

class SyntheticCsvStream : public std::istream {
 public:
  explicit SyntheticCsvStream(GeneratorSpec spec) : std::istream(nullptr), buf_(std::move(spec)) { rdbuf(&buf_); }

 private:
  SyntheticCsvStreambuf buf_;
};

}  // namespace firmsaudit
