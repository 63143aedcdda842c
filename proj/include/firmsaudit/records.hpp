#pragma once

// FIRMS VIIRS active-fire CSV ingestion.
//
// Rows are parsed into immutable FireDetection values. Syntactic problems
// (bad enum tokens, unparseable numbers, impossible dates) are parse errors;
// geographic and brightness range violations are not, they are left for QC.

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <variant>
#include <vector>

#include "firmsaudit/error.hpp"

namespace firmsaudit {

/// Confidence classes. The numeric order (h < l < n) is lexicographic on the
/// FIRMS tokens and is used for every table and tie-break in the toolkit.
enum class Confidence : std::uint8_t { High = 0, Low = 1, Nominal = 2 };
inline constexpr std::array<Confidence, 3> kAllConfidences{Confidence::High, Confidence::Low,
                                                           Confidence::Nominal};

enum class DayNight : std::uint8_t { Day = 0, Night = 1 };
inline constexpr std::array<DayNight, 2> kAllDayNight{DayNight::Day, DayNight::Night};

inline constexpr char to_char(Confidence c) {
  switch (c) {
    case Confidence::High: return 'h';
    case Confidence::Low: return 'l';
    case Confidence::Nominal: return 'n';
  }
  return '?';
}

inline constexpr char to_char(DayNight d) { return d == DayNight::Night ? 'N' : 'D'; }

inline constexpr std::size_t index_of(Confidence c) { return static_cast<std::size_t>(c); }
inline constexpr std::size_t index_of(DayNight d) { return static_cast<std::size_t>(d); }

inline std::optional<Confidence> confidence_from(std::string_view s) {
  if (s == "h") return Confidence::High;
  if (s == "l") return Confidence::Low;
  if (s == "n") return Confidence::Nominal;
  return std::nullopt;
}

inline std::optional<DayNight> daynight_from(std::string_view s) {
  if (s == "D") return DayNight::Day;
  if (s == "N") return DayNight::Night;
  return std::nullopt;
}

struct FireDetection {
  double latitude{};
  double longitude{};
  double bright_ti4{};  // kelvin, channel I-4
  std::optional<double> bright_ti5;
  double scan{};   // km
  double track{};  // km
  std::chrono::year_month_day acq_date{};
  int acq_time{};  // minutes of day, UTC
  std::string acq_time_text;  // as read, e.g. "0130"
  std::string satellite;
  std::string instrument;
  Confidence confidence{Confidence::Nominal};
  std::string version;
  double frp{};  // MW
  DayNight daynight{DayNight::Day};

  [[nodiscard]] bool is_night() const noexcept { return daynight == DayNight::Night; }
  [[nodiscard]] unsigned month() const noexcept { return static_cast<unsigned>(acq_date.month()); }
};

// ---------------------------------------------------------------------------
// Column layout

enum class Column : std::uint8_t {
  Latitude,
  Longitude,
  BrightTi4,
  Scan,
  Track,
  AcqDate,
  AcqTime,
  Satellite,
  Instrument,
  Confidence,
  Version,
  BrightTi5,
  Frp,
  DayNight,
};
inline constexpr std::size_t kColumnCount = 14;

/// Canonical FIRMS VIIRS column order, also used when writing CSV.
inline constexpr std::array<std::string_view, kColumnCount> kColumnNames{
    "latitude", "longitude", "bright_ti4", "scan",    "track",      "acq_date", "acq_time",
    "satellite", "instrument", "confidence", "version", "bright_ti5", "frp",      "daynight"};

inline constexpr std::string_view column_name(Column c) { return kColumnNames[static_cast<std::size_t>(c)]; }

inline constexpr bool is_mandatory(Column c) { return c != Column::BrightTi5; }

/// Resolves header names to field positions once per file.
class HeaderMap {
 public:
  HeaderMap() { positions_.fill(kAbsent); }

  explicit HeaderMap(std::span<const std::string_view> header) : HeaderMap() {
    for (std::size_t i = 0; i < header.size(); ++i) {
      std::string_view name = header[i];
      while (!name.empty() && (name.back() == ' ' || name.back() == '\r')) name.remove_suffix(1);
      while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
      for (std::size_t c = 0; c < kColumnCount; ++c) {
        if (kColumnNames[c] == name && positions_[c] == kAbsent) positions_[c] = i;
      }
    }
  }

  [[nodiscard]] std::optional<std::size_t> position(Column c) const {
    const auto p = positions_[static_cast<std::size_t>(c)];
    if (p == kAbsent) return std::nullopt;
    return p;
  }

  /// First mandatory column absent from the header, if any.
  [[nodiscard]] std::optional<Column> first_missing_mandatory() const {
    for (std::size_t c = 0; c < kColumnCount; ++c) {
      if (is_mandatory(static_cast<Column>(c)) && positions_[c] == kAbsent) return static_cast<Column>(c);
    }
    return std::nullopt;
  }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::array<std::size_t, kColumnCount> positions_{};
};

// ---------------------------------------------------------------------------
// Parse errors

enum class ParseErrorKind : std::uint8_t {
  MissingColumn,
  MissingValue,
  UnparseableNumber,
  InvalidConfidence,
  InvalidDayNight,
  InvalidDate,
  InvalidTime,
  InvalidSatellite,
  OutOfDomain,
};

inline std::string_view to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::MissingColumn: return "MissingColumn";
    case ParseErrorKind::MissingValue: return "MissingValue";
    case ParseErrorKind::UnparseableNumber: return "UnparseableNumber";
    case ParseErrorKind::InvalidConfidence: return "InvalidConfidence";
    case ParseErrorKind::InvalidDayNight: return "InvalidDayNight";
    case ParseErrorKind::InvalidDate: return "InvalidDate";
    case ParseErrorKind::InvalidTime: return "InvalidTime";
    case ParseErrorKind::InvalidSatellite: return "InvalidSatellite";
    case ParseErrorKind::OutOfDomain: return "OutOfDomain";
  }
  return "Unknown";
}

struct ParseError {
  ParseErrorKind kind{};
  std::string column;
  std::string raw;

  [[nodiscard]] std::string describe() const {
    return std::string(to_string(kind)) + " in column '" + column + "' (value '" + raw + "')";
  }
};

struct ParseOptions {
  /// Accepted satellite tokens; an empty set accepts anything.
  std::set<std::string, std::less<>> satellites{"N", "1", "N20", "NPP"};
};

using ParseResult = std::variant<FireDetection, ParseError>;

// ---------------------------------------------------------------------------
// Field-level helpers

/// Splits one CSV line on commas. FIRMS extracts carry no quoting, so none is
/// interpreted. A trailing carriage return is dropped.
inline void split_csv_line(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::chrono::year_month_day> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y{};
  unsigned m{}, d{};
  auto ok = [](std::string_view part, auto& v) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    return ec == std::errc{} && ptr == part.data() + part.size();
  };
  if (!ok(s.substr(0, 4), y) || !ok(s.substr(5, 2), m) || !ok(s.substr(8, 2), d)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

/// HHMM text (1 to 4 digits, leading zeros optional) to minutes of day.
inline std::optional<int> parse_hhmm(std::string_view s) {
  if (s.empty() || s.size() > 4) return std::nullopt;
  int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) return std::nullopt;
  const int hours = v / 100;
  const int minutes = v % 100;
  if (hours > 23 || minutes > 59) return std::nullopt;
  return hours * 60 + minutes;
}

inline std::string format_date(const std::chrono::year_month_day& d) {
  char buf[16];
  const int y = static_cast<int>(d.year());
  const unsigned m = static_cast<unsigned>(d.month());
  const unsigned dd = static_cast<unsigned>(d.day());
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, dd);
  return buf;
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Row parsing

inline ParseResult parse_record(std::span<const std::string_view> fields, const HeaderMap& header,
                                const ParseOptions& options = {}) {
  auto fail = [](ParseErrorKind kind, Column c, std::string_view raw) -> ParseResult {
    return ParseError{kind, std::string(column_name(c)), std::string(raw)};
  };

  std::array<std::string_view, kColumnCount> cell{};
  std::array<bool, kColumnCount> present{};
  for (std::size_t c = 0; c < kColumnCount; ++c) {
    const auto col = static_cast<Column>(c);
    const auto pos = header.position(col);
    if (!pos || *pos >= fields.size()) {
      if (is_mandatory(col)) return fail(ParseErrorKind::MissingColumn, col, "");
      continue;
    }
    std::string_view v = fields[*pos];
    while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
    while (!v.empty() && v.back() == ' ') v.remove_suffix(1);
    if (v.empty()) {
      if (is_mandatory(col)) return fail(ParseErrorKind::MissingValue, col, v);
      continue;
    }
    cell[c] = v;
    present[c] = true;
  }

  FireDetection rec;
  auto number = [&](Column c, double& out) -> std::optional<ParseResult> {
    const auto v = parse_double(cell[static_cast<std::size_t>(c)]);
    if (!v) return fail(ParseErrorKind::UnparseableNumber, c, cell[static_cast<std::size_t>(c)]);
    out = *v;
    return std::nullopt;
  };

  if (auto e = number(Column::Latitude, rec.latitude)) return *e;
  if (auto e = number(Column::Longitude, rec.longitude)) return *e;
  if (auto e = number(Column::BrightTi4, rec.bright_ti4)) return *e;
  if (auto e = number(Column::Scan, rec.scan)) return *e;
  if (auto e = number(Column::Track, rec.track)) return *e;
  if (auto e = number(Column::Frp, rec.frp)) return *e;
  if (present[static_cast<std::size_t>(Column::BrightTi5)]) {
    double t5{};
    if (auto e = number(Column::BrightTi5, t5)) return *e;
    rec.bright_ti5 = t5;
  }

  const auto& date_text = cell[static_cast<std::size_t>(Column::AcqDate)];
  const auto date = parse_date(date_text);
  if (!date) return fail(ParseErrorKind::InvalidDate, Column::AcqDate, date_text);
  rec.acq_date = *date;

  const auto& time_text = cell[static_cast<std::size_t>(Column::AcqTime)];
  const auto minutes = parse_hhmm(time_text);
  if (!minutes) return fail(ParseErrorKind::InvalidTime, Column::AcqTime, time_text);
  rec.acq_time = *minutes;
  rec.acq_time_text = std::string(time_text);

  const auto& conf_text = cell[static_cast<std::size_t>(Column::Confidence)];
  const auto conf = confidence_from(conf_text);
  if (!conf) return fail(ParseErrorKind::InvalidConfidence, Column::Confidence, conf_text);
  rec.confidence = *conf;

  const auto& dn_text = cell[static_cast<std::size_t>(Column::DayNight)];
  const auto dn = daynight_from(dn_text);
  if (!dn) return fail(ParseErrorKind::InvalidDayNight, Column::DayNight, dn_text);
  rec.daynight = *dn;

  const auto& sat_text = cell[static_cast<std::size_t>(Column::Satellite)];
  if (!options.satellites.empty() && !options.satellites.contains(sat_text)) {
    return fail(ParseErrorKind::InvalidSatellite, Column::Satellite, sat_text);
  }
  rec.satellite = std::string(sat_text);
  rec.instrument = std::string(cell[static_cast<std::size_t>(Column::Instrument)]);
  rec.version = std::string(cell[static_cast<std::size_t>(Column::Version)]);

  if (!(rec.bright_ti4 > 0)) return fail(ParseErrorKind::OutOfDomain, Column::BrightTi4, cell[2]);
  if (!(rec.scan > 0)) return fail(ParseErrorKind::OutOfDomain, Column::Scan, cell[3]);
  if (!(rec.track > 0)) return fail(ParseErrorKind::OutOfDomain, Column::Track, cell[4]);
  if (!(rec.frp >= 0)) return fail(ParseErrorKind::OutOfDomain, Column::Frp, cell[12]);

  return rec;
}

// ---------------------------------------------------------------------------
// Writing

inline std::string csv_header() {
  std::string out;
  for (std::size_t c = 0; c < kColumnCount; ++c) {
    if (c) out += ',';
    out += kColumnNames[c];
  }
  return out;
}

/// One CSV row in canonical column order (no trailing newline).
inline std::string format_record(const FireDetection& r) {
  std::string out;
  out.reserve(128);
  auto add = [&out](std::string_view s) {
    if (!out.empty()) out += ',';
    out += s;
  };
  add(format_double(r.latitude));
  add(format_double(r.longitude));
  add(format_double(r.bright_ti4));
  add(format_double(r.scan));
  add(format_double(r.track));
  add(format_date(r.acq_date));
  add(r.acq_time_text);
  add(r.satellite);
  add(r.instrument);
  add(std::string(1, to_char(r.confidence)));
  add(r.version);
  out += ',';
  if (r.bright_ti5) out += format_double(*r.bright_ti5);
  add(format_double(r.frp));
  add(std::string(1, to_char(r.daynight)));
  return out;
}

// ---------------------------------------------------------------------------
// Streaming reader

enum class ErrorPolicy { Strict, SkipAndCount };

struct SkipCounts {
  std::map<ParseErrorKind, std::uint64_t> by_kind;

  [[nodiscard]] std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& [_, n] : by_kind) t += n;
    return t;
  }
  [[nodiscard]] std::uint64_t count(ParseErrorKind k) const {
    const auto it = by_kind.find(k);
    return it == by_kind.end() ? 0 : it->second;
  }
  void merge(const SkipCounts& other) {
    for (const auto& [k, n] : other.by_kind) by_kind[k] += n;
  }
};

/// Yields records in file order. Row numbers are 1-based over data rows (the
/// header is row 0).
class DatasetReader {
 public:
  DatasetReader(std::istream& in, ErrorPolicy policy, ParseOptions options = {})
      : in_(&in), policy_(policy), options_(std::move(options)) {
    read_header();
  }

  DatasetReader(std::unique_ptr<std::istream> owned, ErrorPolicy policy, ParseOptions options = {})
      : owned_(std::move(owned)), in_(owned_.get()), policy_(policy), options_(std::move(options)) {
    read_header();
  }

  /// Next valid record; std::nullopt at end of input. In strict mode the
  /// first bad row throws AuditError(Parse) naming the row.
  std::optional<FireDetection> next() {
    while (std::getline(*in_, line_)) {
      if (line_.empty() || line_ == "\r") continue;
      ++row_;
      split_csv_line(line_, fields_);
      auto result = parse_record(fields_, header_, options_);
      if (auto* rec = std::get_if<FireDetection>(&result)) return std::move(*rec);
      const auto& err = std::get<ParseError>(result);
      if (policy_ == ErrorPolicy::Strict) {
        throw AuditError(ErrorCode::Parse, "row " + std::to_string(row_) + ": " + err.describe());
      }
      ++skipped_.by_kind[err.kind];
    }
    if (in_->bad()) throw AuditError(ErrorCode::Io, "read failure after row " + std::to_string(row_));
    return std::nullopt;
  }

  template <typename Fn>
  void for_each(Fn&& fn) {
    while (auto rec = next()) fn(*rec);
  }

  [[nodiscard]] const SkipCounts& skipped() const noexcept { return skipped_; }
  /// Data rows consumed so far, including skipped ones.
  [[nodiscard]] std::uint64_t rows_read() const noexcept { return row_; }
  [[nodiscard]] const HeaderMap& header() const noexcept { return header_; }

 private:
  void read_header() {
    if (!std::getline(*in_, line_)) throw AuditError(ErrorCode::Io, "input has no header row");
    split_csv_line(line_, fields_);
    header_ = HeaderMap(fields_);
    if (auto missing = header_.first_missing_mandatory()) {
      throw AuditError(ErrorCode::MissingColumn, "header lacks column '" + std::string(column_name(*missing)) + "'");
    }
  }

  std::unique_ptr<std::istream> owned_;
  std::istream* in_;
  ErrorPolicy policy_;
  ParseOptions options_;
  HeaderMap header_;
  std::string line_;
  std::vector<std::string_view> fields_;
  std::uint64_t row_ = 0;
  SkipCounts skipped_;
};

inline DatasetReader open_dataset(const std::filesystem::path& path, ErrorPolicy policy, ParseOptions options = {}) {
  auto file = std::make_unique<std::ifstream>(path);
  if (!*file) throw AuditError(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return DatasetReader(std::move(file), policy, std::move(options));
}

// ---------------------------------------------------------------------------
// Derived fields

struct GridIndex {
  std::size_t row{};
  std::size_t col{};
  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

struct DerivedFields {
  unsigned month{};
  bool is_night{};
  GridIndex grid_cell;
  std::size_t lat_band{};
};

/// Number of bins of width `step` over a span of `extent` degrees, or 0 if the
/// width does not divide the span evenly.
inline std::size_t bins_for(double extent, double step) {
  if (!(step > 0) || step > extent) return 0;
  const double n = extent / step;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * rounded) return 0;
  return static_cast<std::size_t>(rounded);
}

/// floor((value - lower) / step) clamped into [0, bins-1]; the upper edge maps
/// to the last bin.
inline std::size_t bin_index(double value, double lower, double step, std::size_t bins) {
  const double pos = std::floor((value - lower) / step);
  if (!(pos > 0)) return 0;
  const auto idx = static_cast<std::size_t>(pos);
  return idx >= bins ? bins - 1 : idx;
}

inline DerivedFields derive_fields(const FireDetection& rec, double grid_cell_size, double band_width) {
  const std::size_t rows = bins_for(180.0, grid_cell_size);
  const std::size_t cols = bins_for(360.0, grid_cell_size);
  const std::size_t bands = bins_for(180.0, band_width);
  DerivedFields d;
  d.month = rec.month();
  d.is_night = rec.is_night();
  d.grid_cell.row = rows ? bin_index(rec.latitude, -90.0, grid_cell_size, rows) : 0;
  d.grid_cell.col = cols ? bin_index(rec.longitude, -180.0, grid_cell_size, cols) : 0;
  d.lat_band = bands ? bin_index(rec.latitude, -90.0, band_width, bands) : 0;
  return d;
}

}  // namespace firmsaudit
