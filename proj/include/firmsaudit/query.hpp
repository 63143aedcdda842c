#pragma once

// A small predicate language over detection records:
//
//   query      := conjunction END
//   conjunction:= term ( "and" term )*
//   term       := "(" conjunction ")" | comparison
//   comparison := FIELD "==" literal
//   literal    := STRING | NUMBER
//
// Strings are single- or double-quoted. Text fields (satellite, instrument,
// confidence, version, daynight, acq_date) compare against strings; numeric
// fields compare against numbers. acq_time compares as an HHMM number.

#include <cctype>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "firmsaudit/error.hpp"
#include "firmsaudit/records.hpp"

namespace firmsaudit::query {

enum class TokenKind { Identifier, String, Number, Equals, And, LParen, RParen, End };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t offset;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto error = [&](const std::string& what) {
    throw AuditError(ErrorCode::PredicateParse, what + " at offset " + std::to_string(i));
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(' || c == ')') {
      out.push_back({c == '(' ? TokenKind::LParen : TokenKind::RParen, std::string(1, c), i});
      ++i;
    } else if (c == '=') {
      if (i + 1 >= src.size() || src[i + 1] != '=') error("expected '=='");
      out.push_back({TokenKind::Equals, "==", i});
      i += 2;
    } else if (c == '"' || c == '\'') {
      const std::size_t start = i++;
      std::string text;
      while (i < src.size() && src[i] != c) text += src[i++];
      if (i >= src.size()) {
        i = start;
        error("unterminated string");
      }
      ++i;
      out.push_back({TokenKind::String, std::move(text), start});
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      const std::size_t start = i++;
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '.' ||
                                ((src[i] == '-' || src[i] == '+') && (src[i - 1] == 'e' || src[i - 1] == 'E')))) {
        ++i;
      }
      out.push_back({TokenKind::Number, std::string(src.substr(start, i - start)), start});
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i;
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      std::string word(src.substr(start, i - start));
      out.push_back({word == "and" || word == "AND" ? TokenKind::And : TokenKind::Identifier, std::move(word), start});
    } else {
      error(std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({TokenKind::End, "", src.size()});
  return out;
}

/// One parsed `field == literal` comparison.
struct Comparison {
  Column field;
  std::variant<std::string, double> value;

  [[nodiscard]] bool matches(const FireDetection& r) const {
    if (const auto* s = std::get_if<std::string>(&value)) {
      switch (field) {
        case Column::Satellite: return r.satellite == *s;
        case Column::Instrument: return r.instrument == *s;
        case Column::Version: return r.version == *s;
        case Column::Confidence: return s->size() == 1 && (*s)[0] == to_char(r.confidence);
        case Column::DayNight: return s->size() == 1 && (*s)[0] == to_char(r.daynight);
        case Column::AcqDate: return format_date(r.acq_date) == *s;
        default: return false;
      }
    }
    const double v = std::get<double>(value);
    switch (field) {
      case Column::Latitude: return r.latitude == v;
      case Column::Longitude: return r.longitude == v;
      case Column::BrightTi4: return r.bright_ti4 == v;
      case Column::BrightTi5: return r.bright_ti5 && *r.bright_ti5 == v;
      case Column::Scan: return r.scan == v;
      case Column::Track: return r.track == v;
      case Column::Frp: return r.frp == v;
      case Column::AcqTime: return (r.acq_time / 60) * 100 + r.acq_time % 60 == v;
      default: return false;
    }
  }
};

/// A compiled conjunction; the empty conjunction matches every row.
class Predicate {
 public:
  explicit Predicate(std::vector<Comparison> terms) : terms_(std::move(terms)) {}

  [[nodiscard]] bool operator()(const FireDetection& r) const {
    for (const auto& t : terms_) {
      if (!t.matches(r)) return false;
    }
    return true;
  }

  [[nodiscard]] const std::vector<Comparison>& terms() const noexcept { return terms_; }

 private:
  std::vector<Comparison> terms_;
};

/// The (day/night, confidence) cell a predicate selects, when it is exactly
/// one equality on each of those two fields.
inline std::optional<std::pair<DayNight, Confidence>> cell_of(const Predicate& p) {
  std::optional<DayNight> d;
  std::optional<Confidence> c;
  if (p.terms().size() != 2) return std::nullopt;
  for (const auto& t : p.terms()) {
    const auto* s = std::get_if<std::string>(&t.value);
    if (s == nullptr) return std::nullopt;
    if (t.field == Column::DayNight && !d) {
      d = daynight_from(*s);
      if (!d) return std::nullopt;
    } else if (t.field == Column::Confidence && !c) {
      c = confidence_from(*s);
      if (!c) return std::nullopt;
    } else {
      return std::nullopt;
    }
  }
  return std::pair{*d, *c};
}

namespace detail {

inline bool is_text_field(Column c) {
  switch (c) {
    case Column::Satellite:
    case Column::Instrument:
    case Column::Version:
    case Column::Confidence:
    case Column::DayNight:
    case Column::AcqDate: return true;
    default: return false;
  }
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  std::vector<Comparison> parse() {
    std::vector<Comparison> out;
    conjunction(out);
    expect(TokenKind::End, "end of query");
    return out;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw AuditError(ErrorCode::PredicateParse, what + " at offset " + std::to_string(peek().offset));
  }

  void expect(TokenKind kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what);
    ++pos_;
  }

  void conjunction(std::vector<Comparison>& out) {
    term(out);
    while (peek().kind == TokenKind::And) {
      ++pos_;
      term(out);
    }
  }

  void term(std::vector<Comparison>& out) {
    if (peek().kind == TokenKind::LParen) {
      ++pos_;
      conjunction(out);
      expect(TokenKind::RParen, "')'");
      return;
    }
    out.push_back(comparison());
  }

  Comparison comparison() {
    if (peek().kind != TokenKind::Identifier) fail("expected field name");
    const Token& name = advance();
    std::optional<Column> field;
    for (std::size_t c = 0; c < kColumnCount; ++c) {
      if (kColumnNames[c] == name.text) field = static_cast<Column>(c);
    }
    if (!field) fail("unknown field '" + name.text + "'");
    expect(TokenKind::Equals, "'=='");
    const Token& lit = peek();
    if (is_text_field(*field)) {
      if (lit.kind != TokenKind::String) fail("field '" + name.text + "' needs a string literal");
      ++pos_;
      return {*field, lit.text};
    }
    if (lit.kind != TokenKind::Number) fail("field '" + name.text + "' needs a numeric literal");
    const auto v = parse_double(lit.text);
    if (!v) fail("malformed number '" + lit.text + "'");
    ++pos_;
    return {*field, *v};
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a predicate such as `daynight == "N" and confidence == "l"`.
/// Throws AuditError(PredicateParse) on malformed input.
inline Predicate parse(std::string_view text) { return Predicate(detail::Parser(tokenize(text)).parse()); }

}  // namespace firmsaudit::query
