#include "hof/value.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "hof/error.hpp"

namespace hof {

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::Integer:
      return "integer";
    case ColumnType::Real:
      return "real";
    case ColumnType::Text:
      return "text";
  }
  return "?";
}

ColumnType parse_column_type(std::string_view name) {
  if (name == "integer") return ColumnType::Integer;
  if (name == "real") return ColumnType::Real;
  if (name == "text") return ColumnType::Text;
  throw Error("unknown column type '" + std::string(name) + "'");
}

bool is_numeric(const Value& v) { return !std::holds_alternative<std::string>(v); }

bool is_numeric(ColumnType type) { return type != ColumnType::Text; }

double as_double(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw Error("text value used where a number is required");
}

int compare_values(const Value& a, const Value& b) {
  const auto* ai = std::get_if<std::int64_t>(&a);
  const auto* bi = std::get_if<std::int64_t>(&b);
  if (ai && bi) return (*ai > *bi) - (*ai < *bi);
  const auto* as = std::get_if<std::string>(&a);
  const auto* bs = std::get_if<std::string>(&b);
  if (as && bs) {
    const int c = as->compare(*bs);
    return (c > 0) - (c < 0);
  }
  if (as || bs) throw Error("cannot compare text with a number");
  const double x = as_double(a);
  const double y = as_double(b);
  return (x > y) - (x < y);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Value parse_value(std::string_view text, ColumnType type) {
  if (type == ColumnType::Text) return std::string(text);
  const std::string_view t = trim(text);
  if (t.empty()) throw std::invalid_argument("empty numeric cell");
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  if (type == ColumnType::Integer) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last)
      throw std::invalid_argument("'" + std::string(text) + "' is not an integer");
    return out;
  }
  double out = 0;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out))
    throw std::invalid_argument("'" + std::string(text) + "' is not a real number");
  return out;
}

Value coerce(Value v, ColumnType type) {
  switch (type) {
    case ColumnType::Text:
      if (!std::holds_alternative<std::string>(v))
        throw std::invalid_argument("number given for a text column");
      return v;
    case ColumnType::Real:
      if (std::holds_alternative<std::string>(v))
        throw std::invalid_argument("text given for a real column");
      return as_double(v);
    case ColumnType::Integer:
      if (const auto* d = std::get_if<double>(&v)) {
        if (std::trunc(*d) != *d) throw std::invalid_argument("fractional value for an integer column");
        return static_cast<std::int64_t>(*d);
      }
      if (std::holds_alternative<std::string>(v))
        throw std::invalid_argument("text given for an integer column");
      return v;
  }
  return v;
}

bool conforms(const Value& v, ColumnType type) {
  switch (type) {
    case ColumnType::Integer:
      return std::holds_alternative<std::int64_t>(v);
    case ColumnType::Real:
      return std::holds_alternative<double>(v);
    case ColumnType::Text:
      return std::holds_alternative<std::string>(v);
  }
  return false;
}

std::string format_value(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, std::get<double>(v));
  return std::string(buf, ptr);
}

std::string sql_literal(const Value& v) {
  const auto* s = std::get_if<std::string>(&v);
  if (!s) return format_value(v);
  std::string out = "'";
  for (char c : *s) {
    if (c == '\'') out += '\'';
    out += c;
  }
  out += '\'';
  return out;
}

}  // namespace hof
