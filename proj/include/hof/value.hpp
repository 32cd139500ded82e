#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace hof {

enum class ColumnType { Integer, Real, Text };

/// A single cell. The alternative always matches the column's ColumnType.
using Value = std::variant<std::int64_t, double, std::string>;

std::string_view to_string(ColumnType type);
ColumnType parse_column_type(std::string_view name);

bool is_numeric(const Value& v);
bool is_numeric(ColumnType type);
double as_double(const Value& v);

/// Three-way comparison. Integers compare exactly, mixed numerics as doubles,
/// text lexicographically. Text against a number throws hof::Error.
int compare_values(const Value& a, const Value& b);

/// Parses a CSV cell. Throws std::invalid_argument on a type mismatch.
Value parse_value(std::string_view text, ColumnType type);

/// Converts an integer literal into a real column's representation.
/// Throws std::invalid_argument when the value cannot live in the column.
Value coerce(Value v, ColumnType type);

bool conforms(const Value& v, ColumnType type);

/// Plain rendering: text unquoted, reals in shortest round-trip form.
std::string format_value(const Value& v);
/// SQL-style literal: text single-quoted with quotes doubled.
std::string sql_literal(const Value& v);

}  // namespace hof
