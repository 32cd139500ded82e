#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "hof/catalog.hpp"
#include "hof/query.hpp"

namespace hof {

using RowId = std::uint32_t;
using Row = std::vector<Value>;
/// Value -> ascending row ids holding it.
using ValueIndex = std::unordered_map<Value, std::vector<RowId>>;

class Table {
 public:
  Table(RelationMeta meta, std::vector<std::size_t> indexed_columns);

  const RelationMeta& meta() const { return meta_; }
  std::size_t size() const { return rows_.size(); }
  const Row& row(RowId id) const { return rows_[id]; }
  const Value& at(RowId id, std::size_t column) const { return rows_[id][column]; }

  bool indexed(std::size_t column) const { return slot_of_[column] >= 0; }
  /// Rows with `column == value`; the column must be indexed.
  std::span<const RowId> lookup(std::size_t column, const Value& value) const;
  const ValueIndex& index(std::size_t column) const;
  const std::vector<std::size_t>& indexed_columns() const { return indexed_columns_; }
  /// Index computed from scratch over the current rows.
  ValueIndex rebuild_index(std::size_t column) const;

  std::optional<RowId> find_key(const Row& key_values) const;

  /// Appends a row; throws hof::Error on a type or key violation.
  RowId append(Row row);
  /// Overwrites one cell, keeping indices and the key map consistent.
  void set(RowId id, std::size_t column, Value value);

 private:
  Row key_of(const Row& row) const;

  RelationMeta meta_;
  std::vector<Row> rows_;
  std::vector<std::size_t> indexed_columns_;
  std::vector<int> slot_of_;
  std::vector<ValueIndex> indices_;
  std::map<Row, RowId> keys_;
};

/// Parses RFC-4180 CSV with a header naming every column of `meta` exactly once.
Table load_table(const RelationMeta& meta, std::string_view csv_text,
                 std::vector<std::size_t> indexed_columns = {});

/// Splits CSV text into records. Exposed for tests and the CLI.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

enum class UpdateKind { Update, Insert };

/// "column = column + amount"
struct Delta {
  Value amount;
  bool operator==(const Delta&) const = default;
};

using SetValue = std::variant<Value, Delta>;

struct UpdateRecord {
  std::uint64_t seq = 0;
  UpdateKind kind = UpdateKind::Update;
  std::string table;
  std::vector<std::pair<std::string, SetValue>> set_values;  // full row for inserts
  std::vector<std::pair<std::string, Value>> where_equalities;

  bool operator==(const UpdateRecord&) const = default;
};

class Store {
 public:
  explicit Store(SchemaCatalog catalog);

  /// Loads `<relation>.csv` for every relation from `dir`.
  static Store load_directory(SchemaCatalog catalog, const std::filesystem::path& dir);

  const SchemaCatalog& catalog() const { return catalog_; }
  const Table& table(std::size_t relation) const { return tables_[relation]; }
  std::size_t relation_of(std::string_view table_name) const;

  void load_table(std::size_t relation, std::string_view csv_text);
  /// Replaces a table's rows (tests and bindings).
  void set_rows(std::size_t relation, std::vector<Row> rows);

  /// Rows an update would touch, computed without mutating anything.
  std::vector<RowId> match(const UpdateRecord& u) const;
  /// Validates and applies `u`; returns the touched row ids. The store is left
  /// unchanged when validation fails.
  std::vector<RowId> apply_update(const UpdateRecord& u);

  /// Distinct tuples of `columns` over the join of `path` restricted by `fixed`.
  /// `base_relation` anchors the scan when the path is empty.
  std::set<std::vector<Value>> select_distinct(const std::vector<ColumnRef>& columns,
                                               const std::vector<ConstraintAtom>& fixed,
                                               const std::vector<JoinEdge>& path,
                                               std::size_t base_relation) const;

  RankingState evaluate_hof(const HofQuery& q) const;
  /// Number of distinct entities passing the predicate (unbounded by k).
  std::size_t count_groups(ColumnRef entity, const std::vector<ConstraintAtom>& predicate,
                           const std::vector<JoinEdge>& path) const;
  /// Fraction of joined rows satisfying `predicate`; throws on an empty join.
  double selectivity(const std::vector<ConstraintAtom>& predicate, const std::vector<JoinEdge>& path,
                     std::size_t base_relation) const;
  std::map<std::vector<Value>, std::size_t> instantiation_counts(const std::vector<ColumnRef>& columns,
                                                                 const std::vector<JoinEdge>& path,
                                                                 std::size_t base_relation) const;

  /// True when some tuple of the join over `path`, rooted at one of
  /// `row_images` standing in for rows of `relation`, satisfies `predicate`.
  bool any_selected(const std::vector<JoinEdge>& path, const std::vector<ConstraintAtom>& predicate,
                    std::size_t relation, std::span<const Row> row_images) const;

 private:
  SchemaCatalog catalog_;
  std::vector<Table> tables_;
};

/// Columns the store keeps value indices on: categorical, join and key columns.
std::vector<std::size_t> default_indexed_columns(const SchemaCatalog& catalog, std::size_t relation);

}  // namespace hof
