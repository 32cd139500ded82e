#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hof/value.hpp"

namespace hof {

/// Resolved (relation, column) position inside a SchemaCatalog.
struct ColumnRef {
  std::size_t relation = 0;
  std::size_t column = 0;

  auto operator<=>(const ColumnRef&) const = default;
};

struct ColumnDef {
  std::string name;
  ColumnType type = ColumnType::Integer;

  bool operator==(const ColumnDef&) const = default;
};

struct RelationMeta {
  std::string name;
  std::vector<ColumnDef> columns;
  std::vector<std::size_t> entity_attrs;       // E-attributes, column positions
  std::vector<std::size_t> categorical_attrs;  // C-attributes, may overlap entity_attrs
  std::vector<std::size_t> key_columns;

  std::optional<std::size_t> find_column(std::string_view column) const;
  bool operator==(const RelationMeta&) const = default;
};

enum class Aggregation { Sum, Avg };
enum class Direction { Ascending, Descending, Both };

struct RankingCriterion {
  ColumnRef column;
  Aggregation aggregation = Aggregation::Sum;
  Direction direction = Direction::Descending;

  auto operator<=>(const RankingCriterion&) const = default;
};

/// Equi-join between two columns of different relations.
struct JoinEdge {
  ColumnRef from;
  ColumnRef to;

  auto operator<=>(const JoinEdge&) const = default;
};

enum class Comparator { Gt, Lt, Eq, Ne, Le, Ge };
enum class AtomKind { Binding, ConstComparison, InterAttribute };

struct ConstraintAtom {
  AtomKind kind = AtomKind::Binding;
  ColumnRef left;
  Comparator comparator = Comparator::Eq;
  std::variant<Value, ColumnRef> right;

  bool operator==(const ConstraintAtom&) const = default;
};

std::string_view to_string(Aggregation a);
std::string_view to_string(Direction d);
std::string_view to_string(Comparator c);
std::string_view to_string(AtomKind k);
Aggregation parse_aggregation(std::string_view s);
Direction parse_direction(std::string_view s);
Comparator parse_comparator(std::string_view s);
AtomKind parse_atom_kind(std::string_view s);

bool satisfies(int three_way, Comparator c);

class SchemaCatalog {
 public:
  std::vector<RelationMeta> relations;
  std::vector<JoinEdge> join_edges;
  std::vector<ConstraintAtom> user_constraints;
  /// Criteria as declared; "both" is kept here so the config round-trips.
  std::vector<RankingCriterion> declared_criteria;
  std::vector<ColumnRef> entity_attrs;
  std::vector<ColumnRef> categorical_attrs;
  /// Optional expert curation: relation sets a multi-relation query may join.
  std::vector<std::set<std::size_t>> join_allow_list;

  /// Declared criteria with "both" expanded into descending then ascending.
  std::vector<RankingCriterion> criteria() const;

  std::optional<std::size_t> find_relation(std::string_view name) const;
  /// Accepts "relation.column" or a bare column name that is unique in the schema.
  ColumnRef resolve(std::string_view reference) const;
  const ColumnDef& column(ColumnRef ref) const;
  std::string qualified_name(ColumnRef ref) const;

  bool operator==(const SchemaCatalog&) const = default;
};

/// Parses the JSON annotation config. Throws ParseError (with line) on
/// malformed text and hof::Error on semantic violations.
SchemaCatalog load_catalog(std::string_view config_text);
std::string serialize_catalog(const SchemaCatalog& catalog);

/// Renders an atom in SQL-like syntax, e.g. "team.league = 'NBA'".
std::string render_atom(const SchemaCatalog& catalog, const ConstraintAtom& atom);

/// Smallest edge set (at most max_joins edges) whose induced tree spans every
/// relation in `needed`. Among minimal trees the one with the lexicographically
/// smallest sorted edge-index list wins. Edges come back in catalog order.
/// A non-empty `usable` mask restricts the search to the flagged edges.
std::optional<std::vector<JoinEdge>> join_path(const SchemaCatalog& catalog,
                                               const std::set<std::size_t>& needed,
                                               std::size_t max_joins,
                                               const std::vector<bool>& usable = {});

/// Relations touched by a join path (empty for an empty path).
std::set<std::size_t> path_relations(const std::vector<JoinEdge>& path);

}  // namespace hof
