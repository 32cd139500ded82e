#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "hof/catalog.hpp"

namespace hof {

struct StaticScores {
  double selectivity = 0.0;   // fraction of joined rows passing the predicate
  double entropy_bits = 0.0;  // entropy of the predicate's binding columns

  bool operator==(const StaticScores&) const = default;
};

/// One Hall of Fame: the top-k entities of `entity` restricted by the
/// conjunctive `predicate` and ordered by `criterion` over the join of `join_path`.
struct HofQuery {
  std::string id;
  ColumnRef entity;
  std::vector<ConstraintAtom> predicate;  // empty means "true"
  RankingCriterion criterion;             // direction is never Both
  std::vector<JoinEdge> join_path;
  std::size_t k = 0;
  StaticScores scores;
  std::set<ColumnRef> referenced_columns;

  bool operator==(const HofQuery&) const = default;
};

/// Relations scanned by the query: the join path's, or the entity's alone.
std::set<std::size_t> query_relations(const HofQuery& q);

/// Fills referenced_columns and the content-derived id.
void finalize_query(const SchemaCatalog& catalog, HofQuery& q);

std::string render_sql(const SchemaCatalog& catalog, const HofQuery& q);

struct RankEntry {
  Value entity;
  double aggregate = 0.0;

  bool operator==(const RankEntry&) const = default;
};

/// Materialized top-k. Sorted per criterion direction, ties by ascending entity.
struct RankingState {
  std::vector<RankEntry> entries;

  bool operator==(const RankingState&) const = default;
};

/// Total order used by every ranking: true when `a` ranks above `b`.
bool ranks_before(const RankEntry& a, const RankEntry& b, Direction direction);

}  // namespace hof
