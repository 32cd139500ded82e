#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "hof/catalog.hpp"
#include "hof/query.hpp"
#include "hof/scorer.hpp"
#include "hof/store.hpp"

namespace hof {

/// Column -> positions of the queries referencing it.
using ColumnIndex = std::map<ColumnRef, std::vector<std::size_t>>;

ColumnIndex build_column_index(const std::vector<HofQuery>& queries);

/// Join tree from a base table following the shortest join paths to every
/// reachable table. A base with several shortest paths to some table gets
/// one cover per combination.
struct SelectionQuery {
  std::size_t base = 0;
  std::vector<JoinEdge> cover;

  bool operator==(const SelectionQuery&) const = default;
};

std::map<std::size_t, std::vector<SelectionQuery>> build_selection_queries(const SchemaCatalog& catalog);

/// Columns an update writes; inserts write every column of the table.
std::vector<ColumnRef> written_columns(const SchemaCatalog& catalog, const UpdateRecord& u);

/// Ascending positions of queries touching any written column.
std::vector<std::size_t> column_filter(const SchemaCatalog& catalog, const UpdateRecord& u, const ColumnIndex& index);

struct RankChange {
  Value entity;
  std::size_t from_rank = 0;
  std::size_t to_rank = 0;

  bool operator==(const RankChange&) const = default;
};

/// Improvements only; entities missing from `before` start at k + 1.
std::vector<RankChange> diff_rankings(const RankingState& before, const RankingState& after, std::size_t k);

struct UpdateStats {
  std::uint64_t seq = 0;
  std::size_t column_candidates = 0;
  std::size_t row_candidates = 0;  // queries re-evaluated
  std::size_t changed = 0;         // rankings whose order changed
  std::size_t events = 0;
  double latency_ms = 0.0;
};

struct DetectResult {
  std::vector<RankEvent> events;  // by query id, then entity
  UpdateStats stats;
};

struct EngineOptions {
  bool filters = true;      // false re-evaluates every query on every update
  std::size_t workers = 1;  // threads for re-evaluation
};

/// Owns the store, the materialized rankings and the filter structures.
class Engine {
 public:
  Engine(Store store, std::vector<HofQuery> queries, EngineOptions options = {});

  /// Applies the update and returns the rank improvements it caused. Throws
  /// (leaving everything unchanged) when the update is invalid.
  DetectResult detect(const UpdateRecord& u);

  const Store& store() const { return store_; }
  const std::vector<HofQuery>& queries() const { return queries_; }
  const RankingState& ranking(std::size_t query) const { return rankings_.at(query); }
  const ColumnIndex& column_index() const { return column_index_; }
  const std::map<std::size_t, std::vector<SelectionQuery>>& selection_queries() const { return selection_; }
  /// Join tree used to extend rows of `relation` for the query's row filter.
  const std::vector<JoinEdge>& row_filter_path(std::size_t query, std::size_t relation) const;

  /// Queries among `candidates` that select one of the row images of `relation`.
  std::vector<std::size_t> row_filter(std::size_t relation, const std::vector<Row>& before_images,
                                      const std::vector<Row>& after_images,
                                      const std::vector<std::size_t>& candidates) const;

 private:
  template <class F>
  void for_each_parallel(std::size_t n, F&& f) const;

  Store store_;
  std::vector<HofQuery> queries_;
  EngineOptions options_;
  std::vector<RankingState> rankings_;
  ColumnIndex column_index_;
  std::map<std::size_t, std::vector<SelectionQuery>> selection_;
  std::vector<std::map<std::size_t, std::vector<JoinEdge>>> extension_;  // per query, per relation
};

}  // namespace hof
