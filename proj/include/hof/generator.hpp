#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "hof/catalog.hpp"
#include "hof/query.hpp"
#include "hof/store.hpp"

namespace hof {

struct GeneratorConfig {
  std::size_t k = 20;
  std::size_t cnum = 3;  // max atoms per predicate, inclusive
  std::size_t jnum = 3;  // max joins per query
  /// Skip instantiations whose drop-one sub-predicate already fell below k.
  bool subset_pruning = true;

  /// Throws hof::Error when k is zero.
  void validate() const;
};

/// A categorical attribute to bind from the data, or a fixed user atom.
using ConstraintSource = std::variant<ColumnRef, ConstraintAtom>;

/// Categorical attributes in declaration order, then user constraints.
std::vector<ConstraintSource> constraint_sources(const SchemaCatalog& catalog);
std::set<std::size_t> source_relations(const ConstraintSource& source);

/// Ascending indices into constraint_sources().
using ConstraintCombination = std::vector<std::size_t>;

/// Join path for a relation set under the join budget and the optional
/// allow-list. A single relation needs no join.
std::optional<std::vector<JoinEdge>> budget_path(const SchemaCatalog& catalog, const std::set<std::size_t>& relations,
                                                 std::size_t jnum);

/// Every source subset of size <= cnum whose relations are joinable within
/// jnum, grown one source at a time from the empty set. Sorted by size, then
/// lexicographically.
std::vector<ConstraintCombination> get_combinations(const SchemaCatalog& catalog, const GeneratorConfig& cfg);

struct GenerationStats {
  std::size_t combinations = 0;
  std::size_t join_pruned = 0;         // (entity, combination[, criterion]) over budget
  std::size_t subset_pruned = 0;       // instantiations skipped via a failed sub-predicate
  std::size_t below_k = 0;             // instantiations evaluated with fewer than k groups
  std::size_t evaluated = 0;           // group counts computed
  std::size_t unpruned_candidates = 0; // queries an exhaustive instantiation would consider
  std::size_t queries = 0;
};

struct GenerationResult {
  std::vector<HofQuery> queries;  // sorted by id
  GenerationStats stats;
};

/// Memo of entropy per (binding columns, join path).
class EntropyCache {
 public:
  double get(const Store& store, const std::vector<ColumnRef>& columns, const std::vector<JoinEdge>& path,
             std::size_t base_relation);
  std::size_t size() const { return cache_.size(); }

 private:
  std::map<std::pair<std::vector<ColumnRef>, std::vector<JoinEdge>>, double> cache_;
};

/// Selectivity of the predicate over the query's join and entropy of its
/// binding columns (0 when it has none).
StaticScores compute_static_scores(const Store& store, const HofQuery& q, EntropyCache& cache);
StaticScores compute_static_scores(const Store& store, const HofQuery& q);

GenerationResult generate_queries(const Store& store, const GeneratorConfig& cfg);

}  // namespace hof
