#include "hof/generator.hpp"

#include <algorithm>
#include <string>

#include "hof/error.hpp"
#include "hof/scorer.hpp"

namespace hof {

void GeneratorConfig::validate() const {
  if (k < 1) throw Error("generator: k must be at least 1");
}

std::vector<ConstraintSource> constraint_sources(const SchemaCatalog& catalog) {
  std::vector<ConstraintSource> out;
  for (const auto& c : catalog.categorical_attrs) out.emplace_back(c);
  for (const auto& a : catalog.user_constraints) out.emplace_back(a);
  return out;
}

std::set<std::size_t> source_relations(const ConstraintSource& source) {
  if (const auto* col = std::get_if<ColumnRef>(&source)) return {col->relation};
  const auto& atom = std::get<ConstraintAtom>(source);
  std::set<std::size_t> rels{atom.left.relation};
  if (const auto* col = std::get_if<ColumnRef>(&atom.right)) rels.insert(col->relation);
  return rels;
}

std::optional<std::vector<JoinEdge>> budget_path(const SchemaCatalog& catalog, const std::set<std::size_t>& relations,
                                                 std::size_t jnum) {
  if (relations.size() <= 1) return std::vector<JoinEdge>{};
  if (catalog.join_allow_list.empty()) return join_path(catalog, relations, jnum);
  std::optional<std::vector<JoinEdge>> best;
  for (const auto& group : catalog.join_allow_list) {
    if (!std::includes(group.begin(), group.end(), relations.begin(), relations.end())) continue;
    std::vector<bool> usable(catalog.join_edges.size());
    for (std::size_t i = 0; i < usable.size(); ++i) {
      const auto& e = catalog.join_edges[i];
      usable[i] = group.count(e.from.relation) && group.count(e.to.relation);
    }
    auto path = join_path(catalog, relations, jnum, usable);
    if (path && (!best || path->size() < best->size())) best = std::move(path);
  }
  return best;
}

namespace {

std::set<std::size_t> combination_relations(const std::vector<ConstraintSource>& sources,
                                            const ConstraintCombination& comb) {
  std::set<std::size_t> rels;
  for (auto i : comb) rels.merge(source_relations(sources[i]));
  return rels;
}

bool is_subset(const ConstraintCombination& small, const ConstraintCombination& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

bool edges_within(const std::vector<JoinEdge>& inner, const std::vector<JoinEdge>& outer) {
  return std::all_of(inner.begin(), inner.end(),
                     [&](const JoinEdge& e) { return std::find(outer.begin(), outer.end(), e) != outer.end(); });
}

std::vector<ColumnRef> binding_columns(const std::vector<ConstraintAtom>& predicate) {
  std::vector<ColumnRef> cols;
  for (const auto& a : predicate)
    if (a.kind == AtomKind::Binding) cols.push_back(a.left);
  return cols;
}

}  // namespace

std::vector<ConstraintCombination> get_combinations(const SchemaCatalog& catalog, const GeneratorConfig& cfg) {
  const auto sources = constraint_sources(catalog);
  std::vector<ConstraintCombination> combos{{}};
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const std::size_t existing = combos.size();
    for (std::size_t i = 0; i < existing; ++i) {
      if (combos[i].size() + 1 > cfg.cnum) continue;
      ConstraintCombination grown = combos[i];
      grown.push_back(s);
      if (!budget_path(catalog, combination_relations(sources, grown), cfg.jnum)) continue;
      combos.push_back(std::move(grown));
    }
  }
  std::sort(combos.begin(), combos.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return combos;
}

double EntropyCache::get(const Store& store, const std::vector<ColumnRef>& columns, const std::vector<JoinEdge>& path,
                         std::size_t base_relation) {
  if (columns.empty()) return 0.0;
  auto key = std::make_pair(columns, path);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const auto counts = store.instantiation_counts(columns, path, base_relation);
  const double h = counts.empty() ? 0.0 : entropy(counts);
  cache_.emplace(std::move(key), h);
  return h;
}

StaticScores compute_static_scores(const Store& store, const HofQuery& q, EntropyCache& cache) {
  StaticScores s;
  s.selectivity = store.selectivity(q.predicate, q.join_path, q.entity.relation);
  s.entropy_bits = cache.get(store, binding_columns(q.predicate), q.join_path, q.entity.relation);
  return s;
}

StaticScores compute_static_scores(const Store& store, const HofQuery& q) {
  EntropyCache cache;
  return compute_static_scores(store, q, cache);
}

GenerationResult generate_queries(const Store& store, const GeneratorConfig& cfg) {
  cfg.validate();
  const auto& catalog = store.catalog();
  const auto sources = constraint_sources(catalog);
  const auto combos = get_combinations(catalog, cfg);
  const auto criteria = catalog.criteria();

  GenerationResult result;
  result.stats.combinations = combos.size();
  std::map<std::string, HofQuery> by_id;
  EntropyCache entropy_cache;

  auto distinct_count = [&](ColumnRef c) {
    const Table& t = store.table(c.relation);
    if (t.indexed(c.column)) return t.index(c.column).size();
    std::set<Value> seen;
    for (RowId r = 0; r < t.size(); ++r) seen.insert(t.at(r, c.column));
    return seen.size();
  };

  for (const auto& entity : catalog.entity_attrs) {
    std::vector<ConstraintCombination> pruned_comb;
    std::vector<std::pair<ConstraintCombination, std::size_t>> pruned_crit;
    // rendered predicate -> (path, group count) for every evaluated instantiation
    std::map<std::string, std::vector<std::pair<std::vector<JoinEdge>, std::size_t>>> memo;

    for (const auto& comb : combos) {
      if (std::any_of(pruned_comb.begin(), pruned_comb.end(), [&](const auto& p) { return is_subset(p, comb); }))
        continue;
      auto rels = combination_relations(sources, comb);
      rels.insert(entity.relation);
      if (!budget_path(catalog, rels, cfg.jnum)) {
        pruned_comb.push_back(comb);
        ++result.stats.join_pruned;
        continue;
      }

      std::map<std::vector<JoinEdge>, std::vector<std::size_t>> by_path;
      for (std::size_t c = 0; c < criteria.size(); ++c) {
        if (std::any_of(pruned_crit.begin(), pruned_crit.end(),
                        [&](const auto& p) { return p.second == c && is_subset(p.first, comb); }))
          continue;
        auto with_crit = rels;
        with_crit.insert(criteria[c].column.relation);
        auto path = budget_path(catalog, with_crit, cfg.jnum);
        if (!path) {
          pruned_crit.emplace_back(comb, c);
          ++result.stats.join_pruned;
          continue;
        }
        by_path[*path].push_back(c);
      }

      std::vector<ColumnRef> bind;
      std::vector<ConstraintAtom> fixed;
      std::size_t product = 1;
      for (auto i : comb) {
        if (const auto* col = std::get_if<ColumnRef>(&sources[i])) {
          bind.push_back(*col);
          product *= distinct_count(*col);
        } else {
          fixed.push_back(std::get<ConstraintAtom>(sources[i]));
        }
      }

      for (const auto& [path, crits] : by_path) {
        result.stats.unpruned_candidates += product * crits.size();
        for (const auto& tuple : store.select_distinct(bind, fixed, path, entity.relation)) {
          std::vector<ConstraintAtom> predicate;
          std::vector<std::string> rendered;
          std::size_t b = 0;
          for (auto i : comb) {
            if (const auto* col = std::get_if<ColumnRef>(&sources[i]))
              predicate.push_back({AtomKind::Binding, *col, Comparator::Eq, tuple[b++]});
            else
              predicate.push_back(std::get<ConstraintAtom>(sources[i]));
            rendered.push_back(render_atom(catalog, predicate.back()));
          }
          auto join_key = [&](std::size_t skip) {
            std::string key;
            for (std::size_t i = 0; i < rendered.size(); ++i)
              if (i != skip) key += rendered[i] + '\x1f';
            return key;
          };

          if (cfg.subset_pruning && predicate.size() > 1) {
            bool doomed = false;
            for (std::size_t drop = 0; drop < predicate.size() && !doomed; ++drop) {
              const auto it = memo.find(join_key(drop));
              if (it == memo.end()) continue;
              for (const auto& [sub_path, count] : it->second)
                if (count < cfg.k && edges_within(sub_path, path)) doomed = true;
            }
            if (doomed) {
              ++result.stats.subset_pruned;
              continue;
            }
          }

          const auto count = store.count_groups(entity, predicate, path);
          ++result.stats.evaluated;
          if (cfg.subset_pruning) memo[join_key(predicate.size())].emplace_back(path, count);
          if (count < cfg.k) {
            ++result.stats.below_k;
            continue;
          }

          HofQuery q;
          q.entity = entity;
          q.predicate = std::move(predicate);
          q.join_path = path;
          q.k = cfg.k;
          q.scores = compute_static_scores(store, q, entropy_cache);
          for (auto c : crits) {
            HofQuery out = q;
            out.criterion = criteria[c];
            finalize_query(catalog, out);
            by_id.emplace(out.id, std::move(out));
          }
        }
      }
    }
  }

  result.queries.reserve(by_id.size());
  for (auto& [id, q] : by_id) result.queries.push_back(std::move(q));
  result.stats.queries = result.queries.size();
  return result;
}

}  // namespace hof
