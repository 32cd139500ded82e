#pragma once

// Shared fixtures and brute-force oracles for the test suites. The oracles
// deliberately avoid the store's join machinery: they enumerate the full
// cross product of the involved tables and filter it.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hof/catalog.hpp"
#include "hof/error.hpp"
#include "hof/query.hpp"
#include "hof/store.hpp"

namespace testing_support {

inline std::filesystem::path source_dir() { return HOF_SOURCE_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline hof::SchemaCatalog billionaires_catalog() {
  return hof::load_catalog(slurp(source_dir() / "data/billionaires/catalog.json"));
}

inline hof::Store billionaires_store() {
  return hof::Store::load_directory(billionaires_catalog(), source_dir() / "data/billionaires");
}

// ---------------------------------------------------------------- brute force

using Combo = std::vector<hof::RowId>;  // one row per relation, in `relations` order

/// Every row combination of `relations` that agrees on all `edges`.
inline std::vector<Combo> cross_join(const hof::Store& store, const std::vector<std::size_t>& relations,
                                     const std::vector<hof::JoinEdge>& edges) {
  std::vector<Combo> out;
  Combo cur(relations.size());
  auto pos = [&](std::size_t rel) {
    return static_cast<std::size_t>(std::find(relations.begin(), relations.end(), rel) - relations.begin());
  };
  std::function<void(std::size_t)> rec = [&](std::size_t depth) {
    if (depth == relations.size()) {
      for (const auto& e : edges) {
        const auto& a = store.table(e.from.relation).at(cur[pos(e.from.relation)], e.from.column);
        const auto& b = store.table(e.to.relation).at(cur[pos(e.to.relation)], e.to.column);
        if (hof::compare_values(a, b) != 0) return;
      }
      out.push_back(cur);
      return;
    }
    for (hof::RowId r = 0; r < store.table(relations[depth]).size(); ++r) {
      cur[depth] = r;
      rec(depth + 1);
    }
  };
  rec(0);
  return out;
}

inline std::vector<std::size_t> relations_of(const hof::HofQuery& q) {
  const auto s = hof::query_relations(q);
  return {s.begin(), s.end()};
}

inline const hof::Value& cell(const hof::Store& store, const std::vector<std::size_t>& relations, const Combo& c,
                              hof::ColumnRef ref) {
  const auto i = static_cast<std::size_t>(std::find(relations.begin(), relations.end(), ref.relation) - relations.begin());
  if (i == relations.size()) throw hof::Error("oracle: column outside the join");
  return store.table(ref.relation).at(c[i], ref.column);
}

inline bool oracle_satisfies(const hof::Store& store, const std::vector<std::size_t>& relations, const Combo& c,
                             const std::vector<hof::ConstraintAtom>& predicate) {
  for (const auto& a : predicate) {
    const auto& left = cell(store, relations, c, a.left);
    const hof::Value right = std::holds_alternative<hof::ColumnRef>(a.right)
                                 ? cell(store, relations, c, std::get<hof::ColumnRef>(a.right))
                                 : std::get<hof::Value>(a.right);
    if (!hof::satisfies(hof::compare_values(left, right), a.comparator)) return false;
  }
  return true;
}

/// Full join, filter, group, sort, truncate.
inline hof::RankingState oracle_evaluate(const hof::Store& store, const hof::HofQuery& q) {
  const auto rels = relations_of(q);
  std::map<hof::Value, std::pair<double, std::size_t>> groups;
  for (const auto& c : cross_join(store, rels, q.join_path)) {
    if (!oracle_satisfies(store, rels, c, q.predicate)) continue;
    auto& g = groups[cell(store, rels, c, q.entity)];
    g.first += hof::as_double(cell(store, rels, c, q.criterion.column));
    ++g.second;
  }
  hof::RankingState s;
  for (const auto& [e, g] : groups)
    s.entries.push_back({e, q.criterion.aggregation == hof::Aggregation::Sum ? g.first : g.first / g.second});
  std::sort(s.entries.begin(), s.entries.end(), [&](const hof::RankEntry& a, const hof::RankEntry& b) {
    if (a.aggregate != b.aggregate)
      return q.criterion.direction == hof::Direction::Ascending ? a.aggregate < b.aggregate : a.aggregate > b.aggregate;
    return a.entity < b.entity;
  });
  if (s.entries.size() > q.k) s.entries.resize(q.k);
  return s;
}

inline std::size_t oracle_group_count(const hof::Store& store, const hof::HofQuery& q) {
  const auto rels = relations_of(q);
  std::set<hof::Value> seen;
  for (const auto& c : cross_join(store, rels, q.join_path))
    if (oracle_satisfies(store, rels, c, q.predicate)) seen.insert(cell(store, rels, c, q.entity));
  return seen.size();
}

/// Smallest edge subset (ties: lexicographically smallest index list) forming
/// a tree that spans `needed`; exhaustive over all subsets.
inline std::optional<std::vector<hof::JoinEdge>> oracle_join_path(const hof::SchemaCatalog& cat,
                                                                  const std::set<std::size_t>& needed,
                                                                  std::size_t max_joins) {
  if (needed.size() <= 1) return std::vector<hof::JoinEdge>{};
  const std::size_t m = cat.join_edges.size();
  std::optional<std::vector<std::size_t>> best;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1) idx.push_back(i);
    if (idx.size() > max_joins) continue;
    std::set<std::size_t> nodes;
    std::map<std::size_t, std::size_t> parent;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      if (!parent.count(x)) parent[x] = x;
      return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    bool cyclic = false;
    for (auto i : idx) {
      const auto a = cat.join_edges[i].from.relation, b = cat.join_edges[i].to.relation;
      nodes.insert(a);
      nodes.insert(b);
      const auto ra = find(a), rb = find(b);
      if (ra == rb) cyclic = true;
      parent[ra] = rb;
    }
    if (cyclic) continue;
    if (!std::includes(nodes.begin(), nodes.end(), needed.begin(), needed.end())) continue;
    std::set<std::size_t> roots;
    for (auto n : nodes) roots.insert(find(n));
    if (roots.size() != 1) continue;
    if (!best || idx.size() < best->size() || (idx.size() == best->size() && idx < *best)) best = idx;
  }
  if (!best) return std::nullopt;
  std::vector<hof::JoinEdge> out;
  for (auto i : *best) out.push_back(cat.join_edges[i]);
  return out;
}

// ---------------------------------------------------------------- random instances

struct InstanceOptions {
  std::size_t rows = 120;          // stats rows
  std::size_t players = 25;
  std::size_t teams = 6;
  std::size_t years = 5;
  std::size_t ages = 8;
  std::size_t leagues = 2;
  std::size_t categorical = 3;     // how many of team_name, league, year, age
  bool user_constraint = true;     // steals > turnovers
  bool both_direction = true;      // points ranked both ways
};

/// stats(id, player, team_id, year, age, points, rebounds, steals, turnovers)
/// joined to team(team_id, team_name, league). Reals are multiples of 0.25 so
/// sums are exact in any order.
struct Instance {
  std::string config;
  hof::SchemaCatalog catalog;
  std::vector<hof::Row> stats;
  std::vector<hof::Row> teams;

  hof::Store store() const {
    hof::Store s(catalog);
    s.set_rows(*catalog.find_relation("team"), teams);
    s.set_rows(*catalog.find_relation("stats"), stats);
    return s;
  }
};

inline Instance random_instance(std::uint64_t seed, const InstanceOptions& o = {}) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::int64_t>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)); };

  std::vector<std::string> cats = {"team.team_name", "team.league", "stats.year", "stats.age"};
  std::shuffle(cats.begin(), cats.end(), rng);
  cats.resize(std::min(o.categorical, cats.size()));
  std::sort(cats.begin(), cats.end());

  std::ostringstream cfg;
  cfg << R"({"relations": [
    {"name": "stats", "columns": [
      {"name": "id", "type": "integer"}, {"name": "player", "type": "text"},
      {"name": "team_id", "type": "integer"}, {"name": "year", "type": "integer"},
      {"name": "age", "type": "integer"}, {"name": "points", "type": "real"},
      {"name": "rebounds", "type": "integer"}, {"name": "steals", "type": "integer"},
      {"name": "turnovers", "type": "integer"}], "key": ["id"]},
    {"name": "team", "columns": [
      {"name": "team_id", "type": "integer"}, {"name": "team_name", "type": "text"},
      {"name": "league", "type": "text"}], "key": ["team_id"]}],
  "entity_attrs": ["stats.player", "team.team_name"],
  "categorical_attrs": [)";
  for (std::size_t i = 0; i < cats.size(); ++i) cfg << (i ? ", " : "") << '"' << cats[i] << '"';
  cfg << R"(],
  "ranking_criteria": [
    {"column": "points", "aggregation": "sum", "direction": ")" << (o.both_direction ? "both" : "descending") << R"("},
    {"column": "rebounds", "aggregation": "avg", "direction": "descending"},
    {"column": "steals", "aggregation": "sum", "direction": "descending"}],
  "user_constraints": [)";
  if (o.user_constraint)
    cfg << R"({"kind": "inter_attribute", "left": "steals", "comparator": ">", "right": "turnovers"})";
  cfg << R"(],
  "join_edges": [{"from": "stats.team_id", "to": "team.team_id"}]})";

  Instance inst;
  inst.config = cfg.str();
  inst.catalog = hof::load_catalog(inst.config);
  for (std::size_t t = 0; t < o.teams; ++t)
    inst.teams.push_back({static_cast<std::int64_t>(t), "team" + std::to_string(t),
                          "league" + std::to_string(pick(o.leagues))});
  for (std::size_t r = 0; r < o.rows; ++r) {
    inst.stats.push_back({static_cast<std::int64_t>(r), "p" + std::to_string(pick(o.players)),
                          pick(o.teams), 2000 + pick(o.years), 20 + pick(o.ages),
                          0.25 * static_cast<double>(pick(160)), pick(15), pick(6), pick(6)});
  }
  return inst;
}

/// Exhaustive query enumeration: every entity, every source subset of size
/// <= cnum, every criterion and every value combination drawn from the
/// columns' full domains, kept when at least k entities qualify. Returns ids.
inline std::set<std::string> oracle_generate(const hof::Store& store, std::size_t k, std::size_t cnum,
                                             std::size_t jnum) {
  const auto& cat = store.catalog();
  struct Source {
    std::optional<hof::ColumnRef> bind;
    std::optional<hof::ConstraintAtom> fixed;
    std::set<std::size_t> rels;
  };
  std::vector<Source> sources;
  for (const auto& c : cat.categorical_attrs) sources.push_back({c, std::nullopt, {c.relation}});
  for (const auto& a : cat.user_constraints) {
    Source s{std::nullopt, a, {a.left.relation}};
    if (const auto* r = std::get_if<hof::ColumnRef>(&a.right)) s.rels.insert(r->relation);
    sources.push_back(s);
  }
  std::set<std::string> ids;
  const auto criteria = cat.criteria();
  for (const auto& entity : cat.entity_attrs) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << sources.size()); ++mask) {
      std::vector<std::size_t> chosen;
      for (std::size_t i = 0; i < sources.size(); ++i)
        if (mask >> i & 1) chosen.push_back(i);
      if (chosen.size() > cnum) continue;
      std::set<std::size_t> rels;
      for (auto i : chosen) rels.insert(sources[i].rels.begin(), sources[i].rels.end());
      if (!oracle_join_path(cat, rels, jnum)) continue;
      rels.insert(entity.relation);
      if (!oracle_join_path(cat, rels, jnum)) continue;
      for (const auto& crit : criteria) {
        auto all = rels;
        all.insert(crit.column.relation);
        const auto path = oracle_join_path(cat, all, jnum);
        if (!path) continue;

        hof::HofQuery probe;
        probe.entity = entity;
        probe.criterion = crit;
        probe.join_path = *path;
        probe.k = k;
        std::vector<hof::ConstraintAtom> fixed;
        std::vector<hof::ColumnRef> bind;
        for (auto i : chosen) {
          if (sources[i].fixed) fixed.push_back(*sources[i].fixed);
          else bind.push_back(*sources[i].bind);
        }
        // bound tuple -> qualifying entities
        const auto jrels = relations_of(probe);
        std::map<std::vector<hof::Value>, std::set<hof::Value>> hits;
        for (const auto& c : cross_join(store, jrels, *path)) {
          if (!oracle_satisfies(store, jrels, c, fixed)) continue;
          std::vector<hof::Value> key;
          for (const auto& b : bind) key.push_back(cell(store, jrels, c, b));
          hits[key].insert(cell(store, jrels, c, entity));
        }
        // full cartesian product of each bound column's domain
        std::vector<std::vector<hof::Value>> domains;
        for (const auto& b : bind) {
          std::set<hof::Value> d;
          const auto& t = store.table(b.relation);
          for (hof::RowId r = 0; r < t.size(); ++r) d.insert(t.at(r, b.column));
          domains.emplace_back(d.begin(), d.end());
        }
        std::vector<hof::Value> tuple(bind.size());
        std::function<void(std::size_t)> rec = [&](std::size_t depth) {
          if (depth == bind.size()) {
            const auto it = hits.find(tuple);
            if (it == hits.end() || it->second.size() < k) return;
            hof::HofQuery q = probe;
            std::size_t b = 0;
            for (auto i : chosen) {
              if (sources[i].fixed) q.predicate.push_back(*sources[i].fixed);
              else q.predicate.push_back({hof::AtomKind::Binding, *sources[i].bind, hof::Comparator::Eq, tuple[b++]});
            }
            hof::finalize_query(cat, q);
            ids.insert(q.id);
            return;
          }
          for (const auto& v : domains[depth]) {
            tuple[depth] = v;
            rec(depth + 1);
          }
        };
        rec(0);
      }
    }
  }
  return ids;
}

}  // namespace testing_support
