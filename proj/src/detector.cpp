#include "hof/detector.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <numeric>
#include <set>
#include <thread>

#include "hof/error.hpp"

namespace hof {

ColumnIndex build_column_index(const std::vector<HofQuery>& queries) {
  ColumnIndex index;
  for (std::size_t i = 0; i < queries.size(); ++i)
    for (const auto& c : queries[i].referenced_columns) index[c].push_back(i);
  return index;
}

// ---------------------------------------------------------------- selection queries

namespace {

using EdgeList = std::vector<std::size_t>;

struct Adjacent {
  std::size_t edge;
  std::size_t relation;
};

std::vector<std::vector<Adjacent>> adjacency(const SchemaCatalog& catalog) {
  std::vector<std::vector<Adjacent>> adj(catalog.relations.size());
  for (std::size_t i = 0; i < catalog.join_edges.size(); ++i) {
    const auto& e = catalog.join_edges[i];
    adj[e.from.relation].push_back({i, e.to.relation});
    adj[e.to.relation].push_back({i, e.from.relation});
  }
  return adj;
}

bool is_tree(const SchemaCatalog& catalog, std::size_t base, const EdgeList& edges) {
  std::set<std::size_t> nodes{base};
  for (auto i : edges) {
    nodes.insert(catalog.join_edges[i].from.relation);
    nodes.insert(catalog.join_edges[i].to.relation);
  }
  return edges.size() + 1 == nodes.size();  // connected by construction
}

}  // namespace

std::map<std::size_t, std::vector<SelectionQuery>> build_selection_queries(const SchemaCatalog& catalog) {
  const auto adj = adjacency(catalog);
  const std::size_t n = catalog.relations.size();
  std::map<std::size_t, std::vector<SelectionQuery>> out;

  for (std::size_t base = 0; base < n; ++base) {
    constexpr std::size_t unreached = static_cast<std::size_t>(-1);
    std::vector<std::size_t> dist(n, unreached);
    std::vector<std::size_t> order{base};
    dist[base] = 0;
    for (std::size_t head = 0; head < order.size(); ++head)
      for (const auto& a : adj[order[head]])
        if (dist[a.relation] == unreached) {
          dist[a.relation] = dist[order[head]] + 1;
          order.push_back(a.relation);
        }

    // all shortest paths from base, per relation, in BFS order
    std::vector<std::vector<EdgeList>> paths(n);
    paths[base] = {{}};
    for (std::size_t i = 1; i < order.size(); ++i) {
      const auto t = order[i];
      for (const auto& a : adj[t]) {
        if (dist[a.relation] + 1 != dist[t]) continue;
        for (auto p : paths[a.relation]) {
          p.push_back(a.edge);
          paths[t].push_back(std::move(p));
        }
      }
    }

    std::set<EdgeList> covers{{}};
    for (std::size_t i = 1; i < order.size(); ++i) {
      std::set<EdgeList> next;
      for (const auto& cover : covers)
        for (const auto& p : paths[order[i]]) {
          EdgeList merged = cover;
          merged.insert(merged.end(), p.begin(), p.end());
          std::sort(merged.begin(), merged.end());
          merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
          if (is_tree(catalog, base, merged)) next.insert(std::move(merged));
        }
      covers = std::move(next);
    }

    auto& family = out[base];
    for (const auto& cover : covers) {
      SelectionQuery sq{base, {}};
      for (auto e : cover) sq.cover.push_back(catalog.join_edges[e]);
      family.push_back(std::move(sq));
    }
  }
  return out;
}

// ---------------------------------------------------------------- filters

std::vector<ColumnRef> written_columns(const SchemaCatalog& catalog, const UpdateRecord& u) {
  const auto rel = catalog.find_relation(u.table);
  if (!rel) throw Error("unknown table '" + u.table + "'");
  const auto& meta = catalog.relations[*rel];
  std::vector<ColumnRef> cols;
  if (u.kind == UpdateKind::Insert) {
    for (std::size_t c = 0; c < meta.columns.size(); ++c) cols.push_back({*rel, c});
    return cols;
  }
  for (const auto& [name, value] : u.set_values) {
    const auto c = meta.find_column(name);
    if (!c) throw Error("unknown column '" + name + "' in table '" + u.table + "'");
    cols.push_back({*rel, *c});
  }
  return cols;
}

std::vector<std::size_t> column_filter(const SchemaCatalog& catalog, const UpdateRecord& u, const ColumnIndex& index) {
  std::set<std::size_t> hits;
  for (const auto& col : written_columns(catalog, u))
    if (const auto it = index.find(col); it != index.end()) hits.insert(it->second.begin(), it->second.end());
  return {hits.begin(), hits.end()};
}

std::vector<RankChange> diff_rankings(const RankingState& before, const RankingState& after, std::size_t k) {
  std::vector<RankChange> out;
  for (std::size_t i = 0; i < after.entries.size(); ++i) {
    const auto& entity = after.entries[i].entity;
    std::size_t from = k + 1;
    for (std::size_t j = 0; j < before.entries.size(); ++j)
      if (before.entries[j].entity == entity) {
        from = j + 1;
        break;
      }
    if (from > i + 1) out.push_back({entity, from, i + 1});
  }
  return out;
}

// ---------------------------------------------------------------- engine

template <class F>
void Engine::for_each_parallel(std::size_t n, F&& f) const {
  const std::size_t workers = std::min(options_.workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
}

Engine::Engine(Store store, std::vector<HofQuery> queries, EngineOptions options)
    : store_(std::move(store)), queries_(std::move(queries)), options_(options) {
  if (options_.workers < 1) options_.workers = 1;
  column_index_ = build_column_index(queries_);
  selection_ = build_selection_queries(store_.catalog());

  extension_.resize(queries_.size());
  for (std::size_t i = 0; i < queries_.size(); ++i) {
    const auto& q = queries_[i];
    const auto rels = query_relations(q);
    for (auto r : rels) {
      std::vector<JoinEdge> ext = q.join_path;
      for (const auto& sq : selection_[r]) {
        const bool covers_query = std::all_of(q.join_path.begin(), q.join_path.end(), [&](const JoinEdge& e) {
          return std::find(sq.cover.begin(), sq.cover.end(), e) != sq.cover.end();
        });
        if (!covers_query) continue;
        ext.clear();
        for (const auto& e : sq.cover)
          if (rels.count(e.from.relation) && rels.count(e.to.relation)) ext.push_back(e);
        break;
      }
      extension_[i].emplace(r, std::move(ext));
    }
  }

  rankings_.resize(queries_.size());
  for_each_parallel(queries_.size(), [&](std::size_t i) { rankings_[i] = store_.evaluate_hof(queries_[i]); });
}

const std::vector<JoinEdge>& Engine::row_filter_path(std::size_t query, std::size_t relation) const {
  const auto& ext = extension_.at(query);
  const auto it = ext.find(relation);
  if (it == ext.end()) throw Error("relation outside the query's join");
  return it->second;
}

std::vector<std::size_t> Engine::row_filter(std::size_t relation, const std::vector<Row>& before_images,
                                            const std::vector<Row>& after_images,
                                            const std::vector<std::size_t>& candidates) const {
  std::vector<char> keep(candidates.size(), 0);
  for_each_parallel(candidates.size(), [&](std::size_t i) {
    const auto q = candidates[i];
    const auto& ext = extension_[q];
    const auto it = ext.find(relation);
    if (it == ext.end()) return;
    const auto& pred = queries_[q].predicate;
    keep[i] = store_.any_selected(it->second, pred, relation, before_images) ||
              store_.any_selected(it->second, pred, relation, after_images);
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (keep[i]) out.push_back(candidates[i]);
  return out;
}

DetectResult Engine::detect(const UpdateRecord& u) {
  const auto start = std::chrono::steady_clock::now();
  DetectResult result;
  result.stats.seq = u.seq;

  const auto relation = store_.relation_of(u.table);
  std::vector<Row> before;
  for (auto id : store_.match(u)) before.push_back(store_.table(relation).row(id));

  std::vector<std::size_t> candidates;
  if (options_.filters) {
    candidates = column_filter(store_.catalog(), u, column_index_);
  } else {
    candidates.resize(queries_.size());
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  }
  result.stats.column_candidates = candidates.size();

  const auto touched = store_.apply_update(u);
  std::vector<Row> after;
  after.reserve(touched.size());
  for (auto id : touched) after.push_back(store_.table(relation).row(id));

  const auto survivors = options_.filters ? row_filter(relation, before, after, candidates) : candidates;
  result.stats.row_candidates = survivors.size();

  std::vector<RankingState> fresh(survivors.size());
  for_each_parallel(survivors.size(), [&](std::size_t i) { fresh[i] = store_.evaluate_hof(queries_[survivors[i]]); });

  for (std::size_t i = 0; i < survivors.size(); ++i) {
    const auto q = survivors[i];
    auto& old_state = rankings_[q];
    const bool reordered =
        !std::equal(old_state.entries.begin(), old_state.entries.end(), fresh[i].entries.begin(),
                    fresh[i].entries.end(), [](const RankEntry& a, const RankEntry& b) { return a.entity == b.entity; });
    if (reordered) ++result.stats.changed;
    for (auto& c : diff_rankings(old_state, fresh[i], queries_[q].k))
      result.events.push_back({queries_[q].id, std::move(c.entity), c.from_rank, c.to_rank, u.seq});
    old_state = std::move(fresh[i]);
  }

  std::sort(result.events.begin(), result.events.end(), [](const RankEvent& a, const RankEvent& b) {
    return a.query_id != b.query_id ? a.query_id < b.query_id : a.entity < b.entity;
  });
  result.stats.events = result.events.size();
  result.stats.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace hof
