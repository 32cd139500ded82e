#include "hof/query.hpp"

#include <cstdint>
#include <cstdio>

namespace hof {

std::set<std::size_t> query_relations(const HofQuery& q) {
  auto rels = path_relations(q.join_path);
  rels.insert(q.entity.relation);
  return rels;
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void finalize_query(const SchemaCatalog& catalog, HofQuery& q) {
  q.referenced_columns.clear();
  q.referenced_columns.insert(q.entity);
  q.referenced_columns.insert(q.criterion.column);
  for (const auto& atom : q.predicate) {
    q.referenced_columns.insert(atom.left);
    if (const auto* col = std::get_if<ColumnRef>(&atom.right)) q.referenced_columns.insert(*col);
  }
  for (const auto& edge : q.join_path) {
    q.referenced_columns.insert(edge.from);
    q.referenced_columns.insert(edge.to);
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "q%016llx",
                static_cast<unsigned long long>(fnv1a(render_sql(catalog, q))));
  q.id = buf;
}

std::string render_sql(const SchemaCatalog& catalog, const HofQuery& q) {
  const std::string agg = std::string(q.criterion.aggregation == Aggregation::Sum ? "SUM(" : "AVG(") +
                          catalog.qualified_name(q.criterion.column) + ")";
  std::string sql = "SELECT " + catalog.qualified_name(q.entity) + ", " + agg + " FROM ";
  if (q.join_path.empty()) {
    sql += catalog.relations[q.entity.relation].name;
  } else {
    // Emit relations in join order so every ON clause refers to a listed table.
    std::set<std::size_t> listed{q.join_path.front().from.relation};
    sql += catalog.relations[q.join_path.front().from.relation].name;
    std::vector<bool> used(q.join_path.size(), false);
    for (std::size_t done = 0; done < q.join_path.size();) {
      for (std::size_t i = 0; i < q.join_path.size(); ++i) {
        if (used[i]) continue;
        const auto& e = q.join_path[i];
        const bool has_from = listed.count(e.from.relation) > 0;
        const bool has_to = listed.count(e.to.relation) > 0;
        if (!has_from && !has_to) continue;
        const auto added = has_from ? e.to.relation : e.from.relation;
        sql += " JOIN " + catalog.relations[added].name + " ON " + catalog.qualified_name(e.from) +
               " = " + catalog.qualified_name(e.to);
        listed.insert(added);
        used[i] = true;
        ++done;
      }
    }
  }
  if (!q.predicate.empty()) {
    sql += " WHERE ";
    for (std::size_t i = 0; i < q.predicate.size(); ++i) {
      if (i) sql += " AND ";
      sql += render_atom(catalog, q.predicate[i]);
    }
  }
  sql += " GROUP BY " + catalog.qualified_name(q.entity) + " ORDER BY " + agg +
         (q.criterion.direction == Direction::Ascending ? " ASC" : " DESC") +
         " LIMIT " + std::to_string(q.k);
  return sql;
}

bool ranks_before(const RankEntry& a, const RankEntry& b, Direction direction) {
  if (a.aggregate != b.aggregate)
    return direction == Direction::Ascending ? a.aggregate < b.aggregate : a.aggregate > b.aggregate;
  return compare_values(a.entity, b.entity) < 0;
}

}  // namespace hof
