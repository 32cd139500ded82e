#include "hof/catalog.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "hof/error.hpp"

namespace hof {

using json = nlohmann::ordered_json;

std::optional<std::size_t> RelationMeta::find_column(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == column) return i;
  return std::nullopt;
}

std::string_view to_string(Aggregation a) { return a == Aggregation::Sum ? "sum" : "avg"; }

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Ascending:
      return "ascending";
    case Direction::Descending:
      return "descending";
    case Direction::Both:
      return "both";
  }
  return "?";
}

std::string_view to_string(Comparator c) {
  switch (c) {
    case Comparator::Gt:
      return ">";
    case Comparator::Lt:
      return "<";
    case Comparator::Eq:
      return "=";
    case Comparator::Ne:
      return "!=";
    case Comparator::Le:
      return "<=";
    case Comparator::Ge:
      return ">=";
  }
  return "?";
}

std::string_view to_string(AtomKind k) {
  switch (k) {
    case AtomKind::Binding:
      return "binding";
    case AtomKind::ConstComparison:
      return "const_comparison";
    case AtomKind::InterAttribute:
      return "inter_attribute";
  }
  return "?";
}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "sum") return Aggregation::Sum;
  if (s == "avg") return Aggregation::Avg;
  throw Error("unknown aggregation '" + std::string(s) + "'");
}

Direction parse_direction(std::string_view s) {
  if (s == "ascending" || s == "asc") return Direction::Ascending;
  if (s == "descending" || s == "desc") return Direction::Descending;
  if (s == "both") return Direction::Both;
  throw Error("unknown direction '" + std::string(s) + "'");
}

Comparator parse_comparator(std::string_view s) {
  if (s == ">") return Comparator::Gt;
  if (s == "<") return Comparator::Lt;
  if (s == "=" || s == "==") return Comparator::Eq;
  if (s == "!=" || s == "<>" || s == "≠") return Comparator::Ne;
  if (s == "<=" || s == "≤") return Comparator::Le;
  if (s == ">=" || s == "≥") return Comparator::Ge;
  throw Error("unknown comparator '" + std::string(s) + "'");
}

AtomKind parse_atom_kind(std::string_view s) {
  if (s == "binding") return AtomKind::Binding;
  if (s == "const_comparison") return AtomKind::ConstComparison;
  if (s == "inter_attribute") return AtomKind::InterAttribute;
  throw Error("unknown constraint kind '" + std::string(s) + "'");
}

bool satisfies(int c, Comparator cmp) {
  switch (cmp) {
    case Comparator::Gt:
      return c > 0;
    case Comparator::Lt:
      return c < 0;
    case Comparator::Eq:
      return c == 0;
    case Comparator::Ne:
      return c != 0;
    case Comparator::Le:
      return c <= 0;
    case Comparator::Ge:
      return c >= 0;
  }
  return false;
}

std::vector<RankingCriterion> SchemaCatalog::criteria() const {
  std::vector<RankingCriterion> out;
  for (const auto& c : declared_criteria) {
    if (c.direction == Direction::Both) {
      out.push_back({c.column, c.aggregation, Direction::Descending});
      out.push_back({c.column, c.aggregation, Direction::Ascending});
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::optional<std::size_t> SchemaCatalog::find_relation(std::string_view name) const {
  for (std::size_t i = 0; i < relations.size(); ++i)
    if (relations[i].name == name) return i;
  return std::nullopt;
}

ColumnRef SchemaCatalog::resolve(std::string_view reference) const {
  const auto dot = reference.find('.');
  if (dot != std::string_view::npos) {
    const auto rel_name = reference.substr(0, dot);
    const auto col_name = reference.substr(dot + 1);
    const auto rel = find_relation(rel_name);
    if (!rel) throw Error("unknown relation '" + std::string(rel_name) + "'");
    const auto col = relations[*rel].find_column(col_name);
    if (!col)
      throw Error("unknown column '" + std::string(col_name) + "' in relation '" +
                  std::string(rel_name) + "'");
    return {*rel, *col};
  }
  std::optional<ColumnRef> found;
  for (std::size_t r = 0; r < relations.size(); ++r) {
    if (const auto col = relations[r].find_column(reference)) {
      if (found)
        throw Error("ambiguous column '" + std::string(reference) + "'; qualify it as relation.column");
      found = ColumnRef{r, *col};
    }
  }
  if (!found) throw Error("unknown column '" + std::string(reference) + "'");
  return *found;
}

const ColumnDef& SchemaCatalog::column(ColumnRef ref) const {
  return relations.at(ref.relation).columns.at(ref.column);
}

std::string SchemaCatalog::qualified_name(ColumnRef ref) const {
  return relations.at(ref.relation).name + "." + column(ref).name;
}

std::string render_atom(const SchemaCatalog& catalog, const ConstraintAtom& atom) {
  std::string out = catalog.qualified_name(atom.left);
  out += ' ';
  out += to_string(atom.comparator);
  out += ' ';
  if (const auto* col = std::get_if<ColumnRef>(&atom.right))
    out += catalog.qualified_name(*col);
  else
    out += sql_literal(std::get<Value>(atom.right));
  return out;
}

namespace {

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(where + ": missing field '" + key + "'");
  return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw Error(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

Value literal_from_json(const json& v, ColumnType type, const std::string& where) {
  Value raw;
  if (v.is_number_integer())
    raw = v.get<std::int64_t>();
  else if (v.is_number())
    raw = v.get<double>();
  else if (v.is_string())
    raw = v.get<std::string>();
  else
    throw Error(where + ": constant must be a number or string");
  try {
    return coerce(std::move(raw), type);
  } catch (const std::invalid_argument& e) {
    throw Error(where + ": " + e.what());
  }
}

json literal_to_json(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

std::vector<ColumnRef> resolve_list(const SchemaCatalog& cat, const json& doc, const char* key) {
  std::vector<ColumnRef> out;
  if (!doc.contains(key)) return out;
  const auto& arr = doc.at(key);
  if (!arr.is_array()) throw Error(std::string(key) + " must be a list");
  for (const auto& item : arr) {
    if (!item.is_string()) throw Error(std::string(key) + " entries must be column references");
    const auto ref = cat.resolve(item.get<std::string>());
    if (std::find(out.begin(), out.end(), ref) != out.end())
      throw Error(std::string(key) + ": duplicate entry '" + item.get<std::string>() + "'");
    out.push_back(ref);
  }
  return out;
}

}  // namespace

SchemaCatalog load_catalog(std::string_view config_text) {
  json doc;
  try {
    doc = json::parse(config_text.begin(), config_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_of(config_text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!doc.is_object()) throw ParseError("config must be an object", 1);

  SchemaCatalog cat;
  if (!doc.contains("relations") || !doc.at("relations").is_array() || doc.at("relations").empty())
    throw Error("no relations");

  for (const auto& rel_json : doc.at("relations")) {
    RelationMeta rel;
    rel.name = require_string(rel_json, "name", "relation");
    const std::string where = "relation '" + rel.name + "'";
    if (rel.name.empty() || rel.name.find('.') != std::string::npos)
      throw Error(where + ": invalid name");
    if (cat.find_relation(rel.name)) throw Error(where + ": declared twice");
    const auto& cols = require(rel_json, "columns", where);
    if (!cols.is_array() || cols.empty()) throw Error(where + ": no columns");
    for (const auto& col_json : cols) {
      ColumnDef col;
      col.name = require_string(col_json, "name", where);
      col.type = parse_column_type(require_string(col_json, "type", where + " column '" + col.name + "'"));
      if (col.name.empty() || col.name.find('.') != std::string::npos)
        throw Error(where + ": invalid column name '" + col.name + "'");
      if (rel.find_column(col.name)) throw Error(where + ": duplicate column '" + col.name + "'");
      rel.columns.push_back(std::move(col));
    }
    if (rel_json.contains("key")) {
      for (const auto& k : rel_json.at("key")) {
        const auto pos = rel.find_column(k.get<std::string>());
        if (!pos) throw Error(where + ": unknown key column '" + k.get<std::string>() + "'");
        rel.key_columns.push_back(*pos);
      }
    }
    cat.relations.push_back(std::move(rel));
  }

  cat.entity_attrs = resolve_list(cat, doc, "entity_attrs");
  cat.categorical_attrs = resolve_list(cat, doc, "categorical_attrs");
  for (const auto& ref : cat.entity_attrs) cat.relations[ref.relation].entity_attrs.push_back(ref.column);
  for (const auto& ref : cat.categorical_attrs)
    cat.relations[ref.relation].categorical_attrs.push_back(ref.column);

  if (doc.contains("ranking_criteria")) {
    for (const auto& c : doc.at("ranking_criteria")) {
      const std::string col_name = require_string(c, "column", "ranking criterion");
      RankingCriterion crit;
      crit.column = cat.resolve(col_name);
      if (!is_numeric(cat.column(crit.column).type))
        throw Error("ranking criterion on text column '" + col_name + "'");
      crit.aggregation = parse_aggregation(require_string(c, "aggregation", "ranking criterion " + col_name));
      crit.direction = parse_direction(require_string(c, "direction", "ranking criterion " + col_name));
      if (std::find(cat.declared_criteria.begin(), cat.declared_criteria.end(), crit) !=
          cat.declared_criteria.end())
        throw Error("duplicate ranking criterion on '" + col_name + "'");
      cat.declared_criteria.push_back(crit);
    }
  }

  if (doc.contains("user_constraints")) {
    for (const auto& c : doc.at("user_constraints")) {
      ConstraintAtom atom;
      atom.kind = parse_atom_kind(require_string(c, "kind", "user constraint"));
      const std::string left = require_string(c, "left", "user constraint");
      const std::string where = "user constraint on '" + left + "'";
      atom.left = cat.resolve(left);
      atom.comparator = parse_comparator(require_string(c, "comparator", where));
      if (atom.kind == AtomKind::Binding && atom.comparator != Comparator::Eq)
        throw Error(where + ": binding atoms only allow '='");
      const auto& right = require(c, "right", where);
      const ColumnType left_type = cat.column(atom.left).type;
      if (atom.kind == AtomKind::InterAttribute) {
        if (!right.is_string()) throw Error(where + ": inter-attribute right side must be a column");
        const auto rref = cat.resolve(right.get<std::string>());
        if (rref == atom.left) throw Error(where + ": compares a column with itself");
        if (is_numeric(left_type) != is_numeric(cat.column(rref).type))
          throw Error(where + ": incompatible column types");
        atom.right = rref;
      } else {
        atom.right = literal_from_json(right, left_type, where);
      }
      cat.user_constraints.push_back(std::move(atom));
    }
  }

  if (doc.contains("join_edges")) {
    for (const auto& e : doc.at("join_edges")) {
      JoinEdge edge{cat.resolve(require_string(e, "from", "join edge")),
                    cat.resolve(require_string(e, "to", "join edge"))};
      const std::string name = cat.qualified_name(edge.from) + " = " + cat.qualified_name(edge.to);
      if (edge.from.relation == edge.to.relation)
        throw Error("join edge " + name + " links a relation to itself");
      if (cat.column(edge.from).type != cat.column(edge.to).type)
        throw Error("join edge " + name + " links columns of different types");
      cat.join_edges.push_back(edge);
    }
  }

  if (doc.contains("join_allow_list")) {
    for (const auto& group : doc.at("join_allow_list")) {
      std::set<std::size_t> rels;
      for (const auto& name : group) {
        const auto rel = cat.find_relation(name.get<std::string>());
        if (!rel) throw Error("join_allow_list: unknown relation '" + name.get<std::string>() + "'");
        rels.insert(*rel);
      }
      cat.join_allow_list.push_back(std::move(rels));
    }
  }
  return cat;
}

std::string serialize_catalog(const SchemaCatalog& cat) {
  json doc = json::object();
  json rels = json::array();
  for (const auto& rel : cat.relations) {
    json cols = json::array();
    for (const auto& col : rel.columns)
      cols.push_back({{"name", col.name}, {"type", std::string(to_string(col.type))}});
    json key = json::array();
    for (auto k : rel.key_columns) key.push_back(rel.columns[k].name);
    rels.push_back({{"name", rel.name}, {"columns", cols}, {"key", key}});
  }
  doc["relations"] = rels;
  auto names = [&](const std::vector<ColumnRef>& refs) {
    json arr = json::array();
    for (const auto& r : refs) arr.push_back(cat.qualified_name(r));
    return arr;
  };
  doc["entity_attrs"] = names(cat.entity_attrs);
  doc["categorical_attrs"] = names(cat.categorical_attrs);
  json crits = json::array();
  for (const auto& c : cat.declared_criteria)
    crits.push_back({{"column", cat.qualified_name(c.column)},
                     {"aggregation", std::string(to_string(c.aggregation))},
                     {"direction", std::string(to_string(c.direction))}});
  doc["ranking_criteria"] = crits;
  json cons = json::array();
  for (const auto& a : cat.user_constraints) {
    json right = std::holds_alternative<ColumnRef>(a.right)
                     ? json(cat.qualified_name(std::get<ColumnRef>(a.right)))
                     : literal_to_json(std::get<Value>(a.right));
    cons.push_back({{"kind", std::string(to_string(a.kind))},
                    {"left", cat.qualified_name(a.left)},
                    {"comparator", std::string(to_string(a.comparator))},
                    {"right", right}});
  }
  doc["user_constraints"] = cons;
  json edges = json::array();
  for (const auto& e : cat.join_edges)
    edges.push_back({{"from", cat.qualified_name(e.from)}, {"to", cat.qualified_name(e.to)}});
  doc["join_edges"] = edges;
  if (!cat.join_allow_list.empty()) {
    json allow = json::array();
    for (const auto& group : cat.join_allow_list) {
      json g = json::array();
      for (auto r : group) g.push_back(cat.relations[r].name);
      allow.push_back(g);
    }
    doc["join_allow_list"] = allow;
  }
  return doc.dump(2) + "\n";
}

std::set<std::size_t> path_relations(const std::vector<JoinEdge>& path) {
  std::set<std::size_t> out;
  for (const auto& e : path) {
    out.insert(e.from.relation);
    out.insert(e.to.relation);
  }
  return out;
}

namespace {

// Checks that the chosen edges form one tree spanning `needed`.
bool spanning_tree(const SchemaCatalog& cat, const std::vector<std::size_t>& chosen,
                   const std::set<std::size_t>& needed) {
  std::vector<std::size_t> parent(cat.relations.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::set<std::size_t> touched;
  for (auto idx : chosen) {
    const auto& e = cat.join_edges[idx];
    const auto a = find(e.from.relation);
    const auto b = find(e.to.relation);
    if (a == b) return false;
    parent[a] = b;
    touched.insert(e.from.relation);
    touched.insert(e.to.relation);
  }
  if (touched.size() != chosen.size() + 1) return false;
  return std::includes(touched.begin(), touched.end(), needed.begin(), needed.end());
}

}  // namespace

std::optional<std::vector<JoinEdge>> join_path(const SchemaCatalog& cat,
                                               const std::set<std::size_t>& needed,
                                               std::size_t max_joins,
                                               const std::vector<bool>& usable) {
  if (needed.size() <= 1) return std::vector<JoinEdge>{};
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < cat.join_edges.size(); ++i)
    if (usable.empty() || usable[i]) pool.push_back(i);
  const std::size_t edges = pool.size();
  const std::size_t limit = std::min(max_joins, edges);
  for (std::size_t size = needed.size() - 1; size <= limit; ++size) {
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<std::size_t> chosen(size);
    while (true) {
      for (std::size_t i = 0; i < size; ++i) chosen[i] = pool[idx[i]];
      if (spanning_tree(cat, chosen, needed)) {
        std::vector<JoinEdge> out;
        for (auto i : chosen) out.push_back(cat.join_edges[i]);
        return out;
      }
      // next combination in lexicographic order
      std::size_t i = size;
      while (i > 0 && idx[i - 1] == edges - size + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return std::nullopt;
}

}  // namespace hof
