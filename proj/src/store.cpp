#include "hof/store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "hof/error.hpp"
#include "join_scan.hpp"

namespace hof {

// ---------------------------------------------------------------- Table

Table::Table(RelationMeta meta, std::vector<std::size_t> indexed_columns)
    : meta_(std::move(meta)), slot_of_(meta_.columns.size(), -1) {
  std::sort(indexed_columns.begin(), indexed_columns.end());
  indexed_columns.erase(std::unique(indexed_columns.begin(), indexed_columns.end()), indexed_columns.end());
  indexed_columns_ = std::move(indexed_columns);
  for (std::size_t i = 0; i < indexed_columns_.size(); ++i)
    slot_of_.at(indexed_columns_[i]) = static_cast<int>(i);
  indices_.resize(indexed_columns_.size());
}

std::span<const RowId> Table::lookup(std::size_t column, const Value& value) const {
  const auto& idx = indices_[static_cast<std::size_t>(slot_of_[column])];
  const auto it = idx.find(value);
  if (it == idx.end()) return {};
  return it->second;
}

const ValueIndex& Table::index(std::size_t column) const {
  if (!indexed(column)) throw Error("column '" + meta_.columns[column].name + "' is not indexed");
  return indices_[static_cast<std::size_t>(slot_of_[column])];
}

ValueIndex Table::rebuild_index(std::size_t column) const {
  ValueIndex out;
  for (RowId id = 0; id < rows_.size(); ++id) out[rows_[id][column]].push_back(id);
  return out;
}

Row Table::key_of(const Row& row) const {
  Row key;
  key.reserve(meta_.key_columns.size());
  for (auto c : meta_.key_columns) key.push_back(row[c]);
  return key;
}

std::optional<RowId> Table::find_key(const Row& key_values) const {
  const auto it = keys_.find(key_values);
  if (it == keys_.end()) return std::nullopt;
  return it->second;
}

RowId Table::append(Row row) {
  if (row.size() != meta_.columns.size())
    throw Error(meta_.name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                std::to_string(meta_.columns.size()));
  for (std::size_t c = 0; c < row.size(); ++c)
    if (!conforms(row[c], meta_.columns[c].type))
      throw Error(meta_.name + "." + meta_.columns[c].name + ": value does not match column type");
  const auto id = static_cast<RowId>(rows_.size());
  if (!meta_.key_columns.empty()) {
    auto key = key_of(row);
    if (keys_.count(key)) throw Error(meta_.name + ": duplicate key");
    keys_.emplace(std::move(key), id);
  }
  for (std::size_t i = 0; i < indexed_columns_.size(); ++i)
    indices_[i][row[indexed_columns_[i]]].push_back(id);
  rows_.push_back(std::move(row));
  return id;
}

void Table::set(RowId id, std::size_t column, Value value) {
  Row& row = rows_.at(id);
  if (row[column] == value) return;
  const bool is_key =
      std::find(meta_.key_columns.begin(), meta_.key_columns.end(), column) != meta_.key_columns.end();
  if (is_key) keys_.erase(key_of(row));
  if (indexed(column)) {
    auto& idx = indices_[static_cast<std::size_t>(slot_of_[column])];
    auto old = idx.find(row[column]);
    auto& ids = old->second;
    ids.erase(std::lower_bound(ids.begin(), ids.end(), id));
    if (ids.empty()) idx.erase(old);
    auto& fresh = idx[value];
    fresh.insert(std::lower_bound(fresh.begin(), fresh.end(), id), id);
  }
  row[column] = std::move(value);
  if (is_key) keys_.emplace(key_of(row), id);
}

// ---------------------------------------------------------------- CSV

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw ParseError("stray quote inside unquoted field", line);
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line);
  if (field_started || !record.empty()) end_record();
  return records;
}

Table load_table(const RelationMeta& meta, std::string_view csv_text, std::vector<std::size_t> indexed_columns) {
  Table table(meta, std::move(indexed_columns));
  const auto records = parse_csv(csv_text);
  if (records.empty()) throw Error(meta.name + ": CSV has no header row");
  const auto& header = records.front();
  std::vector<std::size_t> position(header.size());
  std::vector<bool> seen(meta.columns.size(), false);
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto col = meta.find_column(header[i]);
    if (!col) throw Error(meta.name + ": unexpected column '" + header[i] + "' in CSV header");
    if (seen[*col]) throw Error(meta.name + ": column '" + header[i] + "' repeated in CSV header");
    seen[*col] = true;
    position[i] = *col;
  }
  for (std::size_t c = 0; c < meta.columns.size(); ++c)
    if (!seen[c]) throw Error(meta.name + ": CSV is missing column '" + meta.columns[c].name + "'");

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size())
      throw Error(meta.name + ": row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                  " cells, expected " + std::to_string(header.size()));
    Row row(meta.columns.size());
    for (std::size_t i = 0; i < rec.size(); ++i) {
      const auto& col = meta.columns[position[i]];
      try {
        row[position[i]] = parse_value(rec[i], col.type);
      } catch (const std::invalid_argument& e) {
        throw Error(meta.name + ": row " + std::to_string(r) + ", column '" + col.name + "': " + e.what());
      }
    }
    try {
      table.append(std::move(row));
    } catch (const Error& e) {
      throw Error("row " + std::to_string(r) + ": " + e.what());
    }
  }
  return table;
}

// ---------------------------------------------------------------- Store

std::vector<std::size_t> default_indexed_columns(const SchemaCatalog& catalog, std::size_t relation) {
  const auto& meta = catalog.relations.at(relation);
  std::vector<std::size_t> cols(meta.categorical_attrs.begin(), meta.categorical_attrs.end());
  cols.insert(cols.end(), meta.key_columns.begin(), meta.key_columns.end());
  for (const auto& e : catalog.join_edges) {
    if (e.from.relation == relation) cols.push_back(e.from.column);
    if (e.to.relation == relation) cols.push_back(e.to.column);
  }
  for (const auto& a : catalog.user_constraints)
    if (a.kind == AtomKind::Binding && a.left.relation == relation) cols.push_back(a.left.column);
  return cols;
}

Store::Store(SchemaCatalog catalog) : catalog_(std::move(catalog)) {
  for (std::size_t r = 0; r < catalog_.relations.size(); ++r)
    tables_.emplace_back(catalog_.relations[r], default_indexed_columns(catalog_, r));
}

Store Store::load_directory(SchemaCatalog catalog, const std::filesystem::path& dir) {
  Store store(std::move(catalog));
  for (std::size_t r = 0; r < store.catalog_.relations.size(); ++r) {
    const auto file = dir / (store.catalog_.relations[r].name + ".csv");
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    try {
      store.load_table(r, text.str());
    } catch (const Error& e) {
      throw Error(file.string() + ": " + e.what());
    }
  }
  return store;
}

std::size_t Store::relation_of(std::string_view table_name) const {
  const auto rel = catalog_.find_relation(table_name);
  if (!rel) throw Error("unknown table '" + std::string(table_name) + "'");
  return *rel;
}

void Store::load_table(std::size_t relation, std::string_view csv_text) {
  tables_.at(relation) =
      hof::load_table(catalog_.relations.at(relation), csv_text, default_indexed_columns(catalog_, relation));
}

void Store::set_rows(std::size_t relation, std::vector<Row> rows) {
  Table fresh(catalog_.relations.at(relation), default_indexed_columns(catalog_, relation));
  for (auto& row : rows) fresh.append(std::move(row));
  tables_.at(relation) = std::move(fresh);
}

namespace {

struct ResolvedUpdate {
  std::size_t relation = 0;
  std::vector<std::pair<std::size_t, SetValue>> set;
  std::vector<std::pair<std::size_t, Value>> where;
};

ResolvedUpdate resolve_update(const Store& store, const UpdateRecord& u) {
  ResolvedUpdate r;
  r.relation = store.relation_of(u.table);
  const auto& meta = store.catalog().relations[r.relation];
  auto column = [&](const std::string& name) {
    const auto c = meta.find_column(name);
    if (!c) throw Error("update " + std::to_string(u.seq) + ": unknown column '" + u.table + "." + name + "'");
    return *c;
  };
  std::vector<bool> assigned(meta.columns.size(), false);
  for (const auto& [name, value] : u.set_values) {
    const auto c = column(name);
    if (assigned[c]) throw Error("update " + std::to_string(u.seq) + ": column '" + name + "' assigned twice");
    assigned[c] = true;
    const auto type = meta.columns[c].type;
    try {
      if (const auto* delta = std::get_if<Delta>(&value)) {
        if (u.kind == UpdateKind::Insert) throw std::invalid_argument("delta not allowed in an insert");
        if (!is_numeric(type)) throw std::invalid_argument("delta on a text column");
        r.set.emplace_back(c, Delta{coerce(delta->amount, type)});
      } else {
        r.set.emplace_back(c, coerce(std::get<Value>(value), type));
      }
    } catch (const std::invalid_argument& e) {
      throw Error("update " + std::to_string(u.seq) + ", column '" + name + "': " + e.what());
    }
  }
  if (u.kind == UpdateKind::Insert) {
    if (!u.where_equalities.empty()) throw Error("update " + std::to_string(u.seq) + ": insert with a where clause");
    for (std::size_t c = 0; c < meta.columns.size(); ++c)
      if (!assigned[c])
        throw Error("update " + std::to_string(u.seq) + ": insert misses column '" + meta.columns[c].name + "'");
  }
  for (const auto& [name, value] : u.where_equalities) {
    const auto c = column(name);
    try {
      r.where.emplace_back(c, coerce(value, meta.columns[c].type));
    } catch (const std::invalid_argument& e) {
      throw Error("update " + std::to_string(u.seq) + ", where '" + name + "': " + e.what());
    }
  }
  return r;
}

std::vector<RowId> matching_rows(const Table& table, const ResolvedUpdate& r) {
  const auto& meta = table.meta();
  auto matches = [&](RowId id) {
    for (const auto& [c, v] : r.where)
      if (table.at(id, c) != v) return false;
    return true;
  };
  // Full key given: direct lookup.
  if (!meta.key_columns.empty()) {
    Row key;
    for (auto kc : meta.key_columns) {
      const auto it = std::find_if(r.where.begin(), r.where.end(), [&](const auto& w) { return w.first == kc; });
      if (it == r.where.end()) break;
      key.push_back(it->second);
    }
    if (key.size() == meta.key_columns.size()) {
      const auto id = table.find_key(key);
      if (id && matches(*id)) return {*id};
      return {};
    }
  }
  for (const auto& [c, v] : r.where) {
    if (!table.indexed(c)) continue;
    std::vector<RowId> out;
    for (RowId id : table.lookup(c, v))
      if (matches(id)) out.push_back(id);
    return out;
  }
  std::vector<RowId> out;
  for (RowId id = 0; id < table.size(); ++id)
    if (matches(id)) out.push_back(id);
  return out;
}

Value add_delta(const Value& current, const Value& amount) {
  if (const auto* i = std::get_if<std::int64_t>(&current)) return *i + std::get<std::int64_t>(amount);
  return std::get<double>(current) + std::get<double>(amount);
}

}  // namespace

std::vector<RowId> Store::match(const UpdateRecord& u) const {
  const auto r = resolve_update(*this, u);
  if (u.kind == UpdateKind::Insert) return {};
  return matching_rows(tables_[r.relation], r);
}

std::vector<RowId> Store::apply_update(const UpdateRecord& u) {
  const auto r = resolve_update(*this, u);
  Table& table = tables_[r.relation];
  const auto& meta = table.meta();

  if (u.kind == UpdateKind::Insert) {
    Row row(meta.columns.size());
    for (const auto& [c, v] : r.set) row[c] = std::get<Value>(v);
    try {
      return {table.append(std::move(row))};
    } catch (const Error& e) {
      throw Error("update " + std::to_string(u.seq) + ": " + e.what());
    }
  }

  const auto ids = matching_rows(table, r);
  // Compute every new row first so a failing update leaves the table untouched.
  std::vector<Row> fresh;
  fresh.reserve(ids.size());
  for (RowId id : ids) {
    Row row = table.row(id);
    for (const auto& [c, v] : r.set)
      row[c] = std::holds_alternative<Delta>(v) ? add_delta(row[c], std::get<Delta>(v).amount) : std::get<Value>(v);
    fresh.push_back(std::move(row));
  }
  const bool touches_key = std::any_of(r.set.begin(), r.set.end(), [&](const auto& s) {
    return std::find(meta.key_columns.begin(), meta.key_columns.end(), s.first) != meta.key_columns.end();
  });
  if (touches_key) {
    std::set<Row> new_keys;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      Row key;
      for (auto kc : meta.key_columns) key.push_back(fresh[i][kc]);
      const auto owner = table.find_key(key);
      const bool taken_elsewhere = owner && std::find(ids.begin(), ids.end(), *owner) == ids.end();
      if (taken_elsewhere || !new_keys.insert(key).second)
        throw Error("update " + std::to_string(u.seq) + ": key collision in " + meta.name);
    }
  }
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (const auto& [c, v] : r.set) table.set(ids[i], c, fresh[i][c]);
  return ids;
}

// ---------------------------------------------------------------- queries

namespace detail {

std::size_t choose_root(const Store& store, const std::vector<JoinEdge>& path,
                        std::span<const ConstraintAtom> atoms, std::size_t fallback) {
  const auto rels = path_relations(path);
  std::size_t best = fallback;
  std::size_t best_size = static_cast<std::size_t>(-1);
  for (const auto& a : atoms) {
    if (a.comparator != Comparator::Eq || std::holds_alternative<ColumnRef>(a.right)) continue;
    if (!rels.empty() && !rels.count(a.left.relation)) continue;
    const Table& t = store.table(a.left.relation);
    if (!t.indexed(a.left.column)) continue;
    const auto n = t.lookup(a.left.column, std::get<Value>(a.right)).size();
    if (n < best_size) {
      best_size = n;
      best = a.left.relation;
    }
  }
  return best;
}

}  // namespace detail

namespace {

std::size_t base_of(const std::vector<JoinEdge>& path, std::size_t fallback) {
  return path.empty() ? fallback : path.front().from.relation;
}

}  // namespace

std::set<std::vector<Value>> Store::select_distinct(const std::vector<ColumnRef>& columns,
                                                    const std::vector<ConstraintAtom>& fixed,
                                                    const std::vector<JoinEdge>& path,
                                                    std::size_t base_relation) const {
  const auto fallback = base_of(path, base_relation);
  const auto root = detail::choose_root(*this, path, fixed, fallback);
  detail::JoinScan scan(*this, path, root, fixed);
  std::vector<std::pair<std::size_t, std::size_t>> where;
  for (const auto& c : columns) where.emplace_back(scan.slot(c.relation), c.column);
  std::set<std::vector<Value>> out;
  std::vector<Value> tuple_values(columns.size());
  scan.run_all([&](const detail::JoinScan::Tuple& t) {
    for (std::size_t i = 0; i < where.size(); ++i) tuple_values[i] = (*t[where[i].first])[where[i].second];
    out.insert(tuple_values);
    return true;
  });
  return out;
}

namespace {

struct Accumulator {
  double sum = 0.0;
  std::size_t count = 0;
};

}  // namespace

RankingState Store::evaluate_hof(const HofQuery& q) const {
  const auto root = detail::choose_root(*this, q.join_path, q.predicate, base_of(q.join_path, q.entity.relation));
  detail::JoinScan scan(*this, q.join_path, root, q.predicate);
  const auto entity_slot = scan.slot(q.entity.relation);
  const auto value_slot = scan.slot(q.criterion.column.relation);
  std::unordered_map<Value, Accumulator> groups;
  scan.run_all([&](const detail::JoinScan::Tuple& t) {
    const Value& entity = (*t[entity_slot])[q.entity.column];
    auto it = groups.find(entity);
    if (it == groups.end()) it = groups.emplace(entity, Accumulator{}).first;
    it->second.sum += as_double((*t[value_slot])[q.criterion.column.column]);
    ++it->second.count;
    return true;
  });
  RankingState state;
  state.entries.reserve(groups.size());
  for (auto& [entity, acc] : groups) {
    const double agg = q.criterion.aggregation == Aggregation::Sum ? acc.sum : acc.sum / static_cast<double>(acc.count);
    state.entries.push_back({entity, agg});
  }
  const auto dir = q.criterion.direction;
  auto before = [dir](const RankEntry& a, const RankEntry& b) { return ranks_before(a, b, dir); };
  const std::size_t keep = std::min(q.k, state.entries.size());
  std::partial_sort(state.entries.begin(), state.entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    state.entries.end(), before);
  state.entries.resize(keep);
  return state;
}

std::size_t Store::count_groups(ColumnRef entity, const std::vector<ConstraintAtom>& predicate,
                                const std::vector<JoinEdge>& path) const {
  const auto root = detail::choose_root(*this, path, predicate, base_of(path, entity.relation));
  detail::JoinScan scan(*this, path, root, predicate);
  const auto slot = scan.slot(entity.relation);
  std::unordered_map<Value, char> seen;
  scan.run_all([&](const detail::JoinScan::Tuple& t) {
    seen.try_emplace((*t[slot])[entity.column], 0);
    return true;
  });
  return seen.size();
}

double Store::selectivity(const std::vector<ConstraintAtom>& predicate, const std::vector<JoinEdge>& path,
                          std::size_t base_relation) const {
  std::size_t total = 0;
  detail::JoinScan all(*this, path, base_of(path, base_relation), {});
  all.run_all([&](const detail::JoinScan::Tuple&) {
    ++total;
    return true;
  });
  if (total == 0) throw Error("empty data table");
  std::size_t passing = 0;
  const auto root = detail::choose_root(*this, path, predicate, base_of(path, base_relation));
  detail::JoinScan filtered(*this, path, root, predicate);
  filtered.run_all([&](const detail::JoinScan::Tuple&) {
    ++passing;
    return true;
  });
  return static_cast<double>(passing) / static_cast<double>(total);
}

std::map<std::vector<Value>, std::size_t> Store::instantiation_counts(const std::vector<ColumnRef>& columns,
                                                                      const std::vector<JoinEdge>& path,
                                                                      std::size_t base_relation) const {
  detail::JoinScan scan(*this, path, base_of(path, base_relation), {});
  std::vector<std::pair<std::size_t, std::size_t>> where;
  for (const auto& c : columns) where.emplace_back(scan.slot(c.relation), c.column);
  std::map<std::vector<Value>, std::size_t> out;
  std::vector<Value> key(columns.size());
  scan.run_all([&](const detail::JoinScan::Tuple& t) {
    for (std::size_t i = 0; i < where.size(); ++i) key[i] = (*t[where[i].first])[where[i].second];
    ++out[key];
    return true;
  });
  return out;
}

bool Store::any_selected(const std::vector<JoinEdge>& path, const std::vector<ConstraintAtom>& predicate,
                         std::size_t relation, std::span<const Row> row_images) const {
  if (row_images.empty()) return false;
  detail::JoinScan scan(*this, path, relation, predicate);
  std::vector<const Row*> roots;
  roots.reserve(row_images.size());
  for (const auto& r : row_images) roots.push_back(&r);
  const bool exhausted = scan.run_rows(roots, [](const detail::JoinScan::Tuple&) { return false; });
  return !exhausted;
}

}  // namespace hof
