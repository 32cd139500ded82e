#include "hof/io.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

#include "hof/error.hpp"

namespace hof {

using json = nlohmann::ordered_json;

namespace {

json value_to_json(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

Value value_from_json(const json& j, const char* what) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw Error(std::string(what) + " must be a number or string");
}

json parse_object(std::string_view line) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw Error(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("record must be a JSON object");
  return j;
}

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string string_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw Error(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::uint64_t count_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw Error(std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

double real_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw Error(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

template <class F>
void for_each_line(std::istream& in, F&& f) {
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (blank(line)) continue;
    f(line, n);
  }
}

}  // namespace

// ---------------------------------------------------------------- updates

UpdateRecord parse_update(std::string_view line) {
  const json j = parse_object(line);
  UpdateRecord u;
  u.seq = count_field(j, "seq");
  const auto kind = string_field(j, "kind");
  if (kind == "update")
    u.kind = UpdateKind::Update;
  else if (kind == "insert")
    u.kind = UpdateKind::Insert;
  else
    throw Error("unknown update kind '" + kind + "'");
  u.table = string_field(j, "table");
  const auto& set = field(j, "set");
  if (!set.is_object() || set.empty()) throw Error("field 'set' must be a non-empty object");
  for (const auto& [col, v] : set.items()) {
    if (v.is_object()) {
      if (v.size() != 1 || !v.contains("delta")) throw Error("set '" + col + "': expected {\"delta\": number}");
      const auto& d = v.at("delta");
      if (!d.is_number()) throw Error("set '" + col + "': delta must be a number");
      u.set_values.emplace_back(col, Delta{value_from_json(d, "delta")});
    } else {
      u.set_values.emplace_back(col, value_from_json(v, "set value"));
    }
  }
  if (j.contains("where")) {
    const auto& where = j.at("where");
    if (!where.is_object()) throw Error("field 'where' must be an object");
    for (const auto& [col, v] : where.items()) u.where_equalities.emplace_back(col, value_from_json(v, "where value"));
  }
  if (u.kind == UpdateKind::Update && u.where_equalities.empty()) throw Error("update without a where clause");
  return u;
}

std::string format_update(const UpdateRecord& u) {
  json j;
  j["seq"] = u.seq;
  j["kind"] = u.kind == UpdateKind::Insert ? "insert" : "update";
  j["table"] = u.table;
  json set = json::object();
  for (const auto& [col, v] : u.set_values) {
    if (const auto* d = std::get_if<Delta>(&v))
      set[col] = json{{"delta", value_to_json(d->amount)}};
    else
      set[col] = value_to_json(std::get<Value>(v));
  }
  j["set"] = std::move(set);
  if (u.kind == UpdateKind::Update) {
    json where = json::object();
    for (const auto& [col, v] : u.where_equalities) where[col] = value_to_json(v);
    j["where"] = std::move(where);
  }
  return j.dump();
}

std::vector<UpdateRecord> read_updates(std::istream& in, bool skip_malformed, std::vector<std::string>* warnings) {
  std::vector<UpdateRecord> out;
  for_each_line(in, [&](const std::string& line, std::size_t n) {
    try {
      auto u = parse_update(line);
      if (!out.empty() && u.seq <= out.back().seq)
        throw Error("seq " + std::to_string(u.seq) + " does not increase");
      out.push_back(std::move(u));
    } catch (const Error& e) {
      if (!skip_malformed) throw ParseError(e.what(), n);
      if (warnings) warnings->push_back("line " + std::to_string(n) + ": " + e.what());
    }
  });
  return out;
}

void write_updates(std::ostream& out, const std::vector<UpdateRecord>& updates) {
  for (const auto& u : updates) out << format_update(u) << '\n';
}

// ---------------------------------------------------------------- queries

std::string format_query(const SchemaCatalog& catalog, const HofQuery& q) {
  json j;
  j["id"] = q.id;
  j["entity"] = catalog.qualified_name(q.entity);
  json pred = json::array();
  for (const auto& a : q.predicate) {
    json atom;
    atom["kind"] = std::string(to_string(a.kind));
    atom["left"] = catalog.qualified_name(a.left);
    atom["comparator"] = std::string(to_string(a.comparator));
    if (const auto* col = std::get_if<ColumnRef>(&a.right))
      atom["right"] = catalog.qualified_name(*col);
    else
      atom["right"] = value_to_json(std::get<Value>(a.right));
    pred.push_back(std::move(atom));
  }
  j["predicate"] = std::move(pred);
  j["criterion"] = {{"column", catalog.qualified_name(q.criterion.column)},
                    {"aggregation", std::string(to_string(q.criterion.aggregation))},
                    {"direction", std::string(to_string(q.criterion.direction))}};
  json path = json::array();
  for (const auto& e : q.join_path)
    path.push_back({{"from", catalog.qualified_name(e.from)}, {"to", catalog.qualified_name(e.to)}});
  j["join_path"] = std::move(path);
  j["k"] = q.k;
  j["selectivity"] = q.scores.selectivity;
  j["entropy_bits"] = q.scores.entropy_bits;
  j["sql"] = render_sql(catalog, q);
  return j.dump();
}

HofQuery parse_query(const SchemaCatalog& catalog, std::string_view line) {
  const json j = parse_object(line);
  HofQuery q;
  q.entity = catalog.resolve(string_field(j, "entity"));
  const auto& pred = field(j, "predicate");
  if (!pred.is_array()) throw Error("field 'predicate' must be a list");
  for (const auto& a : pred) {
    ConstraintAtom atom;
    atom.kind = parse_atom_kind(string_field(a, "kind"));
    atom.left = catalog.resolve(string_field(a, "left"));
    atom.comparator = parse_comparator(string_field(a, "comparator"));
    const auto& right = field(a, "right");
    if (atom.kind == AtomKind::InterAttribute) {
      if (!right.is_string()) throw Error("inter-attribute right side must be a column");
      atom.right = catalog.resolve(right.get<std::string>());
    } else {
      try {
        atom.right = coerce(value_from_json(right, "atom constant"), catalog.column(atom.left).type);
      } catch (const std::invalid_argument& e) {
        throw Error(std::string("atom constant: ") + e.what());
      }
    }
    q.predicate.push_back(std::move(atom));
  }
  const auto& crit = field(j, "criterion");
  q.criterion.column = catalog.resolve(string_field(crit, "column"));
  q.criterion.aggregation = parse_aggregation(string_field(crit, "aggregation"));
  q.criterion.direction = parse_direction(string_field(crit, "direction"));
  if (q.criterion.direction == Direction::Both) throw Error("query criterion direction must be concrete");
  const auto& path = field(j, "join_path");
  if (!path.is_array()) throw Error("field 'join_path' must be a list");
  for (const auto& e : path)
    q.join_path.push_back({catalog.resolve(string_field(e, "from")), catalog.resolve(string_field(e, "to"))});
  q.k = count_field(j, "k");
  if (q.k < 1) throw Error("k must be at least 1");
  q.scores.selectivity = real_field(j, "selectivity");
  q.scores.entropy_bits = real_field(j, "entropy_bits");
  finalize_query(catalog, q);
  const auto stored = string_field(j, "id");
  if (stored != q.id) throw Error("query id " + stored + " does not match its definition (expected " + q.id + ")");
  return q;
}

std::vector<HofQuery> read_queries(const SchemaCatalog& catalog, std::istream& in) {
  std::vector<HofQuery> out;
  for_each_line(in, [&](const std::string& line, std::size_t n) {
    try {
      out.push_back(parse_query(catalog, line));
    } catch (const Error& e) {
      throw ParseError(e.what(), n);
    }
  });
  return out;
}

void write_queries(std::ostream& out, const SchemaCatalog& catalog, const std::vector<HofQuery>& queries) {
  for (const auto& q : queries) out << format_query(catalog, q) << '\n';
}

// ---------------------------------------------------------------- events

std::string format_event(const ScoredEvent& e) {
  json j;
  j["seq"] = e.event.seq;
  j["query_id"] = e.event.query_id;
  j["query_rendering"] = e.query_rendering;
  j["entity"] = value_to_json(e.event.entity);
  j["from_rank"] = e.event.from_rank;
  j["to_rank"] = e.event.to_rank;
  j["selectivity"] = e.selectivity;
  j["dynamic_raw"] = e.dynamic_raw;
  j["dynamic_norm"] = e.dynamic_norm;
  j["entropy_bits"] = e.entropy_bits;
  json chain = json::array();
  for (const auto& p : e.chain) chain.push_back({p.seq, p.from_rank, p.to_rank});
  j["chain"] = std::move(chain);
  return j.dump();
}

ScoredEvent parse_event(std::string_view line) {
  const json j = parse_object(line);
  ScoredEvent e;
  e.event.seq = count_field(j, "seq");
  e.event.query_id = string_field(j, "query_id");
  e.query_rendering = j.contains("query_rendering") ? string_field(j, "query_rendering") : std::string{};
  e.event.entity = value_from_json(field(j, "entity"), "entity");
  e.event.from_rank = count_field(j, "from_rank");
  e.event.to_rank = count_field(j, "to_rank");
  if (e.event.from_rank <= e.event.to_rank || e.event.to_rank < 1) throw Error("event is not an improvement");
  e.selectivity = real_field(j, "selectivity");
  e.dynamic_raw = real_field(j, "dynamic_raw");
  e.dynamic_norm = real_field(j, "dynamic_norm");
  e.entropy_bits = real_field(j, "entropy_bits");
  if (j.contains("chain")) {
    for (const auto& p : j.at("chain")) {
      if (!p.is_array() || p.size() != 3) throw Error("chain entries must be [seq, from_rank, to_rank]");
      e.chain.push_back({p[0].get<std::uint64_t>(), p[1].get<std::size_t>(), p[2].get<std::size_t>()});
    }
  }
  return e;
}

std::vector<ScoredEvent> read_events(std::istream& in) {
  std::vector<ScoredEvent> out;
  for_each_line(in, [&](const std::string& line, std::size_t n) {
    try {
      out.push_back(parse_event(line));
    } catch (const Error& e) {
      throw ParseError(e.what(), n);
    } catch (const json::exception& e) {
      throw ParseError(e.what(), n);
    }
  });
  return out;
}

std::string format_stats(const UpdateStats& s) {
  json j;
  j["seq"] = s.seq;
  j["column_candidates"] = s.column_candidates;
  j["row_candidates"] = s.row_candidates;
  j["changed"] = s.changed;
  j["events"] = s.events;
  j["latency_ms"] = s.latency_ms;
  return j.dump();
}

}  // namespace hof
