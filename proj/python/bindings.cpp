#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hof/catalog.hpp"
#include "hof/detector.hpp"
#include "hof/error.hpp"
#include "hof/generator.hpp"
#include "hof/io.hpp"
#include "hof/scorer.hpp"
#include "hof/store.hpp"
#include "hof/synth.hpp"

namespace py = pybind11;

namespace {

py::dict stats_dict(const hof::GenerationStats& s) {
  py::dict d;
  d["queries"] = s.queries;
  d["combinations"] = s.combinations;
  d["evaluated"] = s.evaluated;
  d["below_k"] = s.below_k;
  d["subset_pruned"] = s.subset_pruned;
  d["join_pruned"] = s.join_pruned;
  d["unpruned_candidates"] = s.unpruned_candidates;
  return d;
}

py::dict update_stats_dict(const hof::UpdateStats& s) {
  py::dict d;
  d["seq"] = s.seq;
  d["column_candidates"] = s.column_candidates;
  d["row_candidates"] = s.row_candidates;
  d["changed"] = s.changed;
  d["events"] = s.events;
  d["latency_ms"] = s.latency_ms;
  return d;
}

std::vector<hof::RankPair> to_pairs(const std::vector<std::pair<std::size_t, std::size_t>>& ranks) {
  std::vector<hof::RankPair> pairs;
  for (std::size_t i = 0; i < ranks.size(); ++i) pairs.push_back({i + 1, ranks[i].first, ranks[i].second});
  return pairs;
}

}  // namespace

PYBIND11_MODULE(_hof, m) {
  m.doc() = "Hall of Fame query generation and ranking-change detection";

  py::register_exception<hof::Error>(m, "HofError", PyExc_ValueError);

  py::class_<hof::SchemaCatalog>(m, "Catalog")
      .def_property_readonly("relations",
                             [](const hof::SchemaCatalog& c) {
                               std::vector<std::string> names;
                               for (const auto& r : c.relations) names.push_back(r.name);
                               return names;
                             })
      .def_property_readonly("criteria_count", [](const hof::SchemaCatalog& c) { return c.criteria().size(); })
      .def("serialize", &hof::serialize_catalog)
      .def("join_path",
           [](const hof::SchemaCatalog& c, const std::vector<std::string>& names, std::size_t jnum)
               -> std::optional<std::vector<std::pair<std::string, std::string>>> {
             std::set<std::size_t> needed;
             for (const auto& n : names) {
               const auto r = c.find_relation(n);
               if (!r) throw hof::Error("unknown relation '" + n + "'");
               needed.insert(*r);
             }
             const auto path = hof::join_path(c, needed, jnum);
             if (!path) return std::nullopt;
             std::vector<std::pair<std::string, std::string>> out;
             for (const auto& e : *path) out.emplace_back(c.qualified_name(e.from), c.qualified_name(e.to));
             return out;
           },
           py::arg("relations"), py::arg("jnum") = 3);

  m.def("load_catalog", &hof::load_catalog, py::arg("config_text"));

  py::class_<hof::Store>(m, "Store")
      .def_static("load_directory", &hof::Store::load_directory, py::arg("catalog"), py::arg("directory"))
      .def_property_readonly("catalog", &hof::Store::catalog, py::return_value_policy::copy)
      .def("row_count", [](const hof::Store& s, const std::string& table) {
        return s.table(s.relation_of(table)).size();
      })
      .def("evaluate", [](const hof::Store& s, const hof::HofQuery& q) {
        std::vector<std::pair<hof::Value, double>> out;
        for (const auto& e : s.evaluate_hof(q).entries) out.emplace_back(e.entity, e.aggregate);
        return out;
      })
      .def("apply_update", [](hof::Store& s, const std::string& line) { return s.apply_update(hof::parse_update(line)); });

  py::class_<hof::HofQuery>(m, "Query")
      .def_readonly("id", &hof::HofQuery::id)
      .def_readonly("k", &hof::HofQuery::k)
      .def_property_readonly("selectivity", [](const hof::HofQuery& q) { return q.scores.selectivity; })
      .def_property_readonly("entropy_bits", [](const hof::HofQuery& q) { return q.scores.entropy_bits; })
      .def_property_readonly("atom_count", [](const hof::HofQuery& q) { return q.predicate.size(); })
      .def_property_readonly("join_count", [](const hof::HofQuery& q) { return q.join_path.size(); })
      .def("sql", [](const hof::HofQuery& q, const hof::SchemaCatalog& c) { return hof::render_sql(c, q); })
      .def("to_json", [](const hof::HofQuery& q, const hof::SchemaCatalog& c) { return hof::format_query(c, q); });

  m.def("parse_query", &hof::parse_query, py::arg("catalog"), py::arg("line"));

  m.def(
      "generate_queries",
      [](const hof::Store& store, std::size_t k, std::size_t cnum, std::size_t jnum) {
        auto result = hof::generate_queries(store, {k, cnum, jnum, true});
        return py::make_tuple(result.queries, stats_dict(result.stats));
      },
      py::arg("store"), py::arg("k") = 20, py::arg("cnum") = 3, py::arg("jnum") = 3,
      "Returns (queries, stats).");

  py::class_<hof::RankEvent>(m, "RankEvent")
      .def_readonly("query_id", &hof::RankEvent::query_id)
      .def_readonly("entity", &hof::RankEvent::entity)
      .def_readonly("from_rank", &hof::RankEvent::from_rank)
      .def_readonly("to_rank", &hof::RankEvent::to_rank)
      .def_readonly("seq", &hof::RankEvent::seq)
      .def("__repr__", [](const hof::RankEvent& e) {
        return "RankEvent(" + e.query_id + ", " + hof::format_value(e.entity) + ", " + std::to_string(e.from_rank) +
               " -> " + std::to_string(e.to_rank) + ")";
      });

  py::class_<hof::Engine>(m, "Engine")
      .def(py::init([](const hof::Store& store, std::vector<hof::HofQuery> queries, bool filters, std::size_t workers) {
             return hof::Engine(store, std::move(queries), {filters, workers});
           }),
           py::arg("store"), py::arg("queries"), py::arg("filters") = true, py::arg("workers") = 1)
      .def(
          "detect",
          [](hof::Engine& e, const std::string& line) {
            auto r = e.detect(hof::parse_update(line));
            return py::make_tuple(r.events, update_stats_dict(r.stats));
          },
          py::arg("update_json"), "Applies one update line; returns (events, stats).")
      .def("ranking", [](const hof::Engine& e, std::size_t i) {
        std::vector<std::pair<hof::Value, double>> out;
        for (const auto& entry : e.ranking(i).entries) out.emplace_back(entry.entity, entry.aggregate);
        return out;
      })
      .def_property_readonly("queries", &hof::Engine::queries);

  m.def(
      "synth_stream",
      [](const hof::Store& store, std::uint64_t seed, std::size_t updates_per_tuple, bool avg_literal) {
        hof::SynthConfig cfg;
        cfg.seed = seed;
        cfg.updates_per_tuple = updates_per_tuple;
        cfg.avg_model = avg_literal ? hof::AvgModel::Literal : hof::AvgModel::Fluctuate;
        std::vector<std::string> lines;
        for (const auto& u : hof::synth_stream(store, cfg)) lines.push_back(hof::format_update(u));
        return lines;
      },
      py::arg("store"), py::arg("seed") = 0, py::arg("updates_per_tuple") = 10, py::arg("avg_literal") = false,
      "Update stream as JSON lines.");

  m.def(
      "dynamic_score",
      [](const std::vector<std::pair<std::size_t, std::size_t>>& ranks, std::size_t k, std::size_t b) {
        hof::ScorerConfig cfg;
        cfg.k = k;
        cfg.b = b;
        const auto s = hof::dynamic_score(to_pairs(ranks), cfg);
        return py::make_tuple(s.raw, s.normalized);
      },
      py::arg("pairs"), py::arg("k") = 20, py::arg("b") = 5, "pairs: [(from_rank, to_rank), ...]");

  m.def(
      "aggregate_chain",
      [](const std::vector<std::pair<std::size_t, std::size_t>>& ranks) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& p : hof::aggregate_chain(to_pairs(ranks))) out.emplace_back(p.from_rank, p.to_rank);
        return out;
      },
      py::arg("pairs"));

  m.def("entropy", [](const std::vector<std::size_t>& counts) { return hof::entropy(counts); }, py::arg("counts"));
  m.def("quantize", &hof::quantize, py::arg("score"), py::arg("groups") = 4);
  m.def(
      "compare_doubling",
      [](const std::vector<double>& u, const std::vector<double>& v) {
        switch (hof::compare_lexicographic(u, v, hof::doubling_predicate())) {
          case hof::Ordering::Less: return -1;
          case hof::Ordering::Greater: return 1;
          default: return 0;
        }
      },
      py::arg("u"), py::arg("v"), "Lexicographic tradeoff with 2a <= b as 'considerably smaller'.");
}
