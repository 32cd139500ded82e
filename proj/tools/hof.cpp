// hof: generate Hall of Fame queries, synthesize update streams, run the
// detection pipeline and report ranked events.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hof/catalog.hpp"
#include "hof/detector.hpp"
#include "hof/error.hpp"
#include "hof/generator.hpp"
#include "hof/io.hpp"
#include "hof/scorer.hpp"
#include "hof/store.hpp"
#include "hof/synth.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kInputError = 2;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hof::Error("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hof::Error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hof::Error("cannot write " + path.string());
  return out;
}

hof::SchemaCatalog load_config(const fs::path& path) {
  try {
    return hof::load_catalog(read_file(path));
  } catch (const hof::Error& e) {
    throw hof::Error(path.string() + ": " + e.what());
  }
}

struct Paths {
  std::string config = "catalog.json";
  std::string data = ".";
  std::string queries = "queries.jsonl";
  std::string updates = "updates.jsonl";
  std::string events = "events.jsonl";
  std::string stats = "stats.jsonl";
};

struct Options {
  Paths paths;
  hof::GeneratorConfig gen;
  hof::ScorerConfig scorer;
  hof::SynthConfig synth;
  bool avg_literal = false;
  bool no_filters = false;
  bool skip_malformed = false;
  std::size_t workers = 1;
  std::uint64_t end_seq = 0;
  std::size_t top = 0;
};

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

struct StatsSummary {
  std::vector<double> column, row, changed, events, latency;

  void add(const hof::UpdateStats& s) {
    column.push_back(static_cast<double>(s.column_candidates));
    row.push_back(static_cast<double>(s.row_candidates));
    changed.push_back(static_cast<double>(s.changed));
    events.push_back(static_cast<double>(s.events));
    latency.push_back(s.latency_ms);
  }

  void print(std::ostream& out, std::size_t queries) const {
    char line[256];
    out << "updates                      " << column.size() << '\n';
    if (queries) out << "queries                      " << queries << '\n';
    std::snprintf(line, sizeof line, "mean after column filter     %.2f\n", mean(column));
    out << line;
    std::snprintf(line, sizeof line, "mean queries executed        %.2f\n", mean(row));
    out << line;
    std::snprintf(line, sizeof line, "mean changes detected        %.2f\n", mean(changed));
    out << line;
    std::snprintf(line, sizeof line, "mean events                  %.2f\n", mean(events));
    out << line;
    std::snprintf(line, sizeof line, "latency ms mean / median     %.3f / %.3f\n", mean(latency), median(latency));
    out << line;
  }
};

int cmd_generate(const Options& o) {
  auto catalog = load_config(o.paths.config);
  const auto start = std::chrono::steady_clock::now();
  const auto store = hof::Store::load_directory(std::move(catalog), o.paths.data);
  const auto result = hof::generate_queries(store, o.gen);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto out = open_out(o.paths.queries);
  hof::write_queries(out, store.catalog(), result.queries);
  const auto& s = result.stats;
  std::cout << "queries            " << s.queries << '\n'
            << "combinations       " << s.combinations << '\n'
            << "unpruned candidates " << s.unpruned_candidates << '\n'
            << "evaluated          " << s.evaluated << '\n'
            << "below k            " << s.below_k << '\n'
            << "subset pruned      " << s.subset_pruned << '\n'
            << "join pruned        " << s.join_pruned << '\n'
            << "seconds            " << secs << '\n';
  return 0;
}

int cmd_synth(Options o) {
  auto catalog = load_config(o.paths.config);
  const auto store = hof::Store::load_directory(std::move(catalog), o.paths.data);
  o.synth.avg_model = o.avg_literal ? hof::AvgModel::Literal : hof::AvgModel::Fluctuate;
  const auto stream = hof::synth_stream(store, o.synth);
  auto out = open_out(o.paths.updates);
  hof::write_updates(out, stream);
  std::cout << "updates " << stream.size() << '\n';
  return 0;
}

int cmd_run(Options o) {
  auto catalog = load_config(o.paths.config);
  auto store = hof::Store::load_directory(std::move(catalog), o.paths.data);
  std::vector<hof::HofQuery> queries;
  {
    auto in = open_in(o.paths.queries);
    try {
      queries = hof::read_queries(store.catalog(), in);
    } catch (const hof::Error& e) {
      throw hof::Error(o.paths.queries + ": " + e.what());
    }
  }
  std::vector<hof::UpdateRecord> updates;
  {
    auto in = open_in(o.paths.updates);
    std::vector<std::string> warnings;
    try {
      updates = hof::read_updates(in, o.skip_malformed, &warnings);
    } catch (const hof::Error& e) {
      throw hof::Error(o.paths.updates + ": " + e.what());
    }
    for (const auto& w : warnings) std::cerr << "warning: " << o.paths.updates << ": " << w << " (skipped)\n";
  }

  // Normalization bounds need b <= k for every query.
  for (const auto& q : queries) o.scorer.k = std::min(o.scorer.k, q.k);
  o.scorer.validate();

  std::map<std::string, std::size_t> by_id;
  std::vector<std::string> renderings;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    by_id.emplace(queries[i].id, i);
    renderings.push_back(hof::render_sql(store.catalog(), queries[i]));
  }

  hof::Engine engine(std::move(store), queries, {!o.no_filters, o.workers});
  hof::EventScorer scorer(o.scorer);
  auto events_out = open_out(o.paths.events);
  auto stats_out = open_out(o.paths.stats);
  StatsSummary summary;
  std::size_t total_events = 0;

  for (const auto& u : updates) {
    hof::DetectResult r;
    try {
      r = engine.detect(u);
    } catch (const hof::Error& e) {
      if (!o.skip_malformed) throw;
      std::cerr << "warning: update " << u.seq << ": " << e.what() << " (skipped)\n";
      continue;
    }
    for (const auto& ev : r.events) {
      const auto q = by_id.at(ev.query_id);
      events_out << hof::format_event(scorer.score(ev, engine.queries()[q], renderings[q])) << '\n';
    }
    total_events += r.events.size();
    stats_out << hof::format_stats(r.stats) << '\n';
    summary.add(r.stats);
  }
  summary.print(std::cout, queries.size());
  std::cout << "events                       " << total_events << '\n';
  return 0;
}

int cmd_rank(const Options& o) {
  auto in = open_in(o.paths.events);
  std::vector<hof::ScoredEvent> events;
  try {
    events = hof::read_events(in);
  } catch (const hof::Error& e) {
    throw hof::Error(o.paths.events + ": " + e.what());
  }
  std::uint64_t end = o.end_seq;
  if (end == 0)
    for (const auto& e : events) end = std::max(end, e.event.seq);
  const std::uint64_t begin = end >= o.scorer.window ? end - o.scorer.window : 0;

  // Latest event per (query, entity) inside (end - window, end].
  std::map<std::pair<std::string, hof::Value>, hof::ScoredEvent> latest;
  for (auto& e : events) {
    if (e.event.seq <= begin || e.event.seq > end) continue;
    auto key = std::make_pair(e.event.query_id, e.event.entity);
    auto it = latest.find(key);
    if (it == latest.end())
      latest.emplace(std::move(key), std::move(e));
    else if (e.event.seq >= it->second.event.seq)
      it->second = std::move(e);
  }
  std::vector<hof::ScoredEvent> window;
  for (auto& [key, e] : latest) window.push_back(std::move(e));
  const auto ranked = hof::rank_events(std::move(window), o.scorer);

  const std::size_t shown = o.top ? std::min(o.top, ranked.size()) : ranked.size();
  std::cout << "# window (" << begin << ", " << end << "], " << ranked.size() << " events\n";
  std::cout << "rank\tseq\tquery_id\tentity\tfrom\tto\tselectivity\tdynamic\tentropy\tquery\n";
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& e = ranked[i];
    char scores[96];
    std::snprintf(scores, sizeof scores, "%.4f\t%.4f\t%.4f", e.selectivity, e.dynamic_norm, e.entropy_bits);
    std::cout << i + 1 << '\t' << e.event.seq << '\t' << e.event.query_id << '\t' << hof::format_value(e.event.entity)
              << '\t' << e.event.from_rank << '\t' << e.event.to_rank << '\t' << scores << '\t' << e.query_rendering
              << '\n';
  }
  return 0;
}

int cmd_stats(const Options& o) {
  auto in = open_in(o.paths.stats);
  StatsSummary summary;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      hof::UpdateStats s;
      s.seq = j.at("seq").get<std::uint64_t>();
      s.column_candidates = j.at("column_candidates").get<std::size_t>();
      s.row_candidates = j.at("row_candidates").get<std::size_t>();
      s.changed = j.at("changed").get<std::size_t>();
      s.events = j.at("events").get<std::size_t>();
      s.latency_ms = j.at("latency_ms").get<double>();
      summary.add(s);
    } catch (const nlohmann::json::exception& e) {
      throw hof::Error(o.paths.stats + ": line " + std::to_string(n) + ": " + e.what());
    }
  }
  summary.print(std::cout, 0);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hall of Fame query generation and ranking-change event detection"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.paths.config, "Schema annotation (JSON)")->envname("HOF_CONFIG");
    sub->add_option("--data", o.paths.data, "Directory holding <relation>.csv")->envname("HOF_DATA");
  };

  auto* gen = app.add_subcommand("generate", "Enumerate Hall of Fame queries");
  add_config(gen);
  gen->add_option("--out,--queries", o.paths.queries, "Query catalog to write")->envname("HOF_QUERIES");
  gen->add_option("--k", o.gen.k, "Ranking size")->envname("HOF_K")->check(CLI::PositiveNumber);
  gen->add_option("--cnum", o.gen.cnum, "Max constraint atoms per predicate")->envname("HOF_CNUM");
  gen->add_option("--jnum", o.gen.jnum, "Max joins per query")->envname("HOF_JNUM");

  auto* syn = app.add_subcommand("synth", "Synthesize an update stream from the loaded data");
  add_config(syn);
  syn->add_option("--out,--updates", o.paths.updates, "Update stream to write")->envname("HOF_UPDATES");
  syn->add_option("--seed", o.synth.seed, "Random seed")->envname("HOF_SEED");
  syn->add_option("--updates-per-tuple", o.synth.updates_per_tuple, "Updates per row and criterion")
      ->envname("HOF_UPDATES_PER_TUPLE")
      ->check(CLI::PositiveNumber);
  syn->add_flag("--avg-literal", o.avg_literal, "Avg model as final * g instead of final * (1 + g)");
  syn->add_flag("--per-column", o.synth.per_column, "One stream per criterion column, not per concrete criterion");

  auto* run = app.add_subcommand("run", "Stream updates through detection and scoring");
  add_config(run);
  run->add_option("--queries", o.paths.queries, "Query catalog")->envname("HOF_QUERIES");
  run->add_option("--updates", o.paths.updates, "Update stream")->envname("HOF_UPDATES");
  run->add_option("--events", o.paths.events, "Event log to write")->envname("HOF_EVENTS");
  run->add_option("--stats", o.paths.stats, "Per-update stats to write")->envname("HOF_STATS");
  run->add_option("--b", o.scorer.b, "Undiscounted rank zone")->envname("HOF_B");
  run->add_option("--window", o.scorer.window, "Chain window in updates")->envname("HOF_WINDOW");
  run->add_option("--workers", o.workers, "Re-evaluation threads")->envname("HOF_WORKERS")->check(CLI::PositiveNumber);
  run->add_flag("--no-filters", o.no_filters, "Re-evaluate every query on every update")->envname("HOF_NO_FILTERS");
  run->add_flag("--skip-malformed", o.skip_malformed, "Warn and skip bad update lines instead of aborting");

  auto* rank = app.add_subcommand("rank", "Order the events of one window");
  rank->add_option("--events", o.paths.events, "Event log")->envname("HOF_EVENTS");
  rank->add_option("--end", o.end_seq, "Last update of the window (default: last logged)");
  rank->add_option("--window", o.scorer.window, "Window size in updates")->envname("HOF_WINDOW");
  rank->add_option("--groups", o.scorer.groups, "Coarse score groups")->envname("HOF_GROUPS")->check(CLI::PositiveNumber);
  rank->add_option("--top", o.top, "Show only the first N events");

  auto* stats = app.add_subcommand("stats", "Summarize per-update stats");
  stats->add_option("--stats", o.paths.stats, "Stats file written by run")->envname("HOF_STATS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (*gen) return cmd_generate(o);
    if (*syn) return cmd_synth(o);
    if (*run) return cmd_run(o);
    if (*rank) return cmd_rank(o);
    if (*stats) return cmd_stats(o);
  } catch (const hof::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
