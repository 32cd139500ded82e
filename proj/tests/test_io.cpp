#include <gtest/gtest.h>

#include <sstream>

#include "hof/error.hpp"
#include "hof/generator.hpp"
#include "hof/io.hpp"
#include "hof/synth.hpp"
#include "support.hpp"

using namespace hof;
namespace ts = testing_support;

TEST(UpdateFormat, BillionairesLine) {
  const auto line = ts::slurp(ts::source_dir() / "data/billionaires/update.jsonl");
  const auto u = parse_update(line.substr(0, line.find('\n')));
  EXPECT_EQ(u.seq, 1u);
  EXPECT_EQ(u.table, "stockmarket");
  ASSERT_EQ(u.set_values.size(), 1u);
  EXPECT_EQ(std::get<Delta>(u.set_values[0].second).amount, Value{std::int64_t{10}});
  EXPECT_EQ(u.where_equalities, (std::vector<std::pair<std::string, Value>>{{"s_companyid", std::int64_t{8}}}));
  EXPECT_EQ(parse_update(format_update(u)), u);
}

TEST(UpdateFormat, RoundTripsSynthesizedStreams) {
  const auto inst = ts::random_instance(2);
  const auto store = inst.store();
  SynthConfig c;
  c.updates_per_tuple = 3;
  const auto us = synth_stream(store, c);
  std::stringstream buf;
  write_updates(buf, us);
  EXPECT_EQ(read_updates(buf), us);
}

TEST(UpdateFormat, InsertHasNoWhere) {
  UpdateRecord u;
  u.seq = 4;
  u.kind = UpdateKind::Insert;
  u.table = "country";
  u.set_values = {{"co_countryid", Value{std::int64_t{6}}}, {"co_name", Value{"Norway"}}};
  const auto line = format_update(u);
  EXPECT_EQ(line.find("where"), std::string::npos);
  EXPECT_EQ(parse_update(line), u);
}

TEST(UpdateFormat, Rejections) {
  EXPECT_THROW(parse_update("not json"), Error);
  EXPECT_THROW(parse_update("[1]"), Error);
  EXPECT_THROW(parse_update(R"({"seq":1,"kind":"delete","table":"t","set":{"a":1},"where":{"b":1}})"), Error);
  EXPECT_THROW(parse_update(R"({"seq":1,"kind":"update","table":"t","set":{},"where":{"b":1}})"), Error);
  EXPECT_THROW(parse_update(R"({"seq":1,"kind":"update","table":"t","set":{"a":1}})"), Error);
  EXPECT_THROW(parse_update(R"({"seq":-1,"kind":"update","table":"t","set":{"a":1},"where":{"b":1}})"), Error);
  EXPECT_THROW(parse_update(R"({"seq":1,"kind":"update","table":"t","set":{"a":{"delta":"x"}},"where":{"b":1}})"), Error);
}

TEST(UpdateFormat, ReaderReportsLinesAndSkips) {
  const std::string text =
      R"({"seq":1,"kind":"update","table":"t","set":{"a":1},"where":{"b":1}})"
      "\n\n"
      "garbage\n"
      R"({"seq":1,"kind":"update","table":"t","set":{"a":2},"where":{"b":1}})"
      "\n"
      R"({"seq":5,"kind":"update","table":"t","set":{"a":3},"where":{"b":1}})"
      "\n";
  std::istringstream strict(text);
  try {
    read_updates(strict);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream lenient(text);
  std::vector<std::string> warnings;
  const auto us = read_updates(lenient, true, &warnings);
  ASSERT_EQ(us.size(), 2u);
  EXPECT_EQ(us[1].seq, 5u);
  ASSERT_EQ(warnings.size(), 2u);
  EXPECT_EQ(warnings[0].rfind("line 3", 0), 0u);
  EXPECT_EQ(warnings[1].rfind("line 4", 0), 0u);
}

TEST(QueryFormat, RoundTripsGeneratedCatalog) {
  const auto inst = ts::random_instance(6);
  const auto store = inst.store();
  const auto queries = generate_queries(store, {.k = 3, .cnum = 2, .jnum = 1}).queries;
  ASSERT_FALSE(queries.empty());
  std::stringstream buf;
  write_queries(buf, store.catalog(), queries);
  EXPECT_EQ(read_queries(store.catalog(), buf), queries);
}

TEST(QueryFormat, TamperedIdIsRejected) {
  const auto store = ts::billionaires_store();
  const auto queries = generate_queries(store, {.k = 3, .cnum = 1, .jnum = 3}).queries;
  ASSERT_FALSE(queries.empty());
  auto line = format_query(store.catalog(), queries[0]);
  EXPECT_NE(line.find("\"sql\""), std::string::npos);
  const auto pos = line.find("\"k\":3");
  ASSERT_NE(pos, std::string::npos);
  line.replace(pos, 5, "\"k\":4");
  EXPECT_THROW(parse_query(store.catalog(), line), Error);
}

TEST(EventFormat, RoundTrip) {
  ScoredEvent e;
  e.event = {"abc", Value{"Amancio O. Gaona"}, 3, 1, 1};
  e.query_rendering = "SELECT ...";
  e.selectivity = 0.1;
  e.dynamic_raw = 2.0;
  e.dynamic_norm = 1.0 / 3.0;
  e.entropy_bits = 1.3709505944546687;
  e.chain = {{1, 3, 1}};
  const auto back = parse_event(format_event(e));
  EXPECT_EQ(back.event, e.event);
  EXPECT_EQ(back.query_rendering, e.query_rendering);
  EXPECT_EQ(back.selectivity, e.selectivity);
  EXPECT_EQ(back.dynamic_raw, e.dynamic_raw);
  EXPECT_EQ(back.dynamic_norm, e.dynamic_norm);
  EXPECT_EQ(back.entropy_bits, e.entropy_bits);
  EXPECT_EQ(back.chain, e.chain);
  EXPECT_EQ(format_event(back), format_event(e));
  EXPECT_THROW(parse_event(R"({"seq":1,"query_id":"q","entity":"x","from_rank":1,"to_rank":2,)"
                           R"("selectivity":0,"dynamic_raw":0,"dynamic_norm":0,"entropy_bits":0})"),
               Error);
}

TEST(StatsFormat, Fields) {
  const auto line = format_stats({7, 5, 2, 1, 1, 0.5});
  EXPECT_EQ(line, R"({"seq":7,"column_candidates":5,"row_candidates":2,"changed":1,"events":1,"latency_ms":0.5})");
}
