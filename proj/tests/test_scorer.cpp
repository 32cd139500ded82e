#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hof/error.hpp"
#include "hof/scorer.hpp"

using namespace hof;

namespace {

ScorerConfig cfg(std::size_t k, std::size_t b) {
  ScorerConfig c;
  c.k = k;
  c.b = b;
  return c;
}

DynamicScore single(std::size_t from, std::size_t to, const ScorerConfig& c) {
  const RankPair p{1, from, to};
  return dynamic_score(std::span<const RankPair>(&p, 1), c);
}

ScoredEvent scored(std::string qid, std::string entity, double sel, double dyn, double ent, std::uint64_t seq = 1) {
  ScoredEvent e;
  e.event = {std::move(qid), Value{std::move(entity)}, 2, 1, seq};
  e.selectivity = sel;
  e.dynamic_norm = dyn;
  e.entropy_bits = ent;
  return e;
}

}  // namespace

TEST(ScorerConfig, Validation) {
  EXPECT_NO_THROW(ScorerConfig{}.validate());
  EXPECT_THROW(cfg(20, 1).validate(), Error);
  EXPECT_THROW(cfg(4, 5).validate(), Error);
  auto c = cfg(20, 5);
  c.window = 0;
  EXPECT_THROW(c.validate(), Error);
  c = cfg(20, 5);
  c.groups = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(DynamicScore, Bounds) {
  const auto c = cfg(20, 5);
  const auto top = single(21, 1, c);
  EXPECT_NEAR(top.raw, 20.0, 1e-12);
  EXPECT_NEAR(top.normalized, 1.0, 1e-12);
  const auto bottom = single(21, 20, c);
  EXPECT_NEAR(bottom.raw, std::log(5.0) / std::log(20.0), 1e-12);
  EXPECT_NEAR(bottom.raw, 0.537244, 1e-6);
  EXPECT_NEAR(bottom.normalized, 0.0, 1e-12);
}

TEST(DynamicScore, DeepRankExample) {
  EXPECT_NEAR(single(84, 65, cfg(100, 10)).raw, 19.0 / std::log10(65.0), 1e-12);
  EXPECT_NEAR(single(84, 65, cfg(100, 10)).raw, 10.4804, 1e-4);
}

TEST(DynamicScore, RejectsIllegalPairs) {
  const auto c = cfg(20, 5);
  EXPECT_THROW(single(5, 5, c), Error);
  EXPECT_THROW(single(5, 7, c), Error);
  EXPECT_THROW(single(3, 0, c), Error);
}

TEST(DynamicScore, Monotone) {
  const auto c = cfg(20, 5);
  for (std::size_t to = 1; to <= 20; ++to) {
    double last = -1;
    for (std::size_t from = to + 1; from <= 21; ++from) {
      const auto s = single(from, to, c);
      EXPECT_GT(s.raw, last);
      EXPECT_GE(s.normalized, 0.0);
      EXPECT_LE(s.normalized, 1.0);
      last = s.raw;
    }
    if (to > 1) EXPECT_GE(single(21, to - 1, c).raw, single(21, to, c).raw);
  }
}

TEST(DynamicScore, MultiPairClampsToOne) {
  const std::vector<RankPair> chain = {{1, 21, 1}, {2, 21, 1}};
  const auto s = dynamic_score(chain, cfg(20, 5));
  EXPECT_NEAR(s.raw, 40.0, 1e-12);
  EXPECT_EQ(s.normalized, 1.0);
}

TEST(AggregateChain, Examples) {
  const std::vector<RankPair> fell_back = {{1, 100, 75}, {2, 84, 65}};
  EXPECT_EQ(aggregate_chain(fell_back), (std::vector<RankPair>{{2, 84, 65}}));
  const std::vector<RankPair> seamless = {{1, 100, 84}, {2, 84, 65}};
  EXPECT_EQ(aggregate_chain(seamless), seamless);
  const std::vector<RankPair> one = {{3, 9, 4}};
  EXPECT_EQ(aggregate_chain(one), one);
  // the break stops the walk even if older pairs would connect
  const std::vector<RankPair> broken = {{1, 50, 40}, {2, 40, 30}, {3, 35, 20}};
  EXPECT_EQ(aggregate_chain(broken), (std::vector<RankPair>{{3, 35, 20}}));
}

TEST(AggregateChain, SuffixWithAtLeastTheLatestScore) {
  std::mt19937_64 rng(3);
  const auto c = cfg(100, 5);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<RankPair> chain;
    for (std::uint64_t i = 0, n = 1 + rng() % 6; i < n; ++i) {
      const std::size_t to = 1 + rng() % 99;
      chain.push_back({i + 1, to + 1 + rng() % (101 - to), to});
    }
    const auto agg = aggregate_chain(chain);
    ASSERT_FALSE(agg.empty());
    ASSERT_TRUE(std::equal(agg.begin(), agg.end(), chain.end() - static_cast<std::ptrdiff_t>(agg.size())));
    const RankPair last = chain.back();
    ASSERT_GE(dynamic_score(agg, c).raw, dynamic_score(std::span<const RankPair>(&last, 1), c).raw);
  }
}

TEST(ChainStore, RecordAndEvict) {
  ChainStore store;
  const auto& chain = store.record({"q", Value{"e2"}, 100, 75, 10}, 1000);
  EXPECT_EQ(chain.pairs.size(), 1u);
  store.record({"q", Value{"e2"}, 84, 65, 500}, 1000);
  ASSERT_NE(store.find("q", Value{"e2"}), nullptr);
  EXPECT_EQ(store.find("q", Value{"e2"})->pairs.size(), 2u);
  // seq 10 leaves the window (1010 - 1000, 1010]
  store.record({"q", Value{"e1"}, 3, 2, 1010}, 1000);
  EXPECT_EQ(store.find("q", Value{"e2"})->pairs.size(), 1u);
  EXPECT_EQ(store.size(), 2u);
  store.evict(2009, 1000);
  EXPECT_EQ(store.size(), 1u);
  store.evict(2010, 1000);
  EXPECT_EQ(store.size(), 0u);
  EXPECT_EQ(store.find("q", Value{"e1"}), nullptr);
}

TEST(Entropy, Examples) {
  const std::vector<std::size_t> abc = {3, 1, 1};
  EXPECT_NEAR(entropy(abc), -(0.6 * std::log2(0.6) + 0.4 * std::log2(0.2)), 1e-12);
  EXPECT_NEAR(entropy(abc), 1.37095, 1e-5);
  const std::vector<std::size_t> one = {7};
  EXPECT_EQ(entropy(one), 0.0);
  EXPECT_FALSE(std::signbit(entropy(one)));
  const std::vector<std::size_t> uniform = {2, 2, 2, 2};
  EXPECT_NEAR(entropy(uniform), 2.0, 1e-12);
  EXPECT_THROW(entropy(std::vector<std::size_t>{}), Error);
  EXPECT_THROW(entropy(std::vector<std::size_t>{1, 0}), Error);
  const std::map<std::vector<Value>, std::size_t> keyed = {{{"a"}, 3}, {{"b"}, 1}, {{"c"}, 1}};
  EXPECT_EQ(entropy(keyed), entropy(abc));
}

TEST(Entropy, MaximalExactlyWhenUniform) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::size_t> counts(1 + rng() % 8);
    for (auto& c : counts) c = 1 + rng() % 5;
    const double h = entropy(counts);
    const double max = std::log2(static_cast<double>(counts.size()));
    const bool uniform = std::all_of(counts.begin(), counts.end(), [&](auto c) { return c == counts[0]; });
    EXPECT_LE(h, max + 1e-12);
    if (uniform) EXPECT_NEAR(h, max, 1e-12);
    else EXPECT_LT(h, max - 1e-9);
  }
}

TEST(Tradeoff, DoublingExamples) {
  const auto dbl = doubling_predicate();
  const std::vector<double> a = {7, 3, 6}, b = {3, 8, 4};
  EXPECT_EQ(compare_lexicographic(a, b, dbl), Ordering::Greater);
  EXPECT_EQ(compare_lexicographic(b, a, dbl), Ordering::Less);
  const std::vector<double> c = {7, 2, 6}, d = {5, 6, 2};
  EXPECT_EQ(compare_lexicographic(c, d, dbl), Ordering::Less);
  EXPECT_EQ(compare_tradeoff(5, 5, dbl), Ordering::Equal);
  EXPECT_EQ(compare_tradeoff(7, 5, dbl), Ordering::Equal);
}

TEST(Tradeoff, MarginPredicate) {
  const auto m = margin_predicate(4);  // 1/8 margin
  EXPECT_EQ(compare_tradeoff(0.5, 0.6, m), Ordering::Equal);
  EXPECT_EQ(compare_tradeoff(0.5, 0.7, m), Ordering::Less);
  EXPECT_EQ(compare_tradeoff(0.9, 0.7, m), Ordering::Greater);
}

TEST(Quantize, Examples) {
  EXPECT_EQ(quantize(0.9, 4), 3u);
  EXPECT_EQ(quantize(0.85, 4), 3u);
  EXPECT_EQ(quantize(0.2, 4), 0u);
  EXPECT_EQ(quantize(0.7, 4), 2u);
  EXPECT_EQ(quantize(0.5, 4), 2u);
  EXPECT_EQ(quantize(0.8, 4), 3u);
  EXPECT_EQ(quantize(1.0, 4), 3u);
  EXPECT_EQ(quantize(0.0, 4), 0u);
  EXPECT_EQ(quantize(0.99, 1), 0u);
  EXPECT_THROW(quantize(0.5, 0), Error);
}

TEST(RankEvents, Examples) {
  const auto c = ScorerConfig{};
  const auto a = scored("qa", "A", 0.9, 0.2, 0);
  const auto b = scored("qb", "B", 0.85, 0.7, 0);
  auto out = rank_events({a, b}, c);
  EXPECT_EQ(out[0].event.query_id, "qb");
  const auto low = scored("qa", "A", 0.5, 1.0, 9);
  const auto high = scored("qb", "B", 0.8, 0.0, 0);
  out = rank_events({low, high}, c);
  EXPECT_EQ(out[0].event.query_id, "qb");
  // same buckets: raw entropy decides, then query id
  out = rank_events({scored("qz", "A", 0.9, 0.9, 1), scored("qy", "A", 0.9, 0.9, 2), scored("qx", "A", 0.9, 0.9, 1)}, c);
  EXPECT_EQ(out[0].event.query_id, "qy");
  EXPECT_EQ(out[1].event.query_id, "qx");
}

TEST(RankEvents, BucketPreservingScalingKeepsOrder) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.51, 0.74);  // bucket 2 of 4, before and after scaling by 0.999
  std::vector<ScoredEvent> events;
  for (int i = 0; i < 50; ++i)
    events.push_back(scored("q" + std::to_string(i % 7), "e" + std::to_string(i), u(rng), u(rng), u(rng)));
  auto scaled = events;
  for (auto& e : scaled) e.selectivity *= 0.999;
  const auto a = rank_events(events, ScorerConfig{});
  const auto b = rank_events(scaled, ScorerConfig{});
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].event, b[i].event);
}

TEST(EventScorer, UsesQueryKAndChains) {
  EventScorer scorer(cfg(20, 5));
  HofQuery q;
  q.id = "q";
  q.k = 3;
  q.scores = {0.4, 1.5};
  const auto s = scorer.score({"q", Value{"Gaona"}, 4, 1, 1}, q, "sql");
  EXPECT_NEAR(s.dynamic_raw, 3.0, 1e-12);
  EXPECT_NEAR(s.dynamic_norm, 1.0, 1e-12);
  EXPECT_EQ(s.selectivity, 0.4);
  EXPECT_EQ(s.entropy_bits, 1.5);
  const auto t = scorer.score({"q", Value{"Gaona"}, 4, 1, 2}, q, "sql");
  EXPECT_EQ(t.chain.size(), 1u);  // rank 1 -> fell to 4 in between
  EXPECT_EQ(scorer.chains().find("q", Value{"Gaona"})->pairs.size(), 2u);
  EXPECT_THROW(EventScorer(cfg(20, 1)), Error);
}
