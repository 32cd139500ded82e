#include "hof/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "hof/error.hpp"

namespace hof {

void ScorerConfig::validate() const {
  if (b < 2) throw Error("scorer: b must be at least 2");
  if (b > k) throw Error("scorer: b must not exceed k");
  if (window < 1) throw Error("scorer: window must be at least 1");
  if (groups < 1) throw Error("scorer: groups must be at least 1");
}

// ---------------------------------------------------------------- chains

const ImprovementChain& ChainStore::record(const RankEvent& event, std::size_t window) {
  evict(event.seq, window);
  auto key = std::make_pair(event.query_id, event.entity);
  auto it = chains_.find(key);
  if (it == chains_.end()) it = chains_.emplace(key, ImprovementChain{event.query_id, event.entity, {}}).first;
  it->second.pairs.push_back({event.seq, event.from_rank, event.to_rank});
  return it->second;
}

void ChainStore::evict(std::uint64_t seq, std::size_t window) {
  if (seq < window) return;
  const std::uint64_t oldest_kept = seq - window + 1;
  for (auto it = chains_.begin(); it != chains_.end();) {
    auto& pairs = it->second.pairs;
    pairs.erase(std::remove_if(pairs.begin(), pairs.end(), [&](const RankPair& p) { return p.seq < oldest_kept; }),
                pairs.end());
    it = pairs.empty() ? chains_.erase(it) : std::next(it);
  }
}

const ImprovementChain* ChainStore::find(const std::string& query_id, const Value& entity) const {
  const auto it = chains_.find(std::make_pair(query_id, entity));
  return it == chains_.end() ? nullptr : &it->second;
}

std::vector<RankPair> aggregate_chain(std::span<const RankPair> chain) {
  if (chain.empty()) return {};
  std::vector<RankPair> out{chain.back()};
  for (std::size_t i = chain.size() - 1; i-- > 0;) {
    const RankPair& earlier = chain[i];
    if (out.back().from_rank > earlier.to_rank) break;  // fell back in between
    out.push_back(earlier);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- dynamic score

namespace {

double pair_weight(std::size_t to_rank, double b) {
  if (static_cast<double>(to_rank) <= b) return 1.0;
  return std::log(b) / std::log(static_cast<double>(to_rank));
}

}  // namespace

DynamicScore dynamic_score(std::span<const RankPair> pairs, const ScorerConfig& cfg) {
  if (cfg.b < 2) throw Error("scorer: b must be at least 2");
  const double b = static_cast<double>(cfg.b);
  DynamicScore score;
  for (const auto& p : pairs) {
    if (p.to_rank < 1 || p.from_rank <= p.to_rank || p.from_rank > cfg.k + 1)
      throw Error("invalid rank improvement " + std::to_string(p.from_rank) + " -> " + std::to_string(p.to_rank));
    score.raw += static_cast<double>(p.from_rank - p.to_rank) * pair_weight(p.to_rank, b);
  }
  // Bounds: the single improvements k+1 -> k and k+1 -> 1.
  const double lo = pair_weight(cfg.k, b);
  const double hi = static_cast<double>(cfg.k);
  score.normalized = hi > lo ? std::clamp((score.raw - lo) / (hi - lo), 0.0, 1.0) : 1.0;
  return score;
}

// ---------------------------------------------------------------- entropy

double entropy(std::span<const std::size_t> counts) {
  if (counts.empty()) throw Error("entropy of an empty distribution");
  double total = 0.0;
  for (auto c : counts) {
    if (c == 0) throw Error("entropy: counts must be positive");
    total += static_cast<double>(c);
  }
  double h = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h == 0.0 ? 0.0 : h;  // no -0.0
}

double entropy(const std::map<std::vector<Value>, std::size_t>& counts) {
  std::vector<std::size_t> flat;
  flat.reserve(counts.size());
  for (const auto& [tuple, n] : counts) flat.push_back(n);
  return entropy(flat);
}

// ---------------------------------------------------------------- tradeoffs

Ordering compare_tradeoff(double u, double v, const Considerably& smaller) {
  if (smaller(u, v)) return Ordering::Less;
  if (smaller(v, u)) return Ordering::Greater;
  return Ordering::Equal;
}

Ordering compare_lexicographic(std::span<const double> u, std::span<const double> v, const Considerably& smaller) {
  const std::size_t n = std::min(u.size(), v.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto o = compare_tradeoff(u[i], v[i], smaller);
    if (o != Ordering::Equal) return o;
  }
  return Ordering::Equal;
}

Considerably doubling_predicate() {
  return [](double a, double b) { return 2.0 * a <= b; };
}

Considerably margin_predicate(std::size_t groups) {
  const double margin = 1.0 / (2.0 * static_cast<double>(groups));
  return [margin](double a, double b) { return a + margin < b; };
}

std::size_t quantize(double score, std::size_t groups) {
  if (groups == 0) throw Error("quantize: groups must be at least 1");
  const double clamped = std::clamp(score, 0.0, 1.0);
  const auto bucket = static_cast<std::size_t>(std::floor(clamped * static_cast<double>(groups)));
  return std::min(groups - 1, bucket);
}

bool ranks_above(const ScoredEvent& a, const ScoredEvent& b, std::size_t groups) {
  const auto key = [groups](const ScoredEvent& e) {
    return std::make_tuple(quantize(e.selectivity, groups), quantize(e.dynamic_norm, groups), e.entropy_bits);
  };
  const auto ka = key(a);
  const auto kb = key(b);
  if (ka != kb) return ka > kb;
  // Deterministic tie-breaks: query id, entity, newest first.
  if (a.event.query_id != b.event.query_id) return a.event.query_id < b.event.query_id;
  if (a.event.entity != b.event.entity) return a.event.entity < b.event.entity;
  if (a.event.seq != b.event.seq) return a.event.seq > b.event.seq;
  if (std::tie(a.event.from_rank, a.event.to_rank) != std::tie(b.event.from_rank, b.event.to_rank))
    return std::tie(a.event.from_rank, a.event.to_rank) < std::tie(b.event.from_rank, b.event.to_rank);
  // Same event scored twice: fall back to the unquantized scores so the order stays total.
  return std::tie(a.selectivity, a.dynamic_norm, a.entropy_bits) >
         std::tie(b.selectivity, b.dynamic_norm, b.entropy_bits);
}

std::vector<ScoredEvent> rank_events(std::vector<ScoredEvent> events, const ScorerConfig& cfg) {
  std::stable_sort(events.begin(), events.end(),
                   [&](const ScoredEvent& a, const ScoredEvent& b) { return ranks_above(a, b, cfg.groups); });
  return events;
}

// ---------------------------------------------------------------- scorer

EventScorer::EventScorer(ScorerConfig cfg) : cfg_(cfg) {
  if (cfg_.b < 2) throw Error("scorer: b must be at least 2");
  if (cfg_.window < 1) throw Error("scorer: window must be at least 1");
  if (cfg_.groups < 1) throw Error("scorer: groups must be at least 1");
}

ScoredEvent EventScorer::score(const RankEvent& event, const HofQuery& query, std::string rendering) {
  const auto& chain = chains_.record(event, cfg_.window);
  ScoredEvent out;
  out.event = event;
  out.query_rendering = std::move(rendering);
  out.selectivity = query.scores.selectivity;
  out.entropy_bits = query.scores.entropy_bits;
  out.chain = aggregate_chain(chain.pairs);
  ScorerConfig per_query = cfg_;
  per_query.k = query.k;
  const auto dyn = dynamic_score(out.chain, per_query);
  out.dynamic_raw = dyn.raw;
  out.dynamic_norm = dyn.normalized;
  return out;
}

}  // namespace hof
