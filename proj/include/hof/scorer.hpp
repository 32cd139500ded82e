#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hof/query.hpp"

namespace hof {

struct ScorerConfig {
  std::size_t b = 5;          // ranks 1..b are undiscounted
  std::size_t k = 20;
  std::size_t window = 1000;  // in updates
  std::size_t groups = 4;     // coarse score groups

  /// Throws hof::Error unless 2 <= b <= k, window >= 1, groups >= 1.
  void validate() const;
};

/// An entity moving from rank `from_rank` up to `to_rank` during update `seq`.
struct RankPair {
  std::uint64_t seq = 0;
  std::size_t from_rank = 0;
  std::size_t to_rank = 0;

  bool operator==(const RankPair&) const = default;
};

struct RankEvent {
  std::string query_id;
  Value entity;
  std::size_t from_rank = 0;
  std::size_t to_rank = 0;
  std::uint64_t seq = 0;

  bool operator==(const RankEvent&) const = default;
};

struct ImprovementChain {
  std::string query_id;
  Value entity;
  std::vector<RankPair> pairs;  // oldest first
};

/// Windowed improvement chains keyed by (query, entity).
class ChainStore {
 public:
  /// Appends the event's pair and drops pairs with seq <= event.seq - window.
  const ImprovementChain& record(const RankEvent& event, std::size_t window);
  /// Drops every pair that fell out of the window ending at `seq`.
  void evict(std::uint64_t seq, std::size_t window);
  const ImprovementChain* find(const std::string& query_id, const Value& entity) const;
  std::size_t size() const { return chains_.size(); }

 private:
  std::map<std::pair<std::string, Value>, ImprovementChain> chains_;
};

/// Backward merge from the newest pair: an earlier pair joins while the later
/// pair starts at or above the rank the earlier one reached.
std::vector<RankPair> aggregate_chain(std::span<const RankPair> chain);

struct DynamicScore {
  double raw = 0.0;
  double normalized = 0.0;
};

/// DCG-style rank-improvement score with min-max normalization between the
/// smallest (k+1 -> k) and largest (k+1 -> 1) single improvements.
DynamicScore dynamic_score(std::span<const RankPair> pairs, const ScorerConfig& cfg);

/// Shannon entropy in bits of the distribution given by positive counts.
double entropy(std::span<const std::size_t> counts);
double entropy(const std::map<std::vector<Value>, std::size_t>& counts);

enum class Ordering { Less, Equal, Greater };

/// "a is considerably smaller than b"
using Considerably = std::function<bool(double a, double b)>;

/// Single-position lexicographic-tradeoff comparison.
Ordering compare_tradeoff(double u, double v, const Considerably& smaller);
/// Left to right, the first position that is not "equal" decides.
Ordering compare_lexicographic(std::span<const double> u, std::span<const double> v, const Considerably& smaller);

/// 2a <= b
Considerably doubling_predicate();
/// a + 1/(2n) < b, for scores normalized to [0, 1]
Considerably margin_predicate(std::size_t groups);

/// Coarse group of a [0, 1] score: min(n - 1, floor(s * n)).
std::size_t quantize(double score, std::size_t groups);

struct ScoredEvent {
  RankEvent event;
  std::string query_rendering;
  double selectivity = 0.0;
  double dynamic_raw = 0.0;
  double dynamic_norm = 0.0;
  double entropy_bits = 0.0;
  std::vector<RankPair> chain;  // the pairs aggregated into the dynamic score
};

/// Strict weak order for event reports: true when `a` ranks above `b`.
bool ranks_above(const ScoredEvent& a, const ScoredEvent& b, std::size_t groups);

std::vector<ScoredEvent> rank_events(std::vector<ScoredEvent> events, const ScorerConfig& cfg);

/// Keeps the improvement chains and attaches scores to detector events.
class EventScorer {
 public:
  explicit EventScorer(ScorerConfig cfg);

  const ScorerConfig& config() const { return cfg_; }
  const ChainStore& chains() const { return chains_; }

  /// Records the event and scores it against its chain. The query's k
  /// overrides cfg.k for normalization.
  ScoredEvent score(const RankEvent& event, const HofQuery& query, std::string rendering);

 private:
  ScorerConfig cfg_;
  ChainStore chains_;
};

}  // namespace hof
