#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "hof/store.hpp"

namespace hof {

enum class AvgModel {
  Fluctuate,  // final * (1 + g): values hover around the final value
  Literal,    // final * g
};

struct SynthConfig {
  std::size_t updates_per_tuple = 10;
  double sum_mu = 0.5;
  double sum_sigma = 0.2;
  double avg_sigma = 0.1;
  std::uint64_t seed = 0;
  AvgModel avg_model = AvgModel::Fluctuate;
  /// One stream per (row, column) instead of one per (row, concrete criterion).
  bool per_column = false;

  void validate() const;
};

/// Draws from Normal(mu, sigma) until `count` values fall strictly inside
/// (lo, hi).
template <class Rng>
std::vector<double> truncated_normal(Rng& rng, double mu, double sigma, double lo, double hi, std::size_t count) {
  std::normal_distribution<double> dist(mu, sigma);
  std::vector<double> out;
  out.reserve(count);
  while (out.size() < count) {
    const double g = dist(rng);
    if (g > lo && g < hi) out.push_back(g);
  }
  return out;
}

/// Update stream that walks every criterion cell of every keyed row towards
/// its current value: sum criteria grow steadily, avg criteria fluctuate, and
/// the last update restores the exact value. Streams are interleaved
/// round-robin and numbered from 1.
std::vector<UpdateRecord> synth_stream(const Store& store, const SynthConfig& cfg);

}  // namespace hof
