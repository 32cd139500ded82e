#include "hof/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "hof/error.hpp"

namespace hof {

void SynthConfig::validate() const {
  if (updates_per_tuple < 1) throw Error("synth: updates_per_tuple must be at least 1");
  if (!(sum_sigma > 0.0) || !(avg_sigma > 0.0)) throw Error("synth: sigmas must be positive");
}

namespace {

Value scaled(const Value& final_value, double factor) {
  if (const auto* i = std::get_if<std::int64_t>(&final_value))
    return static_cast<std::int64_t>(std::llround(static_cast<double>(*i) * factor));
  return std::get<double>(final_value) * factor;
}

}  // namespace

std::vector<UpdateRecord> synth_stream(const Store& store, const SynthConfig& cfg) {
  cfg.validate();
  const auto& catalog = store.catalog();

  std::vector<RankingCriterion> criteria = catalog.criteria();
  if (cfg.per_column) {
    std::set<ColumnRef> seen;
    std::erase_if(criteria, [&](const RankingCriterion& c) { return !seen.insert(c.column).second; });
  }

  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = cfg.updates_per_tuple;
  std::vector<std::vector<UpdateRecord>> streams;

  for (const auto& crit : criteria) {
    const Table& table = store.table(crit.column.relation);
    const auto& meta = table.meta();
    if (meta.key_columns.empty())
      throw Error("synth: table '" + meta.name + "' has no key columns to address its rows");
    const auto& column = meta.columns[crit.column.column].name;

    for (RowId id = 0; id < table.size(); ++id) {
      const Value& final_value = table.at(id, crit.column.column);
      std::vector<double> factors;
      if (crit.aggregation == Aggregation::Sum) {
        factors = truncated_normal(rng, cfg.sum_mu, cfg.sum_sigma, 0.0, 1.0, n - 1);
        std::sort(factors.begin(), factors.end());
      } else {
        factors = truncated_normal(rng, 0.0, cfg.avg_sigma, -1.0, 1.0, n - 1);
        if (cfg.avg_model == AvgModel::Fluctuate)
          for (auto& g : factors) g += 1.0;
      }

      std::vector<std::pair<std::string, Value>> where;
      for (auto kc : meta.key_columns) where.emplace_back(meta.columns[kc].name, table.at(id, kc));

      auto& stream = streams.emplace_back();
      stream.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        UpdateRecord u;
        u.kind = UpdateKind::Update;
        u.table = meta.name;
        u.set_values.emplace_back(column, i + 1 < n ? scaled(final_value, factors[i]) : final_value);
        u.where_equalities = where;
        stream.push_back(std::move(u));
      }
    }
  }

  std::vector<UpdateRecord> out;
  out.reserve(streams.size() * n);
  for (std::size_t i = 0; i < n; ++i)
    for (auto& s : streams) {
      s[i].seq = out.size() + 1;
      out.push_back(std::move(s[i]));
    }
  return out;
}

}  // namespace hof
