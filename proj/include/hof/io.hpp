#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hof/catalog.hpp"
#include "hof/detector.hpp"
#include "hof/query.hpp"
#include "hof/scorer.hpp"
#include "hof/store.hpp"

namespace hof {

// One JSON object per line for update streams, query catalogs, event logs and
// per-update stats. Readers skip blank lines and report 1-based line numbers.

UpdateRecord parse_update(std::string_view line);
std::string format_update(const UpdateRecord& u);
/// Sequence numbers must strictly increase. With `skip_malformed`, bad lines
/// are dropped and described in `warnings` instead of throwing.
std::vector<UpdateRecord> read_updates(std::istream& in, bool skip_malformed = false,
                                       std::vector<std::string>* warnings = nullptr);
void write_updates(std::ostream& out, const std::vector<UpdateRecord>& updates);

/// The stored id must match the id recomputed against `catalog`.
HofQuery parse_query(const SchemaCatalog& catalog, std::string_view line);
std::string format_query(const SchemaCatalog& catalog, const HofQuery& q);
std::vector<HofQuery> read_queries(const SchemaCatalog& catalog, std::istream& in);
void write_queries(std::ostream& out, const SchemaCatalog& catalog, const std::vector<HofQuery>& queries);

ScoredEvent parse_event(std::string_view line);
std::string format_event(const ScoredEvent& e);
std::vector<ScoredEvent> read_events(std::istream& in);

std::string format_stats(const UpdateStats& s);

}  // namespace hof
