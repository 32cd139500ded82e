"""Hall of Fame query generation and ranking-change detection."""

from ._hof import (
    Catalog,
    Engine,
    HofError,
    Query,
    RankEvent,
    Store,
    aggregate_chain,
    compare_doubling,
    dynamic_score,
    entropy,
    generate_queries,
    load_catalog,
    parse_query,
    quantize,
    synth_stream,
)

__all__ = [
    "Catalog",
    "Engine",
    "HofError",
    "Query",
    "RankEvent",
    "Store",
    "aggregate_chain",
    "compare_doubling",
    "dynamic_score",
    "entropy",
    "generate_queries",
    "load_catalog",
    "parse_query",
    "quantize",
    "synth_stream",
]
