#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctxcomp/engine.hpp"
#include "ctxcomp/serialization.hpp"

namespace ctxcomp {

/// Pooled over every successful step of every conversation in the run.
struct RunTotals {
    int conversations = 0;
    int steps = 0;
    int failed_steps = 0;
    double mean_ratio = 0.0;
    double mean_token_reduction = 0.0;
    double mean_l_final = 0.0;
    double p50_latency_ns = 0.0;
    double p95_latency_ns = 0.0;
};

/// Full record of one replay run: exact config, per-conversation results,
/// pooled totals (recomputable from the per-conversation aggregates).
struct RunReport {
    std::string dataset;
    EngineConfig config_snapshot;
    std::vector<ReplayResult> per_conversation;
    RunTotals totals;
    std::string tool_version;
    std::int64_t seed = 0;
};

RunReport make_run_report(const std::string& dataset, const EngineConfig& cfg,
                          std::vector<ReplayResult> replays);

ojson run_report_to_json(const RunReport& report);

/// Human summary: one table row per conversation plus a totals row, with
/// columns dataset, mean r_t, token reduction %, mean l_final, p50/p95
/// latency.
std::string run_report_markdown(const RunReport& report);

}  // namespace ctxcomp
