#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctxcomp/budget.hpp"
#include "ctxcomp/memory.hpp"
#include "ctxcomp/metrics.hpp"
#include "ctxcomp/model.hpp"
#include "ctxcomp/scoring.hpp"

namespace ctxcomp {

/// Partition quantiles and the knobs hanging off them: phi bounds the
/// retained share of the budget, cap_fraction sizes summary caps.
struct ThresholdConfig {
    double q_s = 0.7;
    double q_l = 0.3;
    double phi = 0.6;
    double cap_fraction = 0.25;

    void validate() const;
};

/// Everything a run needs. The tunable vector is {alpha, beta, gamma, rho,
/// lambda, q_s, q_l}; the rest is held fixed.
struct EngineConfig {
    ScoringWeights scoring;
    BudgetConfig budget;
    ThresholdConfig thresholds;
    ObjectiveWeights objective;
    std::int64_t seed = 0;

    void validate() const;
};

/// Answer generator: (compressed context, question) -> answer text.
using AnswerHook = std::function<std::string(const CompressedContext&, const std::string&)>;

/// Optional external implementations. Missing hooks fall back to the
/// built-in lexical heuristics; a hook that throws is also a fallback, and
/// the step records it in flags.
struct EngineHooks {
    ScorerPlugins scorers;
    SummarizeHook summarize;
    AnswerHook answer;
};

/// One compression step: every intermediate the stages produced, plus the
/// objective. wall_time_ns is measured and always positive; it is excluded
/// from serialized step output so byte-level comparisons stay meaningful.
struct StepResult {
    int step = 0;
    std::string query_text;
    std::vector<ScoredTurn> scored;
    Thresholds thresholds;
    int adapt_rounds = 0;
    MemoryState memory;
    double h_hat = 0.0;
    int b_t = 0;
    CompressedContext compressed;
    std::optional<ObjectiveReport> objective;
    std::optional<std::string> generated_response;
    std::set<std::string> flags;
    std::int64_t wall_time_ns = 0;
};

/// Default query stride for conversations without QA pairs: every 5th turn
/// becomes a query point during replay.
inline constexpr int kDefaultQueryStride = 5;

/**
 * Run one full compression step over the history: importance and coherence
 * scoring, quantile thresholds, partition, dialogue entropy, dynamic budget,
 * retained-fit adaptation, band summarization, greedy selection, ratio and
 * objective. Deterministic given (history, query, cfg, prev_response).
 *
 * When the partition drops everything (all z at or below tau_l, as in a
 * single-turn history), the full history is retained instead and the budget
 * alone limits the context; the step carries the flag "degenerate-partition".
 *
 * gold_answer feeds the task term: the answer hook's output is compared
 * against it when the hook is set, otherwise gold is compared with itself
 * (flag "gold-vs-gold"). Without a gold answer the task term is 0 with flag
 * "no-qa-pairs".
 *
 * A stage failure aborts the step with a PipelineError naming the stage.
 */
StepResult compress_step(const Conversation& history, const Query& query, const EngineConfig& cfg,
                         const std::optional<std::string>& prev_response = std::nullopt,
                         const std::optional<std::string>& gold_answer = std::nullopt,
                         const EngineHooks& hooks = {}, const TokenizerSpec& spec = {});

/// One replayed step: either a StepResult or a recorded failure.
struct StepOutcome {
    int step = 0;
    bool failed = false;
    std::string error;
    StepResult result;
};

struct Aggregate {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct ReplayAggregate {
    int steps = 0;
    int failed_steps = 0;
    Aggregate ratio;
    Aggregate reduction;
    Aggregate latency_ns;
    /// Wall time of each successful step, in step order; lets downstream
    /// reports recompute percentiles without the per-step payloads.
    std::vector<std::int64_t> step_latencies_ns;
    double mean_l_task = 0.0;
    double mean_l_coh = 0.0;
    double mean_l_token = 0.0;
    double mean_l_rec = 0.0;
    double mean_l_final = 0.0;
    std::set<std::string> flags;
};

struct ReplayResult {
    std::string conversation_id;
    std::vector<StepOutcome> steps;
    ReplayAggregate aggregate;
};

/**
 * Replay a conversation through compress_step. Query points are the QA pairs
 * when present (each question fires one step after its last evidence turn,
 * at end of conversation when evidence is unspecified); otherwise every
 * query_stride-th turn becomes a query using that turn's text. The previous
 * step's generated answer (or, lacking one, the chronologically previous
 * turn) supplies prev_response. A step that throws is recorded as failed and
 * the replay continues.
 */
ReplayResult replay(const Conversation& conversation, const EngineConfig& cfg,
                    const EngineHooks& hooks = {}, const TokenizerSpec& spec = {},
                    int query_stride = kDefaultQueryStride);

}  // namespace ctxcomp
