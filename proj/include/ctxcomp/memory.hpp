#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "ctxcomp/model.hpp"
#include "ctxcomp/scoring.hpp"

namespace ctxcomp {

/// Marker prepended to every summary segment. Consumers may strip it by
/// exact prefix match; it is excluded from token accounting.
inline constexpr const char* kSummaryMarker = "[SUMMARY] ";

/// Partition cut points: tau_s/tau_l are empirical quantiles q_s/q_l of the
/// selection scores (nearest-rank method).
struct Thresholds {
    double tau_s = 0.0;
    double tau_l = 0.0;
    double q_s = 0.7;
    double q_l = 0.3;

    void validate() const;
};

/// A maximal run of contiguous-index turns from the summarize band, reduced
/// to an extractive summary. token_count counts the summary body only.
struct SummarySegment {
    std::vector<std::string> member_turn_ids;
    int first_index = 0;
    std::string summary_text;
    double z_max = 0.0;
    int token_count = 0;
};

/// Retained / band (to-be-summarized) / dropped turn ids, each chronological.
/// The three regions partition the scored history exactly.
struct MemoryState {
    std::vector<std::string> retained;
    std::vector<std::string> band;
    std::vector<SummarySegment> summaries;
    std::vector<std::string> dropped;
};

/// Replacement summarizer (e.g. a remote model): (block_text, cap_tokens) ->
/// raw summary text. The caller still truncates and prefixes the marker.
using SummarizeHook = std::function<std::string(const std::string&, int)>;

/// Nearest-rank empirical quantiles of the score list: the value at index
/// ceil(q*n)-1 of the ascending sort. Throws InputError on empty input or
/// out-of-order quantiles.
Thresholds compute_thresholds(const std::vector<double>& z_scores, double q_s, double q_l);

/// Split scored turns into retained (z > tau_s), band (tau_l < z <= tau_s)
/// and dropped (z <= tau_l), preserving chronological order. Summaries are
/// left empty; see summarize_band.
MemoryState partition(const std::vector<ScoredTurn>& scored, const Thresholds& th);

/// Sentence boundaries: '.', '!' or '?' followed by whitespace (or end of
/// text). Turn boundaries also end sentences. Whitespace-only pieces dropped.
std::vector<std::string> split_sentences(const std::string& text);

/**
 * Summarize the band extractively, one summary per maximal contiguous-index
 * block. Sentences are ranked by mean TF-IDF weight of their distinct content
 * tokens (TF over the block, IDF over all turns of the history, ties broken
 * by earlier position) and admitted greedily in rank order while they fit the
 * cap max(10, floor(cap_fraction * block tokens)); emission is in original
 * order. A configured hook replaces the extractor per block; on hook failure
 * the extractive path runs and "summary-fallback" is added to flags.
 */
std::vector<SummarySegment> summarize_band(const std::vector<std::string>& band_ids,
                                           const std::vector<Turn>& history_turns,
                                           const std::vector<ScoredTurn>& scored,
                                           double cap_fraction, const TokenizerSpec& spec = {},
                                           const SummarizeHook& hook = {},
                                           std::set<std::string>* flags = nullptr);

struct AdaptResult {
    MemoryState state;
    Thresholds thresholds;
    int rounds = 0;
};

/// While the retained region exceeds phi * budget and q_s < 0.95, raise q_s
/// by 0.05 and re-partition; demoted turns join the band. Terminates because
/// q_s is capped.
AdaptResult adapt_retained_fit(const MemoryState& state, const std::vector<ScoredTurn>& scored,
                               const std::vector<Turn>& turns, int budget, double phi,
                               const Thresholds& th);

}  // namespace ctxcomp
