#pragma once

#include <set>
#include <string>
#include <vector>

#include "ctxcomp/model.hpp"
#include "ctxcomp/tokenizer.hpp"

namespace ctxcomp {

/// How entropy steers the budget. Volatile dialogue is hard to compress, so
/// the default grants more tokens when normalized entropy is high; Literal
/// inverts that and grants more when entropy is low.
enum class BudgetOrientation { EntropyExpands, Literal };

struct BudgetConfig {
    int b_max = 4096;
    int b_min = 512;
    double lambda = 1024.0;
    int window = 10;
    BudgetOrientation orientation = BudgetOrientation::EntropyExpands;

    void validate() const;
};

/// Normalized Shannon entropy of the content-token distribution over the last
/// `window` turns: H / ln(max(K, 2)) for K distinct tokens, in [0, 1]. An
/// empty distribution yields 0.
double dialogue_entropy(const std::vector<Turn>& history, int window,
                        const TokenizerSpec& spec = {});

/// Per-step budget: b_max - lambda * (1 - H) under EntropyExpands (b_max -
/// lambda * H under Literal), rounded half away from zero, clamped to
/// [b_min, b_max]. Throws InputError unless H lies in [0, 1].
int dynamic_budget(double normalized_entropy, const BudgetConfig& cfg);

enum class SegmentKind { Turn, Summary };

/// One candidate for the compressed context: a retained turn verbatim, or a
/// summary standing in for a block of band turns.
struct Segment {
    SegmentKind kind = SegmentKind::Turn;
    std::string id;
    /// Summaries only: the turns the summary stands in for.
    std::vector<std::string> member_turn_ids;
    /// Chronological sort key: the original index (first member index for
    /// summaries). Unique across candidates of one step.
    int index = 0;
    std::string speaker;
    std::string text;
    int token_count = 0;
    double z = 0.0;
};

struct CompressedContext {
    std::vector<Segment> segments;
    long long used_tokens = 0;
    int budget = 0;
    long long history_tokens = 0;
    double ratio = 0.0;
    std::set<std::string> flags;
};

/// Greedy selection under the budget: candidates visited by z descending
/// (earlier index wins ties), admitted when they still fit, lower-priority
/// candidates still considered after a miss. Output is chronological.
/// history_tokens is the uncompressed history size, used for the ratio.
/// Candidates must carry at least one token each. A budget of zero or less
/// yields an empty context with ratio 0 and the flag "zero-budget".
CompressedContext select_under_budget(const std::vector<Segment>& candidates, int budget,
                                      long long history_tokens);

/// used / history, in [0, 1]. Throws InputError when the history has no
/// tokens or used is negative.
double compression_ratio(long long used_tokens, long long history_tokens);

}  // namespace ctxcomp
