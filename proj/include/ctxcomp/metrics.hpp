#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctxcomp/budget.hpp"
#include "ctxcomp/model.hpp"
#include "ctxcomp/scoring.hpp"
#include "ctxcomp/tokenizer.hpp"

namespace ctxcomp {

/// Full BLEU-4 working: precisions as they enter the geometric mean, which
/// orders were +1-smoothed or skipped, token lengths and the brevity penalty.
struct BleuBreakdown {
    std::array<double, 4> precisions{};
    std::array<bool, 4> smoothed{};
    std::array<bool, 4> skipped{};
    long long candidate_len = 0;
    long long reference_len = 0;
    double brevity_penalty = 1.0;
    double score = 0.0;
    std::set<std::string> flags;
};

/**
 * BLEU-4 with clipped modified n-gram precisions. Smoothing adds 1 to the
 * numerator and denominator only for n >= 2 when the raw precision is zero
 * and the candidate has order-n n-grams; p_1 is never smoothed. Orders where
 * the candidate is shorter than n are skipped from the geometric mean, which
 * weights the remaining orders equally. Brevity penalty exp(1 - r/c) applies
 * when the candidate is shorter than the reference. Either side tokenizing
 * to nothing yields 0 and the flag "empty-input".
 */
BleuBreakdown bleu_breakdown(const std::string& candidate, const std::string& reference,
                             const TokenizerSpec& spec = {});

/// Score-only form of bleu_breakdown.
double bleu(const std::string& candidate, const std::string& reference,
            const TokenizerSpec& spec = {});

/// 1 - BLEU(compressed rendering, original history). The rendering is the
/// chronological concatenation of segment texts with summary markers
/// stripped; the reference concatenates every original turn text. Throws
/// InputError on an empty history.
double reconstruction_loss(const std::vector<Turn>& history, const CompressedContext& context,
                           const TokenizerSpec& spec = {});

/// 1 - token-level F1 between the answers, with precision and recall over
/// content-token multisets. Either side absent yields 0 plus the flag
/// "no-qa-pairs" (appended to flags when given). Both sides tokenizing to
/// nothing count as identical; exactly one empty side scores F1 = 0.
double task_loss(const std::optional<std::string>& generated_answer,
                 const std::optional<std::string>& gold_answer, const TokenizerSpec& spec = {},
                 std::set<std::string>* flags = nullptr);

/// Mean of s * (1 - c) over the dropped turns; 0 when nothing was dropped.
/// High when important, contradiction-prone turns were discarded.
double coherence_loss(const std::vector<ScoredTurn>& dropped);

/// The compression ratio itself; lower is better. Throws InputError outside
/// [0, 1].
double token_loss(double ratio);

struct ObjectiveWeights {
    double eta1 = 1.0;
    double eta2 = 1.0;
    double eta3 = 1.0;

    void validate() const;
};

struct ObjectiveReport {
    double l_task = 0.0;
    double l_coh = 0.0;
    double l_token = 0.0;
    double l_rec = 0.0;
    double l_comp = 0.0;
    double l_final = 0.0;
    std::set<std::string> flags;
};

/// l_comp = l_task + eta1 * l_coh + eta2 * l_token and l_final = l_comp +
/// eta3 * l_rec, exactly as written. NaN, infinite or negative inputs throw
/// InputError.
ObjectiveReport compose(double l_task, double l_coh, double l_token, double l_rec,
                        const ObjectiveWeights& w);

}  // namespace ctxcomp
