#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctxcomp/model.hpp"
#include "ctxcomp/tokenizer.hpp"

namespace ctxcomp {

/**
 * Blend weights for turn importance. The weighted sum is normalized by
 * (alpha + beta + gamma) so importance stays in [0,1] regardless of scale;
 * rho is the recency decay half-scale, in turns.
 */
struct ScoringWeights {
    double alpha = 0.5;
    double beta = 0.3;
    double gamma = 0.2;
    double rho = 10.0;

    void validate() const;
};

/// Per-turn scores: importance s, coherence stability c, selection z = s * c.
struct ScoredTurn {
    std::string turn_id;
    double s = 0.0;
    double c = 0.0;
    double z = 0.0;
};

/// Optional replacements for the built-in lexical scorers. Each must map into
/// [0,1]; the engine clamps and falls back to the default on failure.
struct ScorerPlugins {
    std::function<double(const std::string&, const std::string&)> similarity;
    std::function<double(const std::string&, const std::string&)> contradiction;
};

/// Cosine similarity between term-frequency vectors of non-stopword tokens.
/// 0 when either side has no content tokens. Symmetric, deterministic.
double similarity(const std::string& turn_text, const std::string& query_text,
                  const TokenizerSpec& spec = {});

/// exp(-(step - turn_index) / rho). 1 at turn_index == step, decays toward 0.
/// Throws InputError when turn_index > step or rho <= 0.
double recency(int turn_index, int step, double rho);

/// Fraction of the turn's distinct content tokens that reappear in the
/// content tokens of at least one later turn. 0 without content or followers.
double dependency(const Turn& turn, const std::vector<Turn>& later_turns,
                  const TokenizerSpec& spec = {});

/// Normalized weighted blend of the three signals: (a*sim + b*rec + g*dep) / (a+b+g).
double importance(double sim, double rec, double dep, const ScoringWeights& w);

/// Lexical contradiction heuristic: Jaccard overlap of content tokens times a
/// negation-asymmetry gate (exactly one side carries a negation marker).
/// 0 when prev_response is absent.
double contradiction_prob(const std::string& turn_text,
                          const std::optional<std::string>& prev_response,
                          const TokenizerSpec& spec = {});

/// 1 - contradiction_prob: how safe the turn is to drop or compress.
double coherence(const Turn& turn, const std::optional<std::string>& prev_response,
                 const TokenizerSpec& spec = {});

/// z = s * c. Both inputs must already be in [0,1].
double selection_score(double s, double c);

/**
 * Score a full history against one query in chronological order.
 * Dependency uses a token -> last-turn-index map so the pass stays linear in
 * total tokens. prev_response feeds the coherence term for every turn.
 * A plugin that throws falls back to the built-in scorer for that turn and
 * adds "similarity-fallback" / "contradiction-fallback" to flags when given.
 */
std::vector<ScoredTurn> score_turns(const std::vector<Turn>& turns, const Query& query,
                                    const std::optional<std::string>& prev_response,
                                    const ScoringWeights& weights, const TokenizerSpec& spec = {},
                                    const ScorerPlugins& plugins = {},
                                    std::set<std::string>* flags = nullptr);

}  // namespace ctxcomp
