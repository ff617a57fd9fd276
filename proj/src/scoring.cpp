#include "ctxcomp/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "ctxcomp/errors.hpp"

namespace ctxcomp {

namespace {

const std::set<std::string>& negation_markers() {
    static const std::set<std::string> markers = {"not", "no", "never", "n't", "none", "cannot"};
    return markers;
}

bool has_negation(const std::vector<std::string>& raw_tokens) {
    return std::any_of(raw_tokens.begin(), raw_tokens.end(),
                       [](const std::string& t) { return negation_markers().count(t) > 0; });
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

void ScoringWeights::validate() const {
    if (alpha < 0 || beta < 0 || gamma < 0) throw InputError("scoring weights must be >= 0");
    if (alpha + beta + gamma <= 0) throw InputError("alpha + beta + gamma must be > 0");
    if (rho <= 0) throw InputError("rho must be > 0");
}

double similarity(const std::string& turn_text, const std::string& query_text,
                  const TokenizerSpec& spec) {
    auto a = content_token_counts(turn_text, spec);
    auto b = content_token_counts(query_text, spec);
    if (a.empty() || b.empty()) return 0.0;

    long long dot = 0, na = 0, nb = 0;
    for (const auto& [tok, cnt] : a) {
        na += static_cast<long long>(cnt) * cnt;
        auto it = b.find(tok);
        if (it != b.end()) dot += static_cast<long long>(cnt) * it->second;
    }
    for (const auto& [tok, cnt] : b) nb += static_cast<long long>(cnt) * cnt;
    if (dot == 0) return 0.0;
    return static_cast<double>(dot) /
           (std::sqrt(static_cast<double>(na)) * std::sqrt(static_cast<double>(nb)));
}

double recency(int turn_index, int step, double rho) {
    if (rho <= 0) throw InputError("recency: rho must be > 0");
    if (turn_index < 0) throw InputError("recency: turn_index must be >= 0");
    if (turn_index > step) {
        throw InputError("recency: turn_index " + std::to_string(turn_index) +
                         " is ahead of step " + std::to_string(step));
    }
    return std::exp(-static_cast<double>(step - turn_index) / rho);
}

double dependency(const Turn& turn, const std::vector<Turn>& later_turns,
                  const TokenizerSpec& spec) {
    for (const auto& later : later_turns) {
        if (later.index <= turn.index) {
            throw InputError("dependency: later turn '" + later.turn_id +
                             "' does not follow turn '" + turn.turn_id + "'");
        }
    }
    auto own = content_tokens(turn.text, spec);
    if (own.empty() || later_turns.empty()) return 0.0;

    std::set<std::string> future;
    for (const auto& later : later_turns) {
        auto toks = content_tokens(later.text, spec);
        future.insert(toks.begin(), toks.end());
    }
    int referenced = 0;
    for (const auto& tok : own) {
        if (future.count(tok)) ++referenced;
    }
    return static_cast<double>(referenced) / static_cast<double>(own.size());
}

double importance(double sim, double rec, double dep, const ScoringWeights& w) {
    w.validate();
    return (w.alpha * sim + w.beta * rec + w.gamma * dep) / (w.alpha + w.beta + w.gamma);
}

double contradiction_prob(const std::string& turn_text,
                          const std::optional<std::string>& prev_response,
                          const TokenizerSpec& spec) {
    if (!prev_response) return 0.0;
    auto a = content_tokens(turn_text, spec);
    auto b = content_tokens(*prev_response, spec);
    if (a.empty() && b.empty()) return 0.0;

    int inter = 0;
    for (const auto& tok : a) {
        if (b.count(tok)) ++inter;
    }
    int uni = static_cast<int>(a.size() + b.size()) - inter;
    double jaccard = uni == 0 ? 0.0 : static_cast<double>(inter) / uni;

    bool neg_a = has_negation(tokenize(turn_text, spec));
    bool neg_b = has_negation(tokenize(*prev_response, spec));
    double gate = (neg_a != neg_b) ? 1.0 : 0.0;
    return jaccard * gate;
}

double coherence(const Turn& turn, const std::optional<std::string>& prev_response,
                 const TokenizerSpec& spec) {
    return 1.0 - contradiction_prob(turn.text, prev_response, spec);
}

double selection_score(double s, double c) {
    if (s < 0 || s > 1 || c < 0 || c > 1) {
        throw InputError("selection_score: inputs must be in [0,1]");
    }
    return s * c;
}

std::vector<ScoredTurn> score_turns(const std::vector<Turn>& turns, const Query& query,
                                    const std::optional<std::string>& prev_response,
                                    const ScoringWeights& weights, const TokenizerSpec& spec,
                                    const ScorerPlugins& plugins, std::set<std::string>* flags) {
    weights.validate();
    const int t = query.step;

    // token -> index of the last turn whose content contains it.
    std::unordered_map<std::string, int> last_seen;
    std::vector<std::set<std::string>> turn_content(turns.size());
    for (size_t i = 0; i < turns.size(); ++i) {
        turn_content[i] = content_tokens(turns[i].text, spec);
        for (const auto& tok : turn_content[i]) last_seen[tok] = turns[i].index;
    }

    bool prev_negated = prev_response && has_negation(tokenize(*prev_response, spec));
    std::set<std::string> prev_content;
    if (prev_response) prev_content = content_tokens(*prev_response, spec);

    std::vector<ScoredTurn> scored;
    scored.reserve(turns.size());
    for (size_t i = 0; i < turns.size(); ++i) {
        const Turn& turn = turns[i];

        double sim;
        if (plugins.similarity) {
            try {
                sim = clamp01(plugins.similarity(turn.text, query.text));
            } catch (const std::exception&) {
                if (flags) flags->insert("similarity-fallback");
                sim = similarity(turn.text, query.text, spec);
            }
        } else {
            sim = similarity(turn.text, query.text, spec);
        }
        double rec = recency(turn.index, t, weights.rho);

        double dep = 0.0;
        if (!turn_content[i].empty() && i + 1 < turns.size()) {
            int referenced = 0;
            for (const auto& tok : turn_content[i]) {
                auto it = last_seen.find(tok);
                if (it != last_seen.end() && it->second > turn.index) ++referenced;
            }
            dep = static_cast<double>(referenced) / static_cast<double>(turn_content[i].size());
        }

        double s = importance(sim, rec, dep, weights);

        double c = 1.0;
        bool c_done = !prev_response;
        if (!c_done && plugins.contradiction) {
            try {
                c = 1.0 - clamp01(plugins.contradiction(turn.text, *prev_response));
                c_done = true;
            } catch (const std::exception&) {
                if (flags) flags->insert("contradiction-fallback");
            }
        }
        if (!c_done) {
            // Inline the lexical heuristic against the precomputed prev sets.
            int inter = 0;
            for (const auto& tok : turn_content[i]) {
                if (prev_content.count(tok)) ++inter;
            }
            int uni = static_cast<int>(turn_content[i].size() + prev_content.size()) - inter;
            double jaccard = uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
            bool neg_turn = has_negation(tokenize(turn.text, spec));
            c = 1.0 - jaccard * ((neg_turn != prev_negated) ? 1.0 : 0.0);
        }

        scored.push_back({turn.turn_id, s, c, selection_score(s, c)});
    }
    return scored;
}

}  // namespace ctxcomp
