#include "ctxcomp/budget.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ctxcomp/errors.hpp"

namespace ctxcomp {

void BudgetConfig::validate() const {
    if (b_max < 1 || b_min < 0 || b_min > b_max) {
        throw InputError("budget: require 0 <= b_min <= b_max and b_max >= 1, got b_min=" +
                         std::to_string(b_min) + " b_max=" + std::to_string(b_max));
    }
    if (!(lambda >= 0.0) || lambda > static_cast<double>(b_max - b_min)) {
        throw InputError("budget: lambda must lie in [0, b_max - b_min]");
    }
    if (window < 1) {
        throw InputError("budget: window must be at least 1");
    }
}

double dialogue_entropy(const std::vector<Turn>& history, int window, const TokenizerSpec& spec) {
    if (window < 1) {
        throw InputError("dialogue_entropy: window must be at least 1");
    }
    const size_t w = std::min(history.size(), static_cast<size_t>(window));
    std::map<std::string, long long> counts;
    long long total = 0;
    for (size_t i = history.size() - w; i < history.size(); ++i) {
        for (const auto& [tok, n] : content_token_counts(history[i].text, spec)) {
            counts[tok] += n;
            total += n;
        }
    }
    if (total == 0) return 0.0;
    double h = 0.0;
    for (const auto& [tok, n] : counts) {
        const double p = static_cast<double>(n) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    const double norm = std::log(std::max<double>(2.0, static_cast<double>(counts.size())));
    // Rounding can push a perfectly uniform distribution an ulp past 1.
    return std::min(1.0, h / norm);
}

int dynamic_budget(double normalized_entropy, const BudgetConfig& cfg) {
    cfg.validate();
    if (!(normalized_entropy >= 0.0) || !(normalized_entropy <= 1.0)) {
        throw InputError("dynamic_budget: normalized entropy must lie in [0, 1]");
    }
    const double slack = cfg.orientation == BudgetOrientation::EntropyExpands
                             ? cfg.lambda * (1.0 - normalized_entropy)
                             : cfg.lambda * normalized_entropy;
    const double raw = static_cast<double>(cfg.b_max) - slack;
    const auto rounded = static_cast<long long>(std::llround(raw));
    const long long clamped =
        std::max<long long>(cfg.b_min, std::min<long long>(cfg.b_max, rounded));
    return static_cast<int>(clamped);
}

CompressedContext select_under_budget(const std::vector<Segment>& candidates, int budget,
                                      long long history_tokens) {
    if (history_tokens < 0) {
        throw InputError("select_under_budget: history_tokens must be non-negative");
    }
    for (const auto& seg : candidates) {
        if (seg.token_count < 1) {
            throw InputError("select_under_budget: segment '" + seg.id +
                             "' must have at least one token");
        }
    }
    if (budget <= 0) {
        CompressedContext empty;
        empty.used_tokens = 0;
        empty.budget = budget;
        empty.history_tokens = history_tokens;
        empty.ratio = 0.0;
        empty.flags.insert("zero-budget");
        return empty;
    }

    std::vector<const Segment*> order;
    order.reserve(candidates.size());
    for (const auto& seg : candidates) order.push_back(&seg);
    std::sort(order.begin(), order.end(), [](const Segment* a, const Segment* b) {
        if (a->z != b->z) return a->z > b->z;
        return a->index < b->index;
    });

    std::vector<const Segment*> admitted;
    long long used = 0;
    for (const Segment* seg : order) {
        if (used + seg->token_count <= budget) {
            admitted.push_back(seg);
            used += seg->token_count;
        }
    }
    std::sort(admitted.begin(), admitted.end(),
              [](const Segment* a, const Segment* b) { return a->index < b->index; });

    CompressedContext ctx;
    ctx.segments.reserve(admitted.size());
    for (const Segment* seg : admitted) ctx.segments.push_back(*seg);
    ctx.used_tokens = used;
    ctx.budget = budget;
    ctx.history_tokens = history_tokens;
    ctx.ratio = compression_ratio(used, history_tokens);
    return ctx;
}

double compression_ratio(long long used_tokens, long long history_tokens) {
    if (used_tokens < 0) {
        throw InputError("compression_ratio: token counts must be non-negative");
    }
    if (history_tokens <= 0) {
        throw InputError("compression_ratio: history must contain at least one token");
    }
    return static_cast<double>(used_tokens) / static_cast<double>(history_tokens);
}

}  // namespace ctxcomp
