#pragma once

#include <cstdint>
#include <vector>

#include "ctxcomp/engine.hpp"
#include "ctxcomp/model.hpp"

namespace ctxcomp {

struct TrialRecord {
    int trial = 0;  // 0 is the baseline config, 1..trials are samples
    EngineConfig config;
    double mean_l_final = 0.0;
    double best_so_far = 0.0;
};

struct TuneResult {
    EngineConfig best;
    double best_score = 0.0;
    std::vector<TrialRecord> trials;
};

/**
 * Seeded random search over {alpha, beta, gamma (renormalized), rho in
 * [1,50], lambda in [0, b_max-b_min], q_s in [0.5,0.95], q_l in [0.05,
 * q_s-0.05]}. Everything else is held fixed from cfg0. The score of a
 * config is the mean l_final over all replay steps of the dataset; cfg0 is
 * evaluated first as the baseline, so the returned argmin is never worse
 * than cfg0. The best-so-far trace is non-increasing by construction.
 */
TuneResult tune(const std::vector<Conversation>& dataset, const EngineConfig& cfg0, int trials,
                std::uint64_t seed, const EngineHooks& hooks = {}, const TokenizerSpec& spec = {},
                int query_stride = kDefaultQueryStride);

}  // namespace ctxcomp
