#include "ctxcomp/tuner.hpp"

#include <random>

#include "ctxcomp/errors.hpp"
#include "ctxcomp/rng.hpp"

namespace ctxcomp {

namespace {

/// Mean l_final pooled over every successful replay step of the dataset.
double evaluate(const std::vector<Conversation>& dataset, const EngineConfig& cfg,
                const EngineHooks& hooks, const TokenizerSpec& spec, int query_stride) {
    double sum = 0.0;
    long long steps = 0;
    for (const auto& conv : dataset) {
        const auto rr = replay(conv, cfg, hooks, spec, query_stride);
        for (const auto& outcome : rr.steps) {
            if (outcome.failed || !outcome.result.objective.has_value()) continue;
            sum += outcome.result.objective->l_final;
            ++steps;
        }
    }
    if (steps == 0) {
        throw InputError("tune: dataset produced no replay steps");
    }
    return sum / static_cast<double>(steps);
}

EngineConfig sample_config(const EngineConfig& cfg0, std::mt19937_64& rng) {
    EngineConfig cfg = cfg0;
    double a = uniform_unit(rng);
    double b = uniform_unit(rng);
    double g = uniform_unit(rng);
    const double sum = a + b + g;
    if (sum < 1e-9) {
        a = b = g = 1.0 / 3.0;
    } else {
        a /= sum;
        b /= sum;
        g /= sum;
    }
    cfg.scoring.alpha = a;
    cfg.scoring.beta = b;
    cfg.scoring.gamma = g;
    cfg.scoring.rho = uniform_real(rng, 1.0, 50.0);
    cfg.budget.lambda =
        uniform_real(rng, 0.0, static_cast<double>(cfg0.budget.b_max - cfg0.budget.b_min));
    cfg.thresholds.q_s = uniform_real(rng, 0.5, 0.95);
    cfg.thresholds.q_l = uniform_real(rng, 0.05, cfg.thresholds.q_s - 0.05);
    return cfg;
}

}  // namespace

TuneResult tune(const std::vector<Conversation>& dataset, const EngineConfig& cfg0, int trials,
                std::uint64_t seed, const EngineHooks& hooks, const TokenizerSpec& spec,
                int query_stride) {
    if (trials < 1) {
        throw InputError("tune: trials must be at least 1");
    }
    if (dataset.empty()) {
        throw InputError("tune: empty dataset");
    }
    cfg0.validate();

    TuneResult result;
    result.best = cfg0;
    result.best_score = evaluate(dataset, cfg0, hooks, spec, query_stride);
    result.trials.push_back({0, cfg0, result.best_score, result.best_score});

    std::mt19937_64 rng(seed);
    for (int trial = 1; trial <= trials; ++trial) {
        const EngineConfig cfg = sample_config(cfg0, rng);
        const double score = evaluate(dataset, cfg, hooks, spec, query_stride);
        if (score < result.best_score) {
            result.best_score = score;
            result.best = cfg;
        }
        result.trials.push_back({trial, cfg, score, result.best_score});
    }
    return result;
}

}  // namespace ctxcomp
