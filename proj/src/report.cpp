#include "ctxcomp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ctxcomp/version.hpp"

namespace ctxcomp {

namespace {

double nearest_rank_ns(std::vector<std::int64_t> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto n = static_cast<long long>(values.size());
    long long idx = static_cast<long long>(std::ceil(q * static_cast<double>(n))) - 1;
    idx = std::max(0LL, std::min(idx, n - 1));
    return static_cast<double>(values[static_cast<size_t>(idx)]);
}

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
    return buf;
}

std::string row(const std::string& label, double mean_ratio, double mean_l_final, double p50_ns,
                double p95_ns) {
    return "| " + label + " | " + fixed(mean_ratio, 4) + " | " +
           fixed((1.0 - mean_ratio) * 100.0, 2) + "% | " + fixed(mean_l_final, 4) + " | " +
           fixed(p50_ns / 1e6, 3) + " | " + fixed(p95_ns / 1e6, 3) + " |\n";
}

}  // namespace

RunReport make_run_report(const std::string& dataset, const EngineConfig& cfg,
                          std::vector<ReplayResult> replays) {
    RunReport report;
    report.dataset = dataset;
    report.config_snapshot = cfg;
    report.tool_version = kToolVersion;
    report.seed = cfg.seed;
    report.per_conversation = std::move(replays);

    auto& t = report.totals;
    t.conversations = static_cast<int>(report.per_conversation.size());
    double ratio_sum = 0.0;
    double final_sum = 0.0;
    long long ok_steps = 0;
    std::vector<std::int64_t> latencies;
    for (const auto& rr : report.per_conversation) {
        const auto& ag = rr.aggregate;
        t.steps += ag.steps;
        t.failed_steps += ag.failed_steps;
        const long long ok = ag.steps - ag.failed_steps;
        ratio_sum += ag.ratio.mean * static_cast<double>(ok);
        final_sum += ag.mean_l_final * static_cast<double>(ok);
        ok_steps += ok;
        latencies.insert(latencies.end(), ag.step_latencies_ns.begin(),
                         ag.step_latencies_ns.end());
    }
    if (ok_steps > 0) {
        t.mean_ratio = ratio_sum / static_cast<double>(ok_steps);
        t.mean_token_reduction = 1.0 - t.mean_ratio;
        t.mean_l_final = final_sum / static_cast<double>(ok_steps);
    }
    t.p50_latency_ns = nearest_rank_ns(latencies, 0.5);
    t.p95_latency_ns = nearest_rank_ns(latencies, 0.95);
    return report;
}

ojson run_report_to_json(const RunReport& report) {
    ojson j;
    j["tool_version"] = report.tool_version;
    j["dataset"] = report.dataset;
    j["seed"] = report.seed;
    j["config"] = config_to_json(report.config_snapshot);
    ojson per = ojson::array();
    for (const auto& rr : report.per_conversation) per.push_back(replay_to_json(rr));
    j["per_conversation"] = std::move(per);
    j["totals"] = {{"conversations", report.totals.conversations},
                   {"steps", report.totals.steps},
                   {"failed_steps", report.totals.failed_steps},
                   {"mean_ratio", report.totals.mean_ratio},
                   {"mean_token_reduction", report.totals.mean_token_reduction},
                   {"mean_l_final", report.totals.mean_l_final},
                   {"p50_latency_ns", report.totals.p50_latency_ns},
                   {"p95_latency_ns", report.totals.p95_latency_ns}};
    return j;
}

std::string run_report_markdown(const RunReport& report) {
    std::string md;
    md += "# Replay report: " + report.dataset + "\n\n";
    md += "Tool " + std::string(kToolName) + " " + report.tool_version + ", seed " +
          std::to_string(report.seed) + ", " + std::to_string(report.totals.conversations) +
          " conversation(s), " + std::to_string(report.totals.steps) + " step(s), " +
          std::to_string(report.totals.failed_steps) + " failed.\n\n";
    md += "| dataset | mean r_t | token reduction % | mean l_final | p50 latency (ms) | p95 "
          "latency (ms) |\n";
    md += "|---|---|---|---|---|---|\n";
    for (const auto& rr : report.per_conversation) {
        md += row(rr.conversation_id, rr.aggregate.ratio.mean, rr.aggregate.mean_l_final,
                  nearest_rank_ns(rr.aggregate.step_latencies_ns, 0.5),
                  nearest_rank_ns(rr.aggregate.step_latencies_ns, 0.95));
    }
    md += row("total", report.totals.mean_ratio, report.totals.mean_l_final,
              report.totals.p50_latency_ns, report.totals.p95_latency_ns);
    return md;
}

}  // namespace ctxcomp
