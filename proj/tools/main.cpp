// Command line front end: compress, replay, tune, bleu.

#include <CLI11.hpp>

#include "ctxcomp/engine.hpp"
#include "ctxcomp/errors.hpp"
#include "ctxcomp/gateway.hpp"
#include "ctxcomp/ingest.hpp"
#include "ctxcomp/metrics.hpp"
#include "ctxcomp/report.hpp"
#include "ctxcomp/serialization.hpp"
#include "ctxcomp/tuner.hpp"
#include "ctxcomp/version.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace ctxcomp;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path + ": cannot open file for writing");
  out << content;
  if (!out) throw InputError(path + ": write failed");
}

EngineConfig load_config_file(const std::string& path) {
  ojson j;
  try {
    j = ojson::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

Conversation load_single_conversation(const std::string& path, const TokenizerSpec& spec) {
  auto convs = load_auto(path, spec);
  if (convs.size() != 1) {
    throw InputError(path + ": expected exactly one conversation, found " +
                     std::to_string(convs.size()));
  }
  return std::move(convs.front());
}

std::string sibling_path(const std::string& out, const std::string& suffix) {
  const std::string json_ext = ".json";
  if (out.size() > json_ext.size() &&
      out.compare(out.size() - json_ext.size(), json_ext.size(), json_ext) == 0) {
    return out.substr(0, out.size() - json_ext.size()) + suffix;
  }
  return out + suffix;
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

int run_compress(const std::string& config_path, const std::string& conversation_path,
                 const std::string& query_text, const std::string& out_path,
                 std::optional<long long> seed) {
  EngineConfig cfg = load_config_file(config_path);
  if (seed) cfg.seed = *seed;
  TokenizerSpec spec;
  Conversation conv = load_single_conversation(conversation_path, spec);

  std::optional<std::string> prev;
  if (!conv.turns().empty()) prev = conv.turns().back().text;

  GatewayClient gateway(GatewayConfig::from_env());
  EngineHooks hooks = gateway.hooks(spec);

  Query q;
  q.step = static_cast<int>(conv.turns().size());
  q.text = query_text;

  StepResult res = compress_step(conv, q, cfg, prev, std::nullopt, hooks, spec);
  std::string payload = dump_json(step_to_json(res));
  std::cout << payload;
  if (!out_path.empty()) write_text_file(out_path, payload);
  return 0;
}

struct ReplaySlot {
  bool failed = false;
  std::string error;
  ReplayResult result;
};

int run_replay(const std::string& config_path, const std::string& dataset_path,
               const std::string& out_path, int jobs, std::optional<long long> seed) {
  EngineConfig cfg = load_config_file(config_path);
  if (seed) cfg.seed = *seed;
  if (jobs < 1) throw InputError("--jobs must be >= 1");
  TokenizerSpec spec;
  auto convs = load_auto(dataset_path, spec);

  GatewayClient gateway(GatewayConfig::from_env());
  EngineHooks hooks = gateway.hooks(spec);

  std::vector<ReplaySlot> slots(convs.size());
  auto work = [&](std::size_t i) {
    try {
      slots[i].result = replay(convs[i], cfg, hooks, spec);
    } catch (const std::exception& e) {
      slots[i].failed = true;
      slots[i].error = e.what();
      slots[i].result.conversation_id = convs[i].id();
      slots[i].result.aggregate.flags.insert("replay-failed");
    }
  };

  if (jobs <= 1 || convs.size() <= 1) {
    for (std::size_t i = 0; i < convs.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    auto runner = [&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= convs.size()) return;
        work(i);
      }
    };
    std::vector<std::thread> pool;
    std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(jobs), convs.size());
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(runner);
    for (auto& t : pool) t.join();
  }

  std::size_t failed_convs = 0;
  std::vector<ReplayResult> results;
  results.reserve(slots.size());
  for (const auto& s : slots) {
    if (s.failed) {
      ++failed_convs;
      std::cerr << "replay failed: " << s.result.conversation_id << ": " << s.error << "\n";
    }
    results.push_back(s.result);
  }

  RunReport report = make_run_report(dataset_path, cfg, results);
  write_text_file(out_path, dump_json(run_report_to_json(report)));
  std::string md = run_report_markdown(report);
  write_text_file(sibling_path(out_path, ".md"), md);
  std::cout << md;

  if (!convs.empty() && failed_convs == convs.size()) {
    throw PipelineError("replay", "all conversations failed");
  }
  return 0;
}

int run_tune(const std::string& config_path, const std::string& dataset_path,
             const std::string& out_path, int trials, long long seed) {
  EngineConfig cfg0 = load_config_file(config_path);
  TokenizerSpec spec;
  auto convs = load_auto(dataset_path, spec);

  TuneResult result = tune(convs, cfg0, trials, static_cast<std::uint64_t>(seed), {}, spec);

  write_text_file(out_path, dump_json(config_to_json(result.best)));

  std::ostringstream csv;
  csv << "trial,alpha,beta,gamma,rho,lambda,q_s,q_l,mean_l_final,best_so_far\n";
  for (const auto& tr : result.trials) {
    const auto& c = tr.config;
    csv << tr.trial << ',' << fmt_g(c.scoring.alpha) << ',' << fmt_g(c.scoring.beta) << ','
        << fmt_g(c.scoring.gamma) << ',' << fmt_g(c.scoring.rho) << ','
        << fmt_g(c.budget.lambda) << ',' << fmt_g(c.thresholds.q_s) << ','
        << fmt_g(c.thresholds.q_l) << ',' << fmt_g(tr.mean_l_final) << ','
        << fmt_g(tr.best_so_far) << '\n';
  }
  write_text_file(sibling_path(out_path, ".trials.csv"), csv.str());

  std::cout << "best mean_l_final " << fmt_g(result.best_score) << " over "
            << result.trials.size() << " trials\n";
  return 0;
}

int run_bleu(const std::string& candidate_path, const std::string& reference_path) {
  std::string cand = read_text_file(candidate_path);
  std::string ref = read_text_file(reference_path);
  double score = bleu(cand, ref, TokenizerSpec{});
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f\n", score);
  std::cout << buf;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(ctxcomp::kToolName) + " " + ctxcomp::kToolVersion +
               ": adaptive context compression for long dialogues"};
  app.require_subcommand(1);

  std::string config_path, conversation_path, dataset_path, query_text, out_path;
  std::string candidate_path, reference_path;
  long long seed = 0;
  int trials = 16;
  int jobs = 1;

  auto* compress = app.add_subcommand("compress", "run one compression step and print it as JSON");
  compress->add_option("--config", config_path, "engine config JSON file")->required();
  compress->add_option("--conversation", conversation_path, "conversation file")->required();
  compress->add_option("--query", query_text, "query text for the step")->required();
  compress->add_option("--out", out_path, "also write the step JSON to this file");
  auto* compress_seed = compress->add_option("--seed", seed, "override config seed");

  auto* replay = app.add_subcommand("replay", "replay a dataset and write a run report");
  replay->add_option("--config", config_path, "engine config JSON file")->required();
  replay->add_option("--dataset", dataset_path, "conversation file or directory")->required();
  replay->add_option("--out", out_path, "report JSON path (markdown lands next to it)")->required();
  replay->add_option("--jobs", jobs, "parallel conversations")->default_val(1);
  auto* replay_seed = replay->add_option("--seed", seed, "override config seed");

  auto* tune_cmd = app.add_subcommand("tune", "random-search scoring/budget parameters");
  tune_cmd->add_option("--config", config_path, "baseline engine config JSON file")->required();
  tune_cmd->add_option("--dataset", dataset_path, "conversation file or directory")->required();
  tune_cmd->add_option("--out", out_path, "best config JSON path (trials CSV lands next to it)")
      ->required();
  tune_cmd->add_option("--trials", trials, "number of sampled configurations")->required();
  tune_cmd->add_option("--seed", seed, "search seed")->required();

  auto* bleu_cmd = app.add_subcommand("bleu", "BLEU of candidate text against reference text");
  bleu_cmd->add_option("--candidate", candidate_path, "candidate text file")->required();
  bleu_cmd->add_option("--reference", reference_path, "reference text file")->required();
  bleu_cmd->add_option("--seed", seed, "accepted for interface symmetry; scoring is pure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (compress->parsed()) {
      std::optional<long long> s;
      if (compress_seed->count() > 0) s = seed;
      return run_compress(config_path, conversation_path, query_text, out_path, s);
    }
    if (replay->parsed()) {
      std::optional<long long> s;
      if (replay_seed->count() > 0) s = seed;
      return run_replay(config_path, dataset_path, out_path, jobs, s);
    }
    if (tune_cmd->parsed()) {
      return run_tune(config_path, dataset_path, out_path, trials, seed);
    }
    if (bleu_cmd->parsed()) {
      return run_bleu(candidate_path, reference_path);
    }
  } catch (const ctxcomp::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ctxcomp::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ctxcomp::PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
