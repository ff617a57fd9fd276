// Drives the command line binary end to end through a shell.

#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "ctxcomp/ingest.hpp"
#include "ctxcomp/serialization.hpp"

using namespace ctxcomp;

namespace {

// The binary must see a disabled gateway regardless of the outer shell.
const bool env_scrubbed = [] {
    unsetenv("CTX_LLM_ENDPOINT");
    unsetenv("CTX_LLM_API_KEY");
    unsetenv("CTX_LLM_MODEL");
    return true;
}();

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    REQUIRE(out.good());
}

std::string scratch_dir() {
    static int counter = 0;
    std::string dir = "/tmp/ctxcomp_cli_" + std::to_string(getpid()) + "_" +
                      std::to_string(counter++);
    REQUIRE(mkdir(dir.c_str(), 0755) == 0);
    return dir;
}

struct RunOut {
    int code = -1;
    std::string out;
    std::string err;
};

RunOut run_cli(const std::string& args) {
    static int counter = 0;
    const std::string err_path = "/tmp/ctxcomp_cli_err_" + std::to_string(getpid()) +
                                 "_" + std::to_string(counter++);
    const std::string cmd = std::string(CTXCOMP_CLI_PATH) + " " + args + " 2>" + err_path;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunOut r;
    char buf[4096];
    size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
    r.err = read_file(err_path);
    std::remove(err_path.c_str());
    return r;
}

std::string golden(const std::string& name) {
    return std::string(CTXCOMP_TEST_DATA_DIR) + "/golden/" + name;
}

std::string stripped_dump(const std::string& json_path) {
    const auto j = ojson::parse(read_file(json_path));
    return dump_json(strip_volatile(j));
}

// Drops the two trailing latency cells from every markdown table row.
std::string mask_latency(const std::string& md) {
    std::istringstream in(md);
    std::string line;
    std::string out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() == '|') {
            std::vector<std::string> cells;
            std::string cell;
            std::istringstream row(line);
            while (std::getline(row, cell, '|')) cells.push_back(cell);
            if (cells.size() > 2) cells.resize(cells.size() - 2);
            std::string masked;
            for (const auto& c : cells) masked += c + "|";
            line = masked;
        }
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace

TEST_CASE("help and usage errors map to documented exit codes") {
    REQUIRE(env_scrubbed);
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("frobnicate").code == 2);
    CHECK(run_cli("compress --config a.json --conversation b.json").code == 2);
    CHECK(run_cli("bleu --candidate /nonexistent/cand.txt --reference /nonexistent/ref.txt").code ==
          2);
}

TEST_CASE("compress reproduces the frozen golden step byte for byte") {
    const auto r = run_cli("compress --config " + golden("config.json") + " --conversation " +
                           golden("conversation.json") + " --query \"when is the budget review\"");
    REQUIRE(r.code == 0);
    const std::string frozen = read_file(golden("compress_step.json"));
    REQUIRE(!frozen.empty());
    CHECK(r.out == frozen);

    const std::string dir = scratch_dir();
    const std::string out_path = dir + "/step.json";
    const auto r2 = run_cli("compress --config " + golden("config.json") + " --conversation " +
                            golden("conversation.json") +
                            " --query \"when is the budget review\" --out " + out_path);
    REQUIRE(r2.code == 0);
    CHECK(read_file(out_path) == frozen);
}

TEST_CASE("compress failure modes use the documented exit codes") {
    const std::string dir = scratch_dir();

    auto r = run_cli("compress --config " + golden("config.json") +
                     " --conversation /nonexistent/conv.json --query hello");
    CHECK(r.code == 2);
    CHECK(r.err.find("/nonexistent/conv.json") != std::string::npos);

    const std::string bad_cfg = dir + "/bad.json";
    write_file(bad_cfg, "{nope");
    r = run_cli("compress --config " + bad_cfg + " --conversation " +
                golden("conversation.json") + " --query hello");
    CHECK(r.code == 2);

    const std::string empty_conv = dir + "/punct.json";
    write_file(empty_conv, R"({"conversation_id": "punct", "turns": [
        {"turn_id": "t0", "index": 0, "speaker": "user", "text": "..."},
        {"turn_id": "t1", "index": 1, "speaker": "assistant", "text": "???"}
    ], "qa_pairs": []})");
    r = run_cli("compress --config " + golden("config.json") + " --conversation " + empty_conv +
                " --query hello");
    CHECK(r.code == 3);
    CHECK(r.err.find("select") != std::string::npos);
}

TEST_CASE("replay writes deterministic reports") {
    TokenizerSpec spec;
    const std::string dir = scratch_dir();
    const std::string data = dir + "/data";
    REQUIRE(mkdir(data.c_str(), 0755) == 0);
    save_canonical(synthesize(24, 3, SyntheticProfile::TopicalDrift, spec), data + "/a.json");
    save_canonical(synthesize(30, 4, SyntheticProfile::QaHeavy, spec), data + "/b.json");

    const std::string base = " replay --config " + golden("config.json") + " --dataset " + data;
    const auto r1 = run_cli(base + " --out " + dir + "/r1.json --jobs 1");
    REQUIRE(r1.code == 0);
    const auto r2 = run_cli(base + " --out " + dir + "/r2.json --jobs 1");
    REQUIRE(r2.code == 0);

    CHECK(stripped_dump(dir + "/r1.json") == stripped_dump(dir + "/r2.json"));
    CHECK(mask_latency(r1.out) == mask_latency(r2.out));

    const std::string md1 = read_file(dir + "/r1.md");
    REQUIRE(!md1.empty());
    CHECK(md1 == r1.out);
    CHECK(mask_latency(md1) == mask_latency(read_file(dir + "/r2.md")));

    const auto r3 = run_cli(base + " --out " + dir + "/r3.json --jobs 4");
    REQUIRE(r3.code == 0);
    CHECK(stripped_dump(dir + "/r3.json") == stripped_dump(dir + "/r1.json"));

    CHECK(run_cli(base + " --out " + dir + "/r4.json --jobs 0").code == 2);

    const std::string empty_dir = dir + "/empty";
    REQUIRE(mkdir(empty_dir.c_str(), 0755) == 0);
    CHECK(run_cli(" replay --config " + golden("config.json") + " --dataset " + empty_dir +
                  " --out " + dir + "/r5.json")
              .code == 2);
}

TEST_CASE("tune emits the best config and a deterministic trial log") {
    TokenizerSpec spec;
    const std::string dir = scratch_dir();
    const std::string data = dir + "/tune_data";
    REQUIRE(mkdir(data.c_str(), 0755) == 0);
    save_canonical(synthesize(24, 11, SyntheticProfile::QaHeavy, spec), data + "/conv.json");

    const std::string base = " tune --config " + golden("config.json") + " --dataset " + data +
                             " --trials 3 --seed 9 --out ";
    const auto r1 = run_cli(base + dir + "/best1.json");
    REQUIRE(r1.code == 0);
    CHECK(r1.out.find("best mean_l_final") == 0);

    const std::string best = read_file(dir + "/best1.json");
    CHECK_NOTHROW(config_from_json(ojson::parse(best)));

    const std::string csv = read_file(dir + "/best1.trials.csv");
    REQUIRE(!csv.empty());
    std::istringstream lines(csv);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(lines, line)) rows.push_back(line);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == "trial,alpha,beta,gamma,rho,lambda,q_s,q_l,mean_l_final,best_so_far");
    CHECK(rows[1].substr(0, 2) == "0,");

    const auto r2 = run_cli(base + dir + "/best2.json");
    REQUIRE(r2.code == 0);
    CHECK(read_file(dir + "/best2.json") == best);
    CHECK(read_file(dir + "/best2.trials.csv") == csv);
}

TEST_CASE("bleu prints six decimal scores") {
    const std::string dir = scratch_dir();
    write_file(dir + "/same.txt", "the zeppelin crossed the alps at dawn");
    write_file(dir + "/other.txt", "unrelated words entirely here instead now");
    write_file(dir + "/cand.txt", "alpha bravo charlie delta echo foxtrot golf hotel india kilo");
    write_file(dir + "/ref.txt", "alpha bravo charlie kilo delta echo foxtrot india golf hotel");

    auto r = run_cli("bleu --candidate " + dir + "/same.txt --reference " + dir + "/same.txt");
    REQUIRE(r.code == 0);
    CHECK(r.out == "1.000000\n");

    r = run_cli("bleu --candidate " + dir + "/same.txt --reference " + dir + "/other.txt");
    REQUIRE(r.code == 0);
    CHECK(r.out == "0.000000\n");

    r = run_cli("bleu --candidate " + dir + "/cand.txt --reference " + dir + "/ref.txt");
    REQUIRE(r.code == 0);
    CHECK(r.out == "0.362990\n");

    r = run_cli("bleu --candidate " + dir + "/cand.txt --reference " + dir +
                "/ref.txt --seed 7");
    REQUIRE(r.code == 0);
    CHECK(r.out == "0.362990\n");
}
