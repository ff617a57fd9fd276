#include <doctest.h>

#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "ctxcomp/engine.hpp"
#include "ctxcomp/errors.hpp"
#include "ctxcomp/gateway.hpp"

using namespace ctxcomp;

namespace {

GatewayConfig enabled_cfg() {
    GatewayConfig cfg;
    cfg.endpoint_url = "http://gateway.test:8080/v1/chat/completions";
    cfg.model_name = "mock-model";
    return cfg;
}

CompressedContext two_segment_context() {
    CompressedContext ctx;
    Segment a;
    a.kind = SegmentKind::Turn;
    a.id = "t0";
    a.index = 0;
    a.speaker = "user";
    a.text = "the cat sat";
    a.token_count = 3;
    Segment b;
    b.kind = SegmentKind::Summary;
    b.id = "summary@1";
    b.index = 1;
    b.speaker = "summary";
    b.text = "[SUMMARY] vienna trip planned";
    b.token_count = 3;
    ctx.segments = {a, b};
    return ctx;
}

}  // namespace

TEST_SUITE("gateway") {

TEST_CASE("prompt templates are pinned byte for byte") {
    CHECK(build_summary_prompt("block text here", 7) ==
          "Summarize the following dialogue block in at most 7 tokens. "
          "Keep concrete facts.\n\nblock text here");
    CHECK(build_contradiction_prompt("a text", "b text") ==
          "Do the following two statements contradict each other? Reply with only a "
          "probability between 0 and 1.\nA: a text\nB: b text");
    CHECK(build_answer_prompt(two_segment_context(), "where is the meeting") ==
          "You are answering a question from a compressed conversation context.\n"
          "Context:\n"
          "the cat sat\n"
          "[SUMMARY] vienna trip planned\n"
          "Question: where is the meeting\n"
          "Answer:");
}

TEST_CASE("the mock transport replays responses and records prompts") {
    auto mock = std::make_shared<MockChatTransport>(
        std::vector<std::string>{"first reply", "second reply"});
    GatewayClient client(enabled_cfg(), mock);
    const auto ctx = two_segment_context();
    CHECK(client.generate_answer(ctx, "where") == "first reply");
    CHECK(client.generate_answer(ctx, "when") == "second reply");
    CHECK(client.generate_answer(ctx, "why") == "second reply");
    REQUIRE(mock->requests().size() == 3);
    REQUIRE(mock->requests()[0].size() == 1);
    CHECK(mock->requests()[0][0].first == "user");
    CHECK(mock->requests()[0][0].second == build_answer_prompt(ctx, "where"));

    auto starved = std::make_shared<MockChatTransport>(std::vector<std::string>{});
    GatewayClient empty_client(enabled_cfg(), starved);
    CHECK_THROWS_AS(empty_client.generate_answer(ctx, "where"), GatewayError);
}

TEST_CASE("remote summaries respect the local token cap") {
    auto mock = std::make_shared<MockChatTransport>(
        std::vector<std::string>{"alpha bravo charlie delta echo foxtrot", "short one"});
    GatewayClient client(enabled_cfg(), mock);
    CHECK(client.summarize_remote("irrelevant block", 3) == "[SUMMARY] alpha bravo charlie");
    CHECK(client.summarize_remote("irrelevant block", 10) == "[SUMMARY] short one");
}

TEST_CASE("contradiction replies parse as clamped probabilities") {
    auto reply = [](const std::string& text) {
        auto mock = std::make_shared<MockChatTransport>(std::vector<std::string>{text});
        return GatewayClient(enabled_cfg(), mock).contradiction_remote("a", "b");
    };
    CHECK(reply("0.73") == doctest::Approx(0.73));
    CHECK(reply(" 0.25\n") == doctest::Approx(0.25));
    CHECK(reply("1.0") == 1.0);
    CHECK(reply("2.5") == 1.0);
    CHECK(reply("-3") == 0.0);
    CHECK_THROWS_AS(reply("maybe"), GatewayError);
    CHECK_THROWS_AS(reply("0.5 roughly"), GatewayError);
    CHECK_THROWS_AS(reply("   "), GatewayError);
    CHECK_THROWS_AS(reply("nan"), GatewayError);
}

TEST_CASE("a disabled gateway refuses calls and yields no hooks") {
    GatewayClient client(GatewayConfig{});
    CHECK_FALSE(client.enabled());
    CHECK_THROWS_AS(client.generate_answer(two_segment_context(), "q"), GatewayError);
    CHECK_THROWS_AS(client.summarize_remote("block", 5), GatewayError);
    CHECK_THROWS_AS(client.contradiction_remote("a", "b"), GatewayError);
    const auto hooks = client.hooks();
    CHECK_FALSE(static_cast<bool>(hooks.scorers.similarity));
    CHECK_FALSE(static_cast<bool>(hooks.scorers.contradiction));
    CHECK_FALSE(static_cast<bool>(hooks.summarize));
    CHECK_FALSE(static_cast<bool>(hooks.answer));
}

TEST_CASE("hooks wire the remote scorers into the engine") {
    auto mock =
        std::make_shared<MockChatTransport>(std::vector<std::string>{"0"});
    GatewayClient client(enabled_cfg(), mock);
    const auto hooks = client.hooks();
    CHECK_FALSE(static_cast<bool>(hooks.scorers.similarity));
    REQUIRE(static_cast<bool>(hooks.scorers.contradiction));
    REQUIRE(static_cast<bool>(hooks.summarize));
    REQUIRE(static_cast<bool>(hooks.answer));
    CHECK(hooks.scorers.contradiction("a", "b") == 0.0);

    std::vector<Turn> turns;
    Turn t0{"t0", 0, "user", "budget approved for friday", -1};
    Turn t1{"t1", 1, "assistant", "zeppelin chartered for vienna", -1};
    turns = {t0, t1};
    Conversation conv("c", turns);
    Query q{"budget", 2};
    const std::string prev = "budget not approved";

    auto remote = compress_step(conv, q, EngineConfig{}, prev, std::nullopt, hooks);
    for (const auto& st : remote.scored) {
        CHECK(st.c == 1.0);
    }
    CHECK(remote.flags.count("contradiction-fallback") == 0);

    auto builtin = compress_step(conv, q, EngineConfig{}, prev);
    CHECK(builtin.scored[0].c == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("an unparseable remote score falls back to the builtin") {
    auto mock = std::make_shared<MockChatTransport>(std::vector<std::string>{"n/a"});
    GatewayClient client(enabled_cfg(), mock);
    Turn t0{"t0", 0, "user", "budget approved for friday", -1};
    Turn t1{"t1", 1, "assistant", "zeppelin chartered for vienna", -1};
    Conversation conv("c", {t0, t1});
    Query q{"budget", 2};
    const std::string prev = "budget not approved";
    auto res = compress_step(conv, q, EngineConfig{}, prev, std::nullopt, client.hooks());
    CHECK(res.flags.count("contradiction-fallback") == 1);
    auto builtin = compress_step(conv, q, EngineConfig{}, prev);
    for (size_t i = 0; i < res.scored.size(); ++i) {
        CHECK(res.scored[i].c == doctest::Approx(builtin.scored[i].c).epsilon(1e-15));
    }
}

TEST_CASE("environment variables configure the gateway") {
    ::setenv("CTX_LLM_ENDPOINT", "http://env.test/v1", 1);
    ::setenv("CTX_LLM_API_KEY", "sk-123", 1);
    ::setenv("CTX_LLM_MODEL", "m1", 1);
    auto cfg = GatewayConfig::from_env();
    CHECK(cfg.endpoint_url == "http://env.test/v1");
    CHECK(cfg.api_key == "sk-123");
    CHECK(cfg.model_name == "m1");
    CHECK(cfg.enabled());
    ::unsetenv("CTX_LLM_ENDPOINT");
    ::unsetenv("CTX_LLM_API_KEY");
    ::unsetenv("CTX_LLM_MODEL");
    auto off = GatewayConfig::from_env();
    CHECK_FALSE(off.enabled());
    CHECK(off.model_name == "default");
}

TEST_CASE("only plain http endpoints are accepted") {
    HttpChatTransport transport;
    auto attempt = [&](const std::string& url) {
        GatewayConfig cfg;
        cfg.endpoint_url = url;
        transport.complete({{"user", "hi"}}, cfg);
    };
    CHECK_THROWS_AS(attempt("https://secure.example/v1"), GatewayError);
    CHECK_THROWS_AS(attempt("ftp://files.example/v1"), GatewayError);
    CHECK_THROWS_AS(attempt("http://host:99999/v1"), GatewayError);
    CHECK_THROWS_AS(attempt("http://:80/v1"), GatewayError);
    try {
        attempt("https://secure.example/v1");
    } catch (const GatewayError& e) {
        CHECK(std::string(e.what()).find("https") != std::string::npos);
    }
}

}  // TEST_SUITE
