#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ctxcomp/budget.hpp"
#include "ctxcomp/engine.hpp"

namespace ctxcomp {

/// Chat message as (role, content).
using ChatMessage = std::pair<std::string, std::string>;

/**
 * Connection settings for a chat-completions-compatible endpoint. The
 * gateway is disabled while endpoint_url is empty; temperature defaults to 0
 * so remote calls are as reproducible as the endpoint allows.
 */
struct GatewayConfig {
    std::string endpoint_url;
    std::string api_key;
    std::string model_name = "default";
    int timeout_ms = 30000;
    int max_retries = 2;
    double temperature = 0.0;

    bool enabled() const { return !endpoint_url.empty(); }

    /// Reads CTX_LLM_ENDPOINT, CTX_LLM_API_KEY and CTX_LLM_MODEL.
    static GatewayConfig from_env();
};

/// One round trip to a chat endpoint: messages in, assistant text out.
/// Failures are reported as GatewayError.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    virtual std::string complete(const std::vector<ChatMessage>& messages,
                                 const GatewayConfig& cfg) = 0;
};

/**
 * HTTP transport. POSTs {"model", "messages", "temperature"} to the
 * configured URL and reads choices[0].message.content back. Retries
 * connection errors and non-2xx statuses up to max_retries times. Plain
 * http only.
 */
class HttpChatTransport : public ChatTransport {
public:
    std::string complete(const std::vector<ChatMessage>& messages,
                         const GatewayConfig& cfg) override;
};

/**
 * In-tree deterministic stand-in: replies with the canned responses in
 * order (the last one repeats), recording every prompt it saw. The only
 * gateway the test suite talks to.
 */
class MockChatTransport : public ChatTransport {
public:
    explicit MockChatTransport(std::vector<std::string> responses);

    std::string complete(const std::vector<ChatMessage>& messages,
                         const GatewayConfig& cfg) override;

    const std::vector<std::vector<ChatMessage>>& requests() const { return requests_; }

private:
    std::vector<std::string> responses_;
    size_t cursor_ = 0;
    std::vector<std::vector<ChatMessage>> requests_;
};

/// Fixed prompt templates; tests pin them byte-for-byte.
std::string build_summary_prompt(const std::string& block_text, int cap_tokens);
std::string build_answer_prompt(const CompressedContext& context, const std::string& question);
std::string build_contradiction_prompt(const std::string& text_a, const std::string& text_b);

/**
 * High-level operations over a transport. Every call throws GatewayError
 * when the gateway is disabled or the transport fails; callers fall back to
 * the local heuristics.
 */
class GatewayClient {
public:
    explicit GatewayClient(GatewayConfig cfg, std::shared_ptr<ChatTransport> transport = nullptr);

    bool enabled() const { return cfg_.enabled(); }
    const GatewayConfig& config() const { return cfg_; }

    /// Remote summary, truncated locally to cap_tokens and prefixed with the
    /// summary marker. The remote text is advisory; the local cap is law.
    std::string summarize_remote(const std::string& block_text, int cap_tokens,
                                 const TokenizerSpec& spec = {}) const;

    /// Answer a question from the compressed context via build_answer_prompt.
    std::string generate_answer(const CompressedContext& context,
                                const std::string& question) const;

    /// Contradiction probability parsed from a constrained numeric reply,
    /// clamped to [0, 1]. An unparseable reply is a GatewayError.
    double contradiction_remote(const std::string& text_a, const std::string& text_b) const;

    /// Engine hooks wrapping the three operations. Disabled gateway yields
    /// empty hooks, keeping the engine fully local.
    EngineHooks hooks(const TokenizerSpec& spec = {}) const;

private:
    std::string raw_summary(const std::string& block_text, int cap_tokens,
                            const TokenizerSpec& spec) const;

    GatewayConfig cfg_;
    std::shared_ptr<ChatTransport> transport_;
};

}  // namespace ctxcomp
