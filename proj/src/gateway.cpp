#include "ctxcomp/gateway.hpp"

#include <cstdlib>
#include <memory>

#include <httplib.h>
#include <json.hpp>

#include "ctxcomp/errors.hpp"
#include "ctxcomp/memory.hpp"
#include "ctxcomp/tokenizer.hpp"

namespace ctxcomp {

GatewayConfig GatewayConfig::from_env() {
    GatewayConfig cfg;
    if (const char* endpoint = std::getenv("CTX_LLM_ENDPOINT")) cfg.endpoint_url = endpoint;
    if (const char* key = std::getenv("CTX_LLM_API_KEY")) cfg.api_key = key;
    if (const char* model = std::getenv("CTX_LLM_MODEL")) cfg.model_name = model;
    return cfg;
}

namespace {

struct ParsedUrl {
    std::string host;
    int port = 80;
    std::string path = "/";
};

ParsedUrl parse_http_url(const std::string& url) {
    const std::string scheme = "http://";
    if (url.rfind("https://", 0) == 0) {
        throw GatewayError("https endpoints are not supported; point CTX_LLM_ENDPOINT at a "
                           "plain-http proxy");
    }
    if (url.rfind(scheme, 0) != 0) {
        throw GatewayError("endpoint URL must start with http://, got '" + url + "'");
    }
    ParsedUrl out;
    std::string rest = url.substr(scheme.size());
    const size_t slash = rest.find('/');
    if (slash != std::string::npos) {
        out.path = rest.substr(slash);
        rest = rest.substr(0, slash);
    }
    const size_t colon = rest.find(':');
    if (colon != std::string::npos) {
        const std::string port_str = rest.substr(colon + 1);
        try {
            size_t used = 0;
            out.port = std::stoi(port_str, &used);
            if (used != port_str.size() || out.port < 1 || out.port > 65535) {
                throw std::invalid_argument("range");
            }
        } catch (const std::exception&) {
            throw GatewayError("bad port in endpoint URL '" + url + "'");
        }
        rest = rest.substr(0, colon);
    }
    if (rest.empty()) {
        throw GatewayError("missing host in endpoint URL '" + url + "'");
    }
    out.host = rest;
    return out;
}

std::string extract_content(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw GatewayError(std::string("malformed response body: ") + e.what());
    }
    if (!j.contains("choices") || !j.at("choices").is_array() || j.at("choices").empty()) {
        throw GatewayError("response has no choices");
    }
    const auto& first = j.at("choices").at(0);
    if (!first.contains("message") || !first.at("message").contains("content") ||
        !first.at("message").at("content").is_string()) {
        throw GatewayError("response lacks choices[0].message.content");
    }
    return first.at("message").at("content").get<std::string>();
}

std::string trimmed(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::string HttpChatTransport::complete(const std::vector<ChatMessage>& messages,
                                        const GatewayConfig& cfg) {
    const ParsedUrl url = parse_http_url(cfg.endpoint_url);

    nlohmann::ordered_json body;
    body["model"] = cfg.model_name;
    nlohmann::ordered_json msgs = nlohmann::ordered_json::array();
    for (const auto& [role, content] : messages) {
        msgs.push_back({{"role", role}, {"content", content}});
    }
    body["messages"] = std::move(msgs);
    body["temperature"] = cfg.temperature;
    const std::string payload = body.dump();

    httplib::Client client(url.host, url.port);
    const time_t sec = cfg.timeout_ms / 1000;
    const time_t usec = (cfg.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);

    httplib::Headers headers;
    if (!cfg.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + cfg.api_key);
    }

    std::string last_error;
    const int attempts = cfg.max_retries + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        auto res = client.Post(url.path, headers, payload, "application/json");
        if (!res) {
            last_error = "connection error (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        return extract_content(res->body);
    }
    throw GatewayError("request to " + cfg.endpoint_url + " failed after " +
                       std::to_string(attempts) + " attempts: " + last_error);
}

MockChatTransport::MockChatTransport(std::vector<std::string> responses)
    : responses_(std::move(responses)) {}

std::string MockChatTransport::complete(const std::vector<ChatMessage>& messages,
                                        const GatewayConfig&) {
    requests_.push_back(messages);
    if (responses_.empty()) {
        throw GatewayError("mock transport has no responses");
    }
    const size_t i = std::min(cursor_, responses_.size() - 1);
    ++cursor_;
    return responses_[i];
}

std::string build_summary_prompt(const std::string& block_text, int cap_tokens) {
    return "Summarize the following dialogue block in at most " + std::to_string(cap_tokens) +
           " tokens. Keep concrete facts.\n\n" + block_text;
}

std::string build_answer_prompt(const CompressedContext& context, const std::string& question) {
    std::string prompt = "You are answering a question from a compressed conversation context.\n";
    prompt += "Context:\n";
    for (const auto& seg : context.segments) {
        prompt += seg.text;
        prompt += '\n';
    }
    prompt += "Question: " + question + "\n";
    prompt += "Answer:";
    return prompt;
}

std::string build_contradiction_prompt(const std::string& text_a, const std::string& text_b) {
    return "Do the following two statements contradict each other? Reply with only a probability "
           "between 0 and 1.\nA: " +
           text_a + "\nB: " + text_b;
}

GatewayClient::GatewayClient(GatewayConfig cfg, std::shared_ptr<ChatTransport> transport)
    : cfg_(std::move(cfg)), transport_(std::move(transport)) {
    if (!transport_ && cfg_.enabled()) {
        transport_ = std::make_shared<HttpChatTransport>();
    }
}

std::string GatewayClient::raw_summary(const std::string& block_text, int cap_tokens,
                                       const TokenizerSpec& spec) const {
    if (!enabled()) {
        throw GatewayError("gateway disabled: no endpoint configured");
    }
    const auto content =
        transport_->complete({{"user", build_summary_prompt(block_text, cap_tokens)}}, cfg_);
    return truncate_to_tokens(content, cap_tokens, spec);
}

std::string GatewayClient::summarize_remote(const std::string& block_text, int cap_tokens,
                                            const TokenizerSpec& spec) const {
    return std::string(kSummaryMarker) + raw_summary(block_text, cap_tokens, spec);
}

std::string GatewayClient::generate_answer(const CompressedContext& context,
                                           const std::string& question) const {
    if (!enabled()) {
        throw GatewayError("gateway disabled: no endpoint configured");
    }
    return transport_->complete({{"user", build_answer_prompt(context, question)}}, cfg_);
}

double GatewayClient::contradiction_remote(const std::string& text_a,
                                           const std::string& text_b) const {
    if (!enabled()) {
        throw GatewayError("gateway disabled: no endpoint configured");
    }
    const auto reply = trimmed(
        transport_->complete({{"user", build_contradiction_prompt(text_a, text_b)}}, cfg_));
    if (reply.empty()) {
        throw GatewayError("empty contradiction reply");
    }
    char* end = nullptr;
    const double value = std::strtod(reply.c_str(), &end);
    if (end != reply.c_str() + reply.size()) {
        throw GatewayError("contradiction reply is not a number: '" + reply + "'");
    }
    if (!(value == value)) {
        throw GatewayError("contradiction reply is NaN");
    }
    return std::max(0.0, std::min(1.0, value));
}

EngineHooks GatewayClient::hooks(const TokenizerSpec& spec) const {
    EngineHooks h;
    if (!enabled()) return h;
    const auto self = std::make_shared<GatewayClient>(*this);
    h.scorers.contradiction = [self](const std::string& a, const std::string& b) {
        return self->contradiction_remote(a, b);
    };
    h.summarize = [self, spec](const std::string& block, int cap) {
        return self->raw_summary(block, cap, spec);
    };
    h.answer = [self](const CompressedContext& ctx, const std::string& question) {
        return self->generate_answer(ctx, question);
    };
    return h;
}

}  // namespace ctxcomp
