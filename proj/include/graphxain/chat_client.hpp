#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace graphxain {

struct ProviderConfig {
    std::string endpoint_url;
    std::string model_name = "gpt-4o";
    std::string api_key_env = "GRAPHXAIN_API_KEY";
    double temperature = 0.0;
    double timeout_seconds = 30.0;
    std::size_t max_retries = 3;
    double backoff_base_seconds = 0.25; // doubled per retry
    std::size_t max_in_flight = 2;
    bool mock = false;

    void validate() const;
};

struct HttpRequest {
    std::string url;
    std::string body;         // JSON chat-completion payload
    std::string bearer_token; // empty for the mock transport
    double timeout_seconds = 30.0;
};

struct HttpResponse {
    bool transport_ok = false; // false: connection/timeout failure, see error
    int status = 0;
    std::string body;
    std::string error;
};

using ChatTransport = std::function<HttpResponse(const HttpRequest&)>;

// Real HTTP transport (TLS when the URL scheme is https).
ChatTransport make_httplib_transport();

// Offline transport: answers every request with a deterministic completion
// synthesized from the request's user message. No sockets involved.
ChatTransport make_mock_transport();

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct ChatCompletion {
    std::string content;
    std::optional<TokenUsage> usage;
    std::size_t retry_count = 0;
};

// One chat-completion call with bounded concurrency and retry on transport
// errors and 5xx (exponential backoff). 4xx responses never retry.
class ChatClient {
public:
    explicit ChatClient(ProviderConfig cfg, ChatTransport transport = nullptr);
    ~ChatClient();

    ChatClient(const ChatClient&) = delete;
    ChatClient& operator=(const ChatClient&) = delete;

    ChatCompletion complete(const std::string& system_message, const std::string& user_message);

    const ProviderConfig& config() const { return cfg_; }

private:
    ProviderConfig cfg_;
    ChatTransport transport_;
    struct Gate;
    Gate* gate_; // bounded in-flight requests
};

} // namespace graphxain
