#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "graphxain/chat_client.hpp"

#include <chrono>
#include <cstdlib>
#include <semaphore>
#include <thread>

#include <json.hpp>

#include "graphxain/errors.hpp"
#include "graphxain/narrative.hpp"

namespace graphxain {

void ProviderConfig::validate() const {
    if (timeout_seconds <= 0.0) throw ValidationError("provider timeout must be > 0");
    if (temperature < 0.0) throw ValidationError("provider temperature must be >= 0");
    if (max_in_flight < 1) throw ValidationError("provider max_in_flight must be >= 1");
    if (!mock && endpoint_url.empty()) {
        throw ValidationError("provider endpoint_url not configured (or pass --mock)");
    }
}

namespace {

// Splits a full endpoint URL into the scheme://host[:port] base and the path.
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ValidationError("endpoint_url must include a scheme: " + url);
    }
    const auto path_begin = url.find('/', scheme_end + 3);
    if (path_begin == std::string::npos) return {url, "/"};
    return {url.substr(0, path_begin), url.substr(path_begin)};
}

} // namespace

ChatTransport make_httplib_transport() {
    return [](const HttpRequest& req) -> HttpResponse {
        HttpResponse out;
        try {
            auto [base, path] = split_url(req.url);
            httplib::Client cli(base);
            const auto timeout =
                std::chrono::milliseconds(static_cast<long>(req.timeout_seconds * 1000.0));
            cli.set_connection_timeout(timeout);
            cli.set_read_timeout(timeout);
            cli.set_write_timeout(timeout);
            httplib::Headers headers;
            if (!req.bearer_token.empty()) {
                headers.emplace("Authorization", "Bearer " + req.bearer_token);
            }
            auto res = cli.Post(path, headers, req.body, "application/json");
            if (!res) {
                out.error = "transport: " + httplib::to_string(res.error());
                return out;
            }
            out.transport_ok = true;
            out.status = res->status;
            out.body = res->body;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
        return out;
    };
}

ChatTransport make_mock_transport() {
    return [](const HttpRequest& req) -> HttpResponse {
        HttpResponse out;
        out.transport_ok = true;
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception&) {
            out.status = 400;
            out.body = R"({"error":"malformed request body"})";
            return out;
        }
        std::string user;
        for (const auto& msg : body.value("messages", nlohmann::json::array())) {
            if (msg.value("role", "") == "user") user = msg.value("content", "");
        }
        const std::string text = mock_completion(user);
        nlohmann::json resp;
        resp["choices"] = {{{"message", {{"role", "assistant"}, {"content", text}}}}};
        resp["usage"] = {{"prompt_tokens", user.size() / 4},
                         {"completion_tokens", text.size() / 4}};
        out.status = 200;
        out.body = resp.dump();
        return out;
    };
}

struct ChatClient::Gate {
    std::counting_semaphore<256> sem;
    explicit Gate(std::ptrdiff_t n) : sem(n) {}
};

ChatClient::ChatClient(ProviderConfig cfg, ChatTransport transport)
    : cfg_(std::move(cfg)),
      transport_(transport ? std::move(transport)
                           : (cfg_.mock ? make_mock_transport() : make_httplib_transport())),
      gate_(new Gate(static_cast<std::ptrdiff_t>(
          std::min<std::size_t>(cfg_.max_in_flight, 256)))) {
    cfg_.validate();
}

ChatClient::~ChatClient() { delete gate_; }

ChatCompletion ChatClient::complete(const std::string& system_message,
                                    const std::string& user_message) {
    std::string token;
    if (!cfg_.mock) {
        const char* raw = std::getenv(cfg_.api_key_env.c_str());
        if (raw == nullptr || raw[0] == '\0') {
            throw CredentialError("no API key in environment variable " + cfg_.api_key_env);
        }
        token = raw;
    }

    nlohmann::ordered_json body;
    body["model"] = cfg_.model_name;
    body["messages"] = {{{"role", "system"}, {"content", system_message}},
                        {{"role", "user"}, {"content", user_message}}};
    body["temperature"] = cfg_.temperature;

    HttpRequest req;
    req.url = cfg_.mock ? "mock://chat" : cfg_.endpoint_url;
    req.body = body.dump();
    req.bearer_token = token;
    req.timeout_seconds = cfg_.timeout_seconds;

    gate_->sem.acquire();
    struct Release {
        Gate* g;
        ~Release() { g->sem.release(); }
    } release{gate_};

    std::string last_error;
    for (std::size_t attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0 && cfg_.backoff_base_seconds > 0.0) {
            const double delay =
                cfg_.backoff_base_seconds * static_cast<double>(1ull << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        HttpResponse resp = transport_(req);
        if (!resp.transport_ok) {
            last_error = resp.error.empty() ? "transport failure" : resp.error;
            continue;
        }
        if (resp.status == 401 || resp.status == 403) {
            throw CredentialError("provider rejected the credentials from " + cfg_.api_key_env +
                                  " (status " + std::to_string(resp.status) + ")");
        }
        if (resp.status >= 500) {
            last_error = "provider status " + std::to_string(resp.status);
            continue;
        }
        if (resp.status < 200 || resp.status >= 300) {
            throw ProviderError("provider returned status " + std::to_string(resp.status));
        }

        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(resp.body);
        } catch (const nlohmann::json::exception& e) {
            throw ProviderError("malformed provider response: " + std::string(e.what()));
        }
        if (!doc.contains("choices") || doc["choices"].empty()) {
            throw ProviderError("empty completion: provider returned no choices");
        }
        ChatCompletion done;
        done.content = doc["choices"][0].value("message", nlohmann::json::object())
                           .value("content", "");
        if (done.content.empty()) {
            throw ProviderError("empty completion: provider returned no content");
        }
        if (doc.contains("usage")) {
            TokenUsage usage;
            usage.prompt_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
            usage.completion_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
            done.usage = usage;
        }
        done.retry_count = attempt;
        return done;
    }
    throw TransportError("request failed after " + std::to_string(cfg_.max_retries) +
                         " retries: " + last_error);
}

} // namespace graphxain
