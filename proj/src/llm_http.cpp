#include "mofsmith/llm.hpp"

#include <httplib.h>

#include <cstdlib>

namespace mofsmith::llm {

namespace {

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? v : "";
}

struct Endpoint {
    std::string origin;
    std::string path;
};

Endpoint split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw BackendUnavailable("invalid backend URL '" + url + "'");
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

HttpConfig HttpConfig::from_env() {
    HttpConfig c;
    c.url = env_or_empty("MOFSMITH_LLM_URL");
    c.api_key = env_or_empty("MOFSMITH_LLM_KEY");
    c.model = env_or_empty("MOFSMITH_LLM_MODEL");
    return c;
}

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
    if (config_.url.empty()) throw BackendUnavailable("http backend needs a URL (MOFSMITH_LLM_URL)");
    split_url(config_.url);
}

std::string HttpBackend::generate(const CompletionRequest& request) {
    auto ep = split_url(config_.url);
    httplib::Client client(ep.origin);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(ep.path, headers, chat_request_body(config_, request), "application/json");
    if (!res) throw BackendUnavailable("request to " + config_.url + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw BackendUnavailable("backend returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    return parse_chat_response(res->body);
}

} // namespace mofsmith::llm
