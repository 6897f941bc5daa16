#pragma once

#include "mofsmith/tokens.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace mofsmith::llm {

class BackendUnavailable : public Error {
public:
    using Error::Error;
};

class NoScriptedResponse : public Error {
public:
    explicit NoScriptedResponse(std::string digest)
        : Error("no scripted response for prompt " + digest), digest_(std::move(digest)) {}
    const std::string& digest() const noexcept { return digest_; }

private:
    std::string digest_;
};

/// One earlier step of the conversation the request belongs to.
struct Turn {
    std::string action;
    std::string input;
    std::string observation;
};

struct CompletionRequest {
    std::string system_prompt;
    std::string user_prompt;
    std::vector<std::string> stop;
    double temperature = 0.1;
    int max_tokens = 512;

    // Structured context. Text backends ignore it; rule-based backends plan from it.
    std::string task;
    std::string question;
    std::vector<Turn> history;
    std::optional<std::string> last_error;

    /// Throws Error when temperature is outside [0, 2] or more than 4 stop sequences are set.
    void validate() const;
    std::string prompt_text() const;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    /// Raw completion; callers normally go through llm::complete().
    virtual std::string generate(const CompletionRequest& request) = 0;
    virtual std::size_t estimate(std::string_view text) const { return estimate_tokens(text); }
};

/// Validates, generates, and truncates at the earliest stop sequence.
std::string complete(Backend& backend, const CompletionRequest& request);

std::string truncate_at_stop(std::string_view text, const std::vector<std::string>& stop);

/// Responses keyed by the request's question; each key has its own cursor.
/// A key may also be written as the hex FNV-1a digest of the question.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::map<std::string, std::vector<std::string>> script);
    static std::unique_ptr<ScriptedBackend> from_json(std::string_view json_text);
    static std::unique_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

    std::string name() const override { return "scripted"; }
    std::string generate(const CompletionRequest& request) override;

private:
    std::map<std::string, std::vector<std::string>> script_;
    std::map<std::string, std::size_t> cursor_;
    std::mutex mutex_;
};

/// Serves recorded completions in order; prompts in the transcript are informational.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(std::vector<std::string> completions);
    /// JSON lines of {"role": "prompt"|"completion", "content": ...}.
    static std::unique_ptr<ReplayBackend> from_jsonl(std::string_view text);
    static std::unique_ptr<ReplayBackend> from_file(const std::filesystem::path& path);

    std::string name() const override { return "replay"; }
    std::string generate(const CompletionRequest& request) override;
    std::size_t remaining() const noexcept { return completions_.size() - cursor_; }

private:
    std::vector<std::string> completions_;
    std::size_t cursor_ = 0;
    std::mutex mutex_;
};

struct HttpConfig {
    std::string url;  ///< e.g. https://api.example.com/v1/chat/completions
    std::string api_key;
    std::string model;
    int timeout_seconds = 60;

    /// MOFSMITH_LLM_URL, MOFSMITH_LLM_KEY, MOFSMITH_LLM_MODEL.
    static HttpConfig from_env();
};

/// Generic chat-completions client: POSTs {model, messages, temperature, max_tokens, stop}
/// and reads choices[0].message.content.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpConfig config);
    std::string name() const override { return "http"; }
    std::string generate(const CompletionRequest& request) override;

private:
    HttpConfig config_;
};

std::string chat_request_body(const HttpConfig& config, const CompletionRequest& request);
std::string parse_chat_response(std::string_view body);

/// Forwards to `inner` and appends each prompt/completion pair to `out` as replay JSON lines.
class RecordingBackend : public Backend {
public:
    RecordingBackend(Backend& inner, std::ostream& out) : inner_(inner), out_(out) {}
    std::string name() const override { return inner_.name(); }
    std::string generate(const CompletionRequest& request) override;
    std::size_t estimate(std::string_view text) const override { return inner_.estimate(text); }

private:
    Backend& inner_;
    std::ostream& out_;
    std::mutex mutex_;
};

} // namespace mofsmith::llm
