#include "mofsmith/llm.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace mofsmith::llm {

using nlohmann::json;

void CompletionRequest::validate() const {
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw Error("temperature must be within [0, 2], got " + text::format_number(temperature));
    if (stop.size() > 4) throw Error("at most 4 stop sequences are allowed");
    if (max_tokens < 1) throw Error("max_tokens must be positive");
}

std::string CompletionRequest::prompt_text() const {
    if (system_prompt.empty()) return user_prompt;
    return system_prompt + "\n\n" + user_prompt;
}

std::string truncate_at_stop(std::string_view text, const std::vector<std::string>& stop) {
    auto cut = text.size();
    for (const auto& s : stop) {
        if (s.empty()) continue;
        auto p = text.find(s);
        if (p != std::string_view::npos) cut = std::min(cut, p);
    }
    return std::string(text.substr(0, cut));
}

std::string complete(Backend& backend, const CompletionRequest& request) {
    request.validate();
    return truncate_at_stop(backend.generate(request), request.stop);
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BackendUnavailable("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

ScriptedBackend::ScriptedBackend(std::map<std::string, std::vector<std::string>> script)
    : script_(std::move(script)) {}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_json(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw BackendUnavailable(std::string("invalid script: ") + e.what());
    }
    if (!doc.is_object()) throw BackendUnavailable("invalid script: expected an object of question -> responses");
    std::map<std::string, std::vector<std::string>> script;
    for (auto& [key, value] : doc.items()) {
        if (value.is_string()) {
            script[key].push_back(value.get<std::string>());
        } else if (value.is_array()) {
            for (auto& v : value) {
                if (!v.is_string()) throw BackendUnavailable("invalid script: responses for '" + key + "' must be strings");
                script[key].push_back(v.get<std::string>());
            }
        } else {
            throw BackendUnavailable("invalid script: responses for '" + key + "' must be strings");
        }
    }
    return std::make_unique<ScriptedBackend>(std::move(script));
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
    return from_json(read_file(path));
}

std::string ScriptedBackend::generate(const CompletionRequest& request) {
    std::string key(text::trim(request.question));
    if (key.empty()) {
        // Fall back to the last "Question:" line of the prompt.
        auto p = request.user_prompt.rfind("Question:");
        if (p != std::string::npos) {
            auto e = request.user_prompt.find('\n', p);
            key = std::string(text::trim(request.user_prompt.substr(p + 9, e == std::string::npos ? e : e - p - 9)));
        }
    }
    auto digest = text::hex_digest(key);
    std::lock_guard lock(mutex_);
    auto it = script_.find(key);
    if (it == script_.end()) it = script_.find(digest);
    if (it == script_.end()) throw NoScriptedResponse(digest);
    auto& cursor = cursor_[it->first];
    if (cursor >= it->second.size()) throw NoScriptedResponse(digest + "#" + std::to_string(cursor));
    return it->second[cursor++];
}

ReplayBackend::ReplayBackend(std::vector<std::string> completions) : completions_(std::move(completions)) {}

std::unique_ptr<ReplayBackend> ReplayBackend::from_jsonl(std::string_view text) {
    std::vector<std::string> completions;
    std::size_t line_no = 0;
    for (const auto& line : text::split(text, '\n')) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw BackendUnavailable("transcript line " + std::to_string(line_no) + ": " + e.what());
        }
        auto role = j.value("role", "");
        if (role == "completion") completions.push_back(j.value("content", ""));
        else if (role != "prompt")
            throw BackendUnavailable("transcript line " + std::to_string(line_no) + ": unknown role '" + role + "'");
    }
    return std::make_unique<ReplayBackend>(std::move(completions));
}

std::unique_ptr<ReplayBackend> ReplayBackend::from_file(const std::filesystem::path& path) { return from_jsonl(read_file(path)); }

std::string ReplayBackend::generate(const CompletionRequest& request) {
    std::lock_guard lock(mutex_);
    if (cursor_ >= completions_.size())
        throw NoScriptedResponse(text::hex_digest(request.prompt_text()) + "#" + std::to_string(cursor_));
    return completions_[cursor_++];
}

std::string RecordingBackend::generate(const CompletionRequest& request) {
    auto out = inner_.generate(request);
    std::lock_guard lock(mutex_);
    out_ << json{{"role", "prompt"}, {"content", request.prompt_text()}}.dump() << '\n';
    out_ << json{{"role", "completion"}, {"content", out}}.dump() << '\n';
    out_.flush();
    return out;
}

std::string chat_request_body(const HttpConfig& config, const CompletionRequest& request) {
    json messages = json::array();
    if (!request.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
    json body{{"model", config.model},
              {"messages", messages},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};
    if (!request.stop.empty()) body["stop"] = request.stop;
    return body.dump();
}

std::string parse_chat_response(std::string_view body) {
    try {
        auto j = json::parse(body);
        if (j.contains("error")) {
            auto& e = j["error"];
            throw BackendUnavailable("backend error: " + (e.is_object() ? e.value("message", e.dump()) : e.dump()));
        }
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw BackendUnavailable(std::string("malformed chat-completion response: ") + e.what());
    }
}

} // namespace mofsmith::llm
