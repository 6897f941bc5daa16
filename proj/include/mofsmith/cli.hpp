#pragma once

#include "mofsmith/agent.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mofsmith::cli {

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Settings shared by every subcommand after precedence is applied.
struct Settings {
    std::string data = "data";
    std::string backend = "rules";
    std::size_t budget = 4000;
    BudgetMode budget_mode = BudgetMode::session;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    int port = 8080;
    std::size_t max_steps = 8;
    std::string script;      ///< scripted backend file
    std::string transcript;  ///< replay backend file
    std::string webroot;
    std::string export_dir = "predictions";
};

/// Keys: data, backend, budget, budget_mode, seed, workers, port, max_steps, script,
/// transcript, webroot, export_dir. Flags win over MOFSMITH_<KEY> environment
/// variables, which win over the config file, which wins over defaults.
Settings resolve_settings(const std::map<std::string, std::string>& flags,
                          const std::map<std::string, std::string>& env, std::string_view config_text);

/// `key = value` lines; `#` starts a comment; values may be quoted. Unknown keys are errors.
std::map<std::string, std::string> parse_config(std::string_view text);

/// Backend named by `settings.backend`.
std::unique_ptr<llm::Backend> make_backend(const Settings& settings, const dataset::Registry& registry,
                                           std::string_view backend = {});

/// Maps the outcome label to the process exit code (0 answered, 2 token limit, 3 logic error).
int exit_code(OutcomeLabel label) noexcept;

/// Full command line (argv[0] first). Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

/// MOFSMITH_* variables of the running process, keyed without the prefix and lowercased.
std::map<std::string, std::string> process_env();

/// HTTP API used by the web console.
class ApiServer {
public:
    ApiServer(const dataset::Registry& registry, Settings settings);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds to 127.0.0.1 on a free port and returns it.
    int bind_any_port(const std::string& host = "127.0.0.1");
    bool bind(const std::string& host, int port);
    /// Serves until stop(); call after a bind.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace mofsmith::cli
