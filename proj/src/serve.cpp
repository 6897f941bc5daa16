#include "mofsmith/cli.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>

namespace mofsmith::cli {

using nlohmann::json;

namespace {

struct SessionState {
    std::mutex mutex;
    std::condition_variable cv;
    std::vector<std::string> frames;  ///< complete SSE frames
    bool done = false;
};

std::string sse_frame(const agent::TraceEvent& e) {
    return "event: " + std::string(agent::to_string(e.kind)) + "\ndata: " + agent::event_json(e) + "\n\n";
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, json{{"error", message}});
}

std::size_t config_size(const json& config, const char* key, std::size_t fallback) {
    if (!config.contains(key)) return fallback;
    const auto& v = config.at(key);
    if (!v.is_number_unsigned()) throw Error(std::string("config.") + key + " must be a non-negative integer");
    return v.get<std::size_t>();
}

generator::GenPlan plan_from_json(const json& plan, const dataset::Registry& registry) {
    if (plan.is_string()) return generator::parse_gen_plan(plan.get<std::string>(), &registry);
    if (!plan.is_object()) throw Error("plan must be a string or an object");
    auto list = [&](const char* key) {
        std::vector<std::string> out;
        if (!plan.contains(key)) return out;
        const auto& v = plan.at(key);
        if (v.is_string()) out.push_back(v.get<std::string>());
        else if (v.is_array())
            for (const auto& x : v) out.push_back(x.get<std::string>());
        else throw Error(std::string("plan.") + key + " must be a string or a list");
        return out;
    };
    auto properties = list("properties");
    auto objectives = list("objectives");
    if (properties.size() != objectives.size())
        throw generator::ObjectiveCountMismatch(properties.size(), objectives.size());
    return generator::parse_gen_plan("Property: " + text::join(properties, ", ") +
                                         "\nObjective: " + text::join(objectives, ", ") + "\n",
                                     &registry);
}

json tables_json(const dataset::Registry& registry) {
    json tables = json::array();
    for (const auto& e : registry.tables()) {
        json columns = json::array();
        for (const auto& c : e.table.columns())
            columns.push_back({{"header", c.header}, {"dtype", dataset::to_string(c.dtype)}});
        tables.push_back({{"name", e.table.name()},
                          {"rows", e.table.row_count()},
                          {"key", e.table.key_column()},
                          {"searchable", e.searchable},
                          {"primary", e.table.name() == registry.primary_table_name()},
                          {"columns", columns}});
    }
    json properties = json::array();
    for (const auto& p : registry.properties()) {
        json kinds = json::array();
        if (registry.lookup(p.name, dataset::MaterialKind::named_mof)) kinds.push_back("named_mof");
        if (registry.lookup(p.name, dataset::MaterialKind::gene)) kinds.push_back("gene");
        properties.push_back(
            {{"name", p.name}, {"unit", p.unit}, {"scale", to_string(p.scale)}, {"material_kinds", kinds}});
    }
    return json{{"tables", tables}, {"properties", properties}};
}

} // namespace

struct ApiServer::Impl {
    const dataset::Registry& registry;
    Settings settings;
    httplib::Server server;
    std::mutex mutex;
    std::map<std::string, std::shared_ptr<SessionState>> sessions;
    std::map<std::string, std::string> ga_summaries;
    std::vector<std::thread> workers;
    std::atomic<std::size_t> counter{0};

    Impl(const dataset::Registry& r, Settings s) : registry(r), settings(std::move(s)) { routes(); }

    ~Impl() {
        server.stop();
        for (auto& t : workers)
            if (t.joinable()) t.join();
    }

    std::string next_id(const char* prefix) {
        return prefix + std::to_string(++counter);
    }

    void start_session(const std::string& id, const std::string& question, const std::string& backend_name,
                       std::shared_ptr<SessionState> state) {
        // Backend errors surface before the id is handed out.
        auto backend = std::shared_ptr<llm::Backend>(make_backend(settings, registry, backend_name));
        std::lock_guard lock(mutex);
        workers.emplace_back([this, id, question, backend, state] {
            TokenBudget budget(settings.budget, settings.budget_mode);
            agent::AgentConfig config;
            config.max_steps = settings.max_steps;
            config.export_dir = settings.export_dir;
            config.data_root = settings.data;
            config.ga.seed = settings.seed;
            auto sink = [&](const agent::TraceEvent& e) {
                std::lock_guard l(state->mutex);
                state->frames.push_back(sse_frame(e));
                state->cv.notify_all();
            };
            try {
                agent::run_session(question, agent::default_tools(), registry, *backend, budget, config, sink, id);
            } catch (const std::exception& e) {
                agent::TraceEvent err{id, 0, agent::EventKind::error, "agent", std::string("logic_error: ") + e.what(), 0};
                sink(err);
            }
            std::lock_guard l(state->mutex);
            state->done = true;
            state->cv.notify_all();
        });
    }

    void routes() {
        server.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            json body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object() || !body.contains("question") ||
                !body["question"].is_string() || text::trim(body["question"].get<std::string>()).empty())
                return send_error(res, 400, "expected {\"question\": string, \"backend\"?: string}");
            std::string backend = settings.backend;
            if (body.contains("backend")) {
                if (!body["backend"].is_string()) return send_error(res, 400, "backend must be a string");
                backend = body["backend"].get<std::string>();
            }
            auto id = next_id("s-");
            auto state = std::make_shared<SessionState>();
            try {
                start_session(id, body["question"].get<std::string>(), backend, state);
            } catch (const std::exception& e) {
                return send_error(res, 400, e.what());
            }
            {
                std::lock_guard lock(mutex);
                sessions[id] = state;
            }
            send_json(res, 201, json{{"session_id", id}});
        });

        server.Get(R"(/api/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
            std::shared_ptr<SessionState> state;
            {
                std::lock_guard lock(mutex);
                auto it = sessions.find(req.matches[1]);
                if (it == sessions.end()) return send_error(res, 404, "unknown session");
                state = it->second;
            }
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream", [state, sent = std::size_t{0}](std::size_t, httplib::DataSink& sink) mutable {
                    std::unique_lock lock(state->mutex);
                    state->cv.wait(lock, [&] { return state->done || sent < state->frames.size(); });
                    while (sent < state->frames.size()) {
                        const auto& f = state->frames[sent++];
                        if (!sink.write(f.data(), f.size())) return false;
                    }
                    if (state->done) sink.done();
                    return true;
                });
        });

        server.Post("/api/ga", [this](const httplib::Request& req, httplib::Response& res) {
            json body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object() || !body.contains("plan"))
                return send_error(res, 400, "expected {\"plan\": ..., \"config\"?: {...}}");
            try {
                auto plan = plan_from_json(body["plan"], registry);
                json c = body.value("config", json::object());
                if (!c.is_object()) throw Error("config must be an object");
                generator::GAConfig config;
                config.cycles = config_size(c, "cycles", config.cycles);
                config.parents_per_topology = config_size(c, "parents", config.parents_per_topology);
                config.children_per_topology = config_size(c, "children", config.children_per_topology);
                config.base_pool_size = config_size(c, "pool_size", config.base_pool_size);
                config.seed = c.contains("seed") ? config_size(c, "seed", 0) : settings.seed;
                if (c.contains("topologies")) config.topologies = c["topologies"].get<std::vector<std::string>>();
                auto pool = generator::load_gene_pool(registry, plan, config.base_pool_size);
                auto result = generator::run_ga(plan, config, pool, generator::gene_surrogate(registry, plan));
                auto id = next_id("ga-");
                {
                    std::lock_guard lock(mutex);
                    ga_summaries[id] = generator::ga_summary_json(result);
                }
                send_json(res, 201, json{{"run_id", id}});
            } catch (const std::exception& e) {
                send_error(res, 400, e.what());
            }
        });

        server.Get(R"(/api/ga/([^/]+)/summary)", [this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard lock(mutex);
            auto it = ga_summaries.find(req.matches[1]);
            if (it == ga_summaries.end()) return send_error(res, 404, "unknown run");
            res.set_content(it->second, "application/json");
        });

        server.Get("/api/tables", [this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, tables_json(registry));
        });

        if (!settings.webroot.empty()) server.set_mount_point("/", settings.webroot);

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) send_json(res, res.status, json{{"error", httplib::status_message(res.status)}});
        });
    }
};

ApiServer::ApiServer(const dataset::Registry& registry, Settings settings)
    : impl_(std::make_unique<Impl>(registry, std::move(settings))) {}

ApiServer::~ApiServer() = default;

int ApiServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool ApiServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }

void ApiServer::listen() { impl_->server.listen_after_bind(); }

void ApiServer::stop() { impl_->server.stop(); }

} // namespace mofsmith::cli
