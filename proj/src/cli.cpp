#include "mofsmith/cli.hpp"

#include "mofsmith/bench.hpp"
#include "mofsmith/predictor.hpp"
#include "mofsmith/rules.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

extern char** environ;

namespace mofsmith::cli {

namespace {

const std::vector<std::string> setting_keys = {"data",    "backend", "budget",    "budget_mode",
                                               "seed",    "workers", "port",      "max_steps",
                                               "script",  "transcript", "webroot", "export_dir"};

template <class T>
T parse_unsigned(const std::string& key, const std::string& value) {
    auto v = text::parse_number(value);
    if (!v || *v < 0 || *v != static_cast<double>(static_cast<T>(*v)))
        throw ConfigError("setting '" + key + "' expects a non-negative integer, got '" + value + "'");
    return static_cast<T>(*v);
}

void apply(Settings& s, const std::string& key, const std::string& value) {
    if (key == "data") s.data = value;
    else if (key == "backend") {
        if (value != "rules" && value != "scripted" && value != "replay" && value != "http")
            throw ConfigError("unknown backend '" + value + "' (rules, scripted, replay, http)");
        s.backend = value;
    } else if (key == "budget") {
        s.budget = parse_unsigned<std::size_t>(key, value);
        if (s.budget == 0) throw ConfigError("budget must be positive");
    } else if (key == "budget_mode") {
        if (value == "session") s.budget_mode = BudgetMode::session;
        else if (value == "per_call") s.budget_mode = BudgetMode::per_call;
        else throw ConfigError("budget_mode must be session or per_call");
    } else if (key == "seed") s.seed = parse_unsigned<std::uint64_t>(key, value);
    else if (key == "workers") s.workers = std::max<std::size_t>(1, parse_unsigned<std::size_t>(key, value));
    else if (key == "port") s.port = static_cast<int>(parse_unsigned<unsigned>(key, value));
    else if (key == "max_steps") s.max_steps = parse_unsigned<std::size_t>(key, value);
    else if (key == "script") s.script = value;
    else if (key == "transcript") s.transcript = value;
    else if (key == "webroot") s.webroot = value;
    else if (key == "export_dir") s.export_dir = value;
    else throw ConfigError("unknown setting '" + key + "'");
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + p.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::map<std::string, std::string> parse_config(std::string_view src) {
    std::map<std::string, std::string> out;
    std::size_t n = 0;
    for (const auto& raw : text::split(src, '\n')) {
        ++n;
        std::string line(raw);
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        auto l = text::trim(line);
        if (l.empty()) continue;
        auto eq = l.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(n) + ": expected key = value");
        std::string key(text::trim(l.substr(0, eq)));
        std::string value(text::trim(l.substr(eq + 1)));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        if (std::find(setting_keys.begin(), setting_keys.end(), key) == setting_keys.end())
            throw ConfigError("config line " + std::to_string(n) + ": unknown key '" + key + "'");
        out[key] = value;
    }
    return out;
}

Settings resolve_settings(const std::map<std::string, std::string>& flags,
                          const std::map<std::string, std::string>& env, std::string_view config_text) {
    Settings s;
    auto config = parse_config(config_text);
    for (const auto& key : setting_keys) {
        if (auto f = flags.find(key); f != flags.end()) apply(s, key, f->second);
        else if (auto e = env.find(key); e != env.end()) apply(s, key, e->second);
        else if (auto c = config.find(key); c != config.end()) apply(s, key, c->second);
    }
    return s;
}

std::map<std::string, std::string> process_env() {
    std::map<std::string, std::string> out;
    for (char** e = environ; e && *e; ++e) {
        std::string_view kv(*e);
        if (!text::starts_with(kv, "MOFSMITH_")) continue;
        auto eq = kv.find('=');
        if (eq == std::string_view::npos) continue;
        out[text::lower(kv.substr(9, eq - 9))] = std::string(kv.substr(eq + 1));
    }
    return out;
}

std::unique_ptr<llm::Backend> make_backend(const Settings& s, const dataset::Registry& registry,
                                           std::string_view backend) {
    std::string name = backend.empty() ? s.backend : std::string(backend);
    if (name == "rules") return std::make_unique<rules::RulesBackend>(registry);
    if (name == "scripted") {
        if (s.script.empty()) throw ConfigError("the scripted backend needs --script <file>");
        return llm::ScriptedBackend::from_file(s.script);
    }
    if (name == "replay") {
        if (s.transcript.empty()) throw ConfigError("the replay backend needs --transcript <file>");
        return llm::ReplayBackend::from_file(s.transcript);
    }
    if (name == "http") {
        auto config = llm::HttpConfig::from_env();
        if (config.url.empty()) throw ConfigError("the http backend needs MOFSMITH_LLM_URL");
        return std::make_unique<llm::HttpBackend>(config);
    }
    throw ConfigError("unknown backend '" + name + "'");
}

int exit_code(OutcomeLabel label) noexcept {
    switch (label) {
    case OutcomeLabel::answered: return 0;
    case OutcomeLabel::token_limit: return 2;
    case OutcomeLabel::logic_error: return 3;
    }
    return 3;
}

namespace {

struct Context {
    Settings settings;
    std::ostream& out;
    std::ostream& err;
};

dataset::Registry open_registry(const Settings& s) {
    if (!std::filesystem::is_directory(s.data)) throw ConfigError("dataset directory '" + s.data + "' not found");
    return dataset::load_registry(s.data);
}

agent::AgentConfig agent_config(const Settings& s) {
    agent::AgentConfig c;
    c.max_steps = s.max_steps;
    c.export_dir = s.export_dir;
    c.data_root = s.data;
    c.ga.seed = s.seed;
    return c;
}

int ask(Context& ctx, const std::string& question, bool json, const std::string& record) {
    auto registry = open_registry(ctx.settings);
    auto backend = make_backend(ctx.settings, registry);
    std::ofstream record_out;
    std::unique_ptr<llm::RecordingBackend> recorder;
    llm::Backend* used = backend.get();
    if (!record.empty()) {
        record_out.open(record, std::ios::binary);
        if (!record_out) throw ConfigError("cannot write '" + record + "'");
        recorder = std::make_unique<llm::RecordingBackend>(*backend, record_out);
        used = recorder.get();
    }
    TokenBudget budget(ctx.settings.budget, ctx.settings.budget_mode);
    auto sink = [&](const agent::TraceEvent& e) {
        ctx.out << (json ? agent::event_json(e) : agent::pretty_event(e)) << "\n";
        ctx.out.flush();
    };
    auto outcome = agent::run_session(question, agent::default_tools(), registry, *used, budget,
                                      agent_config(ctx.settings), sink);
    return exit_code(outcome.label);
}

int chat(Context& ctx, std::istream& in) {
    auto registry = open_registry(ctx.settings);
    auto tools = agent::default_tools();
    std::string line;
    ctx.out << "> " << std::flush;
    while (std::getline(in, line)) {
        auto q = std::string(text::trim(line));
        if (q == "exit" || q == "quit") break;
        if (!q.empty()) {
            auto backend = make_backend(ctx.settings, registry);
            TokenBudget budget(ctx.settings.budget, ctx.settings.budget_mode);
            auto outcome = agent::run_session(q, tools, registry, *backend, budget, agent_config(ctx.settings),
                                              [&](const agent::TraceEvent& e) {
                                                  ctx.out << agent::pretty_event(e) << "\n";
                                              });
            (void)outcome;
        }
        ctx.out << "> " << std::flush;
    }
    ctx.out << "\n";
    return 0;
}

struct GenerateArgs {
    std::vector<std::string> properties;
    std::vector<std::string> objectives;
    std::size_t cycles = 3;
    std::size_t parents = 100;
    std::size_t children = 100;
    std::size_t pool_size = 2000;
    std::string topologies;
    std::string out;
    std::string summary;
    std::string csv;
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << content;
}

int generate(Context& ctx, const GenerateArgs& a) {
    auto registry = open_registry(ctx.settings);
    if (a.properties.size() != a.objectives.size())
        throw generator::ObjectiveCountMismatch(a.properties.size(), a.objectives.size());
    auto plan = generator::parse_gen_plan(
        "Property: " + text::join(a.properties, ", ") + "\nObjective: " + text::join(a.objectives, ", ") + "\n",
        &registry);
    generator::GAConfig config;
    config.cycles = a.cycles;
    config.parents_per_topology = a.parents;
    config.children_per_topology = a.children;
    config.base_pool_size = a.pool_size;
    config.seed = ctx.settings.seed;
    if (!a.topologies.empty()) {
        config.topologies.clear();
        for (const auto& t : text::split(a.topologies, ','))
            if (!text::trim(t).empty()) config.topologies.emplace_back(text::trim(t));
    }
    auto pool = generator::load_gene_pool(registry, plan, config.base_pool_size);
    auto result = generator::run_ga(plan, config, pool, generator::gene_surrogate(registry, plan));
    if (!a.out.empty()) write_file(a.out, generator::ga_result_json(result));
    if (!a.summary.empty()) write_file(a.summary, generator::ga_summary_json(result));
    if (!a.csv.empty()) write_file(a.csv, generator::ga_summary_csv(result));
    for (const auto& g : result.generations)
        ctx.out << "generation " << g.index << ": mean " << text::format_general(g.population.mean) << ", best fitness "
                << text::format_general(g.population.best_fitness) << "\n";
    std::vector<std::string> values;
    for (std::size_t i = 0; i < plan.properties.size(); ++i)
        values.push_back(plan.properties[i] + " = " + text::format_general(result.best.values[i]));
    ctx.out << "best " << format_gene(result.best.gene) << " (" << text::join(values, ", ") << ")\n";
    for (const auto& l : result.log) ctx.err << l << "\n";
    return 0;
}

int predict(Context& ctx, const std::string& property, const std::string& material, const std::string& question,
            const std::string& csv_dir) {
    auto registry = open_registry(ctx.settings);
    const auto* spec = registry.resolve_property(property);
    if (!spec || !registry.lookup(spec->name, dataset::MaterialKind::named_mof))
        throw predictor::UnknownProperty(property);
    auto selector = predictor::MaterialSelector::parse(material);
    auto ids = predictor::resolve_materials(selector, registry);
    auto policy = selector.kind == predictor::MaterialSelector::Kind::named ? predictor::MissPolicy::raise
                                                                           : predictor::MissPolicy::skip;
    auto table = predictor::predict(registry, spec->name, ids, policy);
    ctx.out << predictor::prediction_markdown(table);
    if (!question.empty()) {
        try {
            ctx.out << predictor::answer_from_table(question, table) << "\n";
        } catch (const predictor::Unanswerable& e) {
            ctx.err << e.what() << "\n";
            return 3;
        }
    }
    if (!csv_dir.empty())
        ctx.out << "saved " << predictor::export_csv(table, csv_dir, predictor::utc_timestamp()).string() << "\n";
    return 0;
}

int eval(Context& ctx, const std::string& suite_path, const std::string& out_path) {
    auto registry = open_registry(ctx.settings);
    auto suite = bench::load_suite(suite_path);
    bench::RunConfig config;
    config.agent = agent_config(ctx.settings);
    config.generation_ga.seed = ctx.settings.seed;
    config.budget = ctx.settings.budget;
    config.budget_mode = ctx.settings.budget_mode;
    config.workers = ctx.settings.workers;
    // Fail fast on backend configuration before running any item.
    make_backend(ctx.settings, registry);
    auto settings = ctx.settings;
    auto report = bench::run_suite(suite, registry, agent::default_tools(),
                                   [&](const bench::SuiteItem&) { return make_backend(settings, registry); }, config);
    ctx.out << bench::report_table(report);
    if (!out_path.empty()) write_file(out_path, bench::report_json(report) + "\n");
    return 0;
}

int tables(Context& ctx) {
    auto registry = open_registry(ctx.settings);
    for (const auto& e : registry.tables()) {
        const auto& t = e.table;
        ctx.out << t.name() << " (" << t.row_count() << " rows, key " << t.key_column()
                << (e.searchable ? ", searchable" : "") << (t.name() == registry.primary_table_name() ? ", primary" : "")
                << ")\n";
        for (const auto& c : t.columns()) ctx.out << "  " << c.header << " [" << dataset::to_string(c.dtype) << "]\n";
    }
    ctx.out << "properties\n";
    for (const auto& p : registry.properties()) {
        std::vector<std::string> kinds;
        if (registry.lookup(p.name, dataset::MaterialKind::named_mof)) kinds.push_back("named");
        if (registry.lookup(p.name, dataset::MaterialKind::gene)) kinds.push_back("gene");
        ctx.out << "  " << p.name << (p.unit.empty() ? "" : " (" + p.unit + ")")
                << (p.scale == Scale::log ? " log" : "") << " [" << text::join(kinds, ", ") << "]\n";
    }
    return 0;
}

int serve(Context& ctx, const std::string& host) {
    auto registry = open_registry(ctx.settings);
    ApiServer server(registry, ctx.settings);
    if (!server.bind(host, ctx.settings.port))
        throw ConfigError("cannot bind " + host + ":" + std::to_string(ctx.settings.port));
    ctx.out << "listening on http://" << host << ":" << ctx.settings.port << "\n" << std::flush;
    server.listen();
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Question answering, prediction, and generation over MOF property tables.", "mofsmith"};
    app.fallthrough();
    app.require_subcommand(1);

    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
        options[key] = app.add_option(name, values[key], help);
    };
    flag("--data", "data", "dataset directory holding registry.json");
    flag("--backend", "backend", "rules, scripted, replay, or http");
    flag("--budget", "budget", "token budget (default 4000)");
    flag("--budget-mode", "budget_mode", "session (cumulative) or per_call");
    flag("--seed", "seed", "random seed");
    flag("--workers", "workers", "parallel workers for eval");
    flag("--port", "port", "serve port");
    flag("--max-steps", "max_steps", "agent step limit");
    flag("--script", "script", "scripted backend file");
    flag("--transcript", "transcript", "replay backend transcript");
    flag("--webroot", "webroot", "static files served by serve");
    flag("--export-dir", "export_dir", "where predictor CSV exports go");
    std::string config_path;
    app.add_option("--config", config_path, "key = value settings file");

    auto* ask_cmd = app.add_subcommand("ask", "answer one question");
    std::string question, record;
    bool json = false;
    ask_cmd->add_option("question", question, "the question")->required();
    ask_cmd->add_flag("--json", json, "print trace events as JSON lines");
    ask_cmd->add_option("--record", record, "write the prompt/completion transcript here");

    auto* chat_cmd = app.add_subcommand("chat", "interactive session; one question per line");

    auto* gen_cmd = app.add_subcommand("generate", "run the genetic algorithm directly");
    GenerateArgs gen;
    gen_cmd->add_option("--property", gen.properties, "gene property (repeatable)")->required();
    gen_cmd->add_option("--objective", gen.objectives, "max | min | near V | range L H (repeatable)")->required();
    gen_cmd->add_option("--cycles", gen.cycles, "GA cycles");
    gen_cmd->add_option("--parents", gen.parents, "parents per topology");
    gen_cmd->add_option("--children", gen.children, "children per topology");
    gen_cmd->add_option("--pool-size", gen.pool_size, "base pool entries per topology");
    gen_cmd->add_option("--topologies", gen.topologies, "comma-separated topologies");
    gen_cmd->add_option("--out", gen.out, "full result JSON");
    gen_cmd->add_option("--summary", gen.summary, "per-generation summary JSON");
    gen_cmd->add_option("--csv", gen.csv, "per-generation summary CSV");

    auto* pred_cmd = app.add_subcommand("predict", "look up model predictions");
    std::string property, material = "*", pred_question, csv_dir;
    pred_cmd->add_option("--property", property, "property name")->required();
    pred_cmd->add_option("--material", material, "names, *, or topology* (default *)");
    pred_cmd->add_option("--question", pred_question, "answer this question from the predictions");
    pred_cmd->add_option("--csv", csv_dir, "export the predictions as CSV into this directory");

    auto* eval_cmd = app.add_subcommand("eval", "run a question suite and write a report");
    std::string suite, report;
    eval_cmd->add_option("--suite", suite, "suite JSONL")->required();
    eval_cmd->add_option("--out", report, "report JSON");

    auto* tables_cmd = app.add_subcommand("tables", "list registered tables and properties");

    auto* serve_cmd = app.add_subcommand("serve", "HTTP API for the web console");
    std::string host = "127.0.0.1";
    serve_cmd->add_option("--host", host, "bind address");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        std::map<std::string, std::string> flags;
        for (const auto& [key, opt] : options)
            if (opt->count() > 0) flags[key] = values[key];
        auto env = process_env();
        std::string config_text;
        if (config_path.empty())
            if (auto e = env.find("config"); e != env.end()) config_path = e->second;
        if (!config_path.empty()) config_text = read_text(config_path);

        Context ctx{resolve_settings(flags, env, config_text), out, err};
        if (*ask_cmd) return ask(ctx, question, json, record);
        if (*chat_cmd) return chat(ctx, in);
        if (*gen_cmd) return generate(ctx, gen);
        if (*pred_cmd) return predict(ctx, property, material, pred_question, csv_dir);
        if (*eval_cmd) return eval(ctx, suite, report);
        if (*tables_cmd) return tables(ctx);
        if (*serve_cmd) return serve(ctx, host);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace mofsmith::cli
