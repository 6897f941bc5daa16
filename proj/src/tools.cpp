#include "mofsmith/agent.hpp"

#include "mofsmith/calc.hpp"
#include "mofsmith/predictor.hpp"
#include "mofsmith/prompts.hpp"
#include "mofsmith/query.hpp"
#include "mofsmith/structure.hpp"

#include <regex>

namespace mofsmith::agent {

namespace {

std::string unquote(std::string_view s) {
    s = text::trim(s);
    while (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
        s = text::trim(s.substr(1, s.size() - 2));
    return std::string(s);
}

// Value of the first line starting with `key`, trimmed.
std::optional<std::string> field(std::string_view completion, std::string_view key) {
    for (const auto& line : text::split(completion, '\n')) {
        auto l = text::trim(line);
        if (text::starts_with(l, key)) return std::string(text::trim(l.substr(key.size())));
    }
    return std::nullopt;
}

// Text after `key` to the end of the completion.
std::optional<std::string> tail(std::string_view completion, std::string_view key) {
    auto p = completion.find(key);
    if (p == std::string_view::npos) return std::nullopt;
    return std::string(text::trim(completion.substr(p + key.size())));
}

struct SearcherDone {
    std::string thought;
    std::string answer;
};

std::string missing_topic(const std::string& input) {
    static const std::regex form(R"(^Search name (\S+) and provide information (?:on|of) its (.+?)\.?$)",
                                 std::regex::icase);
    std::smatch m;
    if (std::regex_match(input, m, form)) return "the " + m[2].str() + " of " + m[1].str();
    return "'" + input + "'";
}

std::string search_csv(std::string_view input, ToolContext& ctx) {
    const std::string source = "table_searcher";
    auto& session = ctx.session;
    const auto& table = ctx.registry.primary_table();
    const std::string question = unquote(input);

    query::TableLookup tables = [&](std::string_view name) -> const dataset::Table* {
        const auto* entry = ctx.registry.find_entry(name);
        return entry && entry->searchable ? &entry->table : nullptr;
    };
    auto estimate = [&](std::string_view s) { return session.backend().estimate(s); };

    std::vector<llm::Turn> turns;
    std::optional<SearcherDone> done;
    for (std::size_t turn = 0; turn < ctx.config.searcher_turns && !done; ++turn) {
        std::string dsl;
        query::Planner planner = [&](std::string_view, const std::optional<std::string>& last_error) {
            auto completion = session.call(prompts::searcher_request(question, table, turns, last_error));
            auto thought = field(completion, "Thought:");
            if (!thought) {
                auto first = text::trim(std::string_view(completion).substr(0, completion.find('\n')));
                if (!text::starts_with(first, "Input:") && !text::starts_with(first, "Final")) thought = std::string(first);
            }
            if (auto answer = tail(completion, "Final Answer:")) {
                SearcherDone d;
                d.thought = field(completion, "Final Thought:").value_or(thought.value_or(""));
                d.answer = *answer;
                if (thought && !thought->empty()) session.emit(EventKind::thought, source, *thought);
                throw d;
            }
            if (thought && !thought->empty()) session.emit(EventKind::thought, source, *thought);
            auto in = field(completion, "Input:");
            dsl = in ? *in : std::string(text::trim(completion));
            session.emit(EventKind::action, source, "Input: " + dsl);
            return dsl;
        };
        try {
            auto got = query::run_with_retries(question, tables, planner, ctx.config.search_attempts,
                                               session.budget().remaining(), estimate);
            std::string observation = got.markdown;
            for (const auto& r : got.results)
                if (r.row_count_total > r.rows.size())
                    observation += "\n(showing " + std::to_string(r.rows.size()) + " of " +
                                   std::to_string(r.row_count_total) + " rows)";
            session.charge_text(observation);
            session.emit(EventKind::observation, source, observation);
            turns.push_back({"search", dsl, observation});
        } catch (SearcherDone& d) {
            done = std::move(d);
        }
    }
    if (!done) throw Error("table searcher gave no final answer after " + std::to_string(turns.size()) + " queries");
    if (!done->thought.empty()) session.emit(EventKind::thought, source, "Final Thought: " + done->thought);

    auto answer = done->answer;
    if (answer.empty() || text::starts_with(text::lower(answer), "nothing"))
        return "The search_csv tool did not provide any information on " + missing_topic(question) +
               ". I need to find another way to obtain this information.";
    return answer + " " + final_hint();
}

std::string run_predictor(std::string_view input, ToolContext& ctx) {
    const std::string source = "predictor";
    auto& session = ctx.session;
    const std::string question = unquote(input);

    auto completion = session.call(prompts::predict_plan_request(question, ctx.registry));
    auto plan = predictor::parse_predict_plan(completion, ctx.registry);
    if (!plan.thought.empty()) session.emit(EventKind::thought, source, plan.thought);
    for (const auto& p : plan.pairs)
        session.emit(EventKind::action, source, "Property: " + p.property + "\nMaterial: " + p.materials.to_string());
    if (!plan.final_thought.empty()) session.emit(EventKind::thought, source, "Final Thought: " + plan.final_thought);

    std::vector<std::string> answers;
    bool logarithmic = false;
    bool export_requested = text::lower(question).find("csv") != std::string::npos ||
                            text::lower(plan.final_thought).find("csv") != std::string::npos;
    std::string stamp = export_requested ? predictor::utc_timestamp() : "";
    for (const auto& pair : plan.pairs) {
        auto ids = predictor::resolve_materials(pair.materials, ctx.registry);
        auto policy = pair.materials.kind == predictor::MaterialSelector::Kind::named ? predictor::MissPolicy::raise
                                                                                     : predictor::MissPolicy::skip;
        auto table = predictor::predict(ctx.registry, pair.property, ids, policy);
        logarithmic = logarithmic || table.logarithmic();
        auto fallback = [&](const std::string& markdown) {
            std::string info = "The values are predictions of " + table.property.name +
                               (table.property.unit.empty() ? "" : " in " + table.property.unit) +
                               (table.logarithmic() ? " on a logarithmic scale." : ".");
            return session.call(prompts::predict_answer_request(question, markdown, info));
        };
        std::string answer;
        try {
            answer = predictor::answer_from_table(question, table, fallback);
        } catch (const predictor::Unanswerable&) {
            answer = "The predictions for " + table.property.name + " did not answer the question.";
        }
        if (export_requested) {
            auto path = predictor::export_csv(table, ctx.config.export_dir, stamp);
            answer += " The predictions were saved to " + path.string() + ".";
        }
        answers.push_back(std::move(answer));
    }
    auto out = text::join(answers, " ");
    if (!logarithmic) out += " " + final_hint();
    return out;
}

std::string run_generator(std::string_view input, ToolContext& ctx) {
    const std::string source = "generator";
    auto& session = ctx.session;
    const std::string question = unquote(input);

    auto completion = session.call(prompts::gen_plan_request(question, ctx.registry));
    auto plan = generator::parse_gen_plan(completion, &ctx.registry);
    if (!plan.thought.empty()) session.emit(EventKind::thought, source, plan.thought);
    std::vector<std::string> objectives;
    for (const auto& o : plan.objectives) objectives.push_back(format_objective(o));
    session.emit(EventKind::action, source,
                 "Property: " + text::join(plan.properties, ", ") + "\nObjective: " + text::join(objectives, ", "));
    if (!plan.search_plan.empty()) session.emit(EventKind::thought, source, "Search look-up table: " + plan.search_plan);
    if (!plan.ga_plan.empty()) session.emit(EventKind::thought, source, "Genetic algorithm: " + plan.ga_plan);
    if (!plan.final_thought.empty()) session.emit(EventKind::thought, source, "Final Thought: " + plan.final_thought);

    auto pool = generator::load_gene_pool(ctx.registry, plan, ctx.config.ga.base_pool_size);
    auto surrogate = generator::gene_surrogate(ctx.registry, plan);
    auto config = ctx.config.ga;
    generator::ModelProposer proposer;
    if (ctx.config.model_proposer) {
        config.parallel = false;
        proposer = [&](const std::vector<Gene>& parents, std::size_t k) {
            return session.call(prompts::gen_children_request(question, parents, k));
        };
    }
    auto result = generator::run_ga(plan, config, pool, surrogate, proposer);
    for (const auto& line : result.log) session.emit(EventKind::observation, source, line);

    std::size_t offspring = 0;
    for (const auto& r : result.runs)
        for (const auto& g : r.generations) offspring += g.offspring.size();
    const auto* spec = ctx.registry.find_property(plan.properties.front());
    auto ref = generator::build_structure(result.best.gene, ctx.config.builder);
    std::string value = text::format_general(result.best.values.front(), 6);
    if (spec && !spec->unit.empty()) value += " " + spec->unit;
    return "Generated " + std::to_string(offspring) + " candidate materials over " + std::to_string(config.cycles) +
           " cycles on " + std::to_string(result.runs.size()) + " topologies. The best gene is " +
           format_gene(result.best.gene) + " with predicted " + plan.properties.front() + " = " + value +
           ". Structure file" + (ref.placeholder ? " (placeholder)" : "") + ": " + ref.path;
}

std::string run_calculator(std::string_view input, ToolContext&) {
    return text::format_number(calc::eval_expr(calculator_expression(input)));
}

std::string run_structure_info(std::string_view input, ToolContext& ctx) {
    std::filesystem::path path = unquote(input);
    if (path.is_relative() && !std::filesystem::exists(path) && !ctx.config.data_root.empty())
        path = ctx.config.data_root / path;
    return structure::describe_structure(structure::parse_cif(path));
}

std::string run_internet_search(std::string_view input, ToolContext&) {
    return "internet_search is not available offline, so there are no results for '" + unquote(input) +
           "'. I need to find another way to obtain this information.";
}

} // namespace

std::string calculator_expression(std::string_view input) {
    std::vector<std::string> kept;
    for (const auto& raw : text::split(input, '\n')) {
        auto l = std::string(text::trim(raw));
        if (text::starts_with(l, "```")) continue;
        if (text::starts_with(l, "import ") || text::starts_with(l, "from ")) continue;
        if (!l.empty()) kept.push_back(l);
    }
    std::string expr = kept.empty() ? std::string(text::trim(input)) : kept.back();
    expr = unquote(expr);
    if (text::starts_with(expr, "print(") && !expr.empty() && expr.back() == ')')
        expr = expr.substr(6, expr.size() - 7);
    for (std::string prefix : {"math.", "np.", "numpy."}) {
        for (auto p = expr.find(prefix); p != std::string::npos; p = expr.find(prefix, p)) {
            bool word_start = p == 0 || !(std::isalnum(static_cast<unsigned char>(expr[p - 1])) || expr[p - 1] == '_');
            if (word_start) expr.erase(p, prefix.size());
            else p += prefix.size();
        }
    }
    return expr;
}

ToolRegistry default_tools() {
    ToolRegistry tools;
    tools.add({"search_csv",
               "Look up tabulated properties of known MOFs (pore sizes, surface area, density, metals, "
               "open metal sites, topology). Input is a question in natural language.",
               search_csv,
               {}});
    tools.add({"predictor",
               "Predict properties of known MOFs with machine-learning models when they are not tabulated "
               "(gas uptake, diffusivity, Henry coefficient, bandgap, stability). Input is a question.",
               run_predictor,
               {}});
    tools.add({"generator",
               "Generate new MOFs with a genetic algorithm that meet a target property. Input is the request.",
               run_generator,
               {}});
    tools.add({"calculator", "Evaluate an arithmetic expression such as exp(-3.6) or 2*(3+4).", run_calculator,
               {"Python_REPL"}});
    tools.add({"structure_info", "Summarize a CIF file: formula, atom count, cell. Input is a file path.",
               run_structure_info,
               {}});
    tools.add({"internet_search", "Search the internet. Unavailable offline.", run_internet_search, {}});
    return tools;
}

} // namespace mofsmith::agent
