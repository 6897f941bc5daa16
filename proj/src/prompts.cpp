#include "mofsmith/prompts.hpp"

#include "mofsmith/query.hpp"

namespace mofsmith::prompts {

namespace {

std::vector<std::string> property_names(const dataset::Registry& registry, dataset::MaterialKind kind) {
    std::vector<std::string> out;
    for (const auto& p : registry.properties())
        if (registry.lookup(p.name, kind)) out.push_back(p.name);
    return out;
}

} // namespace

llm::CompletionRequest agent_request(std::string_view question, const agent::ToolRegistry& tools,
                                     const std::vector<agent::AgentStep>& steps) {
    std::string tool_lines;
    for (const auto& t : tools.tools()) tool_lines += t.name + ": " + t.description + "\n";

    llm::CompletionRequest r;
    r.task = "agent";
    r.question = std::string(question);
    r.system_prompt =
        "You act like a material scientist answering a question. Answer the following questions as best you can. "
        "You have access to the following tools:\n\n" +
        tool_lines +
        "\nYou must not use tool `generator` when `Question` does not required to generate.\n\n"
        "Use the following format:\n\n"
        "Question: the input question you must answer\n"
        "Thought: you should always think about what to do\n"
        "Action: the action to take, should be one of [" +
        text::join(tools.names(), ", ") +
        "]\n"
        "Action Input: the input to the action\n"
        "Observation: the result of the action\n"
        "... (this Thought/Action/Action Input/Observation can repeat N times)\n"
        "Thought: I now know the final answer\n"
        "Final Answer: the final answer to the original input question\n\n"
        "Begin!";
    r.user_prompt = "Question: " + std::string(question) + "\n" + agent::render_scratchpad(steps) + "Thought:";
    r.stop = {"\nObservation:"};
    for (const auto& s : steps)
        if (s.action) r.history.push_back({*s.action, s.action_input.value_or(""), s.observation.value_or("")});
    return r;
}

llm::CompletionRequest searcher_request(std::string_view question, const dataset::Table& table,
                                        const std::vector<llm::Turn>& turns,
                                        const std::optional<std::string>& last_error) {
    std::vector<std::string> cols;
    for (const auto& c : table.columns()) cols.push_back(query::quote_identifier(c.header));

    llm::CompletionRequest r;
    r.task = "table_search";
    r.question = std::string(question);
    r.system_prompt =
        "You are working with a table named `" + table.name() +
        "`. You should write one valid TQL query as input (SELECT ... FROM ... [WHERE ...] [ORDER BY ...] "
        "[LIMIT n], or DESCRIBE `column` FROM ...; quote columns with backticks).\n\n"
        "Use the following format:\n\n"
        "Question: the input question you must answer\n"
        "Thought: you should always think about what to do\n"
        "Input: the valid TQL query\n"
        "Observation: the result of the query\n"
        "... (this Thought/Input/Observation can repeat N times)\n"
        "Final Thought: you should think about how to answer the question based on your observation\n"
        "Final Answer: the final answer to the original input question. If you can't answer the question, say "
        "`nothing`\n\n"
        "The column must be one of " +
        text::join(cols, ", ") +
        ". If it's not in the columns you want, skip straight to Final Thought.\n\nBegin!";
    std::string user = "Question: " + std::string(question) + "\n";
    for (const auto& t : turns) user += "Input: " + t.input + "\nObservation: " + t.observation + "\n";
    if (last_error) user += "The previous input failed: " + *last_error + "\nWrite a corrected Input.\n";
    r.user_prompt = user;
    r.stop = {"\nObservation:"};
    r.history = turns;
    r.last_error = last_error;
    return r;
}

llm::CompletionRequest predict_plan_request(std::string_view question, const dataset::Registry& registry) {
    llm::CompletionRequest r;
    r.task = "predict_plan";
    r.question = std::string(question);
    r.system_prompt =
        "plan to use machine learning to predict the properties of matter. To answer the question, you have to "
        "fill in the following format:\n\n"
        "Question: the input question you must answer\n"
        "Thought: you should always think about what to do\n"
        "Property: the property you can predict, should be one of [`" +
        text::join(property_names(registry, dataset::MaterialKind::named_mof), "`, `") +
        "`]\n"
        "Material: names of materials separated using comma. If you need to proceed for all material, write *. "
        "To proceed for a specific topology, append the topology name with an * (ex. pcu*)\n"
        "... (this Property/Material can repeat N times)\n"
        "Final Thought: you should think about how you will derive a final answer from the results of machine "
        "learning.\n\nBegin!";
    r.user_prompt = "Question: " + std::string(question) + "\n";
    return r;
}

llm::CompletionRequest predict_answer_request(std::string_view question, std::string_view table_markdown,
                                              std::string_view information) {
    llm::CompletionRequest r;
    r.task = "predict_answer";
    r.question = std::string(question);
    r.user_prompt = "You need to answer the question from the markdown table below\n\nMarkdown Table:\n\n" +
                    std::string(table_markdown) + "\n" + std::string(information) +
                    "\n\nQuestion: " + std::string(question) + "\n\nAnswer:";
    return r;
}

llm::CompletionRequest gen_plan_request(std::string_view question, const dataset::Registry& registry) {
    llm::CompletionRequest r;
    r.task = "gen_plan";
    r.question = std::string(question);
    r.system_prompt =
        "Create a plan to generate material based on the following question.\n\n"
        "Use the following format:\n\n"
        "Question: the input question you must to answer\n"
        "Thought: you should always think about what to do\n"
        "Property: the property you can predict, must be one of [`" +
        text::join(property_names(registry, dataset::MaterialKind::gene), "`, `") +
        "`]\n"
        "Objective: you should decide what criteria you wan to generate by (max, min, near <value>, or "
        "range <low> <high>).\n"
        "Search look-up table: plan to extract 100 material for the purpose from the look-up table where the "
        "property is pre-calculated.\n"
        "Genetic algorithm: plan to create a new materials using the 100 extracted materials.\n"
        "Final thought: get a final answer based on the structures you generate.\n\nBegin!";
    r.user_prompt = "Question: " + std::string(question) + "\n";
    return r;
}

llm::CompletionRequest gen_children_request(std::string_view question, const std::vector<Gene>& parents,
                                            std::size_t k) {
    std::vector<std::string> ps;
    for (const auto& p : parents) ps.push_back(p.block1 + "+" + p.block2);
    llm::CompletionRequest r;
    r.task = "gen_children";
    r.question = std::string(question);
    r.system_prompt =
        "You should act as a generator to find the optimal material. A substance consists of a block1, block2, "
        "and must maintain the order. I will give you " +
        std::to_string(parents.size()) +
        " parent materials. Based on these, you must answer as many new children as you expect to answer the "
        "question. The block1 and block2 used in the child must be the blocks used in the parent, and you must "
        "not create blocks that don't exist. You must generate children diverse. The children must not be "
        "duplicates of existing parents or already created children. You output children only and nothing "
        "else.\n\nBegin.";
    r.user_prompt = "Question: " + std::string(question) + "\n\nParent:\n\nV12+T31, V24+T32, V7+T12\n\n"
                    "4 new Children:\n\nV12+T12, V24+T31, V7+T31, V7+T32\n\nParent:\n\n" +
                    text::join(ps, ", ") + "\n\n" + std::to_string(k) + " new Children:\n";
    r.max_tokens = 2048;
    return r;
}

} // namespace mofsmith::prompts
