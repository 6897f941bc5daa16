#pragma once

#include "mofsmith/agent.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mofsmith::prompts {

/// The agent turn: tool list plus the question and scratchpad so far, ending in "Thought:".
llm::CompletionRequest agent_request(std::string_view question, const agent::ToolRegistry& tools,
                                     const std::vector<agent::AgentStep>& steps);

/// One table-searcher turn. `turns` carries earlier Input/Observation pairs.
llm::CompletionRequest searcher_request(std::string_view question, const dataset::Table& table,
                                        const std::vector<llm::Turn>& turns,
                                        const std::optional<std::string>& last_error);

llm::CompletionRequest predict_plan_request(std::string_view question, const dataset::Registry& registry);

llm::CompletionRequest predict_answer_request(std::string_view question, std::string_view table_markdown,
                                              std::string_view information);

llm::CompletionRequest gen_plan_request(std::string_view question, const dataset::Registry& registry);

llm::CompletionRequest gen_children_request(std::string_view question, const std::vector<Gene>& parents,
                                            std::size_t k);

} // namespace mofsmith::prompts
