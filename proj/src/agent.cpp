/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, The IER Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ier/agent.hpp"

#include <nlohmann/json.hpp>

#include "ier/errors.hpp"
#include "ier/jsonl.hpp"

namespace ier {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string render_examples(std::span<const FewShot> examples, std::string_view key_label,
                            std::string_view value_label) {
    if (examples.empty()) return {};
    std::string out = "\n\nExamples from earlier tasks:\n";
    for (std::size_t i = 0; i < examples.size(); ++i) {
        out += "[Example " + std::to_string(i + 1) + "]\n";
        out += std::string(key_label) + ":\n" + examples[i].key + "\n";
        out += std::string(value_label) + ":\n" + examples[i].value + "\n";
    }
    return out;
}

std::string or_placeholder(const std::string& text) { return text.empty() ? "(no code yet)" : text; }

}  // namespace

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::Coding: return "coding";
        case Phase::Review: return "review";
        case Phase::Test: return "test";
    }
    return "?";
}

Phase phase_from_string(std::string_view name) {
    if (name == "coding") return Phase::Coding;
    if (name == "review") return Phase::Review;
    if (name == "test") return Phase::Test;
    throw InvalidArgument("unknown phase '" + std::string(name) + "'");
}

bool is_phase_done(std::string_view instruction) { return trim(instruction).starts_with(kPhaseDone); }

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                const std::string name(tmpl.substr(i + 1, close - i - 1));
                if (auto it = values.find(name); it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

// ---- scripted ----

ScriptedAgent ScriptedAgent::from_file(const std::string& path) {
    ScriptedAgent agent;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        try {
            const auto j = nlohmann::json::parse(line);
            const auto task_id = j.at("task_id").get<std::string>();
            const auto phase = j.at("phase").get<std::string>();
            if (phase == "pseudo") {
                agent.add_pseudo(task_id, j.at("source").get<std::size_t>(), j.at("target").get<std::size_t>(),
                                 j.at("instruction").get<std::string>());
            } else {
                agent.add_turn(task_id, phase_from_string(phase), j.at("round").get<std::size_t>(),
                               Turn{j.at("instruction").get<std::string>(), j.value("reply", std::string{})});
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad fixture entry: ") + e.what(), line_no);
        } catch (const InvalidArgument& e) {
            throw ParseError(std::string("bad fixture entry: ") + e.what(), line_no);
        }
    });
    return agent;
}

void ScriptedAgent::add_turn(const std::string& task_id, Phase phase, std::size_t round, Turn turn) {
    turns_[{task_id, phase, round}] = std::move(turn);
}

void ScriptedAgent::add_pseudo(const std::string& task_id, std::size_t source, std::size_t target,
                               std::string instruction) {
    pseudo_[{task_id, source, target}] = std::move(instruction);
}

const ScriptedAgent::Turn& ScriptedAgent::turn(const TurnContext& ctx) const {
    const auto it = turns_.find({ctx.task_id, ctx.phase, ctx.round});
    if (it == turns_.end())
        throw FixtureError("no fixture for (" + ctx.task_id + ", " + std::string(to_string(ctx.phase)) + ", " +
                           std::to_string(ctx.round) + ")");
    return it->second;
}

std::string ScriptedAgent::propose_instruction(const TurnContext& ctx, const Artifact&, std::span<const FewShot>) {
    const auto& t = turn(ctx);
    if (trim(t.instruction).empty()) throw BackendError("empty instruction in fixture", t.instruction);
    return t.instruction;
}

Artifact ScriptedAgent::respond_solution(const TurnContext& ctx, std::string_view, const Artifact&,
                                         std::span<const FewShot>) {
    return parse_fenced_reply(turn(ctx).reply);
}

std::string ScriptedAgent::pseudo_instruction(const std::string& task_id, const std::string&, const Solution& source,
                                              const Solution& target) {
    const auto it = pseudo_.find({task_id, source.index, target.index});
    if (it == pseudo_.end())
        throw FixtureError("no pseudo-instruction fixture for (" + task_id + ", " + std::to_string(source.index) +
                           ", " + std::to_string(target.index) + ")");
    if (trim(it->second).empty()) throw BackendError("empty pseudo-instruction", it->second);
    return it->second;
}

// ---- remote ----

PromptTemplates PromptTemplates::defaults() {
    PromptTemplates t;
    t.instruct_system =
        "You are the instructive agent of a two-agent software team. You read the current code and give the "
        "programmer exactly one concrete instruction for the {phase} phase. When nothing remains to be done in "
        "this phase, reply with \"<INFO> Finished\" and nothing else.";
    t.instruct_user =
        "Requirement:\n{task}\n\nCurrent code:\n{solution}\n\nLatest compile/run log:\n{feedback}\n\n"
        "Give the next instruction.";
    t.respond_system =
        "You are the responsive agent of a two-agent software team. Apply the instruction to the code and return "
        "the complete program. Write every file as its path on one line followed by a fenced code block.";
    t.respond_user = "Requirement:\n{task}\n\nCurrent code:\n{solution}\n\nInstruction:\n{instruction}";
    t.pseudo_system =
        "You summarize code changes as instructions. Given a task, an earlier version and a later version of a "
        "program, write a single imperative directive that would transform the earlier version into the later one.";
    t.pseudo_user = "Task:\n{task}\n\nEarlier version:\n{source}\n\nLater version:\n{target}\n\nDirective:";
    return t;
}

RemoteAgent::RemoteAgent(RemoteSettings settings, PromptTemplates templates)
    : client_(std::make_unique<JsonHttpClient>(std::move(settings))), templates_(std::move(templates)) {}

RemoteAgent::~RemoteAgent() = default;

std::vector<ChatMessage> RemoteAgent::instruct_messages(const TurnContext& ctx, const Artifact& current,
                                                        std::span<const FewShot> examples) const {
    const std::map<std::string, std::string> values{{"task", ctx.task_text},
                                                    {"phase", std::string(to_string(ctx.phase))},
                                                    {"solution", or_placeholder(flatten(current))},
                                                    {"feedback", ctx.feedback.empty() ? "(none)" : ctx.feedback}};
    return {{"system", fill_template(templates_.instruct_system, values)},
            {"user", fill_template(templates_.instruct_user, values) +
                         render_examples(examples, "Code", "Instruction given")}};
}

std::vector<ChatMessage> RemoteAgent::respond_messages(const TurnContext& ctx, std::string_view instruction,
                                                       const Artifact& current,
                                                       std::span<const FewShot> examples) const {
    const std::map<std::string, std::string> values{{"task", ctx.task_text},
                                                    {"phase", std::string(to_string(ctx.phase))},
                                                    {"solution", or_placeholder(flatten(current))},
                                                    {"instruction", std::string(instruction)}};
    return {{"system", fill_template(templates_.respond_system, values)},
            {"user", fill_template(templates_.respond_user, values) +
                         render_examples(examples, "Instruction", "Resulting code")}};
}

std::string RemoteAgent::complete(const std::vector<ChatMessage>& messages) {
    auto msgs = nlohmann::json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    const auto& s = client_->settings();
    const auto reply = client_->post({{"model", s.model}, {"messages", msgs}, {"temperature", s.temperature}});
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw BackendError("chat response lacks choices[0].message.content", reply.dump());
    }
}

std::string RemoteAgent::propose_instruction(const TurnContext& ctx, const Artifact& current,
                                             std::span<const FewShot> examples) {
    auto text = complete(instruct_messages(ctx, current, examples));
    if (trim(text).empty()) throw BackendError("empty instruction from agent", text);
    return std::string(trim(text));
}

Artifact RemoteAgent::respond_solution(const TurnContext& ctx, std::string_view instruction, const Artifact& current,
                                       std::span<const FewShot> examples) {
    return parse_fenced_reply(complete(respond_messages(ctx, instruction, current, examples)));
}

std::string RemoteAgent::pseudo_instruction(const std::string&, const std::string& task_text, const Solution& source,
                                            const Solution& target) {
    const std::map<std::string, std::string> values{{"task", task_text},
                                                    {"source", or_placeholder(flatten(source.artifact))},
                                                    {"target", or_placeholder(flatten(target.artifact))}};
    auto text = complete({{"system", fill_template(templates_.pseudo_system, values)},
                          {"user", fill_template(templates_.pseudo_user, values)}});
    if (trim(text).empty()) throw BackendError("empty pseudo-instruction from agent", text);
    return std::string(trim(text));
}

}  // namespace ier
