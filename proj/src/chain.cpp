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

#include "ier/chain.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "ier/errors.hpp"
#include "ier/jsonl.hpp"

namespace ier {

ExecutionChain::ExecutionChain(std::string task_id, std::string task_text)
    : task_id_(std::move(task_id)), task_text_(std::move(task_text)) {
    if (task_text_.empty()) throw InvalidArgument("task text must be non-empty");
    nodes_.push_back(Solution{solution_id(task_id_, 0), task_id_, 0, {}, std::nullopt});
}

void ExecutionChain::append_step(Instruction instruction, Solution solution) {
    if (solution.index != nodes_.size())
        throw SequencingError("solution index " + std::to_string(solution.index) + " does not follow a " +
                              std::to_string(nodes_.size()) + "-node chain");
    if (instruction.index != edges_.size() + 1)
        throw SequencingError("instruction index " + std::to_string(instruction.index) + " expected " +
                              std::to_string(edges_.size() + 1));
    if (solution.task_id.empty()) solution.task_id = task_id_;
    if (solution.id.empty()) solution.id = solution_id(task_id_, solution.index);
    if (instruction.id.empty()) instruction.id = task_id_ + "#i" + std::to_string(instruction.index);
    edges_.push_back(std::move(instruction));
    nodes_.push_back(std::move(solution));
}

void ExecutionChain::append_step(std::string instruction_text, Artifact artifact, std::string phase) {
    const auto next = nodes_.size();
    append_step(Instruction{{}, std::move(instruction_text), next, false, std::move(phase)},
                Solution{{}, task_id_, next, std::move(artifact), std::nullopt});
}

void ExecutionChain::cache_compiled(std::size_t index, bool compiled) {
    if (index >= nodes_.size()) throw InvalidArgument("node index out of range");
    nodes_[index].compiled = compiled;
}

bool ExecutionChain::reachable(std::size_t i, std::size_t j) const {
    if (i >= nodes_.size() || j >= nodes_.size()) throw InvalidArgument("node index out of range");
    return i < j;
}

std::vector<NodePair> nonadjacent_pairs(std::size_t node_count) {
    std::vector<NodePair> pairs;
    if (node_count < 3) return pairs;
    pairs.reserve((node_count - 1) * (node_count - 2) / 2);
    for (std::size_t i = 0; i + 2 < node_count; ++i)
        for (std::size_t j = i + 2; j < node_count; ++j) pairs.emplace_back(i, j);
    return pairs;
}

std::string solution_id(const std::string& task_id, std::size_t index) {
    return task_id + "#s" + std::to_string(index);
}

void to_json(nlohmann::json& j, const ExecutionChain& c) {
    auto nodes = nlohmann::json::array();
    for (const auto& n : c.nodes_) {
        nlohmann::json node = {{"index", n.index}, {"files", n.artifact}};
        node["compiled"] = n.compiled ? nlohmann::json(*n.compiled) : nlohmann::json(nullptr);
        nodes.push_back(std::move(node));
    }
    auto edges = nlohmann::json::array();
    for (const auto& e : c.edges_) {
        nlohmann::json edge = {{"index", e.index}, {"text", e.text}, {"pseudo", e.pseudo}};
        if (!e.phase.empty()) edge["phase"] = e.phase;
        edges.push_back(std::move(edge));
    }
    j = {{"task_id", c.task_id_}, {"task_text", c.task_text_}, {"nodes", std::move(nodes)},
         {"edges", std::move(edges)}};
    if (c.error_) j["error"] = *c.error_;
}

void from_json(const nlohmann::json& j, ExecutionChain& c) {
    ExecutionChain out(j.at("task_id").get<std::string>(), j.at("task_text").get<std::string>());
    const auto& nodes = j.at("nodes");
    const auto& edges = j.at("edges");
    if (nodes.empty() || edges.size() + 1 != nodes.size())
        throw InvalidArgument("chain record must have |edges| = |nodes| - 1");
    if (nodes[0].at("index").get<std::size_t>() != 0 || !nodes[0].at("files").empty())
        throw InvalidArgument("chain record must start with an empty s0");
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto& e = edges[k];
        const auto& n = nodes[k + 1];
        out.append_step(Instruction{{}, e.at("text").get<std::string>(), e.at("index").get<std::size_t>(),
                                    e.value("pseudo", false), e.value("phase", std::string{})},
                        Solution{{}, {}, n.at("index").get<std::size_t>(), n.at("files").get<Artifact>(),
                                 std::nullopt});
    }
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const auto it = nodes[k].find("compiled");
        if (it != nodes[k].end() && !it->is_null()) out.cache_compiled(k, it->get<bool>());
    }
    if (auto it = j.find("error"); it != j.end() && !it->is_null()) out.mark_failed(it->get<std::string>());
    c = std::move(out);
}

std::string chain_to_jsonl_line(const ExecutionChain& chain) { return nlohmann::json(chain).dump(); }

ExecutionChain chain_from_jsonl_line(const std::string& line, std::size_t line_no) {
    try {
        return nlohmann::json::parse(line).get<ExecutionChain>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad chain record: ") + e.what(), line_no);
    } catch (const Error& e) {
        throw ParseError(std::string("bad chain record: ") + e.what(), line_no);
    }
}

void save_chains(const std::vector<ExecutionChain>& chains, const std::string& path) {
    std::vector<std::string> lines;
    lines.reserve(chains.size());
    for (const auto& c : chains) lines.push_back(chain_to_jsonl_line(c));
    write_lines_atomic(path, lines);
}

std::vector<ExecutionChain> load_chains(const std::string& path) {
    std::vector<ExecutionChain> chains;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        chains.push_back(chain_from_jsonl_line(line, line_no));
    });
    return chains;
}

}  // namespace ier
