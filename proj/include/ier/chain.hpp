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

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ier/artifact.hpp"

namespace ier {

struct Solution {
    std::string id;
    std::string task_id;
    std::size_t index = 0;
    Artifact artifact;
    std::optional<bool> compiled;  // cached compile verdict, filled lazily
};

// Edge `index` joins node index-1 to node index.
struct Instruction {
    std::string id;
    std::string text;
    std::size_t index = 0;
    bool pseudo = false;
    std::string phase;  // "coding" | "review" | "test"; empty for pseudo-instructions
};

using NodePair = std::pair<std::size_t, std::size_t>;

// Linear record of one task's cooperative execution: s0 -> s1 -> ... -> sN.
// Append-only; node 0 is always the empty initial solution.
class ExecutionChain {
  public:
    ExecutionChain() = default;

    // Starts a chain holding only s0. Throws InvalidArgument on empty task text.
    ExecutionChain(std::string task_id, std::string task_text);

    const std::string& task_id() const noexcept { return task_id_; }
    const std::string& task_text() const noexcept { return task_text_; }
    const std::vector<Solution>& nodes() const noexcept { return nodes_; }
    const std::vector<Instruction>& edges() const noexcept { return edges_; }
    const Solution& terminal() const { return nodes_.back(); }
    std::size_t size() const noexcept { return nodes_.size(); }

    // Requires solution.index == size() and instruction.index == edges().size() + 1.
    // Throws SequencingError otherwise; the chain is untouched on failure.
    void append_step(Instruction instruction, Solution solution);

    // Convenience overload that assigns ids and ordinals.
    void append_step(std::string instruction_text, Artifact artifact, std::string phase = {});

    // Sets the cached compile verdict of a node; the only permitted node update.
    void cache_compiled(std::size_t index, bool compiled);

    // Set when the producing task stopped early on a backend error.
    const std::optional<std::string>& error() const noexcept { return error_; }
    void mark_failed(std::string message) { error_ = std::move(message); }

    // Reachability on a path graph: strictly forward.
    bool reachable(std::size_t i, std::size_t j) const;

    friend void to_json(nlohmann::json& j, const ExecutionChain& c);
    friend void from_json(const nlohmann::json& j, ExecutionChain& c);

  private:
    std::string task_id_;
    std::string task_text_;
    std::vector<Solution> nodes_;
    std::vector<Instruction> edges_;
    std::optional<std::string> error_;
};

// Every (i, j) with j >= i + 2, lexicographic. Count is (n-1)(n-2)/2 for n >= 2.
std::vector<NodePair> nonadjacent_pairs(std::size_t node_count);
inline std::vector<NodePair> nonadjacent_pairs(const ExecutionChain& chain) {
    return nonadjacent_pairs(chain.size());
}

std::string solution_id(const std::string& task_id, std::size_t index);

// Chain log: one JSON object per line.
std::string chain_to_jsonl_line(const ExecutionChain& chain);
ExecutionChain chain_from_jsonl_line(const std::string& line, std::size_t line_no = 1);
void save_chains(const std::vector<ExecutionChain>& chains, const std::string& path);
std::vector<ExecutionChain> load_chains(const std::string& path);

}  // namespace ier
