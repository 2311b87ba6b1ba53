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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ier/artifact.hpp"
#include "ier/chain.hpp"
#include "ier/remote.hpp"

namespace ier {

enum class Phase { Coding, Review, Test };

std::string_view to_string(Phase phase);
Phase phase_from_string(std::string_view name);

// One retrieved experience presented to an agent as an example.
struct FewShot {
    std::string key;
    std::string value;
};

struct TurnContext {
    std::string task_id;
    std::string task_text;
    Phase phase = Phase::Coding;
    std::size_t round = 1;  // 1-based within the phase
    std::string feedback;   // compile/run log from the previous test round
};

// Instruction text that ends the current phase without producing a solution.
inline constexpr std::string_view kPhaseDone = "<INFO> Finished";
bool is_phase_done(std::string_view instruction);

// The instructive/responsive agent pair plus the self-instruct generator used
// for pseudo-instructions. Implementations must be thread-safe.
class AgentBackend {
  public:
    virtual ~AgentBackend() = default;

    virtual std::string propose_instruction(const TurnContext& ctx, const Artifact& current,
                                            std::span<const FewShot> examples) = 0;

    virtual Artifact respond_solution(const TurnContext& ctx, std::string_view instruction, const Artifact& current,
                                      std::span<const FewShot> examples) = 0;

    // Directive that turns `source` into `target`. Never empty.
    virtual std::string pseudo_instruction(const std::string& task_id, const std::string& task_text,
                                           const Solution& source, const Solution& target) = 0;
};

// Fixture table keyed by (task_id, phase, round), plus pseudo-instructions keyed
// by (task_id, i, j). Lines look like
//   {"task_id":"t1","phase":"review","round":2,"instruction":"...","reply":"main.py\n```...```"}
//   {"task_id":"t1","phase":"pseudo","source":0,"target":2,"instruction":"..."}
// Performs no I/O after construction.
class ScriptedAgent final : public AgentBackend {
  public:
    struct Turn {
        std::string instruction;
        std::string reply;
    };

    ScriptedAgent() = default;
    static ScriptedAgent from_file(const std::string& path);

    void add_turn(const std::string& task_id, Phase phase, std::size_t round, Turn turn);
    void add_pseudo(const std::string& task_id, std::size_t source, std::size_t target, std::string instruction);

    std::string propose_instruction(const TurnContext& ctx, const Artifact& current,
                                    std::span<const FewShot> examples) override;
    Artifact respond_solution(const TurnContext& ctx, std::string_view instruction, const Artifact& current,
                              std::span<const FewShot> examples) override;
    std::string pseudo_instruction(const std::string& task_id, const std::string& task_text, const Solution& source,
                                   const Solution& target) override;

  private:
    const Turn& turn(const TurnContext& ctx) const;

    std::map<std::tuple<std::string, Phase, std::size_t>, Turn> turns_;
    std::map<std::tuple<std::string, std::size_t, std::size_t>, std::string> pseudo_;
};

// Prompt text for the remote agents. The defaults are our own wording; the
// placeholders {task}, {phase}, {solution}, {feedback}, {instruction},
// {source}, {target} are substituted literally.
struct PromptTemplates {
    std::string instruct_system;
    std::string instruct_user;
    std::string respond_system;
    std::string respond_user;
    std::string pseudo_system;
    std::string pseudo_user;

    static PromptTemplates defaults();
};

struct ChatMessage {
    std::string role;
    std::string content;
};

// Chat-completions client ({model, messages[], temperature} -> choices[0].message.content).
class RemoteAgent final : public AgentBackend {
  public:
    RemoteAgent(RemoteSettings settings, PromptTemplates templates = PromptTemplates::defaults());
    ~RemoteAgent() override;

    std::string propose_instruction(const TurnContext& ctx, const Artifact& current,
                                    std::span<const FewShot> examples) override;
    Artifact respond_solution(const TurnContext& ctx, std::string_view instruction, const Artifact& current,
                              std::span<const FewShot> examples) override;
    std::string pseudo_instruction(const std::string& task_id, const std::string& task_text, const Solution& source,
                                   const Solution& target) override;

    // Exposed for prompt inspection in tests.
    std::vector<ChatMessage> instruct_messages(const TurnContext& ctx, const Artifact& current,
                                               std::span<const FewShot> examples) const;
    std::vector<ChatMessage> respond_messages(const TurnContext& ctx, std::string_view instruction,
                                              const Artifact& current, std::span<const FewShot> examples) const;

  private:
    std::string complete(const std::vector<ChatMessage>& messages);

    std::unique_ptr<JsonHttpClient> client_;
    PromptTemplates templates_;
};

// Replaces every "{name}" in `tmpl` using `values`; unknown placeholders are kept.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

}  // namespace ier
