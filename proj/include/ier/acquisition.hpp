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
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ier/agent.hpp"
#include "ier/chain.hpp"
#include "ier/embedder.hpp"
#include "ier/pool.hpp"

namespace ier {

struct Provenance {
    std::size_t batch = 0;
    std::string task_id;
    std::size_t source = 0;  // i
    std::size_t target = 0;  // j, always >= i + 2

    bool operator==(const Provenance&) const = default;
};

// (s_i, pseudo-instruction, s_j) for a non-adjacent pair of one chain.
struct Shortcut {
    Solution source;
    Instruction pseudo_instruction;
    Solution target;
    std::optional<double> gain;
    Provenance provenance;
    std::string task_text;
};

// Asks the backend for a directive turning `source` into `target`. Identical
// artifacts are not special-cased. Throws BackendError on an empty directive.
Instruction generate_pseudo_instruction(AgentBackend& backend, const ExecutionChain& chain, std::size_t source,
                                        std::size_t target);

// One shortcut per non-adjacent pair, in lexicographic pair order. Any backend
// failure propagates and no partial result is returned.
std::vector<Shortcut> extract_shortcuts(const ExecutionChain& chain, AgentBackend& backend, std::size_t batch);

// Key/value projection of a shortcut without embeddings.
struct RecordPair {
    ExperienceRecord s2i;  // key: flattened source, value: directive
    ExperienceRecord i2s;  // key: directive, value: flattened target
};

// Splits a shortcut into its two records with content ids. `created_ord` goes
// to the S2I record and `created_ord + 1` to the I2S record. Key embeddings
// are filled in when an embedder is passed.
//
// The S2I key is the flattened source artifact. The initial solution is empty,
// so shortcuts leaving s0 are keyed by the task text instead; that is also the
// query an agent issues before any code exists.
RecordPair split_shortcut(const Shortcut& shortcut, std::uint64_t created_ord, Embedder* embedder = nullptr);

std::string s2i_key_text(const Shortcut& shortcut);

}  // namespace ier
