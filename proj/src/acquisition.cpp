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

#include "ier/acquisition.hpp"

#include "ier/errors.hpp"

namespace ier {

Instruction generate_pseudo_instruction(AgentBackend& backend, const ExecutionChain& chain, std::size_t source,
                                        std::size_t target) {
    if (source >= target || target >= chain.size())
        throw InvalidArgument("pseudo-instruction needs source < target within the chain");
    const auto& nodes = chain.nodes();
    auto text = backend.pseudo_instruction(chain.task_id(), chain.task_text(), nodes[source], nodes[target]);
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw BackendError("backend returned an empty pseudo-instruction", text);
    return Instruction{chain.task_id() + "#p" + std::to_string(source) + "-" + std::to_string(target),
                       std::move(text), target, true, {}};
}

std::vector<Shortcut> extract_shortcuts(const ExecutionChain& chain, AgentBackend& backend, std::size_t batch) {
    std::vector<Shortcut> out;
    const auto pairs = nonadjacent_pairs(chain);
    out.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        out.push_back(Shortcut{chain.nodes()[i], generate_pseudo_instruction(backend, chain, i, j), chain.nodes()[j],
                               std::nullopt, Provenance{batch, chain.task_id(), i, j}, chain.task_text()});
    }
    return out;
}

std::string s2i_key_text(const Shortcut& shortcut) {
    if (shortcut.source.artifact.empty()) return shortcut.task_text;
    return flatten(shortcut.source.artifact);
}

RecordPair split_shortcut(const Shortcut& shortcut, std::uint64_t created_ord, Embedder* embedder) {
    RecordPair pair;
    auto& s2i = pair.s2i;
    s2i.kind = RecordKind::S2I;
    s2i.key_text = s2i_key_text(shortcut);
    s2i.value_text = shortcut.pseudo_instruction.text;

    auto& i2s = pair.i2s;
    i2s.kind = RecordKind::I2S;
    i2s.key_text = shortcut.pseudo_instruction.text;
    i2s.value_text = flatten(shortcut.target.artifact);

    for (auto* r : {&s2i, &i2s}) {
        r->gain = shortcut.gain;
        r->origin_batch = shortcut.provenance.batch;
        r->origin_task = shortcut.provenance.task_id;
        r->id = record_id(r->kind, r->key_text, r->value_text);
        if (embedder != nullptr) r->key_embedding = embedder->embed(r->key_text);
    }
    s2i.created_ord = created_ord;
    i2s.created_ord = created_ord + 1;
    return pair;
}

}  // namespace ier
