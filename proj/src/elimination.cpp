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

#include "ier/elimination.hpp"

#include <algorithm>
#include <cstdint>
#include <set>

#include "ier/errors.hpp"

namespace ier {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

void check_threshold(double value, const char* name) {
    if (!(value >= 0.0 && value <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

SolutionScore solution_score(const Solution& solution, const std::string& task_text, const Solution& terminal,
                             Embedder& embedder, Sandbox& sandbox) {
    SolutionScore score;
    if (solution.artifact.empty()) return score;

    const bool compiled = solution.compiled ? *solution.compiled : sandbox.compiles(solution.artifact);
    score.compiles = compiled ? 1 : 0;
    const auto text = flatten(solution.artifact);
    const auto v = embedder.embed(text);
    score.sim_task = clamp01(cosine(v, embedder.embed(task_text)));
    if (terminal.artifact.empty()) {
        score.sim_terminal = 0.0;
    } else {
        const auto terminal_text = flatten(terminal.artifact);
        score.sim_terminal = terminal_text == text ? 1.0 : clamp01(cosine(v, embedder.embed(terminal_text)));
    }
    score.omega = score.sim_task * score.sim_terminal * score.compiles;
    return score;
}

std::vector<SolutionScore> score_chain(ExecutionChain& chain, Embedder& embedder, Sandbox& sandbox) {
    std::vector<SolutionScore> scores;
    scores.reserve(chain.size());
    for (std::size_t k = 0; k < chain.size(); ++k) {
        const auto& node = chain.nodes()[k];
        auto s = solution_score(node, chain.task_text(), chain.terminal(), embedder, sandbox);
        if (!node.artifact.empty() && !node.compiled) chain.cache_compiled(k, s.compiles == 1);
        scores.push_back(s);
    }
    return scores;
}

void assign_gains(std::span<Shortcut> shortcuts, std::span<const SolutionScore> node_scores) {
    for (auto& s : shortcuts) {
        const auto i = s.provenance.source;
        const auto j = s.provenance.target;
        if (i >= node_scores.size() || j >= node_scores.size())
            throw InvalidArgument("shortcut endpoint outside the scored chain");
        s.gain = node_scores[j].omega - node_scores[i].omega;
    }
}

std::vector<Shortcut> gain_filter(std::span<const Shortcut> shortcuts, double epsilon) {
    std::vector<Shortcut> out;
    for (const auto& s : shortcuts) {
        if (!s.gain)
            throw InvalidState("shortcut " + s.provenance.task_id + " (" + std::to_string(s.provenance.source) +
                               ", " + std::to_string(s.provenance.target) + ") has no gain");
        if (*s.gain >= epsilon) out.push_back(s);
    }
    return out;
}

std::vector<ExperienceRecord> gain_filter(std::span<const ExperienceRecord> records, double epsilon) {
    std::vector<ExperienceRecord> out;
    for (const auto& r : records) {
        if (!r.gain) throw InvalidState("record " + r.id + " has no gain");
        if (*r.gain >= epsilon) out.push_back(r);
    }
    return out;
}

FrequencyFilterResult frequency_filter(std::span<const ExperienceRecord> records, double theta) {
    check_threshold(theta, "theta");
    FrequencyFilterResult result;
    std::uint64_t total = 0;
    for (const auto& r : records) total += r.freq;
    if (total == 0) {
        result.all_zero = true;
        return result;
    }

    std::vector<const ExperienceRecord*> order;
    order.reserve(records.size());
    for (const auto& r : records) order.push_back(&r);
    std::sort(order.begin(), order.end(), [](const ExperienceRecord* a, const ExperienceRecord* b) {
        if (a->freq != b->freq) return a->freq > b->freq;
        if (a->created_ord != b->created_ord) return a->created_ord < b->created_ord;
        return a->id < b->id;
    });

    std::uint64_t running = 0;
    for (const auto* r : order) {
        running += r->freq;
        if (static_cast<double>(running) / static_cast<double>(total) > theta) break;
        result.retained.push_back(*r);
    }
    return result;
}

std::vector<ExperienceRecord> combine(std::span<const ExperienceRecord> gain_filtered,
                                      std::span<const ExperienceRecord> frequency_filtered) {
    std::vector<ExperienceRecord> out;
    std::set<std::string> seen;
    for (auto part : {gain_filtered, frequency_filtered})
        for (const auto& r : part)
            if (seen.insert(r.id).second) out.push_back(r);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.created_ord != b.created_ord) return a.created_ord < b.created_ord;
        return a.id < b.id;
    });
    return out;
}

double EliminationAccounting::retained_fraction() const {
    if (original == 0) throw UndefinedMetric("retained fraction of an empty input is undefined");
    return static_cast<double>(retained) / static_cast<double>(original);
}

EliminationResult eliminate(std::span<const ExperienceRecord> candidates,
                            std::optional<std::span<const ExperienceRecord>> usage, double epsilon, double theta) {
    check_threshold(epsilon, "epsilon");
    check_threshold(theta, "theta");
    EliminationResult result;
    auto& acc = result.accounting;

    result.gain_filtered = gain_filter(candidates, epsilon);
    acc.gain_input = candidates.size();
    acc.gain_retained = result.gain_filtered.size();

    std::set<std::string> offered;
    for (const auto& r : candidates) offered.insert(r.id);
    if (usage) {
        auto freq = frequency_filter(*usage, theta);
        result.frequency_filtered = std::move(freq.retained);
        acc.frequency_all_zero = freq.all_zero;
        acc.frequency_input = usage->size();
        acc.frequency_retained = result.frequency_filtered.size();
        for (const auto& r : *usage) offered.insert(r.id);
    }
    result.combined = combine(result.gain_filtered, result.frequency_filtered);
    acc.original = offered.size();
    acc.retained = result.combined.size();
    return result;
}

}  // namespace ier
