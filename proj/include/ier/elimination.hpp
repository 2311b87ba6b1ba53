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
#include <span>
#include <string>
#include <vector>

#include "ier/acquisition.hpp"
#include "ier/chain.hpp"
#include "ier/embedder.hpp"
#include "ier/pool.hpp"
#include "ier/sandbox.hpp"

namespace ier {

inline constexpr double kDefaultEpsilon = 0.95;
inline constexpr double kDefaultTheta = 0.95;

// omega = sim_task * sim_terminal * compiles, every factor clamped to [0, 1].
struct SolutionScore {
    double omega = 0.0;
    double sim_task = 0.0;
    double sim_terminal = 0.0;
    int compiles = 0;
};

// Scores one solution against the task text and the chain's terminal solution.
// An empty artifact scores 0 without touching the embedder or the sandbox.
// A cached compile verdict on the solution is reused.
SolutionScore solution_score(const Solution& solution, const std::string& task_text, const Solution& terminal,
                             Embedder& embedder, Sandbox& sandbox);

// Scores every node of a chain and records compile verdicts in the chain's cache.
std::vector<SolutionScore> score_chain(ExecutionChain& chain, Embedder& embedder, Sandbox& sandbox);

// gain = omega(target) - omega(source) for every shortcut of one chain.
void assign_gains(std::span<Shortcut> shortcuts, std::span<const SolutionScore> node_scores);

// Shortcuts whose gain is at least epsilon. Throws InvalidState on an unscored shortcut.
std::vector<Shortcut> gain_filter(std::span<const Shortcut> shortcuts, double epsilon);

// Same rule over projected records (both records of a shortcut carry its gain).
std::vector<ExperienceRecord> gain_filter(std::span<const ExperienceRecord> records, double epsilon);

struct FrequencyFilterResult {
    std::vector<ExperienceRecord> retained;
    bool all_zero = false;  // no record was ever retrieved; retained is empty
};

// Orders records by descending freq (ties: ascending created_ord, then id) and
// keeps a record when the cumulative share of frequency through its own rank
// is at most theta. The result is a prefix of that order.
FrequencyFilterResult frequency_filter(std::span<const ExperienceRecord> records, double theta);

// Union by id, first occurrence wins, canonical (created_ord, id) order.
std::vector<ExperienceRecord> combine(std::span<const ExperienceRecord> gain_filtered,
                                      std::span<const ExperienceRecord> frequency_filtered);

struct EliminationAccounting {
    std::size_t gain_input = 0;
    std::size_t gain_retained = 0;
    std::size_t frequency_input = 0;
    std::size_t frequency_retained = 0;
    std::size_t original = 0;  // distinct records offered to elimination
    std::size_t retained = 0;  // distinct records kept
    bool frequency_all_zero = false;

    double retained_fraction() const;
};

struct EliminationResult {
    std::vector<ExperienceRecord> gain_filtered;
    std::vector<ExperienceRecord> frequency_filtered;
    std::vector<ExperienceRecord> combined;
    EliminationAccounting accounting;
};

// Gain filter over `candidates`, frequency filter over `usage` (when given), then
// their union.
EliminationResult eliminate(std::span<const ExperienceRecord> candidates,
                            std::optional<std::span<const ExperienceRecord>> usage, double epsilon, double theta);

}  // namespace ier
