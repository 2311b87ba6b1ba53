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
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ier/agent.hpp"
#include "ier/chain.hpp"
#include "ier/elimination.hpp"
#include "ier/embedder.hpp"
#include "ier/errors.hpp"
#include "ier/metrics.hpp"
#include "ier/pool.hpp"
#include "ier/sandbox.hpp"

namespace ier {

struct Task {
    std::string task_id;
    std::string category;
    std::string task_text;

    bool operator==(const Task&) const = default;
};

// Task corpus: JSON Lines with task_id, category and task_text.
// Throws ParseError carrying the offending line.
std::vector<Task> load_tasks(const std::string& path);

struct TaskBatch {
    std::size_t ordinal = 0;  // 1-based
    std::vector<Task> tasks;
};

// Stratified split: categories are visited in name order, each category's
// tasks are shuffled with the seed and dealt round-robin, continuing the deal
// position across categories so batch sizes stay balanced. `warnings` receives
// a note for every category smaller than n_batches.
std::vector<TaskBatch> partition_tasks(std::vector<Task> tasks, std::size_t n_batches, std::uint64_t seed,
                                       std::vector<std::string>* warnings = nullptr);

// Batch manifest lines: {"task_id","category","batch"} in batch order.
std::string manifest_jsonl(const std::vector<TaskBatch>& batches);

enum class Pattern { Successive, Cumulative, Eliminated };

std::string_view to_string(Pattern pattern);
Pattern pattern_from_string(std::string_view name);

struct RunConfig {
    Pattern pattern = Pattern::Successive;
    std::size_t n_batches = 6;
    std::size_t k = 1;
    double epsilon = kDefaultEpsilon;
    double theta = kDefaultTheta;
    std::size_t max_review_rounds = 3;
    std::size_t max_test_rounds = 3;
    std::uint64_t seed = 0;
    std::size_t parallelism = 1;  // concurrent tasks within a batch
    bool wall_clock = true;       // false: durations are reported as 0 for reproducible reports

    // Throws ConfigError on out-of-range values.
    void validate() const;
};

struct Backends {
    AgentBackend& agent;
    Embedder& embedder;
    Sandbox& sandbox;
};

// Retrieval hits of one task or batch, by the producing batch of the record.
using HitTally = std::map<std::size_t, std::uint64_t>;

// Runs coding (1 round), review (up to max_review_rounds) and test (up to
// max_test_rounds) for one task. Each round retrieves S2I examples with the
// current solution (the task text while no code exists) as query, asks for an
// instruction, retrieves I2S examples with that instruction, and asks for the
// next solution. "<INFO> Finished" ends a phase; a test round whose program
// compiles and runs ends the task. A BackendError stops the task and the
// chain is returned truncated, with its error set.
ExecutionChain run_task(const Task& task, ExperiencePool& active_pool, const Backends& backends,
                        const RunConfig& config, HitTally* hits = nullptr);

// Raised when a failure outside any single task (acquisition, scoring) stops a
// run. Completed batches stay checkpointed.
class RunInterrupted : public Error {
  public:
    RunInterrupted(std::size_t batch, const std::string& what)
        : Error("batch " + std::to_string(batch) + ": " + what), batch_(batch) {}
    std::size_t batch() const noexcept { return batch_; }

  private:
    std::size_t batch_;
};

struct BatchResult {
    std::size_t batch = 0;
    std::vector<ExecutionChain> chains;
    ExperiencePool active;    // pool consulted by this batch, with this batch's usage counts
    ExperiencePool acquired;  // records mined from this batch's chains
    BatchSummary summary;
};

// Pools of the batches already finished, indexed by ordinal - 1.
struct RunHistory {
    std::vector<ExperiencePool> acquired;
    std::vector<ExperiencePool> active;
};

struct ScheduledPool {
    ExperiencePool pool;
    std::optional<EliminationAccounting> accounting;
};

// Active pool for batch `ordinal` given the finished batches, with usage
// counters zeroed:
//   successive   E_{i-1}
//   cumulative   E_1 u ... u E_{i-1}
//   eliminated   gain(E_{i-1}) u freq(gain(E_{i-2}) with usage observed during batch i-1)
ScheduledPool schedule_active_pool(const RunConfig& config, std::size_t ordinal, const RunHistory& history,
                                   std::size_t dimension);

struct RunOptions {
    std::optional<std::filesystem::path> checkpoint_dir;  // runs/<run-id>
    bool resume = false;
    std::function<void(const BatchResult&)> on_batch;  // progress hook
};

// Executes every batch in order under config.pattern.
std::vector<BatchResult> run_pattern(const std::vector<TaskBatch>& batches, const Backends& backends,
                                     const RunConfig& config, const RunOptions& options = {});

std::vector<BatchResult> run_successive(const std::vector<TaskBatch>& batches, const Backends& backends,
                                        RunConfig config, const RunOptions& options = {});
std::vector<BatchResult> run_cumulative(const std::vector<TaskBatch>& batches, const Backends& backends,
                                        RunConfig config, const RunOptions& options = {});
std::vector<BatchResult> run_eliminated(const std::vector<TaskBatch>& batches, const Backends& backends,
                                        RunConfig config, const RunOptions& options = {});

std::filesystem::path batch_dir(const std::filesystem::path& run_dir, std::size_t ordinal);

// Reads batch-<i>/metrics.json for i in [1, expected]; absent batches are reported missing.
RunReport load_run_report(const std::filesystem::path& run_dir, std::string run_id, std::string pattern,
                          std::size_t expected_batches);

}  // namespace ier
