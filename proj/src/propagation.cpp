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

#include "ier/propagation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "ier/acquisition.hpp"
#include "ier/errors.hpp"
#include "ier/jsonl.hpp"

namespace ier {

namespace fs = std::filesystem;

namespace {

// Unbiased draw in [0, bound) from a 64-bit engine; std distributions are not
// reproducible across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    constexpr auto top = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = top - top % bound;
    for (;;) {
        const auto x = rng();
        if (x < limit) return x % bound;
    }
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first
// failure (lowest index) after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto count = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
    if (count == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(count);
        for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<FewShot> to_examples(const std::vector<RetrievalHit>& hits, HitTally* tally) {
    std::vector<FewShot> out;
    out.reserve(hits.size());
    for (const auto& h : hits) {
        out.push_back({h.record.key_text, h.record.value_text});
        if (tally != nullptr) ++(*tally)[h.record.origin_batch];
    }
    return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text_atomic(path.string(), j.dump(2) + "\n"); }

}  // namespace

// ---- tasks and partitioning ----

std::vector<Task> load_tasks(const std::string& path) {
    std::vector<Task> tasks;
    std::set<std::string> seen;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        Task t;
        try {
            const auto j = nlohmann::json::parse(line);
            t.task_id = j.at("task_id").get<std::string>();
            t.category = j.at("category").get<std::string>();
            t.task_text = j.at("task_text").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ": bad task record: " + e.what(), line_no);
        }
        if (t.task_id.empty() || t.task_text.empty() || t.category.empty())
            throw ParseError(path + ": task_id, category and task_text must be non-empty", line_no);
        if (!seen.insert(t.task_id).second) throw ParseError(path + ": duplicate task_id " + t.task_id, line_no);
        tasks.push_back(std::move(t));
    });
    return tasks;
}

std::vector<TaskBatch> partition_tasks(std::vector<Task> tasks, std::size_t n_batches, std::uint64_t seed,
                                       std::vector<std::string>* warnings) {
    if (n_batches == 0) throw InvalidArgument("need at least one batch");
    std::map<std::string, std::vector<Task>> by_category;
    std::set<std::string> ids;
    for (auto& t : tasks) {
        if (t.category.empty()) throw InvalidArgument("task " + t.task_id + " has no category");
        if (!ids.insert(t.task_id).second) throw InvalidArgument("duplicate task id " + t.task_id);
        by_category[t.category].push_back(std::move(t));
    }

    std::vector<TaskBatch> batches(n_batches);
    for (std::size_t i = 0; i < n_batches; ++i) batches[i].ordinal = i + 1;

    std::mt19937_64 rng(seed);
    std::size_t deal = 0;
    for (auto& [category, members] : by_category) {
        if (members.size() < n_batches && warnings != nullptr)
            warnings->push_back("category '" + category + "' has " + std::to_string(members.size()) +
                                " tasks for " + std::to_string(n_batches) + " batches");
        std::sort(members.begin(), members.end(), [](const Task& a, const Task& b) { return a.task_id < b.task_id; });
        for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[bounded(rng, i)]);
        for (auto& t : members) batches[deal++ % n_batches].tasks.push_back(std::move(t));
    }
    return batches;
}

std::string manifest_jsonl(const std::vector<TaskBatch>& batches) {
    std::string out;
    for (const auto& b : batches) {
        for (const auto& t : b.tasks) {
            nlohmann::ordered_json j;
            j["task_id"] = t.task_id;
            j["category"] = t.category;
            j["batch"] = b.ordinal;
            out += j.dump() + "\n";
        }
    }
    return out;
}

// ---- configuration ----

std::string_view to_string(Pattern pattern) {
    switch (pattern) {
        case Pattern::Successive: return "successive";
        case Pattern::Cumulative: return "cumulative";
        case Pattern::Eliminated: return "eliminated";
    }
    return "?";
}

Pattern pattern_from_string(std::string_view name) {
    if (name == "successive") return Pattern::Successive;
    if (name == "cumulative") return Pattern::Cumulative;
    if (name == "eliminated") return Pattern::Eliminated;
    throw ConfigError("unknown pattern '" + std::string(name) + "' (successive|cumulative|eliminated)");
}

void RunConfig::validate() const {
    if (n_batches < 1) throw ConfigError("batches must be at least 1");
    if (k < 1) throw ConfigError("k must be at least 1");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in [0, 1]");
    if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
}

// ---- one task ----

ExecutionChain run_task(const Task& task, ExperiencePool& active_pool, const Backends& backends,
                        const RunConfig& config, HitTally* hits) {
    ExecutionChain chain(task.task_id, task.task_text);
    Artifact current;
    std::string feedback;

    const std::pair<Phase, std::size_t> phases[] = {
        {Phase::Coding, 1}, {Phase::Review, config.max_review_rounds}, {Phase::Test, config.max_test_rounds}};
    try {
        for (const auto& [phase, cap] : phases) {
            for (std::size_t round = 1; round <= cap; ++round) {
                const TurnContext ctx{task.task_id, task.task_text, phase, round, feedback};

                const auto query = current.empty() ? task.task_text : flatten(current);
                const auto s2i = to_examples(
                    active_pool.retrieve(RecordKind::S2I, query, config.k, backends.embedder), hits);
                auto instruction = backends.agent.propose_instruction(ctx, current, s2i);
                if (is_phase_done(instruction)) break;

                const auto i2s = to_examples(
                    active_pool.retrieve(RecordKind::I2S, instruction, config.k, backends.embedder), hits);
                auto next = backends.agent.respond_solution(ctx, instruction, current, i2s);
                chain.append_step(std::move(instruction), next, std::string(to_string(phase)));
                current = std::move(next);

                if (phase == Phase::Test) {
                    const auto outcome = backends.sandbox.compile_and_run(current);
                    chain.cache_compiled(chain.size() - 1, outcome.compiled);
                    if (outcome.compiled && outcome.executed) return chain;
                    feedback = outcome.log;
                }
            }
        }
    } catch (const BackendError& e) {
        chain.mark_failed(e.what());
    }
    return chain;
}

// ---- schedules ----

ScheduledPool schedule_active_pool(const RunConfig& config, std::size_t ordinal, const RunHistory& history,
                                   std::size_t dimension) {
    if (ordinal == 0) throw InvalidArgument("batch ordinals start at 1");
    if (history.acquired.size() < ordinal - 1) throw InvalidState("history is missing earlier batches");
    ScheduledPool out{ExperiencePool(dimension), std::nullopt};
    if (ordinal == 1) {
        if (config.pattern == Pattern::Eliminated) out.accounting = EliminationAccounting{};
        return out;
    }

    switch (config.pattern) {
        case Pattern::Successive:
            out.pool = history.acquired[ordinal - 2];
            break;
        case Pattern::Cumulative: {
            std::vector<const ExperiencePool*> parts;
            for (std::size_t j = 0; j + 1 < ordinal; ++j) parts.push_back(&history.acquired[j]);
            out.pool = merge(parts);
            break;
        }
        case Pattern::Eliminated: {
            const auto candidates = history.acquired[ordinal - 2].records();
            std::optional<std::vector<ExperienceRecord>> usage;
            if (ordinal >= 3) {
                if (history.active.size() < ordinal - 1) throw InvalidState("history is missing active pools");
                const auto& consulted = history.active[ordinal - 2];  // batch i-1's pool, with its usage
                usage.emplace();
                for (const auto& r : gain_filter(history.acquired[ordinal - 3].records(), config.epsilon)) {
                    auto seen = consulted.find(r.id);
                    usage->push_back(seen ? *seen : r);
                    if (!seen) usage->back().freq = 0;
                }
            }
            const auto result = usage ? eliminate(candidates, std::span<const ExperienceRecord>(*usage),
                                                  config.epsilon, config.theta)
                                      : eliminate(candidates, std::nullopt, config.epsilon, config.theta);
            ExperiencePool pool(dimension);
            pool.ingest(result.combined);
            out.pool = std::move(pool);
            out.accounting = result.accounting;
            break;
        }
    }
    out.pool.reset_frequencies();
    return out;
}

// ---- whole runs ----

fs::path batch_dir(const fs::path& run_dir, std::size_t ordinal) {
    return run_dir / ("batch-" + std::to_string(ordinal));
}

namespace {

struct Acquisition {
    std::vector<Shortcut> shortcuts;
};

BatchResult execute_batch(const TaskBatch& batch, ScheduledPool scheduled, const Backends& backends,
                          const RunConfig& config, std::uint64_t& next_ord) {
    BatchResult result;
    result.batch = batch.ordinal;
    result.active = std::move(scheduled.pool);
    const auto n = batch.tasks.size();

    std::vector<ExecutionChain> chains(n);
    std::vector<HitTally> tallies(n);
    std::vector<double> durations(n, 0.0);
    parallel_for(n, config.parallelism, [&](std::size_t i) {
        const auto start = std::chrono::steady_clock::now();
        chains[i] = run_task(batch.tasks[i], result.active, backends, config, &tallies[i]);
        if (config.wall_clock)
            durations[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });

    // Acquisition happens once the whole batch has finished.
    std::vector<Acquisition> mined(n);
    try {
        parallel_for(n, config.parallelism, [&](std::size_t i) {
            auto shortcuts = extract_shortcuts(chains[i], backends.agent, batch.ordinal);
            const auto scores = score_chain(chains[i], backends.embedder, backends.sandbox);
            assign_gains(shortcuts, scores);
            mined[i].shortcuts = std::move(shortcuts);
        });
    } catch (const Error& e) {
        throw RunInterrupted(batch.ordinal, std::string("acquisition failed: ") + e.what());
    }

    ExperiencePool acquired(backends.embedder.dimension());
    std::size_t shortcut_count = 0;
    try {
        for (const auto& m : mined) {
            std::vector<ExperienceRecord> records;
            for (const auto& s : m.shortcuts) {
                auto pair = split_shortcut(s, next_ord, &backends.embedder);
                next_ord += 2;
                records.push_back(std::move(pair.s2i));
                records.push_back(std::move(pair.i2s));
            }
            shortcut_count += m.shortcuts.size();
            acquired.ingest(records);
        }
    } catch (const Error& e) {
        throw RunInterrupted(batch.ordinal, std::string("embedding acquisitions failed: ") + e.what());
    }

    auto& s = result.summary;
    s.batch = batch.ordinal;
    s.active_pool_size = result.active.size();
    const auto origins = result.active.origin_batches();
    s.active_origins.assign(origins.begin(), origins.end());
    s.acquired_records = acquired.size();
    s.acquired_shortcuts = shortcut_count;
    if (!result.active.empty()) s.hit_ratio = hit_ratio(result.active);
    s.retrieval_events = result.active.retrieval_events();
    for (const auto& t : tallies)
        for (const auto& [origin, count] : t) s.hits_by_origin[origin] += count;
    try {
        s.metrics = compute_bundle(chains, durations, backends.sandbox, backends.embedder, config.max_review_rounds,
                                   config.max_test_rounds);
    } catch (const BackendError& e) {
        throw RunInterrupted(batch.ordinal, std::string("metric evaluation failed: ") + e.what());
    }
    s.elimination = scheduled.accounting;

    result.chains = std::move(chains);
    result.acquired = std::move(acquired);
    return result;
}

void write_checkpoint(const fs::path& run_dir, const BatchResult& r) {
    const auto dir = batch_dir(run_dir, r.batch);
    fs::create_directories(dir);
    save_chains(r.chains, (dir / "chains.jsonl").string());
    save_pool(r.acquired, (dir / "pool.jsonl").string());
    save_pool(r.active, (dir / "active.jsonl").string());
    write_json(dir / "metrics.json", to_json(r.summary));  // written last: marks the batch complete
}

std::optional<BatchResult> read_checkpoint(const fs::path& run_dir, std::size_t ordinal) {
    const auto dir = batch_dir(run_dir, ordinal);
    if (!fs::exists(dir / "metrics.json")) return std::nullopt;
    BatchResult r;
    r.batch = ordinal;
    r.chains = load_chains((dir / "chains.jsonl").string());
    r.acquired = load_pool((dir / "pool.jsonl").string());
    r.active = load_pool((dir / "active.jsonl").string());
    try {
        r.summary = batch_summary_from_json(nlohmann::json::parse(read_text((dir / "metrics.json").string())));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError((dir / "metrics.json").string() + ": " + e.what(), 1);
    }
    return r;
}

}  // namespace

std::vector<BatchResult> run_pattern(const std::vector<TaskBatch>& batches, const Backends& backends,
                                     const RunConfig& config, const RunOptions& options) {
    config.validate();
    const auto dim = backends.embedder.dimension();
    std::vector<BatchResult> results;
    RunHistory history;
    std::uint64_t next_ord = 0;

    if (options.checkpoint_dir) {
        const auto& run_dir = *options.checkpoint_dir;
        fs::create_directories(run_dir);
        std::size_t done = 0;
        if (options.resume) {
            for (std::size_t i = 1; i <= batches.size(); ++i) {
                auto r = read_checkpoint(run_dir, i);
                if (!r) break;
                if (r->acquired.dimension() != dim) throw ConfigError("checkpoint dimension differs from embedder");
                for (const auto& rec : r->acquired.records()) next_ord = std::max(next_ord, rec.created_ord + 1);
                history.acquired.push_back(r->acquired);
                history.active.push_back(r->active);
                results.push_back(std::move(*r));
                done = i;
            }
        }
        for (std::size_t i = done + 1;; ++i) {
            const auto dir = batch_dir(run_dir, i);
            if (!fs::exists(dir)) {
                if (i > batches.size()) break;
                continue;
            }
            fs::remove_all(dir);
        }
    }

    std::set<std::string> acquired_ids;
    std::set<std::string> retained_ids;
    for (const auto& r : results)
        for (const auto& id : r.active.ids()) retained_ids.insert(id);

    for (std::size_t i = results.size(); i < batches.size(); ++i) {
        const auto ordinal = i + 1;
        if (batches[i].ordinal != ordinal) throw InvalidArgument("batches must be ordered 1..n");
        auto scheduled = schedule_active_pool(config, ordinal, history, dim);

        acquired_ids.clear();
        for (std::size_t j = 0; j + 1 < ordinal; ++j)
            for (const auto& id : history.acquired[j].ids()) acquired_ids.insert(id);
        for (const auto& id : scheduled.pool.ids()) retained_ids.insert(id);

        auto result = execute_batch(batches[i], std::move(scheduled), backends, config, next_ord);
        if (config.pattern == Pattern::Eliminated) {
            result.summary.acquired_to_date = acquired_ids.size();
            result.summary.retained_to_date = retained_ids.size();
        }
        if (options.checkpoint_dir) write_checkpoint(*options.checkpoint_dir, result);
        history.acquired.push_back(result.acquired);
        history.active.push_back(result.active);
        if (options.on_batch) options.on_batch(result);
        results.push_back(std::move(result));
    }
    return results;
}

std::vector<BatchResult> run_successive(const std::vector<TaskBatch>& batches, const Backends& backends,
                                        RunConfig config, const RunOptions& options) {
    config.pattern = Pattern::Successive;
    return run_pattern(batches, backends, config, options);
}

std::vector<BatchResult> run_cumulative(const std::vector<TaskBatch>& batches, const Backends& backends,
                                        RunConfig config, const RunOptions& options) {
    config.pattern = Pattern::Cumulative;
    return run_pattern(batches, backends, config, options);
}

std::vector<BatchResult> run_eliminated(const std::vector<TaskBatch>& batches, const Backends& backends,
                                        RunConfig config, const RunOptions& options) {
    config.pattern = Pattern::Eliminated;
    return run_pattern(batches, backends, config, options);
}

RunReport load_run_report(const fs::path& run_dir, std::string run_id, std::string pattern,
                          std::size_t expected_batches) {
    std::vector<BatchSummary> summaries;
    for (std::size_t i = 1; i <= expected_batches; ++i) {
        const auto path = batch_dir(run_dir, i) / "metrics.json";
        if (!fs::exists(path)) continue;
        try {
            summaries.push_back(batch_summary_from_json(nlohmann::json::parse(read_text(path.string()))));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ": " + e.what(), 1);
        }
    }
    return build_report(std::move(run_id), std::move(pattern), expected_batches, std::move(summaries));
}

}  // namespace ier
