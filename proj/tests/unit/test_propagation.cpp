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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "ier/embedder.hpp"
#include "ier/errors.hpp"
#include "ier/jsonl.hpp"
#include "ier/propagation.hpp"
#include "support.hpp"

using namespace ier;
using ier::testing::marker_sandbox;
using ier::testing::read_file;
using ier::testing::synthetic_data;
using ier::testing::TempDir;
using ier::testing::test_data;
namespace fs = std::filesystem;

namespace {

std::vector<Task> corpus(std::size_t categories, std::size_t per_category) {
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < categories; ++c)
        for (std::size_t i = 0; i < per_category; ++i)
            tasks.push_back({"c" + std::to_string(c) + "-t" + std::to_string(i), "cat" + std::to_string(c),
                             "task " + std::to_string(i)});
    return tasks;
}

struct Synthetic {
    ScriptedAgent agent = ScriptedAgent::from_file(synthetic_data("fixtures.jsonl").string());
    HashingEmbedder embedder{256};
    ScriptedSandbox sandbox = marker_sandbox();
    std::vector<TaskBatch> batches = partition_tasks(load_tasks(synthetic_data("corpus.jsonl").string()), 4, 7);

    Backends view() { return Backends{agent, embedder, sandbox}; }
};

RunConfig config(Pattern p) {
    RunConfig c;
    c.pattern = p;
    c.n_batches = 4;
    c.epsilon = 0.2;
    c.theta = 0.95;
    c.seed = 7;
    c.parallelism = 3;
    c.wall_clock = false;
    return c;
}

std::set<std::string> ids_of(const std::vector<ExperienceRecord>& recs) {
    std::set<std::string> out;
    for (const auto& r : recs) out.insert(r.id);
    return out;
}

std::set<std::string> ids_of(const ExperiencePool& pool) {
    const auto v = pool.ids();
    return {v.begin(), v.end()};
}

std::string dir_fingerprint(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != ".lock") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::string out;
    for (const auto& f : files) out += fs::relative(f, dir).string() + "\n" + read_file(f) + "\n";
    return out;
}

// Wraps an agent and fails pseudo-instructions for chosen tasks.
class FlakyPseudo final : public AgentBackend {
  public:
    FlakyPseudo(AgentBackend& inner, std::set<std::string> failing) : inner_(inner), failing_(std::move(failing)) {}
    std::string propose_instruction(const TurnContext& c, const Artifact& a, std::span<const FewShot> e) override {
        return inner_.propose_instruction(c, a, e);
    }
    Artifact respond_solution(const TurnContext& c, std::string_view i, const Artifact& a,
                              std::span<const FewShot> e) override {
        return inner_.respond_solution(c, i, a, e);
    }
    std::string pseudo_instruction(const std::string& t, const std::string& x, const Solution& s,
                                   const Solution& g) override {
        if (failing_.count(t)) throw BackendError("service unavailable", "", 503);
        return inner_.pseudo_instruction(t, x, s, g);
    }

  private:
    AgentBackend& inner_;
    std::set<std::string> failing_;
};

}  // namespace

TEST(Partition, TwelveHundredTasksSplitEvenly) {
    const auto batches = partition_tasks(corpus(40, 30), 6, 1);
    ASSERT_EQ(batches.size(), 6u);
    for (const auto& b : batches) {
        EXPECT_EQ(b.tasks.size(), 200u);
        std::map<std::string, int> per_cat;
        for (const auto& t : b.tasks) ++per_cat[t.category];
        EXPECT_EQ(per_cat.size(), 40u);
        for (const auto& [cat, n] : per_cat) EXPECT_EQ(n, 5) << cat;
    }
}

TEST(Partition, SmallCorpusAndDeterminism) {
    const auto b = partition_tasks(corpus(1, 6), 3, 5);
    for (const auto& batch : b) EXPECT_EQ(batch.tasks.size(), 2u);
    const auto manifest = [](std::uint64_t seed) { return manifest_jsonl(partition_tasks(corpus(3, 7), 4, seed)); };
    EXPECT_EQ(manifest(9), manifest(9));
    EXPECT_NE(manifest(9), manifest(10));
}

TEST(Partition, EveryTaskAppearsOnceAndSmallCategoriesWarn) {
    auto tasks = corpus(3, 5);
    tasks.push_back({"rare", "zzz", "rare task"});
    std::vector<std::string> warnings;
    const auto batches = partition_tasks(tasks, 4, 3, &warnings);
    std::multiset<std::string> seen;
    for (const auto& b : batches)
        for (const auto& t : b.tasks) seen.insert(t.task_id);
    EXPECT_EQ(seen.size(), tasks.size());
    for (const auto& t : tasks) EXPECT_EQ(seen.count(t.task_id), 1u);
    EXPECT_FALSE(warnings.empty());
    EXPECT_THROW(partition_tasks(tasks, 0, 1), InvalidArgument);
}

TEST(Tasks, LoadReportsBadLines) {
    TempDir dir;
    {
        std::ofstream f(dir / "c.jsonl");
        f << R"({"task_id":"a","category":"x","task_text":"do a"})" << "\n";
        f << R"({"task_id":"b","task_text":"do b"})" << "\n";
    }
    try {
        load_tasks((dir / "c.jsonl").string());
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(RunTask, FixtureProducesCodingTwoReviewsOneTest) {
    auto agent = ScriptedAgent::from_file(test_data("tfix_fixtures.jsonl").string());
    HashingEmbedder embedder(64);
    SandboxSettings settings;
    settings.timeout = std::chrono::seconds(10);
    ProcessSandbox sandbox(settings);
    ExperiencePool pool(64);
    RunConfig cfg;
    HitTally hits;
    const auto chain = run_task({"t-fix-1", "demo", "Print the first five square numbers."}, pool,
                                Backends{agent, embedder, sandbox}, cfg, &hits);
    ASSERT_EQ(chain.edges().size(), 4u);
    EXPECT_EQ(chain.edges()[0].phase, "coding");
    EXPECT_EQ(chain.edges()[1].phase, "review");
    EXPECT_EQ(chain.edges()[2].phase, "review");
    EXPECT_EQ(chain.edges()[3].phase, "test");
    EXPECT_FALSE(chain.error());
    EXPECT_TRUE(hits.empty());
    EXPECT_EQ(pool.retrieval_events(), 0u);
}

TEST(RunTask, ZeroReviewCapSkipsReview) {
    auto agent = ScriptedAgent::from_file(test_data("tfix_fixtures.jsonl").string());
    HashingEmbedder embedder(64);
    auto sandbox = marker_sandbox();
    ExperiencePool pool(64);
    RunConfig cfg;
    cfg.max_review_rounds = 0;
    const auto chain = run_task({"t-fix-1", "demo", "squares"}, pool, Backends{agent, embedder, sandbox}, cfg);
    ASSERT_EQ(chain.edges().size(), 2u);
    EXPECT_EQ(chain.edges()[0].phase, "coding");
    EXPECT_EQ(chain.edges()[1].phase, "test");
}

TEST(RunTask, BackendFailureTruncatesTheChain) {
    ScriptedAgent agent;
    agent.add_turn("t", Phase::Coding, 1, {"write", "main.py\n```\nprint(1)\n```\n"});
    HashingEmbedder embedder(16);
    auto sandbox = marker_sandbox();
    ExperiencePool pool(16);
    const auto chain = run_task({"t", "c", "text"}, pool, Backends{agent, embedder, sandbox}, RunConfig{});
    EXPECT_EQ(chain.size(), 2u);
    ASSERT_TRUE(chain.error());
    EXPECT_NE(chain.error()->find("review"), std::string::npos);
}

TEST(RunTask, RetrievesFromNonEmptyPool) {
    auto agent = ScriptedAgent::from_file(test_data("tfix_fixtures.jsonl").string());
    HashingEmbedder embedder(64);
    auto sandbox = marker_sandbox();
    ExperiencePool pool(64);
    ExperienceRecord s2i{record_id(RecordKind::S2I, "k", "v"), RecordKind::S2I, "k", "v",
                         embedder.embed("k"), 0.5, 0, 3, "x", 0};
    ExperienceRecord i2s{record_id(RecordKind::I2S, "v", "c"), RecordKind::I2S, "v", "c",
                         embedder.embed("v"), 0.5, 0, 3, "x", 1};
    pool.ingest(std::vector<ExperienceRecord>{s2i, i2s});
    HitTally hits;
    const auto chain =
        run_task({"t-fix-1", "demo", "squares"}, pool, Backends{agent, embedder, sandbox}, RunConfig{}, &hits);
    // Every executed round issues one S2I and one I2S query with k = 1; the
    // closing review round only issues the S2I query.
    const auto rounds = chain.edges().size();
    EXPECT_EQ(pool.retrieval_events(), 2 * rounds + 1);
    EXPECT_EQ(hits.at(3), pool.retrieval_events());
}

TEST(Schedules, SuccessiveAndCumulativeProvenance) {
    Synthetic s;
    const auto succ = run_pattern(s.batches, s.view(), config(Pattern::Successive));
    const auto cum = run_pattern(s.batches, s.view(), config(Pattern::Cumulative));
    ASSERT_EQ(succ.size(), 4u);
    EXPECT_TRUE(succ[0].active.empty());
    for (std::size_t i = 2; i <= 4; ++i) {
        EXPECT_EQ(succ[i - 1].active.origin_batches(), std::set<std::size_t>{i - 1});
        EXPECT_EQ(succ[i - 1].active.size(), succ[i - 2].acquired.size());
        std::set<std::size_t> expect;
        for (std::size_t j = 1; j < i; ++j) expect.insert(j);
        EXPECT_EQ(cum[i - 1].active.origin_batches(), expect);
        EXPECT_GE(cum[i - 1].active.size(), cum[i - 2].active.size());
    }
    // The first two batches see the same pools under both patterns.
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(to_json(succ[i].summary), to_json(cum[i].summary));
        EXPECT_EQ(serialize_pool(succ[i].acquired), serialize_pool(cum[i].acquired));
        EXPECT_EQ(serialize_pool(succ[i].active), serialize_pool(cum[i].active));
    }
    // Successive hits only come from the previous batch.
    for (const auto& r : succ)
        for (const auto& [origin, n] : r.summary.hits_by_origin) EXPECT_EQ(origin, r.batch - 1);
}

TEST(Schedules, EliminatedPoolsMatchTheirDefinition) {
    Synthetic s;
    const auto cfg = config(Pattern::Eliminated);
    const auto res = run_pattern(s.batches, s.view(), cfg);
    ASSERT_EQ(res.size(), 4u);
    auto gain_kept = [&](const ExperiencePool& p) {
        std::set<std::string> out;
        for (const auto& r : p.records())
            if (r.gain && *r.gain >= cfg.epsilon) out.insert(r.id);
        return out;
    };
    EXPECT_TRUE(res[0].active.empty());
    EXPECT_EQ(ids_of(res[1].active), gain_kept(res[0].acquired));
    for (std::size_t i = 3; i <= 4; ++i) {
        auto expect = gain_kept(res[i - 2].acquired);
        // Usage of the older generation as observed while batch i-1 ran.
        std::vector<std::pair<std::string, std::uint64_t>> usage;
        std::uint64_t total = 0;
        for (const auto& id : gain_kept(res[i - 3].acquired)) {
            const auto seen = res[i - 2].active.find(id);
            const auto f = seen ? seen->freq : 0;
            usage.emplace_back(id, f);
            total += f;
        }
        if (total > 0) {
            for (const auto& [id, f] : usage) {
                const auto rec = *res[i - 3].acquired.find(id);
                std::uint64_t through = 0;
                for (const auto& [oid, of] : usage) {
                    const auto other = *res[i - 3].acquired.find(oid);
                    const bool ahead = of != f ? of > f
                                               : (other.created_ord != rec.created_ord
                                                      ? other.created_ord < rec.created_ord
                                                      : oid <= id);
                    if (ahead) through += of;
                }
                if (static_cast<double>(through) / static_cast<double>(total) <= cfg.theta) expect.insert(id);
            }
        }
        EXPECT_EQ(ids_of(res[i - 1].active), expect) << "batch " << i;
        ASSERT_TRUE(res[i - 1].summary.elimination);
        EXPECT_EQ(res[i - 1].summary.elimination->retained, expect.size());
    }
    EXPECT_EQ(res[1].summary.elimination->frequency_input, 0u);
}

TEST(Schedules, ZeroAcquisitionBatchLeavesCumulativePoolUnchanged) {
    ScriptedAgent agent;
    const std::string code = "main.py\n```python\nprint('x')\n```\n";
    std::vector<TaskBatch> batches(3);
    for (std::size_t b = 0; b < 3; ++b) {
        batches[b].ordinal = b + 1;
        const std::string id = "t" + std::to_string(b);
        batches[b].tasks.push_back({id, "c", "task " + id});
        agent.add_turn(id, Phase::Coding, 1, {"write", code});
        if (b != 1) {  // batch 2 stops after coding: a 2-node chain has no shortcuts
            agent.add_turn(id, Phase::Review, 1, {"polish", "main.py\n```python\nprint('y')\n```\n"});
            agent.add_pseudo(id, 0, 2, "do it all");
        } else {
            agent.add_turn(id, Phase::Review, 1, {"<INFO> Finished", ""});
        }
        agent.add_turn(id, Phase::Review, 2, {"<INFO> Finished", ""});
        agent.add_turn(id, Phase::Test, 1, {"<INFO> Finished", ""});
    }
    HashingEmbedder embedder(32);
    auto sandbox = marker_sandbox();
    RunConfig cfg;
    cfg.pattern = Pattern::Cumulative;
    cfg.n_batches = 3;
    const auto res = run_pattern(batches, Backends{agent, embedder, sandbox}, cfg);
    EXPECT_EQ(res[1].acquired.size(), 0u);
    EXPECT_EQ(ids_of(res[2].active), ids_of(res[1].active));
}

TEST(Checkpoints, ResumeContinuesAndMatchesAnUninterruptedRun) {
    Synthetic s;
    const auto cfg = config(Pattern::Eliminated);
    TempDir full, broken;
    RunOptions opt;
    opt.checkpoint_dir = full.path();
    run_pattern(s.batches, s.view(), cfg, opt);

    // Batch 3 fails during acquisition.
    std::set<std::string> batch3;
    for (const auto& t : s.batches[2].tasks) batch3.insert(t.task_id);
    FlakyPseudo flaky(s.agent, batch3);
    RunOptions opt2;
    opt2.checkpoint_dir = broken.path();
    try {
        run_pattern(s.batches, Backends{flaky, s.embedder, s.sandbox}, cfg, opt2);
        FAIL() << "expected RunInterrupted";
    } catch (const RunInterrupted& e) {
        EXPECT_EQ(e.batch(), 3u);
    }
    EXPECT_TRUE(fs::exists(batch_dir(broken.path(), 2) / "metrics.json"));
    EXPECT_FALSE(fs::exists(batch_dir(broken.path(), 3) / "metrics.json"));

    std::vector<std::size_t> executed;
    opt2.resume = true;
    opt2.on_batch = [&](const BatchResult& r) { executed.push_back(r.batch); };
    const auto resumed = run_pattern(s.batches, s.view(), cfg, opt2);
    EXPECT_EQ(executed, (std::vector<std::size_t>{3, 4}));
    EXPECT_EQ(resumed.size(), 4u);
    EXPECT_EQ(dir_fingerprint(full.path()), dir_fingerprint(broken.path()));
}

TEST(Checkpoints, RepeatedRunsAreByteIdentical) {
    Synthetic s;
    TempDir a, b;
    RunOptions oa, ob;
    oa.checkpoint_dir = a.path();
    ob.checkpoint_dir = b.path();
    run_pattern(s.batches, s.view(), config(Pattern::Cumulative), oa);
    run_pattern(s.batches, s.view(), config(Pattern::Cumulative), ob);
    EXPECT_EQ(dir_fingerprint(a.path()), dir_fingerprint(b.path()));

    const auto report = load_run_report(a.path(), "r", "cumulative", 5);
    EXPECT_EQ(report.batches.size(), 4u);
    EXPECT_EQ(report.missing, std::vector<std::size_t>{5});
}

TEST(Schedules, InvalidConfigIsRejected) {
    Synthetic s;
    auto cfg = config(Pattern::Successive);
    cfg.k = 0;
    EXPECT_THROW(run_pattern(s.batches, s.view(), cfg), ConfigError);
    EXPECT_THROW(pattern_from_string("sideways"), ConfigError);
}
