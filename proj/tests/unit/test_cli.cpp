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

#include <fstream>
#include <random>
#include <sstream>

#include "ier/cli.hpp"
#include "ier/pool.hpp"
#include "support.hpp"

using namespace ier;
using ier::testing::random_record;
using ier::testing::read_file;
using ier::testing::run_cli;
using ier::testing::synthetic_data;
using ier::testing::TempDir;
using ier::testing::test_data;
namespace fs = std::filesystem;

namespace {

std::string config_path() { return fs::weakly_canonical(synthetic_data("../../configs/synthetic.toml")).string(); }

std::vector<std::string> run_args(const TempDir& out, const std::string& pattern, const std::string& id) {
    return {"run", "--config", config_path(), "--out", out.path().string(), "--run-id", id, "--pattern", pattern,
            "--parallelism", "8"};
}

std::vector<std::string> csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    return cells;
}

}  // namespace

TEST(CliIngest, PrintsCountsAndWritesAStableManifest) {
    TempDir dir;
    const auto a = run_cli({"ingest", "--config", config_path(), "--out", (dir / "a.jsonl").string()});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_NE(a.out.find("16 tasks, 4 categories, 4 batches"), std::string::npos) << a.out;
    for (int i = 1; i <= 4; ++i)
        EXPECT_NE(a.out.find("batch " + std::to_string(i) + ": 4 tasks"), std::string::npos);
    const auto b = run_cli({"ingest", "--config", config_path(), "--out", (dir / "b.jsonl").string()});
    ASSERT_EQ(b.code, 0);
    EXPECT_EQ(read_file(dir / "a.jsonl"), read_file(dir / "b.jsonl"));
}

TEST(CliIngest, MissingCategoryIsAnInputError) {
    TempDir dir;
    {
        std::ofstream f(dir / "corpus.jsonl");
        f << R"({"task_id":"a","category":"x","task_text":"do a"})" << "\n";
        f << R"({"task_id":"b","task_text":"do b"})" << "\n";
    }
    const auto r = run_cli({"ingest", "--corpus", (dir / "corpus.jsonl").string(), "--batches", "2", "--out",
                            (dir / "m.jsonl").string()});
    EXPECT_EQ(r.code, cli::kExitInput);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST(CliErrors, ConfigAndUsageProblemsMapToExitCodes) {
    TempDir dir;
    {
        std::ofstream f(dir / "bad.toml");
        f << "[run]\nbatchez = 3\n";
    }
    EXPECT_EQ(run_cli({"run", "--config", (dir / "bad.toml").string()}).code, cli::kExitConfig);
    EXPECT_EQ(run_cli({"run", "--config", (dir / "missing.toml").string()}).code, cli::kExitConfig);
    EXPECT_EQ(run_cli({"run", "--config", config_path(), "--epsilon", "2"}).code, cli::kExitConfig);
    EXPECT_EQ(run_cli({"inspect", "--pool", (dir / "none.jsonl").string()}).code, cli::kExitInput);
    EXPECT_NE(run_cli({"frobnicate"}).code, 0);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(CliRun, ReportRebuildsIdenticalFilesAndResumeCompletes) {
    TempDir out;
    const auto r = run_cli(run_args(out, "cumulative", "cum"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto run_dir = out / "cum";
    for (const char* f : {"run.json", "manifest.jsonl", "report.json", "report.txt", "utilization.csv"})
        EXPECT_TRUE(fs::exists(run_dir / f)) << f;
    EXPECT_NE(r.out.find("batch 4: 4 tasks"), std::string::npos) << r.out;

    TempDir rebuilt;
    const auto rep = run_cli({"report", "--run-dir", run_dir.string(), "--out", rebuilt.path().string()});
    ASSERT_EQ(rep.code, 0) << rep.err;
    for (const char* f : {"report.json", "report.txt", "utilization.csv"})
        EXPECT_EQ(read_file(run_dir / f), read_file(rebuilt / f)) << f;

    // Drop the last two batches and resume.
    const auto report_before = read_file(run_dir / "report.json");
    fs::remove_all(run_dir / "batch-3");
    fs::remove_all(run_dir / "batch-4");
    const auto partial = run_cli({"report", "--run-dir", run_dir.string(), "--out", rebuilt.path().string()});
    EXPECT_EQ(partial.code, 0);
    EXPECT_NE(partial.err.find("missing batches: 3 4"), std::string::npos) << partial.err;

    auto resume = run_args(out, "cumulative", "cum");
    resume.push_back("--resume");
    const auto again = run_cli(resume);
    ASSERT_EQ(again.code, 0) << again.err;
    EXPECT_EQ(again.out.find("batch 1:"), std::string::npos);
    EXPECT_NE(again.out.find("batch 3:"), std::string::npos);
    EXPECT_EQ(read_file(run_dir / "report.json"), report_before);

    // Resuming with different settings is refused.
    auto changed = resume;
    changed.insert(changed.end(), {"--theta", "0.5"});
    EXPECT_EQ(run_cli(changed).code, cli::kExitConfig);
}

TEST(CliRun, EliminatedRunPrintsRetainedFractions) {
    TempDir out;
    const auto r = run_cli(run_args(out, "eliminated", "elim"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("retained "), std::string::npos) << r.out;
    EXPECT_NE(read_file(out / "elim" / "report.txt").find("retained"), std::string::npos);
}

TEST(CliRun, SuccessiveUtilizationIsSubdiagonal) {
    TempDir out;
    ASSERT_EQ(run_cli(run_args(out, "successive", "succ")).code, 0);
    std::ifstream csv(out / "succ" / "utilization.csv");
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "consuming_batch,from_batch_1,from_batch_2,from_batch_3,from_batch_4");
    for (std::size_t i = 1; std::getline(csv, line); ++i) {
        const auto cells = csv_row(line);
        ASSERT_EQ(cells.size(), 5u);
        for (std::size_t j = 1; j <= 4; ++j) {
            const double v = std::stod(cells[j]);
            if (i >= 2 && j == i - 1)
                EXPECT_NEAR(v, 1.0, 1e-9) << line;
            else
                EXPECT_EQ(v, 0.0) << line;
        }
    }
}

TEST(CliEliminate, GainBelowEpsilonEmptiesThePool) {
    TempDir dir;
    std::mt19937_64 rng(3);
    ExperiencePool pool(8);
    std::vector<ExperienceRecord> recs;
    for (std::uint64_t i = 0; i < 10; ++i) recs.push_back(random_record(rng, 8, i, 0.1 + 0.01 * i, i));
    pool.ingest(recs);
    save_pool(pool, (dir / "pool.jsonl").string());
    save_pool(pool, (dir / "snap.jsonl").string());
    const auto r = run_cli({"eliminate", "--pool", (dir / "pool.jsonl").string(), "--freq-snapshot",
                            (dir / "snap.jsonl").string(), "--epsilon", "0.5", "--theta", "0", "--out",
                            (dir / "out.jsonl").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(load_pool((dir / "out.jsonl").string()).empty());
    EXPECT_NE(r.out.find("after: 0 records"), std::string::npos) << r.out;
}

TEST(CliEliminate, PermissiveThresholdsKeepEverything) {
    TempDir dir;
    std::mt19937_64 rng(4);
    ExperiencePool pool(8);
    std::vector<ExperienceRecord> recs;
    for (std::uint64_t i = 0; i < 12; ++i)
        recs.push_back(random_record(rng, 8, i, 0.05 * static_cast<double>(i), i % 3));
    pool.ingest(recs);
    save_pool(pool, (dir / "pool.jsonl").string());
    const auto r = run_cli({"eliminate", "--pool", (dir / "pool.jsonl").string(), "--freq-snapshot",
                            (dir / "pool.jsonl").string(), "--epsilon", "0", "--theta", "1", "--out",
                            (dir / "out.jsonl").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(load_pool((dir / "out.jsonl").string()).ids(), pool.ids());
}

TEST(CliEliminate, TwentyRecordPoolMatchesHandComputedIds) {
    TempDir dir;
    const auto r = run_cli({"eliminate", "--pool", test_data("elim20/pool.jsonl").string(), "--freq-snapshot",
                            test_data("elim20/snapshot.jsonl").string(), "--epsilon", "0.5", "--theta", "0.8",
                            "--out", (dir / "out.jsonl").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::vector<std::string> expected;
    std::ifstream f(test_data("elim20/expected_ids.txt"));
    for (std::string id; std::getline(f, id);)
        if (!id.empty() && id[0] != '#') expected.push_back(id);
    auto got = load_pool((dir / "out.jsonl").string()).ids();
    std::sort(got.begin(), got.end());
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(got, expected);
}

TEST(CliEliminate, MissingSnapshotFallsBackToGainWithWarning) {
    TempDir dir;
    const auto r = run_cli({"eliminate", "--pool", test_data("elim20/pool.jsonl").string(), "--freq-snapshot",
                            (dir / "absent.jsonl").string(), "--epsilon", "0.5", "--out",
                            (dir / "out.jsonl").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("warning"), std::string::npos);
    EXPECT_EQ(r.out.find("frequency filter"), std::string::npos);
}

TEST(CliInspect, SummarisesAPool) {
    const auto r = run_cli({"inspect", "--pool", test_data("elim20/pool.jsonl").string(), "--top", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("records: 20"), std::string::npos) << r.out;
}
