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

#include <nlohmann/json.hpp>

#include "ier/config.hpp"
#include "ier/errors.hpp"
#include "support.hpp"

using namespace ier;

TEST(Config, DefaultsWhenEmpty) {
    const auto c = parse_config("");
    EXPECT_EQ(c.run.pattern, Pattern::Successive);
    EXPECT_EQ(c.run.n_batches, 6u);
    EXPECT_EQ(c.run.k, 1u);
    EXPECT_EQ(c.run.epsilon, 0.95);
    EXPECT_EQ(c.run.theta, 0.95);
    EXPECT_EQ(c.run.max_review_rounds, 3u);
    EXPECT_EQ(c.run.max_test_rounds, 3u);
    EXPECT_EQ(c.backend_mode, "scripted");
    EXPECT_FALSE(c.effective_wall_clock());
    EXPECT_EQ(c.effective_run_id(), "successive-seed0");
}

TEST(Config, ReadsSectionsQuotesCommentsAndRelativePaths) {
    const auto c = parse_config(R"(
# comment
[run]
pattern = "eliminated"
batches = 4
seed = 11
epsilon = 0.5
theta = 0.8
corpus = "data/corpus.jsonl"
wall_clock = true
; also a comment

[backend]
mode = "remote"
endpoint = "http://localhost:8000/v1/chat/completions"
model = "local-model"
timeout_s = 2.5
temperature = 0

[sandbox]
compile = "python3 -m py_compile {files}"
timeout_s = 5
)",
                                "/etc/ier");
    EXPECT_EQ(c.run.pattern, Pattern::Eliminated);
    EXPECT_EQ(c.run.n_batches, 4u);
    EXPECT_EQ(c.run.seed, 11u);
    EXPECT_EQ(c.run.epsilon, 0.5);
    EXPECT_EQ(c.corpus, std::filesystem::path("/etc/ier/data/corpus.jsonl"));
    EXPECT_EQ(c.chat.model, "local-model");
    EXPECT_EQ(c.chat.timeout, std::chrono::milliseconds(2500));
    EXPECT_EQ(c.chat.temperature, 0.0);
    EXPECT_EQ(c.sandbox.timeout, std::chrono::seconds(5));
    EXPECT_TRUE(c.effective_wall_clock());
}

TEST(Config, RejectsUnknownKeysSectionsAndBadValues) {
    EXPECT_THROW(parse_config("[run]\nbatchez = 3\n"), ConfigError);
    EXPECT_THROW(parse_config("[runner]\nbatches = 3\n"), ConfigError);
    EXPECT_THROW(parse_config("[run]\nbatches = three\n"), ConfigError);
    EXPECT_THROW(parse_config("[run]\npattern = \"sideways\"\n"), ConfigError);
    EXPECT_THROW(parse_config("[run]\nepsilon = 1.5\n"), ConfigError);
    EXPECT_THROW(parse_config("[run]\nbatches = 0\n"), ConfigError);
    EXPECT_THROW(parse_config("[backend]\nmode = \"magic\"\n"), ConfigError);
    EXPECT_THROW(parse_config("[run]\nwall_clock = yes\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/ier.toml"), ConfigError);
}

TEST(Config, DescriptionOmitsSecretsAndIsStable) {
    auto c = parse_config("[backend]\nmode = \"remote\"\nendpoint = \"http://x/y\"\nmodel = \"m\"\n");
    const auto text = describe_config(c);
    EXPECT_EQ(text, describe_config(c));
    EXPECT_EQ(text.find("OPENAI_API_KEY"), std::string::npos);
    EXPECT_EQ(nlohmann::json::parse(text)["chat_model"], "m");
}

TEST(Config, BackendConstructionValidatesModeSettings) {
    AppConfig scripted;
    EXPECT_THROW(make_backends(scripted), ConfigError);  // no fixtures
    AppConfig remote;
    remote.backend_mode = "remote";
    EXPECT_THROW(make_backends(remote), ConfigError);  // no endpoint
    scripted.fixtures = ier::testing::synthetic_data("fixtures.jsonl");
    const auto set = make_backends(scripted);
    EXPECT_EQ(set.embedder->dimension(), 256u);
}
