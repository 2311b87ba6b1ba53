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
#include <memory>
#include <optional>
#include <string>

#include "ier/agent.hpp"
#include "ier/embedder.hpp"
#include "ier/propagation.hpp"
#include "ier/remote.hpp"
#include "ier/sandbox.hpp"

namespace ier {

// Everything a run needs. Loaded from a flat-section key/value file:
//
//   [run]
//   pattern = "cumulative"
//   batches = 6
//   epsilon = 0.95
//
//   [backend]
//   mode = "scripted"
//   fixtures = "fixtures.jsonl"
//
// Relative paths resolve against the config file's directory.
struct AppConfig {
    RunConfig run;
    std::optional<bool> wall_clock;  // unset: on for remote backends, off for scripted
    std::string run_id;              // empty: "<pattern>-seed<seed>"
    std::filesystem::path corpus;
    std::filesystem::path out_dir = "runs";

    std::string backend_mode = "scripted";  // scripted | remote
    std::filesystem::path fixtures;
    RemoteSettings chat;

    std::string embedder_mode = "local";  // local | remote
    std::size_t embedding_dim = 256;
    std::uint64_t embedding_seed = 0;
    RemoteSettings embedding;

    SandboxSettings sandbox;
    PromptTemplates prompts = PromptTemplates::defaults();

    std::string effective_run_id() const;
    bool effective_wall_clock() const;
};

// Throws ConfigError for unreadable files, unknown sections/keys and bad values.
AppConfig load_config(const std::filesystem::path& path);
AppConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

// Canonical JSON echo of the settings that determine a run's output (no secrets).
std::string describe_config(const AppConfig& config);

struct BackendSet {
    std::unique_ptr<AgentBackend> agent;
    std::unique_ptr<Embedder> embedder;
    std::unique_ptr<Sandbox> sandbox;

    Backends view() const { return Backends{*agent, *embedder, *sandbox}; }
};

BackendSet make_backends(const AppConfig& config);
std::unique_ptr<Embedder> make_embedder(const AppConfig& config);

}  // namespace ier
