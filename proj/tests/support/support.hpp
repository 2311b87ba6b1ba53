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

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ier/artifact.hpp"
#include "ier/chain.hpp"
#include "ier/embedder.hpp"
#include "ier/pool.hpp"
#include "ier/sandbox.hpp"

namespace ier::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

std::filesystem::path test_data(const std::string& name);
std::filesystem::path synthetic_data(const std::string& name);

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

// Runs the CLI in-process.
CliResult run_cli(const std::vector<std::string>& args);

Artifact single_file(const std::string& content, const std::string& path = "main.py");

// Chain with n nodes (n >= 1) whose solutions are "v<i>" programs.
ExecutionChain linear_chain(std::size_t nodes, const std::string& task_id = "t");

// Random unit vector with non-negative or signed components.
std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim, bool non_negative = false);

// Record with the given fields and a random unit embedding.
ExperienceRecord random_record(std::mt19937_64& rng, std::size_t dim, std::uint64_t ord,
                               std::optional<double> gain = std::nullopt, std::uint64_t freq = 0,
                               RecordKind kind = RecordKind::S2I, std::size_t batch = 1);

// Sandbox double: compiles unless a file contains "SYNTAX", runs unless it contains "CRASH".
ScriptedSandbox marker_sandbox();

// Embedder double returning fixed vectors per exact text; unknown text throws BackendError.
class TableEmbedder final : public Embedder {
  public:
    explicit TableEmbedder(std::size_t dim) : dim_(dim) {}
    void set(const std::string& text, Embedding v) { table_[text] = std::move(v); }
    std::size_t dimension() const override { return dim_; }
    Embedding embed(std::string_view text) override;

  private:
    std::size_t dim_;
    std::map<std::string, Embedding, std::less<>> table_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace ier::testing
