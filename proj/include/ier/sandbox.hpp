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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <semaphore>
#include <string>

#include "ier/artifact.hpp"

namespace ier {

struct RunOutcome {
    bool compiled = false;
    bool executed = false;
    std::string log;
};

// Compile/execute check over a materialized artifact. Thread-safe.
class Sandbox {
  public:
    virtual ~Sandbox() = default;
    virtual bool compiles(const Artifact& artifact) = 0;
    virtual RunOutcome compile_and_run(const Artifact& artifact) = 0;
};

struct SandboxSettings {
    // Shell command templates run with /bin/sh -c inside the artifact directory.
    // {files} expands to the quoted file paths, {main} to main.py when present
    // (otherwise the first path in sorted order).
    std::string compile_command = "python3 -m py_compile {files}";
    std::string run_command = "python3 {main}";
    std::chrono::milliseconds timeout{30000};
    std::size_t max_parallel = 4;
    std::filesystem::path work_root;  // defaults to the system temp directory
};

struct ProcessResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string output;  // merged stdout/stderr, truncated to 64 KiB
};

// Runs `command` through /bin/sh in `cwd` with stdin at /dev/null. On timeout
// the whole process group is killed. Throws ConfigError when the process cannot
// be started.
ProcessResult run_shell(const std::string& command, const std::filesystem::path& cwd,
                        std::chrono::milliseconds timeout);

// Writes each file under a fresh temporary directory, runs the configured
// commands, and removes the directory afterwards. Empty artifacts fail both
// checks without spawning anything.
class ProcessSandbox final : public Sandbox {
  public:
    explicit ProcessSandbox(SandboxSettings settings);

    bool compiles(const Artifact& artifact) override;
    RunOutcome compile_and_run(const Artifact& artifact) override;

    const SandboxSettings& settings() const noexcept { return settings_; }

  private:
    RunOutcome check(const Artifact& artifact, bool run);

    SandboxSettings settings_;
    std::counting_semaphore<256> slots_;
};

// In-process double: verdicts come from a caller-supplied function.
class ScriptedSandbox final : public Sandbox {
  public:
    using Judge = std::function<RunOutcome(const Artifact&)>;
    explicit ScriptedSandbox(Judge judge) : judge_(std::move(judge)) {}

    bool compiles(const Artifact& artifact) override { return judge_(artifact).compiled; }
    RunOutcome compile_and_run(const Artifact& artifact) override { return judge_(artifact); }

  private:
    Judge judge_;
};

std::string shell_quote(const std::string& s);

}  // namespace ier
