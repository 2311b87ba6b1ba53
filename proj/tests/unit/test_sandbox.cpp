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

#include <chrono>
#include <fstream>

#include "ier/errors.hpp"
#include "ier/sandbox.hpp"
#include "support.hpp"

using namespace ier;
using ier::testing::single_file;
using ier::testing::TempDir;

namespace {

ProcessSandbox python(std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
    SandboxSettings s;
    s.timeout = timeout;
    return ProcessSandbox(s);
}

}  // namespace

TEST(Sandbox, ValidProgramCompilesAndRuns) {
    auto sb = python();
    const auto r = sb.compile_and_run(single_file("print('hello')\n"));
    EXPECT_TRUE(r.compiled);
    EXPECT_TRUE(r.executed);
    EXPECT_NE(r.log.find("hello"), std::string::npos);
}

TEST(Sandbox, SyntaxErrorFailsBoth) {
    auto sb = python();
    const auto r = sb.compile_and_run(single_file("def f(:\n    return 1\n"));
    EXPECT_FALSE(r.compiled);
    EXPECT_FALSE(r.executed);
    EXPECT_FALSE(sb.compiles(single_file("def f(:\n")));
}

TEST(Sandbox, InfiniteLoopTimesOutAfterCompiling) {
    auto sb = python(std::chrono::seconds(2));
    const auto start = std::chrono::steady_clock::now();
    const auto r = sb.compile_and_run(single_file("while True:\n    pass\n"));
    const auto elapsed = std::chrono::steady_clock::now() - start;
    EXPECT_TRUE(r.compiled);
    EXPECT_FALSE(r.executed);
    EXPECT_LT(elapsed, std::chrono::seconds(8));
    EXPECT_NE(r.log.find("timed out"), std::string::npos);
}

TEST(Sandbox, RuntimeErrorCompilesButFails) {
    auto sb = python();
    const auto r = sb.compile_and_run(single_file("raise SystemExit(3)\n"));
    EXPECT_TRUE(r.compiled);
    EXPECT_FALSE(r.executed);
}

TEST(Sandbox, MultiFileProgramsRunFromMain) {
    auto sb = python();
    Artifact a{{{"pkg/util.py", "def f():\n    return 41\n"}, {"pkg/__init__.py", ""},
                {"main.py", "from pkg.util import f\nprint(f() + 1)\n"}}};
    const auto r = sb.compile_and_run(a);
    EXPECT_TRUE(r.executed);
    EXPECT_NE(r.log.find("42"), std::string::npos);
}

TEST(Sandbox, EmptyAndUnsafeArtifactsFailWithoutRunning) {
    auto sb = python();
    EXPECT_FALSE(sb.compile_and_run(Artifact{}).compiled);
    EXPECT_FALSE(sb.compiles(single_file("print(1)\n", "/tmp/evil.py")));
    EXPECT_FALSE(sb.compiles(single_file("print(1)\n", "../evil.py")));
}

TEST(Sandbox, MisconfigurationIsConfigError) {
    SandboxSettings empty;
    empty.compile_command.clear();
    EXPECT_THROW(ProcessSandbox{empty}, ConfigError);
    SandboxSettings zero;
    zero.timeout = std::chrono::milliseconds(0);
    EXPECT_THROW(ProcessSandbox{zero}, ConfigError);
    TempDir dir;
    std::ofstream(dir / "file") << "x";
    SandboxSettings blocked_root;
    blocked_root.work_root = dir / "file" / "root";  // cannot be created under a regular file
    ProcessSandbox sb(blocked_root);
    EXPECT_THROW(sb.compiles(single_file("print(1)\n")), ConfigError);
}

TEST(Sandbox, RunShellReportsExitCodeAndOutput) {
    TempDir dir;
    const auto r = run_shell("echo out; echo err >&2; exit 4", dir.path(), std::chrono::seconds(5));
    EXPECT_EQ(r.exit_code, 4);
    EXPECT_FALSE(r.timed_out);
    EXPECT_NE(r.output.find("out"), std::string::npos);
    EXPECT_NE(r.output.find("err"), std::string::npos);
}

TEST(Sandbox, ShellQuote) { EXPECT_EQ(shell_quote("a b'c"), "'a b'\\''c'"); }
