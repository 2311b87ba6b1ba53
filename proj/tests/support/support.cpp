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

#include "support.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ier/cli.hpp"
#include "ier/errors.hpp"

namespace ier::testing {
namespace fs = std::filesystem;

TempDir::TempDir() {
    auto tmpl = (fs::temp_directory_path() / "ier-test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

fs::path test_data(const std::string& name) { return fs::path(IER_TEST_DATA) / name; }
fs::path synthetic_data(const std::string& name) { return fs::path(IER_SYNTHETIC) / name; }

CliResult run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"ier"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliResult r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

Artifact single_file(const std::string& content, const std::string& path) {
    Artifact a;
    a.files.push_back({path, content});
    return a;
}

ExecutionChain linear_chain(std::size_t nodes, const std::string& task_id) {
    ExecutionChain chain(task_id, "task " + task_id);
    for (std::size_t i = 1; i < nodes; ++i)
        chain.append_step("step " + std::to_string(i), single_file("print('v" + std::to_string(i) + "')\n"),
                          i == 1 ? "coding" : "review");
    return chain;
}

std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim, bool non_negative) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(dim);
    double norm = 0.0;
    do {
        norm = 0.0;
        for (auto& x : v) {
            x = g(rng);
            if (non_negative) x = std::abs(x);
            norm += x * x;
        }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
}

ExperienceRecord random_record(std::mt19937_64& rng, std::size_t dim, std::uint64_t ord, std::optional<double> gain,
                               std::uint64_t freq, RecordKind kind, std::size_t batch) {
    ExperienceRecord r;
    r.kind = kind;
    r.key_text = "key " + std::to_string(ord);
    r.value_text = "value " + std::to_string(ord);
    r.id = record_id(kind, r.key_text, r.value_text);
    r.key_embedding = random_unit(rng, dim);
    r.gain = gain;
    r.freq = freq;
    r.origin_batch = batch;
    r.origin_task = "t" + std::to_string(ord);
    r.created_ord = ord;
    return r;
}

ScriptedSandbox marker_sandbox() {
    return ScriptedSandbox([](const Artifact& a) {
        RunOutcome o;
        if (a.empty()) return o;
        o.compiled = !contains_token(a, "SYNTAX");
        o.executed = o.compiled && !contains_token(a, "CRASH");
        return o;
    });
}

Embedding TableEmbedder::embed(std::string_view text) {
    const auto it = table_.find(text);
    if (it == table_.end()) throw BackendError("no fixture embedding for: " + std::string(text));
    return it->second;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ier::testing
