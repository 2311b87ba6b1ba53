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

#include "ier/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "ier/errors.hpp"

namespace ier {
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

std::string unquote(std::string v) {
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.pop_back();
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
        return v.substr(1, v.size() - 2);
    return v;
}

// The ini reader only knows ';' comments; '#' lines are common in TOML-ish files.
std::string strip_hash_comments(const std::string& text) {
    std::istringstream in(text);
    std::string out, line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t");
        if (first != std::string::npos && line[first] == '#') line.clear();
        out += line;
        out += '\n';
    }
    return out;
}

class Section {
  public:
    Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {}

    std::optional<std::string> text(const std::string& key) {
        seen_.insert(key);
        const auto v = tree_.get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return unquote(*v);
    }

    template <class T>
    std::optional<T> number(const std::string& key) {
        const auto v = text(key);
        if (!v) return std::nullopt;
        T out{};
        const auto* end = v->data() + v->size();
        const auto [ptr, ec] = std::from_chars(v->data(), end, out);
        if (ec != std::errc{} || ptr != end) throw ConfigError(where(key) + ": not a number: " + *v);
        return out;
    }

    std::optional<bool> flag(const std::string& key) {
        const auto v = text(key);
        if (!v) return std::nullopt;
        if (*v == "true") return true;
        if (*v == "false") return false;
        throw ConfigError(where(key) + ": expected true or false, got " + *v);
    }

    std::optional<fs::path> path(const std::string& key, const fs::path& base) {
        const auto v = text(key);
        if (!v) return std::nullopt;
        fs::path p(*v);
        if (p.is_relative() && !base.empty()) p = base / p;
        return p;
    }

    void reject_unknown() const {
        for (const auto& [key, _] : tree_)
            if (!seen_.count(key)) throw ConfigError("unknown key " + where(key));
    }

  private:
    std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

    std::string name_;
    const pt::ptree& tree_;
    std::set<std::string> seen_;
};

void read_remote(Section& s, RemoteSettings& r) {
    if (auto v = s.text("endpoint")) r.endpoint = *v;
    if (auto v = s.text("model")) r.model = *v;
    if (auto v = s.text("token_env")) r.token_env = *v;
    if (auto v = s.number<double>("timeout_s")) {
        if (*v <= 0) throw ConfigError("timeout_s must be positive");
        r.timeout = std::chrono::milliseconds(static_cast<long long>(*v * 1000));
    }
    if (auto v = s.number<int>("retries")) r.retries = *v;
    if (auto v = s.number<long long>("backoff_ms")) r.backoff = std::chrono::milliseconds(*v);
    if (auto v = s.number<std::size_t>("max_in_flight")) r.max_in_flight = *v;
}

}  // namespace

std::string AppConfig::effective_run_id() const {
    if (!run_id.empty()) return run_id;
    return std::string(to_string(run.pattern)) + "-seed" + std::to_string(run.seed);
}

bool AppConfig::effective_wall_clock() const { return wall_clock.value_or(backend_mode == "remote"); }

AppConfig parse_config(const std::string& text, const fs::path& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream in(strip_hash_comments(text));
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
    }

    AppConfig c;
    static const std::set<std::string> known = {"run", "backend", "embedder", "sandbox", "prompts"};
    for (const auto& [name, body] : tree) {
        if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");
        if (!body.data().empty()) throw ConfigError("key outside any section: " + name);
    }
    const pt::ptree empty;
    auto section = [&](const std::string& name) {
        const auto it = tree.find(name);
        return Section(name, it == tree.not_found() ? empty : it->second);
    };

    auto run = section("run");
    if (auto v = run.text("pattern")) c.run.pattern = pattern_from_string(*v);
    if (auto v = run.number<std::size_t>("batches")) c.run.n_batches = *v;
    if (auto v = run.number<std::uint64_t>("seed")) c.run.seed = *v;
    if (auto v = run.number<std::size_t>("k")) c.run.k = *v;
    if (auto v = run.number<double>("epsilon")) c.run.epsilon = *v;
    if (auto v = run.number<double>("theta")) c.run.theta = *v;
    if (auto v = run.number<std::size_t>("max_review_rounds")) c.run.max_review_rounds = *v;
    if (auto v = run.number<std::size_t>("max_test_rounds")) c.run.max_test_rounds = *v;
    if (auto v = run.number<std::size_t>("parallelism")) c.run.parallelism = *v;
    if (auto v = run.flag("wall_clock")) c.wall_clock = *v;
    if (auto v = run.text("run_id")) c.run_id = *v;
    if (auto v = run.path("corpus", base_dir)) c.corpus = *v;
    if (auto v = run.path("out", base_dir)) c.out_dir = *v;
    run.reject_unknown();

    auto backend = section("backend");
    if (auto v = backend.text("mode")) c.backend_mode = *v;
    if (auto v = backend.path("fixtures", base_dir)) c.fixtures = *v;
    read_remote(backend, c.chat);
    if (auto v = backend.number<double>("temperature")) c.chat.temperature = *v;
    backend.reject_unknown();
    if (c.backend_mode != "scripted" && c.backend_mode != "remote")
        throw ConfigError("[backend] mode must be scripted or remote, got " + c.backend_mode);

    auto embedder = section("embedder");
    if (auto v = embedder.text("mode")) c.embedder_mode = *v;
    if (auto v = embedder.number<std::size_t>("dim")) c.embedding_dim = *v;
    if (auto v = embedder.number<std::uint64_t>("seed")) c.embedding_seed = *v;
    read_remote(embedder, c.embedding);
    embedder.reject_unknown();
    if (c.embedder_mode != "local" && c.embedder_mode != "remote")
        throw ConfigError("[embedder] mode must be local or remote, got " + c.embedder_mode);
    if (c.embedding_dim == 0) throw ConfigError("[embedder] dim must be positive");

    auto sandbox = section("sandbox");
    if (auto v = sandbox.text("compile")) c.sandbox.compile_command = *v;
    if (auto v = sandbox.text("run")) c.sandbox.run_command = *v;
    if (auto v = sandbox.number<double>("timeout_s")) {
        if (*v <= 0) throw ConfigError("[sandbox] timeout_s must be positive");
        c.sandbox.timeout = std::chrono::milliseconds(static_cast<long long>(*v * 1000));
    }
    if (auto v = sandbox.number<std::size_t>("parallelism")) c.sandbox.max_parallel = *v;
    if (auto v = sandbox.path("work_root", base_dir)) c.sandbox.work_root = *v;
    sandbox.reject_unknown();

    auto prompts = section("prompts");
    for (auto [key, field] : {std::pair{"instruct_system", &PromptTemplates::instruct_system},
                              {"instruct_user", &PromptTemplates::instruct_user},
                              {"respond_system", &PromptTemplates::respond_system},
                              {"respond_user", &PromptTemplates::respond_user},
                              {"pseudo_system", &PromptTemplates::pseudo_system},
                              {"pseudo_user", &PromptTemplates::pseudo_user}}) {
        if (auto v = prompts.text(key)) c.prompts.*field = *v;
    }
    prompts.reject_unknown();

    c.run.validate();
    return c;
}

AppConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::string describe_config(const AppConfig& c) {
    nlohmann::ordered_json j;
    j["run_id"] = c.effective_run_id();
    j["pattern"] = to_string(c.run.pattern);
    j["batches"] = c.run.n_batches;
    j["seed"] = c.run.seed;
    j["k"] = c.run.k;
    j["epsilon"] = c.run.epsilon;
    j["theta"] = c.run.theta;
    j["max_review_rounds"] = c.run.max_review_rounds;
    j["max_test_rounds"] = c.run.max_test_rounds;
    j["wall_clock"] = c.effective_wall_clock();
    j["backend"] = c.backend_mode;
    if (c.backend_mode == "remote") {
        j["chat_endpoint"] = c.chat.endpoint;
        j["chat_model"] = c.chat.model;
        j["temperature"] = c.chat.temperature;
    }
    j["embedder"] = c.embedder_mode;
    j["embedding_dim"] = c.embedding_dim;
    if (c.embedder_mode == "local") {
        j["embedding_seed"] = c.embedding_seed;
    } else {
        j["embedding_endpoint"] = c.embedding.endpoint;
        j["embedding_model"] = c.embedding.model;
    }
    j["compile_command"] = c.sandbox.compile_command;
    j["run_command"] = c.sandbox.run_command;
    j["sandbox_timeout_ms"] = c.sandbox.timeout.count();
    return j.dump(2) + "\n";
}

std::unique_ptr<Embedder> make_embedder(const AppConfig& c) {
    if (c.embedder_mode == "remote") {
        if (c.embedding.endpoint.empty()) throw ConfigError("[embedder] endpoint is required in remote mode");
        return std::make_unique<RemoteEmbedder>(c.embedding, c.embedding_dim);
    }
    return std::make_unique<HashingEmbedder>(c.embedding_dim, c.embedding_seed);
}

BackendSet make_backends(const AppConfig& c) {
    BackendSet set;
    if (c.backend_mode == "scripted") {
        if (c.fixtures.empty()) throw ConfigError("[backend] fixtures is required in scripted mode");
        try {
            set.agent = std::make_unique<ScriptedAgent>(ScriptedAgent::from_file(c.fixtures.string()));
        } catch (const ParseError& e) {
            throw ConfigError("fixtures " + c.fixtures.string() + ": " + e.what());
        }
    } else {
        if (c.chat.endpoint.empty()) throw ConfigError("[backend] endpoint is required in remote mode");
        if (c.chat.model.empty()) throw ConfigError("[backend] model is required in remote mode");
        set.agent = std::make_unique<RemoteAgent>(c.chat, c.prompts);
    }
    set.embedder = make_embedder(c);
    set.sandbox = std::make_unique<ProcessSandbox>(c.sandbox);
    return set;
}

}  // namespace ier
