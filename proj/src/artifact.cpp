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

#include "ier/artifact.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "ier/errors.hpp"

namespace ier {

namespace {

std::vector<const SourceFile*> by_path(const Artifact& artifact) {
    std::vector<const SourceFile*> order;
    order.reserve(artifact.files.size());
    for (const auto& f : artifact.files) order.push_back(&f);
    std::stable_sort(order.begin(), order.end(),
                     [](const SourceFile* a, const SourceFile* b) { return a->path < b->path; });
    return order;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool is_fence(std::string_view line) { return trim(line).starts_with("```"); }

std::string clean_header(std::string_view line) {
    auto s = trim(line);
    while (!s.empty() && (s.front() == '#' || s.front() == '*' || s.front() == '`' || s.front() == ' '))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == '*' || s.back() == '`' || s.back() == ' ' || s.back() == ':'))
        s.remove_suffix(1);
    return std::string(s);
}

}  // namespace

std::string flatten(const Artifact& artifact) {
    std::string out;
    for (const auto* f : by_path(artifact)) {
        out += "### ";
        out += f->path;
        out += '\n';
        out += f->content;
        if (!f->content.empty() && f->content.back() != '\n') out += '\n';
    }
    return out;
}

bool contains_token(const Artifact& artifact, std::string_view token) {
    return std::any_of(artifact.files.begin(), artifact.files.end(), [&](const SourceFile& f) {
        return f.content.find(token) != std::string::npos;
    });
}

Artifact parse_fenced_reply(std::string_view reply) {
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos <= reply.size();) {
        const auto nl = reply.find('\n', pos);
        if (nl == std::string_view::npos) {
            if (pos < reply.size()) lines.push_back(reply.substr(pos));
            break;
        }
        lines.push_back(reply.substr(pos, nl - pos));
        pos = nl + 1;
    }

    Artifact artifact;
    std::string last_text_line;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!is_fence(lines[i])) {
            if (!trim(lines[i]).empty()) last_text_line = std::string(lines[i]);
            continue;
        }
        auto path = clean_header(last_text_line);
        if (path.empty() || path.find(' ') != std::string::npos)
            throw BackendError("malformed reply: code block without a file path line", std::string(reply));

        std::string body;
        std::size_t j = i + 1;
        for (; j < lines.size() && !is_fence(lines[j]); ++j) {
            body.append(lines[j]);
            body.push_back('\n');
        }
        if (j == lines.size())
            throw BackendError("malformed reply: unterminated code block for " + path, std::string(reply));

        auto existing = std::find_if(artifact.files.begin(), artifact.files.end(),
                                     [&](const SourceFile& f) { return f.path == path; });
        if (existing != artifact.files.end())
            existing->content = std::move(body);
        else
            artifact.files.push_back({std::move(path), std::move(body)});
        last_text_line.clear();
        i = j;
    }
    if (artifact.files.empty())
        throw BackendError("malformed reply: no file blocks found", std::string(reply));
    return artifact;
}

std::string render_fenced(const Artifact& artifact) {
    std::string out;
    for (const auto& f : artifact.files) {
        out += f.path;
        out += "\n```\n";
        out += f.content;
        if (!f.content.empty() && f.content.back() != '\n') out += '\n';
        out += "```\n\n";
    }
    return out;
}

void to_json(nlohmann::json& j, const SourceFile& f) { j = {{"path", f.path}, {"content", f.content}}; }

void from_json(const nlohmann::json& j, SourceFile& f) {
    j.at("path").get_to(f.path);
    j.at("content").get_to(f.content);
}

void to_json(nlohmann::json& j, const Artifact& a) { j = a.files; }

void from_json(const nlohmann::json& j, Artifact& a) { j.get_to(a.files); }

}  // namespace ier
