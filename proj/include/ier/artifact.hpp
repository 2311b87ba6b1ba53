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

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ier {

struct SourceFile {
    std::string path;
    std::string content;

    bool operator==(const SourceFile&) const = default;
};

// Multi-file program text. File order is preserved as produced; every derived
// text (flattening, digests) iterates files sorted by path.
struct Artifact {
    std::vector<SourceFile> files;

    bool empty() const noexcept { return files.empty(); }
    bool operator==(const Artifact&) const = default;
};

// Concatenates files in path order, each preceded by a "### <path>" header line.
// This is the text fed to embedders and used as experience keys/values.
std::string flatten(const Artifact& artifact);

// True when any file contains `token` (case-sensitive substring).
bool contains_token(const Artifact& artifact, std::string_view token);

// Parses an agent reply written in the fenced-block convention:
//
//     main.py
//     ```python
//     print("hi")
//     ```
//
// The non-blank line right before an opening fence names the file. Leading '#',
// '*', '`' and whitespace are stripped from that line. Throws BackendError when
// no block is found, a fence is left open, or a block has no path.
Artifact parse_fenced_reply(std::string_view reply);

// Inverse of parse_fenced_reply for well-formed artifacts.
std::string render_fenced(const Artifact& artifact);

void to_json(nlohmann::json& j, const SourceFile& f);
void from_json(const nlohmann::json& j, SourceFile& f);
void to_json(nlohmann::json& j, const Artifact& a);
void from_json(const nlohmann::json& j, Artifact& a);

}  // namespace ier
