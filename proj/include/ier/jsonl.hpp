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
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace ier {

// Writes `lines` joined by LF (with a trailing LF) to a sibling temp file, then renames it over `path`.
void write_lines_atomic(const std::string& path, const std::vector<std::string>& lines);
void write_text_atomic(const std::string& path, std::string_view text);

// Calls `fn(line, line_no)` for each non-blank line; line numbers are 1-based.
// Throws ParseError(line 0) when the file cannot be opened.
void for_each_line(const std::string& path, const std::function<void(const std::string&, std::size_t)>& fn);

std::string read_text(const std::string& path);

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace ier
