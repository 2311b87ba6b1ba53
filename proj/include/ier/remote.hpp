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
#include <memory>
#include <semaphore>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace ier {

struct RemoteSettings {
    std::string endpoint;  // full URL, e.g. https://api.openai.com/v1/chat/completions
    std::string model;
    std::string token_env = "OPENAI_API_KEY";  // name of the variable, never the token itself
    std::chrono::milliseconds timeout{60000};
    int retries = 3;
    std::chrono::milliseconds backoff{500};  // doubled after every failed attempt
    std::size_t max_in_flight = 4;
    double temperature = 0.2;
};

// POSTs JSON bodies with bearer auth, bounded concurrency and retry with
// exponential backoff. 429, 5xx and transport failures are retried; other
// statuses fail immediately. Errors are BackendError with status and body.
class JsonHttpClient {
  public:
    explicit JsonHttpClient(RemoteSettings settings);
    ~JsonHttpClient();
    JsonHttpClient(const JsonHttpClient&) = delete;
    JsonHttpClient& operator=(const JsonHttpClient&) = delete;

    nlohmann::json post(const nlohmann::json& body);

    const RemoteSettings& settings() const noexcept { return settings_; }

  private:
    RemoteSettings settings_;
    std::string origin_;
    std::string path_;
    std::counting_semaphore<1024> in_flight_;
};

// Splits "scheme://host[:port]/path" into origin and path ("/" when absent).
// Throws ConfigError on a URL without scheme.
std::pair<std::string, std::string> split_url(const std::string& url);

}  // namespace ier
