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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "ier/remote.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ier/errors.hpp"

namespace ier {

std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

JsonHttpClient::JsonHttpClient(RemoteSettings settings)
    : settings_(std::move(settings)),
      in_flight_(static_cast<std::ptrdiff_t>(
          std::max<std::size_t>(1, std::min<std::size_t>(settings_.max_in_flight, 1024)))) {
    std::tie(origin_, path_) = split_url(settings_.endpoint);
}

JsonHttpClient::~JsonHttpClient() = default;

nlohmann::json JsonHttpClient::post(const nlohmann::json& body) {
    httplib::Headers headers;
    if (!settings_.token_env.empty()) {
        if (const char* token = std::getenv(settings_.token_env.c_str()); token != nullptr && *token != '\0')
            headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    const auto payload = body.dump();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(settings_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(settings_.timeout - secs);

    auto backoff = settings_.backoff;
    std::string last_error;
    std::string last_body;
    std::optional<int> last_status;
    for (int attempt = 0; attempt <= settings_.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        httplib::Result res;
        {
            in_flight_.acquire();
            httplib::Client client(origin_);
            client.set_connection_timeout(secs.count(), usecs.count());
            client.set_read_timeout(secs.count(), usecs.count());
            client.set_write_timeout(secs.count(), usecs.count());
            res = client.Post(path_, headers, payload, "application/json");
            in_flight_.release();
        }
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            last_body.clear();
            last_status.reset();
            continue;
        }
        last_status = res->status;
        last_body = res->body;
        if (res->status >= 200 && res->status < 300) {
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception&) {
                throw BackendError("malformed JSON response", res->body, res->status);
            }
        }
        last_error = "HTTP " + std::to_string(res->status);
        if (res->status != 429 && res->status < 500) break;
    }
    throw BackendError("remote call to " + origin_ + path_ + " failed: " + last_error, last_body, last_status);
}

}  // namespace ier
