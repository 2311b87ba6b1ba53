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

#include "ier/embedder.hpp"

#include <cctype>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ier/errors.hpp"

namespace ier {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c == '_'; }

bool is_blank(std::string_view text) {
    for (unsigned char c : text)
        if (std::isspace(c) == 0) return false;
    return true;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("dimension mismatch in dot product");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

void normalize(Embedding& v) {
    const double n = std::sqrt(dot(v, v));
    if (n == 0.0 || !std::isfinite(n)) throw InvalidArgument("cannot normalize a zero vector");
    for (auto& x : v) x /= n;
}

HashingEmbedder::HashingEmbedder(std::size_t dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {
    if (dimension_ == 0) throw InvalidArgument("embedding dimension must be positive");
}

std::vector<std::string> HashingEmbedder::tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string word;
    for (unsigned char c : text) {
        if (is_word_char(c)) {
            word.push_back(static_cast<char>(std::tolower(c)));
            continue;
        }
        if (!word.empty()) tokens.push_back(std::move(word));
        word.clear();
        if (std::isspace(c) == 0) tokens.emplace_back(1, static_cast<char>(c));
    }
    if (!word.empty()) tokens.push_back(std::move(word));
    return tokens;
}

std::size_t HashingEmbedder::bucket_of(std::string_view token) const {
    std::uint64_t h = kFnvOffset ^ splitmix64(seed_);
    for (unsigned char c : token) {
        h ^= c;
        h *= kFnvPrime;
    }
    return static_cast<std::size_t>(splitmix64(h) % dimension_);
}

Embedding HashingEmbedder::embed(std::string_view text) {
    if (is_blank(text)) throw InvalidArgument("cannot embed blank text");
    Embedding v(dimension_, 0.0);
    for (const auto& tok : tokenize(text)) v[bucket_of(tok)] += 1.0;
    normalize(v);
    return v;
}

RemoteEmbedder::RemoteEmbedder(RemoteSettings settings, std::size_t dimension)
    : client_(std::make_unique<JsonHttpClient>(settings)), model_(settings.model), dimension_(dimension) {}

RemoteEmbedder::~RemoteEmbedder() = default;

Embedding RemoteEmbedder::embed(std::string_view text) {
    if (is_blank(text)) throw InvalidArgument("cannot embed blank text");
    std::string key(text);
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const auto reply = client_->post({{"model", model_}, {"input", key}});
    Embedding v;
    try {
        v = reply.at("data").at(0).at("embedding").get<Embedding>();
    } catch (const nlohmann::json::exception&) {
        throw BackendError("embedding response lacks data[0].embedding", reply.dump());
    }
    if (v.size() != dimension_)
        throw BackendError("embedding dimension " + std::to_string(v.size()) + " != configured " +
                               std::to_string(dimension_),
                           reply.dump());
    try {
        normalize(v);
    } catch (const InvalidArgument&) {
        throw BackendError("embedding service returned a zero vector", reply.dump());
    }
    std::lock_guard lock(cache_mutex_);
    return cache_.emplace(std::move(key), std::move(v)).first->second;
}

}  // namespace ier
