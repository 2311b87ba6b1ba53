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
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ier/remote.hpp"

namespace ier {

using Embedding = std::vector<double>;

// Maps text to a unit-norm vector of fixed dimension. Implementations are
// safe to call from multiple threads.
class Embedder {
  public:
    virtual ~Embedder() = default;
    virtual std::size_t dimension() const = 0;
    // Throws InvalidArgument for blank text, BackendError for service failures.
    virtual Embedding embed(std::string_view text) = 0;
};

// Dot product of two equal-length vectors.
double dot(std::span<const double> a, std::span<const double> b);

// Cosine similarity; 0 when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b);

// Scales to unit L2 norm in place. Throws InvalidArgument for the zero vector.
void normalize(Embedding& v);

// Offline embedder: tokens are runs of [A-Za-z0-9_] (lower-cased) and single
// punctuation characters; each token is hashed with a seeded FNV-1a into one of
// `dimension` buckets, counts accumulate, and the result is L2-normalized.
// All components are non-negative, so pairwise cosines lie in [0, 1].
class HashingEmbedder final : public Embedder {
  public:
    explicit HashingEmbedder(std::size_t dimension = 256, std::uint64_t seed = 0);

    std::size_t dimension() const override { return dimension_; }
    Embedding embed(std::string_view text) override;

    std::size_t bucket_of(std::string_view token) const;
    static std::vector<std::string> tokenize(std::string_view text);

  private:
    std::size_t dimension_;
    std::uint64_t seed_;
};

// OpenAI-compatible embeddings endpoint ({model, input} -> data[0].embedding).
// Responses are memoized per text for the lifetime of the object.
class RemoteEmbedder final : public Embedder {
  public:
    RemoteEmbedder(RemoteSettings settings, std::size_t dimension);
    ~RemoteEmbedder() override;

    std::size_t dimension() const override { return dimension_; }
    Embedding embed(std::string_view text) override;

  private:
    std::unique_ptr<JsonHttpClient> client_;
    std::string model_;
    std::size_t dimension_;
    std::mutex cache_mutex_;
    std::unordered_map<std::string, Embedding> cache_;
};

}  // namespace ier
