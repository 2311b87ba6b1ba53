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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ier/embedder.hpp"

namespace ier {

// S2I: solution text -> instruction (instructive agent's knowledge).
// I2S: instruction -> solution text (responsive agent's knowledge).
enum class RecordKind { S2I, I2S };

std::string_view to_string(RecordKind kind);
RecordKind record_kind_from_string(std::string_view name);

struct ExperienceRecord {
    std::string id;
    RecordKind kind = RecordKind::S2I;
    std::string key_text;
    std::string value_text;
    Embedding key_embedding;
    std::optional<double> gain;  // unset until the shortcut is scored
    std::uint64_t freq = 0;
    std::size_t origin_batch = 0;
    std::string origin_task;
    std::uint64_t created_ord = 0;

    bool operator==(const ExperienceRecord&) const = default;
};

// Content digest of (kind, key_text, value_text).
std::string record_id(RecordKind kind, std::string_view key_text, std::string_view value_text);

struct RetrievalHit {
    ExperienceRecord record;  // freq reflects this retrieval
    double similarity = 0.0;
};

// Two keyed sub-pools with exact cosine search.
//
// retrieve() may run concurrently with other retrieve() calls; usage counters
// are atomic. ingest() and the mutating helpers need exclusive access.
class ExperiencePool {
  public:
    explicit ExperiencePool(std::size_t dimension = 256);
    ExperiencePool(const ExperiencePool& other);
    ExperiencePool& operator=(const ExperiencePool& other);
    ExperiencePool(ExperiencePool&&) noexcept;
    ExperiencePool& operator=(ExperiencePool&&) noexcept;
    ~ExperiencePool();

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const;
    std::size_t size(RecordKind kind) const;
    bool empty() const { return size() == 0; }
    bool contains(std::string_view id) const;

    // Adds records whose id is new; known ids are skipped. Returns the number added.
    // Every record is validated first, so a dimension mismatch leaves the pool unchanged.
    std::size_t ingest(std::span<const ExperienceRecord> records);

    // Top-k by descending cosine similarity, ties by ascending created_ord then id.
    // Each returned record's freq is incremented once.
    std::vector<RetrievalHit> retrieve(RecordKind kind, std::span<const double> query, std::size_t k);
    std::vector<RetrievalHit> retrieve(RecordKind kind, std::string_view query_text, std::size_t k,
                                       Embedder& embedder);

    // Snapshot of all records sorted by created_ord, then id.
    std::vector<ExperienceRecord> records() const;
    std::vector<std::string> ids() const;
    std::optional<ExperienceRecord> find(std::string_view id) const;

    // Records whose origin batch matches.
    std::vector<std::string> ids_from_batch(std::size_t batch) const;
    std::set<std::size_t> origin_batches() const;

    // Total number of records returned by retrieve() since construction (or load).
    std::uint64_t retrieval_events() const;

    // Zeroes every usage counter (used when a stored pool becomes active for a new batch).
    void reset_frequencies();
    void set_frequency(std::string_view id, std::uint64_t freq);

  private:
    struct Slot;

    std::size_t dimension_;
    mutable std::shared_mutex mutex_;
    std::vector<std::unique_ptr<Slot>> slots_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::map<RecordKind, std::vector<std::size_t>> by_kind_;
    std::map<std::size_t, std::vector<std::size_t>> by_batch_;
};

// Fraction of records with freq > 0. Throws UndefinedMetric on an empty pool.
double hit_ratio(const ExperiencePool& pool);

// Set union by id; a duplicated id keeps the record with the lowest created_ord
// and the maximum freq across inputs. Throws InvalidArgument on mixed dimensions.
ExperiencePool merge(std::span<const ExperiencePool* const> pools);
ExperiencePool merge(std::initializer_list<const ExperiencePool*> pools);

// Pool file: a header line {"format":"ier-pool","version":1,"dim":D} followed by
// one record per line in created_ord order.
void save_pool(const ExperiencePool& pool, const std::string& path);
std::string serialize_pool(const ExperiencePool& pool);
ExperiencePool load_pool(const std::string& path);
ExperiencePool parse_pool(std::string_view text);

}  // namespace ier
