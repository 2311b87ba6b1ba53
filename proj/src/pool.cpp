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

#include "ier/pool.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <nlohmann/json.hpp>

#include "ier/errors.hpp"
#include "ier/jsonl.hpp"

namespace ier {

namespace {

constexpr double kUnitTolerance = 1e-6;
constexpr int kFormatVersion = 1;

bool rank_before(double sim_a, const ExperienceRecord& a, double sim_b, const ExperienceRecord& b) {
    if (sim_a != sim_b) return sim_a > sim_b;
    if (a.created_ord != b.created_ord) return a.created_ord < b.created_ord;
    return a.id < b.id;
}

bool canonical_before(const ExperienceRecord& a, const ExperienceRecord& b) {
    if (a.created_ord != b.created_ord) return a.created_ord < b.created_ord;
    return a.id < b.id;
}

}  // namespace

struct ExperiencePool::Slot {
    ExperienceRecord record;  // record.freq is stale; `freq` is authoritative
    std::atomic<std::uint64_t> freq{0};

    ExperienceRecord snapshot() const {
        auto r = record;
        r.freq = freq.load(std::memory_order_relaxed);
        return r;
    }
};

std::string_view to_string(RecordKind kind) { return kind == RecordKind::S2I ? "S2I" : "I2S"; }

RecordKind record_kind_from_string(std::string_view name) {
    if (name == "S2I") return RecordKind::S2I;
    if (name == "I2S") return RecordKind::I2S;
    throw InvalidArgument("unknown record kind '" + std::string(name) + "'");
}

std::string record_id(RecordKind kind, std::string_view key_text, std::string_view value_text) {
    // Length-prefixed so that no two (key, value) splits collide.
    std::string buf(to_string(kind));
    buf += '\n' + std::to_string(key_text.size()) + '\n';
    buf += key_text;
    buf += '\n' + std::to_string(value_text.size()) + '\n';
    buf += value_text;
    return sha256_hex(buf).substr(0, 32);
}

ExperiencePool::ExperiencePool(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw InvalidArgument("pool dimension must be positive");
}

ExperiencePool::ExperiencePool(const ExperiencePool& other) : dimension_(other.dimension_) {
    std::shared_lock lock(other.mutex_);
    for (const auto& s : other.slots_) {
        auto copy = std::make_unique<Slot>();
        copy->record = s->record;
        copy->freq.store(s->freq.load());
        slots_.push_back(std::move(copy));
    }
    by_id_ = other.by_id_;
    by_kind_ = other.by_kind_;
    by_batch_ = other.by_batch_;
}

ExperiencePool& ExperiencePool::operator=(const ExperiencePool& other) {
    if (this != &other) {
        ExperiencePool tmp(other);
        *this = std::move(tmp);
    }
    return *this;
}

ExperiencePool::ExperiencePool(ExperiencePool&& other) noexcept
    : dimension_(other.dimension_),
      slots_(std::move(other.slots_)),
      by_id_(std::move(other.by_id_)),
      by_kind_(std::move(other.by_kind_)),
      by_batch_(std::move(other.by_batch_)) {}

ExperiencePool& ExperiencePool::operator=(ExperiencePool&& other) noexcept {
    dimension_ = other.dimension_;
    slots_ = std::move(other.slots_);
    by_id_ = std::move(other.by_id_);
    by_kind_ = std::move(other.by_kind_);
    by_batch_ = std::move(other.by_batch_);
    return *this;
}

ExperiencePool::~ExperiencePool() = default;

std::size_t ExperiencePool::size() const {
    std::shared_lock lock(mutex_);
    return slots_.size();
}

std::size_t ExperiencePool::size(RecordKind kind) const {
    std::shared_lock lock(mutex_);
    const auto it = by_kind_.find(kind);
    return it == by_kind_.end() ? 0 : it->second.size();
}

bool ExperiencePool::contains(std::string_view id) const {
    std::shared_lock lock(mutex_);
    return by_id_.contains(std::string(id));
}

std::size_t ExperiencePool::ingest(std::span<const ExperienceRecord> records) {
    for (const auto& r : records) {
        if (r.key_embedding.size() != dimension_)
            throw InvalidArgument("record dimension " + std::to_string(r.key_embedding.size()) +
                                  " does not match pool dimension " + std::to_string(dimension_));
        if (std::abs(std::sqrt(dot(r.key_embedding, r.key_embedding)) - 1.0) > kUnitTolerance)
            throw InvalidArgument("record " + r.id + " has a non-unit key embedding");
        if (r.id.empty()) throw InvalidArgument("record id must be set before ingest");
    }
    std::unique_lock lock(mutex_);
    std::size_t added = 0;
    for (const auto& r : records) {
        if (by_id_.contains(r.id)) continue;
        const auto index = slots_.size();
        auto slot = std::make_unique<Slot>();
        slot->record = r;
        slot->freq.store(r.freq);
        slots_.push_back(std::move(slot));
        by_id_.emplace(r.id, index);
        by_kind_[r.kind].push_back(index);
        by_batch_[r.origin_batch].push_back(index);
        ++added;
    }
    return added;
}

std::vector<RetrievalHit> ExperiencePool::retrieve(RecordKind kind, std::span<const double> query, std::size_t k) {
    if (k == 0) throw InvalidArgument("retrieval count k must be at least 1");
    if (query.size() != dimension_) throw InvalidArgument("query dimension does not match pool");

    std::shared_lock lock(mutex_);
    const auto it = by_kind_.find(kind);
    if (it == by_kind_.end() || it->second.empty()) return {};

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(it->second.size());
    for (auto index : it->second) scored.emplace_back(dot(query, slots_[index]->record.key_embedding), index);
    const auto take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                      [&](const auto& a, const auto& b) {
                          return rank_before(a.first, slots_[a.second]->record, b.first, slots_[b.second]->record);
                      });

    std::vector<RetrievalHit> hits;
    hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        auto& slot = *slots_[scored[i].second];
        const auto freq = slot.freq.fetch_add(1, std::memory_order_relaxed) + 1;
        auto rec = slot.record;
        rec.freq = freq;
        hits.push_back({std::move(rec), scored[i].first});
    }
    return hits;
}

std::vector<RetrievalHit> ExperiencePool::retrieve(RecordKind kind, std::string_view query_text, std::size_t k,
                                                   Embedder& embedder) {
    if (k == 0) throw InvalidArgument("retrieval count k must be at least 1");
    if (size(kind) == 0) return {};
    const auto q = embedder.embed(query_text);
    return retrieve(kind, q, k);
}

std::vector<ExperienceRecord> ExperiencePool::records() const {
    std::vector<ExperienceRecord> out;
    {
        std::shared_lock lock(mutex_);
        out.reserve(slots_.size());
        for (const auto& s : slots_) out.push_back(s->snapshot());
    }
    std::sort(out.begin(), out.end(), canonical_before);
    return out;
}

std::vector<std::string> ExperiencePool::ids() const {
    std::vector<std::string> out;
    for (auto& r : records()) out.push_back(std::move(r.id));
    return out;
}

std::optional<ExperienceRecord> ExperiencePool::find(std::string_view id) const {
    std::shared_lock lock(mutex_);
    const auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return slots_[it->second]->snapshot();
}

std::vector<std::string> ExperiencePool::ids_from_batch(std::size_t batch) const {
    std::vector<ExperienceRecord> recs;
    {
        std::shared_lock lock(mutex_);
        const auto it = by_batch_.find(batch);
        if (it == by_batch_.end()) return {};
        for (auto index : it->second) recs.push_back(slots_[index]->record);
    }
    std::sort(recs.begin(), recs.end(), canonical_before);
    std::vector<std::string> out;
    for (auto& r : recs) out.push_back(std::move(r.id));
    return out;
}

std::set<std::size_t> ExperiencePool::origin_batches() const {
    std::shared_lock lock(mutex_);
    std::set<std::size_t> out;
    for (const auto& [batch, indices] : by_batch_)
        if (!indices.empty()) out.insert(batch);
    return out;
}

std::uint64_t ExperiencePool::retrieval_events() const {
    std::shared_lock lock(mutex_);
    std::uint64_t total = 0;
    for (const auto& s : slots_) total += s->freq.load(std::memory_order_relaxed);
    return total;
}

void ExperiencePool::reset_frequencies() {
    std::unique_lock lock(mutex_);
    for (auto& s : slots_) s->freq.store(0);
}

void ExperiencePool::set_frequency(std::string_view id, std::uint64_t freq) {
    std::unique_lock lock(mutex_);
    const auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) throw InvalidArgument("unknown record id " + std::string(id));
    slots_[it->second]->freq.store(freq);
}

double hit_ratio(const ExperiencePool& pool) {
    const auto recs = pool.records();
    if (recs.empty()) throw UndefinedMetric("hit ratio of an empty pool is undefined");
    const auto hit = std::count_if(recs.begin(), recs.end(), [](const auto& r) { return r.freq > 0; });
    return static_cast<double>(hit) / static_cast<double>(recs.size());
}

ExperiencePool merge(std::span<const ExperiencePool* const> pools) {
    if (pools.empty()) return ExperiencePool{};
    const auto dim = pools.front()->dimension();
    std::map<std::string, ExperienceRecord> merged;
    for (const auto* p : pools) {
        if (p->dimension() != dim) throw InvalidArgument("cannot merge pools of different dimensions");
        for (auto& r : p->records()) {
            auto [it, fresh] = merged.try_emplace(r.id, r);
            if (fresh) continue;
            const auto freq = std::max(it->second.freq, r.freq);
            if (canonical_before(r, it->second)) it->second = std::move(r);
            it->second.freq = freq;
        }
    }
    std::vector<ExperienceRecord> all;
    all.reserve(merged.size());
    for (auto& [id, r] : merged) all.push_back(std::move(r));
    std::sort(all.begin(), all.end(), canonical_before);
    ExperiencePool out(dim);
    out.ingest(all);
    return out;
}

ExperiencePool merge(std::initializer_list<const ExperiencePool*> pools) {
    return merge(std::span<const ExperiencePool* const>(pools.begin(), pools.size()));
}

std::string serialize_pool(const ExperiencePool& pool) {
    const auto recs = pool.records();
    nlohmann::ordered_json header;
    header["format"] = "ier-pool";
    header["version"] = kFormatVersion;
    header["dim"] = pool.dimension();
    header["records"] = recs.size();
    std::string out = header.dump() + "\n";
    for (const auto& r : recs) {
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["kind"] = to_string(r.kind);
        j["key_text"] = r.key_text;
        j["value_text"] = r.value_text;
        j["key_embedding"] = r.key_embedding;
        j["gain"] = r.gain ? nlohmann::ordered_json(*r.gain) : nlohmann::ordered_json(nullptr);
        j["freq"] = r.freq;
        j["origin_batch"] = r.origin_batch;
        j["origin_task"] = r.origin_task;
        j["created_ord"] = r.created_ord;
        out += j.dump();
        out += '\n';
    }
    return out;
}

void save_pool(const ExperiencePool& pool, const std::string& path) { write_text_atomic(path, serialize_pool(pool)); }

ExperiencePool parse_pool(std::string_view text) {
    std::optional<ExperiencePool> pool;
    std::size_t expected = 0;
    std::vector<ExperienceRecord> recs;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        const bool terminated = nl != std::string_view::npos;
        if (!terminated) nl = text.size();
        std::string line(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            if (!pool) {
                if (j.at("format").get<std::string>() != "ier-pool") throw ParseError("not a pool file", line_no);
                if (j.at("version").get<int>() != kFormatVersion)
                    throw ParseError("unsupported pool format version", line_no);
                pool.emplace(j.at("dim").get<std::size_t>());
                expected = j.at("records").get<std::size_t>();
                continue;
            }
            if (!terminated) throw ParseError("truncated record (missing line terminator)", line_no);
            ExperienceRecord r;
            r.id = j.at("id").get<std::string>();
            r.kind = record_kind_from_string(j.at("kind").get<std::string>());
            r.key_text = j.at("key_text").get<std::string>();
            r.value_text = j.at("value_text").get<std::string>();
            r.key_embedding = j.at("key_embedding").get<Embedding>();
            if (const auto& g = j.at("gain"); !g.is_null()) r.gain = g.get<double>();
            r.freq = j.at("freq").get<std::uint64_t>();
            r.origin_batch = j.at("origin_batch").get<std::size_t>();
            r.origin_task = j.at("origin_task").get<std::string>();
            r.created_ord = j.at("created_ord").get<std::uint64_t>();
            if (r.key_embedding.size() != pool->dimension())
                throw ParseError("record embedding dimension does not match header", line_no);
            if (std::abs(std::sqrt(dot(r.key_embedding, r.key_embedding)) - 1.0) > kUnitTolerance)
                throw ParseError("record key embedding is not unit-norm", line_no);
            recs.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("malformed pool line: ") + e.what(), line_no);
        } catch (const InvalidArgument& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    if (!pool) throw ParseError("missing pool header", line_no == 0 ? 1 : line_no);
    if (recs.size() != expected)
        throw ParseError("pool header announces " + std::to_string(expected) + " records, found " +
                             std::to_string(recs.size()),
                         line_no);
    if (pool->ingest(recs) != recs.size()) throw ParseError("duplicate record ids", line_no);
    return std::move(*pool);
}

ExperiencePool load_pool(const std::string& path) {
    try {
        return parse_pool(read_text(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.message(), e.line());
    }
}

}  // namespace ier
