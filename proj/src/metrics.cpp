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

#include "ier/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ier/errors.hpp"

namespace ier {

namespace {

void require_nonempty(std::size_t n, const char* metric) {
    if (n == 0) throw UndefinedMetric(std::string(metric) + " of an empty corpus is undefined");
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

nlohmann::json accounting_json(const EliminationAccounting& a) {
    nlohmann::json j = {{"gain_input", a.gain_input},
                        {"gain_retained", a.gain_retained},
                        {"frequency_input", a.frequency_input},
                        {"frequency_retained", a.frequency_retained},
                        {"frequency_all_zero", a.frequency_all_zero},
                        {"original", a.original},
                        {"retained", a.retained}};
    j["retained_fraction"] = a.original == 0 ? nlohmann::json(nullptr) : nlohmann::json(a.retained_fraction());
    return j;
}

EliminationAccounting accounting_from_json(const nlohmann::json& j) {
    EliminationAccounting a;
    a.gain_input = j.at("gain_input").get<std::size_t>();
    a.gain_retained = j.at("gain_retained").get<std::size_t>();
    a.frequency_input = j.at("frequency_input").get<std::size_t>();
    a.frequency_retained = j.at("frequency_retained").get<std::size_t>();
    a.frequency_all_zero = j.at("frequency_all_zero").get<bool>();
    a.original = j.at("original").get<std::size_t>();
    a.retained = j.at("retained").get<std::size_t>();
    return a;
}

}  // namespace

double completeness(std::span<const FinalArtifact> corpus) {
    require_nonempty(corpus.size(), "completeness");
    const auto complete = std::count_if(corpus.begin(), corpus.end(),
                                        [](const FinalArtifact& f) { return !contains_token(f.artifact, "TODO"); });
    return static_cast<double>(complete) / static_cast<double>(corpus.size());
}

double executability(std::span<const FinalArtifact> corpus, Sandbox& sandbox) {
    require_nonempty(corpus.size(), "executability");
    std::size_t ok = 0;
    for (const auto& f : corpus) {
        if (f.artifact.empty()) continue;
        const auto outcome = sandbox.compile_and_run(f.artifact);
        if (outcome.compiled && outcome.executed) ++ok;
    }
    return static_cast<double>(ok) / static_cast<double>(corpus.size());
}

double consistency(std::span<const FinalArtifact> corpus, Embedder& embedder) {
    require_nonempty(corpus.size(), "consistency");
    double sum = 0.0;
    for (const auto& f : corpus) {
        if (f.artifact.empty()) continue;
        const auto req = embedder.embed(f.requirement);
        const auto code = embedder.embed(flatten(f.artifact));
        sum += std::clamp(cosine(req, code), 0.0, 1.0);
    }
    return sum / static_cast<double>(corpus.size());
}

double quality(double alpha, double beta, double gamma) {
    for (double v : {alpha, beta, gamma})
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("quality inputs must lie in [0, 1]");
    return alpha * beta * gamma;
}

PhaseRounds phase_rounds(const ExecutionChain& chain) {
    PhaseRounds r;
    for (const auto& e : chain.edges()) {
        if (e.phase == "coding")
            ++r.coding;
        else if (e.phase == "review")
            ++r.review;
        else if (e.phase == "test")
            ++r.test;
    }
    return r;
}

PhaseEfficiency phase_efficiency(std::size_t actual_review, std::size_t actual_test, std::size_t max_review,
                                 std::size_t max_test) {
    if (actual_review > max_review || actual_test > max_test)
        throw InvalidArgument("actual rounds exceed the configured maximum");
    auto ratio = [](std::size_t actual, std::size_t max) {
        return max == 0 ? 0.0 : static_cast<double>(max - actual) / static_cast<double>(max);
    };
    return {ratio(actual_review, max_review), ratio(actual_test, max_test),
            ratio(actual_review + actual_test, max_review + max_test)};
}

PhaseEfficiency phase_efficiency(const ExecutionChain& chain, std::size_t max_review, std::size_t max_test) {
    const auto r = phase_rounds(chain);
    return phase_efficiency(r.review, r.test, max_review, max_test);
}

MetricBundle compute_bundle(std::span<const ExecutionChain> chains, std::span<const double> durations_seconds,
                            Sandbox& sandbox, Embedder& embedder, std::size_t max_review, std::size_t max_test) {
    MetricBundle b;
    b.tasks = chains.size();
    if (chains.empty()) return b;

    std::vector<FinalArtifact> corpus;
    corpus.reserve(chains.size());
    for (const auto& c : chains) {
        corpus.push_back({c.task_text(), c.terminal().artifact});
        if (c.error()) ++b.failed_tasks;
        const auto rounds = phase_rounds(c);
        b.mean_coding_rounds += static_cast<double>(rounds.coding);
        b.mean_review_rounds += static_cast<double>(rounds.review);
        b.mean_test_rounds += static_cast<double>(rounds.test);
        const auto eff = phase_efficiency(std::min(rounds.review, max_review), std::min(rounds.test, max_test),
                                          max_review, max_test);
        b.efficiency.review += eff.review;
        b.efficiency.test += eff.test;
        b.efficiency.overall += eff.overall;
    }
    const auto n = static_cast<double>(chains.size());
    b.mean_coding_rounds /= n;
    b.mean_review_rounds /= n;
    b.mean_test_rounds /= n;
    b.efficiency.review /= n;
    b.efficiency.test /= n;
    b.efficiency.overall /= n;

    b.completeness = completeness(corpus);
    b.executability = executability(corpus, sandbox);
    b.consistency = consistency(corpus, embedder);
    b.quality = quality(b.completeness, b.executability, b.consistency);
    if (!durations_seconds.empty())
        b.mean_duration_seconds = std::accumulate(durations_seconds.begin(), durations_seconds.end(), 0.0) /
                                  static_cast<double>(durations_seconds.size());
    return b;
}

UtilizationMatrix utilization_matrix(std::span<const std::map<std::size_t, std::uint64_t>> hits) {
    UtilizationMatrix m;
    m.batches = hits.size();
    m.rows.assign(m.batches, std::vector<double>(m.batches, 0.0));
    for (std::size_t i = 0; i < hits.size(); ++i) {
        std::uint64_t total = 0;
        for (const auto& [origin, count] : hits[i]) {
            if (origin == 0 || origin > m.batches)
                throw InvalidArgument("hit origin batch " + std::to_string(origin) + " out of range");
            total += count;
        }
        if (total == 0) continue;
        for (const auto& [origin, count] : hits[i])
            m.rows[i][origin - 1] = static_cast<double>(count) / static_cast<double>(total);
    }
    return m;
}

std::string utilization_csv(const UtilizationMatrix& matrix) {
    std::string out = "consuming_batch";
    for (std::size_t j = 1; j <= matrix.batches; ++j) out += ",from_batch_" + std::to_string(j);
    out += '\n';
    for (std::size_t i = 0; i < matrix.batches; ++i) {
        out += std::to_string(i + 1);
        for (double v : matrix.rows[i]) out += "," + fixed(v, 6);
        out += '\n';
    }
    return out;
}

nlohmann::json to_json(const BatchSummary& s) {
    const auto& m = s.metrics;
    nlohmann::json metrics = {{"tasks", m.tasks},
                              {"failed_tasks", m.failed_tasks},
                              {"completeness", m.completeness},
                              {"executability", m.executability},
                              {"consistency", m.consistency},
                              {"quality", m.quality},
                              {"mean_duration_seconds", m.mean_duration_seconds},
                              {"mean_coding_rounds", m.mean_coding_rounds},
                              {"mean_review_rounds", m.mean_review_rounds},
                              {"mean_test_rounds", m.mean_test_rounds},
                              {"review_efficiency", m.efficiency.review},
                              {"test_efficiency", m.efficiency.test},
                              {"overall_efficiency", m.efficiency.overall}};
    nlohmann::json hits = nlohmann::json::object();
    for (const auto& [origin, count] : s.hits_by_origin) hits[std::to_string(origin)] = count;
    nlohmann::json j = {{"batch", s.batch},
                        {"active_pool_size", s.active_pool_size},
                        {"active_origins", s.active_origins},
                        {"acquired_records", s.acquired_records},
                        {"acquired_shortcuts", s.acquired_shortcuts},
                        {"retrieval_events", s.retrieval_events},
                        {"hits_by_origin", std::move(hits)},
                        {"metrics", std::move(metrics)}};
    j["hit_ratio"] = s.hit_ratio ? nlohmann::json(*s.hit_ratio) : nlohmann::json(nullptr);
    if (s.elimination) {
        j["elimination"] = accounting_json(*s.elimination);
        j["acquired_to_date"] = s.acquired_to_date;
        j["retained_to_date"] = s.retained_to_date;
    }
    return j;
}

BatchSummary batch_summary_from_json(const nlohmann::json& j) {
    BatchSummary s;
    s.batch = j.at("batch").get<std::size_t>();
    s.active_pool_size = j.at("active_pool_size").get<std::size_t>();
    s.active_origins = j.at("active_origins").get<std::vector<std::size_t>>();
    s.acquired_records = j.at("acquired_records").get<std::size_t>();
    s.acquired_shortcuts = j.at("acquired_shortcuts").get<std::size_t>();
    s.retrieval_events = j.at("retrieval_events").get<std::uint64_t>();
    for (const auto& [origin, count] : j.at("hits_by_origin").items())
        s.hits_by_origin[std::stoul(origin)] = count.get<std::uint64_t>();
    if (const auto& h = j.at("hit_ratio"); !h.is_null()) s.hit_ratio = h.get<double>();
    const auto& m = j.at("metrics");
    auto& b = s.metrics;
    b.tasks = m.at("tasks").get<std::size_t>();
    b.failed_tasks = m.at("failed_tasks").get<std::size_t>();
    b.completeness = m.at("completeness").get<double>();
    b.executability = m.at("executability").get<double>();
    b.consistency = m.at("consistency").get<double>();
    b.quality = m.at("quality").get<double>();
    b.mean_duration_seconds = m.at("mean_duration_seconds").get<double>();
    b.mean_coding_rounds = m.at("mean_coding_rounds").get<double>();
    b.mean_review_rounds = m.at("mean_review_rounds").get<double>();
    b.mean_test_rounds = m.at("mean_test_rounds").get<double>();
    b.efficiency.review = m.at("review_efficiency").get<double>();
    b.efficiency.test = m.at("test_efficiency").get<double>();
    b.efficiency.overall = m.at("overall_efficiency").get<double>();
    if (auto it = j.find("elimination"); it != j.end()) {
        s.elimination = accounting_from_json(*it);
        s.acquired_to_date = j.at("acquired_to_date").get<std::size_t>();
        s.retained_to_date = j.at("retained_to_date").get<std::size_t>();
    }
    return s;
}

RunReport build_report(std::string run_id, std::string pattern, std::size_t expected_batches,
                       std::vector<BatchSummary> batches) {
    RunReport r;
    r.run_id = std::move(run_id);
    r.pattern = std::move(pattern);
    r.expected_batches = expected_batches;
    std::sort(batches.begin(), batches.end(), [](const auto& a, const auto& b) { return a.batch < b.batch; });
    for (std::size_t i = 1; i <= expected_batches; ++i) {
        if (std::none_of(batches.begin(), batches.end(), [&](const auto& b) { return b.batch == i; }))
            r.missing.push_back(i);
    }
    r.batches = std::move(batches);
    if (!r.batches.empty() && r.batches.back().elimination) {
        EliminationAccounting total;
        total.original = r.batches.back().acquired_to_date;
        total.retained = r.batches.back().retained_to_date;
        r.run_elimination = total;
    }
    return r;
}

UtilizationMatrix report_utilization(const RunReport& report) {
    std::vector<std::map<std::size_t, std::uint64_t>> hits(report.expected_batches);
    for (const auto& b : report.batches)
        if (b.batch >= 1 && b.batch <= hits.size()) hits[b.batch - 1] = b.hits_by_origin;
    return utilization_matrix(hits);
}

nlohmann::json report_json(const RunReport& report) {
    auto batches = nlohmann::json::array();
    // Report views show a batch without retrievals (empty active pool) as hit ratio 0.
    for (const auto& b : report.batches) {
        auto j = to_json(b);
        if (j["hit_ratio"].is_null()) j["hit_ratio"] = 0.0;
        batches.push_back(std::move(j));
    }
    const auto matrix = report_utilization(report);
    nlohmann::json j = {{"run_id", report.run_id},
                        {"pattern", report.pattern},
                        {"expected_batches", report.expected_batches},
                        {"complete", report.missing.empty()},
                        {"missing_batches", report.missing},
                        {"batches", std::move(batches)},
                        {"utilization_matrix", matrix.rows}};
    if (report.run_elimination) {
        const auto& e = *report.run_elimination;
        j["elimination_total"] = {{"original", e.original}, {"retained", e.retained}};
        j["elimination_total"]["retained_fraction"] =
            e.original == 0 ? nlohmann::json(nullptr) : nlohmann::json(e.retained_fraction());
    }
    return j;
}

std::string report_text(const RunReport& report) {
    std::ostringstream out;
    out << "run " << report.run_id << " (" << report.pattern << "), " << report.batches.size() << "/"
        << report.expected_batches << " batches\n\n";
    out << std::left << std::setw(6) << "batch" << std::right << std::setw(7) << "tasks" << std::setw(8) << "pool"
        << std::setw(9) << "acquired" << std::setw(10) << "hit_ratio" << std::setw(8) << "alpha" << std::setw(8)
        << "beta" << std::setw(8) << "gamma" << std::setw(9) << "quality" << std::setw(9) << "rev_eff" << std::setw(9)
        << "test_eff" << std::setw(9) << "all_eff" << std::setw(10) << "duration" << '\n';
    for (const auto& b : report.batches) {
        const auto& m = b.metrics;
        out << std::left << std::setw(6) << b.batch << std::right << std::setw(7) << m.tasks << std::setw(8)
            << b.active_pool_size << std::setw(9) << b.acquired_records << std::setw(10)
            << fixed(b.hit_ratio.value_or(0.0)) << std::setw(8) << fixed(m.completeness)
            << std::setw(8) << fixed(m.executability) << std::setw(8) << fixed(m.consistency) << std::setw(9)
            << fixed(m.quality) << std::setw(9) << fixed(m.efficiency.review) << std::setw(9)
            << fixed(m.efficiency.test) << std::setw(9) << fixed(m.efficiency.overall) << std::setw(10)
            << fixed(m.mean_duration_seconds, 2) << '\n';
    }
    for (auto i : report.missing) out << std::left << std::setw(6) << i << "  missing (no checkpoint)\n";

    bool any_elimination = false;
    for (const auto& b : report.batches) {
        if (!b.elimination) continue;
        if (!any_elimination) out << "\nelimination\n";
        any_elimination = true;
        const auto& e = *b.elimination;
        out << "  batch " << b.batch << ": gain " << e.gain_retained << "/" << e.gain_input << ", frequency "
            << e.frequency_retained << "/" << e.frequency_input << ", retained " << e.retained << "/" << e.original;
        if (e.original > 0) out << " = " << fixed(e.retained_fraction(), 6);
        out << '\n';
    }
    if (report.run_elimination && report.run_elimination->original > 0) {
        const auto& e = *report.run_elimination;
        out << "  total: retained " << e.retained << "/" << e.original << " = " << fixed(e.retained_fraction(), 6)
            << " (" << fixed(100.0 * e.retained_fraction(), 2) << "%)\n";
    }

    const auto matrix = report_utilization(report);
    out << "\nutilization (row: consuming batch, column: producing batch)\n      ";
    for (std::size_t j = 1; j <= matrix.batches; ++j) out << std::setw(8) << j;
    out << '\n';
    for (std::size_t i = 0; i < matrix.batches; ++i) {
        out << std::left << std::setw(6) << (i + 1) << std::right;
        for (double v : matrix.rows[i]) out << std::setw(8) << fixed(v);
        out << '\n';
    }
    return out.str();
}

}  // namespace ier
