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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ier/artifact.hpp"
#include "ier/chain.hpp"
#include "ier/elimination.hpp"
#include "ier/embedder.hpp"
#include "ier/sandbox.hpp"

namespace ier {

// Final program of one task, paired with its requirement.
struct FinalArtifact {
    std::string requirement;
    Artifact artifact;
};

// Share of artifacts in which no file contains "TODO". Throws UndefinedMetric on an empty corpus.
double completeness(std::span<const FinalArtifact> corpus);

// Share of artifacts that both compile and run cleanly. Empty artifacts fail.
double executability(std::span<const FinalArtifact> corpus, Sandbox& sandbox);

// Mean cosine similarity between requirement and flattened artifact, clamped
// to [0, 1]. An empty artifact contributes 0.
double consistency(std::span<const FinalArtifact> corpus, Embedder& embedder);

// alpha * beta * gamma. Throws InvalidArgument when an input is outside [0, 1].
double quality(double alpha, double beta, double gamma);

struct PhaseRounds {
    std::size_t coding = 0;
    std::size_t review = 0;
    std::size_t test = 0;
};

// Rounds are counted from the phase tags on the chain's edges.
PhaseRounds phase_rounds(const ExecutionChain& chain);

struct PhaseEfficiency {
    double review = 0.0;
    double test = 0.0;
    double overall = 0.0;
};

// (max - actual) / max per phase, 0 when the cap is 0. Overall uses the summed
// review and test caps.
PhaseEfficiency phase_efficiency(std::size_t actual_review, std::size_t actual_test, std::size_t max_review,
                                 std::size_t max_test);
PhaseEfficiency phase_efficiency(const ExecutionChain& chain, std::size_t max_review, std::size_t max_test);

struct MetricBundle {
    std::size_t tasks = 0;
    std::size_t failed_tasks = 0;
    double completeness = 0.0;
    double executability = 0.0;
    double consistency = 0.0;
    double quality = 0.0;
    double mean_duration_seconds = 0.0;
    double mean_coding_rounds = 0.0;
    double mean_review_rounds = 0.0;
    double mean_test_rounds = 0.0;
    PhaseEfficiency efficiency;  // means over tasks
};

MetricBundle compute_bundle(std::span<const ExecutionChain> chains, std::span<const double> durations_seconds,
                            Sandbox& sandbox, Embedder& embedder, std::size_t max_review, std::size_t max_test);

// Row i (consuming batch i) holds the share of batch i's retrieval hits that
// came from records produced by batch j. Batches are 1-based; the matrix is
// stored 0-based, n x n.
struct UtilizationMatrix {
    std::size_t batches = 0;
    std::vector<std::vector<double>> rows;

    double at(std::size_t consuming, std::size_t producing) const { return rows.at(consuming - 1).at(producing - 1); }
};

// hits[i] maps producing batch -> number of hits during consuming batch i + 1.
UtilizationMatrix utilization_matrix(std::span<const std::map<std::size_t, std::uint64_t>> hits);

std::string utilization_csv(const UtilizationMatrix& matrix);

// Everything recorded about one batch of a run; serialized as metrics.json.
struct BatchSummary {
    std::size_t batch = 0;
    std::size_t active_pool_size = 0;
    std::vector<std::size_t> active_origins;
    std::size_t acquired_records = 0;
    std::size_t acquired_shortcuts = 0;
    std::optional<double> hit_ratio;  // unset when the active pool was empty
    std::uint64_t retrieval_events = 0;
    std::map<std::size_t, std::uint64_t> hits_by_origin;
    MetricBundle metrics;
    std::optional<EliminationAccounting> elimination;
    // Eliminated runs only: distinct records acquired by earlier batches (the
    // would-be cumulative pool), and distinct records that were part of any
    // active pool up to and including this batch.
    std::size_t acquired_to_date = 0;
    std::size_t retained_to_date = 0;
};

nlohmann::json to_json(const BatchSummary& summary);
BatchSummary batch_summary_from_json(const nlohmann::json& j);

struct RunReport {
    std::string run_id;
    std::string pattern;
    std::size_t expected_batches = 0;
    std::vector<BatchSummary> batches;  // completed batches in order
    std::vector<std::size_t> missing;   // batch ordinals without a checkpoint
    std::optional<EliminationAccounting> run_elimination;
};

RunReport build_report(std::string run_id, std::string pattern, std::size_t expected_batches,
                       std::vector<BatchSummary> batches);

// Missing batches contribute all-zero rows.
UtilizationMatrix report_utilization(const RunReport& report);

nlohmann::json report_json(const RunReport& report);
std::string report_text(const RunReport& report);

}  // namespace ier
