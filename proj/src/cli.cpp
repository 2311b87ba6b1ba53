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

#include "ier/cli.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ier/acquisition.hpp"
#include "ier/config.hpp"
#include "ier/elimination.hpp"
#include "ier/errors.hpp"
#include "ier/jsonl.hpp"
#include "ier/metrics.hpp"
#include "ier/pool.hpp"
#include "ier/propagation.hpp"

namespace ier::cli {
namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

class DirectoryBusy : public Error {
  public:
    using Error::Error;
};

// Exclusive advisory lock on <dir>/.lock, held for the object's lifetime.
class DirLock {
  public:
    explicit DirLock(const fs::path& dir) {
        fs::create_directories(dir);
        const auto path = (dir / ".lock").string();
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
        if (fd_ < 0) throw ConfigError("cannot open lock file " + path);
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            throw DirectoryBusy("run directory " + dir.string() + " is in use by another invocation");
        }
    }
    ~DirLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

  private:
    int fd_ = -1;
};

// Values given on the command line; unset ones leave the config alone.
struct Overrides {
    std::string config_path;
    std::optional<std::string> pattern;
    std::optional<std::size_t> batches;
    std::optional<std::uint64_t> seed;
    std::optional<double> epsilon;
    std::optional<double> theta;
    std::optional<std::size_t> k;
    std::optional<std::string> backend;
    std::optional<std::string> out;
    std::optional<std::string> corpus;
    std::optional<std::string> fixtures;
    std::optional<std::string> run_id;
    std::optional<std::size_t> parallelism;

    void add_run_flags(CLI::App& app) {
        app.add_option("--pattern", pattern, "successive | cumulative | eliminated");
        app.add_option("--batches", batches, "number of task batches");
        app.add_option("--seed", seed, "seed for partitioning");
        app.add_option("--epsilon", epsilon, "gain threshold");
        app.add_option("--theta", theta, "cumulative frequency share threshold");
        app.add_option("--k", k, "few-shot examples per retrieval");
        app.add_option("--backend", backend, "remote | scripted");
        app.add_option("--fixtures", fixtures, "fixture table for the scripted backend");
        app.add_option("--parallelism", parallelism, "concurrent tasks per batch");
    }

    AppConfig resolve() const {
        AppConfig c = config_path.empty() ? AppConfig{} : load_config(config_path);
        if (pattern) c.run.pattern = pattern_from_string(*pattern);
        if (batches) c.run.n_batches = *batches;
        if (seed) c.run.seed = *seed;
        if (epsilon) c.run.epsilon = *epsilon;
        if (theta) c.run.theta = *theta;
        if (k) c.run.k = *k;
        if (parallelism) c.run.parallelism = *parallelism;
        if (backend) {
            if (*backend != "scripted" && *backend != "remote")
                throw ConfigError("--backend must be scripted or remote, got " + *backend);
            c.backend_mode = *backend;
        }
        if (out) c.out_dir = *out;
        if (corpus) c.corpus = *corpus;
        if (fixtures) c.fixtures = *fixtures;
        if (run_id) c.run_id = *run_id;
        c.run.validate();
        return c;
    }
};

std::vector<TaskBatch> partition_corpus(const AppConfig& c, std::ostream& err, bool verbose) {
    if (c.corpus.empty()) throw ConfigError("no corpus given (--corpus or [run] corpus)");
    auto tasks = load_tasks(c.corpus.string());
    std::vector<std::string> warnings;
    auto batches = partition_tasks(std::move(tasks), c.run.n_batches, c.run.seed, &warnings);
    if (verbose)
        for (const auto& w : warnings) err << "warning: " << w << '\n';
    return batches;
}

void write_report_files(const RunReport& report, const fs::path& dir) {
    fs::create_directories(dir);
    write_text_atomic((dir / "report.json").string(), report_json(report).dump(2) + "\n");
    write_text_atomic((dir / "report.txt").string(), report_text(report));
    write_text_atomic((dir / "utilization.csv").string(), utilization_csv(report_utilization(report)));
}

// ---- ingest ----

int cmd_ingest(const Overrides& o, const std::string& manifest_path, std::ostream& out, std::ostream& err,
               bool verbose) {
    const auto c = o.resolve();
    const auto batches = partition_corpus(c, err, verbose);
    write_text_atomic(manifest_path, manifest_jsonl(batches));

    std::map<std::string, std::vector<std::size_t>> per_category;
    std::size_t total = 0;
    for (const auto& b : batches) {
        total += b.tasks.size();
        for (const auto& t : b.tasks) {
            auto& row = per_category[t.category];
            row.resize(batches.size(), 0);
            ++row[b.ordinal - 1];
        }
    }
    out << total << " tasks, " << per_category.size() << " categories, " << batches.size() << " batches\n";
    for (const auto& b : batches) out << "batch " << b.ordinal << ": " << b.tasks.size() << " tasks\n";
    std::size_t width = 8;
    for (const auto& [name, _] : per_category) width = std::max(width, name.size() + 2);
    out << '\n' << std::left << std::setw(static_cast<int>(width)) << "category" << std::right;
    for (const auto& b : batches) out << std::setw(6) << b.ordinal;
    out << '\n';
    for (const auto& [name, row] : per_category) {
        out << std::left << std::setw(static_cast<int>(width)) << name << std::right;
        for (auto n : row) out << std::setw(6) << n;
        out << '\n';
    }
    out << "wrote " << manifest_path << '\n';
    return kExitOk;
}

// ---- run ----

int cmd_run(const Overrides& o, bool resume, std::ostream& out, std::ostream& err, bool verbose, bool quiet) {
    auto c = o.resolve();
    c.run.wall_clock = c.effective_wall_clock();
    const auto run_dir = c.out_dir / c.effective_run_id();
    DirLock lock(run_dir);

    const auto described = describe_config(c);
    const auto run_json = run_dir / "run.json";
    if (resume && fs::exists(run_json) && read_text(run_json.string()) != described)
        throw ConfigError("settings differ from the interrupted run recorded in " + run_json.string());

    const auto batches = partition_corpus(c, err, verbose);
    auto backends = make_backends(c);
    write_text_atomic(run_json.string(), described);
    write_text_atomic((run_dir / "manifest.jsonl").string(), manifest_jsonl(batches));

    RunOptions options;
    options.checkpoint_dir = run_dir;
    options.resume = resume;
    options.on_batch = [&](const BatchResult& r) {
        if (quiet) return;
        const auto& s = r.summary;
        out << "batch " << s.batch << ": " << s.metrics.tasks << " tasks, pool " << s.active_pool_size
            << ", acquired " << s.acquired_records << ", quality " << fixed(s.metrics.quality, 4);
        if (s.elimination && s.elimination->original > 0)
            out << ", retained " << s.elimination->retained << "/" << s.elimination->original << " = "
                << fixed(s.elimination->retained_fraction(), 6);
        out << '\n';
    };

    try {
        run_pattern(batches, backends.view(), c.run, options);
    } catch (const RunInterrupted& e) {
        err << "interrupted: " << e.what() << "\n";
        err << "completed batches are checkpointed in " << run_dir.string() << "; rerun with --resume\n";
        return kExitResumable;
    }

    const auto report =
        load_run_report(run_dir, c.effective_run_id(), std::string(to_string(c.run.pattern)), batches.size());
    write_report_files(report, run_dir);
    if (!quiet) out << '\n' << report_text(report);
    out << "run directory: " << run_dir.string() << '\n';
    return kExitOk;
}

// ---- acquire ----

int cmd_acquire(const Overrides& o, const std::string& chains_path, const std::string& pool_path,
                std::size_t batch, std::uint64_t first_ord, std::ostream& out) {
    const auto c = o.resolve();
    auto chains = load_chains(chains_path);
    auto backends = make_backends(c);

    ExperiencePool pool(backends.embedder->dimension());
    std::uint64_t ord = first_ord;
    std::size_t shortcuts = 0;
    for (auto& chain : chains) {
        auto found = extract_shortcuts(chain, *backends.agent, batch);
        const auto scores = score_chain(chain, *backends.embedder, *backends.sandbox);
        assign_gains(found, scores);
        std::vector<ExperienceRecord> records;
        for (const auto& s : found) {
            auto pair = split_shortcut(s, ord, backends.embedder.get());
            ord += 2;
            records.push_back(std::move(pair.s2i));
            records.push_back(std::move(pair.i2s));
        }
        shortcuts += found.size();
        pool.ingest(records);
    }
    save_pool(pool, pool_path);
    out << chains.size() << " chains, " << shortcuts << " shortcuts, " << pool.size() << " records ("
        << pool.size(RecordKind::S2I) << " S2I, " << pool.size(RecordKind::I2S) << " I2S)\n";
    out << "wrote " << pool_path << '\n';
    return kExitOk;
}

// ---- eliminate ----

int cmd_eliminate(const std::string& pool_path, const std::string& snapshot_path, double epsilon, double theta,
                  const std::string& out_path, std::ostream& out, std::ostream& err) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in [0, 1]");
    const auto pool = load_pool(pool_path);
    const auto candidates = pool.records();

    std::optional<ExperiencePool> snapshot;
    if (snapshot_path.empty()) {
        err << "warning: no frequency snapshot given; applying the gain filter only\n";
    } else if (!fs::exists(snapshot_path)) {
        err << "warning: frequency snapshot " << snapshot_path << " not found; applying the gain filter only\n";
    } else {
        snapshot = load_pool(snapshot_path);
        if (snapshot->dimension() != pool.dimension())
            throw ParseError("frequency snapshot dimension " + std::to_string(snapshot->dimension()) +
                                 " differs from pool dimension " + std::to_string(pool.dimension()),
                             1);
    }
    std::vector<ExperienceRecord> usage;
    if (snapshot) usage = snapshot->records();

    const auto result = snapshot ? eliminate(candidates, std::span<const ExperienceRecord>(usage), epsilon, theta)
                                 : eliminate(candidates, std::nullopt, epsilon, theta);
    ExperiencePool kept(pool.dimension());
    kept.ingest(result.combined);
    save_pool(kept, out_path);

    const auto& a = result.accounting;
    out << "gain filter (epsilon " << fixed(epsilon, 4) << "): " << a.gain_retained << "/" << a.gain_input
        << " kept\n";
    if (snapshot) {
        out << "frequency filter (theta " << fixed(theta, 4) << "): " << a.frequency_retained << "/"
            << a.frequency_input << " kept";
        if (a.frequency_all_zero) out << " (no recorded usage)";
        out << '\n';
    }
    out << "before: " << a.original << " records\n";
    out << "after: " << a.retained << " records\n";
    if (a.original > 0)
        out << "retained fraction: " << a.retained << "/" << a.original << " = " << fixed(a.retained_fraction(), 6)
            << " (" << fixed(100.0 * a.retained_fraction(), 2) << "%)\n";
    else
        out << "retained fraction: undefined (empty input)\n";
    out << "wrote " << out_path << '\n';
    return kExitOk;
}

// ---- inspect ----

int cmd_inspect(const std::string& pool_path, std::size_t top, std::ostream& out) {
    const auto pool = load_pool(pool_path);
    const auto records = pool.records();
    out << "records: " << pool.size() << " (" << pool.size(RecordKind::S2I) << " S2I, "
        << pool.size(RecordKind::I2S) << " I2S), dimension " << pool.dimension() << '\n';

    std::map<std::size_t, std::size_t> by_batch;
    std::size_t scored = 0;
    double gmin = 0, gmax = 0, gsum = 0;
    std::uint64_t used = 0, freq_total = 0;
    for (const auto& r : records) {
        ++by_batch[r.origin_batch];
        if (r.gain) {
            if (scored == 0 || *r.gain < gmin) gmin = *r.gain;
            if (scored == 0 || *r.gain > gmax) gmax = *r.gain;
            gsum += *r.gain;
            ++scored;
        }
        if (r.freq > 0) ++used;
        freq_total += r.freq;
    }
    out << "origin batches:";
    for (const auto& [b, n] : by_batch) out << ' ' << b << ':' << n;
    out << '\n';
    if (scored > 0)
        out << "gain: " << scored << " scored, min " << fixed(gmin, 4) << ", mean "
            << fixed(gsum / static_cast<double>(scored), 4) << ", max " << fixed(gmax, 4) << '\n';
    else
        out << "gain: none scored\n";
    out << "usage: " << freq_total << " retrievals, " << used << " records retrieved";
    if (!records.empty()) out << ", hit ratio " << fixed(hit_ratio(pool), 4);
    out << '\n';

    if (top > 0 && freq_total > 0) {
        auto ranked = records;
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.freq > b.freq; });
        out << "most retrieved:\n";
        for (std::size_t i = 0; i < std::min(top, ranked.size()) && ranked[i].freq > 0; ++i) {
            auto key = ranked[i].key_text.substr(0, 60);
            std::replace(key.begin(), key.end(), '\n', ' ');
            out << "  " << ranked[i].freq << "  " << to_string(ranked[i].kind) << "  " << ranked[i].id << "  "
                << key << '\n';
        }
    }
    return kExitOk;
}

// ---- report ----

int cmd_report(const std::string& run_dir_arg, const std::string& out_dir_arg, std::ostream& out,
               std::ostream& err) {
    const fs::path run_dir(run_dir_arg);
    const auto run_json = run_dir / "run.json";
    if (!fs::exists(run_json)) throw ParseError("no run.json in " + run_dir.string(), 0);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_text(run_json.string()));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(run_json.string() + ": " + e.what(), 1);
    }
    const fs::path out_dir = out_dir_arg.empty() ? run_dir : fs::path(out_dir_arg);
    DirLock lock(run_dir);
    const auto report = load_run_report(run_dir, meta.at("run_id").get<std::string>(),
                                        meta.at("pattern").get<std::string>(), meta.at("batches").get<std::size_t>());
    write_report_files(report, out_dir);
    out << report_text(report);
    if (!report.missing.empty()) {
        err << "warning: incomplete run, missing batches:";
        for (auto i : report.missing) err << ' ' << i;
        err << '\n';
    }
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Experience acquisition, propagation and elimination for multi-agent software development"};
    app.require_subcommand(1);
    bool verbose = false;
    bool quiet = false;
    app.add_flag("-v,--verbose", verbose, "print warnings and extra progress");
    app.add_flag("-q,--quiet", quiet, "print only the final summary");

    Overrides ov;
    bool resume = false;
    std::string manifest_path = "manifest.jsonl";
    std::string chains_path, pool_path, snapshot_path, out_path, run_dir, report_out;
    std::size_t acquire_batch = 1, top = 10;
    std::uint64_t first_ord = 0;
    double epsilon = kDefaultEpsilon, theta = kDefaultTheta;

    auto* ingest = app.add_subcommand("ingest", "partition a task corpus into batches");
    ingest->add_option("--config", ov.config_path, "configuration file");
    ingest->add_option("--corpus", ov.corpus, "task corpus (JSON Lines)");
    ingest->add_option("--batches", ov.batches, "number of batches");
    ingest->add_option("--seed", ov.seed, "partition seed");
    ingest->add_option("--out", manifest_path, "manifest output path");

    auto* run_cmd = app.add_subcommand("run", "execute a propagation pattern end to end");
    run_cmd->add_option("--config", ov.config_path, "configuration file");
    run_cmd->add_option("--corpus", ov.corpus, "task corpus (JSON Lines)");
    run_cmd->add_option("--out", ov.out, "parent directory of run directories");
    run_cmd->add_option("--run-id", ov.run_id, "run directory name");
    run_cmd->add_flag("--resume", resume, "continue at the first unfinished batch");
    ov.add_run_flags(*run_cmd);

    auto* acquire = app.add_subcommand("acquire", "mine shortcuts from saved chains into a pool");
    acquire->add_option("--config", ov.config_path, "configuration file (backends)");
    acquire->add_option("--chains", chains_path, "chain log (JSON Lines)")->required();
    acquire->add_option("--out", pool_path, "pool output path")->required();
    acquire->add_option("--batch", acquire_batch, "origin batch recorded on the records");
    acquire->add_option("--first-ord", first_ord, "creation ordinal of the first record");
    acquire->add_option("--backend", ov.backend, "remote | scripted");
    acquire->add_option("--fixtures", ov.fixtures, "fixture table for the scripted backend");

    auto* elim = app.add_subcommand("eliminate", "filter a pool by gain and usage frequency");
    elim->add_option("--pool", pool_path, "pool to filter")->required();
    elim->add_option("--freq-snapshot", snapshot_path, "pool file whose freq fields hold usage counts");
    elim->add_option("--epsilon", epsilon, "gain threshold");
    elim->add_option("--theta", theta, "cumulative frequency share threshold");
    elim->add_option("--out", out_path, "filtered pool output path")->required();

    auto* inspect = app.add_subcommand("inspect", "summarize a pool file");
    inspect->add_option("--pool", pool_path, "pool file")->required();
    inspect->add_option("--top", top, "most retrieved records to list");

    auto* report = app.add_subcommand("report", "rebuild report files from a run directory");
    report->add_option("--run-dir", run_dir, "run directory")->required();
    report->add_option("--out", report_out, "output directory (default: the run directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*ingest) return cmd_ingest(ov, manifest_path, out, err, verbose);
        if (*run_cmd) return cmd_run(ov, resume, out, err, verbose, quiet);
        if (*acquire) return cmd_acquire(ov, chains_path, pool_path, acquire_batch, first_ord, out);
        if (*elim) return cmd_eliminate(pool_path, snapshot_path, epsilon, theta, out_path, out, err);
        if (*inspect) return cmd_inspect(pool_path, top, out);
        if (*report) return cmd_report(run_dir, report_out, out, err);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const InvalidArgument& e) {
        err << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DirectoryBusy& e) {
        err << "error: " << e.what() << '\n';
        return kExitResumable;
    } catch (const RunInterrupted& e) {
        err << "error: " << e.what() << '\n';
        return kExitResumable;
    } catch (const BackendError& e) {
        err << "backend error: " << e.what() << '\n';
        return kExitResumable;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitInput;
}

}  // namespace ier::cli
